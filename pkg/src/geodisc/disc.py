"""Truncated Fourier series on the unit circle.

Everything downstream (stationary discs, factorization, metrics) works with
the same representation: a band of Fourier coefficients a_k, k_min <= k <= N,
of a map from the circle into C, C^m, or C^{p x p}.  Holomorphic-type objects
have k_min = 0 and may be evaluated on the closed disc; genuine boundary
fields live on |zeta| = 1 only.

Conventions:
    values[j] = u(exp(2*pi*i*j/M)) = sum_k a_k exp(2*pi*i*j*k/M)
so numpy's fft of a value grid divided by M recovers a_k at index k mod M.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import AmbiguousWinding, DomainViolation, NotReal, ZeroOnCircle

# Tolerance for "is this point on the unit circle":
CIRCLE_TOL = 1e-9
# Reality / symmetry tolerance for coefficient checks:
REALITY_TOL = 1e-10


@dataclass
class FourierDisc:
    """A truncated Fourier series sum_{k=k_min}^{k_max} a_k zeta^k.

    coeffs has shape (K, *target_shape) with K = k_max - k_min + 1.
    target_shape is () for scalar fields, (m,) for maps into C^m and
    (p, p) for matrix fields.  ``debt`` accumulates l2 mass discarded by
    truncating products; it is a diagnostic, not part of the value.
    """

    coeffs: np.ndarray
    k_min: int
    debt: float = field(default=0.0, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape[0] < 1:
            raise ValueError("empty coefficient band")

    # -- basic shape info -------------------------------------------------

    @property
    def k_max(self) -> int:
        return self.k_min + self.coeffs.shape[0] - 1

    @property
    def N(self) -> int:
        """Truncation order (largest represented frequency)."""
        return self.k_max

    @property
    def target_shape(self) -> tuple:
        return self.coeffs.shape[1:]

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def is_holomorphic_type(self) -> bool:
        return self.k_min >= 0

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zeros(k_min: int, k_max: int, target_shape: tuple = ()) -> "FourierDisc":
        return FourierDisc(
            np.zeros((k_max - k_min + 1, *target_shape), dtype=complex), k_min
        )

    @staticmethod
    def constant(value, N: int = 0) -> "FourierDisc":
        v = np.asarray(value, dtype=complex)
        c = np.zeros((N + 1, *v.shape), dtype=complex)
        c[0] = v
        return FourierDisc(c, 0)

    @staticmethod
    def from_boundary_values(
        values: np.ndarray, k_min: int, k_max: int
    ) -> "FourierDisc":
        """Least-squares fit on a uniform grid: FFT and keep the band.

        values has shape (M, *target_shape) with M > k_max - k_min
        (aliasing is the caller's responsibility; use a generous grid).
        """
        values = np.asarray(values, dtype=complex)
        M = values.shape[0]
        if M < k_max - k_min + 1:
            raise ValueError("grid too small for the requested band")
        spec = np.fft.fft(values, axis=0) / M
        ks = np.arange(k_min, k_max + 1)
        return FourierDisc(spec[ks % M], k_min)

    # -- evaluation --------------------------------------------------------

    def __call__(self, zeta) -> np.ndarray:
        return evaluate(self, zeta)

    def boundary_values(self, M: int) -> np.ndarray:
        """Values on the uniform M-point grid exp(2*pi*i*j/M)."""
        if M < self.coeffs.shape[0]:
            raise ValueError("grid too small for the coefficient band")
        spec = np.zeros((M, *self.target_shape), dtype=complex)
        np.add.at(spec, self.ks % M, self.coeffs)
        return np.fft.ifft(spec, axis=0) * M

    # -- band surgery -------------------------------------------------------

    def band(self, k_min: int, k_max: int) -> "FourierDisc":
        """Restrict/extend to [k_min, k_max], zero-filling outside."""
        out = np.zeros((k_max - k_min + 1, *self.target_shape), dtype=complex)
        lo = max(k_min, self.k_min)
        hi = min(k_max, self.k_max)
        if lo <= hi:
            out[lo - k_min : hi - k_min + 1] = self.coeffs[
                lo - self.k_min : hi - self.k_min + 1
            ]
        return FourierDisc(out, k_min, debt=self.debt)

    def coefficient(self, k: int) -> np.ndarray:
        if self.k_min <= k <= self.k_max:
            return self.coeffs[k - self.k_min]
        return np.zeros(self.target_shape, dtype=complex)

    def component(self, j: int) -> "FourierDisc":
        return FourierDisc(self.coeffs[:, j], self.k_min, debt=self.debt)

    # -- arithmetic that stays in one band ----------------------------------

    def __add__(self, other: "FourierDisc") -> "FourierDisc":
        k_min = min(self.k_min, other.k_min)
        k_max = max(self.k_max, other.k_max)
        a = self.band(k_min, k_max)
        b = other.band(k_min, k_max)
        return FourierDisc(a.coeffs + b.coeffs, k_min, debt=self.debt + other.debt)

    def __sub__(self, other: "FourierDisc") -> "FourierDisc":
        return self + (other * (-1.0))

    def __mul__(self, scalar) -> "FourierDisc":
        return FourierDisc(self.coeffs * scalar, self.k_min, debt=self.debt)

    __rmul__ = __mul__

    # -- serialization -------------------------------------------------------

    def to_entries(self) -> list:
        """Coefficient dump: one {k, re, im} object per frequency."""
        flat = self.coeffs.reshape(self.coeffs.shape[0], -1)
        return [
            {
                "k": int(k),
                "re": [float(x) for x in row.real],
                "im": [float(x) for x in row.imag],
            }
            for k, row in zip(self.ks, flat)
        ]

    @staticmethod
    def from_entries(entries: Iterable[dict], target_shape: tuple = None) -> "FourierDisc":
        entries = sorted(entries, key=lambda e: e["k"])
        if not entries:
            raise ValueError("empty coefficient dump")
        ks = [int(e["k"]) for e in entries]
        k_min, k_max = ks[0], ks[-1]
        m = len(entries[0]["re"])
        if target_shape is None:
            target_shape = () if m == 1 else (m,)
        coeffs = np.zeros((k_max - k_min + 1, m), dtype=complex)
        for e in entries:
            coeffs[int(e["k"]) - k_min] = np.asarray(e["re"]) + 1j * np.asarray(e["im"])
        return FourierDisc(coeffs.reshape(-1, *target_shape), k_min)


@dataclass
class NormReport:
    """Norm bundle for one disc: plain l2, Sobolev W^{2,2}, the weighted
    eps-norm used by the contraction argument, and a sampled sup."""

    l2: float
    w22: float
    eps_norm: float
    sup: float
    eps: float


def unit_grid(M: int) -> np.ndarray:
    """The M points exp(2*pi*i*j/M), j = 0..M-1."""
    return np.exp(2j * np.pi * np.arange(M) / M)


def evaluate(u: FourierDisc, zeta) -> np.ndarray:
    """Evaluate u at zeta (scalar or array).

    Holomorphic-type discs (k_min >= 0) accept the closed unit disc;
    boundary fields only the circle itself.  Anything else raises
    DomainViolation.
    """
    z = np.asarray(zeta, dtype=complex)
    mod = np.abs(z)
    if u.is_holomorphic_type():
        if np.any(mod > 1.0 + CIRCLE_TOL):
            raise DomainViolation("holomorphic-type disc evaluated outside |zeta| <= 1")
    else:
        if np.any(np.abs(mod - 1.0) > CIRCLE_TOL):
            raise DomainViolation("boundary field evaluated off the unit circle")
    # cumulative products instead of z**k per frequency: complex pow is an
    # order of magnitude slower than multiply for wide bands
    K = u.coeffs.shape[0]
    pows = np.empty(z.shape + (K,), dtype=complex)
    pows[..., 0] = z**u.k_min if u.k_min != 0 else 1.0
    for i in range(1, K):
        pows[..., i] = pows[..., i - 1] * z
    return np.tensordot(pows, u.coeffs, axes=([-1], [0]))


def differentiate(u: FourierDisc) -> FourierDisc:
    """d/dzeta: sum k a_k zeta^{k-1}."""
    coeffs = u.ks.reshape(-1, *([1] * len(u.target_shape))) * u.coeffs
    return FourierDisc(coeffs, u.k_min - 1, debt=u.debt)


def angular_derivative(u: FourierDisc) -> FourierDisc:
    """d/dt of u(e^{it}): multiplies a_k by i*k, same band."""
    coeffs = (1j * u.ks).reshape(-1, *([1] * len(u.target_shape))) * u.coeffs
    return FourierDisc(coeffs, u.k_min, debt=u.debt)


def conj_field(u: FourierDisc) -> FourierDisc:
    """Pointwise conjugate on the circle: coefficients conj(a_{-k})."""
    return FourierDisc(np.conj(u.coeffs[::-1]), -u.k_max, debt=u.debt)


def _convolve_bands(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution along axis 0 of coefficient stacks."""
    Ka, Kb = a.shape[0], b.shape[0]
    out_shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((Ka + Kb - 1, *out_shape), dtype=complex)
    for i in range(Ka):
        out[i : i + Kb] += a[i] * b
    return out


def _truncate(coeffs: np.ndarray, k_min_full: int, k_lo: int, k_hi: int):
    """Keep [k_lo, k_hi]; return (kept, discarded l2 mass)."""
    K = coeffs.shape[0]
    ks = np.arange(k_min_full, k_min_full + K)
    keep = (ks >= k_lo) & (ks <= k_hi)
    debt = float(np.sqrt(np.sum(np.abs(coeffs[~keep]) ** 2)))
    out = np.zeros((k_hi - k_lo + 1, *coeffs.shape[1:]), dtype=complex)
    kept_ks = ks[keep]
    if kept_ks.size:
        out[kept_ks - k_lo] = coeffs[keep]
    return out, debt


def boundary_product(u: FourierDisc, v: FourierDisc, full: bool = False) -> FourierDisc:
    """Pointwise product on the circle (coefficient convolution).

    By default the result is truncated back to order N = max(u.N, v.N)
    and the discarded tail's l2 mass is added to ``debt``.  full=True keeps
    the whole convolution (exact).
    """
    conv = _convolve_bands(u.coeffs, v.coeffs)
    k_min_full = u.k_min + v.k_min
    if full:
        return FourierDisc(conv, k_min_full, debt=u.debt + v.debt)
    N = max(u.N, v.N)
    k_lo = max(k_min_full, -N)
    k_hi = min(k_min_full + conv.shape[0] - 1, N)
    out, shed = _truncate(conv, k_min_full, k_lo, k_hi)
    return FourierDisc(out, k_lo, debt=u.debt + v.debt + shed)


def dot_product(u: FourierDisc, v: FourierDisc, full: bool = False) -> FourierDisc:
    """Bilinear dot z . w = sum_j z_j w_j (no conjugation), as a scalar disc.

    Example: (zeta, i) . (1, zeta) = zeta + i*zeta = (1+i) zeta.
    """
    if u.target_shape != v.target_shape or len(u.target_shape) != 1:
        raise ValueError("dot_product expects two vector discs of equal length")
    m = u.target_shape[0]
    conv = sum(
        _convolve_bands(u.coeffs[:, j], v.coeffs[:, j]) for j in range(m)
    )
    k_min_full = u.k_min + v.k_min
    if full:
        return FourierDisc(conv, k_min_full, debt=u.debt + v.debt)
    N = max(u.N, v.N)
    k_lo = max(k_min_full, -N)
    k_hi = min(k_min_full + conv.shape[0] - 1, N)
    out, shed = _truncate(conv, k_min_full, k_lo, k_hi)
    return FourierDisc(out, k_lo, debt=u.debt + v.debt + shed)


def project_neg(u: FourierDisc) -> FourierDisc:
    """pi: keep strictly negative frequencies.

    pi(u) = 0 exactly when u extends holomorphically (on the truncated
    space).  Idempotent.
    """
    if u.k_min >= 0:
        return FourierDisc.zeros(-1, -1, u.target_shape)
    k_hi = min(u.k_max, -1)
    return u.band(u.k_min, k_hi)


def project_conj_neg(u: FourierDisc) -> FourierDisc:
    """P: u -> sum_{k>=1} conj(a_{-k}) zeta^k.

    Sends a*zeta^{-1} to conj(a)*zeta and 2cos(t) to zeta; P(P(u)) = 0
    because the image has no negative frequencies left to reflect.
    """
    if u.k_min >= 0:
        return FourierDisc.zeros(1, 1, u.target_shape)
    neg = u.band(u.k_min, -1)
    coeffs = np.conj(neg.coeffs[::-1])  # index 0 <-> k = 1
    return FourierDisc(coeffs, 1, debt=u.debt)


def check_real(u: FourierDisc, tol: float = REALITY_TOL) -> float:
    """Max asymmetry |a_{-k} - conj(a_k)| (and |Im a_0|); raises NotReal."""
    asym = 0.0
    for k in range(0, max(abs(u.k_min), u.k_max) + 1):
        if k == 0:
            asym = max(asym, float(np.max(np.abs(np.imag(u.coefficient(0))), initial=0.0)))
        else:
            d = u.coefficient(-k) - np.conj(u.coefficient(k))
            asym = max(asym, float(np.max(np.abs(d), initial=0.0)))
    if asym > tol:
        raise NotReal(f"field asymmetry {asym:.3e} exceeds {tol:.0e}")
    return asym


def real_field(values: np.ndarray, N: int) -> FourierDisc:
    """Real boundary field from real grid values, band [-N, N]."""
    M = values.shape[0]
    u = FourierDisc.from_boundary_values(np.asarray(values, dtype=complex), -N, N)
    if M <= 2 * N:
        raise ValueError("grid too small for band [-N, N]")
    # enforce exact conjugate symmetry (kills fft roundoff drift)
    c = u.coeffs
    sym = 0.5 * (c + np.conj(c[::-1]))
    return FourierDisc(sym, -N)


def analytic_completion(eta: FourierDisc, normalization: float = 0.0) -> FourierDisc:
    """The holomorphic-type G with Re G = eta on the circle.

    G = a_0 + 2 sum_{k>=1} a_k zeta^k + i*normalization.  Requires eta real
    (coefficient symmetry within 1e-10), else NotReal.  cos t -> zeta,
    sin t -> -i zeta, constants stay put.
    """
    check_real(eta)
    k_hi = max(eta.k_max, 0)
    coeffs = np.zeros((k_hi + 1, *eta.target_shape), dtype=complex)
    coeffs[0] = np.real(eta.coefficient(0)) + 1j * normalization
    for k in range(1, k_hi + 1):
        coeffs[k] = 2.0 * eta.coefficient(k)
    return FourierDisc(coeffs, 0, debt=eta.debt)


def norms(u: FourierDisc, eps: float = 0.0) -> NormReport:
    """l2, W^{2,2}, eps-norm, and sampled sup of one disc.

    W^{2,2} weights |a_k|^2 by (1 + k^2 + k^4).  The eps-norm is
    l2(u) + eps*l2(u') + eps^2*l2(u'') with angular derivatives, so it
    collapses to l2 at eps = 0.  sup is a dense boundary sample (Frobenius
    norm pointwise for non-scalar targets).
    """
    a2 = np.abs(u.coeffs.reshape(u.coeffs.shape[0], -1)) ** 2
    per_k = a2.sum(axis=1)
    ks = u.ks.astype(float)
    l2 = float(np.sqrt(per_k.sum()))
    w22 = float(np.sqrt(((1.0 + ks**2 + ks**4) * per_k).sum()))
    d1 = float(np.sqrt((ks**2 * per_k).sum()))
    d2 = float(np.sqrt((ks**4 * per_k).sum()))
    eps_norm = l2 + eps * d1 + eps * eps * d2
    M = max(8 * (abs(u.k_min) + abs(u.k_max) + 1), 256)
    vals = u.boundary_values(M).reshape(M, -1)
    sup = float(np.max(np.linalg.norm(vals, axis=1)))
    return NormReport(l2=l2, w22=w22, eps_norm=eps_norm, sup=sup, eps=eps)


def winding_values(vals: np.ndarray, min_modulus: float = 1e-8) -> int:
    """Winding number of a sampled closed curve via phase increments.

    For curves that are not band-limited (values of a composite field on
    the grid) the u'/u quadrature is unavailable; summing the principal
    arguments of consecutive ratios is exact as long as no single step
    turns by more than pi/2.
    """
    vals = np.asarray(vals, dtype=complex).ravel()
    mods = np.abs(vals)
    if float(np.min(mods)) < min_modulus:
        raise ZeroOnCircle(f"curve modulus dips to {np.min(mods):.3e}")
    steps = np.angle(np.roll(vals, -1) / vals)
    if float(np.max(np.abs(steps))) > 0.5 * np.pi:
        raise AmbiguousWinding("curve is undersampled: a step turns by > pi/2")
    w = float(np.sum(steps) / (2.0 * np.pi))
    k = int(np.round(w))
    if abs(w - k) >= 0.25:
        raise AmbiguousWinding(f"phase total {w:.6f} does not round decisively")
    return k


def winding(u: FourierDisc, min_modulus: float = 1e-8) -> int:
    """Winding number of a scalar field around 0 via trapezoid quadrature.

    Integrates u'/u over the circle on at least 8N samples.  Raises
    ZeroOnCircle if |u| dips below min_modulus on the sample grid and
    AmbiguousWinding if the quadrature is further than 0.25 from an
    integer.
    """
    if u.target_shape != ():
        raise ValueError("winding is defined for scalar fields")
    span = abs(u.k_min) + abs(u.k_max) + 1
    M = max(8 * span, 512)
    vals = u.boundary_values(M)
    dvals = angular_derivative(u).boundary_values(M)
    if float(np.min(np.abs(vals))) < min_modulus:
        raise ZeroOnCircle(
            f"field modulus dips to {np.min(np.abs(vals)):.3e} on the circle"
        )
    total = np.sum(dvals / vals) / (1j * M)
    w = float(np.real(total))
    k = int(np.round(w))
    if abs(w - k) >= 0.25:
        raise AmbiguousWinding(f"quadrature {w:.6f} does not round decisively")
    return k
