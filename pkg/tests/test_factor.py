"""Spectral factorization HH* = beta and the symmetric-matrix norm."""

import numpy as np
import pytest

from geodisc.disc import FourierDisc, unit_grid, winding
from geodisc.errors import NotPositive, NotSymmetric
from geodisc.factor import (
    scalar_outer_factor,
    spectral_factorize,
    symmetric_norm,
    symmetric_norm_sampled,
)


def grid_product(H, M=256):
    """Values of H H* on an M-point circle grid."""
    Hv = H.boundary_values(M)
    return np.einsum("mij,mkj->mik", Hv, np.conj(Hv))


def symbol_from_factor(coeff_map, m):
    """beta = H0 H0* as a FourierDisc from {k: matrix} holomorphic coeffs."""
    beta = {}
    for k1, A in coeff_map.items():
        for k2, B in coeff_map.items():
            k = k1 - k2
            beta[k] = beta.get(k, np.zeros((m, m), dtype=complex)) + A @ np.conj(B.T)
    k_min = min(beta)
    k_max = max(beta)
    coeffs = np.zeros((k_max - k_min + 1, m, m), dtype=complex)
    for k, v in beta.items():
        coeffs[k - k_min] = v
    return FourierDisc(coeffs, k_min)


def test_constant_scalar_symbol():
    beta = FourierDisc(np.array([[[4.0 + 0j]]]), 0)
    fac = spectral_factorize(beta)
    assert fac.residual < 1e-12
    # H is 2 up to a unimodular constant: |H| = 2 on T
    Hv = fac.H.boundary_values(64)[:, 0, 0]
    assert np.max(np.abs(np.abs(Hv) - 2.0)) < 1e-10
    assert fac.det_winding == 0


def test_known_factor_roundtrip():
    rng = np.random.default_rng(1)
    E = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    E *= 0.3 / np.linalg.norm(E, 2)
    beta = symbol_from_factor({0: np.eye(2), 1: E}, 2)
    fac = spectral_factorize(beta)
    assert fac.residual < 1e-8
    Bv = beta.boundary_values(256)
    assert np.max(np.abs(grid_product(fac.H) - Bv)) < 1e-8
    assert fac.min_det > 0
    assert fac.det_winding == 0


def test_random_roundtrips_various_sizes():
    rng = np.random.default_rng(2)
    for trial in range(10):
        m = int(rng.integers(1, 4))
        deg = int(rng.integers(1, 5))
        coeff_map = {0: np.eye(m) + 0.1 * rng.normal(size=(m, m))}
        for k in range(1, deg + 1):
            A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
            coeff_map[k] = (0.5 / deg / np.linalg.norm(A, 2)) * A
        beta = symbol_from_factor(coeff_map, m)
        fac = spectral_factorize(beta)
        assert fac.residual < 1e-8, f"trial {trial}: residual {fac.residual:.3e}"
        assert fac.det_winding == 0


def test_scalar_exponential_construction():
    # beta(e^{it}) = 2 + cos t > 0
    beta = FourierDisc(np.array([0.5, 2.0, 0.5], dtype=complex), -1)
    H = scalar_outer_factor(beta)
    z = unit_grid(512)
    Hv = H(z)[:, 0, 0]
    assert np.max(np.abs(np.abs(Hv) ** 2 - beta(z).real)) < 1e-10
    assert winding(FourierDisc(H.coeffs[:, 0, 0], 0)) == 0


def test_matrix_route_agrees_with_scalar_route():
    beta = FourierDisc(np.array([0.5, 2.0, 0.5], dtype=complex), -1)
    mat = FourierDisc(beta.coeffs.reshape(-1, 1, 1), -1)
    fac = spectral_factorize(mat)
    H_scalar = scalar_outer_factor(beta)
    z = unit_grid(256)
    Hm = fac.H(z)[:, 0, 0]
    Hs = H_scalar(z)[:, 0, 0]
    assert np.max(np.abs(np.abs(Hm) - np.abs(Hs))) < 1e-10


def test_rejects_nonpositive_symbol():
    # beta = cos t takes negative values
    beta = FourierDisc(np.array([[[0.5 + 0j]], [[0.0]], [[0.5]]]), -1)
    with pytest.raises(NotPositive):
        spectral_factorize(beta)


def test_rejects_nonhermitian_symbol():
    c = np.zeros((2, 2, 2), dtype=complex)
    c[0] = [[1.0, 0.3], [0.0, 1.0]]  # constant term not hermitian
    c[1] = 0.1 * np.eye(2)
    with pytest.raises((NotSymmetric, NotPositive)):
        spectral_factorize(FourierDisc(c, 0))


def test_symmetric_norm_diagonal():
    assert symmetric_norm(np.diag([1.0, 3.0])) == pytest.approx(3.0)


def test_symmetric_norm_offdiagonal():
    A = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    assert symmetric_norm(A) == pytest.approx(1.0)


def test_symmetric_norm_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        symmetric_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_symmetric_norm_equals_quadratic_sup():
    # |A| = sup |z^T A z| over unit vectors (the sampled sup never exceeds
    # the norm and the refined sup reaches it)
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(2, 5))
        A = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        A = A + A.T
        n_exact = symmetric_norm(A)
        n_mc = symmetric_norm_sampled(A, n_samples=20000, seed=7)
        assert n_mc <= n_exact + 1e-12
        assert n_exact - n_mc < 1e-3 * max(1.0, n_exact)


def test_factor_residual_invariant_under_unitary():
    # multiplying H0 on the right by a constant unitary leaves beta unchanged
    rng = np.random.default_rng(4)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    A *= 0.2 / np.linalg.norm(A, 2)
    Q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    beta1 = symbol_from_factor({0: np.eye(2), 1: A}, 2)
    beta2 = symbol_from_factor({0: Q, 1: A @ Q}, 2)
    # (H Q)(H Q)* = H H*, so the two symbols coincide coefficientwise
    assert np.max(np.abs(beta1.coeffs - beta2.coeffs)) < 1e-12
