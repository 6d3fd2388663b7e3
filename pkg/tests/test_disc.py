"""Fourier calculus on circle maps: evaluation, products, projections,
harmonic completion, norms, winding."""

import numpy as np
import pytest

from geodisc.disc import (
    FourierDisc,
    analytic_completion,
    angular_derivative,
    boundary_product,
    check_real,
    conj_field,
    differentiate,
    dot_product,
    evaluate,
    norms,
    project_conj_neg,
    project_neg,
    real_field,
    unit_grid,
    winding,
    winding_values,
)
from geodisc.errors import AmbiguousWinding, DomainViolation, NotReal, ZeroOnCircle


def holo(*coeffs):
    """Holomorphic-type scalar disc from a₀, a₁, ..."""
    return FourierDisc(np.array(coeffs, dtype=complex), 0)


def test_evaluate_identity():
    u = holo(0.0, 1.0)  # u = zeta
    assert u(1j) == pytest.approx(1j)


def test_evaluate_polynomial():
    u = holo(1.0, 2.0)
    assert u(0.5) == pytest.approx(2.0)


def test_evaluate_boundary_field_conjugate():
    u = FourierDisc(np.array([1.0 + 0j]), -1)  # zeta^{-1} = conj on T
    z = np.exp(1j * np.pi / 4)
    assert u(z) == pytest.approx(np.exp(-1j * np.pi / 4))


def test_evaluate_rejects_interior_for_boundary_fields():
    u = FourierDisc(np.array([1.0 + 0j, 0.0, 0.0]), -1)
    with pytest.raises(DomainViolation):
        u(0.5)


def test_evaluate_rejects_outside_disc():
    u = holo(0.0, 1.0)
    with pytest.raises(DomainViolation):
        u(1.5)


def test_evaluate_matches_direct_sum_on_random_bands():
    rng = np.random.default_rng(11)
    for _ in range(20):
        k_min = int(rng.integers(-6, 1))
        k_max = int(rng.integers(k_min, k_min + 9))
        c = rng.normal(size=(k_max - k_min + 1, 2)) + 1j * rng.normal(
            size=(k_max - k_min + 1, 2)
        )
        u = FourierDisc(c, k_min)
        z = np.exp(2j * np.pi * rng.random(5))
        direct = sum(
            c[i][None, :] * z[:, None] ** (k_min + i) for i in range(len(c))
        )
        assert np.max(np.abs(u(z) - direct)) < 1e-12


def test_boundary_values_roundtrip():
    rng = np.random.default_rng(3)
    c = rng.normal(size=(9, 3)) + 1j * rng.normal(size=(9, 3))
    u = FourierDisc(c, -4)
    vals = u.boundary_values(32)
    back = FourierDisc.from_boundary_values(vals, -4, 4)
    assert np.max(np.abs(back.coeffs - u.coeffs)) < 1e-13


def test_differentiate_power():
    u = holo(0.0, 0.0, 1.0)  # zeta^2
    du = differentiate(u)
    assert du.coefficient(1) == pytest.approx(2.0)
    assert abs(du.coefficient(0)) == 0.0


def test_differentiate_constant_is_zero():
    du = differentiate(holo(5.0))
    assert np.all(du.coeffs == 0)


def test_angular_derivative():
    # d/dt of e^{ikt} is ik e^{ikt}
    u = FourierDisc(np.array([1.0 + 0j]), 3)
    du = angular_derivative(u)
    assert du.coefficient(3) == pytest.approx(3j)


def test_boundary_product_powers():
    u = holo(0.0, 1.0)
    v = boundary_product(u, u, full=True)
    assert v.coefficient(2) == pytest.approx(1.0)
    assert norms(v + (-1.0) * holo(0.0, 0.0, 1.0)).l2 < 1e-14


def test_dot_product_no_conjugation():
    e1 = FourierDisc(np.array([[1.0, 0.0]], dtype=complex), 0)
    e2 = FourierDisc(np.array([[0.0, 1.0]], dtype=complex), 0)
    assert norms(dot_product(e1, e2)).l2 == 0.0
    # (zeta, i) . (1, zeta) = (1 + i) zeta
    u = FourierDisc(np.array([[0.0, 1j], [1.0, 0.0]], dtype=complex), 0)
    v = FourierDisc(np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex), 0)
    w = dot_product(u, v)
    assert w.coefficient(1) == pytest.approx(1.0 + 1j)


def test_project_neg_keeps_negative_band():
    u = FourierDisc(np.array([1.0, 0.0, 3.0, 1.0], dtype=complex), -2)
    p = project_neg(u)
    assert p.coefficient(-2) == pytest.approx(1.0)
    assert p.coefficient(0) == 0.0 and p.coefficient(1) == 0.0


def test_project_neg_kills_holomorphic():
    assert norms(project_neg(holo(1.0, 2.0, 3.0))).l2 == 0.0


def test_project_neg_idempotent():
    rng = np.random.default_rng(7)
    c = rng.normal(size=(11,)) + 1j * rng.normal(size=(11,))
    u = FourierDisc(c, -5)
    once = project_neg(u)
    twice = project_neg(once)
    assert np.max(np.abs(once.coeffs - twice.coeffs)) == 0.0


def test_project_conj_neg_flips_frequency():
    a = 2.0 + 1j
    u = FourierDisc(np.array([a, 0.0], dtype=complex), -1)
    p = project_conj_neg(u)
    assert p.coefficient(1) == pytest.approx(np.conj(a))
    assert p.k_min >= 0


def test_project_conj_neg_on_projection_vanishes():
    rng = np.random.default_rng(8)
    c = rng.normal(size=(9,)) + 1j * rng.normal(size=(9,))
    u = FourierDisc(c, -4)
    assert norms(project_conj_neg(project_conj_neg(u))).l2 == 0.0


def test_project_conj_neg_of_two_cos():
    # 2 cos t = zeta + zeta^{-1}  ->  P(u) = zeta
    u = FourierDisc(np.array([1.0, 0.0, 1.0], dtype=complex), -1)
    p = project_conj_neg(u)
    assert p.coefficient(1) == pytest.approx(1.0)
    assert norms(p + (-1.0) * holo(0.0, 1.0)).l2 < 1e-15


def test_analytic_completion_cos():
    eta = FourierDisc(np.array([0.5, 0.0, 0.5], dtype=complex), -1)  # cos t
    G = analytic_completion(eta)
    assert norms(G + (-1.0) * holo(0.0, 1.0)).l2 < 1e-14


def test_analytic_completion_constant():
    G = analytic_completion(FourierDisc(np.array([1.0 + 0j]), 0))
    assert G.coefficient(0) == pytest.approx(1.0)
    assert G.k_max == 0


def test_analytic_completion_sin():
    # sin t = (zeta - zeta^{-1}) / 2i  ->  G = -i zeta
    eta = FourierDisc(np.array([0.5j, 0.0, -0.5j]), -1)
    G = analytic_completion(eta)
    assert G.coefficient(1) == pytest.approx(-1j)


def test_analytic_completion_real_part_matches():
    rng = np.random.default_rng(21)
    for _ in range(10):
        N = int(rng.integers(2, 20))
        vals = rng.normal(size=64)
        eta = real_field(vals, N)
        G = analytic_completion(eta, normalization=0.3)
        gv = G.boundary_values(128)
        ev = eta.boundary_values(128)
        assert np.max(np.abs(gv.real - ev.real)) < 1e-12
        assert G(0.0).imag == pytest.approx(0.3)


def test_analytic_completion_rejects_nonreal():
    u = FourierDisc(np.array([1j, 0.0, 0.0], dtype=complex), -1)
    with pytest.raises(NotReal):
        analytic_completion(u)


def test_real_field_symmetry():
    vals = np.cos(2 * np.pi * np.arange(16) / 16) ** 3
    u = real_field(vals, 5)
    assert check_real(u) < 1e-14
    for k in range(1, 6):
        assert u.coefficient(-k) == pytest.approx(np.conj(u.coefficient(k)))


def test_norms_identity_disc():
    rep = norms(holo(0.0, 1.0))
    assert rep.w22 == pytest.approx(np.sqrt(3.0))
    assert rep.l2 == pytest.approx(1.0)


def test_norms_constant():
    rep = norms(holo(1.0))
    assert rep.l2 == pytest.approx(1.0)
    assert rep.w22 == pytest.approx(1.0)
    assert rep.sup == pytest.approx(1.0)


def test_sup_bounded_by_w_norm():
    # |u|_sup <= (pi/sqrt 3) |u|_W on random discs
    rng = np.random.default_rng(5)
    for _ in range(50):
        c = rng.normal(size=(13,)) + 1j * rng.normal(size=(13,))
        rep = norms(FourierDisc(c, -6))
        assert rep.sup <= (np.pi / np.sqrt(3.0)) * rep.w22 + 1e-12


def test_eps_norm_reduces_to_l2():
    rng = np.random.default_rng(6)
    c = rng.normal(size=(9,)) + 1j * rng.normal(size=(9,))
    u = FourierDisc(c, -4)
    assert norms(u, eps=0.0).eps_norm == pytest.approx(norms(u).l2)
    assert norms(u, eps=0.5).eps_norm >= norms(u).l2


def test_winding_powers():
    assert winding(holo(0.0, 0.0, 0.0, 1.0)) == 3
    assert winding(FourierDisc(np.array([1.0 + 0j]), -1)) == -1
    assert winding(holo(2.0, 1.0)) == 0  # re > 0 on T


def test_winding_additive_on_products():
    rng = np.random.default_rng(9)
    for _ in range(20):
        # nonvanishing by construction: dominant leading coefficient
        k1, k2 = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        c1 = 0.1 * (rng.normal(size=k1 + 1) + 1j * rng.normal(size=k1 + 1))
        c2 = 0.1 * (rng.normal(size=k2 + 1) + 1j * rng.normal(size=k2 + 1))
        c1[-1] = 1.0
        c2[-1] = 1.0
        u, v = FourierDisc(c1, 0), FourierDisc(c2, 0)
        uv = boundary_product(u, v, full=True)
        assert winding(uv) == winding(u) + winding(v) == k1 + k2


def test_winding_counts_zeros_in_disc():
    # (zeta - 0.5)(zeta - 0.2): two roots inside
    u = holo(0.1, -0.7, 1.0)
    assert winding(u) == 2
    # (zeta - 2): no root inside
    assert winding(holo(-2.0, 1.0)) == 0


def test_winding_values_raises_on_zero():
    vals = np.full(64, 1.0 + 0j)
    vals[20] = 1e-12
    with pytest.raises(ZeroOnCircle):
        winding_values(vals)


def test_winding_ambiguous_jump():
    # alternating signs: phase jumps of pi each step
    vals = np.where(np.arange(16) % 2 == 0, 1.0, -1.0).astype(complex)
    with pytest.raises(AmbiguousWinding):
        winding_values(vals)


def test_conj_field_on_boundary():
    rng = np.random.default_rng(13)
    c = rng.normal(size=(7, 2)) + 1j * rng.normal(size=(7, 2))
    u = FourierDisc(c, -3)
    z = unit_grid(32)
    assert np.max(np.abs(conj_field(u)(z) - np.conj(u(z)))) < 1e-13


def test_band_and_coefficient_access():
    u = FourierDisc(np.arange(1, 6, dtype=complex), -2)
    b = u.band(0, 2)
    assert b.coefficient(0) == pytest.approx(3.0)
    assert b.coefficient(-1) == 0.0
    assert u.coefficient(7) == 0.0  # outside the band


def test_entries_roundtrip():
    rng = np.random.default_rng(17)
    c = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    u = FourierDisc(c, -1)
    back = FourierDisc.from_entries(u.to_entries())
    assert back.k_min == u.k_min
    assert np.max(np.abs(back.coeffs - u.coeffs)) == 0.0


def test_entries_roundtrip_scalar_target():
    u = FourierDisc(np.array([1.0 + 2j, 0.5]), 0)
    back = FourierDisc.from_entries(u.to_entries(), target_shape=())
    assert back.target_shape == ()
    assert np.max(np.abs(back.coeffs - u.coeffs)) == 0.0


def test_arithmetic_and_constant():
    u = FourierDisc.constant(np.array([1.0 + 0j, 2.0]), 3)
    v = u + (-0.5) * u
    z = unit_grid(8)
    assert np.max(np.abs(v(z) - 0.5 * u(z))) < 1e-14
