import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.oracles import Y_oracle, expm_numeric
from viscowave.spectral_grid import VerticalGrid
from viscowave.symbols import (
    DegenerateBoundaryMatrix,
    Reparam,
    WaveParams,
    boundary_matrix,
    boundary_matrix_rs,
    build_system_matrix,
    eval_m,
    eval_rho,
    eval_symbols,
    eval_Y,
    eval_Y_kappa_zero,
    eval_Y_printed,
    expA_closed_form,
    expA_rs,
    expA_split,
    m_asymptotic_infty,
    m_asymptotic_zero,
    m_kappa_zero,
    reparam,
    s_of,
    system_matrix_rs,
)

TWO_PI = 2 * math.pi

r_st = st.floats(min_value=1e-3, max_value=30.0)
kappa_st = st.floats(min_value=-2.0, max_value=2.0)
x_st = st.floats(min_value=0.0, max_value=1.0)


def rep_of(r, kappa):
    return Reparam(r, kappa, s_of(r, kappa))


# --- parameters and reparametrization ----------------------------------------------


def test_wave_params_validation():
    with pytest.raises(ValueError):
        WaveParams(1.0, 1.0, b=0.0)
    with pytest.raises(ValueError):
        WaveParams(1.0, -1.0)
    with pytest.raises(ValueError):
        WaveParams(1.0, 1.0, horiz_dim=3)
    assert WaveParams(1.0, 0.0, 2.0, 2).n == 3


def test_reparam_kappa_zero_gives_s_equal_r():
    rep = reparam(np.array([0.0, 3 / TWO_PI]), 1.0)
    assert rep.kappa == 0.0
    assert rep.s == pytest.approx(3.0, abs=1e-15)


def test_reparam_r1_kappa1_frozen():
    s = s_of(1.0, 1.0)
    assert s.real == pytest.approx(math.sqrt((1 + math.sqrt(2)) / 2), rel=1e-15)
    assert s.imag == pytest.approx(-1 / (math.sqrt(2) * math.sqrt(1 + math.sqrt(2))), rel=1e-15)


def test_reparam_zero_frequency():
    rep = reparam(np.zeros(2), 2.0)
    assert (rep.r, rep.kappa, rep.s) == (0.0, 0.0, 0j)


def test_real_part_expansion_decays():
    # |Re s - r - kappa^2/(8r)| should fall like r^-3
    errs = [abs(s_of(r, 1.0).real - r - 1 / (8 * r)) for r in (10.0, 100.0)]
    assert errs[1] < errs[0] * 2e-3
    assert errs[0] < 1e-3


@given(r_st, kappa_st)
def test_s_invariants(r, kappa):
    s = s_of(r, kappa)
    assert abs(s * s - (r * r - 1j * r * kappa)) <= 1e-13 * (r * r + r * abs(kappa))
    assert s.real >= r * (1 - 1e-15)
    assert s.real <= r + kappa**2 / (8 * r) + 1e-12 * r
    assert -math.copysign(1, kappa) * s.imag >= -1e-15
    assert abs(s.imag) <= abs(kappa) / 2 + 1e-15


# --- matrices -------------------------------------------------------------------------


def test_system_matrix_at_zero_frequency():
    A = build_system_matrix(np.zeros(1), 1.7)
    expect = np.zeros((4, 4))
    expect[0, 3] = 1
    np.testing.assert_array_equal(A, expect)


def test_system_matrix_unit_r_real():
    # 2 pi |xi| = 1 with xi_1 = 0: every entry is 0, +-1
    A = build_system_matrix(np.array([0.0, 1 / TWO_PI]), 1.0)
    expect = np.array([[0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, -1], [1, 0, -1, 0]], dtype=complex)
    np.testing.assert_allclose(A, expect, atol=1e-15)


def test_sixth_power_small_frequency():
    # entries scale like |xi|^3: a tenfold smaller frequency shrinks them a thousandfold
    sizes = [np.abs(np.linalg.matrix_power(build_system_matrix(np.array([x]), 1.0), 6)).max() for x in (1e-3, 1e-4)]
    assert sizes[0] <= 2 * TWO_PI**3 * (1e-3) ** 3
    assert sizes[0] / sizes[1] == pytest.approx(1e3, rel=0.05)


def test_system_matrix_depends_on_norm_and_gamma_xi1():
    A1 = build_system_matrix(np.array([0.3, 0.4]), 2.0)
    A2 = build_system_matrix(np.array([0.6, 0.0]), 0.5 * 2.0 * 0.3 / 0.6 * 2)
    # |xi| = 0.5 vs 0.6 differ, so instead compare the same (|xi|, gamma xi_1)
    A3 = build_system_matrix(np.array([0.3, -0.4]), 2.0)
    np.testing.assert_allclose(A1, A3)
    assert not np.allclose(A1, A2)


def test_boundary_matrix_zero_frequency_block():
    sm = boundary_matrix(np.zeros(1), 1.0, 1.0)
    np.testing.assert_allclose(sm.B4, [[0, -1], [1, 0]], atol=1e-15)
    np.testing.assert_allclose(sm.B[:2, :2], np.eye(2))
    np.testing.assert_allclose(sm.B[:2, 2:], 0)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.01, max_value=20.0), kappa_st)
def test_boundary_matrix_against_oracle(r, kappa):
    s = s_of(r, kappa)
    sm = boundary_matrix_rs(r, s, 1.0)
    A = system_matrix_rs(r, s)
    ref = sm.M + sm.N @ expm_numeric(A)
    assert np.abs(sm.B - ref).max() <= 1e-10 * np.abs(ref).max()
    np.testing.assert_allclose(sm.inverse() @ sm.B, np.eye(4), atol=1e-9)
    assert np.linalg.det(sm.B) == pytest.approx(np.linalg.det(sm.B4), rel=1e-8)


def test_boundary_matrix_floor_raises():
    with pytest.raises(DegenerateBoundaryMatrix):
        boundary_matrix_rs(1.0, s_of(1.0, 0.3), 1.0, det_floor=1e300)


def test_expA_identity_at_zero():
    np.testing.assert_allclose(expA_closed_form(rep_of(2.0, 0.7), 0.0), np.eye(4), atol=1e-15)


def test_expA_frozen_case_matches_expm():
    rep = rep_of(1.0, 0.5)
    got = expA_closed_form(rep, 0.7)
    ref = expm_numeric(0.7 * system_matrix_rs(rep.r, rep.s))
    assert np.abs(got - ref).max() <= 1e-10 * np.abs(ref).max()


@given(st.floats(min_value=0.0, max_value=10.0), kappa_st, st.floats(min_value=0.0, max_value=2.0))
def test_expA_entry_cosh(r, kappa, x):
    E = expA_rs(r, s_of(r, kappa), x)
    assert E[2, 2] == pytest.approx(math.cosh(x * r), rel=1e-13)


@settings(max_examples=80, deadline=None)
@given(st.floats(min_value=0.0, max_value=25.0), kappa_st, st.floats(min_value=0.0, max_value=1.0))
def test_expA_against_scipy(r, kappa, x):
    s = s_of(r, kappa)
    ref = scipy.linalg.expm(x * system_matrix_rs(r, s))
    got = expA_rs(r, s, x)
    assert np.abs(got - ref).max() <= 1e-11 * max(1.0, np.abs(ref).max())


@given(st.floats(min_value=0.01, max_value=25.0), kappa_st, st.floats(min_value=-1.0, max_value=1.0))
def test_growth_split_sums_to_exponential(r, kappa, x):
    s = s_of(r, kappa)
    total = expA_split(r, s, x, +1) + expA_split(r, s, x, -1)
    ref = expA_rs(r, s, x)
    assert np.abs(total - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())


def test_growth_split_rejects_zero_frequency():
    with pytest.raises(ValueError):
        expA_split(0.0, 0j, 0.5, +1)


# --- Y, m, rho ------------------------------------------------------------------------


def test_Y_zero_frequency_is_e3():
    Y = eval_Y(rep_of(0.0, 0.0), np.linspace(0, 1, 5), 1.0)
    np.testing.assert_array_equal(Y, np.tile([[0], [0], [1], [0]], 5))


def test_Y3_kappa_zero_formula():
    r, b = 1.3, 1.0
    x = np.linspace(0, 1, 7)
    expect = (np.cosh(r * (b + x)) + np.cosh(r * (b - x)) + 2 * r * b * np.sinh(r * (b - x))) / (np.cosh(2 * r * b) + 1 + 2 * b * b * r * r)
    np.testing.assert_allclose(eval_Y(rep_of(r, 0.0), x, b)[2].real, expect, rtol=1e-13)
    np.testing.assert_allclose(eval_Y_kappa_zero(r, x, b)[2], expect, rtol=1e-13)


def test_Y_frozen_case_matches_oracle():
    r, kappa = 1.0, 0.3
    s = s_of(r, kappa)
    got = eval_Y(Reparam(r, kappa, s), 0.5, 1.0)
    ref = Y_oracle(r, s, 0.5, 1.0)
    assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max()


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=30.0), kappa_st, x_st)
def test_Y_matches_oracle(r, kappa, x):
    s = s_of(r, kappa)
    got = eval_Y(Reparam(r, kappa, s), x, 1.0)
    ref = Y_oracle(r, s, x, 1.0)
    assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max()


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1.0, max_value=20.0), st.floats(min_value=0.1, max_value=2.0), x_st)
def test_printed_closed_form_agrees_in_its_good_regime(r, kappa, x):
    rep = rep_of(r, kappa)
    got = eval_Y_printed(rep, x, 1.0)
    ref = Y_oracle(r, rep.s, x, 1.0)
    assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max()


def test_continuity_across_kappa_zero():
    for r in (0.3, 1.0, 5.0, 25.0):
        base = eval_Y_kappa_zero(r, np.linspace(0, 1, 9), 1.0)
        for k in (1e-8, -1e-8):
            Y = eval_Y(rep_of(r, k), np.linspace(0, 1, 9), 1.0)
            assert np.abs(Y - base).max() <= 1e-6


def test_continuity_across_regime_switches():
    x = np.linspace(0, 1, 5)
    for r, k in ((0.5, 0.8), (2.0, 0.02), (1.0, 1e-2), (3.0, 1e-6 * 3)):
        for eps in (1e-12, -1e-12):
            a = eval_Y(rep_of(r * (1 + eps), k), x, 1.0)
            c = eval_Y(rep_of(r, k * (1 + eps)), x, 1.0)
            ref = Y_oracle(r, s_of(r, k), x, 1.0)
            assert np.abs(a - ref).max() <= 1e-9 * np.abs(ref).max()
            assert np.abs(c - ref).max() <= 1e-9 * np.abs(ref).max()


def test_large_r_does_not_overflow():
    for r in (400.0, 2000.0):
        Y = eval_Y(rep_of(r, 1.5), np.array([0.0, 0.5, 1.0]), 1.0)
        assert np.all(np.isfinite(Y))
        assert Y[1, -1].real == pytest.approx(-1 / (2 * r), rel=1e-2)


def test_m_kappa_zero_frozen_value():
    # r = 1, b = 1: (2 - sinh 2) / (2 (cosh 2 + 3))
    expect = (2 - math.sinh(2)) / (2 * (math.cosh(2) + 3))
    assert expect == pytest.approx(-0.120291, abs=1e-6)
    xi = np.array([0.0, 1 / TWO_PI])
    assert eval_m(xi, 1.0, 1.0) == pytest.approx(expect, rel=1e-13)
    assert m_kappa_zero(1.0, 1.0) == pytest.approx(expect, rel=1e-14)
    assert Y_oracle(1.0, 1.0 + 0j, 1.0, 1.0)[1] == pytest.approx(expect, rel=1e-12)


def test_m_kappa_zero_formula_symbolic():
    sympy = pytest.importorskip("sympy")
    r, b = sympy.symbols("r b", positive=True)
    m = (2 * r * b - sympy.sinh(2 * r * b)) / (2 * r * (sympy.cosh(2 * r * b) + 1 + 2 * b**2 * r**2))
    assert sympy.limit(m / (-(r**2) * b**3 / 3), r, 0) == 1
    assert sympy.limit(m * (-2 * r), r, sympy.oo) == 1
    assert float(m.subs({r: 1, b: 1})) == pytest.approx(m_kappa_zero(1.0, 1.0), rel=1e-14)


def test_zero_frequency_symbols():
    prm = WaveParams(1.0, 1.0)
    nodes = VerticalGrid(1.0, 8).nodes
    smp = eval_symbols(np.zeros(2), 1.0, WaveParams(1.0, 1.0, 1.0, 2), nodes)
    np.testing.assert_array_equal(smp.Q, 1)
    np.testing.assert_array_equal(smp.Vn, 0)
    np.testing.assert_array_equal(smp.Vprime, 0)
    assert smp.m == 0 and smp.rho == 0
    assert eval_rho(np.zeros(1), prm) == 0


def test_asymptotic_references():
    prm = WaveParams(1.0, 1.0)
    assert m_asymptotic_zero(np.array([1e-3]), prm) == pytest.approx(-4 * math.pi**2 * 1e-6 / 3)
    assert m_asymptotic_infty(np.array([100.0]), prm) == pytest.approx(-1 / (400 * math.pi))
    with pytest.raises(ValueError):
        m_asymptotic_infty(np.zeros(1), prm)
    for mag in (1e-2, 1e-3):
        ratio = eval_m(np.array([mag]), 1.0, 1.0) / m_asymptotic_zero(np.array([mag]), prm)
        assert abs(ratio - 1) < (0.1 if mag == 1e-2 else 0.01)
    scaled = [abs(eval_m(np.array([x]), 1.0, 1.0) - m_asymptotic_infty(np.array([x]), prm)) * x**2 for x in (10.0, 50.0, 100.0)]
    assert max(scaled) <= 2 * scaled[0]


xi_st = st.tuples(st.floats(-50, 50), st.floats(-50, 50)).filter(lambda t: math.hypot(*t) > 1e-3)
gamma_st = st.floats(min_value=-3.0, max_value=3.0).filter(lambda g: abs(g) > 1e-3)


@settings(max_examples=100, deadline=None)
@given(xi_st, gamma_st, st.sampled_from([0.5, 1.0, 2.0]))
def test_sign_condition(xi, gamma, b):
    assert eval_m(np.array(xi), gamma, b).real < 0


@settings(max_examples=60, deadline=None)
@given(xi_st, gamma_st)
def test_conjugate_symmetry(xi, gamma):
    xi = np.array(xi)
    prm = WaveParams(gamma, 0.7, 1.0, 2)
    nodes = np.linspace(0, 1, 6)
    a = eval_symbols(xi, gamma, prm, nodes)
    c = eval_symbols(-xi, gamma, prm, nodes)
    tol = 1e-12 * (1 + abs(a.m))
    assert abs(c.m - np.conj(a.m)) <= tol
    assert abs(c.rho - np.conj(a.rho)) <= 1e-12 * (1 + abs(a.rho))
    np.testing.assert_allclose(c.Q, np.conj(a.Q), atol=1e-12)
    np.testing.assert_allclose(c.Vn, np.conj(a.Vn), atol=1e-12)
    np.testing.assert_allclose(c.Vprime, np.conj(a.Vprime), atol=1e-12)
    np.testing.assert_allclose(a.Vprime[:, 0], 0, atol=1e-14)
    assert a.Vn[0] == pytest.approx(0, abs=1e-14)


def test_rho_vanishes_only_at_zero_and_low_frequency_equivalence():
    prm = WaveParams(1.0, 1.0, 1.0, 2)
    ratios = []
    for mag in np.logspace(-3, 0, 13):
        for th in np.linspace(0, math.pi, 9):
            xi = mag * np.array([math.cos(th), math.sin(th)])
            rho = eval_rho(xi, prm)
            assert abs(rho) > 0
            weight = (xi[0] ** 2 + mag**4) / mag**2
            ratios.append(abs(rho) ** 2 / mag**2 / weight)
    assert max(ratios) / min(ratios) < 1e3


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 3.0), gamma_st)
def test_adjoint_system_residual(xi1, gamma):
    """Y' = A Y with the divergence row and the top boundary relations."""
    vg = VerticalGrid(1.0, 48)
    xi = np.array([xi1])
    rep = reparam(xi, gamma)
    pts = np.concatenate([vg.nodes, [1.0]])
    Y = eval_Y(rep, pts, 1.0)
    A = system_matrix_rs(rep.r, rep.s)
    dY = vg.deriv(Y[:, :-1])
    res = dY - A @ Y[:, :-1]
    assert np.abs(res).max() <= 1e-8 * max(1.0, np.abs(Y).max() * rep.r)
    smp = eval_symbols(xi, gamma, WaveParams(gamma, 1.0), vg.nodes)
    div = TWO_PI * 1j * xi1 * smp.Vprime[0] + vg.deriv(smp.Vn)
    assert np.abs(div).max() <= 1e-8 * max(1.0, rep.r)
    # top rows: Q - 2 dV_n = 1 and the tangential stress row vanish at x_n = b
    r = rep.r
    assert Y[2, -1] + 2 * r * Y[0, -1] == pytest.approx(1.0, abs=1e-10)
    assert r * Y[1, -1] - Y[3, -1] == pytest.approx(0.0, abs=1e-10)
