import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.frequency_ode import (
    FrequencyBVP,
    assemble_field,
    reduce_data,
    solve_coupled,
    solve_frequency,
    solve_transverse,
)
from viscowave.oracles import collocate_bvp
from viscowave.spectral_grid import VerticalGrid, interpolation_matrix
from viscowave.symbols import boundary_rows, eval_Y, reparam


def _bvp(xi, gamma, vg, F=None, G=None, dG=None, G_b=0.0, K=(0.0, 0.0)):
    n = vg.n
    return FrequencyBVP(
        xi=np.atleast_1d(np.asarray(xi, float)),
        gamma=gamma,
        F=np.zeros((2, n), complex) if F is None else F,
        G=np.zeros(n, complex) if G is None else G,
        dG=np.zeros(n, complex) if dG is None else dG,
        G_b=G_b,
        K=np.asarray(K, complex),
    )


def test_source_and_boundary_vector_assembly():
    vg = VerticalGrid(1.0, 8)
    xi = np.array([0.5])
    F = np.array([np.full(8, 2.0 + 1j), np.full(8, -1.0)])
    G = np.full(8, 3.0 + 0j)
    dG = np.full(8, 0.5 + 0j)
    bvp = _bvp(xi, 1.0, vg, F, G, dG, G_b=3.0, K=(1.0, 2.0))
    z = bvp.z()
    r = np.pi  # 2 pi |xi|
    np.testing.assert_array_equal(z[0], 0)
    np.testing.assert_allclose(z[1], G)
    np.testing.assert_allclose(z[2], F[1] + 2 * dG)
    np.testing.assert_allclose(z[3], -F[0] + r * G)
    np.testing.assert_allclose(bvp.d(), [0, 0, 1.0, 2.0 + 6.0])


@pytest.mark.parametrize("xi", [np.array([0.0]), np.array([0.03]), np.array([-0.7]), np.array([1.1, -0.4]), np.array([4.0])])
def test_top_unit_load_reproduces_Y(xi):
    vg = VerticalGrid(1.3, 40)
    y = solve_coupled(_bvp(xi, 0.8, vg, K=(0.0, 1.0)), vg)
    ref = eval_Y(reparam(xi, 0.8), vg.nodes, vg.b)
    np.testing.assert_allclose(y, ref, atol=1e-11 * max(1.0, np.abs(ref).max()))


def test_zero_data_gives_exact_zero():
    vg = VerticalGrid(1.0, 16)
    for xi in (np.array([0.0]), np.array([0.4]), np.array([3.0])):
        y = solve_coupled(_bvp(xi, 1.0, vg), vg)
        assert not np.any(y)
    th = solve_transverse(np.array([0.3, 0.2]), 1.0, np.zeros((2, 16)), np.zeros(2), vg)
    assert not np.any(th)


def _random_callables(rng):
    c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))

    def F1(x):
        return c[0, 0] * np.sin(2 * x) + c[0, 1] * x + c[0, 2]

    def F2(x):
        return c[1, 0] * np.exp(-x) + c[1, 1] * x**2 + c[1, 2]

    def G(x):
        return c[2, 0] + c[2, 1] * x**2 + c[2, 2] * np.cos(x)

    def dG(x):
        return 2 * c[2, 1] * x - c[2, 2] * np.sin(x)

    return F1, F2, G, dG


def test_matches_collocation_oracle_at_r_two():
    rng = np.random.default_rng(11)
    F1, F2, G, dG = _random_callables(rng)
    K = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    xi = np.array([2.0 / (2 * np.pi)])
    vg = VerticalGrid(1.0, 48)
    n = vg.nodes
    bvp = FrequencyBVP(xi, 1.0, np.array([F1(n), F2(n)]), G(n), dG(n), complex(G(np.array([1.0]))[0]), K)
    y = solve_coupled(bvp, vg)
    x, phi, psi, q = collocate_bvp(xi, 1.0, (F1, F2), G, K, npts=2000, b=1.0, dG=dG)
    P = interpolation_matrix(n, vg.bary, x)
    for comp, ref in ((0, phi), (1, psi), (2, q)):
        assert np.max(np.abs(P @ y[comp] - ref)) <= 1e-6 * max(1.0, np.abs(ref).max())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 8.0), st.floats(-3.0, 3.0))
def test_boundary_rows_hold(seed, mag, gamma):
    rng = np.random.default_rng(seed)
    F1, F2, G, dG = _random_callables(rng)
    K = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    xi = np.array([mag * rng.choice([-1.0, 1.0])])
    vg = VerticalGrid(1.0, 40)
    n = vg.nodes
    bvp = FrequencyBVP(xi, gamma, np.array([F1(n), F2(n)]), G(n), dG(n), complex(G(np.array([1.0]))[0]), K)
    y = solve_coupled(bvp, vg, with_ends=True)
    M, N = boundary_rows(2 * np.pi * mag)
    res = M @ y[:, vg.n] + N @ y[:, vg.n + 1] - bvp.d()
    assert np.max(np.abs(res)) <= 1e-8 * max(1.0, np.abs(bvp.d()).max())


def test_transverse_constant_load_closed_form():
    vg = VerticalGrid(1.5, 40)
    xi = np.array([0.3, 0.5])
    gamma = 1.2
    s = reparam(xi, gamma).s
    c = 0.7 - 0.2j
    th = solve_transverse(xi, gamma, np.full((1, vg.n), c), np.zeros(1), vg)[0]
    x = vg.nodes
    b = vg.b
    ref = (c / s**2) * (1 - np.cosh(s * x) + np.tanh(s * b) * np.sinh(s * x))
    np.testing.assert_allclose(th, ref, atol=1e-8)


def test_transverse_boundary_rows_and_equation():
    vg = VerticalGrid(1.0, 40)
    xi = np.array([0.7, -0.2])
    gamma = -0.6
    s2 = reparam(xi, gamma).s ** 2
    x = vg.nodes
    f = np.array([np.sin(x) + 1j * x**2])
    k = np.array([0.3 + 0.4j])
    th = solve_transverse(xi, gamma, f, k, vg, with_ends=True)[0]
    body = th[: vg.n]
    assert abs(th[vg.n]) < 1e-12  # x_n = 0
    assert vg.top(vg.deriv(body)) == pytest.approx(-k[0], abs=1e-8)
    lhs = -vg.deriv(vg.deriv(body)) + s2 * body
    np.testing.assert_allclose(lhs, f[0], atol=1e-7)


def test_transverse_velocity_orthogonal_to_frequency():
    rng = np.random.default_rng(4)
    vg = VerticalGrid(1.0, 24)
    xi = np.array([0.8, 0.45])
    fh = rng.standard_normal((3, vg.n)) + 1j * rng.standard_normal((3, vg.n))
    kh = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    _, _, fp, kp = reduce_data(xi, fh, kh)
    th = solve_transverse(xi, 1.0, fp, kp, vg)
    assert np.max(np.abs(xi @ th)) < 1e-12 * np.abs(th).max()


def test_zero_frequency_unit_normal_load():
    vg = VerticalGrid(1.0, 16)
    sol = solve_frequency(np.zeros(1), 1.0, np.zeros((2, 16)), np.zeros(16), np.zeros(16), 0.0, np.array([0.0, 1.0]), vg)
    np.testing.assert_allclose(sol.u_hat, 0, atol=1e-14)
    np.testing.assert_allclose(sol.p_hat, 1.0, atol=1e-14)


def _generic_solution(d, seed=3):
    rng = np.random.default_rng(seed)
    vg = VerticalGrid(1.0, 40)
    x = vg.nodes
    n = d + 1
    fh = (rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))) @ np.array([np.ones_like(x), x, np.cos(x)])
    gc = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    gh = gc[0] + gc[1] * x + gc[2] * x**2
    dgh = gc[1] + 2 * gc[2] * x
    gb = gc.sum()
    kh = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    xi = np.array([0.6, -0.35])[:d]
    sol = solve_frequency(xi, 1.3, fh, gh, dgh, gb, kh, vg, with_ends=False)
    return vg, xi, fh, gh, kh, sol


@pytest.mark.parametrize("d", [1, 2])
def test_divergence_and_stress_rows(d):
    vg, xi, fh, gh, kh, sol = _generic_solution(d)
    u, p = sol.u_hat, sol.p_hat
    du = vg.deriv(u, axis=-1)
    div = 2j * np.pi * (xi @ u[:d]) + du[d]
    np.testing.assert_allclose(div, gh, atol=1e-8)
    top_u = vg.top(u)
    top_du = vg.top(du)
    tang = -top_du[:d] - 2j * np.pi * xi * top_u[d]
    np.testing.assert_allclose(tang, kh[:d], atol=1e-8)
    assert vg.top(p) - 2 * top_du[d] == pytest.approx(kh[d], abs=1e-8)
    assert np.max(np.abs(vg.bottom(u))) < 1e-12


@pytest.mark.parametrize("d", [1, 2])
def test_energy_identity_for_homogeneous_interior(d):
    vg = VerticalGrid(1.0, 40)
    n = d + 1
    xi = np.array([0.45, 0.3])[:d]
    gamma = 0.9
    kh = np.array([0.4 - 0.1j, 1.0 + 0.5j, -0.2j])[-n:]
    sol = solve_frequency(xi, gamma, np.zeros((n, vg.n)), np.zeros(vg.n), np.zeros(vg.n), 0.0, kh, vg)
    u = sol.u_hat
    grad = np.empty((n, n, vg.n), complex)
    for j in range(d):
        grad[:, j] = 2j * np.pi * xi[j] * u
    grad[:, d] = vg.deriv(u, axis=-1)
    sym = grad + grad.transpose(1, 0, 2)
    dissip = 0.5 * vg.integrate(np.sum(np.abs(sym) ** 2, axis=(0, 1)))
    drift = 2j * np.pi * gamma * xi[0] * vg.integrate(np.sum(np.abs(u) ** 2, axis=0))
    work = kh @ np.conj(vg.top(u))
    assert abs(work + dissip - drift) <= 1e-8 * dissip


def test_assemble_field_at_zero_frequency_uses_theta_only():
    y = np.arange(12, dtype=complex).reshape(4, 3)
    theta = np.ones((1, 3), complex)
    u, p = assemble_field(y, theta, np.zeros(1))
    np.testing.assert_array_equal(u[0], 1.0)
    np.testing.assert_array_equal(u[1], y[1])
    np.testing.assert_array_equal(p, y[2])


def test_repeat_solves_bitwise_identical():
    a = _generic_solution(2)[-1]
    b = _generic_solution(2)[-1]
    np.testing.assert_array_equal(a.u_hat, b.u_hat)
    np.testing.assert_array_equal(a.p_hat, b.p_hat)
