"""Linear solves built from the per-frequency problem.

* ``solve_stress``: Stokes with a stress condition on top, frequency by frequency.
* ``compute_psi``: the compatibility functional pairing data against (Q, V) at -gamma.
* ``solve_gravity_capillary``: the free surface problem, eta_hat = psi / rho.
* ``solve_navier``: normal velocity plus tangential stress on top.

Data live on a torus; modes on the Nyquist plane (index -Npts/2 along some
axis) have no conjugate partner, so solutions are set to zero there.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .frequency_ode import solve_frequency
from .parallel import map_ordered
from .spectral_grid import HorizontalGrid, VerticalGrid
from .state import DataQuadruple, NavierData, SolutionTriple, ys_norm
from .symbols import WaveParams, eval_Y, reparam, rho_from_m

log = logging.getLogger(__name__)

RHO_FLOOR = 1e-300


class CompatibilityError(ValueError):
    """Zero-mode balance between h and the vertical integral of g fails."""


class ParameterError(ValueError):
    pass


@dataclass
class AdjointSymbols:
    """(Q, V', V_n) at -gamma on the nodes, V at the top and rho for every grid frequency."""

    Q: np.ndarray  # (*grid, nodes)
    V: np.ndarray  # (n, *grid, nodes)
    Vtop: np.ndarray  # (n, *grid)
    rho: np.ndarray  # (*grid,)


def _modes(grid: HorizontalGrid):
    for idx in np.ndindex(grid.shape):
        yield idx, grid.xi[(slice(None),) + idx]


def adjoint_symbols(grid: HorizontalGrid, vgrid: VerticalGrid, params: WaveParams) -> AdjointSymbols:
    """Tabulate the -gamma symbols needed for psi and rho on the whole grid."""
    d, n = grid.d, grid.d + 1
    Q = np.zeros(grid.shape + (vgrid.n,), complex)
    V = np.zeros((n,) + grid.shape + (vgrid.n,), complex)
    Vtop = np.zeros((n,) + grid.shape, complex)
    rho = np.zeros(grid.shape, complex)
    pts = np.concatenate([vgrid.nodes, [vgrid.b]])
    modes = list(_modes(grid))
    Ys = map_ordered(lambda m: eval_Y(reparam(m[1], -params.gamma), pts, vgrid.b), modes)
    for (idx, xi), Y in zip(modes, Ys):
        norm = float(np.linalg.norm(xi))
        sl = (slice(None),) + idx
        Q[idx] = Y[2, :-1]
        if norm > 0:
            e = xi / norm
            V[sl][:d] = -1j * e[:, None] * Y[0][None, :-1]
            Vtop[sl][:d] = -1j * e * Y[0, -1]
        V[sl][d] = Y[1, :-1]
        Vtop[sl][d] = Y[1, -1]
        rho[idx] = rho_from_m(xi, params.gamma, params.sigma, Y[1, -1]) if norm > 0 else 0.0
    return AdjointSymbols(Q=Q, V=V, Vtop=Vtop, rho=rho)


def solve_stress(f: np.ndarray, g: np.ndarray, k: np.ndarray, gamma: float, grid: HorizontalGrid, vgrid: VerticalGrid):
    """Solve div S(p,u) - gamma d_1 u = f, div u = g, S(p,u) e_n = k on top, u = 0 at the bottom.

    Arrays are Fourier coefficients: f (n, *grid, nodes), g (*grid, nodes), k (n, *grid).
    Returns (u, p) with u (n, *grid, nodes) and p (*grid, nodes).
    """
    n = grid.d + 1
    u = np.zeros((n,) + grid.shape + (vgrid.n,), complex)
    p = np.zeros(grid.shape + (vgrid.n,), complex)
    dg = vgrid.deriv(g)
    gb = vgrid.top(g)
    nyq = grid.nyquist_mask
    work = []
    for idx, xi in _modes(grid):
        sl = (slice(None),) + idx
        if nyq[idx] or not (np.any(f[sl]) or np.any(g[idx]) or np.any(k[sl])):
            continue
        work.append((idx, xi))

    def one(item):
        idx, xi = item
        sl = (slice(None),) + idx
        try:
            return solve_frequency(xi, gamma, f[sl], g[idx], dg[idx], gb[idx], k[sl], vgrid)
        except ArithmeticError as exc:
            raise ArithmeticError(f"per-frequency solve failed at xi={xi}: {exc}") from exc

    for (idx, _), sol in zip(work, map_ordered(one, work)):
        u[(slice(None),) + idx] = sol.u_hat
        p[idx] = sol.p_hat
    return u, p


def psi_from_tables(f, g, h, k, tables: AdjointSymbols, vgrid: VerticalGrid):
    """psi = int (f . conj V - g conj Q) - k . conj V(b) + h, all at -gamma."""
    vol = vgrid.integrate(np.sum(f * np.conj(tables.V), axis=0) - g * np.conj(tables.Q))
    top = np.sum(k * np.conj(tables.Vtop[: k.shape[0]]), axis=0)
    return vol - top + h


def compute_psi(data: DataQuadruple, params: WaveParams, tables: AdjointSymbols | None = None) -> np.ndarray:
    """The compatibility functional psi(xi) for a data quadruple."""
    if tables is None:
        tables = adjoint_symbols(data.grid, data.vgrid, params)
    return psi_from_tables(data.f, data.g, data.h, data.k, tables, data.vgrid)


def check_overdetermined(data: DataQuadruple, params: WaveParams, tables: AdjointSymbols | None = None) -> np.ndarray:
    """Residual spectrum of the over-determined problem (stress on top plus u_n = h).

    It vanishes exactly when (f, g, h, k) come from one velocity/pressure pair.
    """
    return compute_psi(data, params, tables)


class LinearSolver:
    """Gravity-capillary and Navier solves on a fixed grid, with cached symbol tables."""

    def __init__(self, params: WaveParams, grid: HorizontalGrid, vgrid: VerticalGrid):
        if grid.d != params.horiz_dim:
            raise ParameterError("grid dimension and horiz_dim disagree")
        self.params = params
        self.grid = grid
        self.vgrid = vgrid
        self._tables: AdjointSymbols | None = None

    @property
    def tables(self) -> AdjointSymbols:
        if self._tables is None:
            self._tables = adjoint_symbols(self.grid, self.vgrid, self.params)
        return self._tables

    def _check_params(self):
        prm = self.params
        if prm.gamma == 0:
            raise ParameterError("gamma must be nonzero")
        if prm.sigma == 0 and prm.horiz_dim != 1:
            raise ParameterError(
                "sigma = 0 is only supported with one horizontal dimension; "
                "the zero surface tension case in three dimensions is not covered by the linear theory used here"
            )

    def solve_gravity_capillary(self, data: DataQuadruple, route: str = "capillary", compat_tol: float = 1e-8) -> SolutionTriple:
        """Invert the linearized free surface operator.

        ``route="literal"`` (sigma = 0 only) feeds eta into the normal stress
        and solves for the full pressure directly; the default route removes
        grad eta from f and sigma Lap eta from k and adds eta back to q.
        """
        self._check_params()
        prm, grid, vg = self.params, self.grid, self.vgrid
        defect = abs(data.zero_mode_defect())
        if defect > compat_tol * (1.0 + ys_norm(data)):
            raise CompatibilityError(f"compatibility violated: zero mode of h - int g is {defect:.3e}")
        psi = compute_psi(data, prm, self.tables)
        rho = self.tables.rho
        good = (grid.xi_norm > 0) & ~grid.nyquist_mask
        if np.any(np.abs(rho[good]) < RHO_FLOOR):
            raise ArithmeticError("rho vanished at a nonzero frequency")
        eta = np.where(good, psi / np.where(good, rho, 1.0), 0.0)
        d = grid.d
        lap = -4 * np.pi**2 * grid.xi_norm**2
        f = data.f.copy()
        k = data.k.copy()
        if route == "literal":
            if prm.sigma != 0 or d != 1:
                raise ParameterError("the literal route is the sigma = 0, d = 1 construction")
            k[d] = k[d] + eta
            u, P = solve_stress(f, data.g, k, prm.gamma, grid, vg)
            q = P - eta[..., None]
        else:
            for j in range(d):
                f[j] = f[j] - (grid.deriv_symbol(j) * eta)[..., None]
            k[d] = k[d] - prm.sigma * lap * eta
            u, q = solve_stress(f, data.g, k, prm.gamma, grid, vg)
        return SolutionTriple(u=u, q=q, eta=eta, grid=grid, vgrid=vg)

    def solve_navier(self, nd: NavierData, compat_tol: float = 1e-8):
        """Solve with u_n = h and tangential stress k' on top.

        Returns (u, p, psi_n) where psi_n is the reconstructed normal stress.
        """
        prm, grid, vg = self.params, self.grid, self.vgrid
        tab = self.tables
        d = grid.d
        W = psi_from_tables(nd.f, nd.g, nd.h, nd.kprime, tab, vg)
        z = (0,) * d
        if abs(W[z]) > compat_tol * (1.0 + np.abs(W).max()):
            raise CompatibilityError(f"Navier compatibility violated: W(0) = {W[z]:.3e}")
        mconj = np.conj(tab.Vtop[d])
        good = (grid.xi_norm > 0) & ~grid.nyquist_mask
        kn = np.where(good, W / np.where(good, mconj, 1.0), 0.0)
        k = np.concatenate([nd.kprime, kn[None]], axis=0)
        u, p = solve_stress(nd.f, nd.g, k, prm.gamma, grid, vg)
        return u, p, kn


def solve_gravity_capillary(data: DataQuadruple, params: WaveParams, **kw) -> SolutionTriple:
    return LinearSolver(params, data.grid, data.vgrid).solve_gravity_capillary(data, **kw)


def solve_navier(nd: NavierData, params: WaveParams):
    return LinearSolver(params, nd.grid, nd.vgrid).solve_navier(nd)
