"""Nonlinear traveling wave residual in flattened coordinates and its solver.

The fluid region under the graph of b + eta is pulled back to the slab
0 < x_n < b through (x', x_n) -> (x', x_n (1 + eta/b)).  With J = 1 + eta/b,
the matrix A (identity on the horizontal block, A_{jn} = -x_n d_j eta / (b + eta),
A_{nn} = b / (b + eta)) and N = (-grad' eta, 1), the unknowns (u, p, eta)
solve Xi(u, p, eta) = 0 where

    f-res = (u - gamma e_1) . grad_A u + div_A S_A(p, u) - (F o flat + L f)
    g-res = J div_A u
    h-res = u . N + gamma d_1 eta
    k-res = (p I - D_A u) N - (eta - sigma H(eta)) N - (T o flat + T_slice) N

and H is the mean curvature operator.  The solver iterates
x <- x - damping * Upsilon^{-1} Xi(x) with the linearization at zero frozen.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .linear_solver import LinearSolver, ParameterError
from .spectral_grid import HorizontalGrid, VerticalGrid
from .state import DataQuadruple, SolutionTriple, xs_state_norm, ys_norm
from .symbols import WaveParams

log = logging.getLogger(__name__)


class SurfaceTooLarge(ValueError):
    """The surface left the admissible band |eta| <= eta_cap."""


class Diverged(RuntimeError):
    pass


@dataclass
class GeometryPack:
    """Geometry of the flattening, sampled on (horizontal grid, vertical nodes)."""

    J: np.ndarray  # (*grid, nodes)
    Kinv: np.ndarray  # (*grid, nodes)
    Amat: np.ndarray  # (n, n, *grid, nodes)
    Nvec: np.ndarray  # (n, *grid)
    meancurv: np.ndarray  # (*grid,)
    eta: np.ndarray  # physical eta, (*grid,)
    grad_eta: np.ndarray  # (d, *grid)


@dataclass
class ForcingSpec:
    """Bulk force and surface stress.

    bulk_ambient(X) and stress_ambient(X) take a list of n coordinate arrays
    of physical points and return n arrays (resp. an n x n nested list/array).
    bulk_slice is an (n, *grid) physical array (or callable of the horizontal
    coordinates) extended constantly in x_n; stress_slice is (n, n, *grid).
    """

    bulk_ambient: Optional[Callable] = None
    bulk_slice: Optional[object] = None
    stress_ambient: Optional[Callable] = None
    stress_slice: Optional[object] = None

    def is_zero(self) -> bool:
        return all(v is None for v in (self.bulk_ambient, self.bulk_slice, self.stress_ambient, self.stress_slice))


@dataclass
class IterationConfig:
    max_iters: int = 25
    tol: float = 1e-8
    damping: float = 1.0
    damping_floor: float = 1.0 / 16
    eta_cap: Optional[float] = None
    polish: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class ConvergenceReport:
    status: str
    iterations: int
    residuals: list = field(default_factory=list)
    dampings: list = field(default_factory=list)
    final_residual: float = math.nan
    energy_defect: float = math.nan
    boundary_residuals: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def as_dict(self, include_timing: bool = True) -> dict:
        out = asdict(self)
        if not include_timing:
            out.pop("wall_time")
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.as_dict(include_timing), indent=2, default=float)


class FlatOps:
    """Physical-space helpers on the (horizontal grid x vertical nodes) mesh."""

    def __init__(self, grid: HorizontalGrid, vgrid: VerticalGrid):
        self.grid = grid
        self.vgrid = vgrid
        self.d = grid.d
        self.n = grid.d + 1
        self.ik = [grid.deriv_symbol(j) for j in range(grid.d)]
        self.vol_axes = tuple(range(self.d))  # grid axes of a scalar volume field

    # transforms of scalar fields ------------------------------------------
    def vol_to_phys(self, c):
        return np.fft.ifftn(c, axes=self.vol_axes).real * self.grid.Npts**self.d

    def vol_to_spec(self, a):
        return self.filter(np.fft.fftn(a, axes=self.vol_axes) / self.grid.Npts**self.d, vol=True)

    def surf_to_phys(self, c):
        return self.grid.to_physical_real(c)

    def surf_to_spec(self, a):
        return self.filter(self.grid.fft_forward(a), vol=False)

    def filter(self, c, vol: bool):
        mask = self.grid.nyquist_mask
        return np.where(mask[..., None], 0.0, c) if vol else np.where(mask, 0.0, c)

    # derivatives of physical scalar fields --------------------------------
    def dh_vol(self, a, j):
        c = np.fft.fftn(a, axes=self.vol_axes)
        return np.fft.ifftn(self.ik[j][..., None] * c, axes=self.vol_axes).real

    def dh_surf(self, a, j):
        c = np.fft.fftn(a)
        return np.fft.ifftn(self.ik[j] * c).real

    def dv(self, a):
        return self.vgrid.deriv(a)


def build_geometry(eta_hat: np.ndarray, params: WaveParams, grid: HorizontalGrid, vgrid: VerticalGrid, eta_cap: float | None = None) -> GeometryPack:
    """J, b/(b+eta), the matrix A, the normal N and the mean curvature for a surface."""
    ops = FlatOps(grid, vgrid)
    b = params.b
    cap = b / 2 if eta_cap is None else eta_cap
    eta = ops.surf_to_phys(eta_hat)
    if np.max(np.abs(eta)) > cap:
        raise SurfaceTooLarge(f"surface too large: max |eta| = {np.max(np.abs(eta)):.3e} exceeds {cap:.3e}")
    d, n = grid.d, grid.d + 1
    grad = np.array([ops.dh_surf(eta, j) for j in range(d)])
    xn = vgrid.nodes
    J = 1.0 + eta[..., None] / b + 0 * xn
    Kinv = b / (b + eta[..., None]) + 0 * xn
    A = np.zeros((n, n) + grid.shape + (vgrid.n,))
    for j in range(d):
        A[j, j] = 1.0
        A[j, d] = -xn * grad[j][..., None] / (b + eta[..., None])
    A[d, d] = Kinv
    Nvec = np.concatenate([-grad, np.ones((1,) + grid.shape)], axis=0)
    root = np.sqrt(1.0 + np.sum(grad**2, axis=0))
    meancurv = sum(ops.dh_surf(grad[j] / root, j) for j in range(d))
    return GeometryPack(J=J, Kinv=Kinv, Amat=A, Nvec=Nvec, meancurv=meancurv, eta=eta, grad_eta=grad)


class GriddedAmbient:
    """Ambient field sampled on the horizontal grid times heights ``z``.

    ``values`` has shape (*lead, *grid, len(z)) with ``grid_ndim`` horizontal
    axes.  Calling it with the list of coordinate arrays returns the cubic
    spline in the vertical variable, evaluated at each horizontal point at its
    own heights X[-1] (shape (*grid,) or (*grid, m)).
    """

    def __init__(self, values, z, grid_ndim: int):
        from scipy.interpolate import CubicSpline

        self.z = np.asarray(z, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.grid_ndim = grid_ndim
        # (4, nz - 1, *lead, *grid) -> (4, *lead, *grid, nz - 1)
        self._coef = np.moveaxis(CubicSpline(self.z, self.values, axis=-1).c, 1, -1)

    def __call__(self, X):
        xn = np.asarray(X[-1], dtype=float)
        surface = xn.ndim == self.grid_ndim
        if surface:
            xn = xn[..., None]
        c = self._coef
        lead = c.shape[1 : c.ndim - 1 - self.grid_ndim]
        idx = np.clip(np.searchsorted(self.z, xn, side="right") - 1, 0, self.z.size - 2)
        t = xn - self.z[idx]
        idx_b = np.broadcast_to(idx, lead + idx.shape)
        out = np.zeros(lead + xn.shape)
        for j in range(4):
            out = out * t + np.take_along_axis(c[j], idx_b, axis=-1)
        return out[..., 0] if surface else out


def _eval_slice(obj, grid: HorizontalGrid, shape):
    if obj is None:
        return None
    if callable(obj):
        return np.asarray(obj(list(grid.x)), dtype=float)
    arr = np.asarray(obj, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"slice field has shape {arr.shape}, expected {shape}")
    return arr


class NonlinearProblem:
    """Residual Xi, its physical-space pieces and the power balance diagnostic."""

    def __init__(self, params: WaveParams, grid: HorizontalGrid, vgrid: VerticalGrid, forcing: ForcingSpec | None = None):
        self.params = params
        self.grid = grid
        self.vgrid = vgrid
        self.forcing = forcing or ForcingSpec()
        self.ops = FlatOps(grid, vgrid)
        n = grid.d + 1
        self._fslice = _eval_slice(self.forcing.bulk_slice, grid, (n,) + grid.shape)
        self._tslice = _eval_slice(self.forcing.stress_slice, grid, (n, n) + grid.shape)

    # pieces ----------------------------------------------------------------
    def _grad_A(self, a, geo: GeometryPack):
        """[A_ij d_j a]_i for a physical scalar volume field."""
        ops, d = self.ops, self.grid.d
        dn = ops.dv(a)
        out = [ops.dh_vol(a, i) + geo.Amat[i, d] * dn for i in range(d)]
        out.append(geo.Kinv * dn)
        return out

    def _forcing_fields(self, geo: GeometryPack):
        """Total bulk force on the nodes and total surface stress times N on top (physical)."""
        grid, vg, b = self.grid, self.vgrid, self.params.b
        n = grid.d + 1
        fc = self.forcing
        bulk = np.zeros((n,) + grid.shape + (vg.n,))
        if fc.bulk_ambient is not None:
            X = [np.broadcast_to(grid.x[j][..., None], grid.shape + (vg.n,)) for j in range(grid.d)]
            X.append(vg.nodes * (1.0 + geo.eta[..., None] / b))
            bulk += np.asarray(fc.bulk_ambient(X), dtype=float)
        if self._fslice is not None:
            bulk += self._fslice[..., None]
        stress = np.zeros((n, n) + grid.shape)
        if fc.stress_ambient is not None:
            X = [grid.x[j] for j in range(grid.d)] + [b + geo.eta]
            stress += np.asarray(fc.stress_ambient(X), dtype=float)
        if self._tslice is not None:
            stress += self._tslice
        traction = np.einsum("ij...,j...->i...", stress, geo.Nvec)
        return bulk, traction

    def physical_state(self, state: SolutionTriple):
        ops = self.ops
        u = np.array([ops.vol_to_phys(c) for c in state.u])
        p = ops.vol_to_phys(state.p)
        return u, p

    def residual(self, state: SolutionTriple, eta_cap: float | None = None) -> DataQuadruple:
        """Xi(u, p, eta) as a spectral data quadruple (Nyquist modes removed)."""
        prm, grid, vg, ops = self.params, self.grid, self.vgrid, self.ops
        d, n = grid.d, grid.d + 1
        geo = build_geometry(state.eta, prm, grid, vg, eta_cap)
        u, p = self.physical_state(state)
        gu = [self._grad_A(u[i], geo) for i in range(n)]  # gu[i][j] = (grad_A u_i)_j
        div = sum(gu[i][i] for i in range(n))
        gp = self._grad_A(p, geo)
        bulk, traction = self._forcing_fields(geo)
        fres = np.zeros((n,) + grid.shape + (vg.n,))
        for i in range(n):
            conv = sum(u[j] * gu[i][j] for j in range(n)) - prm.gamma * gu[i][0]
            visc = 0.0
            for j in range(n):
                sym = gu[i][j] + gu[j][i]
                visc = visc + self._grad_A(sym, geo)[j]
            fres[i] = conv + gp[i] - visc - bulk[i]
        gres = geo.J * div
        top = vg.top_row
        utop = u @ top
        hres = np.sum(utop * geo.Nvec, axis=0) + prm.gamma * ops.dh_surf(geo.eta, 0)
        ptop = p @ top
        Dtop = np.array([[(gu[i][j] + gu[j][i]) @ top for j in range(n)] for i in range(n)])
        stress_n = ptop * geo.Nvec - np.einsum("ij...,j...->i...", Dtop, geo.Nvec)
        kres = stress_n - (geo.eta - prm.sigma * geo.meancurv) * geo.Nvec - traction
        return DataQuadruple(
            f=np.array([ops.vol_to_spec(a) for a in fres]),
            g=ops.vol_to_spec(gres),
            h=ops.surf_to_spec(hres),
            k=np.array([ops.surf_to_spec(a) for a in kres]),
            grid=grid,
            vgrid=vg,
        )

    def power_balance(self, state: SolutionTriple) -> dict:
        """Terms of  int F . v - int T nu . v = int |D v|^2 / 2  in flattened variables."""
        grid, vg = self.grid, self.vgrid
        n = grid.d + 1
        geo = build_geometry(state.eta, self.params, grid, vg, eta_cap=np.inf)
        u, _ = self.physical_state(state)
        gu = [self._grad_A(u[i], geo) for i in range(n)]
        bulk, traction = self._forcing_fields(geo)
        dA = (grid.L / grid.Npts) ** grid.d
        work_bulk = float(np.sum(vg.integrate(np.sum(bulk * u, axis=0) * geo.J)) * dA)
        utop = u @ vg.top_row
        work_surf = float(np.sum(np.sum(traction * utop, axis=0)) * dA)
        dsq = sum((gu[i][j] + gu[j][i]) ** 2 for i in range(n) for j in range(n))
        diss = float(np.sum(vg.integrate(0.5 * dsq * geo.J)) * dA)
        lhs = work_bulk - work_surf
        rel = abs(lhs - diss) / diss if diss > 0 else abs(lhs - diss)
        return {"bulk_work": work_bulk, "surface_work": work_surf, "dissipation": diss, "relative_defect": rel}


def gaussian_bump_stress(a: float, w: float, grid: HorizontalGrid) -> ForcingSpec:
    """Surface stress T = phi I with phi = a exp(-|x - c|^2 / w^2), c the torus center."""
    n = grid.d + 1
    c = grid.L / 2
    r2 = sum((grid.x[j] - c) ** 2 for j in range(grid.d))
    phi = a * np.exp(-r2 / w**2)
    T = np.zeros((n, n) + grid.shape)
    for i in range(n):
        T[i, i] = phi
    return ForcingSpec(stress_slice=T)


def traveling_pressure_patch(a: float, w: float, grid: HorizontalGrid) -> ForcingSpec:
    """Normal stress -phi e_n (x) e_n: a localized pressure pushing on the surface."""
    n = grid.d + 1
    c = grid.L / 2
    r2 = sum((grid.x[j] - c) ** 2 for j in range(grid.d))
    T = np.zeros((n, n) + grid.shape)
    T[n - 1, n - 1] = -a * np.exp(-r2 / w**2)
    return ForcingSpec(stress_slice=T)


def slice_force(a: float, w: float, grid: HorizontalGrid) -> ForcingSpec:
    """Horizontal bulk force a exp(-|x'-c|^2/w^2) e_1, independent of x_n."""
    n = grid.d + 1
    c = grid.L / 2
    r2 = sum((grid.x[j] - c) ** 2 for j in range(grid.d))
    f = np.zeros((n,) + grid.shape)
    f[0] = a * np.exp(-r2 / w**2)
    return ForcingSpec(bulk_slice=f)


def residual_norm(R: DataQuadruple) -> float:
    return ys_norm(R)


def solve_traveling_wave(
    forcing: ForcingSpec,
    params: WaveParams,
    cfg: IterationConfig,
    grid: HorizontalGrid,
    vgrid: VerticalGrid,
    linear: LinearSolver | None = None,
):
    """Quasi-Newton iteration from zero with the linearization at zero frozen.

    Returns (state, report).  ``report.status`` is "converged", "diverged" or
    "max_iterations".
    """
    t0 = time.perf_counter()
    if params.gamma == 0:
        raise ParameterError("gamma must be nonzero")
    prob = NonlinearProblem(params, grid, vgrid, forcing)
    lin = linear or LinearSolver(params, grid, vgrid)
    cap = params.b / 2 if cfg.eta_cap is None else cfg.eta_cap
    x = SolutionTriple.zeros(grid, vgrid)
    report = ConvergenceReport(status="max_iterations", iterations=0)
    damping = cfg.damping
    increases = 0
    prev = math.inf
    for it in range(1, cfg.max_iters + 1):
        try:
            R = prob.residual(x, eta_cap=cap)
        except SurfaceTooLarge as exc:
            report.status = "diverged"
            log.warning("iteration %d: %s", it, exc)
            break
        res = residual_norm(R)
        report.iterations = it
        report.residuals.append(res)
        report.dampings.append(damping)
        log.info("iteration %d: residual %.3e (damping %.4g)", it, res, damping)
        if res <= cfg.tol:
            stalled = res > 0.5 * prev
            if res == 0 or not cfg.polish or stalled or res <= 1e-3 * cfg.tol:
                report.status = "converged"
                break
        if res > prev:
            increases += 1
            damping = max(damping / 2, cfg.damping_floor)
            if increases >= 3:
                report.status = "diverged"
                break
        else:
            increases = 0
        prev = res
        step = lin.solve_gravity_capillary(R, compat_tol=1e-6)
        x = x - step.scale(damping)
    report.final_residual = report.residuals[-1] if report.residuals else math.nan
    if report.status == "converged":
        pb = prob.power_balance(x)
        report.energy_defect = pb["relative_defect"] if pb["dissipation"] > 0 else 0.0
        R = prob.residual(x, eta_cap=cap)
        report.boundary_residuals = {
            "h_max": float(np.abs(R.h).max()),
            "k_max": float(np.abs(R.k).max()),
            "zero_mode_defect": abs(R.zero_mode_defect()),
        }
    report.wall_time = time.perf_counter() - t0
    return x, report


def solution_norm(state: SolutionTriple) -> float:
    return xs_state_norm(state)
