"""Containers for data quadruples (f, g, h, k) and solution triples (u, p, eta).

Arrays hold normalized Fourier coefficients (see spectral_grid).  Volume
fields have shape (components, *grid, nodes), surface fields (components,
*grid); scalar fields drop the component axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .spectral_grid import HorizontalGrid, VerticalGrid, omega_s


@dataclass
class DataQuadruple:
    f: np.ndarray  # (n, *grid, nodes)
    g: np.ndarray  # (*grid, nodes)
    h: np.ndarray  # (*grid,)
    k: np.ndarray  # (n, *grid)
    grid: HorizontalGrid
    vgrid: VerticalGrid

    @classmethod
    def zeros(cls, grid: HorizontalGrid, vgrid: VerticalGrid) -> "DataQuadruple":
        n = grid.d + 1
        sh = grid.shape
        return cls(
            f=np.zeros((n,) + sh + (vgrid.n,), complex),
            g=np.zeros(sh + (vgrid.n,), complex),
            h=np.zeros(sh, complex),
            k=np.zeros((n,) + sh, complex),
            grid=grid,
            vgrid=vgrid,
        )

    def zero_mode_defect(self) -> complex:
        """h_hat(0) - integral of g_hat(0, x_n): zero for compatible data."""
        z = (0,) * self.grid.d
        return complex(self.h[z] - self.vgrid.integrate(self.g[z]))

    def compat(self, tol: float = 1e-8) -> dict:
        defect = abs(self.zero_mode_defect())
        return {"zero_mode_ok": defect <= tol * (1.0 + ys_norm(self, check=False)), "zero_mode_defect": defect}

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def _combine(self, other, sign):
        return replace(self, f=self.f + sign * other.f, g=self.g + sign * other.g, h=self.h + sign * other.h, k=self.k + sign * other.k)

    def scale(self, a) -> "DataQuadruple":
        return replace(self, f=a * self.f, g=a * self.g, h=a * self.h, k=a * self.k)


@dataclass
class SolutionTriple:
    """Velocity u, pressure part q and surface eta; the full pressure is p = q + eta."""

    u: np.ndarray  # (n, *grid, nodes)
    q: np.ndarray  # (*grid, nodes)
    eta: np.ndarray  # (*grid,)
    grid: HorizontalGrid
    vgrid: VerticalGrid

    @property
    def p(self) -> np.ndarray:
        return self.q + self.eta[..., None]

    @classmethod
    def zeros(cls, grid: HorizontalGrid, vgrid: VerticalGrid) -> "SolutionTriple":
        n = grid.d + 1
        sh = grid.shape
        return cls(
            u=np.zeros((n,) + sh + (vgrid.n,), complex),
            q=np.zeros(sh + (vgrid.n,), complex),
            eta=np.zeros(sh, complex),
            grid=grid,
            vgrid=vgrid,
        )

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def _combine(self, other, sign):
        return replace(self, u=self.u + sign * other.u, q=self.q + sign * other.q, eta=self.eta + sign * other.eta)

    def scale(self, a) -> "SolutionTriple":
        return replace(self, u=a * self.u, q=a * self.q, eta=a * self.eta)


@dataclass
class NavierData:
    """Data (f, g, h, k') of the problem with Navier-type top conditions."""

    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    kprime: np.ndarray  # (d, *grid)
    grid: HorizontalGrid
    vgrid: VerticalGrid


# ---------------------------------------------------------------------------
# discrete norms; continuous transform ~ L^d * coefficients, d xi ~ L^-d


def _weighted_sum(grid: HorizontalGrid, arr: np.ndarray, weight: np.ndarray, vgrid: VerticalGrid | None = None) -> float:
    a = np.abs(arr) ** 2 * grid.L ** (2 * grid.d)
    if vgrid is not None:
        a = vgrid.integrate(a)
    lead = a.ndim - grid.d
    if lead:
        a = a.reshape((-1,) + grid.shape).sum(axis=0)
    return float(np.sum(weight * a) * grid.cell)


def volume_hs_sq(grid: HorizontalGrid, vgrid: VerticalGrid, arr: np.ndarray, s: int) -> float:
    """Squared H^s norm on the slab for integer s >= 0 (mixed derivatives included)."""
    k2 = grid.xi_norm**2
    total = 0.0
    cur = arr
    for j in range(s + 1):
        total += _weighted_sum(grid, cur, (1 + k2) ** (s - j), vgrid)
        if j < s:
            cur = vgrid.deriv(cur)
    return total


def surface_hs_sq(grid: HorizontalGrid, arr: np.ndarray, s: float) -> float:
    k2 = grid.xi_norm**2
    return _weighted_sum(grid, arr, (1 + k2) ** s)


def ys_norm(data: DataQuadruple, s: int = 0, check: bool = True) -> float:
    """Discrete norm of a data quadruple.

    f in H^s, g in H^{s+1}, h in H^{s+3/2}, k in H^{s+1/2}, plus the homogeneous
    order -1 seminorm of h - integral(g) on nonzero modes and the modulus of
    its zero mode (which vanishes for compatible data).
    """
    g, vg = data.grid, data.vgrid
    tot = volume_hs_sq(g, vg, data.f, s)
    tot += volume_hs_sq(g, vg, data.g, s + 1)
    tot += surface_hs_sq(g, data.h, s + 1.5)
    tot += surface_hs_sq(g, data.k, s + 0.5)
    w = data.h - vg.integrate(data.g)
    k = g.xi_norm
    weight = np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0) ** 2, 0.0)
    tot += _weighted_sum(g, w, weight)
    z = (0,) * g.d
    tot += (abs(w[z]) * g.L ** g.d) ** 2
    return math.sqrt(tot)


def xs_state_norm(sol: SolutionTriple, s: int = 0) -> float:
    """Norm of a solution triple: u in H^{s+2}, q in H^{s+1}, eta in X^{s+5/2}."""
    g, vg = sol.grid, sol.vgrid
    tot = volume_hs_sq(g, vg, sol.u, s + 2)
    tot += volume_hs_sq(g, vg, sol.q, s + 1)
    tot += _weighted_sum(g, sol.eta, omega_s(g.xi, s + 2.5))
    return math.sqrt(tot)
