"""Horizontal torus grid, vertical Gauss-Legendre grid and the spectral norms.

Horizontal fields live on the torus [0, L)^d.  Discrete coefficients follow
the 2 pi-in-the-exponent convention and are normalized as

    c_k = (1/L^d) * integral f(x) exp(-2 pi i x . k/L) dx,

i.e. ``np.fft.fftn(f) / Npts**d``.  The continuous transform is approximated
by ``L**d * c_k`` and an integral over frequency space by a sum times the cell
measure ``L**-d``.  Vertical dependence is sampled at Gauss-Legendre nodes on
(0, b) and differentiated through barycentric interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# ---------------------------------------------------------------------------
# vertical direction


def barycentric_weights(x: np.ndarray) -> np.ndarray:
    """Barycentric weights 1/prod_{k != j}(x_j - x_k), rescaled to max modulus 1."""
    x = np.asarray(x, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    # accumulate in log form to avoid under/overflow for large node counts
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    w = sign * np.exp(logw - logw.max())
    return w


def interpolation_matrix(nodes: np.ndarray, weights: np.ndarray, targets) -> np.ndarray:
    """Matrix mapping values at ``nodes`` to the interpolant at ``targets``."""
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    diff = targets[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = weights[None, :] / diff
    P = terms / terms.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    P[rows] = exact[rows].astype(float)
    return P


def differentiation_matrix(nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """First derivative of the polynomial interpolant, evaluated at the nodes."""
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


class VerticalGrid:
    """Gauss-Legendre nodes on (0, b) with quadrature, interpolation and derivatives.

    Args:
        b: depth of the slab.
        n: number of nodes.
    """

    def __init__(self, b: float, n: int = 48):
        if n < 2:
            raise ValueError("need at least two vertical nodes")
        self.b = float(b)
        self.n = int(n)
        t, w = np.polynomial.legendre.leggauss(self.n)
        self.nodes = 0.5 * self.b * (t + 1.0)
        self.weights = 0.5 * self.b * w
        self.bary = barycentric_weights(self.nodes)

    @cached_property
    def D(self) -> np.ndarray:
        return differentiation_matrix(self.nodes, self.bary)

    @cached_property
    def top_row(self) -> np.ndarray:
        """Row vector evaluating the interpolant at x_n = b."""
        return interpolation_matrix(self.nodes, self.bary, [self.b])[0]

    @cached_property
    def bottom_row(self) -> np.ndarray:
        return interpolation_matrix(self.nodes, self.bary, [0.0])[0]

    def interp(self, targets) -> np.ndarray:
        return interpolation_matrix(self.nodes, self.bary, targets)

    def integrate(self, values, axis: int = -1):
        """Integral over (0, b) of node values along ``axis``."""
        return np.tensordot(np.moveaxis(values, axis, -1), self.weights, axes=([-1], [0]))

    def deriv(self, values, axis: int = -1):
        """Vertical derivative of node values along ``axis``."""
        v = np.moveaxis(values, axis, -1)
        return np.moveaxis(v @ self.D.T, -1, axis)

    def top(self, values, axis: int = -1):
        return np.moveaxis(values, axis, -1) @ self.top_row

    def bottom(self, values, axis: int = -1):
        return np.moveaxis(values, axis, -1) @ self.bottom_row

    @cached_property
    def split_quadrature(self) -> "SplitQuadrature":
        return SplitQuadrature(self)


@dataclass
class SplitQuadrature:
    """Gauss-Legendre rules on (0, x) and (x, b) for every target x.

    Targets are the grid nodes followed by the two end points 0 and b.  The
    interpolation matrices map node values to the sub-rule points, which lets
    Duhamel-type integrals with a kink at t = x be done to spectral accuracy.
    """

    grid: VerticalGrid
    order: int = 0
    targets: np.ndarray = field(init=False)

    def __post_init__(self):
        g = self.grid
        q = self.order or g.n
        t, w = np.polynomial.legendre.leggauss(q)
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        self.targets = np.concatenate([g.nodes, [0.0, g.b]])
        X = self.targets[:, None]
        self.left_pts = X * t[None, :]
        self.left_w = X * w[None, :]
        self.right_pts = X + (g.b - X) * t[None, :]
        self.right_w = (g.b - X) * w[None, :]
        nt = self.targets.size
        self.left_interp = g.interp(self.left_pts.ravel()).reshape(nt, q, g.n)
        self.right_interp = g.interp(self.right_pts.ravel()).reshape(nt, q, g.n)


# ---------------------------------------------------------------------------
# horizontal direction


@dataclass(frozen=True)
class HorizontalGrid:
    """Periodic grid on [0, L)^d with Npts points per axis."""

    d: int
    L: float
    Npts: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")
        if self.Npts % 2 or self.Npts < 2:
            raise ValueError(f"Npts must be even, got {self.Npts}")
        if not self.L > 0:
            raise ValueError("period L must be positive")

    @property
    def shape(self) -> tuple:
        return (self.Npts,) * self.d

    @property
    def axes(self) -> tuple:
        return tuple(range(-self.d, 0))

    @property
    def cell(self) -> float:
        """Measure of one frequency cell, L^-d."""
        return self.L ** (-self.d)

    @cached_property
    def k1d(self) -> np.ndarray:
        """Integer wave numbers in FFT order."""
        return np.fft.fftfreq(self.Npts, d=1.0 / self.Npts).round().astype(int)

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequencies k/L, shape (d,) + grid shape."""
        f = self.k1d / self.L
        return np.array(np.meshgrid(*([f] * self.d), indexing="ij"))

    @cached_property
    def kint(self) -> np.ndarray:
        return np.array(np.meshgrid(*([self.k1d] * self.d), indexing="ij"))

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.xi**2, axis=0))

    @cached_property
    def x(self) -> np.ndarray:
        """Physical sample points, shape (d,) + grid shape."""
        p = np.arange(self.Npts) * self.L / self.Npts
        return np.array(np.meshgrid(*([p] * self.d), indexing="ij"))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes with some index equal to -Npts/2 (no conjugate partner)."""
        return np.any(self.kint == -self.Npts // 2, axis=0)

    def neg_index(self, arr: np.ndarray) -> np.ndarray:
        """arr evaluated at -xi (for arrays whose trailing axes are the grid)."""
        out = arr
        for ax in self.axes:
            out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
        return out

    def deriv_symbol(self, j: int) -> np.ndarray:
        """Multiplier 2 pi i xi_j of d/dx_j (zero on the Nyquist plane of axis j)."""
        sym = 2j * np.pi * self.xi[j]
        kj = self.kint[j]
        return np.where(kj == -self.Npts // 2, 0.0, sym)

    def fft_forward(self, samples: np.ndarray) -> np.ndarray:
        """Physical samples (trailing axes = grid) to normalized coefficients."""
        samples = np.asarray(samples)
        if samples.shape[-self.d :] != self.shape:
            raise ValueError(f"grid mismatch: expected trailing shape {self.shape}, got {samples.shape}")
        return np.fft.fftn(samples, axes=self.axes) / self.Npts**self.d

    def fft_inverse(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        if coeffs.shape[-self.d :] != self.shape:
            raise ValueError(f"grid mismatch: expected trailing shape {self.shape}, got {coeffs.shape}")
        return np.fft.ifftn(coeffs, axes=self.axes) * self.Npts**self.d

    def to_physical_real(self, coeffs: np.ndarray) -> np.ndarray:
        return self.fft_inverse(coeffs).real

    def symmetrize(self, coeffs: np.ndarray) -> np.ndarray:
        """Project coefficients onto those of a real field."""
        return 0.5 * (coeffs + np.conj(self.neg_index(coeffs)))


@dataclass
class SpectralField:
    """Coefficients indexed by (component..., frequency grid..., vertical node)."""

    coeffs: np.ndarray
    grid: HorizontalGrid
    vgrid: VerticalGrid


@dataclass
class SurfaceSpectrum:
    """Coefficients indexed by (component..., frequency grid...)."""

    coeffs: np.ndarray
    grid: HorizontalGrid

    @property
    def hat(self) -> np.ndarray:
        """Approximation of the continuous Fourier transform, L^d * coeffs."""
        return self.coeffs * self.grid.L**self.grid.d


@dataclass
class NormReport:
    Xs: float
    Hs: float
    Hdot_minus1: float
    low_part: float
    high_part: float


class ZeroModeViolation(ValueError):
    """A negative-order seminorm was requested for a field with nonzero mean."""


def omega_s(xi: np.ndarray, s: float) -> np.ndarray:
    """Anisotropic weight: (xi_1^2 + |xi|^4)/|xi|^2 on 0 < |xi| <= 1, (1+|xi|^2)^s outside, 0 at 0.

    ``xi`` has shape (d,) + any.
    """
    k2 = np.sum(xi**2, axis=0)
    out = (1.0 + k2) ** s
    low = (k2 <= 1.0) & (k2 > 0)
    out = np.where(low, (xi[0] ** 2 + k2**2) / np.where(k2 > 0, k2, 1.0), out)
    return np.where(k2 == 0, 0.0, out)


def _hat_sq(spec: SurfaceSpectrum) -> np.ndarray:
    a = np.abs(spec.hat) ** 2
    d = spec.grid.d
    return a.reshape((-1,) + spec.grid.shape).sum(axis=0) if a.ndim > d else a


def xs_norm(eta: SurfaceSpectrum, s: float) -> NormReport:
    """X^s norm of a surface function together with its split at |xi| = 1."""
    g = eta.grid
    a = _hat_sq(eta)
    w = omega_s(g.xi, s)
    k = g.xi_norm
    low = float(np.sqrt(np.sum(np.where(k <= 1.0, w * a, 0.0)) * g.cell))
    high = float(np.sqrt(np.sum(np.where(k > 1.0, w * a, 0.0)) * g.cell))
    hs = float(np.sqrt(np.sum((1 + k**2) ** s * a) * g.cell))
    try:
        hd = hdot_seminorm(eta, -1.0)
    except ZeroModeViolation:
        hd = math.inf
    return NormReport(Xs=math.hypot(low, high), Hs=hs, Hdot_minus1=hd, low_part=low, high_part=high)


def hs_norm(spec: SurfaceSpectrum, s: float) -> float:
    g = spec.grid
    return float(np.sqrt(np.sum((1 + g.xi_norm**2) ** s * _hat_sq(spec)) * g.cell))


def hdot_seminorm(f: SurfaceSpectrum, order: float, tol: float = 1e-10) -> float:
    """Homogeneous seminorm of negative order on the torus.

    Raises ZeroModeViolation if the zero mode exceeds ``tol`` times the total size.
    """
    if order >= 0:
        raise ValueError("order must be negative")
    g = f.grid
    a = _hat_sq(f)
    zero = tuple([0] * g.d)
    total = math.sqrt(float(a.sum()))
    if math.sqrt(float(a[zero])) > tol * max(total, 1.0):
        raise ZeroModeViolation(f"zero mode {math.sqrt(float(a[zero])):.3e} is not negligible")
    k = g.xi_norm
    w = np.where(k > 0, np.where(k > 0, k, 1.0) ** (2 * order), 0.0)
    return float(np.sqrt(np.sum(w * a) * g.cell))


def split_low_high(f: SurfaceSpectrum, R: float) -> tuple[SurfaceSpectrum, SurfaceSpectrum]:
    """Indicator split of the spectrum at |xi| = R (|xi| <= R goes low)."""
    if not R > 0:
        raise ValueError("R must be positive")
    mask = f.grid.xi_norm <= R
    low = np.where(mask, f.coeffs, 0.0)
    return SurfaceSpectrum(low, f.grid), SurfaceSpectrum(f.coeffs - low, f.grid)


# ---------------------------------------------------------------------------
# weight integral over a disk


def _graded_panels(a: float, b: float, toward_a: bool, levels: int, ratio: float = 0.2) -> list:
    """Panels on [a, b] shrinking geometrically toward one end."""
    edges = [0.0] + [ratio**k for k in range(levels, -1, -1)]
    edges = np.array(edges)
    if not toward_a:
        edges = 1.0 - edges[::-1]
    pts = a + (b - a) * edges
    return list(zip(pts[:-1], pts[1:]))


def _composite_gl(panels, order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in panels:
        xs.append(0.5 * (hi - lo) * (t + 1) + lo)
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def weight_integral_disk(R: float = 1.0, order: int = 20, levels: int = 30) -> float:
    """Integral over the disk B(0, R) in R^2 of |x|^2 / (x_1^2 + |x|^4).

    Polar coordinates with composite Gauss-Legendre panels graded toward the
    origin in the radius and toward x_1 = 0 in the angle, where the integrand
    concentrates.
    """
    rp = _graded_panels(0.0, R, True, levels)
    r, wr = _composite_gl(rp, order)
    half = np.pi / 2
    tp = _graded_panels(0.0, half, False, levels)
    th, wt = _composite_gl(tp, order)
    # by symmetry the four quadrants contribute equally
    c2 = np.cos(th) ** 2
    integrand = r[None, :] / (c2[:, None] + r[None, :] ** 2)
    return float(4.0 * wt @ integrand @ wr)
