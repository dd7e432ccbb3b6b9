"""Random smooth data quadruples and solution triples for manufactured tests."""

from __future__ import annotations

import numpy as np

from .state import DataQuadruple, SolutionTriple


def band_limited(rng, grid, lead_shape=(), kmax=4):
    """Conjugate-symmetric random coefficients supported on |k| <= kmax."""
    c = rng.standard_normal(lead_shape + grid.shape) + 1j * rng.standard_normal(lead_shape + grid.shape)
    mask = np.all(np.abs(grid.kint) <= kmax, axis=0) & ~grid.nyquist_mask
    c = c * mask
    decay = np.exp(-0.3 * np.sum(grid.kint.astype(float) ** 2, axis=0) ** 0.5)
    return grid.symmetrize(c * decay)


def smooth_vertical(rng, vgrid, lead_shape=(), deg=5):
    """Random smooth profiles in x_n: a low-order polynomial times a mild exponential."""
    x = vgrid.nodes / vgrid.b
    coef = rng.standard_normal(lead_shape + (deg + 1,))
    vals = sum(coef[..., j, None] * x**j for j in range(deg + 1))
    return vals * np.exp(-0.5 * x)


def random_volume(rng, grid, vgrid, lead_shape=(), kmax=4, terms=3):
    """Sum of products (band-limited horizontal) x (smooth vertical) terms."""
    out = 0
    for _ in range(terms):
        hcoef = band_limited(rng, grid, lead_shape, kmax)
        vert = smooth_vertical(rng, vgrid, lead_shape)
        shape = lead_shape + (1,) * grid.d + (vgrid.n,)
        out = out + hcoef[..., None] * vert.reshape(shape)
    return out


def random_data(rng, grid, vgrid, kmax=4, compatible=True):
    n = grid.d + 1
    f = random_volume(rng, grid, vgrid, (n,), kmax)
    g = random_volume(rng, grid, vgrid, (), kmax)
    h = band_limited(rng, grid, (), kmax)
    k = band_limited(rng, grid, (n,), kmax)
    data = DataQuadruple(f=f, g=g, h=h, k=k, grid=grid, vgrid=vgrid)
    if compatible:
        z = (0,) * grid.d
        data.h[z] = vgrid.integrate(g[z])
    return data


def random_state(rng, grid, vgrid, kmax=4):
    """Random smooth (u, q, eta) with u = 0 at the bottom and eta_hat(0) = 0."""
    n = grid.d + 1
    x = vgrid.nodes
    u = random_volume(rng, grid, vgrid, (n,), kmax) * (x / vgrid.b)
    q = random_volume(rng, grid, vgrid, (), kmax)
    eta = band_limited(rng, grid, (), kmax)
    eta[(0,) * grid.d] = 0
    return SolutionTriple(u=u, q=q, eta=eta, grid=grid, vgrid=vgrid)
