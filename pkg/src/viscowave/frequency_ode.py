"""Per-frequency two point boundary value problem for the traveling Stokes system.

At a fixed horizontal frequency xi the unknowns (u_hat, p_hat) split into the
coupled scalar triple (phi, psi, q), with u_hat' = -i phi xi/|xi| + theta and
u_hat_n = psi, p_hat = q, plus a transverse part theta (only when d = 2).
The coupled part is written as y' = A y + z, M y(0) + N y(b) = d with
y = (phi, psi, q, phi') and solved by a Duhamel formula whose integrals use
Gauss-Legendre rules against the closed-form exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_grid import VerticalGrid
from .symbols import (
    TWO_PI,
    boundary_matrix_rs,
    boundary_rows,
    expA_rs,
    expA_split,
    growth_bases,
    reparam,
)

# r*b above which the growing and decaying parts of exp(xA) are kept apart
SPLIT_THRESHOLD = 1.0


@dataclass
class FrequencyBVP:
    """Data of the coupled problem at one frequency, sampled at the vertical nodes.

    F has shape (2, n) holding (F_1, F_2); G and dG are the divergence data and
    its vertical derivative at the nodes; G_b is G at x_n = b; K = (K_1, K_2).
    """

    xi: np.ndarray
    gamma: float
    F: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    G_b: complex
    K: np.ndarray

    def z(self) -> np.ndarray:
        """Source (0, G, F_2 + 2 G', -F_1 + 2 pi |xi| G), shape (4, n)."""
        r = TWO_PI * float(np.linalg.norm(self.xi))
        zero = np.zeros_like(self.G)
        return np.array([zero, self.G, self.F[1] + 2 * self.dG, -self.F[0] + r * self.G])

    def d(self) -> np.ndarray:
        """Boundary vector (0, 0, K_1, K_2 + 2 G(b))."""
        return np.array([0.0, 0.0, self.K[0], self.K[1] + 2 * self.G_b], dtype=complex)


@dataclass
class FrequencySolution:
    y: np.ndarray
    theta: np.ndarray
    u_hat: np.ndarray
    p_hat: np.ndarray


def _apply_kernel(kernel: np.ndarray, weights: np.ndarray, zsub: np.ndarray) -> np.ndarray:
    """sum_q w[t, q] * kernel[t, q] @ zsub[t, q] for every target t."""
    return np.einsum("tq,tqij,tqj->ti", weights, kernel, zsub)


def coupled_response(r: float, s: complex, b: float, vgrid: VerticalGrid, z: np.ndarray, dvec: np.ndarray) -> np.ndarray:
    """Solve y' = A(r, s) y + z, M y(0) + N y(b) = d at the targets of the split rule.

    ``z`` has shape (4, n) at the nodes.  Returns y of shape (4, n + 2): the
    nodes followed by x = 0 and x = b.
    """
    sq = vgrid.split_quadrature
    X = sq.targets
    M, N = boundary_rows(r)
    zT = z.T  # (n, 4)
    any_source = np.any(z != 0)
    zl = sq.left_interp @ zT if any_source else None  # (targets, q, 4)
    if r * b < SPLIT_THRESHOLD:
        sm = boundary_matrix_rs(r, s, b)
        if any_source:
            ker = expA_rs(r, s, X[:, None] - sq.left_pts)
            yp = _apply_kernel(ker, sq.left_w, zl)  # (targets, 4)
        else:
            yp = np.zeros((X.size, 4), dtype=complex)
        rhs = dvec - N @ yp[-1]
        c = np.linalg.solve(sm.B, rhs)
        yh = expA_rs(r, s, X) @ c
        return (yh + yp).T
    # growth-split form: decaying parts integrated upward, growing parts downward
    Up, Um = growth_bases(r, s)
    if any_source:
        zr = sq.right_interp @ zT
        km = expA_split(r, s, X[:, None] - sq.left_pts, -1)
        kp = expA_split(r, s, X[:, None] - sq.right_pts, +1)
        yp = _apply_kernel(km, sq.left_w, zl) - _apply_kernel(kp, sq.right_w, zr)
    else:
        yp = np.zeros((X.size, 4), dtype=complex)
    Gp_b = expA_split(r, s, -b, +1) @ Up
    Gm_b = expA_split(r, s, b, -1) @ Um
    L = np.hstack([M @ Gp_b + N @ Up, M @ Um + N @ Gm_b])
    rhs = dvec - M @ yp[-2] - N @ yp[-1]
    coef = np.linalg.solve(L, rhs)
    yh = expA_split(r, s, X - b, +1) @ (Up @ coef[:2]) + expA_split(r, s, X, -1) @ (Um @ coef[2:])
    return (yh + yp).T


def solve_coupled(bvp: FrequencyBVP, vgrid: VerticalGrid, with_ends: bool = False) -> np.ndarray:
    """y = (phi, psi, q, phi') at the vertical nodes, shape (4, n).

    With ``with_ends`` the values at x_n = 0 and x_n = b are appended.
    """
    rep = reparam(bvp.xi, bvp.gamma)
    y = coupled_response(rep.r, rep.s, vgrid.b, vgrid, bvp.z(), bvp.d())
    return y if with_ends else y[:, : vgrid.n]


def transverse_kernel(s: complex, x, t, b: float):
    """Green's function of -d^2 + s^2 on (0, b) with u(0) = 0, u'(b) = 0."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    lo = np.minimum(x, t)
    hi = np.maximum(x, t)
    if s == 0:
        return lo.astype(complex)
    # sinh(s lo) cosh(s (b - hi)) / (s cosh(s b)), every exponent kept <= 0
    num = (
        np.exp(s * (lo - hi))
        + np.exp(s * (lo + hi - 2 * b))
        - np.exp(-s * (lo + hi))
        - np.exp(-s * (2 * b + lo - hi))
    )
    return num / (2 * s * (1 + np.exp(-2 * s * b)))


def transverse_load(s: complex, x, b: float):
    """Solution of -u'' + s^2 u = 0, u(0) = 0, -u'(b) = 1."""
    x = np.asarray(x, dtype=float)
    if s == 0:
        return -x.astype(complex)
    # -sinh(s x)/(s cosh(s b))
    return -(np.exp(s * (x - b)) - np.exp(-s * (x + b))) / (s * (1 + np.exp(-2 * s * b)))


def solve_transverse(xi, gamma: float, f_perp: np.ndarray, k_perp: np.ndarray, vgrid: VerticalGrid, with_ends: bool = False) -> np.ndarray:
    """theta with (-d^2 + s^2) theta = f_perp, -theta'(b) = k_perp, theta(0) = 0.

    ``f_perp`` has shape (d, n), ``k_perp`` shape (d,).  At xi = 0 the rate s
    vanishes and the same formula solves the plain horizontal problem.
    """
    rep = reparam(xi, gamma)
    s = rep.s
    b = vgrid.b
    sq = vgrid.split_quadrature
    X = sq.targets
    f_perp = np.atleast_2d(np.asarray(f_perp, dtype=complex))
    k_perp = np.atleast_1d(np.asarray(k_perp, dtype=complex))
    if abs(1 + np.exp(-2 * s * b)) < 1e-300:
        raise FloatingPointError("transverse solve: cosh(s b) vanished")
    out = k_perp[:, None] * transverse_load(s, X, b)[None, :]
    if np.any(f_perp != 0):
        fl = np.einsum("tqn,dn->dtq", sq.left_interp, f_perp)
        fr = np.einsum("tqn,dn->dtq", sq.right_interp, f_perp)
        kl = transverse_kernel(s, X[:, None], sq.left_pts, b) * sq.left_w
        kr = transverse_kernel(s, X[:, None], sq.right_pts, b) * sq.right_w
        out = out + np.sum(kl[None] * fl, axis=-1) + np.sum(kr[None] * fr, axis=-1)
    return out if with_ends else out[:, : vgrid.n]


def reduce_data(xi, fh: np.ndarray, kh: np.ndarray):
    """Split (f_hat, k_hat) at xi != 0 into the coupled (F, K) and the projected transverse parts.

    ``fh`` has shape (n_comp, nodes), ``kh`` shape (n_comp,).
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    e = xi / np.linalg.norm(xi)
    d = xi.size
    fp, kp = fh[:d], kh[:d]
    F = np.array([1j * (e @ fp), fh[d]])
    K = np.array([1j * (e @ kp), kh[d]])
    P = np.eye(d) - np.outer(e, e)
    return F, K, P @ fp, P @ kp


def assemble_field(y: np.ndarray, theta: np.ndarray, xi) -> tuple[np.ndarray, np.ndarray]:
    """(u_hat, p_hat) from the coupled unknowns and the transverse part.

    At xi = 0 the horizontal velocity is carried entirely by ``theta``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = xi.size
    norm = float(np.linalg.norm(xi))
    npts = y.shape[1]
    u = np.zeros((d + 1, npts), dtype=complex)
    if norm > 0:
        u[:d] = -1j * y[0][None, :] * (xi / norm)[:, None]
    if theta is not None:
        u[:d] += theta
    u[d] = y[1]
    return u, y[2].copy()


def solve_frequency(xi, gamma: float, fh: np.ndarray, gh: np.ndarray, dgh: np.ndarray, gh_b: complex, kh: np.ndarray, vgrid: VerticalGrid, with_ends: bool = False) -> FrequencySolution:
    """Full (u_hat, p_hat) for the stress problem at one frequency.

    ``fh``: (n_comp, nodes) Fourier coefficients of f; ``gh``, ``dgh``: g and
    its vertical derivative at the nodes; ``gh_b``: g at the top; ``kh``: (n_comp,).
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = xi.size
    norm = float(np.linalg.norm(xi))
    if norm > 0:
        F, K, fperp, kperp = reduce_data(xi, fh, kh)
    else:
        F = np.array([np.zeros_like(fh[d]), fh[d]])
        K = np.array([0.0, kh[d]], dtype=complex)
        fperp, kperp = fh[:d], kh[:d]
    bvp = FrequencyBVP(xi=xi, gamma=gamma, F=F, G=gh, dG=dgh, G_b=gh_b, K=K)
    y = solve_coupled(bvp, vgrid, with_ends=with_ends)
    if d > 1 or norm == 0:
        theta = solve_transverse(xi, gamma, fperp, kperp, vgrid, with_ends=with_ends)
    else:
        theta = None
    u, p = assemble_field(y, theta, xi)
    return FrequencySolution(y=y, theta=theta, u_hat=u, p_hat=p)
