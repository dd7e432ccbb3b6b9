"""Brute-force references used to validate the solver.

None of these call into symbols.py or frequency_ode.py: the matrix
exponential is a Pade scaling-and-squaring code, the boundary value oracle is
finite differences on the second order form of the per-frequency system, and
the forward operator applies the differential operators directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .state import DataQuadruple, SolutionTriple

# Pade(13) coefficients and the norm bound below which no scaling is needed
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


@dataclass
class OracleConfig:
    collocation_points: int = 2000
    expm_scaling_threshold: float = _THETA13

    def __post_init__(self):
        if self.collocation_points < 64:
            raise ValueError("collocation_points must be at least 64")


def expm_numeric(A: np.ndarray, theta: float = _THETA13) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a degree 13 Pade approximant."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    sq = 0
    if norm > theta:
        sq = int(np.ceil(np.log2(norm / theta)))
    X = A / 2.0**sq
    I = np.eye(n, dtype=complex)
    c = _PADE13
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (c[13] * X6 + c[11] * X4 + c[9] * X2) + c[7] * X6 + c[5] * X4 + c[3] * X2 + c[1] * I)
    V = X6 @ (c[12] * X6 + c[10] * X4 + c[8] * X2) + c[6] * X6 + c[4] * X4 + c[2] * X2 + c[0] * I
    R = np.linalg.solve(V - U, V + U)
    for _ in range(sq):
        R = R @ R
    return R


def Y_oracle(r: float, s: complex, x, b: float) -> np.ndarray:
    """exp(x A) B^{-1} e_4 from expm_numeric and a dense solve, shape (4,) + shape(x)."""
    s2 = s * s
    A = np.array([[0, 0, 0, 1], [-r, 0, 0, 0], [0, -s2, 0, -r], [s2, 0, -r, 0]], dtype=complex)
    M = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    N = np.array([[0, 0, 0, 0], [0, 0, 0, 0], [0, r, 0, -1], [2 * r, 0, 1, 0]], dtype=complex)
    B = M + N @ expm_numeric(b * A)
    c = np.linalg.solve(B, np.array([0, 0, 0, 1], dtype=complex))
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([expm_numeric(xv * A) @ c for xv in xs]).T
    return out.reshape((4,) + np.shape(x))


def _fd_solve(r, s2, F1, F2, G, dG, K1, K2, b, npts):
    """Centered box differences for (phi, psi, q, phi') on npts + 1 uniform points.

    The second order equations are read as a first order system directly:
    phi' = w, psi' = G - r phi, w' = s^2 phi - r q - F1 + r G and, using
    psi'' = G' - r w, q' = F2 + 2 G' - s^2 psi - r w.  Each interval gets the
    midpoint average of this system, which is second order accurate.
    """
    Nn = npts
    h = b / Nn
    x = np.linspace(0.0, b, Nn + 1)
    C = np.zeros((4, 4), dtype=complex)
    C[0, 3] = 1.0
    C[1, 0] = -r
    C[3, 0] = s2
    C[3, 2] = -r
    C[2, 1] = -s2
    C[2, 3] = -r
    src = np.array([np.zeros_like(x, dtype=complex), G(x), F2(x) + 2 * dG(x), -F1(x) + r * G(x)]).T
    I4 = np.eye(4)
    left = -I4 / h - 0.5 * C
    right = I4 / h - 0.5 * C
    nunk = 4 * (Nn + 1)
    # interval j couples unknown blocks j and j + 1 through equations 4j..4j+3
    a_idx, c_idx = np.nonzero(np.ones((4, 4)))
    j = np.arange(Nn)[:, None]
    rows = [(4 * j + a_idx).ravel(), (4 * j + a_idx).ravel()]
    cols = [(4 * j + c_idx).ravel(), (4 * (j + 1) + c_idx).ravel()]
    vals = [np.broadcast_to(left[a_idx, c_idx], (Nn, 16)).ravel(), np.broadcast_to(right[a_idx, c_idx], (Nn, 16)).ravel()]
    rhs = np.zeros(nunk, dtype=complex)
    rhs[: 4 * Nn] = (0.5 * (src[:-1] + src[1:])).ravel()
    rows, cols, vals = list(np.concatenate(rows)), list(np.concatenate(cols)), list(np.concatenate(vals))
    e = 4 * Nn
    top = 4 * Nn
    # phi(0) = psi(0) = 0
    rows += [e, e + 1]
    cols += [0, 1]
    vals += [1.0, 1.0]
    # -phi'(b) + r psi(b) = K1 ;  q(b) - 2 psi'(b) = q + 2 r phi - 2 G = K2
    rows += [e + 2, e + 2, e + 3, e + 3]
    cols += [top + 3, top + 1, top + 2, top + 0]
    vals += [-1.0, r, 1.0, 2 * r]
    rhs[e + 2] = K1
    rhs[e + 3] = K2 + 2 * G(np.array([b]))[0]
    A = sp.csc_matrix((vals, (rows, cols)), shape=(nunk, nunk), dtype=complex)
    sol = spla.spsolve(A, rhs)
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("singular collocation system")
    sol = sol.reshape(Nn + 1, 4)
    return x, sol[:, 0], sol[:, 1], sol[:, 2]


def collocate_bvp(xi, gamma: float, F, G, K, npts: int = 2000, b: float = 1.0, dG=None, richardson: bool = True):
    """Finite-difference reference for (phi, psi, q) of the per-frequency system.

    F = (F1, F2) and G are callables of x_n; dG defaults to a centered
    difference of G.  Returns (x, phi, psi, q) on the uniform grid with npts
    intervals; with ``richardson`` the npts and 2*npts solutions are combined
    to cancel the O(h^2) error.
    """
    if npts < 64:
        raise ValueError("npts must be at least 64")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    norm = float(np.linalg.norm(xi))
    r = 2 * np.pi * norm
    if r == 0:
        raise ValueError("the collocation oracle needs xi != 0")
    s2 = r * r - 2j * np.pi * xi[0] * gamma
    if dG is None:
        eps = 1e-6

        def dG(x):
            return (G(x + eps) - G(x - eps)) / (2 * eps)

    F1, F2 = F
    K1, K2 = K
    x, phi, psi, q = _fd_solve(r, s2, F1, F2, G, dG, K1, K2, b, npts)
    if not richardson:
        return x, phi, psi, q
    _, phi2, psi2, q2 = _fd_solve(r, s2, F1, F2, G, dG, K1, K2, b, 2 * npts)
    ext = [(4 * a[::2] - c) / 3.0 for a, c in ((phi2, phi), (psi2, psi), (q2, q))]
    return (x, *ext)


def forward_operator(state: SolutionTriple, gamma: float, sigma: float) -> DataQuadruple:
    """Apply the linearized traveling operator to (u, p = q + eta, eta).

    f = div S(p, u) - gamma d_1 u, g = div u, h = u_n(b) + gamma d_1 eta,
    k = S(p, u) e_n (b) - (eta - sigma Lap' eta) e_n, with S = p I - (grad u + grad u^T).
    Horizontal derivatives are Fourier multipliers, vertical ones barycentric.
    """
    grid, vg = state.grid, state.vgrid
    d = grid.d
    n = d + 1
    ik = [grid.deriv_symbol(j) for j in range(d)]
    lap_h = -4 * np.pi**2 * grid.xi_norm**2
    u, eta = state.u, state.eta
    p = state.p

    def dj(field, j):
        """Derivative along axis j (j < d horizontal, j = d vertical) of a volume field."""
        if j < d:
            return ik[j][..., None] * field
        return vg.deriv(field)

    grad_u = [[dj(u[i], j) for j in range(n)] for i in range(n)]  # grad_u[i][j] = d_j u_i
    div_u = sum(grad_u[i][i] for i in range(n))
    f = np.zeros_like(u)
    for i in range(n):
        lap = lap_h[..., None] * u[i] + vg.deriv(vg.deriv(u[i]))
        f[i] = dj(p, i) - lap - dj(div_u, i) - gamma * ik[0][..., None] * u[i]
    g = div_u
    h = vg.top(u[d]) + gamma * ik[0] * eta
    k = np.zeros((n,) + grid.shape, dtype=complex)
    ptop = vg.top(p)
    for i in range(n):
        k[i] = -(vg.top(grad_u[i][d]) + vg.top(grad_u[d][i]))
    k[d] += ptop - (eta - sigma * lap_h * eta)
    return DataQuadruple(f=f, g=g, h=h, k=k, grid=grid, vgrid=vg)


def forward_navier(u: np.ndarray, p: np.ndarray, gamma: float, grid, vg):
    """Navier-type operator: (div S - gamma d_1 u, div u, u_n(b), (S e_n)'(b)).

    Also returns the full top stress S e_n(b) so callers can read off k_n.
    """
    eta = np.zeros(grid.shape, dtype=complex)
    st = SolutionTriple(u=u, q=p, eta=eta, grid=grid, vgrid=vg)
    data = forward_operator(st, gamma, 0.0)
    d = grid.d
    return data.f, data.g, vg.top(u[d]), data.k[:d], data.k
