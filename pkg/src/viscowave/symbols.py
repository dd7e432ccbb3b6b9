"""Closed-form Fourier symbols of the traveling Stokes problem on a slab.

For a horizontal frequency ``xi`` the Stokes system with a stress condition on
top and no-slip on the bottom reduces to a 4x4 first order ODE ``y' = A y + z``
in the vertical variable.  Everything here is expressed in the variables

    r = 2 pi |xi|,   kappa = gamma xi_1 / |xi|,   s**2 = r**2 - i r kappa,

so that ``A`` only depends on ``(r, s)``.  The special functions ``Y``, ``Q``,
``V`` and ``m`` are the response of that ODE to a unit normal stress on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Below this the kappa = 0 limit is used; its O(kappa) error is then under
# round-off.  Between this and KAPPA_MATRIX_BAND the matrix route is exact.
KAPPA_ZERO_SWITCH = 1e-12
# Between the switch above and this band the 1/kappa**2 cancellation in the
# n_j / det B formulas costs more than ~1e-10, so the matrix route is used.
KAPPA_MATRIX_BAND = 1e-2
# For r below this the n_j / det B formulas cancel like 1/r, matrix route again.
R_MATRIX_BAND = 0.5
DET_FLOOR = 1e-300


class DegenerateBoundaryMatrix(ArithmeticError):
    """Raised when the (peeled) boundary determinant is numerically zero."""


@dataclass(frozen=True)
class WaveParams:
    """Physical constants of a traveling wave problem.

    Args:
        gamma: wave speed along e_1.
        sigma: surface tension coefficient (>= 0).
        b: equilibrium depth (> 0).
        horiz_dim: number of horizontal dimensions d = n - 1 (1 or 2).
    """

    gamma: float
    sigma: float
    b: float = 1.0
    horiz_dim: int = 1

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"depth b must be positive, got {self.b}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.horiz_dim not in (1, 2):
            raise ValueError(f"horiz_dim must be 1 or 2, got {self.horiz_dim}")

    @property
    def n(self) -> int:
        return self.horiz_dim + 1


@dataclass(frozen=True)
class Reparam:
    """The (r, kappa, s) description of a frequency/speed pair."""

    r: float
    kappa: float
    s: complex


@dataclass
class SystemMatrices:
    A: np.ndarray
    M: np.ndarray
    N: np.ndarray
    B: np.ndarray
    B3: np.ndarray = field(repr=False)
    B4: np.ndarray = field(repr=False)

    def inverse(self) -> np.ndarray:
        """B^{-1} assembled from the block formula [[I, 0], [-B4^{-1} B3, B4^{-1}]]."""
        B4inv = np.linalg.inv(self.B4)
        out = np.zeros((4, 4), dtype=complex)
        out[0, 0] = out[1, 1] = 1.0
        out[2:, :2] = -B4inv @ self.B3
        out[2:, 2:] = B4inv
        return out


@dataclass
class SymbolSample:
    """Q, V', V_n on a set of vertical nodes plus m and rho at one frequency."""

    xi: np.ndarray
    nodes: np.ndarray
    Q: np.ndarray
    Vprime: np.ndarray  # shape (d, len(nodes))
    Vn: np.ndarray
    m: complex
    rho: complex


def _as_xi(xi) -> np.ndarray:
    return np.atleast_1d(np.asarray(xi, dtype=float))


def reparam(xi, gamma: float) -> Reparam:
    """Map (xi, gamma) to (r, kappa, s) using the nested square root branch of s."""
    xi = _as_xi(xi)
    norm = float(np.linalg.norm(xi))
    r = TWO_PI * norm
    kappa = gamma * xi[0] / norm if norm > 0 else 0.0
    return Reparam(r, kappa, s_of(r, kappa))


def s_of(r: float, kappa: float) -> complex:
    """Principal root of s**2 = r**2 - i r kappa with Re s >= r, written out explicitly."""
    if r == 0.0:
        return 0j
    # the nested roots with r factored out, so tiny r cannot underflow to 0/0:
    # r^4 + r^2 kappa^2 = r^2 rho^2 and r^2 + r rho = r (r + rho)
    rho = math.hypot(r, kappa)
    inner_sqrt = math.sqrt(r) * math.sqrt(r + rho)
    re = inner_sqrt / math.sqrt(2.0)
    im = -r * kappa / (math.sqrt(2.0) * inner_sqrt)
    return complex(re, im)


def system_matrix_rs(r: float, s: complex) -> np.ndarray:
    """The ODE matrix A written in terms of (r, s)."""
    A = np.zeros((4, 4), dtype=complex)
    A[0, 3] = 1.0
    A[1, 0] = -r
    A[2, 1] = -(s * s)
    A[2, 3] = -r
    A[3, 0] = s * s
    A[3, 2] = -r
    return A


def build_system_matrix(xi, gamma: float) -> np.ndarray:
    """A(xi, gamma) with entries in 2 pi |xi| and gamma xi_1."""
    xi = _as_xi(xi)
    a = TWO_PI * float(np.linalg.norm(xi))
    c = a * a - 1j * TWO_PI * xi[0] * gamma
    A = np.zeros((4, 4), dtype=complex)
    A[0, 3] = 1.0
    A[1, 0] = -a
    A[2, 1] = -c
    A[2, 3] = -a
    A[3, 0] = c
    A[3, 2] = -a
    return A


def boundary_rows(r: float) -> tuple[np.ndarray, np.ndarray]:
    """The matrices M and N of the two point condition M y(0) + N y(b) = d."""
    M = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    N = np.zeros((4, 4), dtype=complex)
    N[2, 1] = r
    N[2, 3] = -1.0
    N[3, 0] = 2.0 * r
    N[3, 2] = 1.0
    return M, N


# ---------------------------------------------------------------------------
# entire helper functions, accurate near the removable singularities


def _shc(z):
    """sinh(z)/z."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small] ** 2
    out[small] = 1.0 + zs / 6.0 * (1.0 + zs / 20.0 * (1.0 + zs / 42.0))
    zb = z[~small]
    out[~small] = np.sinh(zb) / zb
    return out


def _exprel(z):
    """(exp(z) - 1)/z."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 * (1.0 + zs / 3.0 * (1.0 + zs / 4.0 * (1.0 + zs / 5.0)))
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _sinh_ratio_dd(x, r: float, s: complex):
    """Divided difference (sinh(xs)/s - sinh(xr)/r) / (s**2 - r**2)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    big = np.abs(x) * max(abs(s), r) > 1.0
    if np.any(~big):
        xs = x[~big]
        lam, mu = s * s, r * r
        total = np.zeros(xs.shape, dtype=complex)
        # sum_k x^(2k+1)/(2k+1)! * h_{k-1}(lam, mu)
        h = 1.0 + 0j  # complete homogeneous polynomial of degree k-1
        lam_pow = 1.0 + 0j
        fact = 6.0
        xpow = xs**3
        for k in range(1, 20):
            total = total + xpow / fact * h
            lam_pow = lam_pow * lam
            h = h * mu + lam_pow
            xpow = xpow * xs * xs
            fact *= (2 * k + 2) * (2 * k + 3)
        out[~big] = total
    if np.any(big):
        xb = x[big]
        S = _dcosh_dd(xb, r, s)
        out[big] = (S - xb * _shc(xb * r)) / (s * s)
    return out


def _cosh_dd(x, r: float, s: complex):
    """Divided difference (cosh(xs) - cosh(xr)) / (s**2 - r**2)."""
    sig, dl = s + r, s - r
    return 0.5 * x * x * _shc(x * sig / 2.0) * _shc(x * dl / 2.0)


def _dcosh_dd(x, r: float, s: complex):
    """x-derivative of _cosh_dd, i.e. (s sinh(xs) - r sinh(xr)) / (s**2 - r**2)."""
    sig, dl = s + r, s - r
    h = 0.5 * x
    return np.cosh(h * sig) * h * _shc(h * dl) + np.cosh(h * dl) * h * _shc(h * sig)


def expA_rs(r: float, s: complex, x) -> np.ndarray:
    """exp(x A(r, s)) for an array of x, shape x.shape + (4, 4).

    The entries are the printed hyperbolic columns, with every quotient by
    r**2 - s**2 rewritten as a divided difference so that the formula is
    uniformly accurate as kappa -> 0 and as r -> 0.
    """
    x = np.asarray(x, dtype=float)
    s2 = s * s
    C = _cosh_dd(x, r, s)
    S = _dcosh_dd(x, r, s)
    I = _sinh_ratio_dd(x, r, s)
    chs, chr_ = np.cosh(x * s), np.cosh(x * r)
    shr = np.sinh(x * r)
    E = np.zeros(x.shape + (4, 4), dtype=complex)
    E[..., 0, 0] = chs
    E[..., 1, 0] = -r * x * _shc(x * s)
    E[..., 3, 0] = s2 * x * _shc(x * s)
    E[..., 0, 1] = s2 * r * I
    E[..., 1, 1] = chr_ - r * r * C
    E[..., 2, 1] = -s2 * x * _shc(x * r)
    E[..., 3, 1] = s2 * r * C
    E[..., 0, 2] = -r * C
    E[..., 1, 2] = r * r * I
    E[..., 2, 2] = chr_
    E[..., 3, 2] = -r * S
    E[..., 0, 3] = S
    E[..., 1, 3] = -r * C
    E[..., 2, 3] = -shr
    E[..., 3, 3] = chr_ + s2 * C
    return E


def expA_closed_form(rep: Reparam, x_n) -> np.ndarray:
    """exp(x_n A) from the closed-form columns; 4x4 for scalar x_n."""
    return expA_rs(rep.r, rep.s, x_n)


def expA_split(r: float, s: complex, x, sign: int) -> np.ndarray:
    """The part of exp(x A) built from exp(sign*x*r) and exp(sign*x*s).

    exp(xA) = expA_split(+1) + expA_split(-1).  Each piece solves the matrix
    ODE on its own, so the +1 piece can be evaluated for x <= 0 and the -1
    piece for x >= 0 without overflow.  Requires r > 0; the pieces carry
    1/r-type factors, so callers use it only once r b is of order one.
    """
    if r <= 0:
        raise ValueError("growth splitting needs r > 0")
    x = np.asarray(x, dtype=float)
    eps = float(sign)
    sig, dl = s + r, s - r
    s2 = s * s
    Er = 0.5 * np.exp(eps * x * r)
    Es = 0.5 * np.exp(eps * x * s)
    # (Es - Er) / (s - r)
    Dl = Er * eps * x * _exprel(eps * x * dl)
    E = np.zeros(x.shape + (4, 4), dtype=complex)
    E[..., 0, 0] = Es
    E[..., 1, 0] = -r * eps * Es / s
    E[..., 3, 0] = s * eps * Es
    E[..., 0, 1] = eps * s * (r * Dl - Er) / sig
    E[..., 1, 1] = Er - r * r * Dl / sig
    E[..., 2, 1] = -s2 * eps * Er / r
    E[..., 3, 1] = s2 * r * Dl / sig
    E[..., 0, 2] = -r * Dl / sig
    E[..., 1, 2] = eps * r * (r * Dl - Er) / (s * sig)
    E[..., 2, 2] = Er
    E[..., 3, 2] = -eps * r * (s * Dl + Er) / sig
    E[..., 0, 3] = eps * (s * Dl + Er) / sig
    E[..., 1, 3] = -r * Dl / sig
    E[..., 2, 3] = -eps * Er
    E[..., 3, 3] = s2 * Dl / sig + Er
    return E


def boundary_matrix(xi, gamma: float, b: float, det_floor: float = DET_FLOOR) -> SystemMatrices:
    """Assemble B = M + N exp(bA) and its blocks for one frequency."""
    rep = reparam(xi, gamma)
    return boundary_matrix_rs(rep.r, rep.s, b, det_floor)


def boundary_matrix_rs(r: float, s: complex, b: float, det_floor: float = DET_FLOOR) -> SystemMatrices:
    A = system_matrix_rs(r, s)
    M, N = boundary_rows(r)
    with np.errstate(over="ignore", invalid="ignore"):
        E = expA_rs(r, s, b)
        B = M + N @ E
    B3, B4 = B[2:, :2].copy(), B[2:, 2:].copy()
    det = np.linalg.det(B4) if np.all(np.isfinite(B4)) else np.nan
    if not np.isfinite(det) or abs(det) < det_floor:
        raise DegenerateBoundaryMatrix(f"degenerate boundary matrix at r={r:g} (det B4 = {det})")
    return SystemMatrices(A=A, M=M, N=N, B=B, B3=B3, B4=B4)


# ---------------------------------------------------------------------------
# Y = exp(x A) B^{-1} e_4


def _Y_kappa_zero(r: float, x: np.ndarray, b: float) -> np.ndarray:
    """Printed s -> r limit of Y (kappa = 0), peeled by exp(2 r b)."""
    P = 2.0 * r * b

    def ch(z):
        return 0.5 * (np.exp(z - P) + np.exp(-z - P))

    def sh(z):
        return 0.5 * (np.exp(z - P) - np.exp(-z - P))

    den = ch(2 * r * b) + np.exp(-P) * (1.0 + 2.0 * b * b * r * r)
    bp, bm = r * (b + x), r * (b - x)
    Y = np.zeros((4,) + x.shape, dtype=complex)
    Y[0] = ((b - x) * (sh(bp) - sh(bm)) + 2 * b * r * x * ch(bm)) / (2 * den)
    Y[1] = (-sh(bp) - r * (b - x) * ch(bp) + (1 + 2 * b * r * r * x) * sh(bm) + r * (b + x) * ch(bm)) / (2 * r * den)
    Y[2] = (ch(bp) + ch(bm) + 2 * r * b * sh(bm)) / den
    Y[3] = (-(sh(bp) - sh(bm)) + (b - x) * r * (ch(bp) + ch(bm)) + 2 * b * r * ch(bm) - 2 * b * r * r * x * sh(bm)) / (2 * den)
    return Y


def _Y_printed(r: float, kappa: float, s: complex, x: np.ndarray, b: float) -> np.ndarray:
    """Y from n_j / det B, numerator and denominator both scaled by exp(-b(r + Re s))."""
    P = b * (r + s.real)

    def ch(z):
        return 0.5 * (np.exp(z - P) + np.exp(-z - P))

    def sh(z):
        return 0.5 * (np.exp(z - P) - np.exp(-z - P))

    ik = 1j * kappa
    c = 2 * r - ik
    rp, rm = r + s, r - s
    pref = 1.0 / (2 * kappa**2 * s)
    det = (-1.0 / (kappa**2 * s)) * (
        s * (8 * r * r - kappa**2 - 4j * kappa * r) * 0.5 * (ch(b * (r + s)) + ch(b * (r - s)))
        - r * (8 * r * r - kappa**2 - 8j * kappa * r) * 0.5 * (ch(b * (r + s)) - ch(b * (r - s)))
        - 4 * r * s * c * np.exp(-P)
    )
    if not abs(det) > DET_FLOOR:
        raise DegenerateBoundaryMatrix(f"peeled det B below floor at r={r:g}, kappa={kappa:g}")
    n1 = -pref * (
        rp * c * ch(b * s - x * r)
        + 2 * s * rp * ch(b * r - x * s)
        - 2 * s * c * ch(s * (b - x))
        - 4 * r * s * ch(r * (b - x))
        - rm * c * ch(b * s + x * r)
        + 2 * s * rm * ch(b * r + x * s)
    )
    n2 = pref * (
        -rp * c * sh(b * s - x * r)
        - 2 * r * rp * sh(b * r - x * s)
        + 2 * r * c * sh(s * (b - x))
        + 4 * r * s * sh(r * (b - x))
        - rm * c * sh(b * s + x * r)
        + 2 * r * rm * sh(b * r + x * s)
    )
    n3 = (-1j / (2 * kappa * s)) * (
        -rp * c * ch(b * s - x * r) + 4 * r * s * ch(r * (b - x)) + rm * c * ch(b * s + x * r)
    )
    # x-derivative of n1
    n4 = -pref * (
        -r * rp * c * sh(b * s - x * r)
        - 2 * s * s * rp * sh(b * r - x * s)
        + 2 * s * s * c * sh(s * (b - x))
        + 4 * r * r * s * sh(r * (b - x))
        - r * rm * c * sh(b * s + x * r)
        + 2 * s * s * rm * sh(b * r + x * s)
    )
    return np.array([n1, n2, n3, n4]) / det


def Y_matrix_route(r: float, s: complex, x, b: float) -> np.ndarray:
    """Y evaluated as exp(xA) applied to B^{-1} e_4 through the stable exponential.

    For r b >= 1 the growing and decaying parts of exp(xA) are kept apart so
    nothing overflows; this is the homogeneous case of the coupled solve.
    """
    x = np.asarray(x, dtype=float)
    if r == 0.0:
        Y = np.zeros((4,) + x.shape, dtype=complex)
        Y[2] = 1.0
        return Y
    if r * b < 1.0:
        sm = boundary_matrix_rs(r, s, b)
        c = np.linalg.solve(sm.B4, np.array([0.0, 1.0], dtype=complex))
        E = expA_rs(r, s, x)
        return np.moveaxis(E[..., :, 2:] @ c, -1, 0)
    Up, Um = growth_bases(r, s)
    M, N = boundary_rows(r)
    Gp_b = expA_split(r, s, -b, +1) @ Up  # G+(0 - b)
    Gm_b = expA_split(r, s, b, -1) @ Um  # G-(b)
    L = np.hstack([M @ Gp_b + N @ Up, M @ Um + N @ Gm_b])
    coef = np.linalg.solve(L, np.array([0, 0, 0, 1], dtype=complex))
    Y = expA_split(r, s, x - b, +1) @ Up @ coef[:2] + expA_split(r, s, x, -1) @ Um @ coef[2:]
    return np.moveaxis(Y, -1, 0)


def growth_bases(r: float, s: complex) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal 4x2 bases of the growing (Re > 0) and decaying invariant subspaces of A."""
    Pp = expA_split(r, s, 0.0, +1)
    Pm = expA_split(r, s, 0.0, -1)
    Up = np.linalg.svd(Pp)[0][:, :2]
    Um = np.linalg.svd(Pm)[0][:, :2]
    return Up, Um


def eval_Y(rep: Reparam, x_n, b: float) -> np.ndarray:
    """Y(r, kappa, x_n) = exp(x_n A) B^{-1} e_4, shape (4,) + shape(x_n).

    Regimes: r = 0 gives e_3; |kappa| < 1e-12 max(r, 1) uses the kappa = 0
    closed form; r < 0.5 or |kappa| < 1e-2 max(r, 1) uses the exponential
    matrix route (the n_j / det B quotients cancel there); otherwise the
    n_j / det B closed form is used.
    """
    x = np.asarray(x_n, dtype=float)
    r, kappa, s = rep.r, rep.kappa, rep.s
    if r == 0.0:
        Y = np.zeros((4,) + x.shape, dtype=complex)
        Y[2] = 1.0
        return Y
    scale = max(r, 1.0)
    if abs(kappa) < KAPPA_ZERO_SWITCH * scale:
        return _Y_kappa_zero(r, x, b)
    if r < R_MATRIX_BAND or abs(kappa) < KAPPA_MATRIX_BAND * scale:
        return Y_matrix_route(r, s, x, b)
    return _Y_printed(r, kappa, s, x, b)


def eval_Y_printed(rep: Reparam, x_n, b: float) -> np.ndarray:
    """The n_j / det B closed form alone, with no regime switching (for kappa != 0)."""
    return _Y_printed(rep.r, rep.kappa, rep.s, np.asarray(x_n, dtype=float), b)


def eval_Y_kappa_zero(r: float, x_n, b: float) -> np.ndarray:
    """The printed kappa = 0 closed form alone."""
    return _Y_kappa_zero(r, np.asarray(x_n, dtype=float), b)


def m_kappa_zero(r: float, b: float) -> float:
    """m at kappa = 0: (2rb - sinh 2rb) / (2r (cosh 2rb + 1 + 2 b^2 r^2))."""
    if r == 0:
        return 0.0
    t = 2 * r * b
    if t > 40:
        e = math.exp(-t)
        return (2 * t * e - (1 - e * e)) / (2 * r * ((1 + e * e) + 2 * e * (1 + 2 * b * b * r * r)))
    return (t - math.sinh(t)) / (2 * r * (math.cosh(t) + 1 + 2 * b * b * r * r))


def eval_m(xi, gamma: float, b: float) -> complex:
    """m(xi, gamma) = V_n(xi, b, gamma)."""
    rep = reparam(xi, gamma)
    return complex(eval_Y(rep, b, b)[1])


def eval_symbols(xi, gamma: float, params: WaveParams, nodes) -> SymbolSample:
    """Q, V', V_n at the given nodes, m, and rho(xi) (rho uses m at -gamma)."""
    xi = _as_xi(xi)
    nodes = np.asarray(nodes, dtype=float)
    b = params.b
    rep = reparam(xi, gamma)
    Y = eval_Y(rep, nodes, b)
    norm = float(np.linalg.norm(xi))
    if norm > 0:
        Vprime = -1j * Y[0][None, :] * (xi / norm)[:, None]
    else:
        Vprime = np.zeros((xi.size, nodes.size), dtype=complex)
    m = complex(eval_Y(rep, b, b)[1])
    m_neg = eval_m(xi, -gamma, b)
    rho = rho_from_m(xi, gamma, params.sigma, m_neg)
    return SymbolSample(xi=xi, nodes=nodes, Q=Y[2], Vprime=Vprime, Vn=Y[1], m=m, rho=rho)


def rho_from_m(xi, gamma: float, sigma: float, m_neg_gamma: complex) -> complex:
    xi = _as_xi(xi)
    k2 = float(xi @ xi)
    return 2j * np.pi * gamma * xi[0] + (1.0 + 4 * np.pi**2 * sigma * k2) * np.conj(m_neg_gamma)


def eval_rho(xi, params: WaveParams) -> complex:
    """rho(xi) = 2 pi i gamma xi_1 + (1 + 4 pi^2 sigma |xi|^2) conj m(xi, -gamma)."""
    return rho_from_m(xi, params.gamma, params.sigma, eval_m(xi, -params.gamma, params.b))


def m_asymptotic_zero(xi, params: WaveParams) -> float:
    """Leading small-frequency behavior -4 pi^2 |xi|^2 b^3 / 3."""
    xi = _as_xi(xi)
    return -4 * np.pi**2 * float(xi @ xi) * params.b**3 / 3.0


def m_asymptotic_infty(xi, params: WaveParams) -> float:
    """Leading large-frequency behavior -1 / (4 pi |xi|)."""
    xi = _as_xi(xi)
    norm = float(np.linalg.norm(xi))
    if norm == 0:
        raise ValueError("the large-frequency asymptote is undefined at xi = 0")
    return -1.0 / (4 * np.pi * norm)
