"""The q-difference operator L, Al-Salam-Chihara polynomials and eigenfunctions of L.

Conventions: ``lam`` arguments broadcast as 1-D arrays; functions on a grid
are returned as arrays of shape ``(len(lam), grid.size)`` unless stated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import qcore
from .errors import DomainError, PoleError
from .lattice import NEG, POS, Grid, GridFunction, QParams, casorati_all

# the Psi series is summed where |q/(a^2 x)| <= this bound
PSI_SERIES_MAX = 0.9
POLY_DEGREE_CAP = 60


def mu(lam):
    """Eigenvalue mu(lambda) = lambda + 1/lambda."""
    lam = np.asarray(lam, dtype=complex)
    out = lam + 1.0 / lam
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex

    def __post_init__(self):
        if self.lam == 0:
            raise DomainError("lambda must be nonzero")
        object.__setattr__(self, "lam", complex(self.lam))

    @property
    def mu(self) -> complex:
        return self.lam + 1.0 / self.lam


# ---------------------------------------------------------------- operator L

@lru_cache(maxsize=64)
def _neighbours(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Indices of x/q (away from 0) and qx (towards 0); -1 where off the grid."""
    up = np.full(grid.size, -1)
    down = np.full(grid.size, -1)
    for i, (t, k) in enumerate(zip(grid.branch, grid.n)):
        if grid.has(t, k - 1):
            up[i] = grid.index(t, k - 1)
        if grid.has(t, k + 1):
            down[i] = grid.index(t, k + 1)
    return up, down


def l_coefficients(x, params: QParams):
    """Coefficients of f(x/q), f(x), f(qx) in (Lf)(x)."""
    x = np.asarray(x, dtype=float)
    a = params.a
    c_up = (1.0 + 1.0 / x) / a
    c_mid = -params.s_sum / (a * x)
    c_down = a * (1.0 + 1.0 / (a * a * x))
    return c_up, c_mid, c_down


def apply_L_array(values: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Apply L along the last axis of ``values``; returns (Lf, edge flags)."""
    values = np.asarray(values, dtype=complex)
    up, down = _neighbours(grid)
    c_up, c_mid, c_down = l_coefficients(grid.x, grid.params)
    c_up = np.where(np.isclose(grid.x, -1.0, rtol=0, atol=1e-15), 0.0, c_up)
    f_up = np.where(up >= 0, values[..., np.maximum(up, 0)], 0.0)
    f_down = np.where(down >= 0, values[..., np.maximum(down, 0)], 0.0)
    out = c_up * f_up + c_mid * values + c_down * f_down
    flags = ((up < 0) & (c_up != 0)) | (down < 0)
    return out, flags


def apply_L(f: GridFunction) -> GridFunction:
    """(Lf)(x) on every grid point.

    Off-grid neighbours at the truncation edges count as zero; those points
    are flagged in ``edge_flags`` of the result.
    """
    out, flags = apply_L_array(f.values, f.grid)
    return GridFunction(f.grid, out, edge_flags=flags)


def eigen_residual(values: np.ndarray, lam, grid: Grid) -> np.ndarray:
    """|(L f)(x) - mu(lambda) f(x)| at every grid point (nan at flagged edges)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    values = np.atleast_2d(values)
    lf, flags = apply_L_array(values, grid)
    res = np.abs(lf - mu(lam)[:, None] * values)
    res[:, flags] = np.nan
    return res


# ---------------------------------------------------------- polynomials

def _qinv_powers(q: float, n: int) -> np.ndarray:
    return np.exp(-np.arange(n + 1) * math.log(q))


def asc_poly_all(nmax: int, lam, b, c, q) -> np.ndarray:
    """P_0..P_nmax(lambda; b, c; 1/q) from the three-term recurrence.

    Returns an array of shape ``(nmax + 1,) + shape(lam)``.
    """
    q = qcore.check_base(q)
    if nmax < 0:
        raise DomainError("degree must be non-negative")
    if nmax > POLY_DEGREE_CAP:
        raise DomainError(f"degree capped at {POLY_DEGREE_CAP} to avoid overflow")
    lam = np.asarray(lam, dtype=complex)
    m = lam + 1.0 / lam
    qi = _qinv_powers(q, nmax)
    out = np.empty((nmax + 1,) + lam.shape, dtype=complex)
    out[0] = 1.0
    prev = np.zeros_like(m)
    for n in range(nmax):
        lead = 1.0 - b * c * qi[n]
        if abs(lead) == 0.0 or abs(lead) < 1e-15 * abs(b * c * qi[n]):
            raise PoleError(f"vanishing leading coefficient at n = {n}")
        nxt = (m * out[n] - (b + c) * qi[n] * out[n] - (1.0 - qi[n]) * prev) / lead
        prev = out[n]
        out[n + 1] = nxt
    return out


def asc_poly_rec(n: int, lam, b, c, q):
    """P_n(lambda; b, c; 1/q) by upward recurrence with P_{-1} = 0."""
    out = asc_poly_all(int(n), lam, b, c, q)[int(n)]
    return out.item() if np.ndim(out) == 0 else out


def asc_poly_hyp(n: int, lam, b, c, q):
    """P_n(lambda; b, c; 1/q) as the terminating 3phi2 sum in base 1/q.

    b^{-n} sum_{k=0}^{n} (q^n, b lam, b/lam; p)_k / (p, bc; p)_k p^k with p = 1/q.
    """
    q = qcore.check_base(q)
    n = int(n)
    if n < 0:
        raise DomainError("degree must be non-negative")
    lam = np.asarray(lam, dtype=complex)
    p = 1.0 / q
    term = np.ones_like(lam)
    total = np.ones_like(lam)
    for k in range(n):
        pk = p**k
        den = (1.0 - pk * p) * (1.0 - b * c * pk)
        if abs(1.0 - b * c * pk) < 1e-15:
            raise PoleError(f"(bc; 1/q)_k vanishes at k = {k + 1}")
        term = term * (1.0 - q**n * pk) * (1.0 - b * lam * pk) * (1.0 - b / lam * pk) / den * p
        total = total + term
    out = total * complex(b) ** (-n)
    return out.item() if out.ndim == 0 else out


# -------------------------------------------------- expansion coefficients

def _lam(lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(lam == 0):
        raise DomainError("lambda must be nonzero")
    return lam


def d_coef(lam, s_arg, params: QParams):
    """d(lambda; s) = (a s lam, a s/lam; q)_inf / (a^2, s^2; q)_inf."""
    q, a = params.q, params.a
    lam = np.asarray(lam, dtype=complex)
    num = qcore.qpoch_infinite(a * s_arg * lam, q) * qcore.qpoch_infinite(a * s_arg / lam, q)
    return num / (qcore.qpoch_infinite(a * a, q) * qcore.qpoch_infinite(s_arg * s_arg, q))


def b_coef(lam, s_arg, params: QParams):
    """b_z(lambda; s), the coefficient of Psi_lambda in psi_lambda(.; s)."""
    q, a, z = params.q, params.a, params.z
    lam = np.asarray(lam, dtype=complex)
    inv2 = 1.0 / (lam * lam)
    if np.any(np.abs(np.asarray(qcore.qpoch_infinite(inv2, q))) == 0):
        raise PoleError("b_z has a pole at lambda^2 in q^N")
    num = qcore.qpoch_infinite(q / (a * s_arg * lam), q) * qcore.qpoch_infinite(a / (s_arg * lam), q)
    den = qcore.qpoch_infinite(inv2, q) * qcore.qpoch_infinite(q / (s_arg * s_arg), q)
    return num / den * qcore.theta(-q * a * z * lam / s_arg, q) / qcore.theta(-q * z, q)


def c_z(lam, params: QParams):
    """c-function c_z(lambda) from its theta-function sum."""
    q, a, s, z = params.q, params.a, params.s, params.z
    lam = np.asarray(lam, dtype=complex)
    if np.any(np.isclose(lam * lam, 1.0, rtol=0, atol=1e-14)):
        raise PoleError("c_z has a pole at lambda = +-1")
    pre = qcore.qpoch_infinite(a * s / lam, q) * qcore.qpoch_infinite(a / (s * lam), q)
    pre = pre / (qcore.qpoch_infinite(a * a, q) * qcore.qpoch_infinite(1.0 / (lam * lam), q) * qcore.theta(-q * z, q))
    t1 = qcore.theta(a * s * lam, q) * qcore.theta(-q * a * z * lam / s, q) / qcore.theta(s * s, q)
    t2 = qcore.theta(a * lam / s, q) * qcore.theta(-q * a * s * z * lam, q) / qcore.theta(1.0 / (s * s), q)
    return pre * (t1 + t2)


def c_one(lam, params: QParams):
    """Factorised c-function for z = 1.

    (as/lam, a/(s lam); q)_inf theta(a^2 lam^2 q; q^2) / [(a^2, lam^-2; q)_inf theta(q s^2; q^2)].
    """
    if params.z != 1.0:
        raise DomainError("c_one requires z = 1")
    q, a, s = params.q, params.a, params.s
    lam = np.asarray(lam, dtype=complex)
    if np.any(np.isclose(lam * lam, 1.0, rtol=0, atol=1e-14)):
        raise PoleError("c has a pole at lambda = +-1")
    num = qcore.qpoch_infinite(a * s / lam, q) * qcore.qpoch_infinite(a / (s * lam), q)
    num = num * qcore.theta(a * a * lam * lam * q, q * q)
    den = qcore.qpoch_infinite(a * a, q) * qcore.qpoch_infinite(1.0 / (lam * lam), q) * qcore.theta(q * s * s, q * q)
    return num / den


def log_c_one(lam, params: QParams):
    """Logarithm of c_one, usable where c_one itself over- or underflows."""
    if params.z != 1.0:
        raise DomainError("c_one requires z = 1")
    q, a, s = params.q, params.a, params.s
    lam = np.asarray(lam, dtype=complex)
    lq = qcore.log_qpoch_infinite
    num = lq(a * s / lam, q) + lq(a / (s * lam), q) + qcore.log_theta(a * a * lam * lam * q, q * q)
    den = lq(a * a, q) + lq(1.0 / (lam * lam), q) + qcore.log_theta(q * s * s, q * q)
    return num - den


def K_z(params: QParams) -> float:
    """K_z = (1 - q) theta(-z; q) / theta(-z a^2; q)."""
    q, a, z = params.q, params.a, params.z
    return float(np.real((1.0 - q) * qcore.theta(-z, q) / qcore.theta(-z * a * a, q)))


@dataclass(frozen=True)
class ExpansionCoeffs:
    """Connection coefficients between the eigenfunction bases at 0 and infinity.

    ``c_check`` is the relative gap between the theta-sum c_z(lambda) and
    d(lambda;s) b_z(lambda;s) + d(lambda;1/s) b_z(lambda;1/s).
    """

    b_plus: complex
    b_minus: complex
    b_plus_inv: complex
    b_minus_inv: complex
    d_s: complex
    d_sinv: complex
    c_plus: complex
    c_minus: complex
    c_check: float


def expansion_coefficients(lam, params: QParams) -> ExpansionCoeffs:
    """All connection coefficients at one spectral point lambda."""
    lam = complex(lam)
    if lam == 0 or abs(lam * lam - 1.0) < 1e-14:
        raise PoleError("lambda must avoid 0 and +-1")
    s = params.s
    bp, bm = complex(b_coef(lam, s, params)), complex(b_coef(1 / lam, s, params))
    bpi, bmi = complex(b_coef(lam, 1 / s, params)), complex(b_coef(1 / lam, 1 / s, params))
    ds, dsi = complex(d_coef(lam, s, params)), complex(d_coef(lam, 1 / s, params))
    cp = complex(c_z(lam, params))
    cm = complex(c_z(1 / lam, params))
    alt = ds * bp + dsi * bpi
    scale = max(abs(cp), abs(ds * bp), abs(dsi * bpi), 1e-300)
    return ExpansionCoeffs(bp, bm, bpi, bmi, ds, dsi, cp, cm, abs(cp - alt) / scale)


# ---------------------------------------------------------- eigenfunctions

def _psi_series(lam: np.ndarray, branch: int, n: np.ndarray, s_arg, params: QParams) -> np.ndarray:
    """psi_lambda(x; s) at |x| <= 1 by its 2phi1 series; shape (len(lam), len(n))."""
    q, a = params.q, params.a
    n = np.asarray(n)
    x = (-1.0 if branch == NEG else params.z) * np.power(q, n.astype(float))
    L = lam[:, None]
    ser = qcore.phi21(a * L / s_arg, a / (L * s_arg), q / (s_arg * s_arg), q, -q * x[None, :])
    return np.asarray(ser) * complex(s_arg) ** (-n[None, :].astype(float))


def _extend_up(vals: dict, lam: np.ndarray, n_from: int, n_to: int, params: QParams):
    """Step the eigen-relation on the positive branch from index n_from towards n_to < n_from."""
    q, z = params.q, params.z
    m = mu(lam)
    for k in range(n_from, n_to, -1):
        x = z * q**k
        cu, c0, cd = l_coefficients(x, params)
        vals[k - 1] = ((m - c0) * vals[k] - cd * vals[k + 1]) / cu


def psi_values(lam, branch: int, n, s_arg, params: QParams) -> np.ndarray:
    """psi_lambda(x; s_arg) at lattice points (branch, n); shape (len(lam), len(n)).

    Points with |x| <= 1 use the series; larger x = z q^{-N} are reached by
    stepping the eigen-relation upward from the two series points n = 1, 0.
    """
    lam = _lam(lam)
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    out = np.empty((lam.size, n.size), dtype=complex)
    if branch == NEG:
        if np.any(n < 0):
            raise DomainError("negative-branch index must be >= 0")
        return _psi_series(lam, NEG, n, s_arg, params)
    small = n >= 0
    if np.any(small):
        out[:, small] = _psi_series(lam, POS, n[small], s_arg, params)
    if np.any(~small):
        nmin = int(n.min())
        start = _psi_series(lam, POS, np.array([1, 0]), s_arg, params)
        vals = {1: start[:, 0], 0: start[:, 1]}
        _extend_up(vals, lam, 0, nmin, params)
        for j in np.flatnonzero(~small):
            out[:, j] = vals[int(n[j])]
    return out


def psi_small(lam, x: float, s_arg, params: QParams) -> complex:
    """psi_lambda(x; s_arg) at one lattice point x."""
    from .lattice import lattice_coordinates

    t, k = lattice_coordinates(x, params)
    return complex(psi_values(lam, t, [k], s_arg, params)[0, 0])


def psi_series_valid(n, params: QParams) -> np.ndarray:
    """True where the Psi series converges comfortably at x = z q^n."""
    n = np.asarray(n, dtype=float)
    return params.q ** (1.0 - n) / (params.a**2 * params.z) <= PSI_SERIES_MAX


def _psi_big_series(lam: np.ndarray, n: np.ndarray, params: QParams, log: bool = False) -> np.ndarray:
    q, a, s, z = params.q, params.a, params.s, params.z
    n = np.asarray(n, dtype=np.int64)
    L = lam[:, None]
    arg = -(q ** (1.0 - n.astype(float))) / (a * a * z)
    ser = np.asarray(qcore.phi21(a * L / s, a * s * L, q * L * L, q, arg[None, :]), dtype=complex)
    logpre = -n[None, :] * np.log(a * L)
    if log:
        return logpre + np.log(ser)
    return np.exp(logpre) * ser


def psi_big_values(lam, branch: int, n, params: QParams) -> np.ndarray:
    """Psi_lambda at lattice points (branch, n); shape (len(lam), len(n)).

    Uses the series where |q/(a^2 x)| <= PSI_SERIES_MAX and otherwise solves
    the 2x2 system psi(.; s^{+-1}) = b(lam; s^{+-1}) Psi_lam + b(1/lam; s^{+-1}) Psi_{1/lam}.
    """
    lam = _lam(lam)
    if np.any(np.isclose(lam * lam, 1.0, rtol=0, atol=1e-14)):
        raise PoleError("Psi is undefined at lambda = +-1")
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    out = np.empty((lam.size, n.size), dtype=complex)
    valid = psi_series_valid(n, params) if branch == POS else np.zeros(n.size, dtype=bool)
    if np.any(valid):
        out[:, valid] = _psi_big_series(lam, n[valid], params)
    if np.any(~valid):
        s = params.s
        ps = psi_values(lam, branch, n[~valid], s, params)
        psi_ = psi_values(lam, branch, n[~valid], 1 / s, params)
        bp, bm = b_coef(lam, s, params), b_coef(1 / lam, s, params)
        bpi, bmi = b_coef(lam, 1 / s, params), b_coef(1 / lam, 1 / s, params)
        det = bp * bmi - bm * bpi
        out[:, ~valid] = ((bmi[:, None] * ps - bm[:, None] * psi_) / det[:, None])
    return out


def psi_big(lam, x: float, params: QParams) -> complex:
    """Psi_lambda(x) at one lattice point x."""
    from .lattice import lattice_coordinates

    t, k = lattice_coordinates(x, params)
    return complex(psi_big_values(lam, t, [k], params)[0, 0])


def phi_values(lam, branch: int, n, params: QParams) -> np.ndarray:
    """phi_lambda = d(lam;s) psi(.;s) + d(lam;1/s) psi(.;1/s) straight from the definition."""
    lam = _lam(lam)
    s = params.s
    ds = np.asarray(d_coef(lam, s, params))[:, None]
    dsi = np.asarray(d_coef(lam, 1 / s, params))[:, None]
    return ds * psi_values(lam, branch, n, s, params) + dsi * psi_values(lam, branch, n, 1 / s, params)


def phi(lam, x: float, params: QParams) -> complex:
    """phi_lambda(x) at one lattice point from the defining psi combination."""
    from .lattice import lattice_coordinates

    t, k = lattice_coordinates(x, params)
    return complex(phi_values(lam, t, [k], params)[0, 0])


def phi_negative(lam, depth: int, params: QParams) -> np.ndarray:
    """phi_lambda(-q^n), n = 0..depth, via the eigen-relation started at phi(-1) = 1.

    Equals a^{-n} P_n(lambda; s/a, 1/(sa); 1/q); shape (len(lam), depth + 1).
    """
    lam = _lam(lam)
    q = params.q
    m = mu(lam)
    out = np.empty((lam.size, depth + 1), dtype=complex)
    out[:, 0] = 1.0
    prev = np.zeros(lam.size, dtype=complex)
    for k in range(depth):
        x = -(q**k)
        cu, c0, cd = l_coefficients(x, params)
        cu = 0.0 if k == 0 else cu
        out[:, k + 1] = ((m - c0) * out[:, k] - cu * prev) / cd
        prev = out[:, k]
    return out


def phi_table(lam, grid: Grid, atoms=None) -> np.ndarray:
    """Numerically stable phi_lambda on a whole grid; shape (len(lam), grid.size).

    Negative branch: the polynomial recurrence.  Positive branch: the psi
    combination for x <= 1; beyond that the upward eigen-relation on the unit
    circle, and elsewhere c(lam) Psi_lam + c(1/lam) Psi_{1/lam} where the Psi
    series converges, with the eigen-relation bridging any gap.
    Entries flagged in ``atoms`` (z = 1 only) have c(1/lam) = 0, so phi is
    the recessive solution c(lam) Psi_lam; it is evaluated in log scale where
    the Psi series converges and carried towards 0 by the stable downward
    recursion.
    """
    lam = _lam(lam)
    params = grid.params
    atoms = np.zeros(lam.size, dtype=bool) if atoms is None else np.asarray(atoms, dtype=bool)
    out = np.empty((lam.size, grid.size), dtype=complex)
    out[:, grid.neg_slice()] = phi_negative(lam, grid.neg_depth, params)

    pos_n = grid.n[grid.pos_slice()]
    pos_cols = np.arange(grid.size)[grid.pos_slice()]
    circle = ~atoms & (np.abs(np.abs(lam) - 1.0) <= 1e-12)
    for sel in (circle, ~atoms & ~circle):
        if np.any(sel):
            out[np.ix_(sel, pos_cols)] = _phi_pos_generic(lam[sel], pos_n, params)
    if np.any(atoms):
        out[np.ix_(atoms, pos_cols)] = _phi_pos_atoms(lam[atoms], pos_n, params)
    return out


def _phi_pos_generic(lam: np.ndarray, pos_n: np.ndarray, params: QParams) -> np.ndarray:
    s = params.s
    nmin, nmax = int(pos_n.min()), int(pos_n.max())
    vals: dict[int, np.ndarray] = {}
    small = np.arange(max(nmax, 1), -1, -1)
    ds = np.asarray(d_coef(lam, s, params))
    dsi = np.asarray(d_coef(lam, 1 / s, params))
    ser = ds[:, None] * _psi_series(lam, POS, small, s, params) + dsi[:, None] * _psi_series(lam, POS, small, 1 / s, params)
    for j, k in enumerate(small):
        vals[int(k)] = ser[:, j]
    if nmin < 0:
        big = np.arange(-1, nmin - 1, -1)
        # on the unit circle both solutions at infinity have the same size and
        # the neutral upward recursion beats the cancelling c-expansion
        on_circle = bool(np.all(np.abs(np.abs(lam) - 1.0) <= 1e-12))
        valid = psi_series_valid(big, params) & (not on_circle)
        first_valid = int(big[valid][0]) if np.any(valid) else nmin - 1
        if first_valid < -1:
            _extend_up(vals, lam, 0, first_valid + 1, params)
        if np.any(valid):
            nv = big[valid]
            cp = np.asarray(c_z(lam, params))[:, None]
            cm = np.asarray(c_z(1 / lam, params))[:, None]
            v = cp * _psi_big_series(lam, nv, params) + cm * _psi_big_series(1 / lam, nv, params)
            for j, k in enumerate(nv):
                vals[int(k)] = v[:, j]
    return np.stack([vals[int(k)] for k in pos_n], axis=1)


def _phi_pos_atoms(lam: np.ndarray, pos_n: np.ndarray, params: QParams) -> np.ndarray:
    if params.z != 1.0:
        raise DomainError("atoms are only defined for z = 1")
    nmin, nmax = int(pos_n.min()), int(pos_n.max())
    q = params.q
    # first index (largest n) where the Psi series converges
    nv = 0
    while not psi_series_valid(nv, params):
        nv -= 1
    top = np.arange(min(nv - 1, nmin), nv + 1)
    logc = np.asarray(log_c_one(lam, params))[:, None]
    logv = logc + _psi_big_series(lam, top, params, log=True)
    logs = {int(k): logv[:, j] for j, k in enumerate(top)}
    vals: dict[int, np.ndarray] = {}
    for k in top:
        vals[int(k)] = np.exp(logs[int(k)])
    if nmax > nv:
        # scaled downward recursion from n = nv - 1, nv
        ref = logs[nv].real
        cur = np.exp(logs[nv] - ref)
        prv = np.exp(logs[nv - 1] - ref)
        scale = ref.copy()
        m = mu(lam)
        for k in range(nv, nmax):
            cu, c0, cd = l_coefficients(params.z * q**k, params)
            nxt = ((m - c0) * cur - cu * prv) / cd
            prv, cur = cur, nxt
            big = np.abs(cur) > 1e100
            if np.any(big):
                shift = np.where(big, np.log(np.abs(cur)), 0.0)
                cur = cur * np.exp(-shift)
                prv = prv * np.exp(-shift)
                scale = scale + shift
            with np.errstate(over="ignore", under="ignore"):
                vals[k + 1] = cur * np.exp(scale)
    return np.stack([vals[int(k)] for k in pos_n], axis=1)


# ---------------------------------------------------------- families

@dataclass(frozen=True, eq=False)
class EigenFamily:
    """psi(.; s^{+-1}), Psi_{lam^{+-1}} and phi on a grid at one spectral point."""

    point: SpectralPoint
    params: QParams
    psi_s: GridFunction
    psi_sinv: GridFunction
    Psi_plus: GridFunction
    Psi_minus: GridFunction
    phi: GridFunction
    coeffs: ExpansionCoeffs


def _on_grid(func, lam, grid: Grid, *args) -> np.ndarray:
    out = np.empty(grid.size, dtype=complex)
    for branch, sl in ((NEG, grid.neg_slice()), (POS, grid.pos_slice())):
        out[sl] = func(lam, branch, grid.n[sl], *args)[0]
    return out


def eigen_family(lam, grid: Grid) -> EigenFamily:
    """Evaluate every eigenfunction attached to lambda on ``grid``."""
    params = grid.params
    lam = complex(lam)
    s = params.s
    ps = _on_grid(psi_values, lam, grid, s, params)
    psi_ = _on_grid(psi_values, lam, grid, 1 / s, params)
    Pp = _on_grid(psi_big_values, lam, grid, params)
    Pm = _on_grid(psi_big_values, 1 / lam, grid, params)
    ph = _on_grid(phi_values, lam, grid, params)
    return EigenFamily(SpectralPoint(lam), params, GridFunction(grid, ps), GridFunction(grid, psi_),
                       GridFunction(grid, Pp), GridFunction(grid, Pm), GridFunction(grid, ph),
                       expansion_coefficients(lam, params))


def casorati_interior(f: GridFunction, g: GridFunction, skip_neg_top: bool = True):
    """Casorati values at interior points (optionally excluding x = -1)."""
    idx, vals = casorati_all(f, g)
    if skip_neg_top:
        keep = ~((f.grid.branch[idx] == NEG) & (f.grid.n[idx] == 0))
        idx, vals = idx[keep], vals[keep]
    return idx, vals
