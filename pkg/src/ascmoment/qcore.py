"""q-shifted factorials, theta functions and basic hypergeometric series.

Every routine accepts numpy arrays and broadcasts; scalar input gives a
Python scalar back.  Double precision throughout.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DivergenceError, DomainError, PoleError

Q_MAX = 0.999
# factors 1 - x q^j with |x q^j| below this are absorbed into the tail estimate
PRODUCT_CUTOFF = 1e-18
SERIES_EPS = 1e-16
STALL_TERMS = 5
TERMINATION_RTOL = 1e-14
MAX_SERIES_TERMS = 20000


def check_base(q) -> float:
    """Validate a base q and return it as a float."""
    try:
        qf = float(q)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"base q must be a real number, got {q!r}") from exc
    if not (0.0 < qf <= Q_MAX):
        raise DomainError(f"base q must lie in (0, {Q_MAX}], got {qf}")
    return qf


def _as_array(x, name="argument"):
    arr = np.asarray(x)
    if arr.dtype.kind not in "biufc":
        raise DomainError(f"{name} must be numeric")
    arr = arr.astype(np.result_type(arr.dtype, np.float64))
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _out(arr: np.ndarray):
    if arr.ndim == 0:
        return arr.item()
    return arr


def _clog1p(t: np.ndarray) -> np.ndarray:
    """Accurate complex log(1 + t), also for tiny t."""
    t = np.asarray(t, dtype=complex)
    re, im = t.real, t.imag
    with np.errstate(divide="ignore"):
        mod = 0.5 * np.log1p(2.0 * re + re * re + im * im)
    return mod + 1j * np.arctan2(im, 1.0 + re)


def qpoch_infinite(x, q):
    """Infinite q-shifted factorial (x; q)_inf.

    Factors are multiplied until |x| q^j < 1e-18; the remaining tail is
    folded in as exp(-sum_{i>=j} x q^i).

    Parameters
    ----------
    x : complex or array_like
    q : float
        Base in (0, 0.999].
    """
    q = check_base(q)
    x = _as_array(x, "x")
    prod = np.ones_like(x)
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    j = 0
    qj = 1.0
    while xmax * qj >= PRODUCT_CUTOFF:
        prod = prod * (1.0 - x * qj)
        j += 1
        qj = q**j
    prod = prod * np.exp(-x * qj / (1.0 - q))
    return _out(prod)


def log_qpoch_infinite(x, q):
    """Complex logarithm of (x; q)_inf, for arguments whose product over/underflows.

    The branch is the sum of principal logarithms of the factors, so
    ``exp`` of the result is the product but the imaginary part is not
    reduced to (-pi, pi].  Zero factors give -inf.
    """
    q = check_base(q)
    x = _as_array(x, "x").astype(complex)
    total = np.zeros_like(x)
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    j = 0
    qj = 1.0
    with np.errstate(divide="ignore"):
        while xmax * qj >= PRODUCT_CUTOFF:
            t = -x * qj
            small = np.abs(t) < 0.5
            total = total + np.where(small, _clog1p(np.where(small, t, 0.0)),
                                     np.log(np.where(small, 1.0, 1.0 + t)))
            j += 1
            qj = q**j
    total = total - x * qj / (1.0 - q)
    return _out(total)


def qpoch_finite(x, q, n: int):
    """Finite q-shifted factorial (x; q)_n for any integer n.

    For n < 0 this is (x;q)_inf / (x q^n; q)_inf, evaluated as the
    reciprocal of the finite product prod_{i=1}^{|n|} (1 - x q^{-i}).

    Raises
    ------
    PoleError
        If n < 0 and one of the denominator factors vanishes.
    """
    q = check_base(q)
    if int(n) != n:
        raise DomainError(f"index n must be an integer, got {n!r}")
    n = int(n)
    x = _as_array(x, "x")
    prod = np.ones_like(x)
    if n >= 0:
        for j in range(n):
            prod = prod * (1.0 - x * q**j)
        return _out(prod)
    for i in range(1, -n + 1):
        xi = x * q**-i
        factor = 1.0 - xi
        if np.any(np.abs(factor) <= 1e-15 * np.maximum(1.0, np.abs(xi))):
            raise PoleError(f"(x;q)_{n} has a vanishing denominator factor at i={i}")
        prod = prod * factor
    return _out(1.0 / prod)


def qpoch_multi(xs: Sequence, q, n=None):
    """Product of several q-shifted factorials (x1, x2, ...; q)_n (n=None for infinity)."""
    out = 1.0
    for x in xs:
        out = out * (qpoch_infinite(x, q) if n is None else qpoch_finite(x, q, n))
    return out


def theta(x, q):
    """Modified Jacobi theta function theta(x; q) = (x; q)_inf (q/x; q)_inf."""
    q = check_base(q)
    x = _as_array(x, "x")
    if np.any(x == 0):
        raise DomainError("theta(x; q) is undefined at x = 0")
    return _out(np.asarray(qpoch_infinite(x, q)) * np.asarray(qpoch_infinite(q / x, q)))


def log_theta(x, q):
    """Logarithm of theta(x; q), same branch convention as log_qpoch_infinite."""
    q = check_base(q)
    x = _as_array(x, "x")
    if np.any(x == 0):
        raise DomainError("theta(x; q) is undefined at x = 0")
    return _out(np.asarray(log_qpoch_infinite(x, q)) + np.asarray(log_qpoch_infinite(q / x, q)))


def theta_multi(xs: Sequence, q):
    """theta(x1, x2, ...; q), the product of theta values."""
    out = 1.0
    for x in xs:
        out = out * theta(x, q)
    return out


def _qlattice_index(v: np.ndarray, q: float) -> np.ndarray:
    """Return k >= 0 with v q^k == 1 (to TERMINATION_RTOL), else -1."""
    k = np.full(v.shape, -1, dtype=np.int64)
    ok = (np.abs(v.imag) <= TERMINATION_RTOL * np.abs(v)) & (v.real >= 1.0 - TERMINATION_RTOL)
    if np.any(ok):
        kk = np.rint(-np.log(v.real[ok]) / math.log(q)).astype(np.int64)
        kk = np.maximum(kk, 0)
        hit = np.abs(v[ok] * np.power(q, kk.astype(float)) - 1.0) <= TERMINATION_RTOL
        sub = np.where(hit, kk, -1)
        k[ok] = sub
    return k


def rphis(upper: Sequence, lower: Sequence, q, arg, *, compensated: bool = False):
    """Basic hypergeometric series r phi s.

    Sums  sum_n (upper;q)_n / (q, lower;q)_n [(-1)^n q^{n(n-1)/2}]^{s-r+1} arg^n
    with the term recurrence.  Parameters and ``arg`` broadcast against each
    other.  The recurrence and the partial sums run in ``np.clongdouble``
    (80-bit on x86), which keeps ill-conditioned sums near |arg| = 1 at
    double accuracy.

    Parameters
    ----------
    upper, lower : sequences of complex or arrays
    q : float
    arg : complex or array_like
    compensated : bool
        Use Neumaier compensated summation for the partial sums.

    Raises
    ------
    PoleError
        A lower parameter lies in q^{-N} inside the summation range.
    DivergenceError
        The series does not terminate and ``|arg| >= 1`` (r = s + 1), or
        r > s + 1 with nonzero argument.
    """
    q = check_base(q)
    r, s = len(upper), len(lower)
    arrays = [np.asarray(_as_array(v, "parameter"), dtype=complex) for v in (*upper, *lower)]
    x = np.asarray(_as_array(arg, "arg"), dtype=complex)
    bcast = np.broadcast_arrays(x, *arrays)
    shape = bcast[0].shape
    x = bcast[0].ravel()
    ups = [b.ravel() for b in bcast[1:1 + r]]
    lows = [b.ravel() for b in bcast[1 + r:]]
    size = x.size
    power = s - r + 1

    # last nonzero term index for terminating series, -1 otherwise
    last = np.full(size, -1, dtype=np.int64)
    for u in ups:
        k = _qlattice_index(u, q)
        hit = k >= 0
        last = np.where(hit & ((last < 0) | (k < last)), k, last)
    terminating = last >= 0
    for b in lows:
        k = _qlattice_index(b, q)
        bad = (k >= 0) & ((~terminating) | (k < last))
        if np.any(bad):
            raise PoleError("lower parameter in q^{-N} within the summation range")
    live = (~terminating) & (x != 0)
    if np.any(live):
        if r > s + 1:
            raise DivergenceError("non-terminating series with r > s + 1 diverges")
        if r == s + 1 and np.any(np.abs(x[live]) >= 1.0):
            raise DivergenceError("non-terminating series needs |arg| < 1")

    ext = np.clongdouble
    xe = x.astype(ext)
    upe = [u.astype(ext) for u in ups]
    lowe = [b.astype(ext) for b in lows]
    qe = np.longdouble(q)
    total = np.ones(size, dtype=ext)
    comp = np.zeros(size, dtype=ext)
    term = np.ones(size, dtype=ext)
    active = np.ones(size, dtype=bool)
    active &= ~(terminating & (last == 0))
    stall = np.zeros(size, dtype=np.int64)
    n = 0
    while np.any(active):
        if n >= MAX_SERIES_TERMS:
            raise DivergenceError("series failed to converge within the term cap")
        qn = qe**n
        num = np.ones(size, dtype=ext)
        for u in upe:
            num = num * (1 - u * qn)
        den = np.full(size, 1 - qn * qe, dtype=ext)
        for b in lowe:
            den = den * (1 - b * qn)
        ratio = num / np.where(active, den, 1) * xe
        if power:
            ratio = ratio * (-qn) ** power
        term = np.where(active, term * ratio, 0.0)
        if compensated:
            for part in ("real", "imag"):
                t = getattr(term, part)
                sm = getattr(total, part)
                new = sm + t
                corr = np.where(np.abs(sm) >= np.abs(t), (sm - new) + t, (t - new) + sm)
                if part == "real":
                    total = new + 1j * total.imag
                    comp = (comp.real + corr) + 1j * comp.imag
                else:
                    total = total.real + 1j * new
                    comp = comp.real + 1j * (comp.imag + corr)
        else:
            total = total + term
        n += 1
        small = np.abs(term) <= SERIES_EPS * np.abs(total)
        stall = np.where(small, stall + 1, 0)
        done = (stall >= STALL_TERMS) | (terminating & (n >= last))
        active &= ~done
    return _out((total + comp).astype(complex).reshape(shape))


def phi21(A, B, C, q, x, **kw):
    """Shorthand for the 2phi1(A, B; C; q, x) series."""
    return rphis([A, B], [C], q, x, **kw)
