"""The q-lattice -q^N u z q^Z, its weight, q-integration and Casorati determinants."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from . import qcore
from .errors import DomainError, GridMismatch, RangeError

NEG = -1  # branch tag for the points -q^n
POS = 1  # branch tag for the points z q^n
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class QParams:
    """Parameter tuple (q, a, s, z).

    Requires 0 < a^2 < 1, z in (q, 1], and either |s| = 1 with s != +-1 or
    s real with q < s^2 < 1.
    """

    q: float
    a: float
    s: complex
    z: float = 1.0

    def __post_init__(self):
        q = qcore.check_base(self.q)
        object.__setattr__(self, "q", q)
        a = complex(self.a)
        if abs(a.imag) > 0:
            raise DomainError("a must be real")
        a = a.real
        if not (0.0 < a * a < 1.0):
            raise DomainError(f"need 0 < a^2 < 1, got a = {a}")
        object.__setattr__(self, "a", a)
        s = complex(self.s)
        if abs(abs(s) - 1.0) <= UNIT_TOL:
            if abs(s - 1.0) <= UNIT_TOL or abs(s + 1.0) <= UNIT_TOL:
                raise DomainError("s on the unit circle must differ from +-1")
        elif s.imag == 0.0:
            if not (q < s.real**2 < 1.0):
                raise DomainError(f"real s needs q < s^2 < 1, got s = {s.real}")
        else:
            raise DomainError("s must lie on the unit circle or be real")
        object.__setattr__(self, "s", s)
        z = float(self.z)
        if not (q < z <= 1.0):
            raise DomainError(f"z must lie in (q, 1], got {z}")
        object.__setattr__(self, "z", z)

    @property
    def s_is_real(self) -> bool:
        return self.s.imag == 0.0

    @property
    def s_sum(self) -> float:
        """s + 1/s, which is real in both admissible regimes."""
        return float((self.s + 1.0 / self.s).real)

    def with_z(self, z: float) -> "QParams":
        return QParams(self.q, self.a, self.s, z)

    def as_dict(self) -> dict:
        return {"q": self.q, "a": self.a, "s_re": self.s.real, "s_im": self.s.imag, "z": self.z}


@dataclass(frozen=True)
class Grid:
    """Truncated lattice: -q^n for 0 <= n <= neg_depth, z q^n for -pos_high <= n <= pos_low.

    Points are ordered by position: the negative branch from -1 towards 0,
    then the positive branch from z q^pos_low outwards.
    """

    params: QParams
    neg_depth: int = 60
    pos_low: int = 60
    pos_high: int = 40

    def __post_init__(self):
        for name in ("neg_depth", "pos_low", "pos_high"):
            v = getattr(self, name)
            if int(v) != v:
                raise DomainError(f"{name} must be an integer")
            object.__setattr__(self, name, int(v))
        if self.neg_depth < 1 or self.pos_low + self.pos_high < 1:
            raise DomainError("grid needs at least two points per branch")

    @cached_property
    def branch(self) -> np.ndarray:
        return np.concatenate([np.full(self.neg_depth + 1, NEG),
                               np.full(self.pos_low + self.pos_high + 1, POS)])

    @cached_property
    def n(self) -> np.ndarray:
        return np.concatenate([np.arange(0, self.neg_depth + 1),
                               np.arange(self.pos_low, -self.pos_high - 1, -1)])

    @property
    def size(self) -> int:
        return self.branch.size

    @cached_property
    def x(self) -> np.ndarray:
        """Positions, recomputed from the integer indices."""
        return point_position(self.branch, self.n, self.params)

    @cached_property
    def abs_x(self) -> np.ndarray:
        return np.abs(self.x)

    @cached_property
    def weights(self) -> np.ndarray:
        return weight_at(self.branch, self.n, self.params)

    @cached_property
    def measure(self) -> np.ndarray:
        """q-integration mass (1 - q) w(x) |x| of every point."""
        return (1.0 - self.params.q) * self.weights * self.abs_x

    @cached_property
    def _lookup(self) -> dict:
        return {(int(t), int(k)): i for i, (t, k) in enumerate(zip(self.branch, self.n))}

    def index(self, branch: int, n: int) -> int:
        try:
            return self._lookup[(int(branch), int(n))]
        except KeyError:
            raise RangeError(f"lattice point ({branch}, {n}) is outside the grid") from None

    def has(self, branch: int, n: int) -> bool:
        return (int(branch), int(n)) in self._lookup

    def locate(self, x: float) -> int:
        t, k = lattice_coordinates(x, self.params)
        return self.index(t, k)

    @cached_property
    def edge(self) -> np.ndarray:
        """True where a lattice neighbour of the point is missing from the grid."""
        e = np.zeros(self.size, dtype=bool)
        e[self.index(NEG, self.neg_depth)] = True
        e[self.index(POS, self.pos_low)] = True
        e[self.index(POS, -self.pos_high)] = True
        return e

    def neg_slice(self) -> slice:
        return slice(0, self.neg_depth + 1)

    def pos_slice(self) -> slice:
        return slice(self.neg_depth + 1, self.size)

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.size, dtype=complex))

    def delta(self, branch: int, n: int, scale: complex = 1.0) -> "GridFunction":
        v = np.zeros(self.size, dtype=complex)
        v[self.index(branch, n)] = scale
        return GridFunction(self, v)

    def function(self, func) -> "GridFunction":
        """Tabulate a callable of the position."""
        return GridFunction(self, np.asarray(func(self.x), dtype=complex))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex values at every point of a grid (stored in grid order)."""

    grid: Grid
    values: np.ndarray
    edge_flags: np.ndarray | None = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.size,):
            raise DomainError(f"expected {self.grid.size} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridMismatch("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values - other.values)
        return GridFunction(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def conj(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.conj())

    def at(self, branch: int, n: int) -> complex:
        return complex(self.values[self.grid.index(branch, n)])

    def __call__(self, x: float) -> complex:
        return complex(self.values[self.grid.locate(x)])

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values != 0)

    def to_records(self) -> list[dict]:
        g = self.grid
        return [{"t": "-1" if t == NEG else "z", "n": int(k), "re": float(v.real), "im": float(v.imag)}
                for t, k, v in zip(g.branch, g.n, self.values)]

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_records(), **kw)

    @classmethod
    def from_records(cls, records: Iterable[dict], grid: Grid) -> "GridFunction":
        """Build from JSON records; grid points without a record are set to zero."""
        v = np.zeros(grid.size, dtype=complex)
        for rec in records:
            t = rec["t"]
            if t in ("-1", -1):
                branch = NEG
            elif t == "z":
                branch = POS
            else:
                raise DomainError(f"unknown branch tag {t!r}")
            v[grid.index(branch, int(rec["n"]))] = complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))
        return cls(grid, v)

    @classmethod
    def from_json(cls, text: str, grid: Grid) -> "GridFunction":
        return cls.from_records(json.loads(text), grid)


def point_position(branch, n, params: QParams):
    branch = np.asarray(branch)
    n = np.asarray(n, dtype=float)
    return np.where(branch == NEG, -np.power(params.q, n), params.z * np.power(params.q, n))


def lattice_coordinates(x: float, params: QParams) -> tuple[int, int]:
    """Map a position to (branch, n); DomainError when x is not a lattice point."""
    x = float(x)
    if x < 0:
        base, branch = 1.0, NEG
    elif x > 0:
        base, branch = params.z, POS
    else:
        raise DomainError("0 is not a lattice point")
    t = math.log(abs(x) / base) / math.log(params.q)
    k = round(t)
    if abs(t - k) > 1e-9 or (branch == NEG and k < 0):
        raise DomainError(f"{x} is not a lattice point")
    return branch, int(k)


def weight_at(branch, n, params: QParams) -> np.ndarray:
    """Weight w at lattice points given by (branch, n), vectorised.

    Far out on the positive branch (x = z q^{-N}) the ratio of infinite
    products over/underflows, so the finite-product form
    (-zq;q)_inf/(-za^2;q)_inf * prod_{j<N} (1+q^j/z)/(1+q^{j+1}/(za^2)) * a^{-2N} q^N
    is used there.
    """
    q, a, z = params.q, params.a, params.z
    branch, n = np.broadcast_arrays(np.atleast_1d(np.asarray(branch)), np.atleast_1d(np.asarray(n, dtype=np.int64)))
    out = np.empty(n.shape, dtype=float)
    neg = branch == NEG
    if np.any(neg):
        x = -np.power(q, n[neg].astype(float))
        out[neg] = (np.asarray(qcore.qpoch_infinite(-q * x, q)) / np.asarray(qcore.qpoch_infinite(-a * a * x, q))).real
    pos = ~neg
    small = pos & (n >= 0)
    if np.any(small):
        x = z * np.power(q, n[small].astype(float))
        out[small] = (np.asarray(qcore.qpoch_infinite(-q * x, q)) / np.asarray(qcore.qpoch_infinite(-a * a * x, q))).real
    big = pos & (n < 0)
    if np.any(big):
        base = float(np.real(qcore.qpoch_infinite(-z * q, q) / qcore.qpoch_infinite(-z * a * a, q)))
        depth = -n[big]
        nmax = int(depth.max())
        j = np.arange(nmax)
        factors = (1.0 + q**j / z) / (1.0 + q ** (j + 1) / (z * a * a))
        logcum = np.concatenate([[0.0], np.cumsum(np.log(factors))])
        logw = math.log(base) + logcum[depth] + depth * (math.log(q) - 2.0 * math.log(abs(a)))
        out[big] = np.exp(logw)
    return out


def weight_w(x, params: QParams):
    """Weight w(x) = (-qx;q)_inf / (-a^2 x;q)_inf at a lattice point x."""
    if np.ndim(x) == 0:
        t, k = lattice_coordinates(x, params)
        return float(weight_at(t, k, params)[0])
    coords = [lattice_coordinates(v, params) for v in np.ravel(x)]
    br = np.array([c[0] for c in coords])
    nn = np.array([c[1] for c in coords])
    return weight_at(br, nn, params).reshape(np.shape(x))


def fsum_complex(values) -> complex:
    """Correctly rounded sum of complex numbers (real and imaginary parts separately)."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def q_integral(f: GridFunction) -> complex:
    """Jackson q-integral of f over the truncated lattice, (1-q) sum f(x)|x|."""
    g = f.grid
    return fsum_complex((1.0 - g.params.q) * f.values * g.abs_x)


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """<f, g> = q-integral of f conj(g) w."""
    if f.grid != g.grid:
        raise GridMismatch("grid functions live on different grids")
    return fsum_complex(f.values * g.values.conj() * f.grid.measure)


def truncated_inner(f: GridFunction, g: GridFunction, k: int, l: int, m: int) -> complex:
    """Truncated inner product: n = 0..k on the negative branch, n = -l..m on the positive one."""
    if f.grid != g.grid:
        raise GridMismatch("grid functions live on different grids")
    grid = f.grid
    if not (0 <= k <= grid.neg_depth):
        raise RangeError(f"k = {k} outside 0..{grid.neg_depth}")
    if not (-grid.pos_high <= -l and m <= grid.pos_low and -l <= m):
        raise RangeError(f"positive range -{l}..{m} outside the grid")
    sel = ((grid.branch == NEG) & (grid.n <= k)) | ((grid.branch == POS) & (grid.n >= -l) & (grid.n <= m))
    return fsum_complex((f.values * g.values.conj() * grid.measure)[sel])


def casorati_factor(branch, n, params: QParams) -> np.ndarray:
    """a^{-1} (1 - q)(1 + a^2 x) w(x) at lattice points."""
    x = point_position(branch, n, params)
    return (1.0 - params.q) * (1.0 + params.a**2 * x) * weight_at(branch, n, params) / params.a


def casorati(f: GridFunction, g: GridFunction, x: float) -> complex:
    """Casorati determinant D(f, g)(x) = (f(x)g(qx) - f(qx)g(x)) a^{-1}(1-q)(1+a^2x)w(x)."""
    if f.grid != g.grid:
        raise GridMismatch("grid functions live on different grids")
    grid = f.grid
    t, k = lattice_coordinates(x, grid.params)
    i = grid.index(t, k)
    j = grid.index(t, k + 1)
    fx, fq, gx, gq = f.values[i], f.values[j], g.values[i], g.values[j]
    return complex((fx * gq - fq * gx) * casorati_factor(t, k, grid.params)[0])


def casorati_all(f: GridFunction, g: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Casorati determinant at every grid point whose q-neighbour is on the grid.

    Returns the grid indices used and the values.
    """
    if f.grid != g.grid:
        raise GridMismatch("grid functions live on different grids")
    grid = f.grid
    idx, nxt = [], []
    for i, (t, k) in enumerate(zip(grid.branch, grid.n)):
        if grid.has(t, k + 1):
            idx.append(i)
            nxt.append(grid.index(t, k + 1))
    idx = np.array(idx)
    nxt = np.array(nxt)
    fv, gv = f.values, g.values
    vals = (fv[idx] * gv[nxt] - fv[nxt] * gv[idx]) * casorati_factor(grid.branch[idx], grid.n[idx], grid.params)
    return idx, vals
