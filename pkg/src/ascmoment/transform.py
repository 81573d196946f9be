"""The transform F from lattice functions to functions on the spectrum, and its inverse.

(F f)(lam) = (1 - q) sum_x f(x) phi_lam(x) w(x) |x| is unitary onto the
space of symmetric functions with inner product int f conj(g) dnu / (1 - q).
With that pairing the inverse is (G g)(x) = <g, phi_.(x)> and
d_x = delta_x / ((1 - q) w(x) |x|) satisfies F d_x = phi_.(x).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .eigenfun import K_z, apply_L_array, c_z, mu, phi_table
from .errors import DegenerateError, DomainError, SupportError
from .lattice import POS, Grid, GridFunction, QParams, casorati_factor, fsum_complex
from .spectral import SpectralMeasure


def h_scale(params: QParams) -> float:
    """Factor between int . dnu and the inner product of the transform space."""
    return 1.0 / (1.0 - params.q)


@dataclass(frozen=True, eq=False)
class HFunction:
    """Values on the measure's circle nodes (theta in (0, pi)) and atoms."""

    measure: SpectralMeasure
    circle: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.circle, dtype=complex)
        a = np.asarray(self.atoms, dtype=complex)
        if c.shape != (self.measure.n_nodes,) or a.shape != (self.measure.atoms.size,):
            raise DomainError("HFunction values do not match the measure's nodes and atoms")
        object.__setattr__(self, "circle", c)
        object.__setattr__(self, "atoms", a)

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.circle, self.atoms])

    @classmethod
    def from_values(cls, measure: SpectralMeasure, values: np.ndarray) -> "HFunction":
        n = measure.n_nodes
        return cls(measure, values[:n], values[n:])

    @classmethod
    def from_callable(cls, measure: SpectralMeasure, func) -> "HFunction":
        return cls(measure, func(measure.nodes), func(measure.atoms.astype(complex)))

    def __add__(self, other: "HFunction") -> "HFunction":
        return HFunction(self.measure, self.circle + other.circle, self.atoms + other.atoms)

    def __sub__(self, other: "HFunction") -> "HFunction":
        return HFunction(self.measure, self.circle - other.circle, self.atoms - other.atoms)

    def __mul__(self, c) -> "HFunction":
        return HFunction(self.measure, self.circle * c, self.atoms * c)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        m = self.measure
        return {"circle": [{"theta": float(t), "re": float(v.real), "im": float(v.imag)} for t, v in zip(m.theta, self.circle)],
                "atoms": [{"lambda": float(l), "re": float(v.real), "im": float(v.imag)} for l, v in zip(m.atoms, self.atoms)]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict, measure: SpectralMeasure) -> "HFunction":
        circ = np.zeros(measure.n_nodes, dtype=complex)
        at = np.zeros(measure.atoms.size, dtype=complex)
        for rec in d.get("circle", []):
            i = int(np.argmin(np.abs(measure.theta - rec["theta"])))
            if abs(measure.theta[i] - rec["theta"]) > 1e-12:
                raise DomainError(f"theta {rec['theta']} is not a node of the measure")
            circ[i] = complex(rec["re"], rec["im"])
        for rec in d.get("atoms", []):
            i = int(np.argmin(np.abs(measure.atoms - rec["lambda"])))
            if abs(measure.atoms[i] - rec["lambda"]) > 1e-12 * max(1.0, abs(rec["lambda"])):
                raise DomainError(f"lambda {rec['lambda']} is not an atom of the measure")
            at[i] = complex(rec["re"], rec["im"])
        return cls(measure, circ, at)

    @classmethod
    def from_json(cls, text: str, measure: SpectralMeasure) -> "HFunction":
        return cls.from_dict(json.loads(text), measure)


@lru_cache(maxsize=8)
def phi_on_support(measure: SpectralMeasure, grid: Grid) -> np.ndarray:
    """phi_lambda(x) for every support point lambda of the measure and every grid point."""
    if grid.params != measure.params:
        raise DomainError("grid and measure have different parameters")
    table = phi_table(measure.lambdas, grid, atoms=measure.atom_mask)
    table.setflags(write=False)
    return table


def delta_function(grid: Grid, branch: int, n: int) -> GridFunction:
    """d_x = delta_x / ((1 - q) w(x) |x|), the function with <f, d_x> = f(x)."""
    i = grid.index(branch, n)
    return grid.delta(branch, n, 1.0 / grid.measure[i])


def check_support(f: GridFunction, margin: int = 0):
    """Raise SupportError if f is nonzero within ``margin`` steps of a truncation edge."""
    g = f.grid
    n = g.n
    near = ((g.branch != POS) & (n > g.neg_depth - 1 - margin)) | \
           ((g.branch == POS) & ((n > g.pos_low - 1 - margin) | (n < -g.pos_high + 1 + margin)))
    if np.any(f.values[near] != 0):
        raise SupportError("support reaches the truncation edge of the grid")


def forward_F(f: GridFunction, measure: SpectralMeasure) -> HFunction:
    """(F f)(lam) = (1 - q) sum_x f(x) phi_lam(x) w(x) |x| at every node and atom."""
    check_support(f)
    supp = f.support()
    table = phi_on_support(measure, f.grid)
    coeff = (f.values * f.grid.measure)[supp]
    vals = table[:, supp] @ coeff
    return HFunction.from_values(measure, vals)


def h_inner(g: HFunction, h: HFunction) -> complex:
    """<g, h> = int g conj(h) dnu / (1 - q)."""
    m = g.measure
    with np.errstate(invalid="ignore"):
        terms = m.point_masses * g.values * h.values.conj()
    return h_scale(m.params) * fsum_complex(np.where(m.point_masses > 0, terms, 0.0))


def inverse_G(g: HFunction, grid: Grid) -> GridFunction:
    """(G g)(x) = <g, phi_.(x)> at every grid point."""
    m = g.measure
    table = phi_on_support(m, grid)
    wts = np.where(m.point_masses > 0, m.point_masses * g.values, 0.0)
    vals = h_scale(m.params) * (wts @ table.conj())
    return GridFunction(grid, vals)


def diagonalization_check(f: GridFunction, measure: SpectralMeasure, relative: bool = False) -> float:
    """sup over nodes and atoms of |F(Lf)(lam) - mu(lam) (Ff)(lam)|.

    With ``relative=True`` each residual is divided by the size of the
    terms that cancel in it, sum_x |Lf(x) phi_lam(x)| m_x + |mu| sum_x |f(x) phi_lam(x)| m_x.
    """
    check_support(f, margin=1)
    lf, _ = apply_L_array(f.values, f.grid)
    Lf = GridFunction(f.grid, lf)
    F1 = forward_F(Lf, measure).values
    F0 = forward_F(f, measure).values
    m = mu(measure.lambdas)
    res = np.abs(F1 - m * F0)
    if not relative:
        return float(np.max(res)) if res.size else 0.0
    table = np.abs(phi_on_support(measure, f.grid))
    wm = f.grid.measure
    scale = table @ (np.abs(lf) * wm) + np.abs(m) * (table @ (np.abs(f.values) * wm))
    rel = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), 0.0)
    return float(np.max(rel)) if rel.size else 0.0


# ---------------------------------------------------------- truncated inner products

def _phi_pair(lam, lam2, grid: Grid, atoms) -> np.ndarray:
    return phi_table(np.array([lam, lam2], dtype=complex), grid, atoms=np.asarray(atoms, dtype=bool))


def phi_inner_l(lam, lam2, l: int, params: QParams, atoms=(False, False)) -> complex:
    """lim_k <phi_lam, phi_lam2>_{k,l,k} via the Casorati determinant at z q^{-l-1}.

    Equals D(phi_lam, conj phi_lam2)(z q^{-l-1}) / (mu(lam) - conj mu(lam2)).
    ``atoms`` flags arguments that are atoms of the spectrum (z = 1).
    """
    lam, lam2 = complex(lam), complex(lam2)
    dm = mu(lam) - np.conj(mu(lam2))
    if abs(dm) <= 1e-14 * max(1.0, abs(mu(lam))):
        raise DegenerateError("mu(lambda) equals mu(lambda')")
    grid = Grid(params, 1, 0, l + 1)
    T = _phi_pair(lam, lam2, grid, atoms)
    i, j = grid.index(POS, -l - 1), grid.index(POS, -l)
    f, g = T[0], T[1].conj()
    D = (f[i] * g[j] - f[j] * g[i]) * casorati_factor(POS, -l - 1, params)[0]
    return complex(D / dm)


def phi_inner_direct(lam, lam2, l: int, params: QParams, k: int = 50, atoms=(False, False)) -> complex:
    """<phi_lam, phi_lam2>_{k,l,k} by direct summation."""
    grid = Grid(params, k, k, l)
    T = _phi_pair(lam, lam2, grid, atoms)
    return fsum_complex(T[0] * T[1].conj() * grid.measure)


def phi_inner_asymptotic(lam, lam2, l: int, params: QParams) -> complex:
    """Leading large-l behaviour of <phi_lam, phi_lam2>_l.

    K_z sum_{e, h = +-1} (lam^e - lam2'^h)(lam^e lam2'^h)^l c_z(lam^e) c_z(lam2'^h) / (mu(lam) - mu(lam2'))
    with lam2' = conj(lam2).
    """
    lam, lam2 = complex(lam), np.conj(complex(lam2))
    dm = mu(lam) - mu(lam2)
    if abs(dm) <= 1e-14 * max(1.0, abs(mu(lam))):
        raise DegenerateError("mu(lambda) equals mu(lambda')")
    total = 0j
    for e in (1, -1):
        for h in (1, -1):
            x, y = lam**e, lam2**h
            total += (x - y) * (x * y) ** l * complex(c_z(x, params)) * complex(c_z(y, params))
    return K_z(params) * total / dm
