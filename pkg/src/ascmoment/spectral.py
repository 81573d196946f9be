"""Spectral data of L for z = 1: discrete spectrum, the measure nu, resolvent.

Normalisation used throughout: for a lambda <-> 1/lambda symmetric f,

    int f dnu = 1/(2 pi Kt) int_0^pi f(e^{it}) W(e^{it}) dt + sum_atoms f(lam) |Res(lam)| / Kt

with W = 1/|c(lambda)|^2, Kt = theta(-1; q)/theta(-a^2; q) = K/(1 - q) and
Res(lam) the residue of 1/(l c(l) c(1/l)) at the atom.  With this choice
int P_n P_m dnu = delta_nm a^{2n}/(q^n w(-q^n)) and the total mass is 1/w(-1).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from . import qcore
from .eigenfun import (
    K_z, asc_poly_all, c_one, c_z, log_c_one, phi_negative, phi_table, psi_big_values,
)
from .errors import ContourError, DomainError, PoleError, SymmetryError
from .lattice import NEG, POS, Grid, GridFunction, QParams, fsum_complex, weight_at

DEFAULT_N_QUAD = 200
DEFAULT_TOL = 1e-14
# atoms are kept while they matter for polynomials up to this degree
DEFAULT_DEGREE = 20
MAX_ORTHO_DEGREE = 20
RESIDUE_NODES = 64
BOUNDARY_TOL = 1e-12


def _require_z1(params: QParams):
    if params.z != 1.0:
        raise DomainError("spectral measures are only built for z = 1")


def K_constant(params: QParams) -> float:
    """K = (1 - q) theta(-1; q)/theta(-a^2; q), the z = 1 value of K_z."""
    return K_z(params.with_z(1.0))


def total_mass(params: QParams) -> float:
    """(a^2; q)_inf / (q; q)_inf = 1/w(-1)."""
    q, a = params.q, params.a
    return float(np.real(qcore.qpoch_infinite(a * a, q) / qcore.qpoch_infinite(q, q)))


def norm_targets(N: int, params: QParams) -> np.ndarray:
    """a^{2n} / (q^n w(-q^n)) for n = 0..N."""
    n = np.arange(N + 1)
    w = weight_at(np.full(N + 1, NEG), n, params)
    return params.a ** (2 * n) / (params.q**n * w)


# ---------------------------------------------------------- atoms

@dataclass(frozen=True)
class Atom:
    """One point of the discrete spectrum.

    ``kind`` is "+" or "-" for lambda = +-a q^{m+1/2}, "s/a" for the extra
    atom of the real-s regime.  ``residue`` is the closed-form residue of
    1/(l c(l) c(1/l)) at lambda and ``mass`` the nu-mass.
    """

    lam: float
    mass: float
    residue: float
    kind: str
    m: int | None = None

    @property
    def mu(self) -> float:
        return self.lam + 1.0 / self.lam


@dataclass(frozen=True)
class DiscreteSpectrum:
    atoms: tuple[Atom, ...]
    truncation_tol: float
    degree: int

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([t.lam for t in self.atoms], dtype=float)

    @property
    def masses(self) -> np.ndarray:
        return np.array([t.mass for t in self.atoms], dtype=float)

    def without(self, kind: str) -> "DiscreteSpectrum":
        return DiscreteSpectrum(tuple(t for t in self.atoms if t.kind != kind), self.truncation_tol, self.degree)


def residue_closed_form(lam: float, params: QParams) -> float:
    """Closed-form residue of 1/(l c(l) c(1/l)) at an atom lambda (negative)."""
    _require_z1(params)
    kind, m = classify_atom(lam, params)
    q, a, s = params.q, params.a, params.s
    qp = qcore.qpoch_infinite
    th = qcore.theta
    if kind == "s/a":
        # the displayed closed form is minus the residue
        val = qp(a * a, q) * qp(s * s / (a * a), q) * th(s * s * q, q * q)
        val = val / (qp(q, q) * qp(s * s, q) * th(a**4 * q / (s * s), q * q))
        return -float(np.real(val))
    e = 1.0 if kind == "+" else -1.0
    sq = math.sqrt(q)
    pre = qp(a * a, q) ** 2 * qp(a * a * q, q) * qp(1.0 / (a * a * q), q) * th(q * s * s, q * q) * th(q / (s * s), q * q)
    den = 2.0 * qp(q * q, q * q) ** 2 * qp(e * a * a * sq * s, q) * qp(e * a * a * sq / s, q)
    den = den * qp(e * s / sq, q) * qp(e / (s * sq), q) * th(a**4 * q * q, q * q)
    fin = qcore.qpoch_finite(e * a * a * sq * s, q, m) * qcore.qpoch_finite(e * a * a * sq / s, q, m)
    fin = fin / (qcore.qpoch_finite(e * q * sq * s, q, m) * qcore.qpoch_finite(e * q * sq / s, q, m))
    fac = (1.0 - a * a * q ** (2 * m + 1)) / (1.0 - a * a * q) * fin * q ** (m * (m + 1))
    return float(np.real(pre / den * fac))


def atom_mass(lam: float, params: QParams) -> float:
    """nu-mass of an atom, |Res| (1 - q)/K."""
    return -residue_closed_form(lam, params) * (1.0 - params.q) / K_constant(params)


def classify_atom(lam: float, params: QParams) -> tuple[str, int | None]:
    """Return ("+"|"-", m) or ("s/a", None) for a point of the discrete spectrum."""
    lam = complex(lam)
    if abs(lam.imag) > 1e-12 * max(1.0, abs(lam)) or not (0 < abs(lam.real) < 1):
        raise DomainError(f"{lam} is not in the discrete spectrum")
    lam = lam.real
    q, a, s = params.q, params.a, params.s
    if params.s_is_real and abs(lam - s.real / a) <= 1e-12:
        return "s/a", None
    t = math.log(abs(lam) / abs(a)) / math.log(q) - 0.5
    m = round(t)
    if abs(t - m) > 1e-9:
        raise DomainError(f"{lam} is not in the discrete spectrum")
    sign = 1.0 if lam * a > 0 else -1.0
    return ("+" if sign > 0 else "-"), int(m)


def _atom_weight_profile(lam: float, mass: float, degree: int, params: QParams) -> float:
    """Largest share of the atom in the norms of P_0..P_degree."""
    vals = phi_negative(np.array([lam]), degree, params)[0]
    n = np.arange(degree + 1)
    w = weight_at(np.full(degree + 1, NEG), n, params)
    with np.errstate(over="ignore"):
        share = mass * np.abs(vals) ** 2 * params.q**n * w / total_mass(params)
    return float(np.max(share))


def discrete_spectrum(params: QParams, tol: float = DEFAULT_TOL, degree: int = DEFAULT_DEGREE) -> DiscreteSpectrum:
    """Atoms of nu inside (-1, 1).

    Enumerates +-a q^{m+1/2} (and s/a for real s with |s/a| < 1).  The infinite
    family is cut once an atom contributes less than ``tol`` (relative to the
    total mass) to the norm of every polynomial of degree <= ``degree``; a cut
    on the mass alone is not enough, since deep atoms carry large polynomial
    values.
    """
    _require_z1(params)
    q, a, s = params.q, params.a, params.s
    atoms: list[Atom] = []
    if params.s_is_real:
        r = abs(s.real / a)
        if abs(r - 1.0) <= BOUNDARY_TOL:
            raise DomainError("|s/a| = 1 is a boundary case and is rejected")
        if r < 1.0:
            lam = s.real / a
            res = residue_closed_form(lam, params)
            atoms.append(Atom(lam, atom_mass(lam, params), res, "s/a", None))
    m = math.floor(math.log(1.0 / abs(a)) / math.log(q) - 0.5) - 1
    while abs(a) * q ** (m + 0.5) >= 1.0:
        if abs(abs(a) * q ** (m + 0.5) - 1.0) <= BOUNDARY_TOL:
            raise DomainError("an atom sits on the unit circle (a^2 q^{2m+1} = 1)")
        m += 1
    first = m
    while True:
        added = False
        for sign in (1.0, -1.0):
            lam = sign * a * q ** (m + 0.5)
            res = residue_closed_form(lam, params)
            mass = -res * (1.0 - q) / K_constant(params)
            if mass <= 0.0:
                continue
            share = _atom_weight_profile(lam, mass, degree, params)
            if share >= tol or m <= first + degree:
                atoms.append(Atom(lam, mass, res, "+" if sign * a > 0 else "-", m))
                added = added or share >= tol
        if (not added and m > first + degree) or m > first + 400:
            break
        m += 1
    atoms.sort(key=lambda t: -abs(t.lam))
    return DiscreteSpectrum(tuple(atoms), tol, degree)


# ---------------------------------------------------------- density / residues

def density_W(lam, params: QParams):
    """W(lambda) = 1/|c(lambda)|^2 on the unit circle."""
    _require_z1(params)
    lam = np.asarray(lam, dtype=complex)
    if np.any(np.isclose(lam * lam, 1.0, rtol=0, atol=1e-14)):
        raise PoleError("W is evaluated at lambda = +-1")
    out = 1.0 / np.abs(c_one(lam, params)) ** 2
    return out.item() if np.ndim(out) == 0 else out


def _singular_points(lam: float, params: QParams, depth: int = 80) -> np.ndarray:
    """Candidate singularities of 1/(l c(l) c(1/l)) other than lam itself."""
    q, a, s = params.q, params.a, params.s
    k = np.arange(depth)
    pts = [np.array([0.0])]
    for sign in (1.0, -1.0):
        pts.append(sign * a * q ** (np.arange(-depth, depth) + 0.5))
        pts.append(sign * q ** (-k - 0.5) / a)
    pts += [a * s * q**k, a * q**k / s, q**-k.astype(float) / (a * s), s * q**-k.astype(float) / a]
    allp = np.concatenate([np.asarray(p, dtype=complex) for p in pts])
    allp = allp[np.isfinite(allp)]
    return allp[np.abs(allp - lam) > 1e-12 * max(1.0, abs(lam))]


def _residue_integrand(lp: np.ndarray, params: QParams) -> np.ndarray:
    return np.exp(-np.log(lp) - np.asarray(log_c_one(lp, params)) - np.asarray(log_c_one(1.0 / lp, params)))


def residue_oracle(lam, params: QParams, radius: float | None = None, nodes: int = RESIDUE_NODES) -> complex:
    """Residue of 1/(l c(l) c(1/l)) at lam by the trapezoid rule on a small circle.

    The default radius is q/4 times the distance to the nearest other
    singularity.  The value is recomputed with half the radius; a change of
    more than 1e-9 relative raises ContourError.
    """
    _require_z1(params)
    lam = complex(lam)
    if radius is None:
        gap = float(np.min(np.abs(_singular_points(lam, params) - lam)))
        radius = params.q * gap / 4.0

    def contour(r):
        t = 2.0 * np.pi * np.arange(nodes) / nodes
        e = np.exp(1j * t)
        f = _residue_integrand(lam + r * e, params)
        return complex(np.mean(f * r * e)), float(np.max(np.abs(f)) * r)

    v1, sc1 = contour(radius)
    v2, sc2 = contour(radius / 2.0)
    scale = max(abs(v1), abs(v2))
    if abs(v1 - v2) > 1e-9 * scale and abs(v1 - v2) > 1e-12 * max(sc1, sc2):
        raise ContourError(f"residue unstable under radius halving: {v1} vs {v2}")
    return v1


# ---------------------------------------------------------- the measure

@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Quadrature representation of nu.

    ``weight`` are Gauss-Legendre weights in theta on (0, pi) and ``density``
    the nu-density with respect to d(theta), so that
    int f dnu = sum weight*density*f(e^{i theta}) + sum mass*f(atom).
    """

    params: QParams
    K: float
    theta: np.ndarray
    weight: np.ndarray
    density: np.ndarray
    spectrum: DiscreteSpectrum

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    @property
    def atoms(self) -> np.ndarray:
        return self.spectrum.lambdas

    @property
    def masses(self) -> np.ndarray:
        return self.spectrum.masses

    @cached_property
    def node_mass(self) -> np.ndarray:
        return self.weight * self.density

    @property
    def lambdas(self) -> np.ndarray:
        """All support points: circle nodes then atoms."""
        return np.concatenate([self.nodes, self.atoms.astype(complex)])

    @property
    def point_masses(self) -> np.ndarray:
        return np.concatenate([self.node_mass, self.masses])

    @property
    def n_nodes(self) -> int:
        return self.theta.size

    @property
    def atom_mask(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.n_nodes, dtype=bool), np.ones(self.atoms.size, dtype=bool)])

    @property
    def total(self) -> float:
        return float(math.fsum(self.node_mass) + math.fsum(self.masses))

    def without_atoms(self, kind: str) -> "SpectralMeasure":
        return SpectralMeasure(self.params, self.K, self.theta, self.weight, self.density, self.spectrum.without(kind))

    # ---- export
    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "params": self.params.as_dict(),
            "nodes": [{"theta": float(t), "weight": float(w), "density": float(d)}
                      for t, w, d in zip(self.theta, self.weight, self.density)],
            "atoms": [{"lambda": t.lam, "mass": t.mass, "kind": t.kind, "m": t.m, "residue": t.residue}
                      for t in self.spectrum.atoms],
            "total_mass": self.total,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralMeasure":
        p = d["params"]
        params = QParams(p["q"], p["a"], complex(p["s_re"], p["s_im"]), p["z"])
        atoms = tuple(Atom(float(r["lambda"]), float(r["mass"]), float(r.get("residue", float("nan"))),
                           r.get("kind", "+"), r.get("m")) for r in d["atoms"])
        nodes = d["nodes"]
        return cls(params, float(d["K"]), np.array([r["theta"] for r in nodes], dtype=float),
                   np.array([r["weight"] for r in nodes], dtype=float),
                   np.array([r["density"] for r in nodes], dtype=float),
                   DiscreteSpectrum(atoms, float("nan"), -1))

    @classmethod
    def from_json(cls, text: str) -> "SpectralMeasure":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["kind", "theta", "weight", "density", "lambda", "mass"])
        for t, w, dd in zip(self.theta, self.weight, self.density):
            wr.writerow(["node", repr(float(t)), repr(float(w)), repr(float(dd)), "", ""])
        for at in self.spectrum.atoms:
            wr.writerow(["atom", "", "", "", repr(at.lam), repr(at.mass)])
        return buf.getvalue()


def build_measure(params: QParams, n_quad: int = DEFAULT_N_QUAD, tol: float = DEFAULT_TOL,
                  degree: int = DEFAULT_DEGREE) -> SpectralMeasure:
    """Assemble nu: Gauss-Legendre nodes on theta in (0, pi) plus truncated atoms."""
    _require_z1(params)
    if n_quad < 2:
        raise DomainError("need at least two quadrature nodes")
    x, w = np.polynomial.legendre.leggauss(int(n_quad))
    theta = (x + 1.0) * np.pi / 2.0
    weight = w * np.pi / 2.0
    K = K_constant(params)
    W = density_W(np.exp(1j * theta), params)
    density = (1.0 - params.q) * W / (2.0 * np.pi * K)
    return SpectralMeasure(params, K, theta, weight, density, discrete_spectrum(params, tol, degree))


def _check_symmetric(f: Callable, measure: SpectralMeasure, fa: np.ndarray):
    lam = measure.atoms
    if lam.size == 0:
        return
    fi = np.asarray(f(1.0 / lam.astype(complex)), dtype=complex)
    ok = np.isfinite(fi) & np.isfinite(fa)
    scale = np.maximum(np.maximum(np.abs(fa), np.abs(fi)), 1e-300)
    bad = ok & (np.abs(fa - fi) > 1e-8 * scale)
    if np.any(bad):
        raise SymmetryError("function is not invariant under lambda -> 1/lambda on the atoms")


def integrate_nu(f, measure: SpectralMeasure, check_symmetry: bool = True) -> complex:
    """int f dnu for a symmetric f.

    ``f`` is a vectorised callable of lambda, or a pair ``(circle, atoms)``
    of value arrays on the measure's nodes and atoms.
    """
    if callable(f):
        fc = np.asarray(f(measure.nodes), dtype=complex)
        fa = np.asarray(f(measure.atoms.astype(complex)), dtype=complex)
        if check_symmetry:
            _check_symmetric(f, measure, fa)
    else:
        fc, fa = (np.asarray(v, dtype=complex) for v in f)
    with np.errstate(invalid="ignore"):
        terms = np.concatenate([measure.node_mass * fc, np.where(measure.masses > 0, measure.masses * fa, 0.0)])
    return fsum_complex(terms)


def polynomial_table(N: int, measure: SpectralMeasure) -> np.ndarray:
    """P_n(lambda; s/a, 1/(sa); 1/q) for n <= N at all support points of the measure."""
    p = measure.params
    return asc_poly_all(N, measure.lambdas, p.s / p.a, 1.0 / (p.s * p.a), p.q)


def orthogonality_matrix(N: int, measure: SpectralMeasure) -> np.ndarray:
    """G[n, n'] = int P_n conj(P_n') dnu for 0 <= n, n' <= N (N <= 20)."""
    if N > MAX_ORTHO_DEGREE:
        raise ValueError(f"degree capped at {MAX_ORTHO_DEGREE}")
    P = polynomial_table(N, measure)
    wts = measure.point_masses
    G = np.empty((N + 1, N + 1), dtype=complex)
    for i in range(N + 1):
        for j in range(i, N + 1):
            G[i, j] = fsum_complex(wts * P[i] * P[j].conj())
            G[j, i] = G[i, j].conjugate()
    return G


def orthogonality_error(G: np.ndarray, params: QParams) -> float:
    """max |G - diag(t)| / sqrt(t_n t_n') with t the predicted squared norms."""
    t = norm_targets(G.shape[0] - 1, params)
    return float(np.max(np.abs(G - np.diag(t)) / np.sqrt(np.outer(t, t))))


# ---------------------------------------------------------- resolvent

def _check_resolvent_point(lam: complex):
    if not abs(lam) < 1.0:
        raise DomainError("lambda must lie in the open unit disk")
    if abs(lam.imag) < 1e-14:
        raise DomainError("lambda must lie off the real segment (-1, 1)")


def green_data(lam, grid: Grid) -> tuple[np.ndarray, np.ndarray, complex]:
    """phi_lambda and Psi_lambda on the grid plus the kernel denominator.

    The denominator is D(Psi_lambda, phi_lambda) = K_z c_z(1/lam)(lam - 1/lam).
    With the Casorati orientation used here this is the sign for which
    (L - mu(lam)) R = id.
    """
    lam = complex(lam)
    _check_resolvent_point(lam)
    p = grid.params
    ph = phi_table(np.array([lam]), grid)[0]
    Ps = np.empty(grid.size, dtype=complex)
    for branch, sl in ((NEG, grid.neg_slice()), (POS, grid.pos_slice())):
        Ps[sl] = psi_big_values(np.array([lam]), branch, grid.n[sl], p)[0]
    D = K_z(p) * complex(c_z(1.0 / lam, p)) * (lam - 1.0 / lam)
    if D == 0:
        raise PoleError("lambda is a pole of the resolvent")
    return ph, Ps, D


def green_kernel(lam, x: float, y: float, grid: Grid) -> complex:
    """G_lambda(x, y) = phi_lambda(min(x,y)) Psi_lambda(max(x,y)) / D_lambda."""
    ph, Ps, D = green_data(lam, grid)
    i, j = grid.locate(x), grid.locate(y)
    lo, hi = (i, j) if grid.x[i] <= grid.x[j] else (j, i)
    return complex(ph[lo] * Ps[hi] / D)


def green_matrix(lam, grid: Grid) -> np.ndarray:
    """G_lambda(x_i, x_j) for all grid pairs."""
    ph, Ps, D = green_data(lam, grid)
    order = np.argsort(grid.x)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    lower = rank[:, None] <= rank[None, :]
    return np.where(lower, ph[:, None] * Ps[None, :], Ps[:, None] * ph[None, :]) / D


def resolvent_apply(f: GridFunction, lam) -> GridFunction:
    """(R f)(y) = q-integral over x of f(x) G_lambda(x, y) w(x)."""
    G = green_matrix(lam, f.grid)
    vals = (f.values * f.grid.measure) @ G
    return GridFunction(f.grid, vals)
