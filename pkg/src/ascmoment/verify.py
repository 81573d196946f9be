"""Verification suites: residual checks shared by the command line and the tests.

Every check returns a :class:`Check` holding a residual and the tolerance it
is judged against.  Suites are lists of checks built from one parameter set.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .crosscheck import matrix_crosscheck
from .eigenfun import (K_z, apply_L_array, asc_poly_all, c_z, casorati_interior, eigen_family, eigen_residual,
                       mu, phi_negative, phi_table)
from .errors import AscMomentError
from .lattice import Grid, GridFunction, QParams, inner_product
from .spectral import (SpectralMeasure, build_measure, integrate_nu, orthogonality_error, orthogonality_matrix,
                       residue_closed_form, residue_oracle, resolvent_apply, total_mass)
from .transform import diagonalization_check, forward_F, h_inner, inverse_G

EIGEN_WINDOW = 14  # depth of the window near 0 where eigen residuals are judged
ORTHO_N = 10
MASS_CUTOFF = 1e-10


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": float(self.residual), "tol": float(self.tol),
                "pass": self.passed, "detail": self.detail}


def _rel(a, b, scale=None) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    s = np.maximum(np.abs(a), np.abs(b)) if scale is None else np.asarray(scale)
    return np.abs(a - b) / np.where(s > 0, s, 1.0)


def random_complex(rng: np.random.Generator, size, lo: float = 0.2, hi: float = 5.0) -> np.ndarray:
    """Complex numbers with log-uniform modulus in [lo, hi] and uniform argument."""
    r = np.exp(rng.uniform(math.log(lo), math.log(hi), size))
    return r * np.exp(1j * rng.uniform(-np.pi, np.pi, size))


def random_lambdas(rng: np.random.Generator, n: int, margin: float = 1e-3) -> np.ndarray:
    """Half on the unit circle (argument in (margin, pi - margin)), half real in (-1, 1) away from 0 and +-1."""
    k = n // 2
    circ = np.exp(1j * rng.uniform(margin, np.pi - margin, k))
    real = rng.uniform(0.05, 1.0 - margin, n - k) * rng.choice([-1.0, 1.0], n - k)
    return np.concatenate([circ, real.astype(complex)])


# ---------------------------------------------------------- identities

def theta_quasi_periodicity(q: float, x: np.ndarray, k: np.ndarray) -> float:
    lhs = qcore.theta(x * q**k.astype(float), q)
    rhs = (-x) ** (-k.astype(float)) * q ** (-0.5 * k * (k - 1)) * qcore.theta(x, q)
    return float(np.max(_rel(lhs, rhs)))


def theta_splitting(q: float, x: np.ndarray) -> float:
    r1 = _rel(qcore.theta(-x, q) * qcore.theta(x, q), qcore.theta(x * x, q * q))
    r2 = _rel(qcore.theta(x, q), qcore.theta(x, q * q) * qcore.theta(q * x, q * q))
    return float(max(np.max(r1), np.max(r2)))


def theta_fundamental(q: float, x, v, y, w) -> float:
    """Relative residual of the four-term theta identity, scaled by its largest term."""
    th = lambda *args: np.prod([qcore.theta(t, q) for t in args], axis=0)
    t1 = th(x * v, x / v, y * w, y / w)
    t2 = th(x * w, x / w, y * v, y / v)
    t3 = (y / v) * th(x * y, x / y, v * w, v / w)
    scale = np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(t3)])
    return float(np.max(np.abs(t1 - t2 - t3) / scale))


def qpoch_shift_identities(q: float, x: np.ndarray, n: np.ndarray) -> float:
    r1 = [_rel(qcore.qpoch_infinite(xi * q**ni, q), qcore.qpoch_infinite(xi, q) / qcore.qpoch_finite(xi, q, int(ni)))
          for xi, ni in zip(x, n)]
    r2 = [_rel(qcore.qpoch_finite(xi * q ** (-float(ni)), q, int(ni)),
               (-xi) ** ni * q ** (-ni * (ni + 1) / 2.0) * qcore.qpoch_finite(q / xi, q, int(ni)))
          for xi, ni in zip(x, n)]
    return float(max(np.max(r1), np.max(r2)))


def phi21_difference_residual(A, B, C, q: float, x) -> float:
    """Residual of (ABx - C) f(qx) + [C + q - (A+B)x] f(x) + (x - q) f(x/q) for f = 2phi1(A,B;C;q,.).

    Scaled by the sum of the moduli of the three terms.
    """
    f = lambda t: qcore.phi21(A, B, C, q, t)
    t1 = (A * B * x - C) * f(q * x)
    t2 = (C + q - (A + B) * x) * f(x)
    t3 = (x - q) * f(x / q)
    return float(np.max(np.abs(t1 + t2 + t3) / (np.abs(t1) + np.abs(t2) + np.abs(t3))))


def identities_suite(q: float, rng: np.random.Generator, n: int = 100, tol: float = 1e-12) -> list[Check]:
    x = random_complex(rng, n)
    k = rng.integers(-3, 4, n)
    out = [Check("theta quasi-periodicity", theta_quasi_periodicity(q, x, k), tol),
           Check("theta splitting", theta_splitting(q, random_complex(rng, n)), tol)]
    xv = [random_complex(rng, n) for _ in range(4)]
    out.append(Check("theta four-term identity", theta_fundamental(q, *xv), tol))
    out.append(Check("q-shifted factorial shifts",
                     qpoch_shift_identities(q, random_complex(rng, n, 0.2, 3.0), rng.integers(0, 8, n)), tol))
    # |x|, |qx|, |x/q| < 1 needs |x| < q
    xs = random_complex(rng, n, 0.05, 0.95 * q)
    A, B, C = random_complex(rng, 3, 0.2, 0.9)
    out.append(Check("2phi1 q-difference equation", phi21_difference_residual(A, B, C, q, xs), tol))
    return out


# ---------------------------------------------------------- eigenfunctions

def eigen_window(grid: Grid, depth: int = EIGEN_WINDOW) -> np.ndarray:
    """Interior points at depth n <= ``depth`` (residuals near 0 grow like eps q^{-n})."""
    return (grid.n <= depth) & ~grid.edge


def eigen_equation_residual(lams: np.ndarray, grid: Grid, depth: int = EIGEN_WINDOW) -> np.ndarray:
    """max over the window of |L phi - mu phi| / max|phi| for each lambda."""
    T = phi_table(lams, grid)
    res = eigen_residual(T, lams, grid)
    win = eigen_window(grid, depth)
    return np.nanmax(res[:, win], axis=1) / np.max(np.abs(T[:, win]), axis=1)


def casorati_constancy(f: GridFunction, g: GridFunction, target: complex, depth: int = EIGEN_WINDOW) -> float:
    """max relative deviation of D(f, g) from ``target`` over the window (x = -1 excluded)."""
    idx, vals = casorati_interior(f, g)
    keep = f.grid.n[idx] <= depth
    return float(np.max(np.abs(vals[keep] - target)) / abs(target))


def polynomial_identification(lam, params: QParams, N: int = 10) -> float:
    """max_n |phi_lambda(-q^n) - a^{-n} P_n(lambda)| / max(1, |a^{-n}P_n|) for n <= N."""
    pn = phi_negative(lam, N, params)[0]
    polys = asc_poly_all(N, lam, params.s / params.a, 1.0 / (params.s * params.a), params.q)
    ref = params.a ** -np.arange(N + 1) * polys
    return float(np.max(np.abs(pn - ref) / np.maximum(1.0, np.abs(ref))))


def random_support_function(grid: Grid, rng: np.random.Generator, npts: int = 5, reach: int = 12) -> GridFunction:
    pool = np.flatnonzero(~grid.edge & (np.abs(grid.n) <= reach))
    idx = rng.choice(pool, npts, replace=False)
    v = np.zeros(grid.size, dtype=complex)
    v[idx] = rng.normal(size=npts) + 1j * rng.normal(size=npts)
    return GridFunction(grid, v)


def symmetry_residual(f: GridFunction, g: GridFunction) -> float:
    """|<Lf, g> - <f, Lg>| relative to |<Lf, g>| + |<f, Lg>|."""
    lf = GridFunction(f.grid, apply_L_array(f.values, f.grid)[0])
    lg = GridFunction(g.grid, apply_L_array(g.values, g.grid)[0])
    a, b = inner_product(lf, g), inner_product(f, lg)
    return abs(a - b) / max(abs(a) + abs(b), 1e-300)


def eigen_suite(params: QParams, rng: np.random.Generator, tol: float = 1e-10) -> list[Check]:
    grid = Grid(params, 30, 30, 40)
    lams = random_lambdas(rng, 20)
    out = [Check("eigen equation, 20 random lambda", float(np.max(eigen_equation_residual(lams, grid))), tol)]
    lam = complex(np.exp(1j * rng.uniform(0.2, 2.9)))
    fam = eigen_family(lam, Grid(params, 20, 20, 30))
    a, q, s = params.a, params.q, params.s
    Kz = K_z(params)
    out.append(Check("Casorati D(Psi_1/l, Psi_l) = K_z (1/l - l)",
                     casorati_constancy(fam.Psi_minus, fam.Psi_plus, Kz * (1 / lam - lam)), tol))
    out.append(Check("Casorati D(phi_l, Psi_l) = K_z c_z(1/l)(1/l - l)",
                     casorati_constancy(fam.phi, fam.Psi_plus, Kz * complex(c_z(1 / lam, params)) * (1 / lam - lam)), tol))
    out.append(Check("Casorati D(psi_s, psi_1/s) = (1-q)(s - 1/s)/a",
                     casorati_constancy(fam.psi_s, fam.psi_sinv, (1 - q) * (s - 1 / s) / a), tol))
    out.append(Check("c-function consistency", fam.coeffs.c_check, 1e-12))
    out.append(Check("phi(-q^n) = a^{-n} P_n", polynomial_identification(lam, params), tol))
    g2 = Grid(params, 20, 20, 20)
    sym = max(symmetry_residual(random_support_function(g2, rng), random_support_function(g2, rng))
              for _ in range(10))
    out.append(Check("symmetry <Lf,g> = <f,Lg>", sym, 1e-12))
    return out


# ---------------------------------------------------------- measure

def residue_check(measure: SpectralMeasure, cutoff: float = MASS_CUTOFF) -> float:
    p = measure.params
    worst = 0.0
    for at in measure.spectrum.atoms:
        if at.mass <= cutoff:
            continue
        cf = residue_closed_form(at.lam, p)
        num = residue_oracle(at.lam, p)
        worst = max(worst, abs(num - cf) / abs(cf))
    return worst


def resolvent_residual(params: QParams, lam: complex, rng: np.random.Generator, depth: int = EIGEN_WINDOW) -> float:
    grid = Grid(params, 60, 60, 40)
    f = random_support_function(grid, rng, reach=8)
    R = resolvent_apply(f, lam)
    lr = apply_L_array(R.values, grid)[0]
    res = lr - mu(lam) * R.values - f.values
    win = eigen_window(grid, depth)
    return float(np.max(np.abs(res[win])) / np.max(np.abs(f.values)))


def measure_suite(measure: SpectralMeasure, rng: np.random.Generator, tol: float = 1e-8) -> list[Check]:
    p = measure.params
    tm = total_mass(p)
    out = [Check("total mass", abs(measure.total - tm) / tm, 1e-10)]
    G = orthogonality_matrix(ORTHO_N, measure)
    out.append(Check(f"orthogonality {ORTHO_N + 1}x{ORTHO_N + 1}", orthogonality_error(G, p), tol))
    m1 = integrate_nu(lambda l: l + 1 / l, measure)
    out.append(Check("first moment", abs(m1 - p.s_sum / p.a * tm) / (abs(p.s_sum / p.a) * tm + tm), 1e-10))
    pos = float(min(np.min(measure.density), np.min(measure.masses) if measure.masses.size else 1.0))
    out.append(Check("positivity (-min density/mass)", max(0.0, -pos), 0.0))
    out.append(Check("residues: closed form vs contour", residue_check(measure), tol))
    doubled = build_measure(p, n_quad=2 * measure.n_nodes, tol=measure.spectrum.truncation_tol,
                            degree=measure.spectrum.degree)
    out.append(Check("node doubling", abs(doubled.total - measure.total) / tm, 1e-12))
    lam = complex(0.6 * np.exp(1j * rng.uniform(0.3, 2.8)))
    out.append(Check("resolvent (L - mu) R f = f", resolvent_residual(p, lam, rng), tol))
    return out


# ---------------------------------------------------------- transform

def transform_battery(measure: SpectralMeasure, rng: np.random.Generator, trials: int = 50,
                      grid: Grid | None = None) -> dict:
    """Worst roundtrip, isometry and relative diagonalization residuals over random supports."""
    grid = grid or Grid(measure.params, 14, 14, 30)
    rt = iso = dg = 0.0
    for _ in range(trials):
        f = random_support_function(grid, rng)
        h = random_support_function(grid, rng)
        Ff, Fh = forward_F(f, measure), forward_F(h, measure)
        back = inverse_G(Ff, grid)
        rt = max(rt, float(np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values))))
        lhs, rhs = h_inner(Ff, Fh), inner_product(f, h)
        nrm = math.sqrt(inner_product(f, f).real * inner_product(h, h).real)
        iso = max(iso, abs(lhs - rhs) / nrm)
        dg = max(dg, diagonalization_check(f, measure, relative=True))
    return {"roundtrip": rt, "isometry": iso, "diagonalization": dg}


def transform_suite(measure: SpectralMeasure, rng: np.random.Generator, trials: int = 50) -> list[Check]:
    r = transform_battery(measure, rng, trials)
    return [Check(f"G F = id, {trials} random functions", r["roundtrip"], 1e-8),
            Check(f"isometry, {trials} random pairs", r["isometry"], 1e-8),
            Check("diagonalization (relative)", r["diagonalization"], 1e-9)]


# ---------------------------------------------------------- matrix

def matrix_suite(measure: SpectralMeasure, n_points: int = 300) -> list[Check]:
    p = measure.params
    retained = measure.spectrum.lambdas[measure.spectrum.masses > MASS_CUTOFF]
    r = matrix_crosscheck(p, retained, n_points=n_points)
    return [Check("matrix: retained atom images matched", r.max_atom_distance, 1e-3),
            Check("matrix: eigenvalues outside [-2,2] and atom neighbourhoods", float(r.unmatched.size), 0.0,
                  detail=f"{r.edge_modes.size} truncation-edge modes beyond {r.resolved_bound:.3e}; "
                         f"fraction inside {r.fraction_inside:.3f}, largest gap {r.max_gap_inside:.3e}")]


# ---------------------------------------------------------- report

@dataclass
class VerificationReport:
    suites: dict[str, list[Check]]
    params: dict
    timing: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for cs in self.suites.values() for c in cs)

    def entries(self) -> list[Check]:
        return [c for cs in self.suites.values() for c in cs]

    def to_dict(self) -> dict:
        suite = []
        for name, cs in self.suites.items():
            for c in cs:
                d = c.to_dict()
                d["suite"] = name
                suite.append(d)
        for name, msg in self.errors.items():
            suite.append({"suite": name, "name": f"{name} suite", "residual": float("inf"), "tol": 0.0,
                          "pass": False, "detail": msg})
        return {"suite": suite, "params": self.params, "timing": self.timing, "pass": self.passed}


def run_suites(params: QParams, seed: int = 0, n_quad: int = 200, tol: float = 1e-8,
               workers: int = 5) -> VerificationReport:
    """Run every suite concurrently; the measure-based suites need z = 1."""
    t0 = time.perf_counter()
    timing: dict = {}

    def timed(name, fn, *args):
        t = time.perf_counter()
        try:
            return fn(*args)
        finally:
            timing[name] = time.perf_counter() - t

    # each suite draws from its own stream so results do not depend on scheduling
    seeds = np.random.SeedSequence(seed).spawn(5)
    rngs = [np.random.default_rng(s) for s in seeds]
    jobs = {"identities": (identities_suite, params.q, rngs[0]),
            "eigen": (eigen_suite, params, rngs[1])}
    measure = None
    if params.z == 1.0:
        measure = timed("build_measure", build_measure, params, n_quad)
        jobs["measure"] = (measure_suite, measure, rngs[2], tol)
        jobs["transform"] = (transform_suite, measure, rngs[3])
        jobs["matrix"] = (matrix_suite, measure)
    suites: dict = {}
    errors: dict = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = {name: pool.submit(timed, name, *job) for name, job in jobs.items()}
        for name, fut in futs.items():
            try:
                suites[name] = fut.result()
            except (AscMomentError, ArithmeticError, ValueError) as exc:
                errors[name] = f"{type(exc).__name__}: {exc}"
    timing["total"] = time.perf_counter() - t0
    pd = params.as_dict()
    pd.update({"seed": seed, "n_quad": n_quad})
    if measure is None:
        pd["note"] = "z != 1: measure, transform and matrix suites are not defined"
    return VerificationReport(suites, pd, timing, errors)
