"""Finite-matrix cross-check of the spectrum of L.

L restricted to a truncated lattice is symmetric for the weights
m_x = (1 - q) w(x) |x|.  The two branches of the lattice only communicate
through the behaviour at 0, so the truncation identifies the deepest pair
of points -q^K and q^K (one shared unknown).  With the points ordered
-1, -q, ..., -q^{K-1}, [+-q^K], q^{K-1}, ..., q^{-l} the matrix
M^{-1/2} A M^{-1/2} is symmetric tridiagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigenfun import l_coefficients
from .errors import DomainError
from .lattice import NEG, POS, QParams, point_position, weight_at


@dataclass(frozen=True)
class TridiagonalOperator:
    diag: np.ndarray
    off: np.ndarray
    labels: tuple  # (branch, n) per row; the merged row has branch 0

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def truncated_operator(params: QParams, merge_depth: int, pos_high: int) -> TridiagonalOperator:
    """Symmetric tridiagonal form of L on the truncated, merged lattice."""
    K, l = int(merge_depth), int(pos_high)
    if K < 1 or l < 0:
        raise DomainError("need merge_depth >= 1 and pos_high >= 0")
    neg = [(NEG, n) for n in range(K)]
    pos = [(POS, n) for n in range(K - 1, -l - 1, -1)]
    labels = neg + [(0, K)] + pos

    def mass(branch, n):
        x = point_position(branch, n, params)
        return (1.0 - params.q) * weight_at(branch, n, params) * np.abs(x)

    def coeffs(branch, n):
        x = float(point_position(branch, n, params))
        return l_coefficients(x, params)

    size = len(labels)
    diag = np.empty(size)
    masses = np.empty(size)
    for i, (t, n) in enumerate(labels):
        if t == 0:
            mn, mp = mass(NEG, n)[0], mass(POS, n)[0]
            masses[i] = mn + mp
            diag[i] = mn * coeffs(NEG, n)[1] + mp * coeffs(POS, n)[1]
        else:
            masses[i] = mass(t, n)[0]
            diag[i] = masses[i] * coeffs(t, n)[1]
    off = np.empty(size - 1)
    for i in range(size - 1):
        t0, n0 = labels[i]
        t1, n1 = labels[i + 1]
        # the coupling between x and qx is m_x * (coefficient of f(qx) at x)
        ob, on = (NEG, n0) if t0 == NEG else (POS, n1)
        off[i] = mass(ob, on)[0] * coeffs(ob, on)[2]
    scale = 1.0 / np.sqrt(masses)
    return TridiagonalOperator(diag * scale**2, off * scale[:-1] * scale[1:], tuple(labels))


def sturm_count(diag: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each shift in ``x`` (LDL^T pivot signs)."""
    x = np.asarray(x, dtype=float)
    count = np.zeros(x.shape, dtype=np.int64)
    tiny = np.finfo(float).tiny
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        piv = diag[0] - x
        piv = np.where(piv == 0.0, -tiny, piv)
        count += piv < 0
        for i in range(1, diag.size):
            piv = diag[i] - x - off[i - 1] ** 2 / piv
            piv = np.where(piv == 0.0, -tiny, piv)
            count += piv < 0
    return count


def tridiagonal_bisection(diag: np.ndarray, off: np.ndarray, rtol: float = 1e-15) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence bisection."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.size
    rad = np.zeros(n)
    rad[:-1] += np.abs(off)
    rad[1:] += np.abs(off)
    lo0, hi0 = float(np.min(diag - rad)), float(np.max(diag + rad))
    lo = np.full(n, lo0)
    hi = np.full(n, hi0)
    k = np.arange(n)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, off, mid)
        go_left = below > k
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
        if np.all(hi - lo <= rtol * np.maximum(np.abs(lo), np.abs(hi)) + 4 * np.finfo(float).tiny):
            break
    return 0.5 * (lo + hi)


@dataclass
class CrosscheckResult:
    eigenvalues: np.ndarray
    n_points: int
    atom_lambdas: np.ndarray
    atom_distance: np.ndarray
    unmatched: np.ndarray
    edge_modes: np.ndarray
    resolved_bound: float
    fraction_inside: float
    max_gap_inside: float
    extra: dict = field(default_factory=dict)

    @property
    def max_atom_distance(self) -> float:
        return float(np.max(self.atom_distance)) if self.atom_distance.size else 0.0


def _match_outside(ev: np.ndarray, mus: np.ndarray, delta: float) -> np.ndarray:
    """Eigenvalues outside [-2-delta, 2+delta] not matched one-to-one to an atom image.

    An eigenvalue is matched to the nearest unused atom image when it lies
    within half the distance from that image to its neighbours.
    """
    out = ev[np.abs(ev) > 2.0 + delta]
    mus = np.sort(mus)
    used = np.zeros(mus.size, dtype=bool)
    unmatched = []
    for e in out:
        j = int(np.argmin(np.abs(mus - e)))
        nb = [abs(mus[j] - mus[k]) for k in (j - 1, j + 1) if 0 <= k < mus.size]
        nb += [abs(abs(mus[j]) - 2.0)]
        half = 0.5 * min(nb)
        if used[j] or abs(mus[j] - e) > half:
            unmatched.append(e)
        else:
            used[j] = True
    return np.array(unmatched)


def atom_images(params: QParams, depth: int) -> np.ndarray:
    """mu-values of the atoms +-a q^{m+1/2} (and s/a) with |lambda| in (0, 1) down to m = depth."""
    q, a, s = params.q, params.a, params.s
    lams = []
    for m in range(-200, depth + 1):
        v = abs(a) * q ** (m + 0.5)
        if v < 1.0:
            lams += [v, -v]
    if params.s_is_real and abs(s.real / a) < 1.0:
        lams.append(s.real / a)
    lams = np.array(lams)
    return lams + 1.0 / lams


def matrix_crosscheck(params: QParams, retained_atoms: np.ndarray, n_points: int = 300,
                      merge_depth: int = 60, delta: float = 1e-2, solver: str = "bisection",
                      edge_margin: int = 3) -> CrosscheckResult:
    """Compare the eigenvalues of the truncated operator with [-2, 2] and the atom images.

    ``retained_atoms`` are the atom lambdas that must be reproduced.  An
    eigenvalue of size about q^{-m} lives near depth m, so eigenvalues beyond
    |mu(a q^{K - edge_margin + 1/2})| are modes of the truncation edge.  They
    are returned in ``edge_modes`` and excluded from the neighbourhood test.
    """
    l = n_points - 2 * merge_depth - 1
    if l < 0:
        raise DomainError("n_points too small for the requested merge depth")
    op = truncated_operator(params, merge_depth, l)
    if solver == "bisection":
        ev = tridiagonal_bisection(op.diag, op.off)
    elif solver == "lapack":
        ev = np.linalg.eigvalsh(op.dense())
    else:
        raise DomainError(f"unknown solver {solver!r}")
    retained_atoms = np.asarray(retained_atoms, dtype=float)
    amu = retained_atoms + 1.0 / retained_atoms
    dist = np.array([np.min(np.abs(ev - m)) for m in amu])
    lam_edge = abs(params.a) * params.q ** (merge_depth - edge_margin + 0.5)
    bound = lam_edge + 1.0 / lam_edge
    resolved = np.abs(ev) <= bound
    mus_all = atom_images(params, merge_depth)
    unmatched = _match_outside(ev[resolved], mus_all, delta)
    inside = ev[np.abs(ev) <= 2.0 + delta]
    gaps = np.diff(np.sort(inside)) if inside.size > 1 else np.array([4.0])
    return CrosscheckResult(ev, op.size, retained_atoms, dist, unmatched, ev[~resolved], float(bound),
                            float(inside.size) / ev.size, float(np.max(gaps)))
