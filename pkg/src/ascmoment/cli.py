"""Command-line harness: verification suites, measure export and spectrum listings.

Subcommands::

    ascmoment verify            run every suite, exit 0 iff all checks pass
    ascmoment measure           export the spectral measure (JSON or CSV)
    ascmoment spectrum          list the retained atoms
    ascmoment ortho --n N       orthogonality matrix of P_0..P_N
    ascmoment transform --input f.json
                                F f for a grid function given as JSON records
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from .errors import AscMomentError, ConfigError, DomainError
from .lattice import Grid, GridFunction, QParams
from .spectral import MAX_ORTHO_DEGREE, build_measure, norm_targets, orthogonality_error, orthogonality_matrix
from .transform import forward_F
from .verify import VerificationReport, run_suites

PRESETS = ("generic", "symmetric", "laguerre")
DEFAULT_Q = 0.5
DEFAULT_A = 0.6
DEFAULT_S = complex(np.exp(1j * np.pi / 3))


def laguerre_parameters(q: float, alpha: float) -> tuple[float, float]:
    """(a, s) = (q^{-alpha/2 - 1/4}, q^{1/4}) for the continuous q^{-1}-Laguerre case."""
    return q ** (-alpha / 2.0 - 0.25), q**0.25


@dataclass(frozen=True)
class RunConfig:
    params: QParams
    preset: str = "generic"
    alpha: float | None = None
    tol: float = 1e-8
    n_quad: int = 200
    neg_depth: int = 60
    pos_low: int = 60
    pos_high: int = 40
    out: str | None = None
    fmt: str = "json"
    seed: int = 0

    @property
    def grid(self) -> Grid:
        return Grid(self.params, self.neg_depth, self.pos_low, self.pos_high)


def make_config(q: float = DEFAULT_Q, a: float = DEFAULT_A, s: complex = DEFAULT_S, z: float = 1.0,
                preset: str = "generic", alpha: float | None = None, **kw) -> RunConfig:
    """Build a RunConfig; presets override a and s.

    Raises
    ------
    ConfigError
        for an unknown preset, a missing alpha, or parameters outside the admissible set.
    """
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    if preset == "symmetric":
        s = 1j
    elif preset == "laguerre":
        if alpha is None:
            raise ConfigError("the laguerre preset needs alpha")
        a, s = laguerre_parameters(q, alpha)
        if not 0.0 < a * a < 1.0:
            raise ConfigError(f"laguerre alpha = {alpha} gives a^2 = {a * a:.6g}, outside (0, 1)")
    try:
        params = QParams(q, a, s, z)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if kw.get("fmt", "json") not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    return RunConfig(params, preset, alpha, **kw)


def run_verify(config: RunConfig) -> VerificationReport:
    report = run_suites(config.params, seed=config.seed, n_quad=config.n_quad, tol=config.tol)
    report.params.update({"preset": config.preset, "alpha": config.alpha, "tol": config.tol})
    return report


def _require_measure(config: RunConfig):
    if config.params.z != 1.0:
        raise ConfigError("spectral measures are built only for z = 1")
    return build_measure(config.params, config.n_quad)


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    return buf.getvalue()


def export_measure(config: RunConfig) -> str:
    """Spectral measure as JSON or CSV text; written to ``config.out`` when set."""
    m = _require_measure(config)
    text = m.to_json(indent=1) if config.fmt == "json" else m.to_csv()
    _write(text, config.out)
    return text


def report_text(report: VerificationReport, fmt: str) -> str:
    d = report.to_dict()
    if fmt == "json":
        return json.dumps(d, indent=1)
    rows = [["suite", "name", "residual", "tol", "pass"]]
    rows += [[e["suite"], e["name"], repr(e["residual"]), repr(e["tol"]), e["pass"]] for e in d["suite"]]
    return _csv(rows)


def spectrum_text(config: RunConfig) -> str:
    m = _require_measure(config)
    atoms = m.spectrum.atoms
    if config.fmt == "json":
        return json.dumps({"params": config.params.as_dict(), "K": m.K,
                           "atoms": [{"lambda": t.lam, "mu": t.mu, "mass": t.mass, "kind": t.kind, "m": t.m}
                                     for t in atoms]}, indent=1)
    rows = [["lambda", "mu", "mass", "kind", "m"]]
    rows += [[repr(t.lam), repr(t.mu), repr(t.mass), t.kind, "" if t.m is None else t.m] for t in atoms]
    return _csv(rows)


def ortho_result(config: RunConfig, N: int) -> tuple[str, bool]:
    if not 0 <= N <= MAX_ORTHO_DEGREE:
        raise ConfigError(f"--n must lie in 0..{MAX_ORTHO_DEGREE}")
    m = _require_measure(config)
    G = orthogonality_matrix(N, m)
    err = orthogonality_error(G, config.params)
    ok = err <= config.tol
    if config.fmt == "json":
        text = json.dumps({"n": N, "max_rel_error": err, "tol": config.tol, "pass": ok,
                           "targets": norm_targets(N, config.params).tolist(),
                           "matrix_re": G.real.tolist(), "matrix_im": G.imag.tolist()}, indent=1)
    else:
        rows = [["n", "n_prime", "re", "im"]]
        rows += [[i, j, repr(G[i, j].real), repr(G[i, j].imag)] for i in range(N + 1) for j in range(N + 1)]
        text = _csv(rows)
    return text, ok


def transform_text(config: RunConfig, input_path: str) -> str:
    m = _require_measure(config)
    with open(input_path, encoding="utf-8") as fh:
        f = GridFunction.from_json(fh.read(), config.grid)
    Ff = forward_F(f, m)
    if config.fmt == "json":
        return Ff.to_json(indent=1)
    rows = [["kind", "theta", "lambda", "re", "im"]]
    rows += [["node", repr(float(t)), "", repr(v.real), repr(v.imag)] for t, v in zip(m.theta, Ff.circle)]
    rows += [["atom", "", repr(float(l)), repr(v.real), repr(v.imag)] for l, v in zip(m.atoms, Ff.atoms)]
    return _csv(rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=float, default=DEFAULT_Q)
    common.add_argument("--a", type=float, default=DEFAULT_A)
    common.add_argument("--s-re", type=float, default=DEFAULT_S.real)
    common.add_argument("--s-im", type=float, default=DEFAULT_S.imag)
    common.add_argument("--z", type=float, default=1.0)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--n-quad", type=int, default=200)
    common.add_argument("--preset", choices=PRESETS, default="generic")
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--neg-depth", type=int, default=60)
    common.add_argument("--pos-low", type=int, default=60)
    common.add_argument("--pos-high", type=int, default=40)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="ascmoment", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run all verification suites")
    sub.add_parser("measure", parents=[common], help="export the spectral measure")
    sub.add_parser("spectrum", parents=[common], help="list the retained atoms")
    o = sub.add_parser("ortho", parents=[common], help="orthogonality matrix")
    o.add_argument("--n", type=int, default=10)
    t = sub.add_parser("transform", parents=[common], help="transform a grid function")
    t.add_argument("--input", required=True)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return make_config(ns.q, ns.a, complex(ns.s_re, ns.s_im), ns.z, ns.preset, ns.alpha, tol=ns.tol,
                       n_quad=ns.n_quad, neg_depth=ns.neg_depth, pos_low=ns.pos_low, pos_high=ns.pos_high,
                       out=ns.out, fmt=ns.fmt, seed=ns.seed)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        config = config_from_args(ns)
        if ns.command == "verify":
            report = run_verify(config)
            _write(report_text(report, config.fmt), config.out)
            return 0 if report.passed else 1
        if ns.command == "measure":
            export_measure(config)
            return 0
        if ns.command == "spectrum":
            _write(spectrum_text(config), config.out)
            return 0
        if ns.command == "ortho":
            text, ok = ortho_result(config, ns.n)
            _write(text, config.out)
            return 0 if ok else 1
        if ns.command == "transform":
            _write(transform_text(config, ns.input), config.out)
            return 0
    except (AscMomentError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
