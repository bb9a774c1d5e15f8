"""Command line entry point: ``verify``, ``experiment`` and ``basis``.

Exit status 0 means every check passed, 1 a numerical failure and 2 a
configuration problem detected before any computation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import ConfigError, load_structure
from .poly import DEGREE_CUTOFFS, basis_csv, orthonormal_basis
from .schatten import ExperimentConfig, run_experiment, sign_change_bracket
from .verify import expand, run_suites

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _read_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_verify(args) -> int:
    data = _read_json(args.config)
    s = load_structure(data)
    selection = args.suite or data.get("suites")
    try:
        names = expand(selection)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    out = Path(args.out) if args.out else None

    results = run_suites(s, names)
    ok = all(r.passed for r in results)
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{tag} {r.name:16s} max_residual={r.max_residual:.3e} tol={r.tolerance:.0e} "
              f"cases={r.cases} time={r.seconds:.2f}s")
        if not r.passed:
            print(f"     first failure: {r.first_failure}")
    summary = {"n": s.n, "kappa": list(s.kappa), "passed": ok,
               "suites": [{k: v for k, v in r.as_dict().items() if k != "seconds"} for r in results]}
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(_dump(summary))
    else:
        sys.stdout.write(_dump(summary))
    return EXIT_OK if ok else EXIT_FAIL


def _fmt(v, spec=".4f"):
    return "-" if v is None else format(v, spec)


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_mapping(_read_json(args.config))
    report = run_experiment(cfg)
    report.write(args.out)

    print(f"n={cfg.n} kappa={list(cfg.kappa)} p={cfg.p:g} q={cfg.q:.6g} r_star={_fmt(report.r_star, '.6g')}")
    for msg in report.messages:
        print(f"note: {msg}")
    print(f"{'r':>8} {'predicted':>10} {'fitted':>10} {'stderr':>10}")
    for r, fit in report.fits.items():
        print(f"{r:>8.4g} {_fmt(fit['predicted_slope']):>10} {_fmt(fit['fitted_slope']):>10} "
              f"{_fmt(fit['stderr'], '.2e'):>10}")
    bracket = sign_change_bracket(report)
    if bracket:
        print(f"slope changes sign in r in [{bracket[0]:g}, {bracket[1]:g}]")
    failed = [row for row in report.rows if row.status != "ok"]
    for row in failed:
        print(f"grid point r={row.r:g} eps={row.epsilon:.6g}: {row.status}", file=sys.stderr)
    bad_fit = any(fit["fitted_slope"] is None for fit in report.fits.values())
    return EXIT_FAIL if failed or bad_fit else EXIT_OK


def cmd_basis(args) -> int:
    s = load_structure(_read_json(args.config))
    cutoff = DEGREE_CUTOFFS.get(s.n, 16)
    if args.max_degree < 0 or args.max_degree > cutoff:
        raise ConfigError(f"--max-degree must lie in [0, {cutoff}] for n={s.n}")
    text = basis_csv(orthonormal_basis(s, args.max_degree))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"wrote {text.count(chr(10)) - 1} coefficients to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dunklab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run identity suites")
    v.add_argument("--config", required=True)
    v.add_argument("--suite", action="append", help="suite or group name; repeatable")
    v.add_argument("--out", help="write the JSON summary here instead of stdout")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="Schatten-exponent ratio scan")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("basis", help="dump basis coefficients as CSV")
    b.add_argument("--config", required=True)
    b.add_argument("--max-degree", type=int, required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_basis)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
