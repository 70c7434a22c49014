"""Command-line entry point: ``lazyrm {ista,spectral,verify,bench,replay}``.

Every subcommand prints its CSV to stdout, or with ``--out DIR`` writes the
CSV plus a ``manifest.json`` that ``lazyrm replay`` can re-run bit-exactly.
Defaults can also come from an INI file (``--config FILE``) whose section is
named after the subcommand and whose keys are the long flag names, e.g.::

    [ista]
    n = 512
    trials = 200
    backend = both

Exit codes: 0 success, 2 usage error, 3 verification failure, 4 resource cap.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, faults
from ._errors import BudgetExhausted, OracleCapExceeded
from .eigen import NotConverged
from .experiments import IstaConfig, SpectralConfig, ista_run, spectral_run

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_CAP = 0, 2, 3, 4

ISTA_COLUMNS = ("t", "mse_mean", "mse_stderr", "backend")
SPECTRAL_COLUMNS = ("alpha", "rho_mean", "rho_stderr", "lambda_max_mean", "backend")
BENCH_COLUMNS = ("backend", "n", "T", "median_ms")
VERIFY_COLUMNS = ("suite", "check", "passed", "value", "threshold")


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    """Shortest round-tripping text for a float; NaN becomes an empty field."""
    return "" if x is None or not np.isfinite(x) else repr(float(x))


def _csv_text(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _backends(choice: str) -> list[str]:
    return ["hd", "direct"] if choice == "both" else [choice]


# ---------------------------------------------------------------- commands


def cmd_ista(a: argparse.Namespace) -> tuple[int, dict[str, str], str]:
    m = None if a.ensemble == "haar" else max(1, int(round(a.m_ratio * a.n)))
    cfg = IstaConfig(n=a.n, m=m, T=a.T, lam=a.lam, tau=a.tau, rho=a.rho, sigma_s=a.sigma_s,
                     sigma_w=a.sigma_w, trials=a.trials, seed=a.seed, ensemble=a.ensemble)
    rows = []
    for backend in _backends(a.backend):
        res = ista_run(cfg, backend, a.threads)
        for t, (mu, se) in enumerate(zip(res.mse_mean, res.mse_stderr)):
            rows.append((t, _num(mu), _num(se), backend))
    return EXIT_OK, {"ista.csv": _csv_text(ISTA_COLUMNS, rows)}, ""


def cmd_spectral(a: argparse.Namespace) -> tuple[int, dict[str, str], str]:
    rows = []
    for backend in _backends(a.backend):
        for alpha in a.alpha:
            cfg = SpectralConfig(n=a.n, alpha=alpha, eigensolver=a.eigensolver, max_matvecs=a.max_matvecs,
                                 tol=a.tol, trials=a.trials, seed=a.seed)
            res = spectral_run(cfg, backend, a.threads)
            rows.append((_num(alpha), _num(res.rho_mean), _num(res.rho_stderr),
                         _num(float(res.lam_max.mean())), backend))
    return EXIT_OK, {"spectral.csv": _csv_text(SPECTRAL_COLUMNS, rows)}, ""


def cmd_verify(a: argparse.Namespace) -> tuple[int, dict[str, str], str]:
    from .verify import run_consistency, run_equivalence

    rows, lines = [], []
    with faults.inject(*a.mutate):
        if a.suite in ("all", "consistency"):
            for rep in run_consistency(a.seeds, a.probes):
                lines.extend(rep.lines())
                rows.extend(("consistency", f"{rep.label} {c.name}", int(c.passed), _num(c.worst), _num(c.tol))
                            for c in rep.checks)
        if a.suite in ("all", "equivalence"):
            for r in run_equivalence(a.trials, a.significance, a.seed, a.threads):
                lines.append(r.line())
                rows.append(("equivalence", r.statistic, int(r.passed), _num(r.pvalue), _num(r.significance)))
    failed = [f"{s}: {c}" for s, c, ok, *_ in rows if not ok]
    summary = "\n".join(lines)
    if a.mutate:
        summary += f"\nmutations active: {', '.join(a.mutate)}"
    if failed:
        summary += f"\nFAILED {len(failed)} check(s):\n  " + "\n  ".join(failed)
    else:
        summary += f"\nall {len(rows)} checks passed"
    return (EXIT_VERIFY if failed else EXIT_OK), {"verify.csv": _csv_text(VERIFY_COLUMNS, rows)}, summary


def _pow2_grid(lo: int, hi: int) -> list[int]:
    if lo < 2 or hi < lo:
        raise UsageError(f"need 2 <= nmin <= nmax, got {lo}, {hi}")
    out, n = [], 1 << int(np.ceil(np.log2(lo)))
    while n <= hi:
        out.append(n)
        n *= 2
    return out


def cmd_bench(a: argparse.Namespace) -> tuple[int, dict[str, str], str]:
    from .verify import scaling_bench

    if a.backend == "both":
        raise UsageError("bench times one backend at a time")
    start = time.perf_counter()
    if a.fix_n is not None or a.sweep_T is not None:
        n = a.fix_n or 16384
        Ts = a.sweep_T or [10, 20, 40, 80]
        res = scaling_bench(a.backend, [n], Ts, a.repeats, a.seed)
    else:
        nmin = a.nmin or (4096 if a.backend == "hd" else 512)
        nmax = a.nmax or (131072 if a.backend == "hd" else 4096)
        res = scaling_bench(a.backend, _pow2_grid(nmin, nmax), a.T, a.repeats, a.seed)
    elapsed = time.perf_counter() - start
    rows = [(r.backend, r.n, r.T, f"{r.median_ms:.3f}") for r in res.rows]
    summary = f"{res.summary()}\nelapsed {elapsed:.1f} s (budget {a.time_budget:.0f} s)"
    code = EXIT_OK
    if elapsed > a.time_budget:
        summary += "\ntime budget exceeded"
        code = EXIT_CAP
    return code, {"bench.csv": _csv_text(BENCH_COLUMNS, rows), "summary.txt": summary + "\n"}, summary


COMMANDS = {"ista": cmd_ista, "spectral": cmd_spectral, "verify": cmd_verify, "bench": cmd_bench}


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, backend: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--threads", type=int, default=1, help="worker processes for independent trials")
    if backend:
        p.add_argument("--backend", choices=("hd", "direct", "both"), default="hd")
    p.add_argument("--out", metavar="DIR", default=None, help="write CSV and manifest.json here")
    p.add_argument("--config", metavar="FILE", default=None, help="INI file with defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazyrm", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"lazyrm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ista", help="trial-averaged ISTA MSE curves")
    _common(p)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--m-ratio", type=float, default=0.5, help="rows / columns of the Ginibre design")
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--ensemble", choices=("ginibre", "haar"), default="ginibre")
    p.add_argument("--lam", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=0.3)
    p.add_argument("--rho", type=float, default=0.2, help="probability that a signal entry is zero")
    p.add_argument("--sigma-s", type=float, default=2.0)
    p.add_argument("--sigma-w", type=float, default=0.1)

    p = sub.add_parser("spectral", help="spectral estimator on a subsampled Haar design")
    _common(p)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--alpha", type=float, nargs="+", default=[2.0])
    p.add_argument("--eigensolver", choices=("krylov", "power"), default="krylov")
    p.add_argument("--max-matvecs", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("verify", help="algebraic and distributional checks")
    _common(p, backend=False)
    p.add_argument("--suite", choices=("all", "consistency", "equivalence"), default="all")
    p.add_argument("--mutate", choices=faults.FAULTS, action="append", default=[],
                   help="inject a known defect (repeatable)")
    p.add_argument("--seeds", type=int, default=100, help="seeds per operator in the consistency suite")
    p.add_argument("--probes", type=int, default=20)
    p.add_argument("--significance", type=float, default=1e-3)

    p = sub.add_parser("bench", help="wall-time scaling and log-log slopes")
    _common(p)
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--nmin", type=int, default=None)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--fix-n", type=int, nargs="?", const=16384, default=None,
                   help="sweep T at this n (default 16384)")
    p.add_argument("--sweep-T", type=int, nargs="*", default=None, help="T values (default 10 20 40 80)")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--time-budget", type=float, default=600.0, help="seconds")

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", metavar="DIR", default=None)
    return parser


_TRIALS_DEFAULT = {"ista": 1, "spectral": 1, "verify": 10_000, "bench": 1}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], path: str) -> argparse.Namespace:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path}")
    args = parser.parse_args(argv)
    if not cp.has_section(args.command):
        return args
    sp = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    known = {act.dest: act for act in sp._actions}  # noqa: SLF001
    defaults = {}
    for key, raw in cp.items(args.command):
        dest = key.replace("-", "_")
        act = known.get(dest)
        if act is None or dest in ("config", "help"):
            raise UsageError(f"unknown key {key!r} in [{args.command}] of {path}")
        vals = raw.split() if act.nargs in ("+", "*") else [raw]
        conv = act.type or str
        parsed = [conv(v) for v in vals]
        if act.choices is not None and any(v not in act.choices for v in parsed):
            raise UsageError(f"{key} = {raw!r} not in {list(act.choices)}")
        defaults[dest] = parsed if act.nargs in ("+", "*") or isinstance(act, argparse._AppendAction) else parsed[0]
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _resolved(args: argparse.Namespace) -> dict:
    skip = {"out", "config", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write(out: str | None, command: str, config: dict, files: dict[str, str],
           started: datetime, elapsed: float, code: int) -> None:
    if out is None:
        for name, text in files.items():
            if name.endswith(".csv"):
                sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (d / name).write_text(text)
    manifest = {
        "subcommand": command,
        "config": config,
        "seed": config.get("seed"),
        "artifacts": sorted(files),
        "exit_code": code,
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started": started.isoformat(timespec="seconds"),
        "wall_seconds": round(elapsed, 3),
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _namespace_from_manifest(path: str, out: str | None) -> argparse.Namespace:
    try:
        data = json.loads(Path(path).read_text())
        command, config = data["subcommand"], dict(data["config"])
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest {path}: {exc}") from exc
    if command not in COMMANDS:
        raise UsageError(f"manifest names unknown subcommand {command!r}")
    return argparse.Namespace(command=command, out=out, config=None, **config)


def run_command(args: argparse.Namespace) -> int:
    if getattr(args, "trials", 1) is None:
        args.trials = _TRIALS_DEFAULT[args.command]
    if args.trials < 1 or args.threads < 1:
        raise UsageError("--trials and --threads must be positive")
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    code, files, summary = COMMANDS[args.command](args)
    if summary:
        print(summary, file=sys.stderr if args.out is None else sys.stdout)
    _write(args.out, args.command, _resolved(args), files, started, time.perf_counter() - t0, code)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            args = _namespace_from_manifest(args.manifest, args.out)
        elif args.config:
            args = _apply_config(parser, argv, args.config)
        return run_command(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lazyrm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, BudgetExhausted) as exc:
        print(f"lazyrm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleCapExceeded as exc:
        print(f"lazyrm: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NotConverged as exc:
        print(f"lazyrm: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
