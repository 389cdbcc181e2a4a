"""Command-line front end.

Exit codes: 0 success, 1 every benchmark run failed (or nothing to do),
2 configuration error, 3 initialization error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import metrics as M
from .archive import ForcingFunction, ForcingMode
from .catalog import available_problems, builtin_problem, default_dimension
from .config import load_problem_config
from .directions import DirectionKind
from .problem import ConfigError, Problem, apply_constraint_family
from .solver import InitializationError, RunConfig, RunResult, run_dms_filter_ir, run_extreme_barrier

log = logging.getLogger("dmsfir")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_INIT = 0, 1, 2, 3
SOLVERS = {"filter-ir": run_dms_filter_ir, "eb": run_extreme_barrier}
ALL_METRICS = "purity,hv,gamma,delta"


def default_out() -> str:
    return os.environ.get("DMSFIR_OUT", "dmsfir-out")


def build_problem(ref: str, family: int = 0, n: int | None = None) -> Problem:
    """A catalog name or the path of a problem config file."""
    path = Path(ref)
    if path.suffix or path.exists():
        if not path.is_file():
            raise ConfigError(f"problem config {ref!r} not found")
        base = load_problem_config(path)
        if n is not None and n != base.n:
            raise ConfigError(f"{ref}: config fixes n = {base.n}; --n {n} conflicts")
    else:
        base = builtin_problem(ref, n)
    return apply_constraint_family(base, family) if family else base


def problem_id(ref: str, family: int, n: int | None) -> str:
    stem = Path(ref).stem if Path(ref).suffix else ref
    return stem + (f"-n{n}" if n else "") + (f"-g{family}" if family else "")


def make_config(budget: int, min_step: float, directions: str, forcing: str | None,
                seed: int) -> RunConfig:
    kind = DirectionKind(directions)
    force = None if forcing is None else ForcingFunction(ForcingMode(forcing))
    cfg = RunConfig(max_evals=budget, min_alpha=min_step, directions=kind, forcing=force, seed=seed)
    cfg.validate()
    return cfg


def write_front(result: RunResult, problem: Problem, path: Path) -> None:
    n, m = problem.n, problem.m
    entries = sorted(result.archive, key=lambda e: (tuple(e.eval.f), e.h, e.serial))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"x_{i + 1}" for i in range(n)] + [f"f_{j + 1}" for j in range(m)]
                   + ["h", "alpha"])
        for e in entries:
            w.writerow([repr(float(v)) for v in e.x] + [repr(float(v)) for v in e.eval.f]
                       + [repr(float(e.h)), repr(float(e.alpha))])


def write_run(result: RunResult, problem: Problem, out: Path, cfg: RunConfig,
              wall: float, feas_tol: float) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    write_front(result, problem, out / "front.csv")
    (out / "log.csv").write_text("\n".join(result.log_lines()) + "\n", encoding="utf-8")
    summary = {
        "problem": problem.name,
        "solver": result.solver,
        "n": problem.n, "m": problem.m, "p": problem.p,
        "evals": result.evals,
        "h_evals": result.h_evals,
        "restoration_h_evals": result.restoration_h_evals,
        "iterations": len(result.log),
        "stop_reason": result.stop_reason.value,
        "archive_size": len(result.archive),
        "n_feasible": len(result.feasible_front),
        "h_max": result.h_max,
        "wall_time": wall,
        "budget": cfg.max_evals,
        "min_step": cfg.min_alpha,
        "directions": cfg.directions.value,
        "forcing": cfg.resolved_forcing().mode.value,
        "seed": cfg.seed,
        "feas_tol": feas_tol,
    }
    (out / "run.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


def cmd_solve(args: argparse.Namespace) -> int:
    problem = build_problem(args.problem, args.family, args.n)
    cfg = make_config(args.budget, args.min_step, args.directions, args.forcing, args.seed)
    t0 = time.perf_counter()
    result = SOLVERS[args.solver](problem, cfg)
    wall = time.perf_counter() - t0
    out = Path(args.out or default_out())
    summary = write_run(result, problem, out, cfg, wall, cfg.feas_tol)
    print(f"{problem.name}: {summary['stop_reason']} after {summary['evals']} evaluations, "
          f"{summary['n_feasible']} feasible of {summary['archive_size']} listed -> {out}")
    return EXIT_OK


def read_suite(path: str) -> list[tuple[str, int, int | None]]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            rec = [c.strip() for c in rec]
            if not rec or not rec[0] or rec[0].startswith("#") or rec[0].lower() == "problem":
                continue
            try:
                family = int(rec[1]) if len(rec) > 1 and rec[1] else 0
                n = int(rec[2]) if len(rec) > 2 and rec[2] else None
            except ValueError:
                raise ConfigError(f"{path}: bad suite row {rec!r}") from None
            rows.append((rec[0], family, n))
    return rows


def _bench_one(task: tuple) -> dict:
    ref, family, n, solver, budget, min_step, directions, forcing, seed, out = task
    pid = problem_id(ref, family, n)
    row = {"solver": solver, "problem": pid, "status": "ok", "evals": "", "stop_reason": "",
           "message": ""}
    try:
        problem = build_problem(ref, family, n)
        cfg = make_config(budget, min_step, directions, forcing, seed)
        t0 = time.perf_counter()
        result = SOLVERS[solver](problem, cfg)
        summary = write_run(result, problem, Path(out) / solver / pid, cfg,
                            time.perf_counter() - t0, cfg.feas_tol)
        row.update(evals=summary["evals"], stop_reason=summary["stop_reason"])
    except (ConfigError, InitializationError) as exc:
        row.update(status="failed", message=str(exc))
    return row


def cmd_benchmark(args: argparse.Namespace) -> int:
    suite = read_suite(args.suite)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in SOLVERS:
            raise ConfigError(f"unknown solver {s!r}; expected one of {sorted(SOLVERS)}")
    out = Path(args.out or default_out())
    out.mkdir(parents=True, exist_ok=True)
    manifest: list[dict] = []
    tasks = []
    for ref, family, n in suite:
        try:
            build_problem(ref, family, n)
        except ConfigError as exc:
            log.warning("suite row %s skipped: %s", ref, exc)
            for s in solvers:
                manifest.append({"solver": s, "problem": problem_id(ref, family, n),
                                 "status": "skipped", "evals": "", "stop_reason": "",
                                 "message": str(exc)})
            continue
        for s in solvers:
            tasks.append((ref, family, n, s, args.budget, args.min_step, args.directions,
                          args.forcing, args.seed, str(out)))
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]
    manifest.extend(results)
    with open(out / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, ["solver", "problem", "status", "evals", "stop_reason", "message"])
        w.writeheader()
        w.writerows(manifest)
    for row in results:
        if row["status"] != "ok":
            log.warning("%s on %s failed: %s", row["solver"], row["problem"], row["message"])
    ok = sum(r["status"] == "ok" for r in results)
    print(f"{ok} of {len(results)} runs completed -> {out}")
    return EXIT_OK if ok else EXIT_FAILED


def collect_fronts(root: Path, feas_tol: float) -> dict[str, dict[str, M.Front | None]]:
    """``fronts[problem][solver]`` from a benchmark output tree."""
    fronts: dict[str, dict[str, M.Front | None]] = {}
    for solver_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for prob_dir in sorted(p for p in solver_dir.iterdir() if p.is_dir()):
            path = prob_dir / "front.csv"
            front = (M.load_front_csv(path, solver_dir.name, prob_dir.name, feas_tol)
                     if path.is_file() else None)
            fronts.setdefault(prob_dir.name, {})[solver_dir.name] = front
    manifest = root / "manifest.csv"
    if manifest.is_file():
        with open(manifest, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                if rec["status"] != "ok":
                    fronts.setdefault(rec["problem"], {}).setdefault(rec["solver"], None)
    return fronts


def _tables(args: argparse.Namespace) -> tuple[list[M.MetricTable], Path]:
    root = Path(args.input)
    if not root.is_dir():
        raise ConfigError(f"input directory {root} not found")
    kinds = [M.MetricKind.parse(k) for k in args.metrics.split(",") if k.strip()]
    if not kinds:
        raise ConfigError("no metrics requested")
    fronts = collect_fronts(root, args.feas_tol)
    solvers = sorted({s for row in fronts.values() for s in row})
    tables = []
    for kind in kinds:
        usable = fronts
        if kind is M.MetricKind.HYPERVOLUME:
            usable = {p: row for p, row in fronts.items()
                      if all(f is None or not len(f) or f.m == 2 for f in row.values())}
            for p in sorted(set(fronts) - set(usable)):
                log.warning("problem %s: hypervolume needs two objectives; skipped", p)
        tables.append(M.metric_table(usable, kind, solvers, args.purity_tol))
    out = Path(args.out) if args.out else root
    out.mkdir(parents=True, exist_ok=True)
    M.write_metric_table(tables, out / "metrics.csv")
    return tables, out


def cmd_metrics(args: argparse.Namespace) -> int:
    tables, out = _tables(args)
    print(f"metrics for {len(tables[0].problems)} problems -> {out / 'metrics.csv'}")
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    tables, out = _tables(args)
    for table in tables:
        M.write_profile(M.performance_profiles(table), out / f"profile_{table.kind.value}.csv")
    print(f"profiles for {', '.join(t.kind.value for t in tables)} -> {out}")
    return EXIT_OK


def cmd_list(args: argparse.Namespace) -> int:
    for name in available_problems():
        print(f"{name}\tn={default_dimension(name)}")
    return EXIT_OK


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, default=5000, help="objective evaluations (default 5000)")
    p.add_argument("--min-step", type=float, default=1e-3,
                   help="stop once every listed step size is below this (default 1e-3)")
    p.add_argument("--directions", choices=[k.value for k in DirectionKind], default="coordinate",
                   help="poll directions (default coordinate)")
    p.add_argument("--forcing", choices=[k.value for k in ForcingMode], default=None,
                   help="acceptance margin (default zero for coordinate, power for halton)")
    p.add_argument("--seed", type=int, default=0, help="halton phase (default 0)")
    p.add_argument("--out", default=None, help="output directory (default $DMSFIR_OUT or dmsfir-out)")


def _metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", required=True, help="benchmark output directory")
    p.add_argument("--metrics", default=ALL_METRICS, help=f"comma list (default {ALL_METRICS})")
    p.add_argument("--out", default=None, help="where to write tables (default: the input directory)")
    p.add_argument("--feas-tol", type=float, default=1e-5,
                   help="front rows with h at or above this are ignored (default 1e-5)")
    p.add_argument("--purity-tol", type=float, default=0.0,
                   help="componentwise match tolerance for purity (default exact)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmsfir", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on one problem")
    p.add_argument("problem", help="catalog name (see list-problems) or problem config path")
    p.add_argument("--solver", choices=sorted(SOLVERS), default="filter-ir",
                   help="default filter-ir")
    p.add_argument("--family", type=int, default=0, choices=range(0, 7), metavar="0..6",
                   help="constraint family to append (default 0, none)")
    p.add_argument("--n", type=int, default=None, help="dimension for catalog problems")
    _run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="run solvers over a suite file")
    p.add_argument("--suite", required=True, help="CSV rows: problem,family[,n]")
    p.add_argument("--solvers", default="filter-ir,eb", help="comma list (default filter-ir,eb)")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs (default 1)")
    _run_flags(p)
    p.set_defaults(func=cmd_benchmark)

    for name, func, text in (("metrics", cmd_metrics, "metric table over stored fronts"),
                             ("profile", cmd_profile, "metric table and performance profiles")):
        p = sub.add_parser(name, help=text)
        _metric_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("list-problems", help="print the built-in catalog")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InitializationError as exc:
        print(f"initialization error: {exc}", file=sys.stderr)
        return EXIT_INIT


if __name__ == "__main__":
    sys.exit(main())
