"""Command-line front end.

Verbs: ``solve`` (fixed k, several seeds), ``sweep`` (decreasing k),
``sensitivity`` (lambda x mu grid), ``validate`` (check a solution file),
``exact`` (small-graph oracle) and ``generate`` (write a built-in graph as
DIMACS).

Per run a trace CSV is written; batch results go to ``summary.jsonl`` (one
JSON object per line) and the best coloring to a ``.sol`` file. Exit status is
0 if any run solved, 1 if none did and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .graph import Coloring, DimacsParseError, Graph, Mode, greedy_upper_bound, to_dimacs, validate
from .instances import load_instance
from .oracle import InstanceTooLarge, exact_chromatic
from .solver import (
    PRNG_ID,
    RHO_CHOICES,
    RunTrace,
    SizingError,
    SolveOutcome,
    SolverConfig,
    Status,
    TraceRecord,
    solve_fixed_k,
)

logger = logging.getLogger("tenscol")

OUT_DIR_ENV = "TENSCOL_OUT_DIR"
TRACE_FIELDS = ("t", "best_color", "best_equity", "min_total", "wall")

EXIT_SOLVED, EXIT_UNSOLVED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_seeds(text: str) -> list[int]:
    """``"0..9"`` (inclusive), ``"1,4,7"``, ``"3"`` or a mix such as ``"0..2,9"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(x) for x in part.split("..", 1))
                if hi < lo:
                    raise ValueError
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def parse_grid(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("grid values must be non-negative")
    return values


def _rho(text: str) -> float:
    value = float(text)
    if value not in RHO_CHOICES:
        raise argparse.ArgumentTypeError(f"rho must be one of {', '.join(f'{r:g}' for r in RHO_CHOICES)}")
    return value


def config_from_args(args: argparse.Namespace, k: int) -> SolverConfig:
    """Table defaults for the mode, overridden by every flag the user gave."""
    overrides = {}
    for name in ("D", "sigma0", "eta", "nb_iter", "rho", "alpha", "beta", "lam", "mu", "nu",
                 "max_iter", "trace_stride", "time_limit", "dtype"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    overrides["deterministic"] = bool(getattr(args, "deterministic", False))
    return SolverConfig.defaults(args.mode, k, **overrides)


def output_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out or os.environ.get(OUT_DIR_ENV) or "tenscol-out")
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# files


def run_stem(g: Graph, cfg: SolverConfig) -> str:
    name = g.name or "graph"
    return f"{name}_{cfg.mode.value}_k{cfg.k}_s{cfg.seed}"


def write_trace(path: Path, outcome: SolveOutcome) -> Path:
    """CSV with ``#`` comment lines: a JSON header first, the run outcome last."""
    header = dict(outcome.trace.header, version=__version__)
    footer = {
        "status": outcome.status.value,
        "iterations": outcome.iterations_used,
        "seconds": outcome.seconds,
        "best_fitness": outcome.best_fitness,
        "weights_sha256": outcome.weights_digest,
    }
    buf = io.StringIO()
    buf.write(f"# {json.dumps(header, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for r in outcome.trace.records:
        writer.writerow([r.t, r.best_color, r.best_equity, r.min_total, repr(r.wall)])
    buf.write(f"# outcome {json.dumps(footer, sort_keys=True)}\n")
    path.write_text(buf.getvalue())
    return path


def read_trace(path: Path) -> tuple[RunTrace, dict]:
    header, footer, rows = {}, {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# outcome "):
            footer = json.loads(line[len("# outcome "):])
        elif line.startswith("# "):
            header = json.loads(line[2:])
        elif line:
            rows.append(line)
    trace = RunTrace(header=header)
    for row in csv.DictReader(rows):
        trace.append(
            TraceRecord(int(row["t"]), int(row["best_color"]), int(row["best_equity"]),
                        int(row["min_total"]), float(row["wall"]))
        )
    return trace, footer


def summarize(name: str, mode: str, k: int, footers: Sequence[dict]) -> dict:
    """Summary record; built only from trace outcomes so it can be recomputed from files."""
    times = [f["seconds"] for f in footers if f["status"] == Status.SOLVED.value]
    return {
        "instance": name,
        "mode": mode,
        "k": k,
        "runs": len(footers),
        "successes": len(times),
        "sr": f"{len(times)}/{len(footers)}",
        "mean_time_s": math.fsum(times) / len(times) if times else None,
        "best_fitness": min(f["best_fitness"] for f in footers),
    }


def summary_from_traces(paths: Iterable[Path]) -> dict:
    footers, header = [], {}
    for p in paths:
        trace, footer = read_trace(p)
        header = trace.header
        footers.append(footer)
    cfg = header["config"]
    return summarize(header["instance"], cfg["mode"], cfg["k"], footers)


def write_solution(g: Graph, c: Coloring, mode: Mode | str, path: Path) -> Path:
    """Header comments, then ``v <vertex> <color>`` per vertex (both 1-based)."""
    report = validate(g, c, mode)
    lines = [
        f"c instance {g.name or 'graph'}",
        f"c mode {Mode(mode).value}",
        f"c k {c.k}",
        f"c conflicts {report.conflict_count}",
        f"c equity_violation {report.equity_violation}",
    ]
    lines.extend(f"v {i + 1} {color + 1}" for i, color in enumerate(c.assignment))
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def load_solution(path: Path) -> tuple[Coloring, dict]:
    meta: dict = {}
    assignment: dict[int, int] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "c" and len(parts) >= 3:
            meta[parts[1]] = parts[2]
        elif parts[0] == "v" and len(parts) == 3:
            try:
                v, color = int(parts[1]), int(parts[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer vertex line") from None
            if v < 1 or color < 1 or v in assignment:
                raise ValueError(f"{path}:{lineno}: bad or repeated vertex line")
            assignment[v] = color - 1
        elif parts[0] != "c":
            raise ValueError(f"{path}:{lineno}: unexpected line {line!r}")
    n = len(assignment)
    if sorted(assignment) != list(range(1, n + 1)):
        raise ValueError(f"{path}: vertices are not 1..{n}")
    k = int(meta["k"]) if "k" in meta else None
    return Coloring.of([assignment[i] for i in range(1, n + 1)], k), meta


def append_summary(out: Path, record: dict) -> None:
    with open(out / "summary.jsonl", "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# running batches


def _solve_job(job: tuple[Graph, SolverConfig]) -> SolveOutcome:
    return solve_fixed_k(*job)


def run_batch(g: Graph, cfgs: Sequence[SolverConfig], jobs: int = 1) -> list[SolveOutcome]:
    """One independent solver per config; ``jobs > 1`` runs them in worker processes."""
    work = [(g, cfg) for cfg in cfgs]
    if jobs <= 1 or len(work) == 1:
        return [_solve_job(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_job, work))


def solve_level(
    g: Graph, base: SolverConfig, seeds: Sequence[int], out: Path, jobs: int = 1
) -> tuple[dict, list[SolveOutcome]]:
    cfgs = [base.replace(seed=s) for s in seeds]
    outcomes = run_batch(g, cfgs, jobs)
    traces = [write_trace(out / f"{run_stem(g, c)}.trace.csv", o) for c, o in zip(cfgs, outcomes)]
    record = summary_from_traces(traces)
    record["traces"] = [p.name for p in traces]
    solved = [o for o in outcomes if o.solved]
    if solved:
        sol = write_solution(g, solved[0].best_coloring, base.mode,
                             out / f"{g.name or 'graph'}_{base.mode.value}_k{base.k}.sol")
        record["solution"] = sol.name
    append_summary(out, record)
    return record, outcomes


def cmd_solve(args: argparse.Namespace) -> int:
    g = load_instance(args.instance)
    cfg = config_from_args(args, args.k)
    record, _ = solve_level(g, cfg, args.seeds, output_dir(args), args.jobs)
    print(json.dumps(record, sort_keys=True))
    return EXIT_SOLVED if record["successes"] else EXIT_UNSOLVED


def cmd_sweep(args: argparse.Namespace) -> int:
    g = load_instance(args.instance)
    out = output_dir(args)
    k = args.start_k or greedy_upper_bound(g, seed=args.seeds[0]).colors_used
    best_k = None
    while k >= max(1, args.min_k):
        record, _ = solve_level(g, config_from_args(args, k), args.seeds, out, args.jobs)
        print(json.dumps(record, sort_keys=True))
        if not record["successes"]:
            break
        best_k = k
        k -= 1
    final = {"instance": g.name, "mode": args.mode, "best_k": best_k}
    append_summary(out, final)
    print(json.dumps(final, sort_keys=True))
    return EXIT_SOLVED if best_k is not None else EXIT_UNSOLVED


def sensitivity_grid(
    g: Graph, base: SolverConfig, lams: Sequence[float], mus: Sequence[float],
    seeds: Sequence[int], jobs: int = 1,
) -> list[dict]:
    """Mean best fitness per (lambda, mu) cell over ``seeds``."""
    if not lams or not mus:
        raise UsageError("sensitivity grid is empty")
    rows = []
    for lam in lams:
        for mu in mus:
            cfgs = [base.replace(lam=lam, mu=mu, seed=s) for s in seeds]
            outcomes = run_batch(g, cfgs, jobs)
            rows.append({
                "lam": lam,
                "mu": mu,
                "runs": len(outcomes),
                "successes": sum(o.solved for o in outcomes),
                "mean_best_fitness": math.fsum(o.best_fitness for o in outcomes) / len(outcomes),
            })
    return rows


def cmd_sensitivity(args: argparse.Namespace) -> int:
    g = load_instance(args.instance)
    cfg = config_from_args(args, args.k)
    rows = sensitivity_grid(g, cfg, args.lam_grid, args.mu_grid, args.seeds, args.jobs)
    out = output_dir(args)
    path = out / f"{g.name or 'graph'}_{cfg.mode.value}_k{cfg.k}_sensitivity.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    # lambda down the side, mu across the top
    print("lam\\mu " + " ".join(f"{mu:>9g}" for mu in args.mu_grid))
    for lam in args.lam_grid:
        cells = [r["mean_best_fitness"] for r in rows if r["lam"] == lam]
        print(f"{lam:<7g}" + " ".join(f"{c:>9.2f}" for c in cells))
    return EXIT_SOLVED if any(r["successes"] for r in rows) else EXIT_UNSOLVED


def cmd_validate(args: argparse.Namespace) -> int:
    g = load_instance(args.instance)
    c, meta = load_solution(args.solution)
    mode = args.mode or meta.get("mode", "gcp")
    if len(c) != g.n:
        raise UsageError(f"solution has {len(c)} vertices, instance has {g.n}")
    report = validate(g, c, mode)
    print(json.dumps(report.as_record(), sort_keys=True))
    return EXIT_SOLVED if report.legal else EXIT_UNSOLVED


def cmd_exact(args: argparse.Namespace) -> int:
    g = load_instance(args.instance)
    result = exact_chromatic(g, args.mode, max_n=args.max_n)
    print(json.dumps({
        "instance": g.name,
        "mode": result.mode.value,
        "chromatic_number": result.chromatic_number,
        "explored_nodes": result.explored_nodes,
        "witness": [c + 1 for c in result.witness.assignment],
    }))
    return EXIT_SOLVED


def cmd_generate(args: argparse.Namespace) -> int:
    g = load_instance(f"builtin:{args.name}")
    text = to_dimacs(g, comments=[f"{g.name}: generated, n={g.n} m={g.m}"])
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return EXIT_SOLVED


# ---------------------------------------------------------------------------
# parser


def _add_solver_flags(p: argparse.ArgumentParser, need_k: bool) -> None:
    p.add_argument("--instance", required=True,
                   help="DIMACS .col path, or builtin:NAME (mycielN, Kn, DSJC125.1, ...)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="gcp")
    if need_k:
        p.add_argument("--k", type=int, required=True)
    p.add_argument("--seeds", type=parse_seeds, default=[0], help="e.g. 0..9 or 1,3,5")
    p.add_argument("--D", type=int, help="population size (default 200)")
    p.add_argument("--sigma0", type=float)
    p.add_argument("--eta", type=float, help="learning rate")
    p.add_argument("--nb-iter", dest="nb_iter", type=int, help="smoothing period")
    p.add_argument("--rho", type=_rho, help="smoothing divisor, one of 1,2,10,100,200 (default 10)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--lam", type=float, help="penalty weight lambda")
    p.add_argument("--mu", type=float, help="bonus weight mu")
    p.add_argument("--nu", type=float, help="equity weight nu (ecp)")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--trace-stride", dest="trace_stride", type=int)
    p.add_argument("--time-limit", dest="time_limit", type=float, help="wall seconds per run")
    p.add_argument("--dtype", choices=["float32", "float64"])
    p.add_argument("--deterministic", action="store_true", help="single-threaded reductions")
    p.add_argument("--jobs", type=int, default=1, help="runs in parallel worker processes")
    p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or ./tenscol-out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tenscol", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({PRNG_ID})")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve k-coloring for a fixed k over several seeds")
    _add_solver_flags(p, need_k=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="decrease k until every seed fails")
    _add_solver_flags(p, need_k=False)
    p.add_argument("--start-k", dest="start_k", type=int, help="default: DSATUR color count")
    p.add_argument("--min-k", dest="min_k", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sensitivity", help="mean best fitness over a lambda x mu grid")
    _add_solver_flags(p, need_k=True)
    p.add_argument("--lam-grid", dest="lam_grid", type=parse_grid, required=True)
    p.add_argument("--mu-grid", dest="mu_grid", type=parse_grid, required=True)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("validate", help="check a solution file against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True, type=Path)
    p.add_argument("--mode", choices=[m.value for m in Mode], help="default: from the file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("exact", help="exact (equitable) chromatic number of a small graph")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="gcp")
    p.add_argument("--max-n", dest="max_n", type=int, default=12)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("generate", help="write a built-in graph in DIMACS format")
    p.add_argument("name", help="mycielN, Kn, Cn, En or a stand-in key such as DSJC125.1")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, DimacsParseError, InstanceTooLarge, SizingError, KeyError, OSError, ValueError) as exc:
        print(f"tenscol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
