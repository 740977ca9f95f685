"""``ctb`` command line.

Exit codes: 0 success, 1 usage error, 2 infeasible instance, 3 a size guard
or a polyhedral check failed.
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
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .engine import BoundReport, EngineConfig, initial_kstab_bound, solve
from .instance import FORMATS, InstanceError, read_instance
from .lab import GuardError, enumerate_stable_spanning_trees, run_theorem_corpus
from .lagrangean import Evaluator, InstanceInfeasible
from .volume import VolumeConfig

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3
INSTANCE_SUFFIXES = {".txt", ".dat", ".ccmst", ".mstcc", ".in"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@dataclass
class RunConfig:
    paths: list[Path]
    format: str = "auto"
    total_budget: float = 3600.0
    ascent_budget: float = 1800.0
    kstab_bound_budget: float = 1800.0
    volume: dict = field(default_factory=dict)
    pairwise_probe: bool = False
    preprocess: bool = True
    output: str | None = None
    opt_file: Path | None = None
    trace: bool = False

    def __post_init__(self):
        for name in ("total_budget", "ascent_budget", "kstab_bound_budget"):
            val = getattr(self, name)
            if not (val >= 0 and math.isfinite(val)):
                raise UsageError(f"{name.replace('_', '-')} must be a non-negative number")
        if self.ascent_budget > self.total_budget:
            raise UsageError("ascent budget cannot exceed the total budget")

    def engine(self, phases: str = "all") -> EngineConfig:
        vol = VolumeConfig(**self.volume)
        if phases == "ascent":
            vol = VolumeConfig(**{**vol.to_dict(), "max_iters": 0})
        return EngineConfig(self.total_budget, self.ascent_budget, self.kstab_bound_budget, vol,
                            self.preprocess, self.pairwise_probe, trace=self.trace)


def _expand(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out += sorted(q for q in p.iterdir() if q.is_file() and
                          (q.suffix.lower() in INSTANCE_SUFFIXES or not q.suffix))
        elif p.exists():
            out.append(p)
        else:
            raise UsageError(f"no such file or directory: {p}")
    if not out:
        raise UsageError("no instance files found")
    return out


def load_optima(path) -> dict[str, float]:
    """``instance,opt`` CSV (header optional, ``#`` comments allowed)."""
    optima = {}
    with open(path, newline="") as fh:
        for row in csv.reader(line for line in fh if not line.lstrip().startswith("#")):
            if len(row) < 2:
                continue
            try:
                optima[row[0].strip()] = float(row[1])
            except ValueError:
                continue
    return optima


def _solve_one(args):
    path, fmt, engine = args
    inst = read_instance(path, fmt)
    return solve(inst, engine)


def table_row(report: BoundReport, opt: float | None = None) -> dict:
    ld = report.best_dual_ceil if report.best_dual_ceil is not None else report.best_dual
    gap = None
    if opt is not None and ld is not None and opt != 0:
        gap = 100.0 * (opt - ld) / abs(opt)
    ld_time = report.times["ascent"] + report.times["volume"] + report.times["preprocess"]
    return {
        "ID": report.instance,
        "OPT": opt,
        "KSTAB": report.kstab_bound,
        "KSTAB time": report.times["kstab"],
        "LD": None if report.infeasible else ld,
        "LD time": ld_time,
        "% from OPT": gap,
        "status": "infeasible" if report.infeasible else ("kstab-timeout" if report.kstab_timeout else "ok"),
    }


def _fmt(v, width, digits=2):
    if v is None:
        s = "-"
    elif isinstance(v, float):
        s = str(int(v)) if v.is_integer() and digits == 0 else f"{v:.{digits}f}"
    else:
        s = str(v)
    return s.rjust(width)


def format_table(rows: list[dict]) -> str:
    idw = max([len("ID")] + [len(r["ID"]) for r in rows])
    head = f"{'ID'.ljust(idw)} | {'OPT':>8} | {'KSTAB':>8} {'time':>9} | {'LD':>10} {'time':>9} | {'% from OPT':>10}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r['ID'].ljust(idw)} | {_fmt(r['OPT'], 8, 0)} | {_fmt(r['KSTAB'], 8, 0)} {_fmt(r['KSTAB time'], 9)} | "
            f"{_fmt(r['LD'], 10, 0)} {_fmt(r['LD time'], 9)} | {_fmt(r['% from OPT'], 10)}"
            + ("" if r["status"] == "ok" else f"  ({r['status']})"))
    return "\n".join(lines)


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["ID"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CTB_THREADS", "1")))
    except ValueError:
        return 1


def run_batch(cfg: RunConfig, phases: str = "all") -> list[BoundReport]:
    engine = cfg.engine(phases)
    jobs = [(p, cfg.format, engine) for p in cfg.paths]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_one, jobs))
    return [_solve_one(j) for j in jobs]


def _emit(reports, cfg: RunConfig, out):
    optima = load_optima(cfg.opt_file) if cfg.opt_file else {}
    mode = cfg.output or ("json" if len(reports) == 1 else "table")
    if mode == "json":
        docs = [r.to_dict() for r in reports]
        for d in docs:
            if d["instance"] in optima:
                d["opt"] = optima[d["instance"]]
        print(json.dumps(docs[0] if len(docs) == 1 else docs, indent=2), file=out)
        return
    rows = [table_row(r, optima.get(r.instance)) for r in reports]
    print(format_csv(rows) if mode == "csv" else format_table(rows), file=out, end="" if mode == "csv" else "\n")


def cmd_solve(ns, out, phases="all") -> int:
    cfg = _run_config(ns)
    reports = run_batch(cfg, phases)
    _emit(reports, cfg, out)
    return EXIT_INFEASIBLE if any(r.infeasible for r in reports) else EXIT_OK


def cmd_kstab_bound(ns, out) -> int:
    cfg = _run_config(ns)
    docs = []
    infeasible = False
    for path in cfg.paths:
        inst = read_instance(path, cfg.format)
        t = time.monotonic()
        doc = {"instance": inst.name, "n_vertices": inst.n_vertices, "n_edges": inst.n_edges,
               "n_conflicts": len(inst.conflicts)}
        try:
            _, bound, status = initial_kstab_bound(Evaluator(inst), cfg.kstab_bound_budget)
            doc.update(kstab_bound=bound, status=status.value)
        except InstanceInfeasible:
            infeasible = True
            doc.update(kstab_bound=None, status="Infeasible")
        doc["time"] = time.monotonic() - t
        docs.append(doc)
    if cfg.output in ("csv", "table"):
        print(format_csv(docs), file=out, end="")
    else:
        print(json.dumps(docs[0] if len(docs) == 1 else docs, indent=2), file=out)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_brute(ns, out) -> int:
    docs = []
    infeasible = False
    for path in _expand(ns.paths):
        inst = read_instance(path, ns.format)
        res = enumerate_stable_spanning_trees(inst)
        infeasible |= not res.feasible
        docs.append({"instance": inst.name, "feasible": res.feasible, "opt": res.opt,
                     "tree": list(res.opt_tree) if res.opt_tree is not None else None,
                     "spanning_trees": res.n_spanning_trees, "stable_spanning_trees": len(res.family)})
    print(json.dumps(docs[0] if len(docs) == 1 else docs, indent=2), file=out)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_lab(ns, out) -> int:
    t = time.monotonic()
    corpus = run_theorem_corpus(ns.max_n, ns.random, (ns.random_min_n, ns.random_max_n), ns.samples, ns.seed)
    doc = corpus.to_dict()
    doc["seed"] = ns.seed
    doc["time"] = time.monotonic() - t
    print(json.dumps(doc, indent=2), file=out)
    return EXIT_OK if corpus.violations == 0 else EXIT_LIMIT


def _run_config(ns) -> RunConfig:
    volume = {}
    if getattr(ns, "volume_iters", None) is not None:
        volume["max_iters"] = ns.volume_iters
    total = ns.budget
    ascent = ns.ascent_budget if ns.ascent_budget is not None else min(1800.0, total)
    kstab = ns.kstab_budget if ns.kstab_budget is not None else 1800.0
    return RunConfig(_expand(ns.paths), ns.format, total, ascent, kstab, volume,
                     ns.pairwise_probe, not ns.no_preprocess, ns.output, ns.opt_file, ns.trace)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctb", description="Lagrangean decomposition bounds for spanning trees under conflict constraints.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, budgets=True):
        sp.add_argument("paths", nargs="+", help="instance files or directories")
        sp.add_argument("--format", choices=FORMATS, default="auto")
        sp.add_argument("--seed", type=int, default=0)
        out = sp.add_mutually_exclusive_group()
        out.add_argument("--json", dest="output", action="store_const", const="json")
        out.add_argument("--csv", dest="output", action="store_const", const="csv")
        out.add_argument("--table", dest="output", action="store_const", const="table")
        if not budgets:
            return
        sp.add_argument("--budget", type=float, default=3600.0, help="total seconds per instance")
        sp.add_argument("--ascent-budget", type=float, default=None)
        sp.add_argument("--kstab-budget", type=float, default=None)
        sp.add_argument("--pairwise-probe", action="store_true")
        sp.add_argument("--no-preprocess", action="store_true")
        sp.add_argument("--opt-file", type=Path, default=None, help="CSV of instance,opt for the gap column")
        sp.add_argument("--trace", action="store_true")
        sp.add_argument("--volume-iters", type=int, default=None)

    common(sub.add_parser("solve", help="full bound pipeline"))
    common(sub.add_parser("ascent-only", help="probing, kstab bound and dual ascent"))
    common(sub.add_parser("kstab-bound", help="kstab combinatorial bound only"))
    common(sub.add_parser("brute", help="exact optimum by enumeration (tiny instances)"), budgets=False)
    lab = sub.add_parser("lab", help="polyhedral checks on small conflict graphs")
    lab.add_argument("--max-n", type=int, default=5)
    lab.add_argument("--random", type=int, default=0, help="extra random graphs")
    lab.add_argument("--random-min-n", type=int, default=6)
    lab.add_argument("--random-max-n", type=int, default=8)
    lab.add_argument("--samples", type=int, default=2)
    lab.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {
    "solve": cmd_solve,
    "ascent-only": lambda ns, out: cmd_solve(ns, out, "ascent"),
    "kstab-bound": cmd_kstab_bound,
    "brute": cmd_brute,
    "lab": cmd_lab,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(parser.format_usage())
        logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2), format="%(name)s: %(message)s")
        return COMMANDS[ns.command](ns, out)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except (InstanceError, OSError) as exc:
        print(f"ctb: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardError as exc:
        print(f"ctb: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
