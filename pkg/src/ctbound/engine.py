"""End-to-end bound pipeline: probing, kstab bound, dual ascent, Volume."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .ascent import run_ascent
from .instance import Instance
from .kstab import KstabStatus
from .lagrangean import DualPoint, Evaluator, InstanceInfeasible, evaluate_dual
from .mst import min_spanning_tree
from .preprocess import ReductionLog, probe
from .volume import VolumeConfig, run_volume

log = logging.getLogger(__name__)

__all__ = [
    "EngineConfig",
    "BoundReport",
    "InstanceInfeasible",
    "evaluate_dual",
    "initial_kstab_bound",
    "report_schema",
    "solve",
]


@dataclass
class EngineConfig:
    total_budget: float = 3600.0
    ascent_budget: float = 1800.0
    kstab_bound_budget: float = 1800.0
    volume: VolumeConfig = field(default_factory=VolumeConfig)
    preprocess: bool = True
    pairwise_probe: bool = False
    # "best": start ascent at whichever of lam = 0 and lam = w scores higher
    ascent_start: str = "best"
    trace: bool = False

    def __post_init__(self):
        if min(self.total_budget, self.ascent_budget, self.kstab_bound_budget) < 0:
            raise ValueError("budgets must be non-negative")
        if self.ascent_start not in ("best", "zero", "weights"):
            raise ValueError("ascent_start must be 'best', 'zero' or 'weights'")


@dataclass
class BoundReport:
    instance: str
    n_vertices: int
    n_edges: int
    n_conflicts: int
    kstab_bound: float | None = None
    kstab_status: str | None = None
    best_dual: float | None = None
    best_dual_ceil: float | None = None
    upper_bound: float | None = None
    infeasible: bool = False
    kstab_timeout: bool = False
    ascent_exhausted: bool = False
    gap_closed: bool = False
    ascent_stop: str = ""
    volume_stop: str = ""
    times: dict = field(default_factory=lambda: {"preprocess": 0.0, "kstab": 0.0, "ascent": 0.0, "volume": 0.0, "total": 0.0})
    iterations: dict = field(default_factory=lambda: {"ascent": 0, "volume": 0, "evaluations": 0})
    reduction: dict | None = None
    reduced_size: dict | None = None
    volume_config: dict | None = None
    trace: list | None = None
    # not serialized: multipliers and the instance actually dualized
    best_lam: np.ndarray | None = field(default=None, repr=False)
    dualized: Instance | None = field(default=None, repr=False)
    all_values: list = field(default_factory=list, repr=False)
    ascent_values: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        out = {}
        for key in ("instance", "n_vertices", "n_edges", "n_conflicts", "kstab_bound", "kstab_status",
                    "best_dual", "best_dual_ceil", "upper_bound", "infeasible", "kstab_timeout",
                    "ascent_exhausted", "gap_closed", "ascent_stop", "volume_stop", "times", "iterations",
                    "reduction", "reduced_size", "volume_config"):
            val = getattr(self, key)
            if isinstance(val, float) and not math.isfinite(val):
                val = None
            out[key] = val
        if self.trace is not None:
            out["trace"] = self.trace
        return out


def initial_kstab_bound(ev: Evaluator, budget: float | None = 1800.0) -> tuple[DualPoint, float, KstabStatus]:
    """``min w @ y`` over stable sets of size ``|V|-1``: the value of ``z`` at
    ``lam = w``, where every spanning tree costs zero.

    Returns the dual point, the bound (a valid lower bound even on timeout)
    and the kstab status.
    """
    point = ev.evaluate(ev.w.copy(), budget=budget, phase="kstab")
    bound = point.kstab.value if point.exact else point.kstab.lower_bound
    return point, float(bound), point.kstab.status


def solve(instance: Instance, config: EngineConfig | None = None) -> BoundReport:
    config = config or EngineConfig()
    t_start = time.monotonic()
    report = BoundReport(instance.name, instance.n_vertices, instance.n_edges, len(instance.conflicts),
                         volume_config=config.volume.to_dict())

    def finish():
        report.times["total"] = time.monotonic() - t_start
        return report

    work = instance
    if config.preprocess:
        t = time.monotonic()
        reduced, rlog = probe(instance, enable_pairwise=config.pairwise_probe)
        report.times["preprocess"] = time.monotonic() - t
        report.reduction = rlog.to_dict()
        if rlog.infeasible:
            report.infeasible = True
            return finish()
        work = reduced
    report.dualized = work
    report.reduced_size = {"n_edges": work.n_edges, "n_conflicts": len(work.conflicts)}

    ev = Evaluator(work, trace=config.trace)
    best: DualPoint | None = None

    def consider(p: DualPoint):
        nonlocal best
        if best is None or p.value > best.value:
            best = p

    def record():
        report.all_values = [e.value for e in ev.trace]
        report.iterations["evaluations"] = ev.evaluations
        if math.isfinite(ev.upper_bound):
            report.upper_bound = ev.upper_bound
        if best is not None:
            report.best_dual = best.value
            report.best_dual_ceil = ev.rounded(best.value) if ev.integral else None
            report.best_lam = best.lam
            report.gap_closed = ev.gap_closed(best.value)
        if config.trace:
            report.trace = [{"phase": e.phase, "value": e.value, "exact": e.exact, "elapsed": e.elapsed}
                            for e in ev.trace]

    try:
        t = time.monotonic()
        kpoint, kbound, kstatus = initial_kstab_bound(ev, config.kstab_bound_budget)
        report.times["kstab"] = time.monotonic() - t
        report.kstab_bound = kbound
        report.kstab_status = kstatus.value
        consider(kpoint)
        if kstatus is KstabStatus.TIME_LIMIT:
            report.kstab_timeout = True
            record()
            return finish()

        t = time.monotonic()
        elapsed = t - t_start
        ascent_budget = max(0.0, min(config.ascent_budget, config.total_budget - elapsed))
        zero_point = ev.evaluate(np.zeros(work.n_edges), budget=None, phase="ascent")
        consider(zero_point)
        if config.ascent_start == "zero":
            start = zero_point
        elif config.ascent_start == "weights":
            start = kpoint
        else:
            start = zero_point if zero_point.value >= kpoint.value else kpoint
        asc = run_ascent(ev, start.lam, ascent_budget, start=start)
        report.times["ascent"] = time.monotonic() - t
        report.iterations["ascent"] = len(asc.steps)
        report.ascent_stop = asc.stop_reason
        report.ascent_exhausted = asc.stop_reason == "exhausted"
        report.ascent_values = [p.value for p in asc.trace]
        consider(asc.best)

        t = time.monotonic()
        remaining = max(0.0, config.total_budget - (t - t_start))
        vcfg = VolumeConfig(**{**config.volume.to_dict(), "time_budget": remaining})
        vbest, vstate = run_volume(ev, asc.best, vcfg)
        report.times["volume"] = time.monotonic() - t
        report.iterations["volume"] = vstate.iterations
        report.volume_stop = vstate.stop_reason
        consider(vbest)
    except InstanceInfeasible:
        report.infeasible = True
        record()
        return finish()
    record()
    return finish()


def mst_weight(instance: Instance) -> float:
    return min_spanning_tree(instance.graph, instance.graph.w).value


def reduction_summary(rlog: ReductionLog) -> str:
    return (f"deleted={len(rlog.deleted_edges)} mandatory={len(rlog.mandatory_edges)} "
            f"implied={len(rlog.implied_conflicts)} rounds={rlog.rounds}")


def report_schema() -> dict:
    """JSON schema of :meth:`BoundReport.to_dict` output."""
    return json.loads(resources.files(__package__).joinpath("report.schema.json").read_text())
