"""Dual ascent along single multipliers.

At an exact dual point ``(x, y)`` pick an edge with ``x_e != y_e``. Moving
``lam_e`` in the direction that penalizes the disagreement raises ``z`` at
unit rate until one of the two subproblems gains an alternative optimum, i.e.
by the smaller of the restricted-problem gaps

* ``x_e = 0 < 1 = y_e``: kstab with ``y_e = 0`` and tree with ``x_e = 1``; increase ``lam_e``.
* ``x_e = 1 > 0 = y_e``: kstab with ``y_e = 1`` and tree with ``x_e = 0``; decrease ``lam_e``.

An infeasible restricted problem never produces a breakpoint, so its gap is
``inf`` and the other gap alone sets the step. When both are infinite the
coordinate is skipped.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .kstab import KstabStatus
from .lagrangean import DualPoint, Evaluator
from .mst import restricted_tree_value

log = logging.getLogger(__name__)

STEP_TOL = 1e-9


class AscentAbort(Exception):
    """A restricted kstab problem could not be solved to optimality in time."""


@dataclass
class AscentStep:
    edge: int
    direction: int
    magnitude: float
    delta: float
    partial: float

    def __post_init__(self):
        if not (self.magnitude > 0 and math.isfinite(self.magnitude)):
            raise ValueError("ascent steps need a positive finite magnitude")


@dataclass
class AscentResult:
    lam: np.ndarray
    trace: list[DualPoint]
    steps: list[AscentStep] = field(default_factory=list)
    stop_reason: str = ""
    skipped_unbounded: list[int] = field(default_factory=list)

    @property
    def best(self) -> DualPoint:
        return self.trace[-1]


def _remaining(deadline):
    return None if deadline is None else max(0.0, deadline - time.monotonic())


def delta_kstab(ev: Evaluator, lam, current, edge: int, want: int, deadline=None) -> float:
    """Restricted kstab optimum with ``y_edge = want`` minus ``current.value``."""
    fixed_one = {edge} if want == 1 else ()
    fixed_zero = {edge} if want == 0 else ()
    res = ev.solver.solve(lam, fixed_one, fixed_zero, budget=_remaining(deadline))
    if res.status is KstabStatus.INFEASIBLE:
        return math.inf
    if res.status is KstabStatus.TIME_LIMIT:
        raise AscentAbort(f"restricted kstab for edge {edge} hit the time limit")
    return res.value - current.value


def delta_tree(ev: Evaluator, lam, current, edge: int, want: int) -> float:
    """Restricted tree optimum with ``x_edge = want`` minus ``current.value``."""
    costs = ev.w - np.asarray(lam, dtype=float)
    return restricted_tree_value(ev.instance.graph, costs, edge, include=bool(want)) - current.value


def find_ascent_direction(ev: Evaluator, point: DualPoint, deadline=None, skipped=None) -> AscentStep | None:
    """First coordinate (by edge index) admitting a positive maximal step."""
    if not point.exact:
        raise AscentAbort("ascent requires an exactly evaluated dual point")
    x = point.tree.edge_set
    y = point.kstab.best_set
    for e in sorted(x ^ y):
        if deadline is not None and time.monotonic() > deadline:
            raise AscentAbort("ascent budget exhausted while scanning")
        if e in y:  # x_e = 0 < 1 = y_e
            partial = delta_tree(ev, point.lam, point.tree, e, 1)
            direction = 1
            want_y = 0
        else:  # x_e = 1 > 0 = y_e
            partial = delta_tree(ev, point.lam, point.tree, e, 0)
            direction = -1
            want_y = 1
        if partial <= STEP_TOL:
            continue
        delta = delta_kstab(ev, point.lam, point.kstab, e, want_y, deadline)
        mag = min(delta, partial)
        if math.isinf(mag):
            if skipped is not None:
                skipped.append(e)
            log.warning("edge %d: both restricted problems infeasible; skipped", e)
            continue
        if mag > STEP_TOL:
            return AscentStep(e, direction, mag, delta, partial)
    return None


def run_ascent(ev: Evaluator, lam0, time_budget: float | None, start: DualPoint | None = None) -> AscentResult:
    """Repeat maximal ascent steps from ``lam0`` until none exists, a kstab
    call times out, the budget runs out or the bound meets a known stable
    tree. The trace holds strictly increasing values."""
    deadline = None if time_budget is None else time.monotonic() + time_budget
    point = start if start is not None else ev.evaluate(lam0, budget=None, phase="ascent")
    result = AscentResult(point.lam.copy(), [point])
    if not point.exact:
        result.stop_reason = "inexact"
        return result
    while True:
        if ev.gap_closed(point.value):
            result.stop_reason = "optimal"
            break
        if deadline is not None and time.monotonic() >= deadline:
            result.stop_reason = "budget"
            break
        try:
            step = find_ascent_direction(ev, point, deadline, result.skipped_unbounded)
        except AscentAbort as exc:
            result.stop_reason = "abort"
            log.info("ascent aborted: %s", exc)
            break
        if step is None:
            result.stop_reason = "exhausted"
            break
        lam = point.lam.copy()
        lam[step.edge] += step.direction * step.magnitude
        new = ev.evaluate(lam, budget=_remaining(deadline), phase="ascent")
        if not new.exact:
            result.stop_reason = "abort"
            break
        if new.value < point.value + STEP_TOL:
            # float noise swallowed the step; keep the trace strictly increasing
            result.stop_reason = "stalled"
            break
        log.debug("ascent edge=%d dir=%+d delta=%g partial=%g bound=%.6f",
                  step.edge, step.direction, step.delta, step.partial, new.value)
        result.steps.append(step)
        result.trace.append(new)
        point = new
    result.lam = point.lam.copy()
    return result
