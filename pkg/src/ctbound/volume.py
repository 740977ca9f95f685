"""Volume-algorithm refinement of the multipliers.

A stable center ``lam_bar`` moves only when a trial point improves on its
value. The step direction is the subgradient at the running convex
combinations ``x_bar``, ``y_bar`` of subproblem solutions, and iterations are
colored green / yellow / red to steer the step factor.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .lagrangean import DualPoint, Evaluator

log = logging.getLogger(__name__)

MIN_NORM = 1e-7
NORM2_FLOOR = 1e-14


class Color(enum.Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


@dataclass
class VolumeConfig:
    f_init: float = 0.1
    f_min: float = 1e-8
    f_max: float = 2.0
    alpha_init: float = 0.1
    alpha_min: float = 1e-5
    alpha_decay_every: int = 100
    red_limit: int = 20
    green_factor: float = 1.1
    target_slack: float = 0.05
    max_iters: int = 10_000
    time_budget: float | None = None
    kstab_budget_divisor: float = 50.0
    kstab_budget_floor: float = 5.0

    def __post_init__(self):
        if self.f_init != 0 and not (0 < self.f_min <= self.f_init <= self.f_max):
            raise ValueError("need 0 < f_min <= f_init <= f_max")
        if not (0 < self.alpha_min <= self.alpha_init <= 1):
            raise ValueError("need 0 < alpha_min <= alpha_init <= 1")
        if self.red_limit < 1 or self.max_iters < 0:
            raise ValueError("red_limit must be positive and max_iters non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VolumeState:
    lam_bar: np.ndarray
    z_bar: float
    x_bar: np.ndarray
    y_bar: np.ndarray
    f: float
    alpha: float
    consecutive_red: int
    best: DualPoint
    iterations: int = 0
    stop_reason: str = ""


def color_iteration(z_t: float, z_bar: float, g_t, g_bar) -> Color:
    if z_t > z_bar:
        return Color.GREEN if float(np.dot(g_t, g_bar)) > 0 else Color.YELLOW
    return Color.RED


def target_value(best: float, slack: float, upper_bound: float = math.inf) -> float:
    target = best + slack * abs(best) + 1.0
    if math.isfinite(upper_bound) and upper_bound > best:
        target = min(target, upper_bound)
    return target


def run_volume(ev: Evaluator, start: DualPoint, config: VolumeConfig | None = None) -> tuple[DualPoint, VolumeState]:
    config = config or VolumeConfig()
    t0 = time.monotonic()
    deadline = None if config.time_budget is None else t0 + config.time_budget
    state = VolumeState(
        lam_bar=start.lam.copy(),
        z_bar=start.value,
        x_bar=start.x,
        y_bar=start.y if start.kstab.best_set is not None else start.x,
        f=config.f_init,
        alpha=config.alpha_init,
        consecutive_red=0,
        best=start,
    )
    while True:
        if ev.gap_closed(state.best.value):
            state.stop_reason = "optimal"
            break
        if state.iterations >= config.max_iters:
            state.stop_reason = "max_iters"
            break
        remaining = None if deadline is None else deadline - time.monotonic()
        if remaining is not None and remaining <= 0:
            state.stop_reason = "budget"
            break
        if state.f <= 0 or state.f < config.f_min:
            state.stop_reason = "step_factor"
            break
        g_bar = state.y_bar - state.x_bar
        norm2 = float(g_bar @ g_bar)
        if math.sqrt(norm2) < MIN_NORM:
            state.stop_reason = "zero_direction"
            break

        target = target_value(state.best.value, config.target_slack, ev.upper_bound)
        step = state.f * (target - state.z_bar) / max(norm2, NORM2_FLOOR)
        if not step > 0:
            state.stop_reason = "target_reached"
            break
        lam_t = state.lam_bar + step * g_bar
        kbudget = None
        if remaining is not None:
            kbudget = min(remaining, max(remaining / config.kstab_budget_divisor, config.kstab_budget_floor))
        point = ev.evaluate(lam_t, budget=kbudget, phase="volume")
        state.iterations += 1

        a = state.alpha
        state.x_bar = a * point.x + (1 - a) * state.x_bar
        if point.kstab.best_set is not None:
            state.y_bar = a * point.y + (1 - a) * state.y_bar

        color = color_iteration(point.value, state.z_bar, point.subgradient, g_bar)
        if color is Color.RED:
            state.consecutive_red += 1
            if state.consecutive_red >= config.red_limit:
                state.f *= 0.5
                state.consecutive_red = 0
        else:
            state.lam_bar = lam_t
            state.z_bar = point.value
            state.consecutive_red = 0
            if color is Color.GREEN:
                state.f = min(state.f * config.green_factor, config.f_max)
        if point.value > state.best.value:
            state.best = point
        if state.iterations % config.alpha_decay_every == 0:
            state.alpha = max(state.alpha * 0.5, config.alpha_min)
        log.debug("vol it=%d %s f=%.3g alpha=%.3g z=%.6f z_bar=%.6f best=%.6f", state.iterations,
                  color.value, state.f, state.alpha, point.value, state.z_bar, state.best.value)
    return state.best, state
