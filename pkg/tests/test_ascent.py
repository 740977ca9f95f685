import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cases import K4_WEIGHTS, k4, random_instance
from ctbound.ascent import AscentStep, delta_kstab, delta_tree, find_ascent_direction, run_ascent
from ctbound.instance import ConflictGraph, Instance
from ctbound.kstab import KstabSolver
from ctbound.lagrangean import Evaluator, InstanceInfeasible
from ctbound.preprocess import probe
from oracles import brute_dual_value, brute_opt


def kstab_only(H, k):
    return SimpleNamespace(solver=KstabSolver(H, k))


def test_delta_kstab_path_examples():
    ev = kstab_only(ConflictGraph(3, [(0, 1), (1, 2)]), 2)
    lam = np.array([1.0, 5.0, 2.0])
    current = ev.solver.solve(lam)
    assert current.value == 3
    assert delta_kstab(ev, lam, current, 1, 1) == math.inf
    assert delta_kstab(ev, lam, current, 0, 0) == math.inf


def test_delta_kstab_edgeless():
    ev = kstab_only(ConflictGraph(4), 2)
    lam = np.array([0.0, 1.0, 2.0, 3.0])
    current = ev.solver.solve(lam)
    assert current.best_set == {0, 1}
    assert delta_kstab(ev, lam, current, 0, 0) == 2


def test_delta_tree_examples():
    ev = Evaluator(k4())
    lam = np.zeros(6)
    point = ev.evaluate(lam)
    assert point.tree.edge_set == {0, 1, 2}
    assert delta_tree(ev, lam, point.tree, 5, 1) == 3
    assert delta_tree(ev, lam, point.tree, 0, 0) == 3
    p3 = Evaluator(Instance.build(3, [(0, 1), (1, 2)], [1, 1]))
    pt = p3.evaluate(np.zeros(2))
    assert delta_tree(p3, np.zeros(2), pt.tree, 1, 0) == math.inf


def test_step_validation():
    with pytest.raises(ValueError):
        AscentStep(0, 1, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        AscentStep(0, 1, math.inf, math.inf, math.inf)


def test_no_violation_no_direction():
    ev = Evaluator(k4(()))
    point = ev.evaluate(np.zeros(6))
    assert not np.any(point.subgradient) or find_ascent_direction(ev, point) is None


def test_conflict_free_stops_immediately():
    ev = Evaluator(k4(()))
    res = run_ascent(ev, np.zeros(6), 10.0)
    assert len(res.trace) == 1 and ev.evaluations == 1
    assert res.best.value == 6
    assert res.stop_reason == "optimal"


def test_zero_budget_single_evaluation():
    ev = Evaluator(k4())
    res = run_ascent(ev, np.zeros(6), 0.0)
    assert len(res.trace) == 1 and ev.evaluations == 1
    assert np.array_equal(res.lam, np.zeros(6))


def test_k4_toy_first_direction():
    # at lam = 0 every kstab costs 0, so each restricted kstab gap is 0 and
    # no coordinate admits a positive step
    inst = k4()
    ev = Evaluator(inst)
    point = ev.evaluate(np.zeros(6))
    assert point.value == 6 and point.kstab.value == 0
    assert point.tree.edge_set != point.kstab.best_set
    assert find_ascent_direction(ev, point) is None


def test_k4_toy_direction_off_origin():
    inst = k4()
    ev = Evaluator(inst)
    point = ev.evaluate(np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0]))
    step = find_ascent_direction(ev, point)
    assert step is not None
    lam = point.lam.copy()
    lam[step.edge] += step.direction * step.magnitude
    want = brute_dual_value(4, inst.graph.edges, K4_WEIGHTS, inst.conflict_pairs, lam)
    assert want == pytest.approx(point.value + step.magnitude)


def test_k4_toy_run_bounded_by_opt():
    res = run_ascent(Evaluator(k4()), np.zeros(6), 10.0)
    vals = [p.value for p in res.trace]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= 8 + 1e-9


def test_ascent_from_kstab_point():
    # at lam = w every tree costs zero and the kstab side carries the bound
    ev = Evaluator(k4())
    start = ev.evaluate(np.array(K4_WEIGHTS, float))
    res = run_ascent(ev, start.lam, 10.0, start=start)
    assert res.best.value >= start.value


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_breakpoint_property_on_tiny_instances(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 3, 6, max_edges=10)
    red, _ = probe(inst)
    if red is None:
        return
    opt = brute_opt(red.n_vertices, red.graph.edges, red.graph.weights, red.conflict_pairs)
    ev = Evaluator(red)
    lam0 = rng.uniform(0, 1, size=red.n_edges) * red.graph.w * rng.integers(0, 2)
    try:
        res = run_ascent(ev, lam0, 5.0)
    except InstanceInfeasible:
        assert opt is None
        return
    vals = [p.value for p in res.trace]
    assert all(b >= a + 1e-9 for a, b in zip(vals, vals[1:]))
    for before, step, after in zip(res.trace, res.steps, res.trace[1:]):
        assert after.value >= before.value + step.magnitude - 1e-6
        assert step.magnitude == min(step.delta, step.partial)
    if opt is not None:
        assert vals[-1] <= opt + 1e-6
    for p in res.trace:
        want = brute_dual_value(red.n_vertices, red.graph.edges, red.graph.weights, red.conflict_pairs, p.lam)
        assert p.value == pytest.approx(want, abs=1e-7)
