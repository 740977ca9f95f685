import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctbound.lp import DualSimplex, LpModel, LpStatus, resolve_with_rows, solve_min
from cases import random_lp
from oracles import lp_vertex_enumeration


def test_facet_optimum():
    out = solve_min(LpModel([-1, -1], [([1, 1], "<=", 1)]))
    assert out.status is LpStatus.OPTIMAL and out.value == pytest.approx(-1)
    assert out.primal.sum() == pytest.approx(1)


def test_path_kstab_relaxation():
    rows = [([1, 1, 1], "=", 2), ([1, 1, 0], "<=", 1), ([0, 1, 1], "<=", 1)]
    out = solve_min(LpModel([1, 5, 2], rows))
    assert out.value == pytest.approx(3)
    assert out.primal == pytest.approx([1, 0, 1])


def test_infeasible():
    out = solve_min(LpModel([1], [([1], "=", 2), ([1], "<=", 1)], upper=[5]))
    assert out.status is LpStatus.INFEASIBLE


def test_unbounded():
    out = solve_min(LpModel([-1], [], upper=[np.inf]))
    assert out.status is LpStatus.UNBOUNDED


def test_rejects_bad_rows():
    with pytest.raises(ValueError):
        LpModel([1, 2], [([1], "<=", 1)])
    with pytest.raises(ValueError):
        LpModel([1], [([1], "<", 1)])


def c5_rows():
    rows = [(np.ones(5), "=", 2.0)]
    for i in range(5):
        a = np.zeros(5)
        a[[i, (i + 1) % 5]] = 1
        rows.append((a, "<=", 1.0))
    return rows


def test_odd_cycle_row_raises_value():
    model = LpModel(-np.ones(5), c5_rows())
    model.rows[0] = (np.ones(5), ">=", 0.0)
    base = solve_min(model)
    assert base.value == pytest.approx(-2.5)
    cut = [(np.ones(5), "<=", 2.0)]
    warm = resolve_with_rows(model, cut, base)
    assert warm.value == pytest.approx(-2.0)
    assert warm.value == pytest.approx(solve_min(model.with_rows(cut)).value)


def test_nonbinding_and_duplicate_rows():
    model = LpModel([1, 5, 2], [([1, 1, 1], "=", 2), ([1, 1, 0], "<=", 1), ([0, 1, 1], "<=", 1)])
    base = solve_min(model)
    assert resolve_with_rows(model, [([1, 1, 1], "<=", 3)], base).value == pytest.approx(base.value)
    assert resolve_with_rows(model, [model.rows[1]], base).value == pytest.approx(base.value)


def test_bound_changes_warm():
    model = LpModel([1, 5, 2], [([1, 1, 1], "=", 2)])
    solver = DualSimplex(model)
    assert solver.solve().value == pytest.approx(3)
    solver.set_bounds(0, 0, 0)
    assert solver.solve().value == pytest.approx(7)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_against_vertex_enumeration(seed):
    c, rows, lo, hi = random_lp(np.random.default_rng(seed))
    want = lp_vertex_enumeration(c, rows, lo, hi)
    out = solve_min(LpModel(c, rows, lo, hi))
    if want is None:
        assert out.status is LpStatus.INFEASIBLE
    else:
        assert out.status is LpStatus.OPTIMAL
        assert out.value == pytest.approx(want, abs=1e-7)
        a = np.array([r[0] for r in rows]).reshape(len(rows), len(c))
        lhs = a @ out.primal
        for val, (_, sense, b) in zip(lhs, rows):
            assert (val <= b + 1e-9) if sense == "<=" else (val >= b - 1e-9) if sense == ">=" else abs(val - b) <= 1e-9
        assert np.all(out.primal >= lo - 1e-9) and np.all(out.primal <= hi + 1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_warm_start_equivalence(seed):
    rng = np.random.default_rng(seed)
    c, rows, lo, hi = random_lp(rng)
    base_model = LpModel(c, rows[: len(rows) // 2], lo, hi)
    base = solve_min(base_model)
    extra = rows[len(rows) // 2 :]
    warm = resolve_with_rows(base_model, extra, base)
    cold = solve_min(base_model.with_rows(extra))
    assert warm.status is cold.status
    if cold.optimal:
        assert warm.value == pytest.approx(cold.value, abs=1e-9)


def test_degenerate_terminates():
    # highly degenerate assignment-like LP
    n = 6
    rows = []
    for i in range(3):
        a = np.zeros(n)
        a[[i, i + 3]] = 1
        rows.append((a, "=", 1.0))
        rows.append((a, "<=", 1.0))
    rows.append((np.ones(n), ">=", 3.0))
    out = solve_min(LpModel(np.zeros(n), rows))
    assert out.status is LpStatus.OPTIMAL and out.value == 0
