"""Dense bounded-variable simplex for the small LPs used across the package.

Every row ``a x (=|<=|>=) b`` receives a logical column so the initial basis is
the identity. Structural variables are placed at whichever finite bound their
cost prefers, which makes the logical basis dual feasible; a bounded dual
simplex then drives out primal infeasibility. The same routine re-optimizes
after rows are appended or bounds are tightened, which is exactly what the
cutting-plane loop and the branch-and-bound tree need.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
BIG_BOUND = 1e9
REFACTOR_EVERY = 64


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


_SENSES = ("=", "<=", ">=")


@dataclass
class LpModel:
    """``min objective @ x`` subject to ``rows`` and ``lower <= x <= upper``.

    ``rows`` holds ``(coefficients, sense, rhs)`` triples with sense in
    ``{"=", "<=", ">="}``. Bounds default to ``[0, 1]``.
    """

    objective: np.ndarray
    rows: list[tuple[np.ndarray, str, float]] = field(default_factory=list)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).copy()
        self.upper = np.ones(n) if self.upper is None else np.asarray(self.upper, dtype=float).copy()
        self.rows = [_check_row(r, n) for r in self.rows]
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound vectors must match the objective length")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds must not be NaN")
        if np.any(np.isinf(self.lower)):
            raise ValueError("lower bounds must be finite")

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def matrix(self) -> tuple[np.ndarray, list[str], np.ndarray]:
        n = self.n_vars
        if not self.rows:
            return np.zeros((0, n)), [], np.zeros(0)
        a = np.vstack([r[0] for r in self.rows])
        return a, [r[1] for r in self.rows], np.array([r[2] for r in self.rows], dtype=float)

    def with_rows(self, new_rows) -> "LpModel":
        return LpModel(self.objective, list(self.rows) + list(new_rows), self.lower, self.upper)


def _check_row(row, n):
    coef, sense, rhs = row
    coef = np.asarray(coef, dtype=float)
    if coef.shape != (n,):
        raise ValueError(f"row has {coef.size} coefficients, expected {n}")
    if sense not in _SENSES:
        raise ValueError(f"unknown row sense {sense!r}")
    if not (np.all(np.isfinite(coef)) and np.isfinite(rhs)):
        raise ValueError("row data must be finite")
    return coef, sense, float(rhs)


@dataclass
class LpOutcome:
    status: LpStatus
    value: float
    primal: np.ndarray | None
    iterations: int = 0
    # opaque warm-start data: (basis, nonbasic-at-upper flags)
    basis: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class DualSimplex:
    """Reusable solver state: rows can be appended and bounds changed
    between calls to :meth:`solve`, keeping the last basis as a warm start.

    Warm starts remain valid because appending rows (new logicals enter the
    basis) and moving bounds never destroy dual feasibility.
    """

    def __init__(self, model: LpModel):
        self.n = model.n_vars
        a, senses, rhs = model.matrix()
        self.cost_struct = model.objective.copy()
        self.a = a
        self.rhs = rhs
        self.lo = model.lower.copy()
        self.hi = model.upper.copy()
        self.log_lo = np.array([_logical_bounds(s)[0] for s in senses], dtype=float)
        self.log_hi = np.array([_logical_bounds(s)[1] for s in senses], dtype=float)
        self.iterations = 0
        self._reset_basis()

    @property
    def m(self) -> int:
        return self.a.shape[0]

    # -- model edits -----------------------------------------------------

    def add_rows(self, rows) -> None:
        rows = [_check_row(r, self.n) for r in rows]
        if not rows:
            return
        old_m = self.m
        self.a = np.vstack([self.a] + [r[0][None, :] for r in rows])
        self.rhs = np.concatenate([self.rhs, [r[2] for r in rows]])
        lo = [_logical_bounds(r[1])[0] for r in rows]
        hi = [_logical_bounds(r[1])[1] for r in rows]
        self.log_lo = np.concatenate([self.log_lo, lo])
        self.log_hi = np.concatenate([self.log_hi, hi])
        # logical of row i is column n + i, so appended rows leave existing
        # column indices untouched and their logicals enter the basis
        k = len(rows)
        self.basis = list(self.basis) + [self.n + old_m + t for t in range(k)]
        self.at_upper = np.concatenate([self.at_upper, np.zeros(k, dtype=bool)])

    def set_bounds(self, j: int, lo: float, hi: float) -> None:
        self.lo[j] = lo
        self.hi[j] = hi

    def snapshot(self):
        return list(self.basis), self.at_upper.copy()

    def restore(self, snap) -> None:
        basis, at_upper = snap
        m = self.m
        # snapshots taken before rows were appended: extend with new logicals
        basis = list(basis) + [self.n + i for i in range(len(basis), m)]
        at_upper = np.concatenate([at_upper, np.zeros(self.n + m - at_upper.size, dtype=bool)])
        self.basis = basis
        self.at_upper = at_upper

    # -- internals -------------------------------------------------------

    def _reset_basis(self):
        n, m = self.n, self.m
        self.basis = [n + i for i in range(m)]
        self.at_upper = np.zeros(n + m, dtype=bool)

    def _bounds(self):
        return np.concatenate([self.lo, self.log_lo]), np.concatenate([self.hi, self.log_hi])

    def _full(self):
        return np.hstack([self.a, np.eye(self.m)])

    def solve(self, max_iter: int | None = None) -> LpOutcome:
        n, m = self.n, self.m
        full = self._full()
        lo, hi = self._bounds()
        hi_eff = np.where(np.isinf(hi), BIG_BOUND, hi)
        lo_eff = np.where(np.isinf(lo), -BIG_BOUND, lo)
        c = np.concatenate([self.cost_struct, np.zeros(m)])
        basic = np.zeros(n + m, dtype=bool)
        basic[self.basis] = True

        if max_iter is None:
            max_iter = 50 * (n + m) + 1000
        bland_after = 3 * (n + m)

        # basis sanity: fall back to the logical basis if singular
        try:
            binv = np.linalg.inv(full[:, self.basis]) if m else np.zeros((0, 0))
        except np.linalg.LinAlgError:
            self._reset_basis()
            basic[:] = False
            basic[self.basis] = True
            binv = np.eye(m)

        # place nonbasics on the bound their reduced cost prefers
        def reduced_costs():
            y = c[self.basis] @ binv if m else np.zeros(0)
            return c - y @ full if m else c.copy()

        d = reduced_costs()
        nb = ~basic
        fixed = hi - lo <= PRIMAL_TOL
        want_up = nb & (d < -DUAL_TOL) & ~fixed
        want_lo = nb & (d > DUAL_TOL)
        self.at_upper[want_up] = True
        self.at_upper[want_lo] = False
        self.at_upper[basic] = False
        self.at_upper[fixed & nb] = False
        self.at_upper[nb & np.isinf(lo)] = True

        it = 0
        since_progress = 0
        bland = False
        since_refactor = 0
        status = None
        while True:
            xn = np.where(self.at_upper, hi_eff, lo_eff)
            xn[basic] = 0.0
            if m:
                xb = binv @ (self.rhs - full @ xn)
            else:
                xb = np.zeros(0)
            blo = lo[self.basis]
            bhi = hi[self.basis]
            infeas_lo = blo - xb
            infeas_hi = xb - bhi
            viol = np.maximum(infeas_lo, infeas_hi)
            if m == 0 or viol.max(initial=-np.inf) <= PRIMAL_TOL:
                status = LpStatus.OPTIMAL
                break
            if it >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            cand = np.flatnonzero(viol > PRIMAL_TOL)
            if bland:
                r = min(cand, key=lambda i: self.basis[i])
            else:
                r = cand[np.argmax(viol[cand])]
            to_lower = infeas_lo[r] > 0
            alpha = binv[r] @ full
            d = reduced_costs()
            nbmask = ~basic & ~fixed
            if to_lower:
                ok = nbmask & (((~self.at_upper) & (alpha < -PIVOT_TOL)) | (self.at_upper & (alpha > PIVOT_TOL)))
            else:
                ok = nbmask & (((~self.at_upper) & (alpha > PIVOT_TOL)) | (self.at_upper & (alpha < -PIVOT_TOL)))
            idx = np.flatnonzero(ok)
            if idx.size == 0:
                status = LpStatus.INFEASIBLE
                break
            ratios = np.abs(d[idx]) / np.abs(alpha[idx])
            tmin = ratios.min()
            tie = idx[ratios <= tmin + DUAL_TOL]
            if bland:
                q = int(tie.min())
            else:
                q = int(tie[np.argmax(np.abs(alpha[tie]))])

            leaving = self.basis[r]
            self.at_upper[leaving] = not to_lower
            basic[leaving] = False
            basic[q] = True
            self.basis[r] = q
            self.at_upper[q] = False
            it += 1
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                binv = np.linalg.inv(full[:, self.basis])
                since_refactor = 0
            else:
                col = binv @ full[:, q]
                piv = col[r]
                binv[r] /= piv
                others = np.arange(m) != r
                binv[others] -= np.outer(col[others], binv[r])

            # a zero dual step is a degenerate pivot
            if tmin > DUAL_TOL:
                since_progress = 0
            else:
                since_progress += 1
                if since_progress > bland_after:
                    bland = True

        self.iterations += it
        if status is LpStatus.INFEASIBLE:
            return LpOutcome(status, np.inf, None, it, self.snapshot())

        x = np.where(self.at_upper, hi_eff, lo_eff)
        x[self.basis] = xb
        xs = x[:n].copy()
        # snap values sitting at bounds to the exact bound
        xs = np.where(np.abs(xs - self.lo) <= PRIMAL_TOL, self.lo, xs)
        xs = np.where(np.abs(xs - self.hi) <= PRIMAL_TOL, self.hi, xs)
        if np.any(np.abs(x) >= BIG_BOUND * 0.5):
            return LpOutcome(LpStatus.UNBOUNDED, -np.inf, None, it, self.snapshot())
        return LpOutcome(LpStatus.OPTIMAL, float(self.cost_struct @ xs), xs, it, self.snapshot())


def _logical_bounds(sense):
    if sense == "=":
        return 0.0, 0.0
    if sense == "<=":
        return 0.0, np.inf
    return -np.inf, 0.0


def solve_min(model: LpModel) -> LpOutcome:
    """Solve ``model`` from the logical basis."""
    return DualSimplex(model).solve()


def resolve_with_rows(model: LpModel, new_rows, previous: LpOutcome | None = None) -> LpOutcome:
    """Solve ``model`` extended by ``new_rows``, warm-starting from ``previous``.

    The result coincides with a fresh solve of the extended model; only the
    pivot count changes.
    """
    solver = DualSimplex(model)
    if previous is not None and previous.basis is not None:
        solver.restore(previous.basis)
    solver.add_rows(new_rows)
    return solver.solve()
