"""Exact rational linear programming.

Problems are  max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lo <= x <= hi.

`solve_exact` runs an active-set primal simplex over the inequality form:
a vertex is described by n linearly independent tight rows (equalities are
always in the basis), and each step drops the basis row with the smallest
index among those with a negative multiplier (Bland's rule), then moves to
the first blocking row, ties broken by smallest index.  All arithmetic uses
gmpy2 rationals.  A floating HiGHS solve supplies the starting basis; when its
active set does not give an exactly feasible vertex the solver purifies a
caller-supplied feasible point into a vertex instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linprog

from .errors import DomainError

FLOAT_TOL = 1e-7


@dataclass
class LinearProgram:
    n: int
    objective: list  # maximize objective . x
    A_ub: list = field(default_factory=list)
    b_ub: list = field(default_factory=list)
    A_eq: list = field(default_factory=list)
    b_eq: list = field(default_factory=list)
    lower: list | None = None  # None entries mean unbounded
    upper: list | None = None

    def __post_init__(self):
        if self.lower is None:
            self.lower = [None] * self.n
        if self.upper is None:
            self.upper = [None] * self.n
        for row in list(self.A_ub) + list(self.A_eq):
            if len(row) != self.n:
                raise DomainError("row length differs from the number of columns")

    def with_equalities(self, rows, rhs) -> "LinearProgram":
        return LinearProgram(self.n, self.objective, self.A_ub, self.b_ub, list(self.A_eq) + list(rows),
                             list(self.b_eq) + list(rhs), self.lower, self.upper)


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded
    x: list | None = None
    value: Fraction | float | None = None
    pivots: int = 0


# ---------------------------------------------------------------------------
# floating solve


def solve_float(lp: LinearProgram, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> LPResult:
    """HiGHS dual simplex.  Dense numpy arrays may be passed to skip conversion."""
    A_ub = np.asarray(lp.A_ub if A_ub is None else A_ub, dtype=float).reshape(-1, lp.n)
    b_ub = np.asarray(lp.b_ub if b_ub is None else b_ub, dtype=float)
    A_eq = np.asarray(lp.A_eq if A_eq is None else A_eq, dtype=float).reshape(-1, lp.n)
    b_eq = np.asarray(lp.b_eq if b_eq is None else b_eq, dtype=float)
    bounds = [(None if lo is None else float(lo), None if hi is None else float(hi))
              for lo, hi in zip(lp.lower, lp.upper)]
    res = linprog(
        -np.asarray([float(c) for c in lp.objective]),
        A_ub=A_ub if len(A_ub) else None,
        b_ub=b_ub if len(A_ub) else None,
        A_eq=A_eq if len(A_eq) else None,
        b_eq=b_eq if len(A_eq) else None,
        bounds=bounds,
        method="highs-ds",
    )
    if res.status == 2:
        return LPResult("infeasible")
    if res.status == 3:
        return LPResult("unbounded")
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    return LPResult("optimal", list(res.x), -res.fun)


class IncrementalLP:
    """Persistent HiGHS model for branch-and-bound.

    Optional equality groups are loaded once as free rows and switched on or
    off by changing their bounds, so the basis stays valid and every solve
    warm-starts from the previous one.
    """

    def __init__(self, lp: LinearProgram, groups: dict | None = None):
        import highspy

        self._hs = highspy
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        self.inf = highspy.kHighsInf
        lower = np.array([-self.inf if v is None else float(v) for v in lp.lower])
        upper = np.array([self.inf if v is None else float(v) for v in lp.upper])
        h.addVars(lp.n, lower, upper)
        h.changeColsCost(lp.n, np.arange(lp.n, dtype=np.int32), np.asarray([float(c) for c in lp.objective]))
        h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        self.h = h
        self.n = lp.n
        self.rows = 0
        self._add(np.asarray(lp.A_ub, dtype=float).reshape(-1, lp.n), None, np.asarray(lp.b_ub, dtype=float))
        if len(lp.A_eq):
            b = np.asarray(lp.b_eq, dtype=float)
            self._add(np.asarray(lp.A_eq, dtype=float).reshape(-1, lp.n), b, b)
        self.groups = {}
        for key, (A, b) in (groups or {}).items():
            A = np.asarray(A, dtype=float).reshape(-1, lp.n)
            first = self.rows
            self._add(A, np.full(len(A), -self.inf), np.full(len(A), self.inf))
            self.groups[key] = (np.arange(first, self.rows, dtype=np.int32), np.asarray(b, dtype=float))

    def _add(self, A, lo, hi):
        if not len(A):
            return
        if lo is None:
            lo = np.full(len(A), -self.inf)
        starts, idx, vals = [], [], []
        for row in A:
            nz = np.nonzero(row)[0]
            starts.append(len(idx))
            idx.extend(nz.tolist())
            vals.extend(row[nz].tolist())
        self.h.addRows(len(A), lo, hi, len(idx), np.asarray(starts, dtype=np.int32),
                       np.asarray(idx, dtype=np.int32), np.asarray(vals, dtype=float))
        self.rows += len(A)

    def enable(self, key):
        rows, b = self.groups[key]
        self.h.changeRowsBounds(len(rows), rows, b, b)

    def disable(self, key):
        rows, _ = self.groups[key]
        free = np.full(len(rows), self.inf)
        self.h.changeRowsBounds(len(rows), rows, -free, free)

    def solve(self) -> LPResult:
        self.h.run()
        status = self.h.getModelStatus()
        ms = self._hs.HighsModelStatus
        if status == ms.kOptimal:
            x = list(self.h.getSolution().col_value)
            return LPResult("optimal", x, self.h.getInfo().objective_function_value)
        if status == ms.kInfeasible:
            return LPResult("infeasible")
        if status in (ms.kUnbounded, ms.kUnboundedOrInfeasible):
            return LPResult("unbounded")
        raise RuntimeError(f"HiGHS failed: {self.h.modelStatusToString(status)}")


# ---------------------------------------------------------------------------
# exact solve


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    if isinstance(v, np.integer):
        return mpq(int(v))
    return mpq(v)


def _to_fraction(v: mpq) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


class _Rows:
    """All constraints as a.x <= b (index < n_ineq) and a.x == b (after)."""

    def __init__(self, lp: LinearProgram):
        n = lp.n
        rows, rhs = [], []
        for a, b in zip(lp.A_ub, lp.b_ub):
            rows.append([_q(v) for v in a])
            rhs.append(_q(b))
        for j in range(n):
            if lp.upper[j] is not None:
                e = [mpq(0)] * n
                e[j] = mpq(1)
                rows.append(e)
                rhs.append(_q(lp.upper[j]))
            if lp.lower[j] is not None:
                e = [mpq(0)] * n
                e[j] = mpq(-1)
                rows.append(e)
                rhs.append(-_q(lp.lower[j]))
        self.n_ineq = len(rows)
        for a, b in zip(lp.A_eq, lp.b_eq):
            rows.append([_q(v) for v in a])
            rhs.append(_q(b))
        self.rows = rows
        self.rhs = rhs
        self.nz = [[(j, v) for j, v in enumerate(r) if v] for r in rows]
        self.n = n

    def is_eq(self, i):
        return i >= self.n_ineq

    def dot(self, i, x):
        s = mpq(0)
        for j, v in self.nz[i]:
            s += v * x[j]
        return s

    def slack(self, i, x):
        return self.rhs[i] - self.dot(i, x)


class _Echelon:
    """Incremental independence test over exact rows."""

    def __init__(self, n):
        self.n = n
        self.pivots: list[tuple[int, list]] = []  # (pivot column, reduced row)

    def reduce(self, row):
        r = list(row)
        for col, prow in self.pivots:
            f = r[col]
            if f:
                for j in range(self.n):
                    if prow[j]:
                        r[j] -= f * prow[j]
        return r

    def add(self, row) -> bool:
        r = self.reduce(row)
        col = next((j for j in range(self.n) if r[j]), None)
        if col is None:
            return False
        p = r[col]
        r = [v / p for v in r]
        for k, (c2, prow) in enumerate(self.pivots):
            f = prow[col]
            if f:
                self.pivots[k] = (c2, [a - f * b for a, b in zip(prow, r)])
        self.pivots.append((col, r))
        return True

    def __len__(self):
        return len(self.pivots)

    def null_vector(self):
        """A nonzero vector orthogonal to every added row (None when full rank)."""
        used = {c for c, _ in self.pivots}
        free = next((j for j in range(self.n) if j not in used), None)
        if free is None:
            return None
        d = [mpq(0)] * self.n
        d[free] = mpq(1)
        for col, prow in self.pivots:
            d[col] = -prow[free]
        return d


def _invert(mat: list[list]) -> list[list] | None:
    n = len(mat)
    a = [list(r) + [mpq(1) if i == j else mpq(0) for j in range(n)] for i, r in enumerate(mat)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        rowc = [v / piv for v in a[c]]
        a[c] = rowc
        nzc = [j for j, v in enumerate(rowc) if v]
        for r in range(n):
            if r != c:
                f = a[r][c]
                if f:
                    ar = a[r]
                    for j in nzc:
                        ar[j] -= f * rowc[j]
    return [r[n:] for r in a]


def _solve_vertex(rows: _Rows, basis: list[int]):
    """Exact x with a_i.x = b_i for i in basis; returns (x, inverse) or None."""
    B = [rows.rows[i] for i in basis]
    inv = _invert(B)
    if inv is None:
        return None
    n = rows.n
    b = [rows.rhs[i] for i in basis]
    x = [sum((inv[j][k] * b[k] for k in range(n) if inv[j][k]), mpq(0)) for j in range(n)]
    # columns of inv: u_k with a_i.u_k = delta_ik
    cols = [[inv[j][k] for j in range(n)] for k in range(n)]
    return x, cols


def _feasible(rows: _Rows, x) -> bool:
    for i in range(len(rows.rows)):
        s = rows.slack(i, x)
        if rows.is_eq(i):
            if s != 0:
                return False
        elif s < 0:
            return False
    return True


def _crash_basis(rows: _Rows, lp: LinearProgram, xf) -> list[int] | None:
    n = rows.n
    xv = np.asarray(xf, dtype=float)
    ech = _Echelon(n)
    basis = []
    for i in range(rows.n_ineq, len(rows.rows)):
        if ech.add(rows.rows[i]):
            basis.append(i)
    cand = []
    for i in range(rows.n_ineq):
        a = np.array([float(v) for v in rows.rows[i]])
        s = float(rows.rhs[i]) - a @ xv
        if s <= FLOAT_TOL * (1 + abs(float(rows.rhs[i]))):
            cand.append((s, i))
    cand.sort(key=lambda t: (abs(t[0]), t[1]))
    for _, i in cand:
        if len(basis) == n:
            break
        if ech.add(rows.rows[i]):
            basis.append(i)
    return basis if len(basis) == n else None


def _purify(rows: _Rows, c, x, max_steps=10000):
    """Move from a feasible point to a vertex without decreasing c.x."""
    n = rows.n
    ech = _Echelon(n)
    basis = []
    for i in list(range(rows.n_ineq, len(rows.rows))) + list(range(rows.n_ineq)):
        if rows.slack(i, x) == 0 and ech.add(rows.rows[i]):
            basis.append(i)
    for _ in range(max_steps):
        if len(basis) == n:
            return x, basis
        d = ech.null_vector()
        cd = sum((c[j] * d[j] for j in range(n)), mpq(0))
        if cd < 0:
            d = [-v for v in d]
            cd = -cd
        step = _ratio(rows, x, d, set(basis))
        if step is None:
            d = [-v for v in d]
            if cd > 0:
                return "unbounded", None
            step = _ratio(rows, x, d, set(basis))
            if step is None:
                raise DomainError("feasible region contains a line; add bounds")
        t, i = step
        x = [xj + t * dj for xj, dj in zip(x, d)]
        ech.add(rows.rows[i])
        basis.append(i)
    raise RuntimeError("purification did not terminate")


def _ratio(rows: _Rows, x, d, basis: set):
    best = None
    for i in range(rows.n_ineq):
        if i in basis:
            continue
        ad = rows.dot(i, d)
        if ad > 0:
            t = rows.slack(i, x) / ad
            if best is None or t < best[0]:
                best = (t, i)
    return best


def solve_exact(lp: LinearProgram, feasible_point: Sequence | None = None, float_hint=None,
                max_pivots: int = 100000) -> LPResult:
    rows = _Rows(lp)
    n = lp.n
    c = [_q(v) for v in lp.objective]
    start = None
    hint = float_hint
    if hint is None:
        fr = solve_float(lp)
        if fr.status == "infeasible" and feasible_point is None:
            return LPResult("infeasible")
        if fr.status == "unbounded":
            return LPResult("unbounded")
        hint = fr.x if fr.status == "optimal" else None
    if hint is not None:
        basis = _crash_basis(rows, lp, hint)
        if basis is not None:
            sol = _solve_vertex(rows, basis)
            if sol is not None and _feasible(rows, sol[0]):
                start = (sol[0], basis, sol[1])
    if start is None:
        if feasible_point is None:
            raise DomainError("no exactly feasible starting vertex; supply feasible_point")
        x0 = [_q(v) for v in feasible_point]
        if not _feasible(rows, x0):
            raise DomainError("supplied point is not feasible")
        x, basis = _purify(rows, c, x0)
        if x == "unbounded":
            return LPResult("unbounded")
        sol = _solve_vertex(rows, basis)
        start = (x, basis, sol[1])
    x, basis, cols = start
    pivots = 0
    while True:
        # multipliers: c = sum_k y_k a_{basis[k]}  =>  y_k = c . u_k
        leave = None
        for k, i in sorted(enumerate(basis), key=lambda t: t[1]):
            if rows.is_eq(i):
                continue
            y = sum((c[j] * cols[k][j] for j in range(n) if cols[k][j]), mpq(0))
            if y < 0:
                leave = k
                break
        if leave is None:
            value = sum((c[j] * x[j] for j in range(n)), mpq(0))
            return LPResult("optimal", [_to_fraction(v) for v in x], _to_fraction(value), pivots)
        if pivots >= max_pivots:
            raise RuntimeError("pivot limit reached")
        d = [-v for v in cols[leave]]
        step = _ratio(rows, x, d, set(basis))
        if step is None:
            return LPResult("unbounded", pivots=pivots)
        t, enter = step
        x = [xj + t * dj for xj, dj in zip(x, d)]
        a_new = rows.nz[enter]
        u_r = cols[leave]
        denom = sum((v * u_r[j] for j, v in a_new), mpq(0))
        new_r = [v / denom for v in u_r]
        for k in range(n):
            if k == leave:
                continue
            f = sum((v * cols[k][j] for j, v in a_new), mpq(0))
            if f:
                cols[k] = [a - f * b for a, b in zip(cols[k], new_r)]
        cols[leave] = new_r
        basis[leave] = enter
        pivots += 1
