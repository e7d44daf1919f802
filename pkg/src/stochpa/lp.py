"""Linear programs: representation, solving and feasibility checks.

Two backends sit behind :func:`solve`:

``"highs"``
    scipy's HiGHS bindings; the default, used for the large systems the
    value-set DP assembles.
``"simplex"``
    a dense two-phase tableau simplex with Bland's rule, written here so
    small programs can be solved without any external solver and so that
    degenerate cycling is provably avoided.

Every solution returned by either backend is re-checked against all rows
and bounds at ``feas_tol`` before it leaves this module.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

FEAS_TOL = 1e-8
OBJ_TOL = 1e-7

LE, EQ, GE = -1, 0, 1
_REL_NAMES = {"<=": LE, "=": EQ, "==": EQ, ">=": GE, LE: LE, EQ: EQ, GE: GE}


class Sense(enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"
    FEASIBILITY = "feasibility"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpNumericalError(RuntimeError):
    """The solver could not certify any status."""


@dataclass(frozen=True)
class LpResult:
    status: Status
    solution: Optional[np.ndarray] = None
    objective_value: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``sense c.x`` subject to ``rows[i].x (relation_i) rhs_i`` and ``lower <= x <= upper``.

    ``rows`` is a CSR matrix, one sparse row per constraint.  Instances are
    immutable; :meth:`replace` shares the compiled matrix, which makes
    re-solving one system under many objectives or bound fixings cheap.
    """

    num_vars: int
    objective: np.ndarray
    sense: Sense
    rows: sp.csr_matrix
    relations: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    _split: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.num_vars
        if self.rows.shape[1] != n:
            raise ValueError(f"constraint matrix has {self.rows.shape[1]} columns, expected {n}")
        if len(self.objective) != n or len(self.lower) != n or len(self.upper) != n:
            raise ValueError("objective/bounds length must equal num_vars")
        if len(self.relations) != self.rows.shape[0] or len(self.rhs) != self.rows.shape[0]:
            raise ValueError("one relation and one rhs per row required")
        if (np.isnan(self.rows.data).any() or np.isnan(self.objective).any()
                or np.isnan(self.rhs).any()):
            raise ValueError("NaN coefficient")

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    def replace(self, **changes) -> "LinearProgram":
        if "objective" in changes and isinstance(changes["objective"], Mapping):
            changes["objective"] = _dense(changes["objective"], self.num_vars)
        if any(k in changes for k in ("rows", "relations", "rhs")):
            return replace(self, _split={}, **changes)
        return replace(self, _split=self._split, **changes)

    def with_rows(self, rows, relations, rhs) -> "LinearProgram":
        """Append extra constraint rows (CSR/dense matrix, relation codes, rhs)."""
        extra = sp.csr_matrix(rows, shape=(len(rhs), self.num_vars))
        return replace(self, rows=sp.vstack([self.rows, extra], format="csr"),
                       relations=np.concatenate([self.relations, np.asarray(relations, dtype=np.int8)]),
                       rhs=np.concatenate([self.rhs, np.asarray(rhs, dtype=float)]),
                       _split={})

    def violation(self, x: np.ndarray) -> float:
        """Largest violation of any row or bound at ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.num_rows:
            ax = self.rows @ x
            d = ax - self.rhs
            worst = max(worst,
                        float(np.max(np.where(self.relations == LE, d, 0.0), initial=0.0)),
                        float(np.max(np.where(self.relations == GE, -d, 0.0), initial=0.0)),
                        float(np.max(np.where(self.relations == EQ, np.abs(d), 0.0), initial=0.0)))
        lo = np.where(np.isfinite(self.lower), self.lower - x, 0.0)
        hi = np.where(np.isfinite(self.upper), x - self.upper, 0.0)
        return max(worst, float(np.max(lo, initial=0.0)), float(np.max(hi, initial=0.0)))

    def matrices(self):
        """(A_ub, b_ub, A_eq, b_eq) with >= rows negated into <= form."""
        if not self._split:
            rel = self.relations
            le = np.flatnonzero(rel == LE)
            ge = np.flatnonzero(rel == GE)
            eq = np.flatnonzero(rel == EQ)
            A = self.rows
            A_ub = sp.vstack([A[le], -A[ge]], format="csr")
            b_ub = np.concatenate([self.rhs[le], -self.rhs[ge]])
            self._split.update(A_ub=A_ub, b_ub=b_ub, A_eq=A[eq], b_eq=self.rhs[eq])
        s = self._split
        return s["A_ub"], s["b_ub"], s["A_eq"], s["b_eq"]


def _dense(coeffs, n):
    out = np.zeros(n)
    if coeffs is None:
        return out
    if isinstance(coeffs, Mapping):
        for j, v in coeffs.items():
            if not 0 <= j < n:
                raise ValueError(f"variable index {j} out of range 0..{n - 1}")
            out[j] += v
        return out
    return np.asarray(coeffs, dtype=float).copy()


class LpBuilder:
    """Accumulates sparse rows; :meth:`build` compiles a :class:`LinearProgram`."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self._ri: list = []
        self._ci: list = []
        self._v: list = []
        self._rel: list = []
        self._rhs: list = []
        self.lower = np.zeros(num_vars)
        self.upper = np.full(num_vars, np.inf)

    def add_constraint(self, coeffs, relation, rhs: float) -> int:
        """Add ``sum coeffs[j] x_j  relation  rhs``; coeffs is a dict or (indices, values)."""
        r = len(self._rhs)
        if isinstance(coeffs, Mapping):
            idx, vals = list(coeffs.keys()), list(coeffs.values())
        else:
            idx, vals = coeffs
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.num_vars):
            raise ValueError(f"variable index out of range 0..{self.num_vars - 1}")
        self._ri.append(np.full(idx.size, r, dtype=np.int64))
        self._ci.append(idx)
        self._v.append(np.asarray(vals, dtype=float))
        self._rel.append(_REL_NAMES[relation])
        self._rhs.append(float(rhs))
        return r

    def set_bounds(self, j, lower=None, upper=None):
        if lower is not None:
            self.lower[j] = lower
        if upper is not None:
            self.upper[j] = upper

    def build(self, objective=None, sense: Sense = Sense.FEASIBILITY) -> LinearProgram:
        m = len(self._rhs)
        if m:
            ri, ci, v = np.concatenate(self._ri), np.concatenate(self._ci), np.concatenate(self._v)
        else:
            ri = ci = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        A = sp.csr_matrix((v, (ri, ci)), shape=(m, self.num_vars))
        A.sum_duplicates()
        return LinearProgram(self.num_vars, _dense(objective, self.num_vars), sense, A,
                             np.asarray(self._rel, dtype=np.int8), np.asarray(self._rhs, dtype=float),
                             self.lower.copy(), self.upper.copy())


# ---------------------------------------------------------------- HiGHS backend

_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _solve_highs(p: LinearProgram, method: str) -> LpResult:
    A_ub, b_ub, A_eq, b_eq = p.matrices()
    c = p.objective
    if p.sense is Sense.MAXIMIZE:
        c = -c
    elif p.sense is Sense.FEASIBILITY:
        c = np.zeros(p.num_vars)
    bounds = np.column_stack([np.where(np.isfinite(p.lower), p.lower, -np.inf),
                              np.where(np.isfinite(p.upper), p.upper, np.inf)])
    res = linprog(c, A_ub=A_ub if A_ub.shape[0] else None, b_ub=b_ub if A_ub.shape[0] else None,
                  A_eq=A_eq if A_eq.shape[0] else None, b_eq=b_eq if A_eq.shape[0] else None,
                  bounds=bounds, method=method, options=_HIGHS_OPTIONS)
    if res.status == 0:
        return _finish(p, res.x)
    if res.status == 2:
        return LpResult(Status.INFEASIBLE)
    if res.status == 3:
        return LpResult(Status.UNBOUNDED)
    raise LpNumericalError(f"HiGHS ({method}) failed: {res.message}")


def _finish(p: LinearProgram, x: np.ndarray) -> LpResult:
    x = np.asarray(x, dtype=float)
    if p.sense is Sense.FEASIBILITY:
        return LpResult(Status.FEASIBLE, x)
    return LpResult(Status.OPTIMAL, x, float(p.objective @ x))


# ------------------------------------------------------------- simplex backend


def _standard_form(p: LinearProgram):
    """Rewrite as  min c.y  s.t.  A y = b, y >= 0, b >= 0.

    Returns (A, b, c, recover, n_struct, basis_hint) where recover(y) maps
    back to the original variables.
    """
    n = p.num_vars
    dense = p.rows.toarray()
    cols = []          # per original var: list of (column-sign) in y
    offset = np.zeros(n)
    extra_rows = []    # (coef vector over y-columns added later, rhs)
    ncol = 0
    ub_rows = []
    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            cols.append([(ncol, 1.0)])
            if np.isfinite(hi):
                ub_rows.append((ncol, hi - lo))
            ncol += 1
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append([(ncol, -1.0)])
            ncol += 1
        else:
            cols.append([(ncol, 1.0), (ncol + 1, -1.0)])
            ncol += 2
    m0 = p.num_rows
    T = np.zeros((m0, ncol))
    for j in range(n):
        for k, sgn in cols[j]:
            T[:, k] += sgn * dense[:, j]
    b = p.rhs - dense @ offset
    rel = p.relations.astype(int).copy()
    for k, cap in ub_rows:
        row = np.zeros(ncol)
        row[k] = 1.0
        T = np.vstack([T, row])
        b = np.append(b, cap)
        rel = np.append(rel, LE)
    c_orig = p.objective if p.sense is Sense.MINIMIZE else -p.objective
    if p.sense is Sense.FEASIBILITY:
        c_orig = np.zeros(n)
    cy = np.zeros(ncol)
    for j in range(n):
        for k, sgn in cols[j]:
            cy[k] += sgn * c_orig[j]
    m = T.shape[0]
    # slacks
    nslack = int(np.sum(rel != EQ))
    A = np.zeros((m, ncol + nslack))
    A[:, :ncol] = T
    s = ncol
    slack_of = {}
    for i in range(m):
        if rel[i] == LE:
            A[i, s] = 1.0
            slack_of[i] = s
            s += 1
        elif rel[i] == GE:
            A[i, s] = -1.0
            slack_of[i] = s
            s += 1
    neg = b < 0
    A[neg] *= -1
    b = np.where(neg, -b, b)
    c = np.concatenate([cy, np.zeros(nslack)])

    def recover(y):
        x = offset.copy()
        for j in range(n):
            for k, sgn in cols[j]:
                x[j] += sgn * y[k]
        return x

    hint = {}
    for i, col in slack_of.items():
        if A[i, col] > 0:
            hint[i] = col
    return A, b, c, recover, hint


def _pivot(tab, r, k):
    tab[r] /= tab[r, k]
    col = tab[:, k].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])


def _simplex_iterate(tab, basis, ncols_allowed, max_iter, piv_tol=1e-11):
    """Minimize the objective in the last tableau row with Bland's rule."""
    m = tab.shape[0] - 1
    for _ in range(max_iter):
        red = tab[-1, :ncols_allowed]
        entering = np.flatnonzero(red < -1e-11)
        if entering.size == 0:
            return "optimal"
        k = int(entering[0])
        colk = tab[:m, k]
        pos = np.flatnonzero(colk > piv_tol)
        if pos.size == 0:
            return "unbounded"
        ratios = tab[pos, -1] / colk[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(tab, r, k)
        basis[r] = k
    raise LpNumericalError(f"simplex did not terminate within {max_iter} pivots")


def _solve_simplex(p: LinearProgram, feas_tol: float, max_iter: int = 50_000) -> LpResult:
    A, b, c, recover, hint = _standard_form(p)
    m, n = A.shape
    art_rows = [i for i in range(m) if i not in hint]
    na = len(art_rows)
    tab = np.zeros((m + 1, n + na + 1))
    tab[:m, :n] = A
    tab[:m, -1] = b
    basis = [-1] * m
    for i, col in hint.items():
        basis[i] = col
    for a, i in enumerate(art_rows):
        tab[i, n + a] = 1.0
        basis[i] = n + a
    # phase 1: minimize the sum of artificials
    tab[-1, n:n + na] = 1.0
    for i in art_rows:
        tab[-1] -= tab[i]
    if na:
        _simplex_iterate(tab, basis, n + na, max_iter)
        if -tab[-1, -1] > feas_tol:
            return LpResult(Status.INFEASIBLE)
        # drive artificials out of the basis
        keep = []
        for r in range(m):
            if basis[r] >= n:
                nz = np.flatnonzero(np.abs(tab[r, :n]) > 1e-9)
                if nz.size:
                    _pivot(tab, r, int(nz[0]))
                    basis[r] = int(nz[0])
                    keep.append(r)
            else:
                keep.append(r)
        tab = np.vstack([tab[keep], tab[-1:]])
        basis = [basis[r] for r in keep]
        m = len(keep)
    tab = np.delete(tab, np.s_[n:n + na], axis=1)
    # phase 2
    tab[-1, :] = 0.0
    tab[-1, :n] = c
    for r in range(m):
        if abs(tab[-1, basis[r]]) > 0:
            tab[-1] -= tab[-1, basis[r]] * tab[r]
    outcome = _simplex_iterate(tab, basis, n, max_iter)
    if outcome == "unbounded" and p.sense is not Sense.FEASIBILITY:
        return LpResult(Status.UNBOUNDED)
    y = np.zeros(n)
    for r in range(m):
        y[basis[r]] = tab[r, -1]
    return _finish(p, recover(y))


# -------------------------------------------------------------------- public


def solve(p: LinearProgram, method: str = "highs", feas_tol: Optional[float] = None) -> LpResult:
    """Solve ``p``; any returned solution satisfies all constraints within ``feas_tol``.

    Raises :class:`LpNumericalError` when no backend can certify a status.
    """
    if feas_tol is None:
        feas_tol = FEAS_TOL
    if method == "simplex":
        attempts = [lambda: _solve_simplex(p, feas_tol)]
    elif method == "highs":
        attempts = [lambda: _solve_highs(p, "highs-ds"), lambda: _solve_highs(p, "highs-ipm")]
        if p.num_vars * max(p.num_rows, 1) <= 250_000:
            attempts.append(lambda: _solve_simplex(p, feas_tol))
    else:
        raise ValueError(f"unknown LP method {method!r}")
    errors = []
    for attempt in attempts:
        try:
            res = attempt()
        except LpNumericalError as exc:
            errors.append(str(exc))
            continue
        if res.solution is not None:
            viol = p.violation(res.solution)
            if viol > feas_tol:
                errors.append(f"solution violates constraints by {viol:.3g}")
                continue
        return res
    raise LpNumericalError("; ".join(errors))


def check_feasible(p: LinearProgram, method: str = "highs", feas_tol: Optional[float] = None):
    """Return (True, witness) or (False, None); the objective is ignored."""
    res = solve(p.replace(sense=Sense.FEASIBILITY), method=method, feas_tol=feas_tol)
    if res.ok:
        return True, res.solution
    return False, None


def to_lp_text(p: LinearProgram, names=None) -> str:
    """Render ``p`` in CPLEX LP text format for cross-checking with other solvers."""
    names = names or [f"x{j}" for j in range(p.num_vars)]

    def expr(idx, vals):
        parts = []
        for j, v in zip(idx, vals):
            if v == 0:
                continue
            parts.append(f"{'-' if v < 0 else '+'} {float(abs(v))!r} {names[j]}")
        text = " ".join(parts) or "0 " + names[0]
        return text[2:] if text.startswith("+ ") else text

    lines = ["Maximize" if p.sense is Sense.MAXIMIZE else "Minimize"]
    obj = p.objective if p.sense is not Sense.FEASIBILITY else np.zeros(p.num_vars)
    nz = np.flatnonzero(obj)
    lines.append(" obj: " + expr(nz, obj[nz]))
    lines.append("Subject To")
    ops = {LE: "<=", EQ: "=", GE: ">="}
    for i in range(p.num_rows):
        row = p.rows.getrow(i)
        lines.append(f" c{i}: {expr(row.indices, row.data)} {ops[int(p.relations[i])]} {float(p.rhs[i])!r}")
    lines.append("Bounds")
    for j in range(p.num_vars):
        lo, hi = p.lower[j], p.upper[j]
        lo_s = repr(float(lo)) if np.isfinite(lo) else "-inf"
        hi_s = repr(float(hi)) if np.isfinite(hi) else "+inf"
        lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
    lines.append("End")
    return "\n".join(lines) + "\n"
