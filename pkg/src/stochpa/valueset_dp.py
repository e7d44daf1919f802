"""Backward induction over inducible value polytopes.

For every step ``h`` and preceding state-action key ``o`` the set of value
vectors an IC commitment can induce from there is the projection onto ``v``
of a polytope over

* ``v``      -- the target value vector (2D, or 3D for the delta-IC variant),
* ``pi``     -- one-step policy  pi(ap, aa | wp, reported wa),
* ``z``      -- pi * v' for every one-step interaction (products linearized),
* ``y``      -- upper bounds on the agent's best deviation payoff per
                (recommendation, true obs, reported obs),
* ``u``      -- (3D only) per true agent observation best-report payoff.

The projection is approximated from inside: the principal-value axis is
cut into slices ``w = 0, delta, 2 delta, ..., H``; on each slice the agent's
min and max are found by LP, the two agent-extreme points are added, and
the polytope is the convex hull of all these witnesses.  Every point kept is
an LP witness, so the approximation never claims an uninducible value, and
the agent's value range is never shrunk.

IC rows are multiplied through by the agent-observation marginal instead of
conditioning on it, which makes zero-marginal observations vacuous rather
than undefined.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp

from . import lp
from .geometry import ValuePolytope
from .lp import EQ, GE, LE, LinearProgram, Sense, Status
from .model import ROOT, GameModel, Key

log = logging.getLogger(__name__)


class EmptyInducibleSetError(RuntimeError):
    pass


class StructuralError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Linearized one-step inducibility system for a fixed (h, o)."""

    model: GameModel
    h: int
    o: Key
    dim: int
    program: LinearProgram
    pi_offset: int
    z_offset: int
    y_offset: int
    u_offset: int
    next_polytopes: dict = field(repr=False)

    # ---- index helpers
    @property
    def pi_shape(self):
        nS, nAP, nAA, nOP, nOA = self.model.shape
        return (nOP, nOA, nAP, nAA)

    @property
    def sigma_shape(self):
        """(s, wp, wa, reported wa, ap, recommended aa, played aa)."""
        nS, nAP, nAA, nOP, nOA = self.model.shape
        return (nS, nOP, nOA, nOA, nAP, nAA, nAA)

    @property
    def n_pi(self) -> int:
        return int(np.prod(self.pi_shape))

    @property
    def n_z(self) -> int:
        return int(np.prod(self.sigma_shape)) * self.dim

    @property
    def n_y(self) -> int:
        nS, nAP, nAA, nOP, nOA = self.model.shape
        return nAA * nOA * nOA

    def pi_of(self, x: np.ndarray) -> np.ndarray:
        return x[self.pi_offset:self.pi_offset + self.n_pi].reshape(self.pi_shape)

    def z_of(self, x: np.ndarray) -> np.ndarray:
        return x[self.z_offset:self.z_offset + self.n_z].reshape(self.sigma_shape + (self.dim,))

    # ---- derived programs
    def fixed(self, target=None, objective=None, sense=Sense.FEASIBILITY,
              lower=None, upper=None) -> LinearProgram:
        lo = self.program.lower.copy()
        hi = self.program.upper.copy()
        if target is not None:
            t = np.asarray(target, dtype=float)
            lo[:self.dim] = t
            hi[:self.dim] = t
        if lower is not None:
            for k, val in lower.items():
                lo[k] = val
        if upper is not None:
            for k, val in upper.items():
                hi[k] = val
        obj = np.zeros(self.program.num_vars)
        if objective is not None:
            for k, c in objective.items():
                obj[k] = c
        return self.program.replace(objective=obj, sense=sense, lower=lo, upper=hi)

    def is_feasible(self, target, feas_tol=None) -> bool:
        ok, _ = lp.check_feasible(self.fixed(target), feas_tol=feas_tol)
        return ok


def _sigma_grid(shape):
    return [g.ravel() for g in np.indices(shape)]


def assemble_constraints(m: GameModel, h: int, o: Key, next_polytopes: dict,
                         dim: int = 2) -> ConstraintSystem:
    """Build the linearized inducibility system for (h, o).

    ``next_polytopes`` maps every key (s, ap, aa) to the step-(h+1) polytope.
    With ``dim=3`` the value vector is (v^P, v^A, v*^A) and the per-observation
    IC rows are replaced by an upper bound on the agent's best attainable value.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if not 1 <= h < m.horizon:
        raise ValueError(f"systems exist for steps 1..{m.horizon - 1}, got {h}")
    nS, nAP, nAA, nOP, nOA = m.shape
    H = m.horizon
    q = m.next_distribution(h, o)                       # (S, OP, OA)
    rP = m.rewards_principal[h - 1]                     # (S, AP, AA)
    rA = m.rewards_agent[h - 1]
    for key in m.keys(h + 1):
        poly = next_polytopes.get(key)
        if poly is None or poly.vertices.shape[0] == 0:
            raise StructuralError(f"missing or empty step-{h + 1} polytope for key {tuple(key)}")
        if poly.dimension != dim:
            raise StructuralError(f"step-{h + 1} polytope {tuple(key)} has dimension {poly.dimension}, expected {dim}")

    pi_shape = (nOP, nOA, nAP, nAA)
    sig_shape = (nS, nOP, nOA, nOA, nAP, nAA, nAA)
    n_pi = int(np.prod(pi_shape))
    n_sig = int(np.prod(sig_shape))
    PI0 = dim
    Z0 = PI0 + n_pi
    Y0 = Z0 + n_sig * dim
    U0 = Y0 + nAA * nOA * nOA
    nvars = U0 + (nOA if dim == 3 else 0)

    def pi_idx(wp, rep, ap, aa):
        return PI0 + np.ravel_multi_index((wp, rep, ap, aa), pi_shape)

    def z_idx(s, wp, wa, rep, ap, aa, pa, k):
        return Z0 + np.ravel_multi_index((s, wp, wa, rep, ap, aa, pa), sig_shape) * dim + k

    def y_idx(aa, wa, rep):
        return Y0 + np.ravel_multi_index((aa, wa, rep), (nAA, nOA, nOA))

    ri, ci, vals, rel, rhs = [], [], [], [], []
    nrow = 0

    def add_block(rows, cols, coef, n_new, relation, b):
        nonlocal nrow
        rows = np.asarray(rows, dtype=np.int64)
        coef = np.asarray(coef, dtype=float)
        mask = coef != 0.0
        ri.append(rows[mask] + nrow)
        ci.append(np.asarray(cols, dtype=np.int64)[mask])
        vals.append(coef[mask])
        rel.append(np.full(n_new, relation, dtype=np.int8))
        rhs.append(np.broadcast_to(np.asarray(b, dtype=float), (n_new,)).copy())
        nrow += n_new

    # truthful tuples: (s, wp, wa, ap, aa)
    s, wp, wa, ap, aa = _sigma_grid((nS, nOP, nOA, nAP, nAA))
    qw = q[s, wp, wa]

    # 1. value rows: v_k - sum q (r_k pi + z_k) = 0, for k = P, A
    for k, r in enumerate((rP, rA)):
        rows = np.concatenate([[0], np.zeros(s.size, dtype=np.int64), np.zeros(s.size, dtype=np.int64)])
        cols = np.concatenate([[k], pi_idx(wp, wa, ap, aa), z_idx(s, wp, wa, wa, ap, aa, aa, k)])
        coef = np.concatenate([[1.0], -qw * r[s, ap, aa], -qw])
        add_block(rows, cols, coef, 1, EQ, 0.0)

    # 2. deviation upper bounds, one row per (aa, wa, rep, pa):
    #    y(aa, wa, rep) - sum_{s, wp, ap} q(s, wp, wa) (rA(s, ap, pa) pi(wp, rep, ap, aa) + z_dev(...)) >= 0
    zk = 1 if dim == 2 else 2
    g_aa, g_wa, g_rep, g_pa = _sigma_grid((nAA, nOA, nOA, nAA))
    n_dev = g_aa.size
    inner = _sigma_grid((nS, nOP, nAP))
    blk_rows, blk_cols, blk_coef = [np.arange(n_dev)], [y_idx(g_aa, g_wa, g_rep)], [np.ones(n_dev)]
    for s_, wp_, ap_ in zip(*inner):
        qq = q[s_, wp_, g_wa]
        blk_rows.append(np.arange(n_dev))
        blk_cols.append(pi_idx(wp_, g_rep, ap_, g_aa))
        blk_coef.append(-qq * rA[s_, ap_, g_pa])
        blk_rows.append(np.arange(n_dev))
        blk_cols.append(z_idx(s_, wp_, g_wa, g_rep, ap_, g_aa, g_pa, zk))
        blk_coef.append(-qq)
    add_block(np.concatenate(blk_rows), np.concatenate(blk_cols), np.concatenate(blk_coef), n_dev, GE, 0.0)

    g_wa2, g_rep2 = _sigma_grid((nOA, nOA))
    n_ic = g_wa2.size
    if dim == 2:
        # 3. IC rows, one per (wa, rep): truthful agent value - sum_aa y(aa, wa, rep) >= 0
        blk_rows, blk_cols, blk_coef = [], [], []
        for ic in range(n_ic):
            w_, r_ = g_wa2[ic], g_rep2[ic]
            m_ = wa == w_
            blk_rows.append(np.full(int(m_.sum()) * 2, ic))
            blk_cols.append(np.concatenate([pi_idx(wp[m_], wa[m_], ap[m_], aa[m_]),
                                            z_idx(s[m_], wp[m_], wa[m_], wa[m_], ap[m_], aa[m_], aa[m_], 1)]))
            blk_coef.append(np.concatenate([qw[m_] * rA[s[m_], ap[m_], aa[m_]], qw[m_]]))
            blk_rows.append(np.full(nAA, ic))
            blk_cols.append(y_idx(np.arange(nAA), w_, r_))
            blk_coef.append(-np.ones(nAA))
        add_block(np.concatenate(blk_rows), np.concatenate(blk_cols), np.concatenate(blk_coef), n_ic, GE, 0.0)
    else:
        # 3'. u(wa) - sum_aa y(aa, wa, rep) >= 0 ;  v*_A - sum_wa u(wa) >= 0
        blk_rows, blk_cols, blk_coef = [], [], []
        for ic in range(n_ic):
            w_, r_ = g_wa2[ic], g_rep2[ic]
            blk_rows.append(np.full(nAA + 1, ic))
            blk_cols.append(np.concatenate([[U0 + w_], y_idx(np.arange(nAA), w_, r_)]))
            blk_coef.append(np.concatenate([[1.0], -np.ones(nAA)]))
        add_block(np.concatenate(blk_rows), np.concatenate(blk_cols), np.concatenate(blk_coef), n_ic, GE, 0.0)
        add_block(np.zeros(nOA + 1), np.concatenate([[2], U0 + np.arange(nOA)]),
                  np.concatenate([[1.0], -np.ones(nOA)]), 1, GE, 0.0)

    # 4. onward membership: H(s, ap, pa) z(sigma) - b pi(wp, rep, ap, aa) <= 0
    S_, WP, WA, REP, AP, AA, PA = _sigma_grid(sig_shape)
    sig_flat = np.arange(n_sig)
    blk_rows, blk_cols, blk_coef = [], [], []
    n_onward = 0
    for key in m.keys(h + 1):
        poly = next_polytopes[key]
        sel = (S_ == key.state) & (AP == key.principal_action) & (PA == key.agent_action)
        sigs = sig_flat[sel]
        nr = poly.H.shape[0]
        base = n_onward + np.arange(sigs.size)[:, None] * nr + np.arange(nr)[None, :]   # (nsig, nr)
        for k in range(dim):
            blk_rows.append(base.ravel())
            blk_cols.append(np.repeat(Z0 + sigs * dim + k, nr))
            blk_coef.append(np.tile(poly.H[:, k], sigs.size))
        blk_rows.append(base.ravel())
        blk_cols.append(np.repeat(pi_idx(WP[sel], REP[sel], AP[sel], AA[sel]), nr))
        blk_coef.append(np.tile(-poly.b, sigs.size))
        n_onward += sigs.size * nr
    add_block(np.concatenate(blk_rows), np.concatenate(blk_cols), np.concatenate(blk_coef), n_onward, LE, 0.0)

    # 5. each pi(. | wp, rep) is a distribution
    g_wp, g_rp = _sigma_grid((nOP, nOA))
    n_simplex = g_wp.size
    rows = np.repeat(np.arange(n_simplex), nAP * nAA)
    a_p, a_a = _sigma_grid((nAP, nAA))
    cols = pi_idx(np.repeat(g_wp, nAP * nAA), np.repeat(g_rp, nAP * nAA),
                  np.tile(a_p, n_simplex), np.tile(a_a, n_simplex))
    add_block(rows, cols, np.ones(rows.size), n_simplex, EQ, 1.0)

    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(ri), np.concatenate(ci))), shape=(nrow, nvars))
    A.sum_duplicates()
    lower = np.full(nvars, -np.inf)
    upper = np.full(nvars, np.inf)
    lower[:dim] = 0.0
    upper[:dim] = float(H)
    lower[PI0:Z0] = 0.0
    upper[PI0:Z0] = 1.0
    program = LinearProgram(nvars, np.zeros(nvars), Sense.FEASIBILITY, A,
                            np.concatenate(rel), np.concatenate(rhs), lower, upper)
    return ConstraintSystem(m, h, o, dim, program, PI0, Z0, Y0, U0, dict(next_polytopes))


# ------------------------------------------------------------------ slicing


@dataclass
class SliceSet:
    delta: float
    slice_values: np.ndarray
    points: list          # [(np.ndarray value vector, tag)]
    agent_range: dict = field(default_factory=dict)   # w -> (min vA, max vA)

    def as_array(self) -> np.ndarray:
        return np.array([p for p, _ in self.points])


def slice_values(delta: float, H: float) -> np.ndarray:
    n = int(math.ceil(H / delta - 1e-12))
    w = np.array([i * delta for i in range(n + 1)])
    w[w > H] = H
    w[-1] = H
    return np.unique(w)


def _optimize(prog: LinearProgram):
    res = lp.solve(prog)
    if res.status is Status.OPTIMAL:
        return res.solution
    if res.status is Status.UNBOUNDED:
        raise lp.LpNumericalError("value LP unbounded despite bounded value variables")
    return None


def slice_polytope(sys: ConstraintSystem, delta: float, horizon: Optional[float] = None) -> SliceSet:
    """Witness points on the slice lines v^P = w plus the two agent-extreme points."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    H = float(sys.model.horizon if horizon is None else horizon)
    W = slice_values(delta, H)
    points = []
    # v^P range, only to skip slices that cannot intersect the set
    lo_sol = _optimize(sys.fixed(objective={0: 1.0}, sense=Sense.MINIMIZE))
    if lo_sol is None:
        raise EmptyInducibleSetError(f"empty inducible set at h={sys.h}, o={sys.o}")
    hi_sol = _optimize(sys.fixed(objective={0: 1.0}, sense=Sense.MAXIMIZE))
    vp_lo, vp_hi = lo_sol[0], hi_sol[0]
    ranges = {}
    for w in W:
        if w < vp_lo - 1e-9 or w > vp_hi + 1e-9:
            continue
        fix = {0: float(w)}
        mn = _optimize(sys.fixed(objective={1: 1.0}, sense=Sense.MINIMIZE, lower=fix, upper=fix))
        if mn is None:
            continue
        mx = _optimize(sys.fixed(objective={1: 1.0}, sense=Sense.MAXIMIZE, lower=fix, upper=fix))
        points.append((mn[:sys.dim].copy(), "slice-min"))
        points.append((mx[:sys.dim].copy(), "slice-max"))
        ranges[float(w)] = (float(mn[1]), float(mx[1]))
    for sense, tag in ((Sense.MINIMIZE, "agent-min"), (Sense.MAXIMIZE, "agent-max")):
        sol = _optimize(sys.fixed(objective={1: 1.0}, sense=sense))
        points.append((sol[:sys.dim].copy(), tag))
    return SliceSet(delta, W, points, ranges)


def grid_points_3d(sys: ConstraintSystem, spacing: float) -> list:
    """Inner approximation of a 3D value set from columns of a regular grid.

    For every grid column (v^P, v^A) = (i g, j g) the feasible v*^A values form
    an interval; its two end witnesses are kept.  Hulling them contains every
    feasible grid point of the column, so the result is at least as large as
    the hull of the feasible grid points.  The six axis-extreme witnesses are
    always included so the set is never empty.

    Grid points rarely satisfy v*^A = v^A exactly, so on their own they can
    lose every exactly-IC continuation.  The slicing construction is therefore
    also run on the plane v^A >= v*^A, which keeps an inner approximation of
    the IC part as good as the 2D one.
    """
    row = np.zeros(sys.program.num_vars)
    row[1], row[2] = 1.0, -1.0
    ic_plane = replace(sys, program=sys.program.with_rows(row[None, :], [GE], [0.0]))
    try:
        points = [p for p, _ in slice_polytope(ic_plane, spacing).points]
    except EmptyInducibleSetError:
        points = []
    bounds = []
    for k in range(3):
        ends = []
        for sense in (Sense.MINIMIZE, Sense.MAXIMIZE):
            sol = _optimize(sys.fixed(objective={k: 1.0}, sense=sense))
            if sol is None:
                raise EmptyInducibleSetError(f"empty inducible set at h={sys.h}, o={sys.o}")
            points.append(sol[:3].copy())
            ends.append(sol[k])
        bounds.append(ends)
    def axis(lo, hi):
        i0 = int(math.ceil(lo / spacing - 1e-9))
        i1 = int(math.floor(hi / spacing + 1e-9))
        return [i * spacing for i in range(i0, i1 + 1)]
    for wp in axis(*bounds[0]):
        for wa in axis(*bounds[1]):
            fix = {0: wp, 1: wa}
            mn = _optimize(sys.fixed(objective={2: 1.0}, sense=Sense.MINIMIZE, lower=fix, upper=fix))
            if mn is None:
                continue
            mx = _optimize(sys.fixed(objective={2: 1.0}, sense=Sense.MAXIMIZE, lower=fix, upper=fix))
            points.append(mn[:3].copy())
            points.append(mx[:3].copy())
    return points


# ------------------------------------------------------------------ the DP


def base_polytopes(m: GameModel, dim: int = 2) -> dict:
    zero = np.zeros(dim)
    return {(m.horizon, o): ValuePolytope.point(zero, owner=(m.horizon, o)) for o in m.keys(m.horizon)}


@dataclass(eq=False)
class ValueSets:
    """Result of the backward induction: polytopes per (h, o) plus lazily built systems."""

    model: GameModel
    epsilon: float
    delta: float
    dim: int
    polytopes: Dict[tuple, ValuePolytope]
    _systems: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def next_map(self, h: int) -> dict:
        return {o: self.polytopes[(h + 1, o)] for o in self.model.keys(h + 1)}

    def system(self, h: int, o: Key) -> ConstraintSystem:
        key = (h, o)
        sys_ = self._systems.get(key)
        if sys_ is None:
            sys_ = assemble_constraints(self.model, h, o, self.next_map(h), dim=self.dim)
            with self._lock:
                self._systems.setdefault(key, sys_)
        return self._systems[key]

    def root(self) -> ValuePolytope:
        return self.polytopes[(1, ROOT)]


def build_value_polytopes(m: GameModel, epsilon: float, verify: bool = True,
                          build_root: bool = True) -> ValueSets:
    """Approximate value polytopes for every (h, o), using slice spacing epsilon / H."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    H = m.horizon
    delta = epsilon / H
    vs = ValueSets(m, epsilon, delta, 2, base_polytopes(m, 2))
    for h in range(H - 1, 0, -1):
        if h == 1 and not build_root:
            break
        for o in m.keys(h):
            try:
                sys_ = vs.system(h, o)
                sl = slice_polytope(sys_, delta, H)
                poly = ValuePolytope.from_points(sl.as_array(), owner=(h, o))
                if verify:
                    _verify_vertices(sys_, poly)
            except (lp.LpNumericalError, EmptyInducibleSetError, StructuralError) as exc:
                raise type(exc)(f"(h={h}, o={o}): {exc}") from exc
            vs.polytopes[(h, o)] = poly
        log.debug("step %d: %d polytopes built", h, len(m.keys(h)))
    return vs


def build_delta_ic_polytopes(m: GameModel, epsilon: float, build_root: bool = False) -> ValueSets:
    """3D value sets (v^P, v^A, v*^A) on a grid of spacing epsilon / H."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    H = m.horizon
    spacing = epsilon / H
    vs = ValueSets(m, epsilon, spacing, 3, base_polytopes(m, 3))
    for h in range(H - 1, 0, -1):
        if h == 1 and not build_root:
            break
        for o in m.keys(h):
            sys_ = vs.system(h, o)
            pts = grid_points_3d(sys_, spacing)
            vs.polytopes[(h, o)] = ValuePolytope.from_points(np.array(pts), owner=(h, o))
    return vs


def _verify_vertices(sys_: ConstraintSystem, poly: ValuePolytope, tol=None):
    for v in poly.vertices:
        if not sys_.is_feasible(v, feas_tol=tol):
            # witnesses carry ~1e-9 noise; accept if a feasible point sits within tolerance
            dist = nearest_feasible(sys_, v)[0]
            if dist > 1e-7:
                raise lp.LpNumericalError(f"vertex {v} is not inducible (distance {dist:.3g})")


def nearest_feasible(sys_: ConstraintSystem, target):
    """(L-infinity distance, solution) of the closest feasible value vector to ``target``."""
    d = sys_.dim
    prog = sys_.program
    n = prog.num_vars
    # extra variable t >= |v_k - target_k|
    rows = sp.lil_matrix((2 * d, n + 1))
    rhs = np.zeros(2 * d)
    for k in range(d):
        rows[2 * k, k] = 1.0
        rows[2 * k, n] = -1.0
        rhs[2 * k] = target[k]
        rows[2 * k + 1, k] = -1.0
        rows[2 * k + 1, n] = -1.0
        rhs[2 * k + 1] = -target[k]
    A = sp.vstack([sp.hstack([prog.rows, sp.csr_matrix((prog.num_rows, 1))]), rows.tocsr()], format="csr")
    obj = np.zeros(n + 1)
    obj[n] = 1.0
    ext = LinearProgram(n + 1, obj, Sense.MINIMIZE, A,
                        np.concatenate([prog.relations, np.full(2 * d, LE, dtype=np.int8)]),
                        np.concatenate([prog.rhs, rhs]),
                        np.append(prog.lower, 0.0), np.append(prog.upper, np.inf))
    res = lp.solve(ext)
    if res.status is not Status.OPTIMAL:
        return math.inf, None
    return float(res.solution[n]), res.solution[:n]


def max_principal_value(root, tol: Optional[float] = None, delta_ic: Optional[float] = None):
    """(v*, argvec): max v^P over the root system, ties broken by max v^A.

    ``root`` is a ConstraintSystem (preferred; no slicing error) or a
    ValuePolytope.  For 3D systems ``delta_ic`` adds v^A >= v*^A - delta.
    ``tol`` (default ``lp.OBJ_TOL``) is the slack on v^P in the tie-break stage.
    """
    if tol is None:
        tol = lp.OBJ_TOL
    if isinstance(root, ValuePolytope):
        verts = root.vertices
        if delta_ic is not None and root.dimension == 3:
            verts = verts[verts[:, 1] >= verts[:, 2] - delta_ic - tol]
        best = np.max(verts[:, 0])
        cand = verts[verts[:, 0] >= best - tol]
        arg = cand[np.argmax(cand[:, 1])]
        return float(best), arg.copy()
    sys_ = root
    base = sys_.program
    if sys_.dim == 3:
        if delta_ic is None:
            raise ValueError("3D root systems need delta_ic")
        row = np.zeros(base.num_vars)
        row[1], row[2] = 1.0, -1.0
        base = base.with_rows(row[None, :], [GE], [-delta_ic])
    obj = np.zeros(base.num_vars)
    obj[0] = 1.0
    first = lp.solve(base.replace(objective=obj, sense=Sense.MAXIMIZE))
    if first.status is not Status.OPTIMAL:
        raise EmptyInducibleSetError(f"root LP status {first.status.value}")
    vstar = first.objective_value
    lo = base.lower.copy()
    lo[0] = max(lo[0], vstar - tol)
    obj2 = np.zeros(base.num_vars)
    obj2[1] = 1.0
    second = lp.solve(base.replace(objective=obj2, sense=Sense.MAXIMIZE, lower=lo))
    sol = second.solution if second.status is Status.OPTIMAL else first.solution
    return float(vstar), sol[:sys_.dim].copy()


def root_system(vs: ValueSets) -> ConstraintSystem:
    return vs.system(1, ROOT)
