"""On-the-fly evaluation of the committed policy for arbitrary histories.

The policy is never materialized.  A query for history sigma replays the
forward procedure: start at the root target, solve the one-step system at
every prefix step with the current target, follow the onward value of the
interaction that actually happened, and finally read off the one-step
policy at the queried step.  Results are memoized per (step, key, target).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import lp
from .lp import Sense, Status
from .model import ROOT, GameModel, Key, StateActionKey, StepInteraction, sample_step
from .valueset_dp import ConstraintSystem, ValueSets, max_principal_value, nearest_feasible

PROB_FLOOR = 1e-9
TARGET_TOL = 1e-6


class InfeasibleTargetError(RuntimeError):
    def __init__(self, message: str, violation: float):
        super().__init__(message)
        self.violation = violation


@dataclass(frozen=True, eq=False)
class OneStepPolicy:
    """pi[wp, reported wa, ap, aa]."""
    table: np.ndarray

    def distribution(self, wp: int, reported: int) -> np.ndarray:
        return self.table[wp, reported].ravel()


@dataclass(frozen=True, eq=False)
class OnwardValueMap:
    """v'[s, wp, wa, reported wa, ap, recommended aa, played aa] -> value vector."""
    table: np.ndarray

    def __getitem__(self, sigma) -> np.ndarray:
        return self.table[tuple(sigma)]


class DeviationPlan:
    """Agent strategy: what to report and what to play.  The base class is truthful."""

    def report(self, history: Sequence[StepInteraction], agent_obs: int) -> int:
        return agent_obs

    def act(self, history: Sequence[StepInteraction], agent_obs: int, recommended: int) -> int:
        return recommended

    @classmethod
    def truthful(cls) -> "DeviationPlan":
        return cls()


TRUTHFUL = DeviationPlan()


class TableDeviationPlan(DeviationPlan):
    """Deviation plan given by lookup tables; missing entries behave truthfully.

    ``reports`` maps (history, wa) and ``actions`` maps (history, wa, aa) where
    ``history`` is a tuple of StepInteraction.  ``step_reports``/``step_actions``
    give history-independent fallbacks keyed by (h, wa) and (h, wa, aa).
    """

    def __init__(self, reports=None, actions=None, step_reports=None, step_actions=None):
        self.reports = dict(reports or {})
        self.actions = dict(actions or {})
        self.step_reports = dict(step_reports or {})
        self.step_actions = dict(step_actions or {})

    def report(self, history, agent_obs):
        hist = tuple(history)
        if (hist, agent_obs) in self.reports:
            return self.reports[(hist, agent_obs)]
        return self.step_reports.get((len(hist) + 1, agent_obs), agent_obs)

    def act(self, history, agent_obs, recommended):
        hist = tuple(history)
        if (hist, agent_obs, recommended) in self.actions:
            return self.actions[(hist, agent_obs, recommended)]
        return self.step_actions.get((len(hist) + 1, agent_obs, recommended), recommended)

    @classmethod
    def from_dict(cls, m: GameModel, d: dict) -> "TableDeviationPlan":
        """Stationary-per-step plan from JSON.

        ``{"report": [{"step": 1, "obs": "null", "as": "null"}],
           "action": [{"step": 1, "obs": "null", "recommended": "playH", "play": "playT"}]}``
        """
        oa = {n: i for i, n in enumerate(m.agent_obs)}
        aa = {n: i for i, n in enumerate(m.agent_actions)}
        reps = {(int(r["step"]), oa[r["obs"]]): oa[r["as"]] for r in d.get("report", [])}
        acts = {(int(r["step"]), oa[r["obs"]], aa[r["recommended"]]): aa[r["play"]]
                for r in d.get("action", [])}
        return cls(step_reports=reps, step_actions=acts)


def _project_to_polytope(poly, x: np.ndarray) -> np.ndarray:
    """Closest point of poly to x in L1 (small LP); x itself when already inside."""
    if poly.contains(x, 1e-9):
        return x
    d = poly.dimension
    # variables: p (d, free), t (d, >= 0);  H p <= b, p - t <= x, -p - t <= -x
    b = lp.LpBuilder(2 * d)
    for row, rhs in zip(poly.H, poly.b):
        b.add_constraint((np.arange(d), row), "<=", float(rhs))
    for k in range(d):
        b.add_constraint(([k, d + k], [1.0, -1.0]), "<=", float(x[k]))
        b.add_constraint(([k, d + k], [-1.0, -1.0]), "<=", float(-x[k]))
        b.set_bounds(k, lower=-np.inf)
    prog = b.build({d + k: 1.0 for k in range(d)}, Sense.MINIMIZE)
    res = lp.solve(prog)
    if res.status is not Status.OPTIMAL:
        return poly.lexmax_vertex()
    return res.solution[:d].copy()


def one_step_solve(sys_: ConstraintSystem, target, tol: float = TARGET_TOL):
    """(OneStepPolicy, OnwardValueMap) realizing ``target`` at (h, o).

    Targets within ``tol`` (L-infinity) of the feasible set are snapped to the
    closest feasible value; farther ones raise InfeasibleTargetError.
    """
    target = np.asarray(target, dtype=float)
    res = lp.solve(sys_.fixed(target))
    if res.status is Status.OPTIMAL:
        x = res.solution
    else:
        dist, x = nearest_feasible(sys_, target)
        if x is None or dist > tol:
            raise InfeasibleTargetError(
                f"target {target.tolist()} infeasible at h={sys_.h}, o={sys_.o} (distance {dist:.3g})", dist)
    pi = np.clip(sys_.pi_of(x), 0.0, 1.0)
    pi = pi / pi.sum(axis=(2, 3), keepdims=True)
    z = sys_.z_of(x)
    dim = sys_.dim
    # weights pi(wp, rep, ap, aa) broadcast onto sigma = (s, wp, wa, rep, ap, aa, pa)
    w = pi[None, :, None, :, :, :, None]
    w = np.broadcast_to(w, z.shape[:-1])
    onward = np.empty_like(z)
    big = w > PROB_FLOOR
    onward[big] = z[big] / w[big][:, None]
    nS, nAP, nAA, nOP, nOA = sys_.model.shape
    for key, poly in sys_.next_polytopes.items():
        s, ap, pa = key
        sub = onward[s, :, :, :, ap, :, pa]
        small = ~big[s, :, :, :, ap, :, pa]
        sub[small] = poly.lexmax_vertex()
        flat = sub.reshape(-1, dim)
        for i in range(flat.shape[0]):
            flat[i] = _project_to_polytope(poly, flat[i])
        onward[s, :, :, :, ap, :, pa] = flat.reshape(sub.shape)
    return OneStepPolicy(pi), OnwardValueMap(onward)


class PolicyHandle:
    """The committed policy, evaluated lazily from the value sets and a root target."""

    def __init__(self, value_sets: ValueSets, target=None, tol: float = TARGET_TOL,
                 delta_ic: Optional[float] = None):
        self.value_sets = value_sets
        self.model: GameModel = value_sets.model
        self.tol = tol
        if self.model.horizon == 1:
            self.target = np.zeros(value_sets.dim)
        else:
            root = value_sets.system(1, ROOT)
            if target is None:
                _, target = max_principal_value(root, delta_ic=delta_ic)
            target = np.asarray(target, dtype=float)
            if not root.is_feasible(target):
                dist, _ = nearest_feasible(root, target)
                if dist > tol:
                    raise InfeasibleTargetError(f"root target {target.tolist()} not inducible "
                                                f"(distance {dist:.3g})", dist)
            self.target = target
        self._memo = {}
        self._lock = threading.Lock()

    def step(self, h: int, o: Key, target) -> tuple:
        key = (h, o, tuple(np.asarray(target, dtype=float).tolist()))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._memo.get(key)
            if hit is None:
                hit = one_step_solve(self.value_sets.system(h, o), target, self.tol)
                self._memo[key] = hit
        return hit

    def distribution(self, history: Sequence[StepInteraction], wp: int, reported: int) -> np.ndarray:
        return policy_distribution(self, history, wp, reported)


def policy_distribution(ph: PolicyHandle, history: Sequence[StepInteraction], wp: int,
                        reported: int) -> np.ndarray:
    """Distribution over joint actions (index ap * |A^A| + aa) at step len(history) + 1."""
    m = ph.model
    h = len(history) + 1
    if h > m.horizon:
        raise ValueError(f"history of length {len(history)} exceeds horizon {m.horizon}")
    nS, nAP, nAA, nOP, nOA = m.shape
    if not (0 <= wp < nOP and 0 <= reported < nOA):
        raise IndexError("observation index out of range")
    if h == m.horizon:
        # last step carries no reward; commit to the first joint action
        out = np.zeros(m.n_joint_actions)
        out[0] = 1.0
        return out
    target = ph.target
    o: Key = ROOT
    for ell, st in enumerate(history, start=1):
        _, onward = ph.step(ell, o, target)
        target = onward[(st.state, st.principal_obs, st.agent_obs, st.reported_obs,
                         st.principal_action, st.recommended_action, st.played_action)]
        o = StateActionKey(st.state, st.principal_action, st.played_action)
    pi, _ = ph.step(h, o, target)
    return pi.distribution(wp, reported).copy()


def sample_action(dist: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(dist)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, dist.size - 1)


def rollout(policy, m: GameModel, agent: DeviationPlan, rng: np.random.Generator):
    """One episode of the protocol; returns (history, (total principal, total agent))."""
    history = []
    o: Key = ROOT
    totP = totA = 0.0
    nAA = len(m.agent_actions)
    for h in range(1, m.horizon + 1):
        s, wp, wa = sample_step(m, h, o, rng)
        rep = agent.report(history, wa)
        a = sample_action(policy.distribution(history, wp, rep), rng)
        ap, aa = divmod(a, nAA)
        pa = agent.act(history, wa, aa)
        totP += m.rewards_principal[h - 1, s, ap, pa]
        totA += m.rewards_agent[h - 1, s, ap, pa]
        history.append(StepInteraction(s, wp, wa, rep, ap, aa, pa))
        o = StateActionKey(s, ap, pa)
    return history, (float(totP), float(totA))


class StationaryPolicy:
    """History-independent policy: table[h-1][wp][reported] -> joint-action distribution."""

    def __init__(self, m: GameModel, table):
        self.model = m
        self.table = np.asarray(table, dtype=float)

    def distribution(self, history, wp, reported):
        return self.table[len(history), wp, reported].copy()

    @classmethod
    def constant(cls, m: GameModel, joint_action: int) -> "StationaryPolicy":
        nS, nAP, nAA, nOP, nOA = m.shape
        t = np.zeros((m.horizon, nOP, nOA, m.n_joint_actions))
        t[..., joint_action] = 1.0
        return cls(m, t)
