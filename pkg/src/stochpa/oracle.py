"""Exact ground truth on small instances by full enumeration of the interaction tree.

Policies are anything with ``distribution(history, wp, reported) -> array``
over joint actions (index ap * |A^A| + aa).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lp
from .lp import Sense, Status
from .model import ROOT, GameModel, StepInteraction, history_key
from .policy_forward import TRUTHFUL, DeviationPlan, TableDeviationPlan

DEFAULT_BUDGET = 10 ** 6
TIE_TOL = 1e-12


class BudgetExceededError(RuntimeError):
    def __init__(self, estimate: float, budget: float):
        super().__init__(f"enumeration needs about {estimate:.3g} history nodes, budget is {budget:.3g}")
        self.estimate = estimate
        self.budget = budget


def _estimate_nodes(m: GameModel, per_step: int) -> float:
    return float(sum(per_step ** k for k in range(m.horizon)))


def _check_budget(m: GameModel, deviations: bool, budget: float):
    nS, nAP, nAA, nOP, nOA = m.shape
    branch = nS * nOP * nOA * nAP * nAA
    if deviations:
        branch *= nOA * nAA
    est = _estimate_nodes(m, branch)
    if est > budget:
        raise BudgetExceededError(est, budget)


def exact_policy_values(m: GameModel, policy, agent: DeviationPlan = TRUTHFUL,
                        budget: float = DEFAULT_BUDGET):
    """Exact expected totals (V^P, V^A) when the agent follows ``agent`` (truthful by default)."""
    _check_budget(m, False, budget)
    nS, nAP, nAA, nOP, nOA = m.shape
    H = m.horizon

    def rec(h, hist):
        if h >= H:       # last-step rewards are zero by assumption
            return 0.0, 0.0
        q = m.next_distribution(h, history_key(hist))
        rP, rA = m.rewards_principal[h - 1], m.rewards_agent[h - 1]
        vp = va = 0.0
        for s, wp, wa in zip(*np.nonzero(q)):
            s, wp, wa = int(s), int(wp), int(wa)
            rep = agent.report(hist, wa)
            dist = policy.distribution(hist, wp, rep)
            for a in np.nonzero(dist)[0]:
                ap, aa = divmod(int(a), nAA)
                pa = agent.act(hist, wa, aa)
                p = q[s, wp, wa] * dist[a]
                cp, ca = rec(h + 1, hist + (StepInteraction(s, wp, wa, rep, ap, aa, pa),))
                vp += p * (rP[s, ap, pa] + cp)
                va += p * (rA[s, ap, pa] + ca)
        return vp, va

    return rec(1, ())


def best_response(m: GameModel, policy, budget: float = DEFAULT_BUDGET):
    """(max agent value over deviation plans, one maximizing plan).

    Backward induction over full histories; continuation histories record the
    true observation, the report, the recommendation and the action played.
    Ties keep the truthful choice.
    """
    _check_budget(m, True, budget)
    nS, nAP, nAA, nOP, nOA = m.shape
    H = m.horizon
    reports, actions = {}, {}

    def rec(h, hist):
        if h >= H:
            return 0.0
        q = m.next_distribution(h, history_key(hist))
        rA = m.rewards_agent[h - 1]
        total = 0.0
        for wa in range(nOA):
            support = [(int(s), int(wp)) for s, wp in zip(*np.nonzero(q[:, :, wa]))]
            if not support:
                continue
            best_rep, best_val, best_acts = None, -math.inf, None
            for rep in [wa] + [r for r in range(nOA) if r != wa]:
                dists = {wp: policy.distribution(hist, wp, rep) for _, wp in support}
                val = 0.0
                acts = {}
                for aa in range(nAA):
                    if not any(dists[wp][ap * nAA + aa] > 0 for _, wp in support for ap in range(nAP)):
                        continue
                    choice, choice_val = None, -math.inf
                    for pa in [aa] + [x for x in range(nAA) if x != aa]:
                        x = 0.0
                        for s, wp in support:
                            for ap in range(nAP):
                                p = q[s, wp, wa] * dists[wp][ap * nAA + aa]
                                if p > 0:
                                    st = StepInteraction(s, wp, wa, rep, ap, aa, pa)
                                    x += p * (rA[s, ap, pa] + rec(h + 1, hist + (st,)))
                        if x > choice_val + TIE_TOL:
                            choice, choice_val = pa, x
                    acts[aa] = choice
                    val += choice_val
                if val > best_val + TIE_TOL:
                    best_rep, best_val, best_acts = rep, val, acts
            reports[(hist, wa)] = best_rep
            for aa, pa in best_acts.items():
                actions[(hist, wa, aa)] = pa
            total += best_val
        return total

    value = rec(1, ())
    return value, TableDeviationPlan(reports=reports, actions=actions)


def best_response_value(m: GameModel, policy, budget: float = DEFAULT_BUDGET) -> float:
    return best_response(m, policy, budget)[0]


@dataclass
class ICResult:
    passed: bool
    gap: float
    truthful_value: float
    best_value: float
    plan: Optional[DeviationPlan] = None

    def to_dict(self) -> dict:
        return {"verdict": "pass" if self.passed else "fail", "gap": self.gap,
                "truthful_agent_value": self.truthful_value, "best_response_value": self.best_value}


def ic_check(m: GameModel, policy, tol: float = 1e-6, budget: float = DEFAULT_BUDGET) -> ICResult:
    _, va = exact_policy_values(m, policy, budget=budget)
    best, plan = best_response(m, policy, budget)
    gap = max(0.0, best - va)
    passed = best <= va + tol
    return ICResult(passed, gap, va, best, None if passed else plan)


def brute_force_optimum(m: GameModel, tol: float = 1e-9):
    """Exact optimum for H = 2 via the one-step obedience LP.

    IC is written with explicit deviation maps f: A^A -> A^A, one row per
    (true obs, report, f), so no auxiliary variables are needed.
    Returns (V*, pi[wp, reported wa, ap, aa], (V^P, V^A) at the lexicographic optimum).
    """
    if m.horizon != 2:
        raise ValueError(f"brute_force_optimum needs H = 2, got H = {m.horizon}")
    nS, nAP, nAA, nOP, nOA = m.shape
    q = m.initial
    rP, rA = m.rewards_principal[0], m.rewards_agent[0]
    shape = (nOP, nOA, nAP, nAA)
    n = int(np.prod(shape))

    def idx(wp, rep, ap, aa):
        return int(np.ravel_multi_index((wp, rep, ap, aa), shape))

    b = lp.LpBuilder(n)
    for wp in range(nOP):
        for rep in range(nOA):
            b.add_constraint({idx(wp, rep, ap, aa): 1.0 for ap in range(nAP) for aa in range(nAA)}, "=", 1.0)
    for j in range(n):
        b.set_bounds(j, 0.0, 1.0)
    for wa in range(nOA):
        for rep in range(nOA):
            for f in itertools.product(range(nAA), repeat=nAA):
                row = {}
                for s in range(nS):
                    for wp in range(nOP):
                        pr = q[s, wp, wa]
                        if pr == 0:
                            continue
                        for ap in range(nAP):
                            for aa in range(nAA):
                                k = idx(wp, wa, ap, aa)
                                row[k] = row.get(k, 0.0) + pr * rA[s, ap, aa]
                                k = idx(wp, rep, ap, aa)
                                row[k] = row.get(k, 0.0) - pr * rA[s, ap, f[aa]]
                b.add_constraint(row, ">=", 0.0)

    def value_row(r):
        row = np.zeros(n)
        for s in range(nS):
            for wp in range(nOP):
                for wa in range(nOA):
                    for ap in range(nAP):
                        for aa in range(nAA):
                            row[idx(wp, wa, ap, aa)] += q[s, wp, wa] * r[s, ap, aa]
        return row

    cP, cA = value_row(rP), value_row(rA)
    prog = b.build(dict(enumerate(cP)), Sense.MAXIMIZE)
    first = lp.solve(prog)
    if first.status is not Status.OPTIMAL:
        raise lp.LpNumericalError(f"obedience LP status {first.status.value}")
    vstar = first.objective_value
    second = prog.with_rows(cP[None, :], [lp.GE], [vstar - tol]).replace(objective=cA)
    res = lp.solve(second)
    x = res.solution if res.status is Status.OPTIMAL else first.solution
    pi = np.clip(x.reshape(shape), 0.0, 1.0)
    return float(vstar), pi, np.array([cP @ x, cA @ x])
