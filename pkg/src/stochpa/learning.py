"""Explore-then-commit learning when the transition model is unknown.

Phase 1 learns the dynamics without looking at rewards: a count-bonus
exploration policy on the effective MDP over (previous state-action,
observation) pairs.  Phase 2 plans a delta-IC near-optimal commitment on the
empirical model and plays it for the remaining episodes.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import oracle
from .model import ROOT, GameModel, StateActionKey, sample_step
from .policy_forward import TRUTHFUL, PolicyHandle, rollout
from .valueset_dp import build_delta_ic_polytopes, build_value_polytopes, max_principal_value


@dataclass
class LearningConfig:
    episodes: int
    failure_prob: float = 0.05
    seed: int = 0
    c_explore: float = 1.0
    delta: Optional[float] = None
    n0: Optional[int] = None
    adversarial_agent: bool = False

    def __post_init__(self):
        if not 0 < self.failure_prob < 1:
            raise ValueError("failure_prob must lie in (0, 1)")
        if self.episodes < 1:
            raise ValueError("episodes must be positive")
        if self.n0 is not None and not 1 <= self.n0 <= self.episodes:
            raise ValueError("n0 must lie in [1, episodes]")
        if self.delta is not None and self.delta < 0:
            raise ValueError("delta must be nonnegative")


def zeta(m: GameModel) -> float:
    nS, nAP, nAA, nOP, nOA = m.shape
    return float(m.horizon ** 5 * nS ** 2 * (nAP * nAA) ** 3 * (nOP * nOA) ** 2)


def resolve_schedule(m: GameModel, cfg: LearningConfig):
    """(delta, N0) after applying the defaults."""
    z = zeta(m)
    T = cfg.episodes
    delta = cfg.delta if cfg.delta is not None else (z / T) ** (1.0 / 3.0)
    if cfg.n0 is not None:
        n0 = cfg.n0
    else:
        # the default always leaves at least one commit episode
        n0 = min(T - 1, math.ceil(cfg.c_explore * z ** (1 / 3) * T ** (2 / 3)))
    return float(delta), int(max(1, n0))


@dataclass(eq=False)
class EstimatedModel:
    """Empirical model plus the counts it was built from."""
    model: GameModel
    initial_counts: np.ndarray       # (S, OP, OA)
    counts: np.ndarray               # (H-1, S, AP, AA, S, OP, OA)

    @property
    def visits(self) -> np.ndarray:
        """n(h, s, ap, aa) for h = 1..H-1."""
        return self.counts.sum(axis=(4, 5, 6))


def _estimate(env: GameModel, c0: np.ndarray, c: np.ndarray) -> GameModel:
    def normalize(arr, axes):
        tot = arr.sum(axis=axes, keepdims=True)
        shape_block = np.prod([arr.shape[a] for a in axes])
        uniform = np.full_like(arr, 1.0 / shape_block)
        return np.where(tot > 0, arr / np.where(tot > 0, tot, 1.0), uniform)
    p0 = normalize(c0.astype(float), (0, 1, 2))
    p = normalize(c.astype(float), (4, 5, 6)) if c.size else c.astype(float)
    return dataclasses.replace(env, initial=p0, transitions=p)


class _ExplorationPolicy:
    """Deterministic joint-action table over effective states (h, o, wp, wa)."""

    def __init__(self, m: GameModel, table: dict):
        self.model = m
        self.table = table
        self._key = tuple(sorted(table.items(), key=repr))

    def action(self, h, o, wp, wa) -> int:
        return self.table.get((h, o, wp, wa), 0)

    def distribution(self, history, wp, reported):
        h = len(history) + 1
        o = ROOT if not history else history[-1].key
        out = np.zeros(self.model.n_joint_actions)
        out[self.action(h, o, wp, reported)] = 1.0
        return out


def _plan_exploration(est: GameModel, theta_counts: dict, c_explore: float) -> _ExplorationPolicy:
    """Value iteration on the estimated effective MDP with count bonuses."""
    H = est.horizon
    nS, nAP, nAA, nOP, nOA = est.shape
    nA = nAP * nAA
    table = {}
    V_next = {}                     # (o, wp, wa) -> value at step h + 1
    for h in range(H - 1, 0, -1):
        V_h = {}
        for o in est.keys(h):
            joint = est.next_distribution(h, o)            # (S, OP, OA)
            for wp in range(nOP):
                for wa in range(nOA):
                    post = joint[:, wp, wa]
                    post = post / post.sum() if post.sum() > 0 else np.full(nS, 1.0 / nS)
                    best, best_a = -1.0, 0
                    for a in range(nA):
                        ap, aa = divmod(a, nAA)
                        n = theta_counts.get((h, o, wp, wa, a), 0)
                        q = min(1.0, c_explore / math.sqrt(max(1, n)))
                        if h + 1 < H:
                            for s in range(nS):
                                if post[s] == 0:
                                    continue
                                nxt = est.transitions[h - 1, s, ap, aa]
                                key = StateActionKey(s, ap, aa)
                                cont = sum(nxt[s2, wp2, wa2] * V_next[(key, wp2, wa2)]
                                           for s2 in range(nS) for wp2 in range(nOP) for wa2 in range(nOA)
                                           if nxt[s2, wp2, wa2] > 0)
                                q += post[s] * cont
                        if q > best + 1e-12:
                            best, best_a = q, a
                    table[(h, o, wp, wa)] = best_a
                    V_h[(o, wp, wa)] = best
        V_next = V_h
    return _ExplorationPolicy(est, table)


def explore_reward_free(env: GameModel, n0: int, rng: np.random.Generator, c_explore: float = 1.0,
                        on_episode=None) -> EstimatedModel:
    """Run ``n0`` exploration episodes on ``env`` (used only as a sampler)."""
    if n0 < 1:
        raise ValueError("n0 must be at least 1")
    H = env.horizon
    nS, nAP, nAA, nOP, nOA = env.shape
    c0 = np.zeros((nS, nOP, nOA), dtype=np.int64)
    c = np.zeros((H - 1, nS, nAP, nAA, nS, nOP, nOA), dtype=np.int64)
    theta_counts = {}
    est = _estimate(env, c0, c)
    for ep in range(n0):
        policy = _plan_exploration(est, theta_counts, c_explore)
        o = ROOT
        prev = None
        for h in range(1, H + 1):
            s, wp, wa = sample_step(env, h, o, rng)
            if h == 1:
                c0[s, wp, wa] += 1
            else:
                ps, pap, paa = prev
                c[h - 2, ps, pap, paa, s, wp, wa] += 1
            a = policy.action(h, o, wp, wa)
            ap, aa = divmod(a, nAA)
            if h < H:
                theta_counts[(h, o, wp, wa, a)] = theta_counts.get((h, o, wp, wa, a), 0) + 1
            prev = (s, ap, aa)
            o = StateActionKey(s, ap, aa)
        est = _estimate(env, c0, c)
        if on_episode is not None:
            on_episode(ep, policy)
    return EstimatedModel(est, c0, c)


class _PlannedPolicy:
    """Forward-loop policy from 3D (delta-IC) value sets."""

    def __init__(self, handle: PolicyHandle, value: float):
        self.handle = handle
        self.value = value

    def distribution(self, history, wp, reported):
        return self.handle.distribution(history, wp, reported)


def solve_delta_ic(m_hat, delta: float, epsilon: float) -> PolicyHandle:
    """delta-IC commitment maximizing the principal's value on the (estimated) model."""
    m = m_hat.model if isinstance(m_hat, EstimatedModel) else m_hat
    if epsilon <= 0 or delta < 0:
        raise ValueError("need epsilon > 0 and delta >= 0")
    vs = build_delta_ic_polytopes(m, epsilon)
    if m.horizon == 1:
        return PolicyHandle(vs)
    value, target = max_principal_value(vs.system(1, ROOT), delta_ic=delta)
    handle = PolicyHandle(vs, target)
    handle.value = value
    return handle


def benchmark_value(env: GameModel, epsilon: float) -> float:
    """V* on the true model: exact for H = 2, the DP at ``epsilon`` otherwise."""
    if env.horizon == 2:
        return oracle.brute_force_optimum(env)[0]
    if env.horizon == 1:
        return 0.0
    vs = build_value_polytopes(env, epsilon, verify=False, build_root=False)
    return max_principal_value(vs.system(1, ROOT))[0]


@dataclass
class EpisodeRecord:
    episode: int
    phase: str
    realized: tuple
    vP_expected: float
    vA_expected: float
    regP: float
    regA: float


@dataclass
class RegretReport:
    records: list
    regP_cum: np.ndarray
    regA_cum: np.ndarray
    delta: float
    n0: int
    v_star: float

    def commit_terms(self):
        return [r for r in self.records if r.phase == "commit"]

    def to_csv(self) -> str:
        lines = ["episode,phase,regP_cum,regA_cum,vP_expected,vA_expected"]
        for r, p, a in zip(self.records, self.regP_cum, self.regA_cum):
            lines.append(f"{r.episode},{r.phase},{p:.10g},{a:.10g},{r.vP_expected:.10g},{r.vA_expected:.10g}")
        return "\n".join(lines) + "\n"


def compute_regrets(v_star: float, vP_expected, vA_expected, vA_best):
    """Cumulative (Reg^P, Reg^A): signed principal shortfalls and agent deviation gains."""
    vP = np.asarray(vP_expected, dtype=float)
    vA = np.asarray(vA_expected, dtype=float)
    best = np.asarray(vA_best, dtype=float)
    regA_terms = np.maximum(best - vA, 0.0)
    return np.cumsum(v_star - vP), np.cumsum(regA_terms)


def run_learning(env: GameModel, cfg: LearningConfig, v_star: Optional[float] = None) -> RegretReport:
    delta, n0 = resolve_schedule(env, cfg)
    rng = np.random.default_rng(cfg.seed)
    if v_star is None:
        v_star = benchmark_value(env, max(delta, 1e-3))
    cache = {}
    records = []
    vP, vA, vBest = [], [], []

    def evaluate(policy, key):
        if key not in cache:
            p_, a_ = oracle.exact_policy_values(env, policy)
            cache[key] = (float(p_), float(a_), float(oracle.best_response_value(env, policy)))
        return cache[key]

    def on_episode(ep, policy):
        ep_p, ep_a, best = evaluate(policy, ("explore", policy._key))
        vP.append(ep_p)
        vA.append(ep_a)
        vBest.append(best)
        records.append(EpisodeRecord(ep + 1, "explore", (math.nan, math.nan), ep_p, ep_a, 0.0, 0.0))

    est = explore_reward_free(env, n0, rng, cfg.c_explore, on_episode)
    if n0 < cfg.episodes:
        handle = solve_delta_ic(est, delta, max(delta, 1e-3))
        ep_p, ep_a, best = evaluate(handle, ("commit",))
        agent = TRUTHFUL
        if cfg.adversarial_agent:
            agent = oracle.best_response(env, handle)[1]
            ep_p, ep_a = map(float, oracle.exact_policy_values(env, handle, agent=agent))
        for ep in range(n0, cfg.episodes):
            _, payoff = rollout(handle, env, agent, rng)
            vP.append(ep_p)
            vA.append(ep_a)
            vBest.append(best)
            records.append(EpisodeRecord(ep + 1, "commit", payoff, ep_p, ep_a, 0.0, 0.0))
    regP, regA = compute_regrets(v_star, vP, vA, vBest)
    for r, p_, a_, b_ in zip(records, vP, vA, vBest):
        r.regP = v_star - p_
        r.regA = max(b_ - a_, 0.0)
    return RegretReport(records, regP, regA, delta, n0, float(v_star))
