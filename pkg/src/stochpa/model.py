"""Finite-horizon two-player POMDP game model.

A game is the tuple ``<S, A^P x A^A, Omega^P x Omega^A, p, r>`` with horizon
``H``.  Probability tables are stored as dense numpy arrays:

* ``initial[s, wp, wa]``                      -- p_0
* ``transitions[h-1, s, ap, aa, s', wp', wa']`` -- p_h for h = 1..H-1
* ``rewards_principal[h-1, s, ap, aa]``       -- r_h^P for h = 1..H
* ``rewards_agent[h-1, s, ap, aa]``           -- r_h^A for h = 1..H

The solver assumes hindsight observability: the whole step interaction is
revealed to both players at the end of every step.  Nothing in the file
format encodes that assumption; results are only meaningful under it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

PROB_TOL = 1e-9


class ModelError(ValueError):
    """Raised when a game file cannot be parsed or fails validation."""

    def __init__(self, message: str, violations: Sequence[str] = ()):
        super().__init__(message)
        self.violations = list(violations)


class StateActionKey(NamedTuple):
    state: int
    principal_action: int
    agent_action: int


# Empty-history marker; the only key at time step 1.
ROOT = None

Key = Optional[StateActionKey]


class StepInteraction(NamedTuple):
    state: int
    principal_obs: int
    agent_obs: int
    reported_obs: int
    principal_action: int
    recommended_action: int
    played_action: int

    @property
    def key(self) -> StateActionKey:
        # value sets are keyed by the action the agent actually played
        return StateActionKey(self.state, self.principal_action, self.played_action)


History = tuple  # tuple[StepInteraction, ...]


def history_key(history: Sequence[StepInteraction]) -> Key:
    if not history:
        return ROOT
    return history[-1].key


@dataclass(frozen=True, eq=False)
class GameModel:
    states: tuple
    principal_actions: tuple
    agent_actions: tuple
    principal_obs: tuple
    agent_obs: tuple
    horizon: int
    initial: np.ndarray
    transitions: np.ndarray
    rewards_principal: np.ndarray
    rewards_agent: np.ndarray

    def __post_init__(self):
        for name in ("initial", "transitions", "rewards_principal", "rewards_agent"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        """(|S|, |A^P|, |A^A|, |Omega^P|, |Omega^A|)."""
        return (len(self.states), len(self.principal_actions), len(self.agent_actions),
                len(self.principal_obs), len(self.agent_obs))

    @property
    def n_joint_actions(self) -> int:
        return len(self.principal_actions) * len(self.agent_actions)

    def next_distribution(self, h: int, o: Key) -> np.ndarray:
        """p_{h-1}(s, wp, wa | o) as an (S, OP, OA) array."""
        check_key(self, h, o)
        if h == 1:
            return self.initial
        return self.transitions[h - 2, o.state, o.principal_action, o.agent_action]

    def keys(self, h: int) -> list:
        """All state-action keys that can precede step ``h``."""
        if h == 1:
            return [ROOT]
        nS, nAP, nAA, _, _ = self.shape
        return [StateActionKey(s, ap, aa)
                for s in range(nS) for ap in range(nAP) for aa in range(nAA)]

    def reward_bound(self) -> float:
        return float(self.horizon)

    def __eq__(self, other):
        if not isinstance(other, GameModel):
            return NotImplemented
        return (self.states == other.states
                and self.principal_actions == other.principal_actions
                and self.agent_actions == other.agent_actions
                and self.principal_obs == other.principal_obs
                and self.agent_obs == other.agent_obs
                and self.horizon == other.horizon
                and np.array_equal(self.initial, other.initial)
                and np.array_equal(self.transitions, other.transitions)
                and np.array_equal(self.rewards_principal, other.rewards_principal)
                and np.array_equal(self.rewards_agent, other.rewards_agent))

    __hash__ = object.__hash__


def check_key(m: GameModel, h: int, o: Key) -> None:
    if not 1 <= h <= m.horizon:
        raise IndexError(f"step {h} outside 1..{m.horizon}")
    if h == 1:
        if o is not ROOT:
            raise IndexError("step 1 only admits the root key")
        return
    if o is None:
        raise IndexError(f"root key is only valid at step 1, got step {h}")
    nS, nAP, nAA, _, _ = m.shape
    if not (0 <= o.state < nS and 0 <= o.principal_action < nAP and 0 <= o.agent_action < nAA):
        raise IndexError(f"key {tuple(o)} out of bounds")


def validate_model(m: GameModel) -> list:
    """Return every violated invariant; an empty list means the model is valid."""
    out = []
    nS, nAP, nAA, nOP, nOA = m.shape
    H = m.horizon
    if H < 1:
        out.append(f"horizon: must be >= 1, got {H}")
        return out
    if min(nS, nAP, nAA, nOP, nOA) < 1:
        out.append("sets: every index set must be nonempty")
        return out
    expected = {
        "initial": (nS, nOP, nOA),
        "transitions": (H - 1, nS, nAP, nAA, nS, nOP, nOA),
        "rewards_principal": (H, nS, nAP, nAA),
        "rewards_agent": (H, nS, nAP, nAA),
    }
    for name, shape in expected.items():
        arr = getattr(m, name)
        if arr.shape != shape:
            out.append(f"{name}: shape {arr.shape} != expected {shape}")
    if out:
        return out
    for name in expected:
        arr = getattr(m, name)
        if not np.all(np.isfinite(arr)):
            idx = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
            out.append(f"{name}{list(idx)}: non-finite entry")

    def check_rows(label, rows):
        flat = rows.reshape(-1, nS * nOP * nOA)
        lead = rows.shape[: rows.ndim - 3]
        for r, row in enumerate(flat):
            where = list(np.unravel_index(r, lead)) if lead else []
            neg = np.flatnonzero(row < 0)
            for j in neg:
                cell = where + list(np.unravel_index(j, (nS, nOP, nOA)))
                out.append(f"stochasticity: {label}{[int(c) for c in cell]} negative probability {row[j]}")
            total = row.sum()
            if abs(total - 1.0) > PROB_TOL:
                out.append(f"stochasticity: {label}{[int(c) for c in where]} sums to {total!r}")

    check_rows("initial", m.initial)
    if H > 1:
        check_rows("transitions", m.transitions)

    for name in ("rewards_principal", "rewards_agent"):
        arr = getattr(m, name)
        bad = np.argwhere((arr < 0) | (arr > 1))
        for idx in bad:
            out.append(f"reward-range: {name}{[int(i) for i in idx]} = {arr[tuple(idx)]} not in [0,1]")
        last = np.argwhere(arr[H - 1] != 0)
        for idx in last:
            out.append(f"terminal-zero: {name}[{H - 1}]{[int(i) for i in idx]} must be 0 at step H")
    return out


def _names(obj, key):
    val = obj.get(key)
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise ModelError(f"{key}: expected an array of strings")
    return tuple(val)


def _renormalize(arr: np.ndarray, block: int) -> np.ndarray:
    flat = arr.reshape(-1, block)
    sums = flat.sum(axis=1, keepdims=True)
    # rows off by more than float noise but within tolerance get rescaled;
    # the 1e-12 floor keeps load/dump round trips bit-exact
    off = np.abs(sums - 1.0)
    fix = (off > 1e-12) & (off <= PROB_TOL)
    flat = np.where(fix, flat / np.where(fix, sums, 1.0), flat)
    return flat.reshape(arr.shape)


def model_from_dict(obj: dict) -> GameModel:
    if not isinstance(obj, dict):
        raise ModelError("top level: expected a JSON object")
    missing = [k for k in ("states", "principal_actions", "agent_actions", "principal_obs",
                           "agent_obs", "horizon", "initial", "transitions",
                           "rewards_principal", "rewards_agent") if k not in obj]
    if missing:
        raise ModelError(f"missing keys: {', '.join(missing)}")
    S = _names(obj, "states")
    AP = _names(obj, "principal_actions")
    AA = _names(obj, "agent_actions")
    OP = _names(obj, "principal_obs")
    OA = _names(obj, "agent_obs")
    H = obj["horizon"]
    if not isinstance(H, int) or isinstance(H, bool) or H < 1:
        raise ModelError(f"horizon: expected integer >= 1, got {H!r}")
    nS, nAP, nAA, nOP, nOA = map(len, (S, AP, AA, OP, OA))
    block = nS * nOP * nOA

    def arr(key, shape):
        try:
            a = np.array(obj[key], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ModelError(f"{key}: not a numeric array ({exc})") from exc
        if a.size == 0 and int(np.prod(shape)) == 0:
            return np.zeros(shape)
        if a.shape != shape:
            raise ModelError(f"{key}: shape {a.shape} != expected {shape}")
        return a

    init = arr("initial", (block,)).reshape(nS, nOP, nOA)
    trans = arr("transitions", (H - 1, nS, nAP, nAA, block)).reshape(H - 1, nS, nAP, nAA, nS, nOP, nOA)
    rp = arr("rewards_principal", (H, nS, nAP, nAA))
    ra = arr("rewards_agent", (H, nS, nAP, nAA))
    init = _renormalize(init, block)
    if H > 1:
        trans = _renormalize(trans, block)
    m = GameModel(S, AP, AA, OP, OA, H, init, trans, rp, ra)
    violations = validate_model(m)
    if violations:
        raise ModelError(f"invalid model: {violations[0]}"
                         + (f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""),
                         violations)
    return m


def load_model(data) -> GameModel:
    """Parse and validate a game file given as bytes, str, or a path-like."""
    if hasattr(data, "read_bytes"):
        data = data.read_bytes()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(obj)


def model_to_dict(m: GameModel) -> dict:
    nS, nAP, nAA, nOP, nOA = m.shape
    block = nS * nOP * nOA
    return {
        "states": list(m.states),
        "principal_actions": list(m.principal_actions),
        "agent_actions": list(m.agent_actions),
        "principal_obs": list(m.principal_obs),
        "agent_obs": list(m.agent_obs),
        "horizon": m.horizon,
        "initial": m.initial.reshape(block).tolist(),
        "transitions": m.transitions.reshape(m.horizon - 1, nS, nAP, nAA, block).tolist(),
        "rewards_principal": m.rewards_principal.tolist(),
        "rewards_agent": m.rewards_agent.tolist(),
    }


def dump_model(m: GameModel) -> str:
    # repr-based float serialization round-trips exactly
    return json.dumps(model_to_dict(m), indent=1)


def conditional_obs_prob(m: GameModel, h: int, o: Key, agent_obs: int):
    """Marginal of ``agent_obs`` under p_{h-1}(.|o) and the conditional over (s, wp).

    The conditional is ``None`` when the marginal is zero.
    """
    dist = m.next_distribution(h, o)
    if not 0 <= agent_obs < dist.shape[2]:
        raise IndexError(f"agent observation {agent_obs} out of bounds")
    joint = dist[:, :, agent_obs]
    marginal = float(joint.sum())
    if marginal <= 0.0:
        return 0.0, None
    return marginal, joint / marginal


def sample_step(m: GameModel, h: int, o: Key, rng: np.random.Generator):
    """Draw (state, principal_obs, agent_obs) from p_{h-1}(.|o)."""
    dist = m.next_distribution(h, o)
    flat = dist.reshape(-1)
    cdf = np.cumsum(flat)
    u = rng.random() * cdf[-1]
    idx = int(np.searchsorted(cdf, u, side="right"))
    idx = min(idx, flat.size - 1)
    s, wp, wa = np.unravel_index(idx, dist.shape)
    return int(s), int(wp), int(wa)


def joint_action_index(m: GameModel, ap: int, aa: int) -> int:
    return ap * len(m.agent_actions) + aa


def split_joint_action(m: GameModel, a: int):
    return divmod(a, len(m.agent_actions))
