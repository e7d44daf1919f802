"""Shared builders for randomized game instances."""
import numpy as np

from stochpa.fixtures import load_fixture
from stochpa.model import GameModel

REWARD_GRID = np.array([0.0, 0.25, 0.5, 0.75, 1.0])


def _names(prefix, n):
    return tuple(f"{prefix}{i}" for i in range(n))


def _random_dist(rng, shape, sparsity=0.3):
    p = rng.random(shape) * (rng.random(shape) > sparsity)
    flat = p.reshape(-1, int(np.prod(shape[-3:])))
    for row in flat:
        if row.sum() == 0:
            row[rng.integers(row.size)] = 1.0
    flat /= flat.sum(axis=1, keepdims=True)
    return flat.reshape(shape)


def random_model(rng, horizon=2, max_states=2, max_actions=3, max_obs=3, sizes=None) -> GameModel:
    """Random model with rewards on a quarter grid and zero last-step rewards."""
    if sizes is None:
        sizes = (int(rng.integers(1, max_states + 1)), int(rng.integers(1, max_actions + 1)),
                 int(rng.integers(1, max_actions + 1)), int(rng.integers(1, max_obs + 1)),
                 int(rng.integers(1, max_obs + 1)))
    nS, nAP, nAA, nOP, nOA = sizes
    init = _random_dist(rng, (nS, nOP, nOA))
    trans = _random_dist(rng, (max(horizon - 1, 0), nS, nAP, nAA, nS, nOP, nOA))
    rp = REWARD_GRID[rng.integers(0, 5, (horizon, nS, nAP, nAA))]
    ra = REWARD_GRID[rng.integers(0, 5, (horizon, nS, nAP, nAA))]
    rp[-1] = 0.0
    ra[-1] = 0.0
    return GameModel(_names("s", nS), _names("p", nAP), _names("a", nAA), _names("wp", nOP),
                     _names("wa", nOA), horizon, init, trans, rp, ra)


def random_h2(seed):
    return random_model(np.random.default_rng(seed), horizon=2)


def random_h3(seed):
    rng = np.random.default_rng(1000 + seed)
    return random_model(rng, horizon=3, sizes=(2, 2, 2, 2, 2))


def coin():
    return load_fixture("coin-persuasion-v1")


def constant_model(horizon=3, reward=1.0):
    """One state, action and observation per side; every non-terminal step pays ``reward`` to both."""
    one = np.ones((1, 1, 1))
    r = np.full((horizon, 1, 1, 1), reward)
    r[-1] = 0.0
    trans = np.ones((horizon - 1, 1, 1, 1, 1, 1, 1))
    return GameModel(("s",), ("p",), ("a",), ("wp",), ("wa",), horizon, one, trans, r, r.copy())


def zero_reward(m: GameModel) -> GameModel:
    import dataclasses
    return dataclasses.replace(m, rewards_principal=np.zeros_like(m.rewards_principal),
                               rewards_agent=np.zeros_like(m.rewards_agent))
