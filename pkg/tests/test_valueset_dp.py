import numpy as np
import pytest

from helpers import coin, constant_model, random_h2, random_h3, random_model, zero_reward
from stochpa import lp, oracle
from stochpa.geometry import ValuePolytope
from stochpa.model import ROOT, StateActionKey
from stochpa.valueset_dp import (StructuralError, assemble_constraints, base_polytopes,
                                 build_value_polytopes, max_principal_value, slice_polytope, slice_values)


def root_system(m, eps=0.1):
    vs = build_value_polytopes(m, eps, build_root=False)
    return vs, vs.system(1, ROOT)


def test_coin_variable_counts():
    m = coin()
    sys_ = assemble_constraints(m, 1, ROOT, {o: p for (h, o), p in base_polytopes(m).items()})
    assert (sys_.n_pi, sys_.n_y, sys_.n_z) == (4, 2, 32)
    assert sys_.program.num_vars == 2 + 4 + 32 + 2


def test_simplex_rows_present():
    m = random_h2(3)
    _, sys_ = root_system(m)
    ok, x = lp.check_feasible(sys_.program)
    pi = sys_.pi_of(x)
    assert np.allclose(pi.sum(axis=(2, 3)), 1.0) and pi.min() >= -1e-9


def test_terminal_step_pins_onward_values_to_zero():
    m = random_h2(5)
    _, sys_ = root_system(m)
    for k in range(2):
        for sense in (lp.Sense.MINIMIZE, lp.Sense.MAXIMIZE):
            obj = {sys_.z_offset + j: 1.0 for j in range(k, sys_.n_z, 2)}
            res = lp.solve(sys_.fixed(objective=obj, sense=sense))
            assert abs(res.objective_value) < 1e-9


def test_missing_next_polytope_is_structural_error():
    m = coin()
    nxt = {o: p for (h, o), p in base_polytopes(m).items()}
    nxt.pop(StateActionKey(1, 0, 1))
    with pytest.raises(StructuralError, match=r"\(1, 0, 1\)"):
        assemble_constraints(m, 1, ROOT, nxt)


def test_no_agent_choice_means_ic_is_vacuous():
    # one agent action and one agent observation: the optimum is the unconstrained maximum
    m = random_model(np.random.default_rng(4), horizon=2, sizes=(2, 3, 1, 2, 1))
    _, sys_ = root_system(m)
    v, _ = max_principal_value(sys_)
    q = m.initial[:, :, 0]
    best = sum(max(q[:, wp] @ m.rewards_principal[0][:, ap, 0] for ap in range(3)) for wp in range(2))
    assert v == pytest.approx(best, abs=1e-9)


def test_slice_values_contain_ends_and_nest():
    for delta in (0.1, 1 / 3, 0.0125, 0.7):
        w = slice_values(delta, 3.0)
        assert w[0] == 0.0 and w[-1] == 3.0
        assert set(w) <= set(slice_values(delta / 2, 3.0))


def test_slices_zero_only_system():
    m = zero_reward(coin())
    _, sys_ = root_system(m)
    sl = slice_polytope(sys_, 0.1)
    assert np.allclose(sl.as_array(), 0.0)


def test_coin_slice_contains_optimum():
    _, sys_ = root_system(coin())
    sl = slice_polytope(sys_, 0.1)
    hits = [tag for p, tag in sl.points if np.allclose(p, [0.8, 0.6], atol=1e-9)]
    assert "slice-max" in hits
    assert {"agent-min", "agent-max"} <= {tag for _, tag in sl.points}


def test_halving_delta_keeps_points():
    _, sys_ = root_system(random_h2(9))
    coarse = slice_polytope(sys_, 0.2)
    fine = slice_polytope(sys_, 0.1)
    fine_pts = {tuple(p) for p, _ in fine.points}
    assert all(tuple(p) in fine_pts for p, _ in coarse.points)


def test_build_zero_and_constant_models():
    vs = build_value_polytopes(zero_reward(random_h3(2)), 0.4)
    assert all(np.allclose(p.vertices, 0.0) for p in vs.polytopes.values())
    H = 4
    vs = build_value_polytopes(constant_model(H), 0.4)
    for (h, o), poly in vs.polytopes.items():
        assert np.allclose(poly.vertices, H - h)
    v, arg = max_principal_value(vs.system(1, ROOT))
    assert v == pytest.approx(H - 1) and np.allclose(arg, H - 1, atol=1e-6)


def test_coin_build_and_root():
    vs = build_value_polytopes(coin(), 0.1)
    root = vs.root()
    best = root.vertices[np.argmax(root.vertices[:, 0])]
    assert np.allclose(best, [0.8, 0.6], atol=1e-9)
    v, arg = max_principal_value(vs.system(1, ROOT))
    assert v == pytest.approx(0.8, abs=1e-9) and np.allclose(arg, [0.8, 0.6], atol=1e-6)
    v2, arg2 = max_principal_value(root)
    assert v2 == pytest.approx(0.8, abs=1e-9)
    assert vs.delta == pytest.approx(0.05)


def test_zero_reward_root():
    vs = build_value_polytopes(zero_reward(coin()), 0.1)
    v, arg = max_principal_value(vs.system(1, ROOT))
    assert v == pytest.approx(0.0, abs=1e-9) and np.allclose(arg, 0.0, atol=1e-9)


def test_polytopes_inside_box_and_consistent():
    m = random_h3(4)
    vs = build_value_polytopes(m, 0.4)
    for (h, o), poly in vs.polytopes.items():
        assert poly.owner == (h, o)
        assert np.all(poly.vertices >= -1e-9) and np.all(poly.vertices <= m.horizon + 1e-9)
        assert np.all(poly.vertices @ poly.H.T <= poly.b + 1e-7)


def test_vertices_reverify_in_generating_system():
    m = random_h3(6)
    vs = build_value_polytopes(m, 0.4)
    for (h, o), poly in vs.polytopes.items():
        if h == m.horizon:
            continue
        sys_ = vs.system(h, o)
        for v in poly.vertices:
            assert sys_.is_feasible(v)


def test_epsilon_guarantee_and_h2_exactness():
    for seed in range(3):
        m = random_h2(seed)
        _, sys_ = root_system(m)
        assert max_principal_value(sys_)[0] == pytest.approx(oracle.brute_force_optimum(m)[0], abs=1e-6)
    m = random_h3(1)
    coarse = max_principal_value(build_value_polytopes(m, 0.4, build_root=False).system(1, ROOT))[0]
    fine = max_principal_value(build_value_polytopes(m, 0.1, build_root=False).system(1, ROOT))[0]
    assert coarse >= fine - 0.4 and coarse <= fine + 1e-7


def test_invalid_epsilon():
    with pytest.raises(ValueError):
        build_value_polytopes(coin(), 0.0)


def test_polytope_dump_format():
    poly = build_value_polytopes(coin(), 0.1).root()
    d = poly.to_dict()
    assert set(d) == {"dimension", "vertices", "H", "b", "owner"}
    assert d["owner"] == {"h": 1, "o": None}
    assert isinstance(ValuePolytope.from_dict(d), ValuePolytope)
