"""Command-line entry point: ``stochpa {solve,policy,oracle,learn}``.

Exit codes: 0 success, 2 invalid input or usage, 3 numerical failure.
``--model`` accepts a path or the name of a bundled fixture.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import learning, lp, oracle
from .fixtures import FIXTURES, resolve_model
from .model import ModelError, StepInteraction
from .policy_forward import (TRUTHFUL, InfeasibleTargetError, PolicyHandle, TableDeviationPlan,
                             policy_distribution, rollout)
from .valueset_dp import EmptyInducibleSetError, build_value_polytopes, max_principal_value

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _solve(args):
    m = resolve_model(args.model)
    return m, build_value_polytopes(m, args.epsilon)


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    m, vs = _solve(args)
    if m.horizon == 1:
        v_star, arg = 0.0, np.zeros(2)
    else:
        v_star, arg = max_principal_value(vs.system(1, None))
    wall = (time.perf_counter() - t0) * 1000
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        polys = [p.to_dict() for _, p in sorted(vs.polytopes.items(), key=lambda kv: repr(kv[0]))]
        (out / "polytopes.json").write_text(json.dumps(polys, indent=1) + "\n")
        summary = {"epsilon": vs.epsilon, "delta": vs.delta, "v_star": v_star,
                   "argvec": [float(x) for x in arg], "wall_time_ms": wall}
        (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"v_star={v_star:.6f}")
    if not args.quiet:
        print(f"argvec={arg[0]:.6f},{arg[1]:.6f}", file=sys.stderr)
    return EXIT_OK


def _history(m, steps):
    idx = {
        "state": {n: i for i, n in enumerate(m.states)},
        "principal_obs": {n: i for i, n in enumerate(m.principal_obs)},
        "agent_obs": {n: i for i, n in enumerate(m.agent_obs)},
        "principal_action": {n: i for i, n in enumerate(m.principal_actions)},
        "agent_action": {n: i for i, n in enumerate(m.agent_actions)},
    }
    kinds = {"state": "state", "principal_obs": "principal_obs", "agent_obs": "agent_obs",
             "reported_obs": "agent_obs", "principal_action": "principal_action",
             "recommended_action": "agent_action", "played_action": "agent_action"}
    out = []
    for i, st in enumerate(steps):
        try:
            out.append(StepInteraction(*(idx[kinds[f]][st[f]] for f in StepInteraction._fields)))
        except (KeyError, TypeError) as exc:
            raise InputError(f"history step {i + 1}: bad or missing field {exc}") from exc
    return out


def cmd_policy(args) -> int:
    m, vs = _solve(args)
    ph = PolicyHandle(vs)
    if args.rollout is not None:
        agent = TRUTHFUL
        if args.deviation:
            try:
                agent = TableDeviationPlan.from_dict(m, _read_json(args.deviation))
            except KeyError as exc:
                raise InputError(f"deviation plan: unknown name {exc}") from exc
        rng = np.random.default_rng(args.seed)
        lines = ["episode,vP,vA"]
        for ep in range(1, args.rollout + 1):
            _, (p, a) = rollout(ph, m, agent, rng)
            lines.append(f"{ep},{p:.10g},{a:.10g}")
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    if not args.history:
        raise InputError("policy needs --history or --rollout")
    q = _read_json(args.history)
    hist = _history(m, q.get("history", []))
    if len(hist) >= m.horizon:
        raise InputError(f"history too long for horizon {m.horizon}")
    try:
        wp = m.principal_obs.index(q["principal_obs"])
        rep = m.agent_obs.index(q["report"])
    except (KeyError, ValueError) as exc:
        raise InputError(f"query needs valid principal_obs and report ({exc})") from exc
    dist = policy_distribution(ph, hist, wp, rep)
    nAA = len(m.agent_actions)
    out = {f"{m.principal_actions[a // nAA]}/{m.agent_actions[a % nAA]}": float(p) + 0.0  # no -0.0
           for a, p in enumerate(dist)}
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    m = resolve_model(args.model)
    if args.h2_optimum:
        if m.horizon != 2:
            raise InputError("--h2-optimum needs a horizon-2 model")
        v, _, vec = oracle.brute_force_optimum(m)
        out = {"v_star": v, "argvec": [float(x) for x in vec]}
    else:
        vs = build_value_polytopes(m, args.epsilon)
        ph = PolicyHandle(vs)
        if args.check_ic:
            r = oracle.ic_check(m, ph, tol=args.tol)
            out = {"pass": bool(r.passed), "gap": float(r.gap),
                   "truthful_agent_value": float(r.truthful_value), "best_response_value": float(r.best_value)}
        else:
            vp, va = oracle.exact_policy_values(m, ph)
            out = {"vP": float(vp), "vA": float(va), "target": [float(x) for x in ph.target]}
    _emit(json.dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_learn(args) -> int:
    m = resolve_model(args.model)
    try:
        cfg = learning.LearningConfig(args.episodes, failure_prob=args.q, seed=args.seed,
                                      c_explore=args.c_explore, delta=args.delta, n0=args.n0,
                                      adversarial_agent=args.adversarial)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = learning.run_learning(m, cfg)
    _emit(report.to_csv(), args.out)
    if not args.quiet:
        print(f"delta={report.delta:.6g} n0={report.n0} regP={report.regP_cum[-1]:.6g} "
              f"regA={report.regA_cum[-1]:.6g}", file=sys.stderr)
    return EXIT_OK


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress):
        g = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)
        g.add_argument("--seed", type=int, **({} if suppress else {"default": 0}))
        g.add_argument("--tol-feas", type=_positive, help="LP feasibility tolerance")
        g.add_argument("--tol-obj", type=_positive, help="objective tie tolerance")
        g.add_argument("--quiet", action="store_true", **({} if suppress else {"default": False}))
        return g

    # flags may come before or after the subcommand; the subcommand copy must not reset them
    common = global_flags(True)
    p = argparse.ArgumentParser(prog="stochpa", parents=[global_flags(False)],
                                description="Optimal commitments in principal-agent stochastic games.")
    sub = p.add_subparsers(dest="command", required=True)
    model_help = f"game JSON file or fixture name ({', '.join(FIXTURES)})"

    s = sub.add_parser("solve", parents=[common], help="build value sets and report the optimum")
    s.add_argument("--model", required=True, help=model_help)
    s.add_argument("--epsilon", type=_positive, default=0.1)
    s.add_argument("--out", help="directory for polytopes.json and summary.json")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("policy", parents=[common], help="query or roll out the committed policy")
    s.add_argument("--model", required=True, help=model_help)
    s.add_argument("--epsilon", type=_positive, default=0.1)
    s.add_argument("--history", help="JSON query: {history: [...], principal_obs, report}")
    s.add_argument("--rollout", type=int, help="number of episodes to simulate")
    s.add_argument("--deviation", help="JSON deviation plan for the simulated agent")
    s.add_argument("--out")
    s.set_defaults(func=cmd_policy)

    s = sub.add_parser("oracle", parents=[common], help="exact checks on small instances")
    s.add_argument("--model", required=True, help=model_help)
    s.add_argument("--epsilon", type=_positive, default=0.1)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--check-ic", action="store_true")
    g.add_argument("--exact-values", action="store_true")
    g.add_argument("--h2-optimum", action="store_true")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("learn", parents=[common], help="explore-then-commit with regret report")
    s.add_argument("--model", required=True, help=model_help)
    s.add_argument("--episodes", type=int, required=True)
    s.add_argument("--q", type=float, default=0.05, help="failure probability")
    s.add_argument("--n0", type=int, help="exploration episodes")
    s.add_argument("--delta", type=float, help="IC relaxation")
    s.add_argument("--c-explore", type=float, default=1.0)
    s.add_argument("--adversarial", action="store_true", help="agent best-responds in the commit phase")
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_learn)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    if args.tol_feas is not None:
        lp.FEAS_TOL = args.tol_feas
    if args.tol_obj is not None:
        lp.OBJ_TOL = args.tol_obj
    try:
        return args.func(args)
    except (InputError, ModelError, KeyError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (lp.LpNumericalError, EmptyInducibleSetError, InfeasibleTargetError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except oracle.BudgetExceededError as exc:
        print(f"error: {exc}; use a smaller instance", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
