"""Command line: ``mcts-lab run|score|oracle|bench``.

Exit codes: 0 success, 2 invalid configuration or input, 3 partial results.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..domains import LayeredDomain, build_domain
from ..eval import EvalError
from ..mdp import MdpError
from ..oracle import (
    exact_asap_fixed_point, exact_ipa_fixed_point, p_abs_bound, p_abs_exact, p_abs_monte_carlo,
    parse_layered, unroll, value_iteration,
)
from ..oracle.combinatorics import RangeExceeded
from ..search.config import ConfigError
from .config import load_config
from .runner import HarnessError, PartialResults, measure_runtime, run_experiment, score_results

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3


def _value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _domain(args):
    if args.layered:
        with open(args.layered, encoding="utf-8") as fh:
            return LayeredDomain(parse_layered(fh.read()), f"layered:{args.layered}")
    params = {}
    for item in args.param or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = _value(val.strip())
    return build_domain(args.domain, params)


def _unrolled(args):
    domain = _domain(args)
    mdp = domain.mdp if isinstance(domain, LayeredDomain) and args.horizon is None else unroll(
        domain, horizon=args.horizon)
    return domain, mdp


def _label(domain, key) -> str:
    s = key[1]
    return s if isinstance(s, str) else domain.state_label(s)


# -- verbs -------------------------------------------------------------------------------

def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.backend:
        config = dataclasses.replace(config, backend=args.backend)
    try:
        path = run_experiment(config, args.output, args.workers)
    except PartialResults as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    print(path)
    return EXIT_OK


def cmd_score(args) -> int:
    report = score_results(args.files, args.kind, args.output)
    if args.output is None:
        sys.stdout.write(report.to_csv())
        sys.stdout.write(report.to_json())
    else:
        print(f"{args.output}.{args.kind}.csv")
        print(f"{args.output}.{args.kind}.json")
    return EXIT_OK


def cmd_value_iteration(args) -> int:
    domain, mdp = _unrolled(args)
    values = value_iteration(mdp)
    root = (0, mdp.layers[0][0])
    out = {
        "domain": domain.name,
        "horizon": mdp.depth,
        "root": _label(domain, root),
        "V": values.V[root],
        "Q": [values.Q[(0, root[1], a)] for a in range(mdp.num_actions(*root))],
        "optimal_actions": values.optimal_actions(mdp, *root),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_fixed_point(args) -> int:
    domain, mdp = _unrolled(args)
    if args.kind == "asap":
        states, pairs = exact_asap_fixed_point(mdp, args.eps_a, args.eps_t, args.alpha)
    else:
        states, pairs = exact_ipa_fixed_point(mdp, value_iteration(mdp), args.eps_a, args.eps_t, args.alpha)
    groups = []
    for block in states.nontrivial():
        d = block[0][0]
        if mdp.is_terminal(*block[0]) and not args.include_terminal:
            continue
        groups.append({"depth": d, "states": [_label(domain, k) for k in block]})
    out = {"kind": args.kind, "state_groups": groups, "pair_groups": len(pairs.nontrivial())}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_p_abs(args) -> int:
    exact = p_abs_exact(args.n, args.l, args.m)
    out = {
        "n": args.n, "l": args.l, "m": args.m,
        "p_abs": float(exact), "p_abs_exact": str(exact),
        "bound": float(p_abs_bound(args.n, args.l, args.m)),
    }
    if args.trials:
        est, se = p_abs_monte_carlo(args.n, args.l, args.m, args.trials, np.random.default_rng(args.seed))
        out.update(monte_carlo=est, std_error=se)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    config = load_config(args.config)
    if args.backend:
        config = dataclasses.replace(config, backend=args.backend)
    times = measure_runtime(config, warmup=not args.no_warmup)
    base_label = config.agents[0].label
    rows = [
        {"agent": label, "decision_ms": ms, "ratio_to_" + base_label: ms / times[base_label]}
        for label, ms in times.items()
    ]
    text = json.dumps({"domain": config.domain_name, "episodes": config.episodes, "agents": rows}, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------------

def _domain_args(p) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--domain", help="registered domain name, e.g. navigation_fig2")
    src.add_argument("--layered", metavar="FILE", help="layered MDP text file")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="domain parameter (TOML value)")
    p.add_argument("--horizon", type=int, help="unroll depth (default: the domain horizon)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcts-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run an experiment config and write a results CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--workers", type=int)
    p.add_argument("--backend", choices=("compiled", "python"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", help="pairings or relative-improvement scores of result files")
    p.add_argument("kind", choices=("pairings", "relative"))
    p.add_argument("files", nargs="+")
    p.add_argument("-o", "--output", metavar="PREFIX")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("oracle", help="exact reference computations")
    osub = p.add_subparsers(dest="oracle", required=True)
    q = osub.add_parser("value-iteration", help="optimal values at the root")
    _domain_args(q)
    q.set_defaults(func=cmd_value_iteration)
    q = osub.add_parser("fixed-point", help="exact ASAP or IPA groupings")
    q.add_argument("kind", choices=("asap", "ipa"))
    _domain_args(q)
    q.add_argument("--eps-a", type=float, default=0.0)
    q.add_argument("--eps-t", type=float, default=0.0)
    q.add_argument("--alpha", type=float, default=0.0)
    q.add_argument("--include-terminal", action="store_true")
    q.set_defaults(func=cmd_fixed_point)
    q = osub.add_parser("p-abs", help="probability that two random action sets share their abstract image")
    q.add_argument("n", type=int)
    q.add_argument("l", type=int)
    q.add_argument("m", type=int)
    q.add_argument("--trials", type=int, default=0)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_p_abs)

    p = sub.add_parser("bench", help="mean decision time per agent (single-threaded)")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--backend", choices=("compiled", "python"))
    p.add_argument("--no-warmup", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MdpError, EvalError, HarnessError, RangeExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
