"""Command-line front end. Every subcommand reads JSON and writes a JSON report.

Exit codes: 0 success, 1 negative verdict, 2 usage or input error.
"""

import argparse
import json
import sys

from . import environment as envmod
from .errors import RevDirichletError
from .flows import enumerate_null_flows, flow_to_json
from .graph import graph_from_dict, is_strongly_connected, is_two_connected, reverse_graph
from .moments import DEFAULT_MAX_TOTAL, DeterministicOracle, DirichletOracle, check_compatibility
from .montecarlo import (
    DEPENDENCE_THRESHOLD,
    EQUALITY_THRESHOLD,
    NONDIRICHLET_SPECS,
    constant_sampler,
    dirichlet_sampler,
    independence_test,
    nondirichlet_sampler,
    verify_reversal_law,
)
from .rational import format_number
from .reconstruction import DEFAULT_N_MAX, characterize

DEFAULT_SEED = 20240601
DEFAULT_SAMPLES = 100_000


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc


def _graph(args):
    return graph_from_dict(_load_json(args.graph))


def _weights(g, path, mode="exact"):
    alpha = envmod.weights_from_json(g, _load_json(path))
    if mode == "float":
        alpha = envmod.WeightFamily(g, {e: float(v) for e, v in alpha.alpha.items()})
    return alpha


def _oracles(args, g):
    """Forward and reversed oracles from --alpha/--alpha-rev or --env."""
    rg = reverse_graph(g)
    if args.env:
        env = envmod.environment_from_json(g, _load_json(args.env))
        if args.mode == "float" and env.mode == "exact":
            env = envmod.make_environment(g, {e: float(v) for e, v in env.omega.items()}, "float")
        rev = envmod.reverse_environment(g, env)
        return DeterministicOracle.from_environment(env), DeterministicOracle.from_environment(rev)
    if not args.alpha:
        raise InputError("one of --alpha or --env is required")
    alpha = _weights(g, args.alpha, args.mode)
    if args.alpha_rev:
        ralpha = _weights(rg, args.alpha_rev, args.mode)
    else:
        ralpha = envmod.reversed_weights(g, alpha)
    return DirichletOracle(g, alpha), DirichletOracle(rg, ralpha)


def cmd_graph_check(args):
    g = _graph(args)
    rg = reverse_graph(g)
    report = {
        "n_vertices": len(g.vertices),
        "n_edges": len(g.edges),
        "self_loops": g.has_self_loops(),
        "strongly_connected": is_strongly_connected(g),
        "two_connected": is_two_connected(g),
        "reversed_two_connected": is_two_connected(rg),
    }
    return 0, report


def cmd_flows_enum(args):
    g = _graph(args)
    flows = enumerate_null_flows(g, args.max_total)
    return 0, {"max_total": args.max_total, "count": len(flows),
               "flows": [flow_to_json(g, f) for f in flows]}


def cmd_env_sample(args):
    g = _graph(args)
    alpha = _weights(g, args.alpha)
    env = envmod.sample_dirichlet_environment(g, alpha, args.seed)
    return 0, {"seed": args.seed, "environment": envmod.environment_to_json(env)}


def cmd_env_reverse(args):
    g = _graph(args)
    env = envmod.environment_from_json(g, _load_json(args.env))
    pi = envmod.stationary_distribution(g, env)
    rev = envmod.reverse_environment(g, env)
    render = format_number if env.mode == "exact" else float
    return 0, {
        "stationary": {str(x): render(v) for x, v in pi.items()},
        "reversed_graph": {"vertices": list(rev.graph.vertices),
                           "edges": [list(e) for e in rev.graph.edges]},
        "reversed_environment": envmod.environment_to_json(rev),
    }


def cmd_verify_reversal(args):
    g = _graph(args)
    alpha = _weights(g, args.alpha)
    report = verify_reversal_law(g, alpha, args.samples, args.seed, threshold=args.threshold)
    return (0 if report.passed else 1), report.to_json()


def cmd_compat_check(args):
    g = _graph(args)
    f, f_rev = _oracles(args, g)
    tol = args.tolerance if args.mode == "float" else None
    report = check_compatibility(g, f, f_rev, args.max_total, tolerance=tol)
    return (0 if report.passed else 1), report.to_json()


def cmd_characterize(args):
    g = _graph(args)
    f, f_rev = _oracles(args, g)
    tol = args.tolerance if args.mode == "float" else None
    result = characterize(g, f, f_rev, n_max=args.n_max, tol=tol)
    return (1 if result.verdict == "inconsistent" else 0), result.to_json()


def cmd_independence_test(args):
    g = _graph(args)
    if sum(bool(v) for v in (args.alpha, args.fixture, args.env)) != 1:
        raise InputError("give exactly one of --alpha, --fixture, --env")
    if args.alpha:
        sampler = dirichlet_sampler(g, _weights(g, args.alpha))
    elif args.fixture:
        sampler = nondirichlet_sampler(g, args.fixture)
    else:
        sampler = constant_sampler(envmod.environment_from_json(g, _load_json(args.env)))
    report = independence_test(g, sampler, args.samples, args.seed, threshold=args.threshold)
    return (1 if report.dependent else 0), report.to_json()


def build_parser():
    p = argparse.ArgumentParser(prog="revdirichlet", description=__doc__.splitlines()[0])
    p.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    def add(parser_or_sub, name, func, help_text):
        sp = parser_or_sub.add_parser(name, help=help_text)
        sp.add_argument("--graph", required=True, help="graph JSON file")
        sp.add_argument("--output", "-o", default=argparse.SUPPRESS,
                        help="write the JSON report here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    graph = sub.add_parser("graph", help="graph utilities").add_subparsers(dest="action", required=True)
    add(graph, "check", cmd_graph_check, "connectivity report")

    flows = sub.add_parser("flows", help="null-divergence flows").add_subparsers(dest="action", required=True)
    sp = add(flows, "enum", cmd_flows_enum, "enumerate null-divergence flows")
    sp.add_argument("--max-total", type=int, default=DEFAULT_MAX_TOTAL)

    env = sub.add_parser("env", help="environments").add_subparsers(dest="action", required=True)
    sp = add(env, "sample", cmd_env_sample, "draw one Dirichlet environment")
    sp.add_argument("--alpha", required=True, help="weights JSON file")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp = add(env, "reverse", cmd_env_reverse, "stationary law and reversed environment")
    sp.add_argument("--env", required=True, help="environment JSON file")

    sp = add(sub, "verify-reversal", cmd_verify_reversal, "Monte Carlo check of the reversal law")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--threshold", type=float, default=EQUALITY_THRESHOLD)

    def oracle_args(sp):
        sp.add_argument("--alpha", help="Dirichlet weights JSON for the forward oracle")
        sp.add_argument("--alpha-rev", help="weights JSON on the reversed graph (default: reversed --alpha)")
        sp.add_argument("--env", help="fixed environment JSON (deterministic oracles)")
        sp.add_argument("--mode", choices=("exact", "float"), default="exact")
        sp.add_argument("--tolerance", type=float, default=1e-9,
                        help="relative tolerance in float mode")

    compat = sub.add_parser("compat", help="compatibility of moment functions").add_subparsers(
        dest="action", required=True)
    sp = add(compat, "check", cmd_compat_check, "check compatibility over null-divergence flows")
    oracle_args(sp)
    sp.add_argument("--max-total", type=int, default=DEFAULT_MAX_TOTAL)

    sp = add(sub, "characterize", cmd_characterize, "classify a forward/reversed oracle pair")
    oracle_args(sp)
    sp.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)

    sp = add(sub, "independence-test", cmd_independence_test,
             "test cross-site independence of the reversed environment")
    sp.add_argument("--alpha", help="Dirichlet weights JSON")
    sp.add_argument("--fixture", choices=NONDIRICHLET_SPECS, help="non-Dirichlet fixture family")
    sp.add_argument("--env", help="constant environment JSON")
    sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--threshold", type=float, default=DEPENDENCE_THRESHOLD)
    return p


def _emit(report, output):
    text = json.dumps(report, indent=2) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        code, report = args.func(args)
    except (InputError, RevDirichletError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
