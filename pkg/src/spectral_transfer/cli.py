"""Command-line entry point: generate, verify, embed, sweep, gd-check."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

from .errors import DegenerateParams, Divergence, GraphError, ParseError
from .generators import SbmParams, TOPOLOGIES, generate_sbm, perturb
from .graph import save_graph, load_graph
from .harness import (
    SWEEP_COLUMNS,
    SweepConfig,
    embedding_rows,
    gd_crosscheck,
    jsonable,
    run_sweep,
    run_verify,
    verify_exit_code,
    write_csv,
)
from .metrics import DEFAULT_C, DEFAULT_EXACT_CAP
from .spectral import minimize_loss

EXIT_FAIL = 1
EXIT_INPUT = 2


def _add_generator_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("generator (defaults give the reference instance)")
    g.add_argument("--params", type=Path, help="JSON file with generator parameters")
    defaults = SbmParams()
    g.add_argument("--r", type=int, default=defaults.r)
    g.add_argument("--cluster-size", type=int, default=defaults.cluster_size)
    g.add_argument("--p-intra", type=float, default=defaults.p_intra)
    g.add_argument("--q-same", type=float, default=defaults.q_same)
    g.add_argument("--q-cross", type=float, default=defaults.q_cross)
    g.add_argument("--q-other", type=float, default=defaults.q_other)
    g.add_argument("--extra-clusters", type=int, default=defaults.extra_clusters)
    g.add_argument("--topology", choices=TOPOLOGIES, default=defaults.intra_topology)
    g.add_argument("--epsilon", type=float, default=defaults.epsilon)
    g.add_argument("--chords", type=int, default=defaults.chords)
    g.add_argument("--noise", type=float, default=0.0, help="multiplicative edge noise after generation")


def _params_from_args(args) -> SbmParams:
    if args.params is not None:
        data = json.loads(args.params.read_text())
        data.setdefault("seed", args.seed)
        known = {f.name for f in fields(SbmParams)}
        unknown = set(data) - known
        if unknown:
            raise DegenerateParams(f"unknown parameters: {sorted(unknown)}")
        return SbmParams(**data)
    return SbmParams(
        r=args.r, cluster_size=args.cluster_size, p_intra=args.p_intra, q_same=args.q_same,
        q_cross=args.q_cross, q_other=args.q_other, extra_clusters=args.extra_clusters,
        intra_topology=args.topology, epsilon=args.epsilon, chords=args.chords, seed=args.seed,
    )


def _instance_from_args(args):
    inst = generate_sbm(_params_from_args(args))
    if args.noise:
        inst = perturb(inst, args.noise, args.seed)
    return inst


def _load(args):
    graph, domain = load_graph(args.graph, normalize=args.normalize)
    return graph, domain


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_generate(args) -> int:
    inst = _instance_from_args(args)
    save_graph(inst.graph, inst.domain_spec, args.out)
    return 0


def cmd_verify(args) -> int:
    graph, domain = _load(args)
    if domain is None:
        raise GraphError("graph file has no clusters; verify needs a domain partition")
    k = args.k if args.k is not None else domain.m
    report = run_verify(graph, domain, k, args.sigma, args.c, args.exact_gamma_cap, args.t)
    code = verify_exit_code(report, args.require_assumptions)
    report["exit_code"] = code
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return code


def cmd_embed(args) -> int:
    graph, _ = _load(args)
    rep = minimize_loss(graph, args.k, args.sigma)
    cols, rows = embedding_rows(rep)
    text = write_csv(rows, cols)
    _emit(text, args.out)
    return 0


def cmd_sweep(args) -> int:
    if args.graph is not None:
        graph, domain = _load(args)
        if domain is None:
            raise GraphError("graph file has no clusters; sweep needs a domain partition")
    else:
        inst = _instance_from_args(args)
        graph, domain = inst.graph, inst.domain_spec
    config = SweepConfig(
        t_values=args.t or [1, 2, 3, 4, 5],
        k_values=args.k or [2 * domain.r + len(domain.clusters[2 * domain.r:])],
        sigma=args.sigma,
        c=args.c,
        exact_gamma_cap=args.exact_gamma_cap,
        include_thm32_rows=not args.no_thm32_rows,
    )
    rows = run_sweep(graph, domain, config)
    _emit(write_csv(rows, SWEEP_COLUMNS), args.out)
    return 0


def cmd_gd_check(args) -> int:
    graph, _ = _load(args)
    try:
        report = gd_crosscheck(graph, args.k, args.sigma, args.steps, args.lr, args.seed)
    except Divergence as exc:
        print(f"gd-check: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = jsonable(asdict(report))
    out["tolerance"] = args.tol
    out["within_tolerance"] = report.loss_gap <= args.tol
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if out["within_tolerance"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectral-transfer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph_required=True):
        p.add_argument("--graph", type=Path, required=graph_required, help="graph JSON file")
        p.add_argument("--normalize", action="store_true", help="rescale weights to total mass 1")
        p.add_argument("--out", type=Path, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("generate", help="write a synthetic block instance")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_generator_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="assumption report and lemma checks (JSON)")
    common(p)
    p.add_argument("--k", type=int, help="representation dimension (default: number of clusters)")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--t", type=int, nargs="+", help="restrict checked steps to these values")
    p.add_argument("--exact-gamma-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--require-assumptions", action="store_true",
                   help="also exit nonzero when an assumption verdict fails")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("embed", help="closed-form representation as CSV")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigma", type=float, default=2.0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sweep", help="target error and bounds over (t, k), as CSV")
    common(p, graph_required=False)
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--t", type=int, nargs="+")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--exact-gamma-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--no-thm32-rows", action="store_true",
                   help="skip the extra rows at the average-expansion step counts")
    _add_generator_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gd-check", help="gradient descent vs. closed-form minimizer")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_gd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, GraphError, DegenerateParams, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
