"""Command-line front end: JSON in, JSON/DOT out, scriptable exit codes.

Exit status 0 means the command ran and any predicate held, 2 means the
command ran and the predicate failed (with a witness printed), 1 means the
command could not run (bad usage or bad input).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import gibbs, joint, kernels, neural, specs, structures
from .errors import RobustmapsError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FALSE = 2


class _Parser(argparse.ArgumentParser):
    """Usage problems exit 1; status 2 is reserved for failed predicates."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _load_spec(path: str) -> specs.RobustnessSpec:
    return specs.spec_from_json(_read(path))


def _load_set(spec: specs.RobustnessSpec, path: str | None) -> list[int]:
    if path is None:
        return list(spec.space.states())
    doc = json.loads(_read(path))
    if isinstance(doc, dict):
        doc = doc["set"]
    return [spec.space.as_index(x if isinstance(x, int) else tuple(x)) for x in doc]


def _load_fraction(value) -> Fraction:
    if isinstance(value, str):
        num, _, den = value.partition("/")
        return Fraction(int(num), int(den or "1"))
    return Fraction(value)


def _parse_weights(text: str) -> tuple[float, ...]:
    return tuple(float(w) for w in text.split(","))


def _parse_nodes(text: str) -> tuple[int, ...]:
    return tuple(int(w) for w in text.split(",")) if text else ()


# -- commands ----------------------------------------------------------------


def _cmd_graph(args) -> int:
    spec = _load_spec(args.spec)
    subset = _load_set(spec, args.set)
    graph = structures.build_graph(spec, subset)
    _write(args.dot, structures.export_dot(graph))
    print(f"vertices: {len(graph.vertices)} edges: {graph.edge_count()}")
    return EXIT_OK


def _cmd_components(args) -> int:
    spec = _load_spec(args.spec)
    subset = _load_set(spec, args.set)
    structure = structures.components_of_set(spec, subset)
    if args.dot:
        graph = structures.build_graph(spec, subset)
        _write(args.dot, structures.export_dot(graph, structure))
    if args.out:
        _write(args.out, structures.structure_to_json(structure) + "\n")
    print(f"components: {len(structure.blocks)}")
    return EXIT_OK


def _cmd_maximal(args) -> int:
    spec = _load_spec(args.spec)
    found = structures.enumerate_maximal_structures(spec, limit=args.limit)
    if args.out:
        docs = [json.loads(structures.structure_to_json(s)) for s in found]
        _write(args.out, json.dumps(docs, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"maximal structures: {len(found)}")
    return EXIT_OK


def _cmd_check_robust(args) -> int:
    spec = _load_spec(args.spec)
    kernel = kernels.kernel_from_json(spec.space, _read(args.kernel))
    subset = _load_set(spec, args.set)
    if kernels.is_r_robust_map(kernel, spec, subset, tol=args.tol):
        print("robust")
        return EXIT_OK
    structure = structures.components_of_set(spec, subset)
    for block in structure.blocks:
        states = sorted(block)
        for other in states[1:]:
            if not kernels.rows_equal(
                kernel.rows[states[0]], kernel.rows[other], kernel.mode, args.tol
            ):
                print(f"not robust: witness states {states[0]} and {other}")
                return EXIT_FALSE
    print("not robust")
    return EXIT_FALSE


def _cmd_gibbs(args) -> int:
    if args.modalities:
        family = kernels.modalities_from_json(_read(args.modalities))
        potentials = gibbs.moebius_potentials(family)
        _write(args.out, gibbs.potentials_to_json(potentials) + "\n")
    else:
        potentials = gibbs.potentials_from_json(_read(args.potentials))
        family = gibbs.gibbs_to_modalities(potentials)
        _write(args.out, kernels.modalities_to_json(family) + "\n")
    return EXIT_OK


def _cmd_project(args) -> int:
    family = kernels.modalities_from_json(_read(args.modalities))
    projected = gibbs.project_to_tilde_k(family, args.k)
    _write(args.out, kernels.modalities_to_json(projected) + "\n")
    print(f"degenerate rows: {len(projected.degenerate_rows)}")
    return EXIT_OK


def _cmd_ci(args) -> int:
    spec = _load_spec(args.spec)
    p = joint.joint_from_json(_read(args.dist))
    if joint.is_r_robust_distribution(p, spec, tol=args.tol):
        print("robust")
        return EXIT_OK
    for r, values in spec.pairs():
        nodes = tuple(sorted(r))
        if not joint.check_ci(p, nodes, values, tol=args.tol):
            print(f"not robust: witness pair R={list(nodes)} x_R={list(values)}")
            return EXIT_FALSE
    print("not robust")
    return EXIT_FALSE


def _cmd_decompose_support(args) -> int:
    spec = _load_spec(args.spec)
    p = joint.joint_from_json(_read(args.dist))
    structure = joint.support_structure(p, spec)
    if args.out:
        _write(args.out, structures.structure_to_json(structure) + "\n")
    print(f"components: {len(structure.blocks)}")
    return EXIT_OK


def _cmd_sample(args) -> int:
    spec = _load_spec(args.spec)
    rng = random.Random(args.seed)
    if args.structure:
        structure = structures.structure_from_json(spec.space, _read(args.structure))
        if args.params:
            doc = json.loads(_read(args.params))
            params = joint.ComponentParams(
                block_weights=tuple(_load_fraction(v) for v in doc["mu"]),
                input_laws=tuple(
                    tuple(_load_fraction(v) for v in law) for law in doc["lambda"]
                ),
                output_laws=tuple(
                    tuple(_load_fraction(v) for v in law) for law in doc["p"]
                ),
            )
        else:
            params = joint.random_component_params(structure, rng)
        p = joint.sample_from_component(structure, params)
    else:
        p, structure = joint.random_robust_distribution(spec, rng)
    _write(args.out, joint.joint_to_json(p) + "\n")
    print(f"support: {len(p.support())} blocks: {len(structure.blocks)}")
    return EXIT_OK


def _cmd_bound(args) -> int:
    spec = _load_spec(args.spec)
    print(structures.structure_size_bound(spec, _parse_nodes(args.nodes)))
    return EXIT_OK


def _cmd_code_size(args) -> int:
    print(structures.max_singleton_code_size(args.n, args.k, args.d))
    return EXIT_OK


def _cmd_neuron(args) -> int:
    weights = _parse_weights(args.weights)
    if args.limit:
        family = neural.threshold_limit(weights, args.eta, renormalized=args.renormalized)
    elif args.renormalized:
        family = neural.renormalized_threshold_modalities(weights, args.eta, args.beta)
    else:
        family = neural.threshold_modalities(
            neural.ThresholdParams(weights=weights, eta=args.eta, beta=args.beta)
        )
    _write(args.out, kernels.modalities_to_json(family) + "\n")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="robustmaps", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("graph", _cmd_graph, help="induced robustness graph as DOT")
    p.add_argument("--spec", required=True)
    p.add_argument("--set")
    p.add_argument("--dot")

    p = add("components", _cmd_components, help="connected components of a subset")
    p.add_argument("--spec", required=True)
    p.add_argument("--set")
    p.add_argument("--dot")
    p.add_argument("--out")

    p = add("maximal", _cmd_maximal, help="enumerate maximal structures")
    p.add_argument("--spec", required=True)
    p.add_argument("--limit", type=int)
    p.add_argument("--out")

    p = add("check-robust", _cmd_check_robust, help="test a kernel for robustness")
    p.add_argument("--kernel", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--set")
    p.add_argument("--tol", type=float, default=kernels.DEFAULT_TOL)

    p = add("gibbs", _cmd_gibbs, help="convert between a family and its potentials")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--modalities")
    group.add_argument("--potentials")
    p.add_argument("--out")

    p = add("project", _cmd_project, help="project a family onto the geometric-mean set")
    p.add_argument("--modalities", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")

    for name in ("ci", "verify-ci"):
        p = add(name, _cmd_ci, help="independence checks of a joint distribution")
        p.add_argument("--dist", required=True)
        p.add_argument("--spec", required=True)
        p.add_argument("--tol", type=float, default=joint.DEFAULT_CI_TOL)

    p = add("decompose-support", _cmd_decompose_support, help="support components")
    p.add_argument("--dist", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--out")

    for name in ("sample", "sample-joint"):
        p = add(name, _cmd_sample, help="draw an exactly robust joint distribution")
        p.add_argument("--spec", required=True)
        p.add_argument("--structure")
        p.add_argument("--params")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    p = add("bound", _cmd_bound, help="block-count bound from one node set")
    p.add_argument("--spec", required=True)
    p.add_argument("--nodes", required=True)

    p = add("code-size", _cmd_code_size, help="largest pairwise-distant word set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)

    p = add("neuron", _cmd_neuron, help="threshold-unit knockout family")
    p.add_argument("--weights", required=True)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--renormalized", action="store_true")
    p.add_argument("--limit", action="store_true")
    p.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (RobustmapsError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
