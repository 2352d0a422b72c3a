"""Command line front end.

Exit codes: 0 computed (whatever the verdict), 1 bad input or failed
example check, 2 inadmissible fields, 3 refinement exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import twisted_cohomology as tc
from .complexes import circle, icosphere, mapping_torus_antipodal, parse_complex_spec
from .errors import (
    ChartDomainError,
    InconsistentSystem,
    Inadmissible,
    InvalidComplex,
    InvalidParams,
    RefinementExceeded,
    ResidualTooLarge,
    UnknownBuiltin,
    UnknownExample,
)
from .fields import (
    builtin_field,
    conjugated,
    cp1_projection,
    diag_const,
    fiber_inclusion,
    pullback,
    root_swap_circle,
    twisted_A,
    twisted_B,
)
from .monodromy import LocalSystem, build_local_system
from .obstruction import chern_numbers, obstruction_class
from .settings import DEFAULT, Tolerances

EXIT_OK, EXIT_INPUT, EXIT_INADMISSIBLE, EXIT_REFINEMENT = 0, 1, 2, 3
INPUT_ERRORS = (UnknownBuiltin, InvalidParams, InvalidComplex, ChartDomainError, UnknownExample, OSError, ValueError)
REFINEMENT_ERRORS = (RefinementExceeded, ResidualTooLarge, InconsistentSystem)


def _dump(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _tolerances(args) -> Tolerances:
    return DEFAULT.with_(
        gap_tol=args.tol_gap,
        norm_tol=args.tol_norm,
        match_threshold=args.match_threshold,
        max_subdiv=args.max_subdiv,
    )


# ----------------------------------------------------------------------
# examples


def example_circle(tol: Tolerances, seed: int, jobs=None) -> dict:
    c = circle(12)
    a = root_swap_circle()
    b = conjugated(a, seed)
    r = obstruction_class(a, b, c, tol, jobs)
    checks = {
        "monodromy_transposition": [list(p) for p in r.monodromy.permutations] == [[1, 0]],
        "H2_zero": r.h2.is_zero,
        "vanishing": r.vanishing,
        "intertwiner_certified": bool(r.certificate and r.certificate["passed"]),
    }
    return {"checks": checks, "report": r.to_json()}


def example_cp1_chern(tol: Tolerances, seed: int, jobs=None, level: int = 1) -> dict:
    c = icosphere(level)
    d = diag_const(0, 1)
    classes, chern = {}, {}
    ok = True
    for k in range(-2, 3):
        p = cp1_projection(k)
        r = obstruction_class(d, p, c, tol, jobs, certify=False)
        classes[str(k)] = r.rebased_class
        cd = np.subtract(chern_numbers(p, r.complex, tol, jobs), chern_numbers(d, r.complex, tol, jobs)).tolist()
        chern[str(k)] = cd
        ok &= r.rebased_class == [k, -k] and cd == [k, -k]
    return {"checks": {"classes_k_minus_k": bool(ok)}, "classes": classes, "chern_difference": chern}


def example_mapping_torus(tol: Tolerances, seed: int, jobs=None) -> dict:
    m = mapping_torus_antipodal(0)
    h2_untwisted = tc.cohomology_group(m, LocalSystem.trivial(m, 1), 2)
    r = obstruction_class(twisted_A(), twisted_B(), m, tol, jobs, certify=False)
    s = icosphere(0)
    fa = pullback(twisted_A(), fiber_inclusion, "sphere", "twisted_A|fiber")
    fb = pullback(twisted_B(), fiber_inclusion, "sphere", "twisted_B|fiber")
    fiber = obstruction_class(fa, fb, s, tol, jobs, certify=False)
    checks = {
        "untwisted_H2_zero": h2_untwisted.is_zero,
        "twisted_nonvanishing": not r.vanishing,
        "fiber_class": fiber.rebased_class == [1, -1],
    }
    return {
        "checks": checks,
        "untwisted_H2": h2_untwisted.to_json(2),
        "report": r.to_json(),
        "fiber_class": fiber.rebased_class,
    }


EXAMPLES = {
    "circle": example_circle,
    "cp1_chern": example_cp1_chern,
    "mapping_torus": example_mapping_torus,
}


def cmd_examples(args) -> int:
    names = list(EXAMPLES) if args.name == "all" else [args.name]
    if any(n not in EXAMPLES for n in names):
        raise UnknownExample(f"unknown example {args.name!r}; choose from {sorted(EXAMPLES) + ['all']}")
    tol = _tolerances(args)
    results = {}
    for name in names:
        res = EXAMPLES[name](tol, args.seed, args.jobs)
        res["passed"] = all(res["checks"].values())
        results[name] = res
        print(f"{name}: {'PASS' if res['passed'] else 'FAIL'}", file=sys.stderr)
    _dump(results, args.out)
    return EXIT_OK if all(r["passed"] for r in results.values()) else EXIT_INPUT


# ----------------------------------------------------------------------
# compute / cohomology


def cmd_compute(args) -> int:
    tol = _tolerances(args)
    c = parse_complex_spec(args.complex)
    a = builtin_field(args.field_a, default_seed=args.seed)
    b = builtin_field(args.field_b, default_seed=args.seed)
    try:
        r = obstruction_class(a, b, c, tol, args.jobs)
    except Inadmissible as exc:
        body = {"admissible": False, "error": str(exc)}
        body.update(exc.report or {})
        _dump(body, args.out)
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    _dump(r.to_json(), args.out)
    return EXIT_OK


def cmd_cohomology(args) -> int:
    c = parse_complex_spec(args.complex)
    if args.field_a:
        ls = build_local_system(builtin_field(args.field_a, default_seed=args.seed), c, _tolerances(args), args.jobs)
    elif args.sign:
        ls = LocalSystem.sign_system(c)
    else:
        ls = LocalSystem.trivial(c, args.trivial)
    degrees = [args.degree] if args.degree is not None else [0, 1, 2]
    out = {"complex": c.name, "n": ls.n, "groups": [tc.cohomology_group(c, ls, k).to_json(k) for k in degrees]}
    _dump(out, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uniequiv", description="Obstructions to unitary equivalence of normal matrix fields.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.add_argument("--tol-gap", type=float, help=f"eigenvalue gap tolerance (default {DEFAULT.gap_tol})")
        sp.add_argument("--tol-norm", type=float, help=f"relative normality tolerance (default {DEFAULT.norm_tol})")
        sp.add_argument("--match-threshold", type=float, help=f"projection matching threshold (default {DEFAULT.match_threshold})")
        sp.add_argument("--max-subdiv", type=int, help=f"max edge doublings (default {DEFAULT.max_subdiv})")
        sp.add_argument("--seed", type=int, default=0, help="default seed for conjugated fields")
        sp.add_argument("--jobs", type=int, default=None, help="worker threads for edge transport")

    ex = sub.add_parser("examples", help="run a worked example with pinned expectations")
    ex.add_argument("name", nargs="?", default="all", help="circle | cp1_chern | mapping_torus | all")
    common(ex)
    ex.set_defaults(func=cmd_examples)

    cp = sub.add_parser("compute", help="obstruction report for a pair of fields")
    cp.add_argument("--complex", required=True, help="builtin complex spec (e.g. icosphere:level=1) or JSON file")
    cp.add_argument("--field-a", required=True, help="e.g. builtin:diag_const:values=0,1")
    cp.add_argument("--field-b", required=True, help="e.g. builtin:cp1_projection:k=2")
    common(cp)
    cp.set_defaults(func=cmd_compute)

    co = sub.add_parser("cohomology", help="twisted cohomology groups")
    co.add_argument("--complex", required=True)
    grp = co.add_mutually_exclusive_group()
    grp.add_argument("--field-a", help="use the eigenvalue local system of this field")
    grp.add_argument("--sign", action="store_true", help="rank-one system with -1 on non-tree edges")
    grp.add_argument("--trivial", type=int, default=1, metavar="N", help="untwisted Z^N (default 1)")
    co.add_argument("--degree", type=int, choices=[0, 1, 2, 3])
    common(co)
    co.set_defaults(func=cmd_cohomology)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _tolerances(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return args.func(args)
    except Inadmissible as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except REFINEMENT_ERRORS as exc:
        print(f"refinement exceeded: {exc}", file=sys.stderr)
        return EXIT_REFINEMENT
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
