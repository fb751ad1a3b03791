"""Command-line front end.

JSON results go to stdout, human-readable summaries to stderr.  Exit codes:
0 success, 1 infeasible / no result exists, 2 validation or usage error.
All randomness flows from --seed; randomized modes refuse to run without it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from envymin import bench as bench_mod
from envymin import dipped as dipped_mod
from envymin import gen as gen_mod
from envymin import peaked as peaked_mod
from envymin import refine as refine_mod
from envymin.core import (
    CapExceededError,
    DomainError,
    InconsistencyError,
    ValidationError,
    allocation_from_json,
    allocation_to_json,
    instance_from_json,
    instance_to_json,
    measure_value,
    welfare,
)
from envymin.oracle import min_measure_exhaustive

_USAGE_ERRORS = (ValidationError, DomainError, InconsistencyError, CapExceededError)

_WELFARE_KINDS = {"util": "utilitarian", "nash": "nash", "egal": "egalitarian"}


def _load_instance(path: str):
    return instance_from_json(Path(path).read_text())


def _emit(doc) -> None:
    print(json.dumps(doc, separators=(",", ":")) if not isinstance(doc, str) else json.dumps(doc))


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    if args.axis_required and inst.axis is None:
        raise ValidationError("instance carries no axis but --axis-required was given")
    if args.method == "oracle":
        value, alloc = min_measure_exhaustive(inst, args.measure)
    else:
        if args.measure != "envy":
            raise DomainError(f"method {args.method} minimizes the envy count only")
        if args.method == "peaked":
            alloc = peaked_mod.min_envy_single_peaked(inst)
        else:
            alloc = dipped_mod.min_envy_single_dipped(inst)
        value = measure_value(inst, alloc, "envy")
    _note(f"optimal {args.measure} value {value} by method {args.method}")
    _emit({"allocation": json.loads(allocation_to_json(alloc)), "value": value})
    return 0


def _cmd_refine(args) -> int:
    inst = _load_instance(args.instance)
    a_hat = allocation_from_json(Path(args.alloc).read_text(), inst)
    if args.mode in ("randomized", "sampled") and args.seed is None:
        raise ValidationError(f"--seed is required for {args.mode} mode")
    if args.mode == "sampled":
        result = refine_mod.refine_sampled(
            inst, a_hat, args.q, args.k, args.measure, seed=args.seed
        )
    else:
        result = refine_mod.refine(
            inst,
            a_hat,
            args.q,
            args.k,
            args.measure,
            mode=args.mode,
            seed=args.seed,
            reps=args.reps,
        )
    if args.mode == "randomized":
        from envymin.core import preference_graph

        d = preference_graph(inst).max_degree
        _note(f"theoretical repetition count 3^(3q(d+1)) = {refine_mod.theoretical_repetitions(args.q, d)}")
    if result is None:
        _emit("infeasible")
        return 1
    before = measure_value(inst, a_hat, args.measure)
    after = measure_value(inst, result, args.measure)
    _note(f"{args.measure}: {before} -> {after}")
    _emit(json.loads(allocation_to_json(result)))
    return 0


def _cmd_pareto(args) -> int:
    inst = _load_instance(args.instance)
    # the structural solvers run without the axis-shape check here so that
    # near-domain instances can still be decided; use `check` to validate
    if args.domain == "peaked":
        result = peaked_mod.min_envy_pareto_single_peaked(inst, validate=False)
    else:
        result = dipped_mod.min_envy_pareto_single_dipped(inst, validate=False)
    if result is None:
        _note("no minimum-envy allocation is Pareto optimal")
        _emit("none exists")
        return 1
    _note(f"envy count {measure_value(inst, result, 'envy')}")
    _emit(json.loads(allocation_to_json(result)))
    return 0


def _cmd_welfare(args) -> int:
    inst = _load_instance(args.instance)
    kind = _WELFARE_KINDS[args.objective]
    allocator = bench_mod.INITIAL_ALLOCATORS[kind]
    alloc = allocator(inst)
    value = welfare(inst, alloc, kind)
    _note(f"maximum {kind} welfare {value}")
    _emit({"allocation": json.loads(allocation_to_json(alloc)), "value": value})
    return 0


def _cmd_gen(args) -> int:
    generators = {
        "uniform": gen_mod.gen_uniform_cardinal,
        "peaked": gen_mod.gen_single_peaked,
        "dipped": gen_mod.gen_single_dipped,
    }
    inst = generators[args.model](args.n, args.m, args.seed)
    text = instance_to_json(inst)
    Path(args.out).write_text(text + "\n")
    _note(f"wrote {args.model} instance (n={args.n}, m={args.m}, seed={args.seed}) to {args.out}")
    print(text)
    return 0


def _cmd_bench(args) -> int:
    out_dir = Path(args.out_dir)
    if args.bench_command == "qsweep":
        initial = _WELFARE_KINDS[args.initial]
        rows = bench_mod.run_q_sweep(
            n=args.n,
            m_range=range(args.m_min, args.m_max + 1),
            instances_per_cell=args.instances,
            initial=initial,
            measure=args.measure,
            seed=args.seed,
        )
        path = out_dir / f"qsweep_{args.initial}_{args.measure}_seed{args.seed}.csv"
    else:
        rows = bench_mod.run_domain_sweep(
            n=args.n,
            m_range=range(args.m_min, args.m_max + 1),
            instances=args.instances,
            domain=args.domain,
            seed=args.seed,
        )
        path = out_dir / f"domain_{args.domain}_seed{args.seed}.csv"
    bench_mod.write_csv(rows, path)
    _note(f"wrote {len(rows)} rows to {path}")
    _emit({"csv": str(path), "rows": len(rows)})
    return 0


def _cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    axis = None
    if args.axis:
        from envymin.core import _parse_name

        axis = tuple(_parse_name(name, "h", inst.m, "house") for name in args.axis.split(","))
    if args.domain == "peaked":
        ok, witness = peaked_mod.validate_single_peaked(inst, axis)
    else:
        ok, witness = dipped_mod.validate_single_dipped(inst, axis, allow_bottom_ties=True)
    doc = {"valid": ok, "witness": None}
    if witness is not None:
        agent, farther, nearer = witness
        doc["witness"] = {"agent": f"i{agent + 1}", "farther": f"h{farther + 1}", "nearer": f"h{nearer + 1}"}
    _note(f"single-{args.domain}: {'valid' if ok else 'violated'}")
    _emit(doc)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envymin",
        description="Envy minimization for house allocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimal allocation for a measure")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--measure", choices=["envy", "total", "max"], default="envy")
    solve.add_argument("--method", choices=["oracle", "peaked", "dipped"], required=True)
    solve.add_argument("--axis-required", action="store_true")
    solve.set_defaults(func=_cmd_solve)

    ref = sub.add_parser("refine", help="reduce a measure by k with at most q moves")
    ref.add_argument("--instance", required=True)
    ref.add_argument("--alloc", required=True)
    ref.add_argument("--q", type=int, required=True)
    ref.add_argument("--k", type=int, required=True)
    ref.add_argument("--measure", choices=["envy", "total", "max"], default="envy")
    ref.add_argument("--mode", choices=["randomized", "exhaustive", "oracle", "sampled"], required=True)
    ref.add_argument("--seed", type=int)
    ref.add_argument("--reps", type=int)
    ref.set_defaults(func=_cmd_refine)

    pareto = sub.add_parser("pareto", help="minimum-envy Pareto-optimal allocation if one exists")
    pareto.add_argument("--instance", required=True)
    pareto.add_argument("--domain", choices=["peaked", "dipped"], required=True)
    pareto.set_defaults(func=_cmd_pareto)

    wel = sub.add_parser("welfare", help="welfare-maximizing baseline allocation")
    wel.add_argument("--instance", required=True)
    wel.add_argument("--objective", choices=["util", "nash", "egal"], required=True)
    wel.set_defaults(func=_cmd_welfare)

    gen = sub.add_parser("gen", help="generate a seeded synthetic instance")
    gen.add_argument("--model", choices=["uniform", "peaked", "dipped"], required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    bench = sub.add_parser("bench", help="experiment sweeps writing CSV files")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    qsweep = bench_sub.add_parser("qsweep")
    qsweep.add_argument("--n", type=int, default=6)
    qsweep.add_argument("--m-min", type=int, default=6)
    qsweep.add_argument("--m-max", type=int, default=11)
    qsweep.add_argument("--instances", type=int, default=100)
    qsweep.add_argument("--initial", choices=["util", "nash", "egal"], default="nash")
    qsweep.add_argument("--measure", choices=["envy", "total", "max"], default="envy")
    qsweep.add_argument("--seed", type=int, required=True)
    qsweep.add_argument("--out-dir", required=True)
    qsweep.set_defaults(func=_cmd_bench)
    domain = bench_sub.add_parser("domain")
    domain.add_argument("--n", type=int, default=10)
    domain.add_argument("--m-min", type=int, default=10)
    domain.add_argument("--m-max", type=int, default=25)
    domain.add_argument("--instances", type=int, default=1000)
    domain.add_argument("--domain", choices=["peaked", "dipped"], required=True)
    domain.add_argument("--seed", type=int, required=True)
    domain.add_argument("--out-dir", required=True)
    domain.set_defaults(func=_cmd_bench)

    check = sub.add_parser("check", help="validate a domain restriction")
    check.add_argument("--instance", required=True)
    check.add_argument("--domain", choices=["peaked", "dipped"], required=True)
    check.add_argument("--axis", help="comma-separated house names overriding the instance axis")
    check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        _note(f"error: {exc}")
        return 2
    except OSError as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
