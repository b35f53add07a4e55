"""``arithx <subcommand>``: seeded experiments with JSON or CSV records.

Exit codes: 0 all verdicts pass, 1 a verdict failed or an internal
invariant broke, 2 bad input or unmet precondition, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ArithxError, DomainError
from .experiments import directions_from_file, run
from .hypergraph import load_system
from .tensor_norm import DEFAULT_TOL

log = logging.getLogger("arithx")


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _common(parser, trials=None):
    parser.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed")
    if trials is not None:
        parser.add_argument("--trials", type=int, default=trials)
    parser.add_argument("--restarts", type=int, default=8)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL)
    parser.add_argument("--out", help="write the record here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--budget", type=int, default=None, help="enumeration cap")
    parser.add_argument("--strict-n", action="store_true", help="densecap: require n >= p^2")


def _system_args(parser, group="cyclic:31", q="1,1,1"):
    parser.add_argument("--group", default=group,
                        help="cyclic:m, vec:p^n, prod(a,b,...) or table:@file.json")
    parser.add_argument("--q", type=_int_list, default=_int_list(q))
    parser.add_argument("--system", help='JSON file {"C": [[...]], "q": [...]}; default: t-term APs')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arithx", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ar-graph", help="random Cayley graphs: lambda distribution")
    _common(p, trials=50)
    p.add_argument("--group", default="cyclic:257")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--all-elements", action="store_true", help="use every element once")

    p = sub.add_parser("ar-hyper", help="random Cayley hypergraphs: lambda_K distribution")
    _common(p, trials=50)
    _system_args(p)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--all-generators", action="store_true")

    p = sub.add_parser("mixing", help="check the mixing inequality on random vertex sets")
    _common(p)
    _system_args(p, group="vec:3^3")
    p.add_argument("--k", type=int, default=None, help="sampled generators; omit for H = K")
    p.add_argument("--num-sets", type=int, default=10)
    p.add_argument("--density", type=float, default=0.5)

    p = sub.add_parser("arith-exp", help="estimate lambda_K of a generator sub-multiset")
    _common(p)
    _system_args(p, group="vec:3^3")
    p.add_argument("--generators", help="JSON file: list of generator tuples; default: all")

    p = sub.add_parser("densecap", help="rectangle avoiding a direction set")
    _common(p)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--d-size", type=int, default=None, help="random |D|; default the largest allowed")
    p.add_argument("--directions", help="JSON file: array of coordinate vectors")

    p = sub.add_parser("norm", help="estimate the injective l_p norm of a form")
    _common(p)
    p.add_argument("form", help='JSON file {"t", "n", "entries": [[index], "num/den"]}')
    p.add_argument("--p", default="3", help="exponent, or inf")
    p.add_argument("--oracle", action="store_true", help="also run the exact/grid oracle")

    p = sub.add_parser("deviation", help="deviation of random sums of Cayley slices")
    _common(p, trials=50)
    p.add_argument("--mode", choices=("rademacher", "centered", "matrix"), default="rademacher")
    p.add_argument("--group", default="cyclic:16")
    p.add_argument("--q", type=_int_list, default=[1, 1, 1])
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--p", default="3")
    p.add_argument("--num-forms", type=int, default=64)
    p.add_argument("--mean", choices=("exact", "empirical"), default="exact")
    p.add_argument("--eps-levels", type=_float_list, default=[])

    p = sub.add_parser("sparsify", help="empirical-average sparsifier statistics")
    _common(p)
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--d", type=_int_list, default=[4, 4, 4])
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--num-forms", type=int, default=4)

    p = sub.add_parser("sol", help="solution set and coset representatives")
    _common(p)
    _system_args(p, group="cyclic:5")
    p.add_argument("--list-limit", type=int, default=64)
    return parser


def _system_params(args):
    if args.system:
        C, q = load_system(args.system)
        return {"C": C.tolist(), "q": q.tolist()}
    return {"C": None, "q": args.q}


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def params_from_args(args) -> tuple[str, dict]:
    c = args.command
    base = {"budget": args.budget}
    if c == "ar-graph":
        return "ar_graph", {**base, "group": args.group, "k": args.k, "trials": args.trials,
                            "deterministic": args.all_elements}
    if c == "ar-hyper":
        return "ar_hyper", {**base, **_system_params(args), "group": args.group, "k": args.k,
                            "trials": args.trials, "restarts": args.restarts, "tol": args.tol,
                            "deterministic": args.all_generators}
    if c == "mixing":
        return "mixing", {**base, **_system_params(args), "group": args.group, "k": args.k,
                          "num_sets": args.num_sets, "density": args.density,
                          "restarts": args.restarts, "tol": args.tol}
    if c == "arith-exp":
        gens = _load_json(args.generators) if args.generators else None
        return "arith_exp", {**base, **_system_params(args), "group": args.group,
                             "generators": gens, "restarts": args.restarts, "tol": args.tol}
    if c == "densecap":
        dirs = directions_from_file(args.directions, args.p, args.n) if args.directions else None
        return "densecap", {**base, "p": args.p, "n": args.n, "d_size": args.d_size,
                            "directions": dirs, "strict_n": args.strict_n}
    if c == "norm":
        return "norm", {**base, "form": _load_json(args.form), "p": args.p,
                        "restarts": args.restarts, "tol": args.tol, "oracle": args.oracle}
    if c == "deviation":
        return "deviation", {"mode": args.mode, "group": args.group, "q": args.q, "k": args.k,
                             "p": args.p, "trials": args.trials, "num_forms": args.num_forms,
                             "restarts": args.restarts, "tol": args.tol, "mean": args.mean,
                             "eps_levels": args.eps_levels}
    if c == "sparsify":
        return "sparsify", {"t": args.t, "n": args.n, "d": args.d, "eta": args.eta,
                            "samples": args.samples, "num_forms": args.num_forms}
    if c == "sol":
        return "sol", {**base, **_system_params(args), "group": args.group,
                       "list_limit": args.list_limit}
    raise DomainError(f"unknown command {c}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        command, params = params_from_args(args)
        record = run(command, params, args.seed)
    except ArithxError as exc:
        print(f"arithx: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:
        print(f"arithx: {exc}", file=sys.stderr)
        return 2
    text = record.to_csv() if args.format == "csv" else record.dumps() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    failed = [k for k, v in record.verdicts.items() if not v]
    if failed:
        print(f"arithx: failed verdicts: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
