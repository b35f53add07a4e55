"""Deviation of random signed sums of Cayley slices against k, with the sigma ratio."""

import argparse

from _common import write_outputs

from arithx.experiments import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--group", default="cyclic:16")
    ap.add_argument("--k", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    ap.add_argument("--p", default="3")
    ap.add_argument("--mode", choices=("rademacher", "centered"), default="rademacher")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    num_forms = max(args.k)
    rows, records = [], []
    for k in args.k:
        rec = run("deviation", {"mode": args.mode, "group": args.group, "k": k, "p": args.p,
                                "trials": args.trials, "num_forms": num_forms}, seed=args.seed)
        records.append(rec)
        row = dict(rec.payload["summary"], mode=args.mode)
        rows.append(row)
        print(f"k={k:<4} mean {row['mean']:.4f}  mean*sqrt(k)/sigma {row['ratio']:.4f}")
    write_outputs(args.out, f"deviation_{args.mode}", rows, records)


if __name__ == "__main__":
    main()
