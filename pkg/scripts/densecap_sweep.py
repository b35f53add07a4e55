"""Rectangles avoiding random direction sets over F_p^n, swept over |D| and seeds."""

import argparse
import math

from _common import write_outputs

from arithx.experiments import densecap_run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="*", help="|D| values; default 1..max allowed")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    largest = math.comb(args.n + args.p - 2, args.p - 1) - 1
    sizes = args.sizes or range(1, largest + 1)
    rows, records = [], []
    for size in sizes:
        for seed in range(args.seeds):
            rec = densecap_run(args.p, args.n, seed=seed, d_size=size)
            records.append(rec)
            p = rec.payload
            rows.append({"p": args.p, "n": args.n, "d_size": size, "seed": seed,
                         "T1": p["T1_size"], "T2": p["T2_size"], "lines": p["line_count"],
                         "bound": p["bound"], "violations": p["violations"],
                         "witness": p["witness"], "passed": rec.passed})
    bad = [r for r in rows if not r["passed"]]
    print(f"{len(rows)} runs, {len(bad)} with a failed verdict, "
          f"min lines {min(r['lines'] for r in rows)}")
    write_outputs(args.out, "densecap_sweep", rows, records)


if __name__ == "__main__":
    main()
