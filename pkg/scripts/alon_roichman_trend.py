"""Median lambda of random Cayley graphs and hypergraphs as k grows."""

import argparse

from _common import write_outputs

from arithx.experiments import ar_graph_trial, ar_hypergraph_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph-group", default="cyclic:257")
    ap.add_argument("--graph-k", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--hyper-group", default="cyclic:31")
    ap.add_argument("--hyper-k", type=int, nargs="+", default=[4, 8, 16])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    rows, records = [], []
    for k in args.graph_k:
        rec = ar_graph_trial(args.graph_group, k, args.trials, seed=args.seed)
        records.append(rec)
        rows.append({"kind": "graph", "group": args.graph_group, "k": k,
                     "median": rec.payload["median"], "median_se": rec.payload["median_se"],
                     "q10": rec.payload["q10"], "q90": rec.payload["q90"]})
    for k in args.hyper_k:
        rec = ar_hypergraph_trial(args.hyper_group, (1, 1, 1), k, args.trials, seed=args.seed)
        records.append(rec)
        rows.append({"kind": "hypergraph", "group": args.hyper_group, "k": k,
                     "median": rec.payload["median"], "median_se": rec.payload["median_se"],
                     "q10": rec.payload["q10"], "q90": rec.payload["q90"]})
    for r in rows:
        print(f"{r['kind']:>10} k={r['k']:<4} median {r['median']:.4f} +- {r['median_se']:.4f}")
    write_outputs(args.out, "alon_roichman_trend", rows, records)


if __name__ == "__main__":
    main()
