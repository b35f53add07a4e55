"""Seeded experiment records.

Every command is a function ``(params, seed) -> (payload, verdicts)`` whose
params are plain JSON values, so a record carries everything needed to run
it again.  Trial ``i`` draws from the substream ``(seed, i)``; results do not
depend on how trials are scheduled.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import DomainError, PreconditionError, UnsupportedRegimeError, check_budget
from .field_group import FpVec, parse_group
from .hypergraph import (MultilinearForm, adjacency_form, ap_matrix, cayley_adjacency_matrix,
                         cayley_hypergraph, coset_representatives, in_solution_set, indicator,
                         slice_form, sol_generator)
from .poly_method import densecap_construct, ldlines_identity_check, line_hypergraph, random_directions
from .rng import RNG_NAME, derive_seed, substream
from .tensor_lab import (centered_deviation, maurey_sparsify, matrix_deviation, rademacher_deviation,
                         random_sparse_sign)
from .tensor_norm import (DEFAULT_TOL, lambda_K, multilinear_norm, multilinear_norm_oracle,
                          spectral_lambda)

SCHEMA = "arithx/1"
EIGEN_LIMIT = 4096
FLOAT_TOL = 1e-12


@dataclass
class ExperimentRecord:
    command: str
    params: dict
    seed: int
    payload: dict
    verdicts: dict = field(default_factory=dict)
    version: str = __version__
    rng: str = RNG_NAME
    wall_time: float = 0.0
    schema: str = SCHEMA

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {"schema": self.schema, "command": self.command, "params": self.params,
                "seed": self.seed, "version": self.version, "rng": self.rng,
                "wall_time": self.wall_time, "payload": self.payload, "verdicts": self.verdicts}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, data: dict) -> ExperimentRecord:
        if data.get("schema") != SCHEMA:
            raise DomainError(f"unsupported record schema {data.get('schema')!r}")
        return cls(command=data["command"], params=data["params"], seed=int(data["seed"]),
                   payload=data["payload"], verdicts=data.get("verdicts", {}),
                   version=data.get("version", __version__), rng=data.get("rng", RNG_NAME),
                   wall_time=float(data.get("wall_time", 0.0)))

    def to_csv(self) -> str:
        """Per-row payload data when the command has rows, else one summary row."""
        rows = self.payload.get("rows")
        if not rows:
            rows = [{k: v for k, v in self.payload.items() if not isinstance(v, (list, dict))}]
            rows[0].update({f"verdict_{k}": v for k, v in self.verdicts.items()})
        fields = ["command", "seed"]
        for row in rows:
            fields += [k for k in row if k not in fields]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({"command": self.command, "seed": self.seed,
                             **{k: ("" if v is None else v) for k, v in row.items()}})
        return buf.getvalue()


def payloads_match(a, b, tol: float = FLOAT_TOL) -> bool:
    """Structural equality with floats compared to within ``tol``."""
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(payloads_match(a[k], b[k], tol) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(payloads_match(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        if not isinstance(a, (int, float)) or not isinstance(b, (int, float)):
            return False
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        return a == b or abs(a - b) <= tol
    return a == b


def _clean(obj):
    """Convert numpy scalars/arrays and Fractions to JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return "inf" if v == math.inf else v
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def parse_exponent(p):
    """``"inf"`` or a number; integral values come back as int."""
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity"):
            return math.inf
        p = float(p)
    if p == math.inf:
        return math.inf
    return int(p) if float(p).is_integer() else float(p)


def _median_se(values) -> float:
    # asymptotic standard error of a sample median under normality
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return 0.0
    return float(1.2533 * np.std(v, ddof=1) / math.sqrt(len(v)))


def _distribution(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"median": float(np.median(v)), "mean": float(np.mean(v)),
            "q10": float(np.quantile(v, 0.1)), "q90": float(np.quantile(v, 0.9)),
            "median_se": _median_se(v)}


def _system(params, t):
    C = params.get("C")
    if C is None:
        # t = 2 without a system: sol is all of G^2, representatives (0, g)
        return ap_matrix(t) if t >= 3 else np.zeros((1, t), dtype=np.int64)
    return np.atleast_2d(np.asarray(C, dtype=np.int64))


# Commands


def _ar_graph(params, seed):
    G = parse_group(params["group"])
    check_budget("dense eigensolver", G.order, min(EIGEN_LIMIT, params.get("budget") or EIGEN_LIMIT))
    k, trials = params["k"], params["trials"]
    lambdas = []
    for trial in range(trials):
        if params.get("deterministic"):
            S = G.elements()
        else:
            S = substream(seed, trial).integers(0, G.order, size=k)
        lambdas.append(spectral_lambda(cayley_adjacency_matrix(G, S)))
    payload = {"lambdas": lambdas, **_distribution(lambdas),
               "rows": [{"trial": i, "k": k, "lambda": v} for i, v in enumerate(lambdas)]}
    verdicts = {"lambda_in_unit_interval": all(-1e-9 <= v <= 1 + 1e-9 for v in lambdas)}
    return payload, verdicts


def _ar_hyper(params, seed):
    G = parse_group(params["group"])
    q = [int(x) for x in params["q"]]
    t = len(q)
    reps = coset_representatives(_system(params, t), q, G, params.get("budget"))
    K = cayley_hypergraph(G, q, reps)
    AK = adjacency_form(K)
    k, trials = params["k"], params["trials"]
    values, kinds = [], []
    for trial in range(trials):
        if params.get("deterministic"):
            idx = np.arange(len(reps))
        else:
            idx = substream(seed, trial).integers(0, len(reps), size=k)
        diff = adjacency_form(cayley_hypergraph(G, q, reps[idx])) - AK
        est = multilinear_norm(diff, t, restarts=params["restarts"], tol=params["tol"],
                               seed=derive_seed(seed, trial, 1))
        values.append(est.value)
        kinds.append(est.kind)
    payload = {"lambdas": values, "kinds": kinds, "generators": len(reps), **_distribution(values),
               "rows": [{"trial": i, "k": k, "lambda_K": v, "kind": c}
                        for i, (v, c) in enumerate(zip(values, kinds))]}
    return payload, {"estimates_nonnegative": all(v >= 0 for v in values)}


def _mixing(params, seed):
    G = parse_group(params["group"])
    q = [int(x) for x in params["q"]]
    t = len(q)
    reps = coset_representatives(_system(params, t), q, G, params.get("budget"))
    K = cayley_hypergraph(G, q, reps)
    if params.get("k") is None:
        H = K
    else:
        H = cayley_hypergraph(G, q, reps[substream(seed, 0xAB).integers(0, len(reps), size=params["k"])])
    n = G.order
    sets = [[list(range(n))] * t]
    for i in range(params["num_sets"]):
        rng = substream(seed, 0x5E7, i)
        sets.append([np.flatnonzero(rng.random(n) < params["density"]).tolist() for _ in range(t)])
    est = lambda_K(H, K, restarts=params["restarts"], tol=params["tol"], test_sets=sets,
                   seed=derive_seed(seed, 1))
    diff = adjacency_form(H) - adjacency_form(K)
    rows = []
    for i, T in enumerate(sets):
        lhs = abs(diff.evaluate(*(indicator(n, Ts) for Ts in T)))
        scale = math.prod(len(Ts) for Ts in T) ** (1.0 / t)
        rhs = est.value * scale
        ok = float(lhs) <= rhs * (1 + 1e-9) + 1e-12
        rows.append({"tuple": i, "sizes": "x".join(str(len(Ts)) for Ts in T), "lhs": str(lhs),
                     "rhs": rhs, "margin": rhs - float(lhs), "ok": ok})
    payload = {"lambda_estimate": est.value, "kind": est.kind, "rows": rows}
    return payload, {"mixing_inequality": all(r["ok"] for r in rows)}


def _arith_exp(params, seed):
    G = parse_group(params["group"])
    q = np.asarray(params["q"], dtype=np.int64)
    t = len(q)
    C = _system(params, t)
    if C.shape[1] != t:
        raise DomainError("C and q have incompatible shapes")
    if np.any(C @ q != 0):
        raise PreconditionError(f"C q = {(C @ q).tolist()} is not zero")
    reps = coset_representatives(C, q, G, params.get("budget"))
    K = cayley_hypergraph(G, q, reps)
    gens = params.get("generators")
    S = reps if gens is None else np.asarray(gens, dtype=np.int64).reshape(-1, t)
    if not np.all(in_solution_set(C, G, S)):
        raise PreconditionError("every generator must solve C h = 0")
    H = cayley_hypergraph(G, q, S)
    test_sets = params.get("test_sets") or []
    est = lambda_K(H, K, restarts=params["restarts"], tol=params["tol"], test_sets=test_sets,
                   seed=derive_seed(seed, 1))
    diff = adjacency_form(H) - adjacency_form(K)
    rows = []
    for i, T in enumerate(test_sets):
        lhs = abs(diff.evaluate(*(indicator(G.order, Ts) for Ts in T)))
        sizes = math.prod(len(Ts) for Ts in T)
        ratio = float(lhs) / sizes ** (1.0 / t) if sizes else 0.0
        rows.append({"tuple": i, "lhs": str(lhs), "ratio": ratio,
                     "ok": est.value >= ratio * (1 - 1e-9) - 1e-12})
    payload = {"epsilon": est.value, "kind": est.kind, "generators": len(S),
               "representatives": len(reps), "witness": est.witness, "rows": rows}
    return payload, {"estimate_dominates_test_sets": all(r["ok"] for r in rows)}


def _densecap(params, seed):
    p, n = params["p"], params["n"]
    if params.get("directions") is not None:
        dirs = [tuple(v) for v in params["directions"]]
    else:
        size = params.get("d_size")
        if size is None:
            size = math.comb(n + p - 2, p - 1) - 1
        dirs = random_directions(p, n, size, substream(seed, 0xDC))
    res = densecap_construct(dirs, p, n, strict_n=params.get("strict_n", False),
                             budget=params.get("budget"), check=False)
    n1, n2 = int(res.T1.sum()), int(res.T2.sum())
    lines_per_point = Fraction(res.line_count, p**n)
    witness = float(lines_per_point) / (n1 ** (1 / p) * n2 ** ((p - 1) / p))
    verdicts = {"no_D_lines": not res.violations, "count_bound": res.line_count >= res.bound,
                "witness_solution": res.witness_ok, "witness_bound": witness >= p ** -(p * p - p)}
    payload = {"f": res.f.to_json(), "a": res.a, "T1_size": n1, "T2_size": n2,
               "directions": res.directions, "line_count": res.line_count, "bound": res.bound,
               "violations": len(res.violations), "witness": witness,
               "witness_floor": p ** -(p * p - p)}
    if len(res.directions):
        lhs, rhs, ok = ldlines_identity_check(res.T1, res.T2, res.directions, p, n)
        payload["identity_D"] = [str(lhs), str(rhs)]
        verdicts["identity_D"] = ok
    full_limit = params.get("full_identity_limit", 10**6)
    if p ** (2 * n) <= full_limit:
        # all directions: the left side equals line_count / p^n
        form = adjacency_form(line_hypergraph(p, n, np.arange(p**n)))
        lhs = form.evaluate(res.T1.astype(np.int64), *([res.T2.astype(np.int64)] * (p - 1)))
        payload["identity_full"] = [str(lhs), str(lines_per_point)]
        verdicts["identity_full"] = lhs == lines_per_point
    return payload, verdicts


def _norm(params, seed):
    A = MultilinearForm.from_json(params["form"])
    p = parse_exponent(params["p"])
    est = multilinear_norm(A, p, restarts=params["restarts"], tol=params["tol"], seed=seed)
    payload = {"estimate": est.to_json()}
    verdicts = {}
    if params.get("oracle"):
        try:
            ref = multilinear_norm_oracle(A, p)
        except UnsupportedRegimeError as exc:
            payload["oracle"] = {"unsupported": str(exc)}
        else:
            payload["oracle"] = ref.to_json()
            cap = ref.value if ref.kind == "exact" else ref.upper
            verdicts["estimate_within_oracle"] = est.value <= cap + 1e-9 * max(1.0, cap)
    return payload, verdicts


def _slice_forms(G, q, count, seed):
    gens = substream(seed, 0xF0).integers(0, G.order, size=(count, len(q)))
    return gens, [slice_form(G, q, tuple(int(x) for x in g)) for g in gens]


def _deviation(params, seed):
    G = parse_group(params["group"])
    mode = params["mode"]
    k, trials = params["k"], params["trials"]
    if mode == "matrix":
        gens = substream(seed, 0xF0).integers(0, G.order, size=params["num_forms"])
        mats = [cayley_adjacency_matrix(G, [g]) for g in gens]
        exp = matrix_deviation(mats, k, trials, seed, params.get("eps_levels") or [])
    else:
        q = [int(x) for x in params["q"]]
        p = parse_exponent(params["p"])
        _, forms = _slice_forms(G, q, params["num_forms"], seed)
        if mode == "rademacher":
            if k > len(forms):
                raise PreconditionError("k exceeds the number of fixed forms")
            exp = rademacher_deviation(forms[:k], p, trials, seed, params["restarts"], params["tol"])
        elif mode == "centered":
            exp = centered_deviation(forms, k, p, trials, seed, mean=params["mean"],
                                     restarts=params["restarts"], tol=params["tol"])
        else:
            raise DomainError(f"unknown deviation mode {mode!r}")
    data = exp.to_json()
    data["rows"] = exp.csv_rows()
    return data, {"values_finite": bool(np.all(np.isfinite(exp.values)))}


def _sparsify(params, seed):
    t, n = params["t"], params["n"]
    d = params["d"]
    if len(d) != t:
        raise DomainError("need one sparsity per slot")
    G = parse_group(params.get("group") or f"cyclic:{n}")
    if G.order != n:
        raise DomainError("group order must equal n")
    rng = substream(seed, 0x5B)
    x = [random_sparse_sign(n, ds, rng) for ds in d]
    _, forms = _slice_forms(G, [1] * t, params["num_forms"], seed)
    rep = maurey_sparsify(x, params["eta"], forms, params["samples"], derive_seed(seed, 3))
    payload = rep.to_json()
    payload["x"] = x
    payload["rows"] = [{"form": i, "exact": str(e), "mean": m, "variance": v, "se": s,
                        "bound": rep.variance_bound}
                       for i, (e, m, v, s) in enumerate(zip(rep.exact, rep.means, rep.variances,
                                                            rep.std_errors))]
    return payload, {"unbiased": all(rep.unbiased), "variance_bound": all(rep.variance_ok)}


def _sol(params, seed):
    G = parse_group(params["group"])
    q = [int(x) for x in params["q"]]
    C = _system(params, len(q))
    sol = sol_generator(C, G, params.get("budget"))
    reps = coset_representatives(C, q, G, params.get("budget"))
    limit = params.get("list_limit", 64)
    payload = {"sol_size": len(sol), "representatives": len(reps), "group_order": G.order,
               "listed": reps[:limit]}
    return payload, {"orbit_partition": len(reps) * G.order == len(sol)}


COMMANDS = {
    "ar_graph": (_ar_graph, {"group": "cyclic:257", "k": 8, "trials": 50, "deterministic": False,
                             "budget": None}),
    "ar_hyper": (_ar_hyper, {"group": "cyclic:31", "q": [1, 1, 1], "C": None, "k": 4, "trials": 50,
                             "restarts": 8, "tol": DEFAULT_TOL, "deterministic": False,
                             "budget": None}),
    "mixing": (_mixing, {"group": "vec:3^3", "q": [1, 1, 1], "C": None, "k": 8, "num_sets": 10,
                         "density": 0.5, "restarts": 8, "tol": DEFAULT_TOL, "budget": None}),
    "arith_exp": (_arith_exp, {"group": "vec:3^3", "q": [1, 1, 1], "C": None, "generators": None,
                               "test_sets": None, "restarts": 8, "tol": DEFAULT_TOL,
                               "budget": None}),
    "densecap": (_densecap, {"p": 3, "n": 5, "d_size": None, "directions": None, "strict_n": False,
                             "budget": None, "full_identity_limit": 10**6}),
    "norm": (_norm, {"form": None, "p": 3, "restarts": 8, "tol": DEFAULT_TOL, "oracle": False,
                     "budget": None}),
    "deviation": (_deviation, {"mode": "rademacher", "group": "cyclic:16", "q": [1, 1, 1], "k": 16,
                               "p": 3, "trials": 50, "num_forms": 64, "restarts": 8,
                               "tol": DEFAULT_TOL, "mean": "exact", "eps_levels": None}),
    "sparsify": (_sparsify, {"t": 3, "n": 8, "d": [4, 4, 4], "eta": 2.0, "samples": 10000,
                             "num_forms": 4, "group": None}),
    "sol": (_sol, {"group": "cyclic:5", "q": [1, 1, 1], "C": None, "budget": None,
                   "list_limit": 64}),
}


def full_params(command: str, params: dict | None = None) -> dict:
    if command not in COMMANDS:
        raise DomainError(f"unknown command {command!r}")
    defaults = COMMANDS[command][1]
    unknown = set(params or {}) - set(defaults)
    if unknown:
        raise DomainError(f"unknown parameters for {command}: {sorted(unknown)}")
    return _clean({**defaults, **(params or {})})


def run(command: str, params: dict | None = None, seed: int = 0) -> ExperimentRecord:
    """Run a command and wrap its result in a record."""
    params = full_params(command, params)
    fn = COMMANDS[command][0]
    start = time.perf_counter()
    payload, verdicts = fn(params, int(seed))
    wall = time.perf_counter() - start
    return ExperimentRecord(command, params, int(seed), _clean(payload), _clean(verdicts),
                            wall_time=wall)


def rerun(record: ExperimentRecord) -> ExperimentRecord:
    return run(record.command, record.params, record.seed)


def reproduces(record: ExperimentRecord, tol: float = FLOAT_TOL) -> bool:
    again = rerun(record)
    return payloads_match(record.payload, again.payload, tol) and record.verdicts == again.verdicts


# Python-level entry points


def ar_graph_trial(group: str, k: int, trials: int, seed: int, deterministic: bool = False):
    return run("ar_graph", {"group": group, "k": k, "trials": trials,
                            "deterministic": deterministic}, seed)


def ar_hypergraph_trial(group: str, q, k: int, trials: int, seed: int, restarts: int = 8, C=None,
                        deterministic: bool = False, tol: float = DEFAULT_TOL):
    return run("ar_hyper", {"group": group, "q": list(q), "C": C, "k": k, "trials": trials,
                            "restarts": restarts, "deterministic": deterministic, "tol": tol}, seed)


def mixing_check(group: str, q, k, seed: int, num_sets: int = 10, restarts: int = 8, C=None,
                 density: float = 0.5):
    return run("mixing", {"group": group, "q": list(q), "C": C, "k": k, "num_sets": num_sets,
                          "restarts": restarts, "density": density}, seed)


def arithmetic_expander_check(group: str, C, q, generators=None, seed: int = 0, restarts: int = 8,
                              test_sets=None):
    return run("arith_exp", {"group": group, "C": C, "q": list(q), "generators": generators,
                             "restarts": restarts, "test_sets": test_sets}, seed)


def densecap_run(p: int, n: int, seed: int, d_size=None, directions=None, strict_n: bool = False,
                 budget=None):
    return run("densecap", {"p": p, "n": n, "d_size": d_size, "directions": directions,
                            "strict_n": strict_n, "budget": budget}, seed)


def directions_from_file(path, p, n) -> list:
    """Coordinate vectors from a JSON array, validated against F_p^n."""
    with open(path) as fh:
        data = json.load(fh)
    out = []
    for v in data:
        if len(v) != n:
            raise DomainError(f"direction {v} does not have {n} coordinates")
        out.append(list(FpVec(p, tuple(int(c) for c in v)).coords))
    return out
