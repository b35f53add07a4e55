"""Random sums of plane sub-stochastic forms.

A t-linear form A on R^n is plane sub-stochastic when |A|(1,..,e_s,..,1) <= 1
for every slot and every coordinate s, where |A| takes entrywise absolute
values.  This module certifies that property exactly, evaluates the
sigma_{p,t}(n) scale, runs Rademacher and centered deviation experiments,
and implements the empirical-average sparsifier used to build nets of
sparse sign tuples.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, InvariantViolation, PreconditionError
from .hypergraph import MultilinearForm
from .rng import derive_seed, rademacher, substream
from .tensor_norm import DEFAULT_TOL, CooForm, multilinear_norm


def is_plane_substochastic(A: MultilinearForm) -> tuple[bool, Fraction]:
    """(passes, largest marginal of |A|), decided in exact arithmetic."""
    worst = 0
    for slot in range(A.t):
        sums = A.marginal_sums(slot)
        if len(sums):
            worst = max(worst, int(max(sums)))
    worst = Fraction(worst, A.den)
    return worst <= 1, worst


@dataclass(frozen=True)
class PlaneSubstochasticForm:
    form: MultilinearForm
    worst_marginal: Fraction

    @classmethod
    def certify(cls, A: MultilinearForm) -> PlaneSubstochasticForm:
        ok, worst = is_plane_substochastic(A)
        if not ok:
            raise PreconditionError(f"form is not plane sub-stochastic (marginal {worst})")
        return cls(A, worst)


def uniform_form(t: int, n: int) -> MultilinearForm:
    """Every entry 1/n^(t-1); all marginals equal 1."""
    index = np.stack(np.unravel_index(np.arange(n**t), (n,) * t), axis=1)
    return MultilinearForm.from_rows(t, n, index, np.ones(n**t, dtype=np.int64), n ** (t - 1))


def sigma(p, t: int, n: int) -> float:
    """n^(1/2-1/p) * max(1, n^(1-1/(2t)-(t-1)/p)) * (ln n)^(t+1/2)."""
    if n < 2 or t < 3 or not (p == math.inf or p >= 1):
        raise DomainError("sigma needs n >= 2, t >= 3 and p >= 1")
    inv_p = 0.0 if p == math.inf else 1.0 / p
    return (n ** (0.5 - inv_p) * max(1.0, n ** (1 - 1 / (2 * t) - (t - 1) * inv_p))
            * math.log(n) ** (t + 0.5))


@dataclass
class DeviationExperiment:
    """Per-trial values of ||(1/k) sum ...|| and their summary.

    ``centering`` is "none" for pure Rademacher sums, otherwise how the mean
    form was obtained ("exact" population mean or "empirical").
    """

    k: int
    n: int
    t: int
    p: float
    trials: int
    seed: int
    values: list
    centering: str = "none"
    value_kind: str = "certified_lower_bound"
    tail_levels: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def q90(self) -> float:
        return float(np.quantile(self.values, 0.9))

    @property
    def std(self) -> float:
        return float(np.std(self.values, ddof=1)) if len(self.values) > 1 else 0.0

    @property
    def sigma(self) -> float | None:
        if self.t < 3:
            return None
        return sigma(self.p, self.t, self.n)

    @property
    def ratio(self) -> float | None:
        """mean / (sigma / sqrt(k)); bounded by an unknown constant if the scaling is right."""
        s = self.sigma
        return None if s is None else self.mean * math.sqrt(self.k) / s

    def tail_frequencies(self, levels=None) -> dict:
        levels = self.tail_levels if levels is None else levels
        v = np.asarray(self.values)
        return {float(e): float(np.mean(v > e)) for e in levels}

    def summary(self) -> dict:
        return {"k": self.k, "n": self.n, "t": self.t, "p": _p_str(self.p),
                "mean": self.mean, "median": self.median, "q90": self.q90,
                "sigma": self.sigma, "ratio": self.ratio}

    def to_json(self) -> dict:
        data = asdict(self)
        data["p"] = _p_str(self.p)
        data["summary"] = self.summary()
        data["tail_frequencies"] = {str(k): v for k, v in self.tail_frequencies().items()}
        return data

    def csv_rows(self) -> list[dict]:
        return [self.summary()]


CSV_FIELDS = ["k", "n", "t", "p", "mean", "median", "q90", "sigma", "ratio"]


def deviation_csv(experiments) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for exp in experiments:
        for row in exp.csv_rows():
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()


def _p_str(p):
    return "inf" if p == math.inf else p


def _certify_all(forms):
    forms = list(forms)
    if not forms:
        raise DomainError("need at least one form")
    t, n = forms[0].t, forms[0].n
    if any(A.t != t or A.n != n for A in forms):
        raise DomainError("forms must share arity and dimension")
    for i, A in enumerate(forms):
        ok, worst = is_plane_substochastic(A)
        if not ok:
            raise PreconditionError(f"form {i} is not plane sub-stochastic (marginal {worst})")
    return forms, t, n


def _estimate(form: CooForm, p, restarts, tol, seed):
    if form.is_zero:
        return 0.0
    return multilinear_norm(form, p, restarts=restarts, tol=tol, seed=seed).value


def rademacher_deviation(forms, p, trials: int, seed: int, restarts: int = 8,
                         tol: float = DEFAULT_TOL) -> DeviationExperiment:
    """Trial values ||(1/k) sum eps_i A_i|| with fresh signs per trial."""
    forms, t, n = _certify_all(forms)
    coo = [CooForm.from_form(A) for A in forms]
    k = len(coo)
    values = []
    for trial in range(trials):
        eps = rademacher(substream(seed, trial), k)
        S = CooForm.combine(coo, eps / k)
        values.append(_estimate(S, p, restarts, tol, derive_seed(seed, trial, 1)))
    return DeviationExperiment(k, n, t, p, trials, seed, values)


def centered_deviation(population, k: int, p, trials: int, seed: int, mean: str = "exact",
                       mean_samples: int = 1000, restarts: int = 8,
                       tol: float = DEFAULT_TOL) -> DeviationExperiment:
    """Trial values ||(1/k) sum (A_i - Abar)|| for A_i drawn with replacement.

    ``mean="exact"`` uses the population average; ``"empirical"`` averages
    ``mean_samples`` independent draws from a separate stream.
    """
    population, t, n = _certify_all(population)
    coo = [CooForm.from_form(A) for A in population]
    m = len(coo)
    if mean == "exact":
        mean_form = CooForm.combine(coo, np.full(m, 1.0 / m))
    elif mean == "empirical":
        counts = np.bincount(substream(seed, 0xA5E).integers(0, m, size=mean_samples), minlength=m)
        mean_form = CooForm.combine(coo, counts / mean_samples)
    else:
        raise DomainError(f"unknown mean mode {mean!r}")
    values = []
    for trial in range(trials):
        picks = substream(seed, trial).integers(0, m, size=k)
        weights = np.bincount(picks, minlength=m) / k
        S = CooForm.combine(coo + [mean_form], np.append(weights, -1.0))
        values.append(_estimate(S, p, restarts, tol, derive_seed(seed, trial, 1)))
    return DeviationExperiment(k, n, t, p, trials, seed, values, centering=mean)


def matrix_deviation(population, k: int, trials: int, seed: int, eps_levels=()) -> DeviationExperiment:
    """Spectral norms ||(1/k) sum (A_i - E A)|| for matrices drawn with replacement.

    E A is the exact population mean; spectral norms are exact (SVD).
    """
    mats = [np.asarray(M, dtype=float) for M in population]
    if not mats:
        raise DomainError("need at least one matrix")
    n = mats[0].shape[0]
    if any(M.shape != (n, n) for M in mats):
        raise DomainError("matrices must be square and of equal size")
    for i, M in enumerate(mats):
        if np.linalg.norm(M, 2) > 1 + 1e-8:
            raise PreconditionError(f"matrix {i} has spectral norm above 1")
    stack = np.stack(mats)
    mean = stack.mean(axis=0)
    values = []
    for trial in range(trials):
        picks = substream(seed, trial).integers(0, len(mats), size=k)
        values.append(float(np.linalg.norm(stack[picks].mean(axis=0) - mean, 2)))
    return DeviationExperiment(k, n, 2, 2, trials, seed, values, centering="exact",
                               value_kind="exact", tail_levels=[float(e) for e in eps_levels])


@dataclass
class SparsifyReport:
    d: tuple
    c: tuple
    eta: float
    samples: int
    exact: list  # A_i(x) as Fractions
    means: list
    variances: list
    std_errors: list
    variance_bound: float
    unbiased: list
    variance_ok: list
    net_count: int  # prod_s C(n, c_s) * c_s^c_s
    net_count_bound: int  # n^(2 sum c_s)
    net_eta_bound: float  # n^(2 t max(d) / eta)
    tuples: list | None = None

    @property
    def passed(self) -> bool:
        return all(self.unbiased) and all(self.variance_ok)

    def to_json(self) -> dict:
        return {"d": list(self.d), "c": list(self.c), "eta": self.eta, "samples": self.samples,
                "exact": [str(v) for v in self.exact], "means": self.means,
                "variances": self.variances, "std_errors": self.std_errors,
                "variance_bound": self.variance_bound, "unbiased": self.unbiased,
                "variance_ok": self.variance_ok, "net_count": str(self.net_count),
                "net_count_bound": str(self.net_count_bound),
                "net_eta_bound": self.net_eta_bound}


def _check_sparse_sign(x, n):
    x = np.asarray(x)
    if x.shape != (n,) or not np.all(np.isin(x, (-1, 0, 1))):
        raise PreconditionError("tuple vectors must lie in {-1, 0, 1}^n")
    d = int(np.count_nonzero(x))
    if d == 0:
        raise PreconditionError("tuple vectors must be nonzero")
    return x.astype(np.int64), d


def maurey_sparsify(x_tuple, eta: float, A_list, samples: int, seed: int,
                    keep_samples: bool = False) -> SparsifyReport:
    """Empirical-average sparsification of a sparse sign tuple.

    For each slot s, c_s = ceil(d_s / eta) coordinates are drawn uniformly
    with replacement from the support D_s of x[s], and
    x~[s] = (d_s / c_s) * sum of the drawn x[s]_j e_j.  Each x~[s] is an
    unbiased estimate of x[s], so A(x~) is unbiased for A(x) by
    multilinearity.  Reports the empirical mean and variance of A_i(x~)
    against the bound 2^t eta^t min(d).
    """
    if eta < 1:
        raise PreconditionError("eta must be at least 1")
    forms, t, n = _certify_all(A_list)
    if len(x_tuple) != t:
        raise DomainError(f"expected {t} vectors, got {len(x_tuple)}")
    xs, d = zip(*(_check_sparse_sign(x, n) for x in x_tuple))
    c = tuple(max(1, math.ceil(ds / eta)) for ds in d)
    mind = min(d)

    exact = [A.evaluate(*xs) for A in forms]
    for i, v in enumerate(exact):
        # plane sub-stochastic forms are bounded by min(d) on such tuples
        if abs(v) > mind:
            raise InvariantViolation(f"|A_{i}(x)| = {abs(v)} exceeds min(d) = {mind}")

    rng = substream(seed, 0x5A)
    rows = np.arange(samples)[:, None]
    X = []
    for s in range(t):
        support = np.flatnonzero(xs[s])
        picks = support[rng.integers(0, d[s], size=(samples, c[s]))]
        Xs = np.zeros((samples, n))
        np.add.at(Xs, (np.broadcast_to(rows, picks.shape), picks), xs[s][picks].astype(float))
        X.append(Xs * (d[s] / c[s]))

    means, variances, ses, unbiased, var_ok = [], [], [], [], []
    bound = 2.0**t * eta**t * mind
    for A, v in zip(forms, exact):
        vals = CooForm.from_form(A).evaluate(X)
        mu = float(vals.mean())
        var = float(vals.var(ddof=1)) if samples > 1 else 0.0
        se = math.sqrt(var / samples)
        means.append(mu)
        variances.append(var)
        ses.append(se)
        unbiased.append(abs(mu - float(v)) <= 3 * se + 1e-12 * max(1.0, abs(float(v))))
        var_ok.append(var <= bound)

    net_count = 1
    for cs in c:
        net_count *= math.comb(n, cs) * cs**cs
    return SparsifyReport(
        d=tuple(d), c=c, eta=float(eta), samples=samples, exact=exact, means=means,
        variances=variances, std_errors=ses, variance_bound=bound, unbiased=unbiased,
        variance_ok=var_ok, net_count=net_count, net_count_bound=n ** (2 * sum(c)),
        net_eta_bound=float(n) ** (2 * t * max(d) / eta),
        tuples=X if keep_samples else None)


def random_sparse_sign(n: int, d: int, rng) -> np.ndarray:
    x = np.zeros(n, dtype=np.int64)
    support = rng.choice(n, size=min(d, n), replace=False)
    x[support] = rng.choice((-1, 1), size=len(support))
    return x
