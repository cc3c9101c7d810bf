"""Monte Carlo size/power studies for the calibration GLRT.

Covariates are drawn from U(2, 5) and, given ``x``, the pairs come from a
Frank copula with ``theta = eta(x)`` for one of three calibration models:

    M0: eta(x) = 8
    M1: eta(x) = 25 - 4.2 x
    M2: eta(x) = 12 + 8 sin(0.4 x**2)

Each replicate gets its own random stream derived from ``(seed, index)``,
so results do not depend on how replicates are spread over workers.
"""

from __future__ import annotations

import enum
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .calibration import Dataset
from .copulas import FRANK, sample_pair
from .glrt import chisq_upper_tail, run_test
from .kernels import EPANECHNIKOV, KernelSpec, as_kernel, constants_for

X_LOW, X_HIGH = 2.0, 5.0
REFERENCE_GRID = np.geomspace(0.33, 2.96, 12)
DEFAULT_ALPHAS = (0.10, 0.05, 0.01)


class Model(str, enum.Enum):
    M0 = "m0"
    M1 = "m1"
    M2 = "m2"

    def eta(self, x):
        x = np.asarray(x, dtype=float)
        if self is Model.M0:
            return np.full_like(x, 8.0)
        if self is Model.M1:
            return 25.0 - 4.2 * x
        return 12.0 + 8.0 * np.sin(0.4 * x ** 2)


def as_model(model) -> Model:
    return model if isinstance(model, Model) else Model(str(model).lower())


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a run seeded ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def generate_dataset(model, n: int, seed) -> Dataset:
    """Draw ``n`` observations from a simulation model.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    if n < 10:
        raise ValueError("n must be at least 10")
    model = as_model(model)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = rng.uniform(X_LOW, X_HIGH, n)
    u1, u2 = sample_pair(FRANK, model.eta(x), rng)
    return Dataset(x, u1, u2)


def bandwidth_grid_for(covariate_range: float = X_HIGH - X_LOW):
    """The 0.33-2.96 pilot grid, rescaled when the range is not 3."""
    return REFERENCE_GRID * (covariate_range / (X_HIGH - X_LOW))


@dataclass
class ScenarioSpec:
    model: Model
    n: int
    replicates: int = 200
    alpha_levels: tuple = DEFAULT_ALPHAS
    null_degrees: tuple = (0,)
    seed: int = 0
    kernel: KernelSpec = EPANECHNIKOV
    bandwidth_grid: tuple | None = None

    def __post_init__(self):
        self.model = as_model(self.model)
        self.kernel = as_kernel(self.kernel)
        self.alpha_levels = tuple(float(a) for a in self.alpha_levels)
        self.null_degrees = tuple(int(p) for p in self.null_degrees)
        if not all(0 < a < 1 for a in self.alpha_levels):
            raise ValueError("alpha levels must lie in (0, 1)")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if self.n < 10:
            raise ValueError("n must be at least 10")
        if self.bandwidth_grid is None:
            self.bandwidth_grid = tuple(bandwidth_grid_for())
        self.bandwidth_grid = tuple(float(h) for h in self.bandwidth_grid)


@dataclass
class ReplicateRecord:
    index: int
    null_degree: int
    lam: float = float("nan")
    h: float = float("nan")
    dof: float = float("nan")
    p_value: float = float("nan")
    error: str | None = None

    def to_dict(self):
        return {"replicate": self.index, "null_degree": self.null_degree,
                "lambda": self.lam, "h": self.h, "dof": self.dof,
                "p_value": self.p_value, "error": self.error}


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    rejection_rates: np.ndarray  # (len(null_degrees), len(alpha_levels))
    records: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.records)

    def rate(self, null_degree: int, alpha: float) -> float:
        i = self.spec.null_degrees.index(null_degree)
        j = self.spec.alpha_levels.index(alpha)
        return float(self.rejection_rates[i, j])

    def rows(self):
        """(model, n, null_degree, alpha, rate) tuples in table order."""
        for i, p in enumerate(self.spec.null_degrees):
            for j, a in enumerate(self.spec.alpha_levels):
                yield (self.spec.model.value, self.spec.n, p, a,
                       float(self.rejection_rates[i, j]))


def _run_replicate(spec: ScenarioSpec, index: int):
    data = generate_dataset(spec.model, spec.n, replicate_rng(spec.seed, index))
    out = []
    for p in spec.null_degrees:
        try:
            res = run_test(data, FRANK, p, spec.kernel,
                           bandwidth_grid=spec.bandwidth_grid)
            out.append(ReplicateRecord(index, p, res.lambda_, res.h, res.dof,
                                       res.p_value))
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            out.append(ReplicateRecord(index, p, error=f"{type(exc).__name__}: {exc}"))
    return out


def _map_replicates(fn, spec, count, threads):
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or count <= 1:
        return [fn(spec, i) for i in range(count)]
    chunks = [list(range(count))[k::threads] for k in range(threads)]
    chunks = [c for c in chunks if c]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(_call_chunk, [(fn, spec, c) for c in chunks]))
    out = [None] * count
    for c, part in zip(chunks, parts):
        for i, rec in zip(c, part):
            out[i] = rec
    return out


def _call_chunk(args):
    fn, spec, indices = args
    return [fn(spec, i) for i in indices]


def run_scenario(spec: ScenarioSpec, threads: int | None = None,
                 progress=None) -> ScenarioResult:
    """Simulate ``spec.replicates`` datasets and tally GLRT rejections.

    Bandwidths are chosen by leave-one-out likelihood separately for each
    null degree.  Failed replicates are recorded and left out of the rates.
    """
    start = time.perf_counter()
    per_rep = _map_replicates(_run_replicate, spec, spec.replicates, threads)
    records = [r for rep in per_rep for r in rep]
    rates = np.zeros((len(spec.null_degrees), len(spec.alpha_levels)))
    for i, p in enumerate(spec.null_degrees):
        pv = np.array([r.p_value for r in records
                       if r.null_degree == p and r.error is None])
        for j, a in enumerate(spec.alpha_levels):
            rates[i, j] = np.mean(pv < a) if pv.size else np.nan
    return ScenarioResult(spec, rates, records, time.perf_counter() - start)


@dataclass
class WilksSummary:
    n: int
    replicates: int
    h: np.ndarray
    lam: np.ndarray
    scaled: np.ndarray
    dof: np.ndarray
    mu_n: np.ndarray
    ks_statistic: float
    ks_pvalue: float

    @property
    def mean_lambda(self) -> float:
        return float(np.mean(self.lam))

    @property
    def mean_mu_n(self) -> float:
        return float(np.mean(self.mu_n))

    def mean_z(self) -> float:
        """Standardized gap between mean lambda and mean mu_n."""
        se = np.std(self.lam, ddof=1) / np.sqrt(self.lam.size)
        return float((self.mean_lambda - self.mean_mu_n) / se)

    def ks_against(self, dof) -> tuple:
        """KS test of the scaled statistics against chi2 with given dof.

        ``dof`` may vary per replicate; the comparison is done on the
        probability-integral transforms.
        """
        dof = np.broadcast_to(np.asarray(dof, dtype=float), self.scaled.shape)
        pit = np.array([1.0 - chisq_upper_tail(max(s, 0.0), d)
                        for s, d in zip(self.scaled, dof)])
        res = stats.kstest(pit, "uniform")
        return float(res.statistic), float(res.pvalue)


def _wilks_replicate(args, index):
    n, kernel, fixed_h, grid, seed = args
    data = generate_dataset(Model.M0, n, replicate_rng(seed, index))
    res = run_test(data, FRANK, 0, kernel, h=fixed_h, bandwidth_grid=grid)
    return res.lambda_, res.h, res.dof, res.covariate_range


def wilks_check(n: int = 500, replicates: int = 500, kernel=EPANECHNIKOV,
                fixed_h: float | None = None, seed: int = 0,
                threads: int | None = None) -> WilksSummary:
    """Null distribution of the scaled statistic under M0 (constant null).

    Returns the per-replicate statistics along with a Kolmogorov-Smirnov
    comparison against the chi-square reference.
    """
    if replicates < 500:
        raise ValueError("the Wilks check needs at least 500 replicates")
    kernel = as_kernel(kernel)
    args = (n, kernel, fixed_h, bandwidth_grid_for(), seed)
    rows = np.array(_map_replicates(_wilks_replicate, args, replicates, threads))
    lam, h, dof, rng_x = rows.T
    const = constants_for(kernel, 0)
    scaled = const.r_K * lam
    summary = WilksSummary(n, replicates, h, lam, scaled, dof,
                           const.c_K * rng_x / h, np.nan, np.nan)
    summary.ks_statistic, summary.ks_pvalue = summary.ks_against(dof)
    return summary
