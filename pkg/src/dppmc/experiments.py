"""Variance-decay experiment harness.

Replicated DPP quadrature of a smooth bump over a grid of node counts N,
per-cell Gaussianity screening, and a log-log regression of the replicate
variance against N.  The theoretical decay rate is N^{-(1 + 1/d)}.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .estimator import Integrand, estimate
from .kernel import CDKernel, ProductMeasure
from .sampler import SamplerConfig, derive_rng, rejection_bound, sample


# -- bump test function ----------------------------------------------------


def bump(points: np.ndarray, epsilon: float = 0.05) -> np.ndarray:
    """prod_j exp(-1 / (1 - epsilon - x_j^2)) on its support, else 0.

    Smooth, vanishes (with all derivatives) outside |x_j| < sqrt(1-epsilon),
    so it keeps a support margin of order epsilon from the boundary.
    """
    points = np.asarray(points, dtype=float)
    t = 1.0 - epsilon - points**2
    safe = np.where(t > 0.0, t, 1.0)
    factors = np.where(t > 0.0, np.exp(-1.0 / safe), 0.0)
    return factors.prod(axis=-1)


def bump_integrand(d: int, epsilon: float = 0.05) -> Integrand:
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    margin = 1.0 - math.sqrt(1.0 - epsilon)
    return Integrand(lambda p: bump(p, epsilon), d, support_margin=margin)


def bump_ground_truth(
    measure: ProductMeasure, epsilon: float = 0.05, tol: float = 1e-11
) -> float:
    """int bump dmu by per-marginal Gauss rules with order doubling.

    The bump factorizes over coordinates, so the tensor integral is the
    product of univariate ones; each factor is refined until stable.
    """
    total = 1.0
    for marg in measure.marginals:
        prev = None
        order = 64
        while True:
            x, w = marg.gauss(order)
            cur = float(w @ bump(x[:, None], epsilon))
            if prev is not None and abs(cur - prev) < tol:
                break
            if order > 16384:
                raise FloatingPointError("bump integral failed to stabilize")
            prev, order = cur, order * 2
        total *= cur
    return total


# -- statistics helpers ----------------------------------------------------


def ks_normality_p(samples) -> float | None:
    """Asymptotic Kolmogorov p-value of standardized samples against N(0,1).

    Returns None (insufficient data) below 8 samples or for degenerate
    spread; callers treat None as "cell excluded".
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 8:
        return None
    s = x.std(ddof=1)
    if not np.isfinite(s) or s == 0.0:
        return None
    z = (x - x.mean()) / s
    d_stat = stats.kstest(z, "norm").statistic
    return float(special.kolmogorov(math.sqrt(x.size) * d_stat))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    lo: float
    hi: float

    @property
    def interval(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def loglog_regression(points) -> SlopeFit:
    """OLS line through (log N, log variance) points with a t-based 95% CI."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= 0.0:
        raise ValueError("degenerate abscissae; slope undefined")
    slope = float(xc @ y) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = pts.shape[0] - 2
    s2 = float(resid @ resid) / dof
    half = stats.t.ppf(0.975, dof) * math.sqrt(s2 / sxx)
    return SlopeFit(slope, intercept, slope - half, slope + half)


# -- configuration and results --------------------------------------------

DEFAULT_N_GRID = tuple(range(10, 151, 10))


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple[int, ...] = (1, 2)
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    n_repeat: int = 100
    epsilon: float = 0.05
    jacobi_policy: str = "random"
    jacobi_params: tuple[tuple[float, float], ...] | None = None
    seed: int = 0
    ks_alpha: float = 0.05
    csv_path: str | None = None
    json_path: str | None = None
    bound_strategy: str = "empirical-scan"
    safety_factor: float = 1.2

    def __post_init__(self):
        if len(self.dims) == 0 or any(d < 1 for d in self.dims):
            raise ValueError("dims must be a nonempty tuple of positive ints")
        if len(self.n_grid) == 0 or any(n < 1 for n in self.n_grid):
            raise ValueError("n_grid must contain positive node counts")
        if len(set(self.n_grid)) != len(self.n_grid):
            raise ValueError("n_grid entries must be distinct")
        if self.n_repeat < 2:
            raise ValueError("n_repeat must be >= 2")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.jacobi_policy not in ("random", "fixed"):
            raise ValueError("jacobi_policy must be 'random' or 'fixed'")
        if self.jacobi_policy == "fixed":
            if self.jacobi_params is None or len(self.jacobi_params) < max(self.dims):
                raise ValueError("fixed policy needs jacobi_params for every dim")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.ks_alpha < 1.0:
            raise ValueError("ks_alpha must lie in (0, 1)")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(raw)
        for key in ("dims", "n_grid"):
            if key in kw:
                kw[key] = tuple(int(v) for v in kw[key])
        if kw.get("jacobi_params") is not None:
            kw["jacobi_params"] = tuple(
                (float(a), float(b)) for a, b in kw["jacobi_params"]
            )
        return cls(**kw)

    def to_dict(self) -> dict:
        out = {
            "dims": list(self.dims),
            "n_grid": list(self.n_grid),
            "n_repeat": self.n_repeat,
            "epsilon": self.epsilon,
            "jacobi_policy": self.jacobi_policy,
            "jacobi_params": None
            if self.jacobi_params is None
            else [list(p) for p in self.jacobi_params],
            "seed": self.seed,
            "ks_alpha": self.ks_alpha,
            "bound_strategy": self.bound_strategy,
            "safety_factor": self.safety_factor,
        }
        return out


@dataclass(frozen=True)
class CellResult:
    d: int
    N: int
    estimates: np.ndarray
    variance: float
    ks_p: float | None
    retained: bool


@dataclass(frozen=True)
class DimensionResult:
    d: int
    params: tuple[tuple[float, float], ...]
    cells: tuple[CellResult, ...]
    fit: SlopeFit | None
    theoretical: float

    @property
    def contains_theoretical(self) -> bool:
        return self.fit is not None and self.fit.contains(self.theoretical)

    @property
    def retained_N(self) -> list[int]:
        return [c.N for c in self.cells if c.retained]


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    dimensions: tuple[DimensionResult, ...]

    def dimension(self, d: int) -> DimensionResult:
        for dim in self.dimensions:
            if dim.d == d:
                return dim
        raise KeyError(f"no results for d={d}")

    def summary_dict(self) -> dict:
        dims = {}
        for dim in self.dimensions:
            dims[str(dim.d)] = {
                "slopes": None if dim.fit is None else dim.fit.slope,
                "interval": None if dim.fit is None else [dim.fit.lo, dim.fit.hi],
                "theoretical": dim.theoretical,
                "retained_N": dim.retained_N,
                "ks_p": {str(c.N): c.ks_p for c in dim.cells},
                "contains_theoretical": dim.contains_theoretical,
                "jacobi_params": [list(p) for p in dim.params],
            }
        return {"config": self.config.to_dict(), "dims": dims}

    def to_json(self) -> str:
        return json.dumps(self.summary_dict(), indent=2, sort_keys=True)

    def write_json(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "N", "replicate", "estimate", "seed_stream_id"])
            seed = self.config.seed
            for dim in self.dimensions:
                for cell in dim.cells:
                    for r, est in enumerate(cell.estimates):
                        writer.writerow(
                            [dim.d, cell.N, r, repr(float(est)),
                             f"{seed}/{dim.d}/{cell.N}/{r}"]
                        )


class RegressionDegenerateError(RuntimeError):
    """Fewer than 3 retained cells; carries the partial result."""

    def __init__(self, message: str, partial: ExperimentResult):
        super().__init__(message)
        self.partial = partial


# -- replicate execution ---------------------------------------------------


def resolve_workers(env: dict | None = None) -> int:
    """Worker count from DPPMC_THREADS; unset or 0 means the CPU count."""
    env = os.environ if env is None else env
    raw = env.get("DPPMC_THREADS", "").strip()
    if raw == "" or raw == "0":
        return os.cpu_count() or 1
    n = int(raw)
    if n < 1:
        raise ValueError("DPPMC_THREADS must be a positive integer")
    return n


def draw_jacobi_params(config: ExperimentConfig, d: int) -> tuple[tuple[float, float], ...]:
    """Per-dimension (alpha, beta); drawn once per d under the random policy.

    The first dimension is pinned to the arcsine case (-1/2, -1/2); the
    remaining ones are uniform on [-1/2, 1/2]^2 from the (seed, d) stream.
    """
    if config.jacobi_policy == "fixed":
        return tuple(config.jacobi_params[:d])
    rng = derive_rng(config.seed, d)
    params = [(-0.5, -0.5)]
    for _ in range(d - 1):
        params.append((float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-0.5, 0.5))))
    return tuple(params)


def _one_replicate(args) -> float:
    params, N, epsilon, seed, d, rep, strategy, safety, bound = args
    measure = ProductMeasure.jacobi(params)
    kernel = CDKernel(measure, N)
    cfg = SamplerConfig(
        rng_seed=seed, rejection_bound_strategy=strategy, safety_factor=safety
    )
    rng = derive_rng(seed, d, N, rep)
    ws = sample(kernel, cfg, rng=rng, bound=bound)
    f = bump_integrand(d, epsilon)
    return estimate(f, ws).value


def _run_cell(
    config: ExperimentConfig,
    params: tuple[tuple[float, float], ...],
    d: int,
    N: int,
    workers: int,
) -> CellResult:
    measure = ProductMeasure.jacobi(params)
    kernel = CDKernel(measure, N)
    scfg = SamplerConfig(
        rng_seed=config.seed,
        rejection_bound_strategy=config.bound_strategy,
        safety_factor=config.safety_factor,
    )
    bound = rejection_bound(kernel, scfg)
    jobs = [
        (params, N, config.epsilon, config.seed, d, rep,
         config.bound_strategy, config.safety_factor, bound)
        for rep in range(config.n_repeat)
    ]
    if workers > 1:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(_one_replicate, jobs, chunksize=chunk))
    else:
        estimates = [_one_replicate(j) for j in jobs]
    est = np.array(estimates)
    var = float(est.var(ddof=1))
    p = ks_normality_p(est)
    retained = p is not None and p > config.ks_alpha and var > 0.0
    return CellResult(d, N, est, var, p, retained)


def run_variance_decay(
    config: ExperimentConfig, workers: int | None = None
) -> ExperimentResult:
    """Full protocol: sample cells, screen for Gaussianity, fit the decay.

    Replicates use streams derived from (seed, d, N, replicate), so results
    are identical for any worker count.  Raises RegressionDegenerateError
    (with partial results attached) when a dimension retains fewer than 3
    cells after the KS screen.
    """
    if workers is None:
        workers = resolve_workers()
    dim_results: list[DimensionResult] = []
    for d in config.dims:
        params = draw_jacobi_params(config, d)
        cells = tuple(
            _run_cell(config, params, d, N, workers) for N in config.n_grid
        )
        theoretical = -(1.0 + 1.0 / d)
        kept = [c for c in cells if c.retained]
        if len(kept) < 3:
            partial = ExperimentResult(
                config,
                tuple(dim_results)
                + (DimensionResult(d, params, cells, None, theoretical),),
            )
            raise RegressionDegenerateError(
                f"d={d}: only {len(kept)} cells retained by the KS screen; "
                "need >= 3 for the regression",
                partial,
            )
        pts = [(math.log(c.N), math.log(c.variance)) for c in kept]
        fit = loglog_regression(pts)
        dim_results.append(DimensionResult(d, params, cells, fit, theoretical))
    result = ExperimentResult(config, tuple(dim_results))
    if config.csv_path:
        result.write_csv(config.csv_path)
    if config.json_path:
        result.write_json(config.json_path)
    return result
