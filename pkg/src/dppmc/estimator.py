"""Unbiased linear-statistic estimators built on weighted DPP samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sampler import WeightedSample


@dataclass(frozen=True)
class Integrand:
    """A test function on I^d = [-1, 1]^d.

    evaluator is vectorized: it maps an array of shape (..., d) to values of
    shape (...).  support_margin > 0 asserts that the function vanishes
    within that distance of the boundary (several variance functionals need
    this to stay finite).  gradient, when given, follows the same batch
    convention with an extra trailing axis of length d.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    d: int
    support_margin: float = 0.0
    gradient: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 <= self.support_margin < 1.0:
            raise ValueError("support_margin must lie in [0, 1)")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(points, dtype=float)), dtype=float)


@dataclass(frozen=True)
class Estimate:
    value: float
    n_nodes: int
    seed: int | None = None
    measure_id: str = ""


def _as_values(f, sample: WeightedSample) -> np.ndarray:
    vals = np.asarray(f(sample.points), dtype=float)
    if vals.shape != (sample.n,):
        raise ValueError("integrand returned wrong shape for the sample")
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        i = int(bad[0])
        raise FloatingPointError(
            f"integrand returned {vals[i]!r} at node {sample.points[i].tolist()}"
        )
    return vals


def estimate(f: Integrand, sample: WeightedSample) -> Estimate:
    """sum_i f(x_i) / K_N(x_i, x_i), unbiased for int f dmu.

    Terms are accumulated with exact (fsum) summation, which subsumes
    compensated summation.
    """
    vals = _as_values(f, sample)
    total = math.fsum(vals * sample.weights)
    return Estimate(total, sample.n, sample.seed, sample.measure_id)


def importance_estimate(
    f: Integrand,
    target_density: Callable[[np.ndarray], np.ndarray],
    sample: WeightedSample,
    proposal_density: Callable[[np.ndarray], np.ndarray],
) -> Estimate:
    """Importance-reweighted estimator targeting int f(x) omega(x) dx.

    The sample must come from the ensemble of the proposal measure with
    density q = proposal_density; each term is multiplied by omega/q.
    Passing the same callable for both densities reproduces estimate() bit
    for bit.
    """
    vals = _as_values(f, sample)
    w_target = np.asarray(target_density(sample.points), dtype=float)
    w_prop = np.asarray(proposal_density(sample.points), dtype=float)
    dead = w_prop <= 0.0
    if dead.any():
        # A vanishing proposal density is only fatal where the target term
        # itself is nonzero; elsewhere the term is an honest zero.
        live = dead & (vals * w_target != 0.0)
        if live.any():
            i = int(np.flatnonzero(live)[0])
            raise FloatingPointError(
                f"proposal density vanishes at node {sample.points[i].tolist()} "
                "where the target integrand does not"
            )
        w_prop = np.where(dead, 1.0, w_prop)
        w_target = np.where(dead, 0.0, w_target)
    ratio = w_target / w_prop
    if not np.isfinite(ratio).all():
        raise FloatingPointError("non-finite importance ratio")
    total = math.fsum(vals * sample.weights * ratio)
    return Estimate(total, sample.n, sample.seed, sample.measure_id)
