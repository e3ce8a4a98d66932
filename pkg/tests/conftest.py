"""Shared fixtures: kernels and large replicate batches reused across files.

The 10^4-replicate batches are session scoped because several statistical
checks (moment matching, one-point intensity, empirical variance) read the
same draws; regenerating them per test would dominate the suite's runtime.
"""

from __future__ import annotations

import numpy as np
import pytest

from dppmc import (
    CDKernel,
    ProductMeasure,
    SamplerConfig,
    derive_rng,
    rejection_bound,
    sample,
)

BATCH_SEED = 20240817


@pytest.fixture(scope="session")
def eq_measure_1d() -> ProductMeasure:
    return ProductMeasure.equilibrium(1)


@pytest.fixture(scope="session")
def kernel_eq_n5(eq_measure_1d) -> CDKernel:
    return CDKernel(eq_measure_1d, 5)


@pytest.fixture(scope="session")
def kernel_eq_n8(eq_measure_1d) -> CDKernel:
    return CDKernel(eq_measure_1d, 8)


def _draw_batch(kernel: CDKernel, n_rep: int, tag: int):
    cfg = SamplerConfig(rng_seed=BATCH_SEED)
    bound = rejection_bound(kernel, cfg)
    return [
        sample(kernel, cfg, rng=derive_rng(BATCH_SEED, tag, rep), bound=bound)
        for rep in range(n_rep)
    ]


@pytest.fixture(scope="session")
def samples_eq_n5(kernel_eq_n5):
    """10^4 replicates of the 5-point equilibrium ensemble (d=1)."""
    return _draw_batch(kernel_eq_n5, 10_000, tag=5)


@pytest.fixture(scope="session")
def samples_eq_n8(kernel_eq_n8):
    """10^4 replicates of the 8-point equilibrium ensemble (d=1)."""
    return _draw_batch(kernel_eq_n8, 10_000, tag=8)


def points_matrix(batch) -> np.ndarray:
    """Stack a batch's points into shape (replicates, N, d)."""
    return np.stack([ws.points for ws in batch])


def weights_matrix(batch) -> np.ndarray:
    return np.stack([ws.weights for ws in batch])
