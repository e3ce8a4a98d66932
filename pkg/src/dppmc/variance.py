"""Limiting variance functionals in the Chebyshev frequency domain.

For f on I^d, with normalized Chebyshev coefficients
fhat(k) = int f(x) prod_j T_{k_j}(x_j) mu_eq(dx), the limiting variance of
the estimator is

    sigma_f^2 = (1/2) sum_k (k_1 + ... + k_d) fhat(k)^2,

and the Dirichlet form (1/2) sum_j int (sqrt(1-x_j^2) d_j f)^2 dmu_eq
dominates it, with equality exactly on multilinear functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import Integrand

SQ2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value together with a crude tail proxy."""

    value: float
    tail_bound: float


@dataclass(frozen=True)
class ChebCoeffs:
    """Tensor of normalized Chebyshev coefficients up to a per-axis cutoff."""

    d: int
    cutoff: int
    table: np.ndarray  # shape (cutoff+1,) * d

    def __post_init__(self):
        if self.table.shape != (self.cutoff + 1,) * self.d:
            raise ValueError("coefficient table has the wrong shape")

    def __getitem__(self, k) -> float:
        k = (k,) if np.isscalar(k) else tuple(k)
        if len(k) != self.d or any(not 0 <= v <= self.cutoff for v in k):
            raise IndexError(f"frequency {k} outside cutoff box")
        return float(self.table[k])

    def last_shell_mass(self) -> float:
        """Squared coefficient mass on the outermost frequency shell."""
        idx = np.indices(self.table.shape)
        shell = idx.max(axis=0) == self.cutoff
        return float((self.table[shell] ** 2).sum())


def chebyshev_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Chebyshev angles theta_i and nodes x_i = cos(theta_i)."""
    if order < 2:
        raise ValueError("order must be >= 2")
    theta = (2 * np.arange(order) + 1) * np.pi / (2 * order)
    return theta, np.cos(theta)


def _grid_points(x: np.ndarray, d: int) -> np.ndarray:
    grids = np.meshgrid(*([x] * d), indexing="ij")
    return np.stack(grids, axis=-1)


def cheb_coeffs(f, d: int, cutoff: int, order: int | None = None) -> ChebCoeffs:
    """Coefficients through tensor Gauss-Chebyshev quadrature in theta.

    With n nodes per axis the rule integrates polynomial integrands of
    degree < n exactly against every retained frequency, so polynomial f of
    degree < n gets exact coefficients up to round-off.  Default n is
    4 * cutoff.
    """
    if d < 1 or cutoff < 1:
        raise ValueError("need d >= 1 and cutoff >= 1")
    n = int(order) if order is not None else max(4 * cutoff, 8)
    if n <= cutoff:
        raise ValueError("node count must exceed the cutoff")
    theta, x = chebyshev_nodes(n)
    vals = np.asarray(f(_grid_points(x, d)), dtype=float)
    if vals.shape != (n,) * d:
        raise ValueError("integrand returned wrong grid shape")
    if not np.isfinite(vals).all():
        raise FloatingPointError("non-finite integrand values on the grid")
    # C[k, i] = T_k(x_i) / n; rows are discretely orthonormal for k < n
    ks = np.arange(cutoff + 1)
    C = np.cos(np.outer(ks, theta))
    C[1:] *= SQ2
    C /= n
    out = vals
    for _ in range(d):
        out = np.tensordot(out, C, axes=([0], [1]))
    return ChebCoeffs(d, cutoff, out)


def sigma_f_sq(coeffs: ChebCoeffs) -> SeriesValue:
    """Truncated limiting variance (1/2) sum |k|_1 fhat(k)^2.

    tail_bound is the outermost-shell mass times cutoff * d, a coarse proxy
    for what the truncation may be missing; it is 0 when f is a polynomial
    resolved inside the cutoff box.
    """
    idx = np.indices(coeffs.table.shape)
    value = 0.5 * float((idx.sum(axis=0) * coeffs.table**2).sum())
    tail = coeffs.last_shell_mass() * coeffs.cutoff * coeffs.d
    return SeriesValue(value, tail)


def equilibrium_product_density(points: np.ndarray) -> np.ndarray:
    """prod_j 1 / (pi sqrt(1 - x_j^2)) on points of shape (..., d)."""
    points = np.asarray(points, dtype=float)
    with np.errstate(divide="ignore"):
        return np.prod(1.0 / (np.pi * np.sqrt(1.0 - points**2)), axis=-1)


def omega_f_omega_sq(
    f, omega, d: int, cutoff: int, order: int | None = None
) -> SeriesValue:
    """Limiting variance of the importance-corrected statistic.

    Equals sigma_g^2 for g = f * omega / omega_eq; f must vanish near the
    boundary (support margin) for g to stay bounded, and non-finite grid
    values raise.
    """

    def g(points):
        points = np.asarray(points, dtype=float)
        ratio = np.prod(np.pi * np.sqrt(1.0 - points**2), axis=-1)
        return np.asarray(f(points), dtype=float) * np.asarray(
            omega(points), dtype=float
        ) * ratio

    return sigma_f_sq(cheb_coeffs(g, d, cutoff, order))


def dirichlet_bound(f: Integrand, order: int | None = None, fd_step: float = 1e-5) -> float:
    """(1/2) sum_j int (sqrt(1-x_j^2) d_j f)^2 dmu_eq^d.

    Upper-bounds sigma_f^2, with equality iff f is multilinear.  Uses the
    integrand's analytic gradient when present, otherwise central finite
    differences with the given step.  The default order keeps the tensor
    grid near 2e5 points regardless of d.
    """
    d = f.d
    if order is None:
        order = max(32, int(round(2e5 ** (1.0 / d))))
    _, x = chebyshev_nodes(order)
    pts = _grid_points(x, d).reshape(-1, d)
    if f.gradient is not None:
        grads = np.asarray(f.gradient(pts), dtype=float)
        if grads.shape != pts.shape:
            raise ValueError("gradient returned wrong shape")
    else:
        grads = np.empty_like(pts)
        for j in range(d):
            hi = pts.copy()
            lo = pts.copy()
            hi[:, j] += fd_step
            lo[:, j] -= fd_step
            grads[:, j] = (f(hi) - f(lo)) / (2.0 * fd_step)
    if not np.isfinite(grads).all():
        raise FloatingPointError("non-finite gradient values")
    total = float(((1.0 - pts**2) * grads**2).sum() / order**d)
    return 0.5 * total
