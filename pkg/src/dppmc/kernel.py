"""Product reference measures and the Christoffel-Darboux projection kernel.

K_N(x, y) = sum_{k=0}^{N-1} phi_k(x) phi_k(y) with multivariate basis
functions obtained by tensorizing univariate families along the graded
lexicographic bijection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .multiindex import MultiIndexBasis
from .orthopoly import (
    CHEBYSHEV,
    JacobiParams,
    RecurrenceTable,
    chebyshev_recurrence,
    eval_phi_all,
    gauss_jacobi,
    jacobi_density,
    jacobi_mass,
    jacobi_recurrence,
)


def equilibrium_density(x):
    """Arcsine density 1/(pi sqrt(1-x^2)), vectorized; +inf at the endpoints."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return 1.0 / (np.pi * np.sqrt(1.0 - x * x))


@dataclass(frozen=True)
class Marginal:
    """One coordinate's probability measure on [-1, 1].

    Jacobi-type marginals know their parameters and can grow recurrence
    tables on demand; custom marginals carry a fixed table and density.
    """

    kind: str
    params: JacobiParams | None = None
    table: RecurrenceTable | None = None
    density_fn: Callable | None = None

    @classmethod
    def jacobi(cls, alpha: float, beta: float) -> "Marginal":
        p = JacobiParams(alpha, beta)
        if p.is_chebyshev:
            return cls.equilibrium()
        return cls("jacobi", params=p)

    @classmethod
    def equilibrium(cls) -> "Marginal":
        return cls("equilibrium", params=CHEBYSHEV)

    @classmethod
    def legendre(cls) -> "Marginal":
        return cls("legendre", params=JacobiParams(0.0, 0.0))

    @classmethod
    def custom(cls, table: RecurrenceTable, density: Callable) -> "Marginal":
        return cls("custom", table=table, density_fn=density)

    def recurrence(self, n_max: int) -> RecurrenceTable:
        if self.kind == "equilibrium":
            return chebyshev_recurrence(n_max)
        if self.kind == "custom":
            if len(self.table) < n_max:
                raise ValueError("custom marginal table too short")
            return self.table
        return jacobi_recurrence(self.params, n_max)

    def density(self, x):
        if self.kind == "equilibrium":
            return equilibrium_density(x)
        if self.kind == "custom":
            return self.density_fn(x)
        return jacobi_density(self.params)(x)

    def density_ratio_to_equilibrium(self, x):
        """density(x) / equilibrium_density(x), computed without inf/inf.

        For Jacobi parameters >= -1/2 the ratio extends continuously to the
        endpoints, which matters for proposals landing near +-1.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "equilibrium":
            return np.ones_like(x)
        if self.kind == "custom":
            return self.density_fn(x) * (np.pi * np.sqrt(1.0 - x * x))
        p = self.params
        c = jacobi_mass(p.alpha, p.beta)
        return (
            (np.pi / c)
            * np.power(1.0 - x, p.alpha + 0.5)
            * np.power(1.0 + x, p.beta + 0.5)
        )

    def gauss(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss nodes/weights of the probability measure."""
        if self.kind == "custom":
            raise ValueError("no quadrature rule attached to a custom marginal")
        return gauss_jacobi(self.params, order)


@dataclass(frozen=True)
class ProductMeasure:
    """Tensor product of marginal measures; always a probability measure."""

    marginals: tuple[Marginal, ...]

    def __post_init__(self):
        if len(self.marginals) == 0:
            raise ValueError("need at least one marginal")
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def d(self) -> int:
        return len(self.marginals)

    @classmethod
    def equilibrium(cls, d: int) -> "ProductMeasure":
        return cls(tuple(Marginal.equilibrium() for _ in range(d)))

    @classmethod
    def jacobi(cls, params: Sequence[tuple[float, float]]) -> "ProductMeasure":
        return cls(tuple(Marginal.jacobi(a, b) for a, b in params))

    def density(self, x):
        """Joint density at points of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for j, marg in enumerate(self.marginals):
            out = out * marg.density(x[..., j])
        return out

    def density_ratio_to_equilibrium(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for j, marg in enumerate(self.marginals):
            out = out * marg.density_ratio_to_equilibrium(x[..., j])
        return out

    def gauss_grid(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss rule: points (order^d, d) and weights (order^d,)."""
        nodes, weights = zip(*(m.gauss(order) for m in self.marginals))
        grids = np.meshgrid(*nodes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.ones(1)
        for wj in weights:
            w = np.multiply.outer(w, wj).ravel()
        return pts, w

    def integrate(self, f: Callable, order: int) -> float:
        pts, w = self.gauss_grid(order)
        return float(np.dot(w, np.asarray(f(pts), dtype=float)))

    def describe(self) -> str:
        parts = []
        for m in self.marginals:
            if m.kind == "custom":
                parts.append("custom")
            else:
                parts.append(f"jacobi({m.params.alpha:g},{m.params.beta:g})")
        return ";".join(parts)


class CDKernel:
    """Projection kernel onto the first N basis functions of a product measure."""

    def __init__(self, measure: ProductMeasure, N: int):
        if N < 1:
            raise ValueError("N must be >= 1")
        self.measure = measure
        self.N = int(N)
        self.basis = MultiIndexBasis(measure.d)
        self.mi = self.basis.prefix_array(self.N)
        self.degrees = self.mi.max(axis=0)
        # one table per dimension, long enough for the top degree used
        self.tables = tuple(
            marg.recurrence(int(deg) + 2)
            for marg, deg in zip(measure.marginals, self.degrees)
        )

    @property
    def d(self) -> int:
        return self.measure.d

    def phi_matrix(self, points: np.ndarray) -> np.ndarray:
        """Multivariate basis values; (N, n) for points of shape (n, d)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.d:
            raise ValueError(f"points must have {self.d} columns")
        out = np.ones((self.N, points.shape[0]))
        for j in range(self.d):
            uni = eval_phi_all(self.tables[j], int(self.degrees[j]), points[:, j])
            out *= uni[self.mi[:, j], :]
        return out

    def phi_flat(self, x: np.ndarray) -> np.ndarray:
        """Basis vector (phi_0(x), ..., phi_{N-1}(x))."""
        return self.phi_matrix(np.asarray(x, dtype=float)[None, :])[:, 0]

    def eval_multivariate_phi(self, k: int, x) -> float:
        """phi_k(x) for one flat index k < N."""
        if not 0 <= k < self.N:
            raise IndexError(f"flat index {k} outside [0, {self.N})")
        return float(self.phi_flat(x)[k])

    def eval(self, x, y) -> float:
        return float(np.dot(self.phi_flat(x), self.phi_flat(y)))

    __call__ = eval

    def diag(self, points: np.ndarray) -> np.ndarray:
        """K_N(x, x) for points of shape (n, d)."""
        phi = self.phi_matrix(points)
        return np.einsum("kn,kn->n", phi, phi)

    def leverage(self, x) -> float:
        """Quadrature weight 1 / K_N(x, x); lies in (0, 1] since phi_0 = 1."""
        x = np.asarray(x, dtype=float)
        return float(1.0 / self.diag(x[None, :])[0])

    def product_identity_check(self, M: int, x, y) -> tuple[float, float]:
        """(flat evaluation, product of univariate kernels) at N = M^d.

        The two must agree: the first M^d graded-lex indices are exactly the
        hypercube {0..M-1}^d, so the kernel tensorizes.
        """
        if M**self.d != self.N:
            raise ValueError(f"kernel has N={self.N}, not {M}^{self.d}")
        lhs = self.eval(x, y)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        rhs = 1.0
        for j in range(self.d):
            ux = eval_phi_all(self.tables[j], M - 1, x[j])
            uy = eval_phi_all(self.tables[j], M - 1, y[j])
            rhs *= float(np.dot(ux, uy))
        return lhs, rhs
