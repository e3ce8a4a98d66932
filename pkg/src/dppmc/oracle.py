"""Exact covariance and variance oracles for linear statistics.

For polynomial statistics the covariance of sum_i P(x_i) and sum_i Q(x_i)
under the N-point ensemble has the closed form

    Cov = sum_{n < N} sum_{m >= N} <P phi_n, phi_m> <Q phi_n, phi_m>,

a finite sum because multiplication by a polynomial is banded in the
orthonormal basis.  These oracles exist to pin down the sampler and the
frequency-domain limits independently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .kernel import CDKernel
from .multiindex import graded_lex_key
from .orthopoly import chebyshev_recurrence, inner_product_x_power

SQ2 = np.sqrt(2.0)


def cheb_triple_product(k: int, n: int, m: int) -> float:
    """<T_k T_n, T_m> under the arcsine measure, normalized Chebyshev basis.

    T_k T_n = (1/sqrt2) T_{n+k} [k,n > 0] plus a lower term at |n-k| whose
    coefficient degenerates to 1 when n = 0 or n = k.
    """
    if min(k, n, m) < 0:
        raise ValueError("frequencies must be nonnegative")
    if k == 0:
        return 1.0 if n == m else 0.0
    out = 0.0
    if n != 0 and m == n + k:
        out += 1.0 / SQ2
    if m == abs(n - k):
        out += 1.0 / SQ2 if (n != 0 and n != k) else 1.0
    return out


def _mono_eval(exps: np.ndarray, coefs: np.ndarray, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    powers = points[..., None, :] ** exps  # (..., terms, d)
    return (coefs * powers.prod(axis=-1)).sum(axis=-1)


@dataclass(frozen=True)
class PolynomialStatistic:
    """A polynomial test function with monomial and Chebyshev representations.

    Either representation may be given; the other is derived on demand by
    expanding through the Chebyshev product/recurrence relations, and the
    two stay interconvertible up to round-off.
    """

    d: int
    monomial: tuple[tuple[tuple[int, ...], float], ...] | None = None
    chebyshev: tuple[tuple[tuple[int, ...], float], ...] | None = None

    def __post_init__(self):
        if self.monomial is None and self.chebyshev is None:
            raise ValueError("need at least one representation")
        for rep in (self.monomial, self.chebyshev):
            if rep is None:
                continue
            for key, _ in rep:
                if len(key) != self.d or any(v < 0 for v in key):
                    raise ValueError(f"bad term key {key} for d={self.d}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_monomials(cls, d: int, terms: dict) -> "PolynomialStatistic":
        items = tuple(sorted((tuple(map(int, k)), float(v)) for k, v in terms.items()))
        return cls(d, monomial=items)

    @classmethod
    def from_chebyshev(cls, d: int, terms: dict) -> "PolynomialStatistic":
        items = tuple(sorted((tuple(map(int, k)), float(v)) for k, v in terms.items()))
        return cls(d, chebyshev=items)

    @classmethod
    def chebyshev_T(cls, k) -> "PolynomialStatistic":
        k = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
        return cls.from_chebyshev(len(k), {k: 1.0})

    # -- representation changes -------------------------------------------

    def to_monomial(self) -> dict:
        if self.monomial is not None:
            return dict(self.monomial)
        out: dict[tuple[int, ...], float] = {}
        for key, coef in self.chebyshev:
            arrays = [_cheb_poly_coeffs(kj) for kj in key]
            for exps in itertools.product(*(range(len(a)) for a in arrays)):
                v = coef
                for a, e in zip(arrays, exps):
                    v *= a[e]
                if v != 0.0:
                    out[exps] = out.get(exps, 0.0) + v
        return {k: v for k, v in out.items() if v != 0.0}

    def to_chebyshev(self) -> dict:
        if self.chebyshev is not None:
            return dict(self.chebyshev)
        out: dict[tuple[int, ...], float] = {}
        for key, coef in self.monomial:
            arrays = [_power_in_cheb(ej) for ej in key]
            for freqs in itertools.product(*(range(len(a)) for a in arrays)):
                v = coef
                for a, f in zip(arrays, freqs):
                    v *= a[f]
                if v != 0.0:
                    out[freqs] = out.get(freqs, 0.0) + v
        return {k: v for k, v in out.items() if abs(v) > 0.0}

    def max_degrees(self) -> np.ndarray:
        """Per-dimension degree box; identical for both representations."""
        rep = self.monomial if self.monomial is not None else self.chebyshev
        degs = np.zeros(self.d, dtype=np.int64)
        for key, _ in rep:
            degs = np.maximum(degs, key)
        return degs

    # -- evaluation --------------------------------------------------------

    def _mono_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        mono = self.to_monomial()
        exps = np.array(list(mono.keys()), dtype=np.int64).reshape(len(mono), self.d)
        coefs = np.array(list(mono.values()), dtype=float)
        return exps, coefs

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        exps, coefs = self._mono_arrays()
        return _mono_eval(exps, coefs, points)

    __call__ = evaluate

    def gradient(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        exps, coefs = self._mono_arrays()
        out = np.empty(points.shape)
        for j in range(self.d):
            mask = exps[:, j] > 0
            if not mask.any():
                out[..., j] = 0.0
                continue
            de = exps[mask].copy()
            dc = coefs[mask] * de[:, j]
            de[:, j] -= 1
            out[..., j] = _mono_eval(de, dc, points)
        return out

    def as_integrand(self):
        from .estimator import Integrand

        return Integrand(self.evaluate, self.d, gradient=self.gradient)


def _cheb_poly_coeffs(k: int) -> np.ndarray:
    """Monomial coefficients of normalized T_k, lowest power first."""
    if k == 0:
        return np.array([1.0])
    table = chebyshev_recurrence(k + 1)
    prev = np.array([1.0])
    cur = np.array([0.0, SQ2])
    for j in range(1, k):
        nxt = np.zeros(j + 2)
        nxt[1:] = cur
        nxt[: j] -= table.a[j - 1] * prev
        nxt /= table.a[j]
        prev, cur = cur, nxt
    return cur


def _power_in_cheb(m: int) -> np.ndarray:
    """Chebyshev coefficients of x^m: m applications of the x-operator."""
    table = chebyshev_recurrence(m + 1)
    c = np.zeros(m + 1)
    c[0] = 1.0
    for _ in range(m):
        nxt = np.zeros(m + 1)
        nxt[1:] += table.a[:m] * c[:-1]
        nxt[:-1] += table.a[:m] * c[1:]
        c = nxt
    return c


def _is_equilibrium(kernel: CDKernel) -> bool:
    return all(m.kind == "equilibrium" for m in kernel.measure.marginals)


def _beyond(mvec: tuple[int, ...], last_key) -> bool:
    return graded_lex_key(mvec) > last_key


def cov_exact(P: PolynomialStatistic, Q: PolynomialStatistic, kernel: CDKernel) -> float:
    """Exact covariance of sum P(x_i) and sum Q(x_i) under the N-point law.

    The inner sum over m >= N is finite: per dimension |m_j - n_j| cannot
    exceed the smaller of the two statistics' degrees, so m ranges over a
    degree box around each retained index.  For an equilibrium kernel the
    inner products come from the closed Chebyshev product rule; general
    measures route through banded monomial expansions of x^e phi_n.
    """
    if P.d != kernel.d or Q.d != kernel.d:
        raise ValueError("statistic dimension disagrees with kernel")
    box = np.minimum(P.max_degrees(), Q.max_degrees())
    if (box == 0).all():
        return 0.0
    mi = kernel.mi
    last_key = graded_lex_key(tuple(int(v) for v in mi[-1]))

    if _is_equilibrium(kernel):
        p_terms = list(P.to_chebyshev().items())
        q_terms = list(Q.to_chebyshev().items())

        def inner(terms, nvec, mvec):
            return sum(
                c * np.prod([cheb_triple_product(kj, nj, mj)
                             for kj, nj, mj in zip(key, nvec, mvec)])
                for key, c in terms
            )

    else:
        p_terms = list(P.to_monomial().items())
        q_terms = list(Q.to_monomial().items())
        # inner_product_x_power(t, e, n, m) needs len(t) >= max(n, m) + e
        top_exp = np.maximum(P.max_degrees(), Q.max_degrees())
        need = int((mi.max(axis=0) + box + top_exp).max()) + 2
        tables = [m.recurrence(need) for m in kernel.measure.marginals]

        def inner(terms, nvec, mvec):
            return sum(
                c * np.prod([inner_product_x_power(tables[j], key[j], nvec[j], mvec[j])
                             for j in range(kernel.d)])
                for key, c in terms
            )

    acc = 0.0
    for row in mi:
        nvec = tuple(int(v) for v in row)
        ranges = [
            range(max(0, nj - bj), nj + bj + 1)
            for nj, bj in zip(nvec, box.tolist())
        ]
        for mvec in itertools.product(*ranges):
            if not _beyond(mvec, last_key):
                continue
            ip = inner(p_terms, nvec, mvec)
            if ip == 0.0:
                continue
            acc += ip * inner(q_terms, nvec, mvec)
    return float(acc)


def var_double_integral(f, kernel: CDKernel, order: int = 48) -> float:
    """(1/2) iint (f(x) - f(y))^2 K_N(x, y)^2 mu(dx) mu(dy) by tensor Gauss.

    Agrees with cov_exact(f, f) for polynomial f once the rule resolves the
    integrand's degree.  Quadratic cost in the grid size keeps this to
    d <= 2.
    """
    if kernel.d > 2:
        raise ValueError("double-integral oracle is restricted to d <= 2")
    pts, w = kernel.measure.gauss_grid(order)
    phi = kernel.phi_matrix(pts)
    K = phi.T @ phi
    vals = np.asarray(f(pts), dtype=float)
    diff = vals[:, None] - vals[None, :]
    return 0.5 * float(w @ ((diff * K) ** 2) @ w)


def cov_limit_cheby(k, l) -> float:
    """Large-N limit of Cov(sum T_k, sum T_l): (|k|_1 / 2) on the diagonal."""
    k = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
    l = (int(l),) if np.isscalar(l) else tuple(int(v) for v in l)
    if len(k) != len(l):
        raise ValueError("frequency tuples of different dimension")
    if any(v < 0 for v in k + l):
        raise ValueError("frequencies must be nonnegative")
    return 0.5 * sum(k) if k == l else 0.0
