"""Orthonormal polynomial families on [-1, 1] via three-term recurrences.

All measures are normalized to probability measures, so phi_0 = 1 for every
family and the recurrence

    x phi_k(x) = a_k phi_{k+1}(x) + b_k phi_k(x) + a_{k-1} phi_{k-1}(x)

with a_{-1} = 0 determines the whole family from the coefficient arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import betaln, roots_jacobi


class ParameterDomainError(ValueError):
    """Raised when family parameters leave the admissible domain."""


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the weight (1-x)^alpha (1+x)^beta; both must exceed -1."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= -1.0:
                raise ParameterDomainError(
                    f"{name}={v!r} outside (-1, inf)"
                )

    @property
    def is_chebyshev(self) -> bool:
        return self.alpha == -0.5 and self.beta == -0.5


CHEBYSHEV = JacobiParams(-0.5, -0.5)
LEGENDRE = JacobiParams(0.0, 0.0)


def jacobi_mass(alpha: float, beta: float) -> float:
    """Total mass of (1-x)^alpha (1+x)^beta on [-1, 1].

    Equals 2^(alpha+beta+1) * B(alpha+1, beta+1); evaluated through log-gamma
    so large parameters do not overflow.
    """
    return float(np.exp((alpha + beta + 1) * np.log(2.0) + betaln(alpha + 1, beta + 1)))


def jacobi_density(params: JacobiParams) -> Callable[[np.ndarray], np.ndarray]:
    """Normalized density of the Jacobi probability measure, vectorized."""
    c = jacobi_mass(params.alpha, params.beta)
    a, b = params.alpha, params.beta

    def density(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.power(1.0 - x, a) * np.power(1.0 + x, b) / c

    return density


@dataclass(frozen=True)
class RecurrenceTable:
    """Coefficients a_0..a_{n-1}, b_0..b_{n-1} of an orthonormal recurrence.

    family is one of "jacobi", "chebyshev-t", "legendre", "custom"; params is
    set for the Jacobi-type tags so tables can be regrown to a longer length.
    """

    a: np.ndarray
    b: np.ndarray
    family: str = "custom"
    params: JacobiParams | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
            raise ValueError("a and b must be 1-d arrays of equal length")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("non-finite recurrence coefficient")
        if (a <= 0).any():
            raise ValueError("off-diagonal coefficients a_k must be positive")

    def __len__(self) -> int:
        return self.a.shape[0]

    def extended(self, n_max: int) -> "RecurrenceTable":
        """Same family, table of length at least n_max."""
        if n_max <= len(self):
            return self
        if self.family == "chebyshev-t":
            return chebyshev_recurrence(n_max)
        if self.params is not None:
            t = jacobi_recurrence(self.params, n_max)
            return RecurrenceTable(t.a, t.b, self.family, self.params)
        raise ValueError("custom table too short and cannot be regrown")


def chebyshev_recurrence(n_max: int) -> RecurrenceTable:
    """Chebyshev-T table with the exact constants a_0=1/sqrt(2), a_k=1/2."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    a = np.full(n_max, 0.5)
    a[0] = 1.0 / np.sqrt(2.0)
    b = np.zeros(n_max)
    return RecurrenceTable(a, b, "chebyshev-t", CHEBYSHEV)


def jacobi_recurrence(params: JacobiParams, n_max: int) -> RecurrenceTable:
    """Recurrence coefficients of the orthonormal Jacobi family.

    Closed forms for the monic coefficients (alpha_k, beta_k): all gamma
    ratios cancel, leaving rational expressions stable at any degree.  The
    orthonormal coefficients are a_k = sqrt(beta_{k+1}), b_k = alpha_k.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    al, be = params.alpha, params.beta
    s = al + be
    k = np.arange(n_max, dtype=float)

    b = np.where(
        k == 0,
        (be - al) / (s + 2.0),
        (be**2 - al**2) / np.maximum((2 * k + s) * (2 * k + s + 2.0), 1e-300),
    )
    if be == al:
        b = np.zeros(n_max)

    # beta_{k+1} for k = 0..n_max-1; the k=0 entry needs its own formula
    # because the general one has a removable 0/0 at s = -1.
    kp = k + 1.0
    num = 4.0 * kp * (kp + al) * (kp + be) * (kp + s)
    den = (2 * kp + s) ** 2 * (2 * kp + s + 1.0) * (2 * kp + s - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        beta_next = num / den
    beta_next[0] = 4.0 * (al + 1.0) * (be + 1.0) / ((s + 2.0) ** 2 * (s + 3.0))
    a = np.sqrt(beta_next)
    return RecurrenceTable(a, b, "jacobi", params)


def legendre_recurrence(n_max: int) -> RecurrenceTable:
    t = jacobi_recurrence(LEGENDRE, n_max)
    return RecurrenceTable(t.a, t.b, "legendre", LEGENDRE)


def eval_phi_all(table: RecurrenceTable, k_max: int, x) -> np.ndarray:
    """Evaluate phi_0..phi_{k_max} at x; shape (k_max+1,) + shape(x).

    The forward recurrence is run once for the whole vector; single-index
    evaluation is sugar on top of this primitive.
    """
    if k_max < 0:
        raise IndexError("k_max must be >= 0")
    if k_max >= len(table):
        raise IndexError(f"k_max={k_max} needs a table of length > {k_max}")
    x = np.asarray(x, dtype=float)
    out = np.empty((k_max + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if k_max >= 1:
        a, b = table.a, table.b
        out[1] = (x - b[0]) / a[0]
        for k in range(1, k_max):
            out[k + 1] = ((x - b[k]) * out[k] - a[k - 1] * out[k - 1]) / a[k]
    return out


def eval_phi(table: RecurrenceTable, k: int, x) -> float | np.ndarray:
    """phi_k(x) for a single degree k < len(table) + 1."""
    vals = eval_phi_all(table, k, x)
    return vals[k]


def nevai_diagnostic(table: RecurrenceTable, k_min: int = 0) -> tuple[float, float]:
    """(sup_k |a_k - 1/2|, sup_k |b_k|) over k >= k_min.

    Small values witness proximity to the Nevai class normalization where
    a_k -> 1/2 and b_k -> 0.
    """
    if not 0 <= k_min < len(table):
        raise IndexError("k_min outside table range")
    return (
        float(np.abs(table.a[k_min:] - 0.5).max()),
        float(np.abs(table.b[k_min:]).max()),
    )


def inner_product_x_power(table: RecurrenceTable, m: int, k: int, l: int) -> float:
    """<x^m phi_k, phi_l> under the family's measure.

    x^m phi_k is expanded in the phi basis by m applications of the
    recurrence, so the result is exact up to round-off and vanishes for
    |k - l| > m (band structure).  Requires len(table) >= max(k, l) + m.
    """
    if m < 0 or k < 0 or l < 0:
        raise IndexError("m, k, l must be nonnegative")
    if len(table) < max(k, l) + m:
        raise IndexError(
            f"table length {len(table)} < max(k,l)+m = {max(k, l) + m}"
        )
    if abs(k - l) > m:
        return 0.0
    # Work arrays padded to the expansion span; the padded tail is never
    # multiplied against a nonzero coefficient.
    span = k + m + 1
    avail = min(len(table), span)
    aa = np.zeros(span)
    bb = np.zeros(span)
    aa[:avail] = table.a[:avail]
    bb[:avail] = table.b[:avail]
    c = np.zeros(span)
    c[k] = 1.0
    for _ in range(m):
        nxt = bb * c
        nxt[1:] += aa[:-1] * c[:-1]
        nxt[:-1] += aa[:-1] * c[1:]
        c = nxt
    return float(c[l])


def gauss_jacobi(params: JacobiParams, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and probability-normalized weights for the Jacobi measure."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = roots_jacobi(order, params.alpha, params.beta)
    return x, w / w.sum()
