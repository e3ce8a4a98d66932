import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dppmc import (
    JacobiParams,
    ParameterDomainError,
    RecurrenceTable,
    chebyshev_recurrence,
    eval_phi,
    eval_phi_all,
    inner_product_x_power,
    jacobi_mass,
    jacobi_recurrence,
    legendre_recurrence,
    nevai_diagnostic,
)
from dppmc.orthopoly import gauss_jacobi, jacobi_density

from oracles import (
    chebyshev_moments,
    jacobi_integer_moments,
    legendre_moments,
    recurrence_from_moments,
)

SQ2 = np.sqrt(2.0)

# Families exercised by the quadrature-based checks below.
FAMILIES = {
    "chebyshev": JacobiParams(-0.5, -0.5),
    "legendre": JacobiParams(0.0, 0.0),
    "jacobi(0.3,-0.2)": JacobiParams(0.3, -0.2),
    "jacobi(1.5,0.7)": JacobiParams(1.5, 0.7),
}


def table_for(params: JacobiParams, n: int) -> RecurrenceTable:
    if params.is_chebyshev:
        return chebyshev_recurrence(n)
    return jacobi_recurrence(params, n)


# -- parameters and masses -------------------------------------------------


@pytest.mark.parametrize("alpha,beta", [(-1.0, 0.0), (0.0, -1.5), (float("nan"), 0.0)])
def test_jacobi_params_rejects_bad_values(alpha, beta):
    with pytest.raises(ParameterDomainError):
        JacobiParams(alpha, beta)


@given(
    st.floats(min_value=-0.99, max_value=5.0),
    st.floats(min_value=-0.99, max_value=5.0),
)
def test_jacobi_params_accepts_admissible_values(alpha, beta):
    p = JacobiParams(alpha, beta)
    assert p.alpha == alpha and p.beta == beta


def test_jacobi_mass_known_values():
    assert_allclose(jacobi_mass(0.0, 0.0), 2.0, rtol=1e-14)
    assert_allclose(jacobi_mass(-0.5, -0.5), np.pi, rtol=1e-14)
    # int (1-x) dx = 2 and int (1-x)(1+x) dx = 4/3 over [-1, 1]
    assert_allclose(jacobi_mass(1.0, 0.0), 2.0, rtol=1e-14)
    assert_allclose(jacobi_mass(1.0, 1.0), 4.0 / 3.0, rtol=1e-14)


@given(
    st.floats(min_value=-0.95, max_value=4.0),
    st.floats(min_value=-0.95, max_value=4.0),
)
@settings(max_examples=50)
def test_jacobi_mass_matches_independent_beta(alpha, beta):
    import mpmath

    ref = 2.0 ** (alpha + beta + 1) * mpmath.beta(alpha + 1, beta + 1)
    assert jacobi_mass(alpha, beta) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize(
    "alpha,beta", [(-0.5, -0.5), (0.3, -0.2), (1.5, 0.7)]
)
def test_jacobi_mass_matches_tanh_sinh_quadrature(alpha, beta):
    # tanh-sinh quadrature in mpmath arithmetic absorbs the endpoint
    # singularities that make Gauss-Legendre useless here.
    import mpmath

    with mpmath.workdps(35):
        raw = mpmath.quad(
            lambda x: (1 - x) ** mpmath.mpf(alpha) * (1 + x) ** mpmath.mpf(beta),
            [-1, 1],
        )
    assert jacobi_mass(alpha, beta) == pytest.approx(float(raw), rel=1e-12)
    _, w = gauss_jacobi(JacobiParams(alpha, beta), 7)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    # the normalized density at an interior point
    assert jacobi_density(JacobiParams(alpha, beta))(0.3) == pytest.approx(
        (1 - 0.3) ** alpha * (1 + 0.3) ** beta / float(raw), rel=1e-12
    )


# -- recurrence construction ----------------------------------------------


def test_chebyshev_recurrence_exact_constants():
    t = chebyshev_recurrence(6)
    assert t.a[0] == 1.0 / SQ2
    assert (t.a[1:] == 0.5).all()
    assert (t.b == 0.0).all()


def test_jacobi_recurrence_recovers_chebyshev_constants():
    t = jacobi_recurrence(JacobiParams(-0.5, -0.5), 3)
    assert_allclose(t.a, [1.0 / SQ2, 0.5, 0.5], atol=1e-15)
    assert_allclose(t.b, 0.0, atol=1e-15)


def test_legendre_leading_coefficient():
    t = legendre_recurrence(2)
    assert_allclose(t.a[0], 1.0 / np.sqrt(3.0), rtol=1e-15)
    assert t.b[0] == 0.0


@pytest.mark.parametrize(
    "params,moments",
    [
        (JacobiParams(-0.5, -0.5), chebyshev_moments(21)),
        (JacobiParams(0.0, 0.0), legendre_moments(21)),
        (JacobiParams(1.0, 0.0), jacobi_integer_moments(1, 0, 21)),
        (JacobiParams(2.0, 3.0), jacobi_integer_moments(2, 3, 21)),
    ],
)
def test_jacobi_recurrence_matches_rational_gram_schmidt(params, moments):
    # Exact-arithmetic Stieltjes on the moment sequence is a fully
    # independent route to the same coefficients.
    a_ref, b_ref = recurrence_from_moments(moments, 10)
    t = jacobi_recurrence(params, 10)
    assert_allclose(t.a, a_ref, rtol=1e-13, atol=1e-14)
    assert_allclose(t.b, b_ref, rtol=1e-13, atol=1e-14)


def test_recurrence_table_validation():
    with pytest.raises(ValueError):
        RecurrenceTable(np.array([0.5, -0.5]), np.zeros(2))
    with pytest.raises(ValueError):
        RecurrenceTable(np.array([0.5]), np.zeros(2))
    with pytest.raises(ValueError):
        jacobi_recurrence(JacobiParams(0.3, -0.2), 0)


def test_extended_regrows_or_refuses():
    t = jacobi_recurrence(JacobiParams(0.3, -0.2), 4)
    longer = t.extended(9)
    assert len(longer) == 9
    assert_allclose(longer.a[:4], t.a, rtol=1e-15)
    assert len(t.extended(2)) == 4  # already long enough
    custom = RecurrenceTable(np.full(3, 0.5), np.zeros(3))
    with pytest.raises(ValueError):
        custom.extended(5)


# -- Nevai diagnostics -----------------------------------------------------


def test_nevai_chebyshev_is_exactly_at_the_limit():
    assert nevai_diagnostic(chebyshev_recurrence(10), 1) == (0.0, 0.0)


def test_nevai_legendre_tail_decay():
    t = legendre_recurrence(130)
    da10, db10 = nevai_diagnostic(t, 10)
    da100, db100 = nevai_diagnostic(t, 100)
    assert da10 < 0.01 and db10 < 0.01
    assert da100 < 1e-4 and db100 < 1e-4
    # tail sup is non-increasing in the cut
    assert da100 <= da10 and db100 <= db10


def test_nevai_range_check():
    with pytest.raises(IndexError):
        nevai_diagnostic(chebyshev_recurrence(4), 4)


# -- evaluation ------------------------------------------------------------


def test_eval_phi_chebyshev_point_values():
    t = chebyshev_recurrence(4)
    assert eval_phi(t, 0, 0.37) == 1.0
    assert_allclose(eval_phi(t, 1, 0.5), SQ2 / 2.0, rtol=1e-14)
    assert_allclose(eval_phi(t, 2, 0.5), -SQ2 / 2.0, rtol=1e-13)


@given(st.integers(min_value=1, max_value=20), st.floats(min_value=0.0, max_value=np.pi))
def test_chebyshev_closed_form(k, theta):
    t = chebyshev_recurrence(k + 1)
    assert_allclose(
        eval_phi(t, k, np.cos(theta)), SQ2 * np.cos(k * theta), atol=1e-12
    )


def test_eval_phi_all_shape_and_range_errors():
    t = chebyshev_recurrence(5)
    vals = eval_phi_all(t, 4, np.linspace(-1, 1, 7))
    assert vals.shape == (5, 7)
    with pytest.raises(IndexError):
        eval_phi_all(t, 5, 0.0)
    with pytest.raises(IndexError):
        eval_phi_all(t, -1, 0.0)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_recurrence_residual(name):
    params = FAMILIES[name]
    t = table_for(params, 22)
    rng = np.random.default_rng(7)
    x = rng.uniform(-1.0, 1.0, size=100)
    phi = eval_phi_all(t, 21, x)
    for k in range(21):
        lhs = x * phi[k]
        rhs = t.a[k] * phi[k + 1] + t.b[k] * phi[k]
        if k > 0:
            rhs = rhs + t.a[k - 1] * phi[k - 1]
        assert np.abs(lhs - rhs).max() < 1e-12


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_orthonormality_by_quadrature(name):
    # 200-node Gauss rule for the family's own measure: exact for the
    # polynomial integrands phi_k phi_l up to degree 399.
    params = FAMILIES[name]
    t = table_for(params, 9)
    x, w = gauss_jacobi(params, 200)
    phi = eval_phi_all(t, 8, x)
    gram = (phi * w) @ phi.T
    assert_allclose(gram, np.eye(9), atol=1e-8)


# -- inner products of x^m phi_k phi_l ------------------------------------


def test_inner_product_orthonormality_cases():
    t = chebyshev_recurrence(8)
    assert inner_product_x_power(t, 0, 3, 3) == 1.0
    assert inner_product_x_power(t, 0, 3, 4) == 0.0


def test_inner_product_band_structure():
    t = jacobi_recurrence(JacobiParams(0.3, -0.2), 30)
    assert inner_product_x_power(t, 2, 3, 6) == 0.0
    assert inner_product_x_power(t, 3, 9, 2) == 0.0


def test_inner_product_chebyshev_product_rule():
    # <x T_2, T_3> = a_2 = 1/2 from the three-term recurrence.
    t = chebyshev_recurrence(6)
    assert_allclose(inner_product_x_power(t, 1, 2, 3), 0.5, rtol=1e-15)


def test_inner_product_range_error():
    t = chebyshev_recurrence(5)
    with pytest.raises(IndexError):
        inner_product_x_power(t, 3, 4, 2)
    with pytest.raises(IndexError):
        inner_product_x_power(t, -1, 0, 0)


@pytest.mark.parametrize("name", ["chebyshev", "jacobi(0.3,-0.2)"])
def test_inner_product_against_quadrature(name):
    params = FAMILIES[name]
    t = table_for(params, 16)
    x, w = gauss_jacobi(params, 200)
    phi = eval_phi_all(t, 12, x)
    for m in range(5):
        xm = x**m
        for k in range(9):
            for l in range(9):
                direct = float((w * xm * phi[k]) @ phi[l])
                assert inner_product_x_power(t, m, k, l) == pytest.approx(
                    direct, abs=1e-8
                )


@given(
    st.integers(min_value=0, max_value=4),
    st.integers(min_value=0, max_value=8),
    st.integers(min_value=0, max_value=8),
)
@settings(max_examples=60)
def test_inner_product_is_symmetric_in_the_degrees(m, k, l):
    t = jacobi_recurrence(JacobiParams(0.4, 0.1), 16)
    assert inner_product_x_power(t, m, k, l) == pytest.approx(
        inner_product_x_power(t, m, l, k), rel=1e-12, abs=1e-13
    )


# -- quadrature helper -----------------------------------------------------


def test_gauss_jacobi_integrates_monomials():
    x, w = gauss_jacobi(JacobiParams(-0.5, -0.5), 10)
    assert_allclose(w @ x**2, 0.5, rtol=1e-13)
    assert_allclose(w @ x**4, 3.0 / 8.0, rtol=1e-13)
    with pytest.raises(ValueError):
        gauss_jacobi(JacobiParams(0.0, 0.0), 0)
