import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonlab import numcore as nc
from poissonlab.errors import EvaluationError, SingularSystemError

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# -- directional derivatives -------------------------------------------------


@pytest.mark.parametrize("mode", [nc.CENTRAL, nc.DUAL])
def test_product_rule_by_hand(mode):
    f = lambda x: x[0] * x[1]
    assert nc.diff_directional(f, [1.0, 2.0], [1.0, 0.0], mode) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("mode", [nc.CENTRAL, nc.DUAL])
def test_constant_has_zero_derivative(mode):
    assert nc.diff_directional(lambda x: 3.5, [0.3, -0.2], [1.0, 1.0], mode) == 0.0


def test_sine_modes_agree():
    f = lambda x: nc.sin(x[0])
    dual = nc.diff_directional(f, [0.0], [1.0], nc.DUAL)
    central = nc.diff_directional(f, [0.0], [1.0], nc.CENTRAL, 1e-5)
    assert dual == 1.0
    assert abs(central - dual) < 1e-8


def test_non_finite_value_raises():
    with pytest.raises(EvaluationError):
        nc.diff_directional(lambda x: 1.0 / x[0], [0.0], [1.0], nc.DUAL)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_dual_and_central_agree_on_polynomials(seed, degree):
    rng = np.random.default_rng(seed)
    f = nc.random_polynomial(nc.Chart(3), degree, rng)
    x, v = rng.uniform(-1, 1, (2, 3))
    dual = nc.diff_directional(f, x, v, nc.DUAL)
    central = nc.diff_directional(f, x, v, nc.CENTRAL)
    assert abs(dual - central) < 1e-7


def test_jacobian_orientation():
    fmap = lambda x: nc.concat([x[0] * x[1], 3.0 * x[1]])
    for mode in (nc.CENTRAL, nc.DUAL):
        J = nc.jacobian(fmap, [2.0, 5.0], mode)
        np.testing.assert_allclose(J, [[5.0, 2.0], [0.0, 3.0]], atol=1e-8)


# -- curves ---------------------------------------------------------------------


def test_parabola_velocity():
    np.testing.assert_allclose(nc.curve_velocity(lambda t: nc.concat([t, t * t]), 0.0), [1.0, 0.0], atol=1e-10)


def test_constant_curve_velocity():
    np.testing.assert_array_equal(nc.curve_velocity(lambda t: np.array([1.0, 2.0])), [0.0, 0.0])


def test_matrix_exponential_curve():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(3, 3))
    x0 = rng.normal(size=3)
    vel = nc.curve_velocity(lambda t: scipy.linalg.expm(nc.real(t) * A) @ x0, 0.0)
    np.testing.assert_allclose(vel, A @ x0, atol=1e-7)
    vel_dual = nc.curve_velocity(lambda t: nc.expm(t * A) @ x0, 0.0, mode=nc.DUAL)
    np.testing.assert_allclose(vel_dual, A @ x0, atol=1e-12)


# -- exterior derivative and Lie derivative --------------------------------------------


def test_d_of_p_dq():
    lam = lambda y: np.array([y[1], 0.0])  # coordinates (q, p)
    x = np.array([0.4, -0.7])
    assert nc.exterior_d1(lam, x, [1, 0], [0, 1]) == pytest.approx(-1.0, abs=1e-9)
    assert nc.exterior_d1(lam, x, [0, 1], [1, 0]) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_d_squared_vanishes(seed):
    rng = np.random.default_rng(seed)
    f = nc.random_polynomial(nc.Chart(3), 3, rng)
    df = lambda y: nc.gradient(f, y, nc.DUAL)
    x, v, w = rng.uniform(-1, 1, (3, 3))
    assert abs(nc.exterior_d1(df, x, v, w)) < 1e-6


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_exterior_derivative_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    form = lambda y: A @ (y * y)
    x, v, w = rng.uniform(-1, 1, (3, 3))
    assert nc.exterior_d1(form, x, v, w) == -nc.exterior_d1(form, x, w, v)
    W = nc.exterior_d1_matrix(form, x)
    np.testing.assert_array_equal(W, -W.T)
    assert abs(v @ W @ w - nc.exterior_d1(form, x, v, w)) < 1e-7


def test_lie_derivative_examples():
    x = np.array([0.3, 1.1])
    zero = nc.lie_derivative_oneform(lambda y: np.array([1.0, 2.0]), lambda y: np.array([-1.0, 0.5]), x)
    np.testing.assert_allclose(zero, 0.0, atol=1e-12)
    out = nc.lie_derivative_oneform(lambda y: np.array([1.0, 0.0]), lambda y: np.array([0.0, y[0]]), x)
    np.testing.assert_allclose(out, [0.0, 1.0], atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_lie_derivative_of_exact_form_is_exact(seed):
    rng = np.random.default_rng(seed)
    chart = nc.Chart(3)
    f = nc.random_polynomial(chart, 3, rng)
    comps = [nc.random_polynomial(chart, 2, rng) for _ in range(3)]
    X = lambda y: np.array([float(nc.real(c(y))) for c in comps])
    df = lambda y: nc.gradient(f, y, nc.DUAL)
    Xf = lambda y: float(nc.gradient(f, y, nc.DUAL) @ X(y))
    x = rng.uniform(-1, 1, 3)
    np.testing.assert_allclose(nc.lie_derivative_oneform(X, df, x), nc.gradient(Xf, x), atol=1e-6)


def test_vector_field_bracket_coordinates():
    # [x d/dy, d/dx] = -d/dy
    u = lambda y: np.array([0.0, y[0]])
    v = lambda y: np.array([1.0, 0.0])
    np.testing.assert_allclose(nc.vector_field_bracket(u, v, np.array([0.2, 0.3])), [0.0, -1.0], atol=1e-9)


# -- matrix functions and solves ------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_logm_inverts_expm(seed):
    rng = np.random.default_rng(seed)
    A = 0.3 * rng.normal(size=(3, 3))
    np.testing.assert_allclose(nc.logm(scipy.linalg.expm(A)), A, atol=1e-10)


def test_expm_dual_matches_frechet_derivative():
    rng = np.random.default_rng(5)
    A, E = rng.normal(size=(2, 3, 3))
    out = nc.expm(nc.Dual(A, E))
    _, frechet = scipy.linalg.expm_frechet(A, E)
    np.testing.assert_allclose(out.du, frechet, atol=1e-10)


def test_solve_and_singular():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(nc.solve(a, [3.0, 5.0]), np.linalg.solve(a, [3.0, 5.0]))
    with pytest.raises(SingularSystemError):
        nc.solve(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 1.0])


def test_dual_matmul_with_plain_arrays():
    rng = np.random.default_rng(0)
    A, B, C = rng.normal(size=(3, 2, 2))
    d = nc.Dual(A, B)
    np.testing.assert_allclose((d @ C).du, B @ C)
    np.testing.assert_allclose((C @ d).du, C @ B)
    np.testing.assert_allclose((d @ d).du, A @ B + B @ A)


def test_test_function_family_is_seeded():
    chart = nc.Chart(2)
    a = nc.test_functions(chart, np.random.default_rng(1))
    b = nc.test_functions(chart, np.random.default_rng(1))
    x = np.array([0.1, 0.2])
    assert [f(x) for f in a] == [f(x) for f in b]
