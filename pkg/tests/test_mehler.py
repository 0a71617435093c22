import pytest
import sympy
from sympy import QQ
from sympy.polys.domains import QQ_I

from getzlercalc.eqforms import EqForm, ahat
from getzlercalc.mehler import (GaussianElement, heat_chart, heat_residual,
                                kernel_supertrace_at_one, mehler_kernel, verify_heat_equation)
from getzlercalc.symbols import CurvatureModel, symbol_chart
from getzlercalc.utils import make_rng, random_curvature_model


def as_function(element):
    """sympy expression of a 1 x 1 scalar-form Gaussian element on a one-dimensional chart."""
    xi, tau = sympy.Symbol("eta1"), sympy.Symbol("tau")
    body = element.body.coefficient(())
    body = body.to_list()[0][0].as_expr() if hasattr(body, "to_list") else body.as_expr()
    n = element.chart.n
    return (tau**(-element.shift) * (4 * sympy.pi * tau)**sympy.Rational(-n, 2)
            * sympy.exp(-xi**2 / (4 * tau)) * body)


@pytest.mark.parametrize("shift", [0, 1, 3])
def test_conjugated_rules_match_calculus(shift):
    chart = heat_chart(symbol_chart(1))
    xi, tau = chart.x[0], chart.gen("tau")
    p = xi**3 * tau * QQ_I(3) + xi * QQ_I(QQ(-1, 2)) + tau**2 + 2
    element = GaussianElement(chart, shift, EqForm.scalar(chart, chart.matrix([[p]])))
    f = as_function(element)
    x, t = sympy.Symbol("eta1"), sympy.Symbol("tau")
    assert sympy.simplify(sympy.diff(f, x) - as_function(element.partial(0))) == 0
    assert sympy.simplify(sympy.diff(f, t) - as_function(element.d_tau())) == 0


@pytest.mark.parametrize("n", [1, 2, 4])
def test_free_kernel_solves_heat_equation(n):
    chart = symbol_chart(n)
    K = CurvatureModel.zero(chart)
    free = GaussianElement.free(heat_chart(chart))
    assert heat_residual(K, free).is_zero()
    assert mehler_kernel(K) == free


def rotation_model(J=1, with_F=False):
    chart = symbol_chart(2, 1, J)
    X = chart.X[0]
    dx = EqForm.dx(chart, 0, 1)
    F = EqForm.from_terms(chart, {(0, 1): chart.matrix([[3]])}) if with_F else None
    return CurvatureModel(chart, [[0, dx * QQ_I(2)], [dx * QQ_I(-2), 0]], [[0, X], [-X, 0]], F)


@pytest.mark.parametrize("J", [1, 2])
def test_rotation_block_heat_equation(J):
    assert verify_heat_equation(rotation_model(J)).is_zero()
    assert verify_heat_equation(rotation_model(J, with_F=True)).is_zero()


@pytest.mark.parametrize("n, J, r, seed", [(2, 1, 1, 0), (2, 2, 2, 1), (4, 1, 1, 2), (4, 1, 2, 3)])
def test_random_models_heat_equation(n, J, r, seed):
    rng = make_rng(seed)
    K = random_curvature_model(rng, symbol_chart(n, 1, J), r=r)
    assert verify_heat_equation(K).is_zero()


def test_wrong_kernel_leaves_residual():
    K = rotation_model(1, with_F=True)
    chart = heat_chart(K.chart)
    assert not heat_residual(K, GaussianElement.free(chart)).is_zero()


@pytest.mark.parametrize("n, J", [(2, 1), (2, 2), (4, 1)])
def test_kernel_chart_carries_dimension_and_truncation(n, J):
    K = random_curvature_model(make_rng(n + J), symbol_chart(n, 1, J))
    kernel = mehler_kernel(K)
    assert kernel.chart == heat_chart(K.chart)
    assert (kernel.chart.n, kernel.chart.J) == (n, J)
    assert kernel.chart.aux[-1] == "tau"
    assert kernel.shift == 0


def test_kernel_is_even_in_xi():
    rng = make_rng(4)
    for n in (2, 4):
        kernel = mehler_kernel(random_curvature_model(rng, symbol_chart(n, 1, 1)))
        assert kernel.reflect() == kernel


def test_tau_degrees_bounded_below():
    rng = make_rng(5)
    K = random_curvature_model(rng, symbol_chart(4, 1, 2))
    kernel = mehler_kernel(K)
    assert kernel.tau_degrees()[0] == 0
    assert kernel.d_tau().tau_degrees()[0] >= -(4 + 2 * 2)


def test_body_at_zero_xi_is_ahat_and_twist():
    K = rotation_model(1, with_F=True)
    kernel = mehler_kernel(K)
    chart = kernel.chart
    tau = chart.gen("tau")
    at_zero = kernel.body.evaluate({name: 0 for name in chart.coords})
    Kh = K.on_chart(chart)
    twist = EqForm.scalar(chart, chart.mat_eye(1)) - Kh.F_g() * tau
    assert at_zero == ahat(Kh.R_g() * tau).wedge(twist)


def test_supertrace_of_flat_kernel_vanishes():
    comparison = kernel_supertrace_at_one(CurvatureModel.zero(symbol_chart(2, 1, 1)))
    assert comparison.ok
    assert not comparison.kernel[1]


def test_supertrace_with_scalar_twist_curvature():
    chart = symbol_chart(2, 1, 1)
    c = QQ_I(5)
    F = EqForm.from_terms(chart, {(0, 1): chart.mat_eye(2).rmul(chart.ring(c))})
    K = CurvatureModel(chart, [[0, 0], [0, 0]], [[0, 0], [0, 0]], F, rank=2)
    comparison = kernel_supertrace_at_one(K)
    assert comparison.ok
    heat = heat_chart(chart)
    # -(2c) from tr(1 - F), times the Berezin constant -2i
    assert comparison.kernel[1] == heat.ring(QQ_I(0, 20))
    assert comparison.integrand[1] == heat.ring(QQ_I(-10))


def test_supertrace_with_curved_base():
    assert kernel_supertrace_at_one(rotation_model(2)).ok


@pytest.mark.parametrize("n, r, seed", [(2, 1, 0), (2, 2, 1), (4, 1, 2)])
def test_supertrace_matches_integrand_randomized(n, r, seed):
    rng = make_rng(seed)
    K = random_curvature_model(rng, symbol_chart(n, 1, 1), r=r)
    assert kernel_supertrace_at_one(K).ok
    if r == 2:
        assert kernel_supertrace_at_one(K, grading=[1, -1]).ok


def test_odd_dimension_and_bad_chart():
    with pytest.raises(ValueError):
        kernel_supertrace_at_one(CurvatureModel.zero(symbol_chart(3)))
    chart = symbol_chart(1)
    with pytest.raises(ValueError):
        GaussianElement(chart, 0, EqForm.scalar(chart, 1))
    with pytest.raises(ValueError):
        GaussianElement.free(heat_chart(chart)).normalization()
