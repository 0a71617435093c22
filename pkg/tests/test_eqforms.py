from math import factorial

import pytest
from scipy.special import bernoulli
from sympy import QQ, Rational, Symbol, series, sin

from getzlercalc.eqforms import (EqForm, VectorField, ahat, ch_rel, d, d_g, iota, kosmann_check,
                                 lie, line_bundle_model, moment, rotation_action, rotation_chart,
                                 series_in, tangent_model, tangent_moment, theta)
from getzlercalc.polynomials import ChartRing
from getzlercalc.series import ahat_coefficients, coth_coefficients, log_ahat_coefficients
from getzlercalc.utils import make_rng, random_form, random_poly


def test_series_coefficients_match_sympy():
    z = Symbol("z")
    f = series((z / 2) / sin(z / 2), z, 0, 9).removeO()
    coeffs = ahat_coefficients(9)
    for k in range(9):
        # (z/2)/sinh(z/2) has the coefficients of (z/2)/sin(z/2) with alternating signs
        expected = f.coeff(z, k) * (-1)**(k // 2)
        assert coeffs[k] == QQ(Rational(expected).p, Rational(expected).q)
    assert coeffs[2] == QQ(-1, 24)
    assert log_ahat_coefficients(5)[2] == QQ(-1, 24)
    assert coth_coefficients(5)[2] == QQ(1, 12)


def test_series_coefficients_match_bernoulli_numbers():
    B = bernoulli(12)
    f, h = ahat_coefficients(13), coth_coefficients(13)
    for n in range(1, 7):
        # x/sinh x and x coth x at x = z/2
        scale = factorial(2 * n) * 4**n
        assert float(f[2 * n]) == pytest.approx((2 - 4**n) * B[2 * n] / scale, rel=1e-12)
        assert float(h[2 * n]) == pytest.approx(4**n * B[2 * n] / scale, rel=1e-12)
        assert f[2 * n - 1] == 0 and h[2 * n - 1] == 0


def test_d_examples():
    chart = ChartRing.standard(2)
    x1, x2 = chart.x
    assert d(EqForm.from_terms(chart, {(1,): x1})) == EqForm.dx(chart, 0, 1)
    assert iota(VectorField.coordinate(chart, 0), EqForm.dx(chart, 0, 1)) == EqForm.dx(chart, 1)


def test_lie_of_rotation():
    chart = ChartRing.standard(2)
    x1, x2 = chart.x
    # x1 d/dx2 - x2 d/dx1
    rot = VectorField(chart, (-x2, x1))
    assert lie(rot, EqForm.dx(chart, 0)) == -EqForm.dx(chart, 1)
    assert lie(rot, EqForm.dx(chart, 1)) == EqForm.dx(chart, 0)
    assert lie(rot, EqForm.dx(chart, 0, 1)).is_zero()


def test_d_squared_and_iota_squared_vanish():
    rng = make_rng(1)
    chart = ChartRing.standard(3, 1, 2)
    v = VectorField(chart, tuple(random_poly(rng, chart, chart.coords, 2) for _ in range(3)))
    for _ in range(10):
        a = random_form(rng, chart)
        assert d(d(a)).is_zero()
        assert iota(v, iota(v, a)).is_zero()


def test_d_g_examples():
    chart = rotation_chart()
    action = rotation_action(chart)
    assert d_g(EqForm.scalar(chart, 1), action).is_zero()
    x1, x2 = chart.x
    X = chart.X[0]
    th = theta(action)
    expected = EqForm.from_terms(chart, {(0, 1): 2 * X, (): -X**2 * (x1**2 + x2**2)})
    assert d_g(th, action) == expected


def test_d_g_raises_equivariant_degree_by_one():
    chart = rotation_chart()
    action = rotation_action(chart)
    X = chart.X[0]
    x1, x2 = chart.x
    for alpha in (EqForm.from_terms(chart, {(0,): X * x1}),
                  EqForm.from_terms(chart, {(0, 1): x2}),
                  EqForm.from_terms(chart, {(0, 1): x1 * x2, (): X * x1})):
        (k,) = alpha.equivariant_degrees()
        assert d_g(alpha, action).equivariant_degrees() == {k + 1}


def test_d_g_squared_is_minus_lie():
    rng = make_rng(2)
    chart = ChartRing.standard(2, 1, 2)
    action = rotation_action(chart)
    for _ in range(50):
        a = random_form(rng, chart)
        assert (d_g(d_g(a, action), action) + lie(action, a)).is_zero()


def test_d_g_rejects_nonlinear_action():
    chart = ChartRing.standard(2, 1, 2)
    X = chart.X[0]
    with pytest.raises(ValueError):
        VectorField(chart, (X * X, chart.zero()), is_action=True)
    with pytest.raises(ValueError):
        d_g(EqForm.scalar(chart, 1), VectorField(chart, (X, X)))


def test_moment_examples():
    chart = rotation_chart()
    action = rotation_action(chart)
    zero = EqForm.zero(chart)
    assert moment(zero, action, [[chart.zero()]]).is_zero()
    mu = tangent_moment(action)
    X = chart.X[0]
    assert mu == [[chart.zero(), X], [-X, chart.zero()]]


def test_kosmann_identity():
    chart = ChartRing.standard(4, 2, 1)
    x = chart.x
    X1, X2 = chart.X
    action = VectorField(chart, (-X1 * x[1] + X2 * x[2], X1 * x[0], -X2 * x[0] + X1 * x[3],
                                 -X1 * x[2]), is_action=True)
    assert kosmann_check(action).is_zero()


def test_ahat_trivial_and_block():
    chart = ChartRing.standard(2, 1, 2)
    X = chart.X[0]
    zero = EqForm.scalar(chart, chart.mat_zero(2))
    assert ahat(zero) == EqForm.scalar(chart, 1)
    r = EqForm.from_terms(chart, {(): X, (0, 1): 1})
    R = EqForm.from_matrix(chart, [[EqForm.zero(chart), r], [-r, EqForm.zero(chart)]])
    # (r/2)/sin(r/2) = 1 + r^2/24 + 7 r^4/5760 + ...
    expected = series_in(r, [QQ(1), QQ(0), QQ(1, 24), QQ(0), QQ(7, 5760)])
    assert ahat(R) == expected
    assert ahat(R).is_even()


@pytest.mark.parametrize("J", [1, 2])
def test_ahat_rank_two_agrees_with_trace_log(J):
    chart = ChartRing.standard(4, 1, J)
    X = chart.X[0]
    z = EqForm.zero(chart)
    r = EqForm.from_terms(chart, {(): X, (0, 1): 1, (1, 3): 2, (0, 1, 2, 3): -1})
    two = EqForm.from_matrix(chart, [[z, r], [-r, z]])
    # the zero row and column leave the root determinant unchanged
    three = EqForm.from_matrix(chart, [[z, r, z], [-r, z, z], [z, z, z]])
    assert ahat(two) == ahat(three)
    assert ahat(two) != EqForm.scalar(chart, 1)


def test_ahat_multiplicative_over_blocks():
    chart = ChartRing.standard(4, 1, 2)
    X = chart.X[0]
    z = EqForm.zero(chart)
    r = EqForm.from_terms(chart, {(): X, (0, 1): 1})
    s = EqForm.from_terms(chart, {(): 2 * X, (2, 3): 1, (0, 2): 3})
    block = [[z, r, z, z], [-r, z, z, z], [z, z, z, s], [z, z, -s, z]]
    R = EqForm.from_matrix(chart, block)
    Rr = EqForm.from_matrix(chart, [[z, r], [-r, z]])
    Rs = EqForm.from_matrix(chart, [[z, s], [-s, z]])
    assert ahat(R) == ahat(Rr) * ahat(Rs)


def test_ahat_rejects_bad_input():
    chart = ChartRing.standard(2, 1, 1)
    X = chart.X[0]
    z = EqForm.zero(chart)
    r = EqForm.from_terms(chart, {(): X})
    with pytest.raises(ValueError):
        ahat(EqForm.from_matrix(chart, [[z, r], [r, z]]))
    one = EqForm.scalar(chart, 1)
    with pytest.raises(ValueError):
        ahat(EqForm.from_matrix(chart, [[z, one], [-one, z]]))


def test_ch_examples():
    chart = ChartRing.standard(4, 1, 1)
    X = chart.X[0]
    zero = EqForm.scalar(chart, chart.mat_zero(1))
    assert ch_rel(zero) == EqForm.scalar(chart, 1)
    w = EqForm.from_terms(chart, {(0, 1): 1, (2, 3): 2})
    W = EqForm.from_matrix(chart, [[w]])
    assert ch_rel(W) == series_in(w, [QQ(1), QQ(-1), QQ(1, 2)])
    u = EqForm.from_terms(chart, {(0, 2): 1, (): X})
    z = EqForm.zero(chart)
    block = EqForm.from_matrix(chart, [[w, z], [z, u]])
    assert ch_rel(block) == ch_rel(W) + ch_rel(EqForm.from_matrix(chart, [[u]]))
    graded = ch_rel(block, grading=[1, -1])
    assert graded == ch_rel(W) - ch_rel(EqForm.from_matrix(chart, [[u]]))


def test_line_bundle_model_is_equivariantly_closed():
    chart = rotation_chart(J=3)
    action = rotation_action(chart)
    A, L, F_g = line_bundle_model(chart, a=3, c=2)
    assert d_g(F_g, action).is_zero()
    assert d_g(ch_rel(F_g), action).is_zero()
    X = chart.X[0]
    x1, x2 = chart.x
    expected = EqForm.from_terms(chart, {(0, 1): chart.matrix([[6]]),
                                         (): chart.matrix([[2 * X - 3 * X * (x1**2 + x2**2)]])})
    assert F_g == expected


def test_tangent_model_ahat_is_equivariantly_closed():
    chart = rotation_chart(J=3)
    action = rotation_action(chart)
    A, L, R_g = tangent_model(chart, a=2)
    assert d_g(R_g, action).is_zero()
    A_hat = ahat(R_g)
    assert d_g(A_hat, action).is_zero()
    assert A_hat.coefficient(()) != chart.zero()
    assert A_hat.is_even()
