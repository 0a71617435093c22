import pytest
from sympy import QQ
from sympy.polys.domains import QQ_I

from getzlercalc.polynomials import ChartRing, mat_is_zero, mat_trace


def test_chart_ring_has_every_variable():
    chart = ChartRing.standard(2, 1, 2)
    assert chart.ring.ngens == 3
    assert chart.ring.domain == QQ_I
    assert len(chart.x) == 2
    assert len(chart.X) == 1
    x1, x2 = chart.x
    X1 = chart.X[0]
    assert x1 != x2
    assert chart.gen("X1") == X1
    assert chart.diff(x1 * x2 * X1, "x2") == x1 * X1


def test_chart_ring_aux_variables():
    chart = ChartRing.standard(1, 2, 1, aux=("t",))
    assert chart.ring.ngens == 4
    (t,) = chart.a
    assert chart.gen("t") == t
    assert chart.param_degree(t**3) == 0


def test_empty_chart_has_placeholder_generator():
    chart = ChartRing.standard(0)
    assert chart.ring.ngens == 1
    assert chart.x == ()


def test_repeated_names_rejected():
    with pytest.raises(ValueError):
        ChartRing(("x1", "x1"))
    with pytest.raises(ValueError):
        ChartRing(("x1",), ("X1",), J=-1)


def test_truncation_in_parameters():
    chart = ChartRing.standard(1, 2, 1)
    (x1,) = chart.x
    X1, X2 = chart.X
    p = x1**3 + x1 * X1 + X1 * X2 + X2**2
    assert chart.truncate(p) == x1**3 + x1 * X1
    assert not chart.mul(X1, X2)
    assert chart.param_degree(p) == 2
    assert chart.coord_degree(p) == 3


def test_evaluate_and_coefficient():
    chart = ChartRing.standard(2)
    x1, x2 = chart.x
    p = x1**2 * x2 + x2 * QQ_I(3)
    assert chart.evaluate(p, {"x1": QQ(1, 2)}) == x2 * QQ_I(QQ(13, 4))
    assert chart.coefficient(p, {"x1": 2}) == x2
    assert chart.coefficient(p, {"x1": 0}) == x2 * QQ_I(3)
    parts = chart.homogeneous_parts(p)
    assert sorted(parts) == [1, 3]


def test_matrix_helpers():
    chart = ChartRing.standard(2)
    x1, x2 = chart.x
    m = chart.matrix([[x1, 1], [0, x2]])
    assert mat_trace(m) == x1 + x2
    assert mat_is_zero(chart.mat_zero(2))
    assert not mat_is_zero(m)
    assert chart.mat_eye(2).to_list() == chart.matrix([[1, 0], [0, 1]]).to_list()
