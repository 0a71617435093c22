import pytest
from sympy.polys.domains import QQ_I

from getzlercalc.clifford_model import (CliffordBundle, CliffordModel, module_generator,
                                        module_generators, str_t, str_zero_fiber,
                                        symbol_consistency, trace_chart, zero_fiber_symbol)
from getzlercalc.eqforms import EqForm
from getzlercalc.gradealg import CLIFFORD, Multivector, spin_lift
from getzlercalc.rescale import LaurentSection, Section, getzler_order, standard_frame
from getzlercalc.utils import make_rng, random_clifford_model, random_rescaled_section


def test_bundle_layout():
    bundle = CliffordBundle.build(2, r=2, d=1, J=1)
    assert bundle.rank == 16
    assert bundle.degrees[bundle.index((0, 1), 1, 0)] == 2
    assert bundle.degrees[bundle.index((), 0, 1)] == 0
    assert bundle.max_degree == 2 + 2
    assert bundle.chart.n == 4
    with pytest.raises(ValueError):
        CliffordBundle.build(0)


def test_left_and_right_multiplication():
    bundle = CliffordBundle.build(2)
    e1 = Multivector.basis(2, (0,), CLIFFORD)
    e2 = Multivector.basis(2, (1,), CLIFFORD)
    eye = bundle.chart.mat_eye(4)
    L1, L2 = bundle.left(e1), bundle.left(e2)
    assert L1 * L1 == -eye
    assert L1 * L2 == -(L2 * L1)
    R1 = bundle.right(e1)
    assert L1 * R1 == R1 * L1
    assert getzler_order(bundle, L1) == 1
    assert getzler_order(bundle, bundle.left(e1 * e2)) == 2
    assert getzler_order(bundle, bundle.twist_left([[QQ_I(3)]])) == 0


def test_section_element_correspondence():
    bundle = CliffordBundle.build(2)
    y1 = bundle.chart.gen("y1")
    e12 = Multivector.basis(2, (0, 1), CLIFFORD, coeff=y1)
    s = bundle.section(e12)
    assert s == Section.basis(bundle, bundle.index((0, 1)), y1)
    back = bundle.element(s)
    assert back.entry(0, 0) == e12
    # left multiplication on sections agrees with the algebra product
    e1 = Multivector.basis(2, (0,), CLIFFORD)
    assert s.apply(bundle.left(e1)) == bundle.section(e1 * e12)


def test_twisting_actions():
    bundle = CliffordBundle.build(2, r=2)
    M = [[QQ_I(1), QQ_I(2)], [QQ_I(0), QQ_I(-1)]]
    N = [[QQ_I(0), QQ_I(1)], [QQ_I(1), QQ_I(0)]]
    e1 = Multivector.basis(2, (0,), CLIFFORD)
    TL, TR, L1 = bundle.twist_left(M), bundle.twist_right(N), bundle.left(e1)
    assert TL * TR == TR * TL
    assert TL * L1 == L1 * TL
    i = bundle.index((), 0, 1)
    s = Section.basis(bundle, i).apply(TL)
    # M E_01 = E_01 + 0 * E_11
    assert s == Section.basis(bundle, bundle.index((), 0, 1))


@pytest.mark.parametrize("n, r, seed", [(2, 1, 0), (2, 2, 1)])
def test_radial_gauge_connection_is_admissible(n, r, seed):
    model = random_clifford_model(make_rng(seed), n, r)
    connection = model.connection
    assert connection.violations() == []
    assert all(not e for e in connection.radial().to_list_flat())
    for i, s in enumerate(standard_frame(connection)):
        assert s.terms == {-model.bundle.degrees[i]: Section.basis(model.bundle, i)}


def test_curvature_of_connection_on_base():
    bundle = CliffordBundle.build(2)
    J2 = [[QQ_I(0), QQ_I(1)], [QQ_I(-1), QQ_I(0)]]
    zero = [[QQ_I(0)] * 2 for _ in range(2)]
    negJ2 = [[-e for e in row] for row in J2]
    model = CliffordModel(bundle, [[zero, J2], [negJ2, zero]])
    K = model.connection.curvature(2, 3)
    expected = bundle.left(spin_lift(J2))
    assert K == expected
    with pytest.raises(ValueError):
        CliffordModel(bundle, [[zero, J2], [J2, zero]])
    with pytest.raises(ValueError):
        bad = [[QQ_I(1), QQ_I(0)], [QQ_I(0), QQ_I(0)]]
        CliffordModel(bundle, [[zero, bad], [[[-e for e in row] for row in bad], zero]])


def test_zero_fiber_symbol_of_generators():
    model = CliffordModel.flat(CliffordBundle.build(2, d=1, J=1))
    bundle = model.bundle
    chart = model.symbol_chart
    eta1, eta2 = chart.x
    X = chart.X[0]
    s = module_generator(bundle, bundle.index(()), alpha=(1, 0))
    assert zero_fiber_symbol(s, model.connection, (0, 0)) == \
        EqForm.scalar(chart, chart.matrix([[eta1]]))
    s = module_generator(bundle, bundle.index((1,)), alpha=(0, 2), beta=(1,))
    assert zero_fiber_symbol(s, model.connection, (0, 0)) == \
        EqForm.from_terms(chart, {(1,): chart.matrix([[eta2**2 * X]])})


def test_symbol_of_curved_nabla_example():
    bundle = CliffordBundle.build(2)
    b = QQ_I(3)
    J2 = [[QQ_I(0), b], [-b, QQ_I(0)]]
    zero = [[QQ_I(0)] * 2 for _ in range(2)]
    model = CliffordModel(bundle, [[zero, J2], [[[-e for e in row] for row in J2], zero]])
    K = model.curvature_model()
    chart = model.symbol_chart
    one = module_generator(bundle, bundle.index(()))
    ts = one.map(lambda v: model.connection.nabla(2, v)).shift(1)
    value = zero_fiber_symbol(ts, model.connection, (0, 0))
    assert value == K.half_K(0).wedge(EqForm.scalar(chart, chart.matrix([[1]])))
    assert not value.is_zero()


@pytest.mark.parametrize("n, r, d, J, seed, check", [
    (2, 1, 0, 0, 0, True),
    (2, 1, 1, 1, 1, True),
    (2, 2, 0, 0, 2, False),
])
def test_symbol_consistency(n, r, d, J, seed, check):
    model = random_clifford_model(make_rng(seed), n, r, d, J, check=check)
    generators = module_generators(model.bundle, max_y_degree=1)
    for m in [(0, 0), (1, -2)]:
        assert symbol_consistency(model, generators, m) == []


def test_str_t_of_top_element():
    for n, r in [(2, 1), (2, 2)]:
        model = CliffordModel(CliffordBundle.build(n, r), check=False)
        bundle = model.bundle
        out_chart = trace_chart(bundle)
        s = LaurentSection(bundle, {})
        for a in range(r):
            s = s + module_generator(bundle, bundle.index(bundle.top, a, a))
        expected = out_chart.ring(QQ_I(0, -2)**(n // 2) * r)
        assert str_t(s, (0,) * n) == expected
        assert str_zero_fiber(s, model.connection, (0,) * n) == expected


def test_str_t_vanishing_cases():
    model = CliffordModel.flat(CliffordBundle.build(2, d=1, J=1))
    bundle = model.bundle
    out_chart = trace_chart(bundle)
    low = module_generator(bundle, bundle.index((0,))) + module_generator(bundle, bundle.index(()))
    assert out_chart.evaluate(str_t(low, (0, 0)), {"t": 0}) == out_chart.zero()
    top = module_generator(bundle, bundle.index(bundle.top), beta=(1,))
    assert str_t(top, (0, 0)) == out_chart.ring(QQ_I(0, -2)) * out_chart.X[0]
    later = top.shift(1)
    assert out_chart.evaluate(str_t(later, (0, 0)), {"t": 0}) == out_chart.zero()
    with pytest.raises(ValueError):
        str_t(top.shift(-1), (0, 0))


def test_str_t_smooth_extension_randomized():
    rng = make_rng(7)
    model = random_clifford_model(rng, 2, 1, 1, 1)
    bundle = model.bundle
    out_chart = trace_chart(bundle)
    for _ in range(20):
        s = random_rescaled_section(rng, model)
        m = (int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
        value = str_t(s, m)
        assert out_chart.evaluate(value, {"t": 0}) == str_zero_fiber(s, model.connection, m)
