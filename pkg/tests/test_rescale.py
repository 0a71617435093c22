import pytest
from sympy import QQ

from getzlercalc.dnc import LocalModel
from getzlercalc.eqforms import EqForm, d
from getzlercalc.rescale import (NEG_INF, POS_INF, ConnectionData, DiffOp, FilteredBundle,
                                 LaurentSection, Section, end_filtration_order,
                                 eval_section_generic, eval_section_zero, filtration_order,
                                 form_generators, frame_rank_test, getzler_order,
                                 scaling_order_bruteforce, section_membership, standard_frame,
                                 synchronous_extension, taylor_expand, taylor_order,
                                 taylor_remainder, witten_membership)
from getzlercalc.utils import (make_rng, random_bundle, random_connection, random_end, random_op,
                               random_section, sample_points)


def flat(l, k, degrees):
    return ConnectionData.flat(FilteredBundle(LocalModel(l, k), degrees))


def elementary(chart, r, a, b, coeff=1):
    return chart.matrix([[coeff if (i, j) == (a, b) else 0 for j in range(r)] for i in range(r)])


def test_filtration_order_examples():
    bundle = FilteredBundle(LocalModel(1, 1), (1, 2))
    x1, y1 = bundle.chart.x
    assert filtration_order(Section.basis(bundle, 0)) == 1
    assert filtration_order(Section.basis(bundle, 0, y1)) == NEG_INF
    assert filtration_order(Section(bundle, (1, x1))) == 2


def test_bundle_rejects_incompatible_end_degrees():
    with pytest.raises(ValueError):
        FilteredBundle(LocalModel(1, 1), (0, 2), end_degrees=((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        FilteredBundle(LocalModel(1, 1), (0,), param_weight=1)


def test_connection_checkers_reject_bad_data():
    bundle = FilteredBundle(LocalModel(1, 1), (0, 1))
    chart = bundle.chart
    with pytest.raises(ValueError):
        ConnectionData(bundle, (elementary(chart, 2, 1, 0), chart.mat_zero(2)))
    steep = FilteredBundle(LocalModel(0, 2), (0, 3))
    chart = steep.chart
    y1 = chart.x[0]
    A = (chart.mat_zero(2), elementary(chart, 2, 1, 0, y1))
    with pytest.raises(ValueError):
        ConnectionData(steep, A)
    assert ConnectionData(steep, A, check=False).check_curvature()


def test_taylor_expand_flat_examples():
    connection = flat(1, 1, (0,))
    bundle = connection.bundle
    _, y1 = bundle.chart.x
    e1 = Section.basis(bundle, 0)
    assert taylor_expand(Section.basis(bundle, 0, y1), connection) == [((1,), e1)]
    assert taylor_expand(Section.basis(bundle, 0, 1 + y1), connection) == [((0,), e1), ((1,), e1)]


def test_taylor_expand_resums_with_curved_connection():
    bundle = FilteredBundle(LocalModel(1, 1), (0, 0))
    chart = bundle.chart
    x1, y1 = chart.x
    connection = ConnectionData(bundle, (chart.mat_zero(2), elementary(chart, 2, 1, 0, y1)))
    sigma = Section.basis(bundle, 0)
    expansion = taylor_expand(sigma, connection, N=6)
    assert taylor_remainder(sigma, connection, expansion, N=6).is_zero()
    # e1 = e~1 + y1^2/2 e~2 + ...
    assert ((2,), Section(bundle, (0, QQ(1, 2)))) in expansion


def test_taylor_remainder_on_random_sections():
    rng = make_rng(11)
    for _ in range(10):
        bundle = random_bundle(rng, 1, 2, 2)
        connection = random_connection(rng, bundle)
        sigma = random_section(rng, bundle)
        expansion = taylor_expand(sigma, connection, N=6)
        assert taylor_remainder(sigma, connection, expansion, N=6).is_zero()


def test_taylor_order_examples():
    assert taylor_order(Section.basis(flat(1, 1, (2,)).bundle, 0), flat(1, 1, (2,))).value == -2
    connection = flat(1, 1, (0,))
    _, y1 = connection.bundle.chart.x
    order = taylor_order(Section.basis(connection.bundle, 0, y1), connection)
    assert order.value == 1 and order.certified
    zero = taylor_order(Section.zero(connection.bundle), connection)
    assert zero.value == POS_INF and zero.certified


def test_taylor_order_flags_short_jets():
    connection = flat(1, 1, (0,))
    _, y1 = connection.bundle.chart.x
    order = taylor_order(Section.basis(connection.bundle, 0, y1**5), connection, N=3)
    assert order.inconclusive
    with pytest.raises(ValueError):
        taylor_order(Section.basis(connection.bundle, 0, y1), connection, N=0)


def test_scaling_order_examples():
    connection = flat(1, 1, (0,))
    _, y1 = connection.bundle.chart.x
    assert scaling_order_bruteforce(Section.basis(connection.bundle, 0, y1), connection, 3).value == 1
    deep = flat(1, 1, (2,))
    order = scaling_order_bruteforce(Section.basis(deep.bundle, 0), deep, 3)
    assert order.value == -2 and order.certified


@pytest.mark.parametrize("l,k,r", [(1, 1, 2), (1, 2, 2), (2, 1, 3), (0, 2, 3)])
def test_scaling_order_equals_taylor_order(l, k, r):
    rng = make_rng(100 + 10 * l + k + r)
    checked = 0
    for _ in range(10):
        bundle = random_bundle(rng, l, k, r)
        connection = random_connection(rng, bundle)
        sigma = random_section(rng, bundle)
        t = taylor_order(sigma, connection)
        s = scaling_order_bruteforce(sigma, connection, op_bound=4)
        if t.certified and s.certified:
            assert s.value == t.value
            checked += 1
    assert checked >= 8


def test_getzler_order_is_subadditive_and_composition_is_exact():
    rng = make_rng(12)
    for _ in range(15):
        bundle = random_bundle(rng, 1, 1, 2)
        connection = random_connection(rng, bundle)
        D1, D2 = random_op(rng, connection), random_op(rng, connection)
        D12 = D1 @ D2
        assert D12.getzler_order() <= D1.getzler_order() + D2.getzler_order()
        sigma = random_section(rng, bundle)
        assert D12.apply(sigma) == D1.apply(D2.apply(sigma))


def test_scaling_order_drops_by_at_most_getzler_order():
    rng = make_rng(13)
    for _ in range(15):
        bundle = random_bundle(rng, 1, 1, 2)
        connection = random_connection(rng, bundle)
        D = random_op(rng, connection)
        sigma = random_section(rng, bundle)
        before = taylor_order(sigma, connection)
        after = taylor_order(D.apply(sigma), connection)
        if before.certified and after.certified:
            assert after.value >= before.value - D.getzler_order()


def test_filtration_order_bounded_by_getzler_order():
    rng = make_rng(14)
    bundle = random_bundle(rng, 1, 2, 3)
    for _ in range(20):
        phi = random_end(rng, bundle)
        assert end_filtration_order(bundle, phi) <= getzler_order(bundle, phi)


def test_declared_order_is_enforced():
    connection = flat(1, 1, (0,))
    eye = connection.bundle.chart.mat_eye(1)
    assert DiffOp(connection, {(1,): eye}, declared_order=1).getzler_order() == 1
    with pytest.raises(ValueError):
        DiffOp(connection, {(1,): eye}, declared_order=0)


def test_normal_derivative_of_synchronous_frame_vanishes_on_base():
    rng = make_rng(15)
    bundle = random_bundle(rng, 1, 2, 2)
    connection = random_connection(rng, bundle)
    for s in standard_frame(connection):
        (section,) = s.terms.values()
        for j in range(bundle.model.k):
            derivative = connection.nabla(bundle.model.l + j, section)
            assert all(not bundle.restrict(c) for c in derivative.components)


def test_eval_section_zero_examples():
    rng = make_rng(16)
    bundle = random_bundle(rng, 1, 1, 3)
    connection = random_connection(rng, bundle)
    for i in range(3):
        value = eval_section_zero(synchronous_extension(connection, i), connection, (QQ(1, 3),), (0,))
        chart = bundle.chart
        assert value == tuple(chart.one() if j == i else chart.zero() for j in range(3))
    flat_connection = flat(1, 1, (0,))
    _, y1 = flat_connection.bundle.chart.x
    s = LaurentSection(flat_connection.bundle, {1: Section.basis(flat_connection.bundle, 0, y1)})
    ring = flat_connection.bundle.chart.ring
    assert eval_section_zero(s, flat_connection, (0,), (QQ(5, 7),)) == (ring(QQ(5, 7)),)
    assert eval_section_generic(s, (0, 3), 2) == (ring(QQ(3, 2)),)


def test_eval_section_zero_symbolic_normal_vector():
    bundle = FilteredBundle(LocalModel(1, 1, aux=("a",)), (0,))
    connection = ConnectionData.flat(bundle)
    chart = bundle.chart
    _, y1 = chart.x
    a = chart.gen("a")
    s = LaurentSection(bundle, {2: Section.basis(bundle, 0, y1**2)})
    assert eval_section_zero(s, connection, (1,), (a,)) == (a**2,)


def test_eval_section_zero_rejects_non_members():
    connection = flat(1, 1, (0,))
    s = LaurentSection(connection.bundle, {1: Section.basis(connection.bundle, 0)})
    assert not section_membership(s, connection)
    with pytest.raises(ValueError):
        eval_section_zero(s, connection, (0,), (1,))


def test_frame_rank_test_examples():
    rng = make_rng(17)
    connection = flat(1, 1, (0, 1, 2))
    generic, zero = sample_points(rng, connection.bundle.model)
    assert frame_rank_test(standard_frame(connection), connection, generic, zero)
    e1 = synchronous_extension(connection, 1)
    assert not frame_rank_test([e1, e1], connection, generic[:2])
    single = flat(1, 1, (1,))
    shifted = synchronous_extension(single, 0).shift(1)
    assert section_membership(shifted, single)
    assert frame_rank_test([shifted], single, generic[:3])
    assert not frame_rank_test([shifted], single, generic[:3], zero[:1])


def test_frame_rank_with_curved_connection():
    rng = make_rng(18)
    bundle = random_bundle(rng, 1, 2, 3)
    connection = random_connection(rng, bundle)
    generic, zero = sample_points(rng, bundle.model, 5)
    assert frame_rank_test(standard_frame(connection), connection, generic, zero)


def test_witten_membership_examples():
    model = LocalModel(1, 1)
    chart = model.chart
    _, y1 = chart.x
    for s in form_generators(model):
        assert witten_membership(model, y1**2, s)
    report = witten_membership(model, y1, {0: EqForm.scalar(chart, 1)})
    assert not report
    assert "t^-1" in report.witness
    novikov = EqForm.from_terms(chart, {(1,): 2 * y1})
    assert d(novikov).is_zero()
    assert witten_membership(model, novikov, {0: EqForm.dx(chart, 0)})


def test_witten_membership_morse_bott_saddle():
    model = LocalModel(1, 2)
    chart = model.chart
    x1, y1, y2 = chart.x
    f = y1**2 - y2**2 + x1 * y1 * y2
    s = {0: EqForm.dx(chart, 0, 1), 1: EqForm.from_terms(chart, {(2,): y2})}
    assert witten_membership(model, f, s)


def test_witten_membership_rejects_bad_input():
    model = LocalModel(1, 1)
    chart = model.chart
    x1, y1 = chart.x
    with pytest.raises(ValueError):
        witten_membership(model, EqForm.from_terms(chart, {(1,): x1}), {0: EqForm.scalar(chart, 1)})
    with pytest.raises(ValueError):
        witten_membership(model, y1**2, {1: EqForm.scalar(chart, 1)})
