import pytest
from sympy import QQ
from sympy.polys.domains import QQ_I

from getzlercalc.dnc import (LaurentFn, LocalModel, NormalVector, eval_base, eval_generic,
                             eval_zero, eval_zero_homogeneous, euler_like_check, exp_flow,
                             generic_curve, is_euler_like, membership)
from getzlercalc.eqforms import VectorField
from getzlercalc.utils import make_rng, monomials, random_member, random_rational


def gens(model):
    chart = model.chart
    return chart, chart.x[:model.l], chart.x[model.l:]


def test_membership_examples():
    model = LocalModel(1, 2)
    _, (x1,), (y1, y2) = gens(model)
    assert membership(LaurentFn(model, {1: y1}))
    assert not membership(LaurentFn(model, {1: x1}))
    assert membership(LaurentFn(model, {2: y1 * y2 + y1**3}))
    assert membership(LaurentFn(model, {-3: x1, 0: x1 + 1}))


def test_eval_generic_examples():
    model = LocalModel(1, 1)
    _, _, (y1,) = gens(model)
    assert eval_generic(LaurentFn(model, {1: y1}), (0, 3), 2) == QQ_I(QQ(3, 2))
    assert eval_generic(LaurentFn.constant(model, 5), (1, 1), 7) == QQ_I(5)


def test_eval_generic_rejects_zero_fiber_and_non_members():
    model = LocalModel(1, 1)
    _, (x1,), (y1,) = gens(model)
    with pytest.raises(ValueError):
        eval_generic(LaurentFn(model, {1: y1}), (0, 1), 0)
    with pytest.raises(ValueError):
        eval_generic(LaurentFn(model, {1: x1}), (0, 1), 1)


def test_eval_zero_examples():
    model = LocalModel(1, 2)
    _, (x1,), (y1, y2) = gens(model)
    a, b = QQ(2, 3), QQ(-5)
    assert eval_zero(LaurentFn(model, {1: y1}), (0,), (a, b)) == QQ_I(a)
    f0 = x1**2 + 3 * x1 + y2
    assert eval_zero(LaurentFn(model, {0: f0}), (QQ(1, 2),), (a, b)) == QQ_I(QQ(7, 4))
    assert eval_zero(LaurentFn(model, {2: y1**2}), (0,), (a, b)) == QQ_I(a * a)


def test_normal_vector_argument():
    model = LocalModel(1, 2)
    _, (x1,), (y1, y2) = gens(model)
    f = LaurentFn(model, {1: x1 * y1 + y2, 0: x1})
    v = NormalVector((QQ(1, 2),), (3, QQ(-1, 4)))
    assert eval_zero(f, v) == eval_zero(f, v.m, v.Xm) == QQ_I(QQ(7, 4))
    assert eval_zero_homogeneous(f, v) == eval_zero(f, v)
    _, curve = generic_curve(f, v)
    assert curve == generic_curve(f, v.m, v.Xm)[1]
    with pytest.raises(ValueError):
        eval_zero(f, NormalVector((0,), (1,)))
    with pytest.raises(TypeError):
        eval_zero(f, v, v.Xm)
    with pytest.raises(TypeError):
        eval_zero(f, (0,))


def test_eval_zero_with_symbolic_normal_vector():
    model = LocalModel(1, 2, aux=("a1", "a2"))
    chart, (x1,), (y1, y2) = gens(model)
    a1, a2 = chart.gen("a1"), chart.gen("a2")
    f = LaurentFn(model, {2: x1 * y1 * y2 + y1**3, 1: y2})
    assert eval_zero(f, (3,), (a1, a2)) == 3 * a1 * a2 + a2


def test_exp_flow_keys():
    model = LocalModel(0, 1)
    _, _, (y1,) = gens(model)
    flowed = exp_flow(LaurentFn(model, {2: y1**2}), (QQ(3),))
    assert flowed == LaurentFn(model, {2: y1**2, 1: 6 * y1, 0: 9})
    assert eval_base(flowed, ()) == QQ_I(9)


@pytest.mark.parametrize("l,k", [(1, 1), (1, 2), (2, 2)])
def test_zero_fiber_character_on_basis_monomials(l, k):
    model = LocalModel(l, k)
    chart, _, _ = gens(model)
    rng = make_rng(10 * l + k)
    m = tuple(random_rational(rng) for _ in range(l))
    Xm = tuple(random_rational(rng) for _ in range(k))
    for alpha in monomials(k, 5):
        y_mono = chart.monomial(dict(zip(model.y_names, alpha)))
        for beta in monomials(l, 1):
            mono = y_mono * chart.monomial(dict(zip(model.x_names, beta)))
            for p in range(0, sum(alpha) + 1):
                f = LaurentFn(model, {p: mono})
                z = eval_zero(f, m, Xm)
                assert z == eval_zero_homogeneous(f, m, Xm)
                curve_chart, curve = generic_curve(f, m, Xm)
                assert curve_chart.evaluate(curve, {"lam": 0}).LC == z


def test_characters_are_homomorphisms():
    model = LocalModel(1, 2)
    rng = make_rng(7)
    for _ in range(100):
        f, g = random_member(rng, model), random_member(rng, model)
        assert membership(f) and membership(g)
        point = tuple(random_rational(rng) for _ in range(3))
        lam = random_rational(rng, allow_zero=False)
        assert eval_generic(f * g, point, lam) == eval_generic(f, point, lam) * eval_generic(g, point, lam)
        m, Xm = point[:1], point[1:]
        assert eval_zero(f * g, m, Xm) == eval_zero(f, m, Xm) * eval_zero(g, m, Xm)


def test_generic_curve_is_continuous_at_zero():
    model = LocalModel(1, 2)
    _, (x1,), (y1, y2) = gens(model)
    f = LaurentFn(model, {1: y1 + y1 * y2, 0: x1, -1: 1})
    m, Xm = (QQ(1, 2),), (QQ(1), QQ(-2))
    chart, curve = generic_curve(f, m, Xm)
    limit = eval_zero(f, m, Xm)
    assert limit == QQ_I(QQ(3, 2))
    errors = []
    for j in range(1, 12):
        lam = QQ(1, 2**j)
        value = eval_generic(f, m + tuple(lam * v for v in Xm), lam)
        assert chart.evaluate(curve, {"lam": lam}).LC == value
        errors.append(abs(float(value.x - limit.x)))
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-3


def test_generic_curve_matches_generic_character():
    model = LocalModel(1, 2)
    rng = make_rng(8)
    for _ in range(10):
        f = random_member(rng, model)
        m = (random_rational(rng),)
        Xm = (random_rational(rng), random_rational(rng))
        chart, curve = generic_curve(f, m, Xm)
        lam = random_rational(rng, allow_zero=False)
        value = eval_generic(f, m + tuple(lam * v for v in Xm), lam)
        assert chart.evaluate(curve, {"lam": lam}).LC == value


def test_euler_like_check_examples():
    model = LocalModel(0, 2)
    chart, _, (y1, y2) = gens(model)
    zero = chart.zero()
    euler = model.euler_field()
    assert euler_like_check(euler, y1 * y2, 2)
    bent = VectorField(chart, (y1 + y1**2, y2))
    assert euler_like_check(bent, y1, 1)
    assert not euler_like_check(VectorField(chart, (chart.one(), zero)), y1, 1)
    with pytest.raises(ValueError):
        euler_like_check(euler, y1, 2)


def test_is_euler_like():
    model = LocalModel(1, 1)
    chart, (x1,), (y1,) = gens(model)
    assert is_euler_like(model.euler_field())
    assert is_euler_like(VectorField(chart, (x1 * y1, y1 + x1 * y1**2)))
    assert not is_euler_like(VectorField(chart, (chart.one(), y1)))
    assert not is_euler_like(VectorField(chart, (chart.zero(), 2 * y1)))


def test_euler_like_on_renamed_coordinates():
    model = LocalModel(1, 1, base_names=("y",), normal_names=("x",))
    chart = model.chart
    assert chart.coords == ("y", "x")
    y, x = chart.x
    euler = model.euler_field()
    assert is_euler_like(euler, model)
    assert euler_like_check(euler, x**2, 2, model)
    assert not is_euler_like(VectorField(chart, (y, x)), model)
    # the default x/y reading would swap base and normal directions here
    with pytest.raises(ValueError):
        is_euler_like(euler)
    with pytest.raises(ValueError):
        is_euler_like(LocalModel(1, 1).euler_field(), model)
    with pytest.raises(ValueError):
        LocalModel(1, 2, normal_names=("v",))
