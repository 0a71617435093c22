###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Deformation to the normal cone of R^l x {0} in R^{l+k}: Laurent functions and their characters
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from math import factorial

from sympy import QQ
from sympy.polys.domains import QQ_I

from .eqforms import VectorField
from .polynomials import ChartRing

logger = logging.getLogger()


@dataclass(frozen=True)
class LocalModel:
    r"""Linear model :math:`M = \mathbb{R}^l \times \{0\} \subset V = \mathbb{R}^{l+k}`.

    Coordinates are ``x1..xl`` along ``M`` and ``y1..yk`` normal to it unless
    ``base_names`` and ``normal_names`` say otherwise. Optional Lie parameters and
    auxiliary variables ride along untouched.
    """

    l: int
    k: int
    params: tuple = ()
    J: int = 0
    aux: tuple = field(default=())
    base_names: tuple = ()
    normal_names: tuple = ()

    def __post_init__(self):
        if self.base_names and len(self.base_names) != self.l:
            raise ValueError(f"{len(self.base_names)} base names for l = {self.l}")
        if self.normal_names and len(self.normal_names) != self.k:
            raise ValueError(f"{len(self.normal_names)} normal names for k = {self.k}")

    @classmethod
    def of_chart(cls, chart):
        """The model whose chart is ``chart``, read off the default ``x``/``y`` names.

        Raises:
            ValueError: if the coordinates are not ``x1..xl`` followed by ``y1..yk``.
        """
        l = sum(1 for name in chart.coords if name.startswith("x"))
        model = cls(l, chart.n - l, chart.params, chart.J, chart.aux)
        if model.x_names + model.y_names != chart.coords:
            raise ValueError(f"cannot read a local model off coordinates {chart.coords}; "
                             "pass the LocalModel explicitly")
        return model

    @cached_property
    def chart(self):
        return ChartRing(self.x_names + self.y_names, self.params, self.J, self.aux)

    @property
    def x_names(self):
        return self.base_names or tuple(f"x{i + 1}" for i in range(self.l))

    @property
    def y_names(self):
        return self.normal_names or tuple(f"y{j + 1}" for j in range(self.k))

    def y_degree(self, p):
        """Smallest total y-degree among the monomials of ``p`` (``inf`` for zero)."""
        if not p:
            return float("inf")
        return min(sum(m[self.l:self.l + self.k]) for m in p.itermonoms())

    def vanishes_to_order(self, p, order):
        return self.y_degree(p) >= order

    def euler_field(self):
        """The linear Euler field :math:`\\sum_j y_j \\partial_{y_j}`."""
        chart = self.chart
        ys = chart.x[self.l:]
        return VectorField(chart, tuple([chart.zero()] * self.l) + tuple(ys))

    def normal_field(self, Xm):
        """Constant vector field :math:`\\sum_j X_m^j \\partial_{y_j}`."""
        chart = self.chart
        if len(Xm) != self.k:
            raise ValueError(f"normal vector of length {len(Xm)}, expected {self.k}")
        return VectorField(chart, tuple([chart.zero()] * self.l) + tuple(chart.ring(v) for v in Xm))


@dataclass(frozen=True)
class NormalVector:
    r"""Point :math:`X_m` of the normal bundle: base ``m`` in :math:`\mathbb{R}^l` and
    normal part ``Xm`` in :math:`\mathbb{R}^k`.

    Entries are rationals or polynomials of the model chart.
    """

    m: tuple
    Xm: tuple

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(self.m))
        object.__setattr__(self, "Xm", tuple(self.Xm))

    def check(self, model):
        if len(self.m) != model.l:
            raise ValueError(f"base point of length {len(self.m)}, expected {model.l}")
        if len(self.Xm) != model.k:
            raise ValueError(f"normal vector of length {len(self.Xm)}, expected {model.k}")
        return self


def _normal_vector(model, point, Xm):
    if isinstance(point, NormalVector):
        if Xm is not None:
            raise TypeError("pass either a NormalVector or a base point with Xm")
        return point.check(model)
    if Xm is None:
        raise TypeError("normal part Xm missing")
    return NormalVector(point, Xm).check(model)


@dataclass(frozen=True, eq=False)
class LaurentFn:
    r"""Laurent polynomial :math:`\sum_p f_p t^{-p}` with polynomial coefficients."""

    model: LocalModel
    terms: dict

    def __post_init__(self):
        chart = self.model.chart
        clean = {p: chart.truncate(chart.ring(f)) for p, f in self.terms.items()}
        object.__setattr__(self, "terms", {p: f for p, f in clean.items() if f})

    @classmethod
    def constant(cls, model, c):
        return cls(model, {0: c})

    def _same(self, other):
        if other.model != self.model:
            raise ValueError("Laurent functions on different models")

    def __add__(self, other):
        self._same(other)
        terms = dict(self.terms)
        for p, f in other.terms.items():
            terms[p] = terms.get(p, self.model.chart.zero()) + f
        return LaurentFn(self.model, terms)

    def __neg__(self):
        return LaurentFn(self.model, {p: -f for p, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentFn):
            return LaurentFn(self.model, {p: f * other for p, f in self.terms.items()})
        self._same(other)
        terms = {}
        for p, f in self.terms.items():
            for q, g in other.terms.items():
                terms[p + q] = terms.get(p + q, self.model.chart.zero()) + f * g
        return LaurentFn(self.model, terms)

    def __eq__(self, other):
        if not isinstance(other, LaurentFn):
            return NotImplemented
        return self.model == other.model and not (self - other).terms

    __hash__ = None

    def is_zero(self):
        return not self.terms


def membership(f):
    r"""True iff every :math:`f_p` with :math:`p > 0` vanishes to order ``p`` along ``M``."""
    return all(f.model.vanishes_to_order(fp, p) for p, fp in f.terms.items() if p > 0)


def _require_member(f):
    if not membership(f):
        bad = sorted(p for p, fp in f.terms.items()
                     if p > 0 and not f.model.vanishes_to_order(fp, p))
        raise ValueError(f"not in the deformation algebra: t^-{bad[0]} coefficient "
                         f"does not vanish to order {bad[0]}")


def _point_values(model, point):
    names = model.x_names + model.y_names
    if len(point) != len(names):
        raise ValueError(f"point of length {len(point)}, expected {len(names)}")
    return dict(zip(names, point))


def eval_generic(f, point, lam):
    r"""Character :math:`\sum_p f_p(v)\lambda^{-p}` at a point of :math:`V \times \mathbb{R}^\times`.

    Args:
        f (LaurentFn): element of the deformation algebra.
        point (sequence): values ``(x1..xl, y1..yk)``.
        lam: nonzero rational.

    Returns:
        Value in the chart ring (a ``QQ_I`` constant unless parameters ride along).

    Raises:
        ValueError: if ``lam`` is zero or ``f`` is not a member.
    """
    lam = lam if isinstance(lam, QQ_I.dtype) else QQ_I(lam)
    if not lam:
        raise ValueError("lambda = 0 is the zero fiber: use eval_zero")
    _require_member(f)
    chart = f.model.chart
    values = _point_values(f.model, point)
    out = chart.zero()
    for p, fp in f.terms.items():
        out += chart.evaluate(fp, values) * lam**(-p)
    return _as_constant(chart, out)


def _as_constant(chart, p):
    return p.LC if p.is_ground else p


def exp_flow(f, Xm):
    r"""Apply :math:`\exp(tX)` with :math:`X = \sum_j X_m^j \partial_{y_j}`.

    The term :math:`X^j f_p / j!` lands on :math:`t^{-(p-j)}`. The sum is finite since
    ``X`` lowers the polynomial degree.
    """
    model = f.model
    field_ = model.normal_field(Xm)
    terms = {}
    for p, fp in f.terms.items():
        g, j = fp, 0
        while g:
            key = p - j
            terms[key] = terms.get(key, model.chart.zero()) + g * QQ_I(QQ(1, factorial(j)))
            g = field_.apply(g)
            j += 1
    return LaurentFn(model, terms)


def eval_base(f, m):
    r"""Character :math:`\varepsilon_m`: the :math:`t^0` coefficient at :math:`(m, 0)`."""
    _require_member(f)
    model = f.model
    if len(m) != model.l:
        raise ValueError(f"base point of length {len(m)}, expected {model.l}")
    values = dict(zip(model.x_names, m))
    values.update({name: 0 for name in model.y_names})
    f0 = f.terms.get(0, model.chart.zero())
    return _as_constant(model.chart, model.chart.evaluate(f0, values))


def eval_zero(f, point, Xm=None):
    r"""Zero-fiber character :math:`\varepsilon_{X_m} = \varepsilon_m \circ \exp(tX)`.

    Args:
        f (LaurentFn): element of the deformation algebra.
        point: a :class:`NormalVector`, or its base ``m`` with the normal part ``Xm``
            passed separately. Entries may be rationals or polynomials of the model
            chart (symbolic normal vectors).
    """
    _require_member(f)
    v = _normal_vector(f.model, point, Xm)
    return eval_base(exp_flow(f, v.Xm), v.m)


def eval_zero_homogeneous(f, point, Xm=None):
    """Same character from the degree-``p`` homogeneous y-part of each ``f_p``."""
    _require_member(f)
    model = f.model
    chart = model.chart
    v = _normal_vector(model, point, Xm)
    values = dict(zip(model.x_names, v.m))
    values.update(dict(zip(model.y_names, v.Xm)))
    out = chart.zero()
    for p, fp in f.terms.items():
        if p < 0:
            continue
        part = chart.homogeneous_parts(fp, model.y_names).get(p)
        if part is not None:
            out += chart.evaluate(part, values)
    return _as_constant(chart, out)


def generic_curve(f, point, Xm=None):
    r"""The character along :math:`\lambda \mapsto ((m, \lambda X_m), \lambda)`, as a
    polynomial in ``lam`` (an auxiliary variable of the returned chart)."""
    _require_member(f)
    model = f.model
    v = _normal_vector(model, point, Xm)
    curve = replace(model, aux=model.aux + ("lam",))
    chart = curve.chart
    lam = chart.gen("lam")
    subs = {x: chart.ring(c) for x, c in zip(model.x_names, v.m)}
    subs.update({y: lam * chart.ring(c) for y, c in zip(model.y_names, v.Xm)})
    out = chart.zero()
    for p, fp in f.terms.items():
        g = chart.compose(chart.convert(fp, model.chart), subs)
        if p > 0:
            # membership: every monomial carries lam**p at least
            g = g.exquo(lam**p)
        elif p < 0:
            g = g * lam**(-p)
        out += g
    return chart, out


def euler_like_check(R, f, p, model=None):
    r"""True iff :math:`Rf - pf` vanishes to order ``p + 1`` along ``M``.

    ``model`` names the base and normal coordinates of ``R.chart``; without it the chart
    must use the default ``x1..xl, y1..yk`` layout.

    Raises:
        ValueError: if ``f`` does not vanish to order ``p`` or the model does not fit.
    """
    model = _model_of(R, model)
    if not model.vanishes_to_order(f, p):
        raise ValueError(f"{f} does not vanish to order {p}")
    return model.vanishes_to_order(R.apply(f) - f * p, p + 1)


def is_euler_like(R, model=None):
    """Euler-like on coordinates: ``R x_i`` in ``I_1`` and ``R y_j - y_j`` in ``I_2``."""
    model = _model_of(R, model)
    chart = R.chart
    for name in model.x_names:
        if not model.vanishes_to_order(R.apply(chart.gen(name)), 1):
            return False
    for name in model.y_names:
        y = chart.gen(name)
        if not model.vanishes_to_order(R.apply(y) - y, 2):
            return False
    return True


def _model_of(R, model):
    if model is None:
        return LocalModel.of_chart(R.chart)
    if model.chart != R.chart:
        raise ValueError(f"vector field lives on {R.chart.coords}, "
                         f"model chart is {model.chart.coords}")
    return model
