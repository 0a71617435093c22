###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Cartan model on polynomial charts
"""
import logging
from dataclasses import dataclass

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .gradealg import EXTERIOR, Multivector, contract, quantize, spin_lift
from .polynomials import ChartRing, mat_trace
from .series import ahat_coefficients, log_ahat_coefficients

logger = logging.getLogger()


@dataclass(frozen=True, eq=False)
class EqForm:
    r"""Equivariant differential form :math:`\alpha(X) \in \mathbb{C}[\mathfrak g]_{(J)} \otimes \Omega(U)`.

    The exterior part is a :class:`Multivector` on ``dx^1, ..., dx^n`` whose
    coefficients are polynomials of ``chart`` (coordinates, Lie parameters,
    auxiliary variables) or dense ``DomainMatrix`` instances over that ring.
    Coefficients are re-truncated to Lie-parameter degree ``J`` on construction.
    """

    chart: ChartRing
    form: Multivector

    def __post_init__(self):
        if self.form.dim != self.chart.n:
            raise ValueError(
                f"form of dim {self.form.dim} on a chart of dim {self.chart.n}")
        if self.form.algebra != EXTERIOR:
            raise ValueError("EqForm needs an exterior multivector")
        truncate = self.chart.truncate
        terms = {b: self.chart.apply(self._lift(c), truncate)
                 for b, c in self.form.terms.items()}
        object.__setattr__(self, "form", Multivector(self.chart.n, terms, EXTERIOR))

    def _lift(self, c):
        if isinstance(c, DomainMatrix):
            return c
        return self.chart.ring(c)

    # construction

    @classmethod
    def from_terms(cls, chart, terms):
        """``terms``: blade (0-based tuple) -> coefficient."""
        return cls(chart, Multivector(chart.n, terms, EXTERIOR))

    @classmethod
    def zero(cls, chart):
        return cls.from_terms(chart, {})

    @classmethod
    def scalar(cls, chart, c):
        return cls.from_terms(chart, {(): c})

    @classmethod
    def dx(cls, chart, *idx):
        return cls.from_terms(chart, {tuple(idx): 1})

    @classmethod
    def from_matrix(cls, chart, rows):
        """Matrix-valued form from a nested list of scalar forms."""
        r, c = len(rows), len(rows[0])
        blades = {}
        for a in range(r):
            for b in range(c):
                for blade, coeff in rows[a][b].form.terms.items():
                    blades.setdefault(blade, [[0] * c for _ in range(r)])
                    blades[blade][a][b] = coeff
        return cls.from_terms(chart, {bl: chart.matrix(m) for bl, m in blades.items()})

    def with_chart(self, chart):
        """Move to another chart sharing the variable names in use."""
        return EqForm.from_terms(chart, {
            b: chart.apply(c, lambda e: chart.convert(e, self.chart))
            for b, c in self.form.terms.items()})

    # algebra

    @property
    def terms(self):
        return self.form.terms

    def _same(self, other):
        if not isinstance(other, EqForm):
            raise TypeError(f"expected an EqForm, got {type(other)}")
        if other.chart != self.chart:
            raise ValueError("chart mismatch")

    def __add__(self, other):
        self._same(other)
        return EqForm(self.chart, self.form + other.form)

    def __sub__(self, other):
        self._same(other)
        return EqForm(self.chart, self.form - other.form)

    def __neg__(self):
        return EqForm(self.chart, -self.form)

    def wedge(self, other):
        self._same(other)
        return EqForm(self.chart, self.form.product(other.form))

    def __mul__(self, other):
        if isinstance(other, EqForm):
            return self.wedge(other)
        return EqForm(self.chart, self.form.rscale(self._lift_scalar(other)))

    def __rmul__(self, other):
        return EqForm(self.chart, self.form.scale(self._lift_scalar(other)))

    def _lift_scalar(self, c):
        if isinstance(c, DomainMatrix):
            return c
        if isinstance(c, int):
            return QQ_I(c)
        return c

    def __pow__(self, k):
        out = EqForm.scalar(self.chart, 1)
        if self.is_matrix():
            out = EqForm.scalar(self.chart, self.chart.mat_eye(self.rank))
        for _ in range(k):
            out = out.wedge(self)
        return out

    def __eq__(self, other):
        if not isinstance(other, EqForm):
            return NotImplemented
        return self.chart == other.chart and (self - other).is_zero()

    __hash__ = None

    def is_zero(self):
        return self.form.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_matrix(self):
        return any(isinstance(c, DomainMatrix) for c in self.terms.values())

    @property
    def rank(self):
        for c in self.terms.values():
            if isinstance(c, DomainMatrix):
                return c.shape[0]
        return 1

    def map_coeffs(self, fn):
        """Apply ``fn`` entrywise to every polynomial coefficient."""
        return EqForm.from_terms(self.chart, {b: self.chart.apply(c, fn)
                                              for b, c in self.terms.items()})

    def grade(self, k):
        return EqForm(self.chart, self.form.grade(k))

    def top(self):
        return self.form.top()

    def coefficient(self, blade):
        c = self.form.coefficient(tuple(blade))
        return self.chart.zero() if c is None else c

    def entry(self, a, b):
        return EqForm.from_terms(self.chart, {
            bl: c.to_list()[a][b] for bl, c in self.terms.items()})

    def trace(self, grading=None):
        """Matrix trace (supertrace with ``grading``) of a matrix-valued form."""
        terms = {}
        for bl, c in self.terms.items():
            if not isinstance(c, DomainMatrix):
                terms[bl] = c
                continue
            if grading is None:
                terms[bl] = mat_trace(c)
            else:
                rows = c.to_list()
                terms[bl] = sum((g * rows[k][k] for k, g in enumerate(grading)),
                                self.chart.zero())
        return EqForm.from_terms(self.chart, terms)

    def evaluate(self, values):
        """Substitute ``{variable: value}`` in every coefficient."""
        return self.map_coeffs(lambda p: self.chart.evaluate(p, values))

    # gradings

    def equivariant_degrees(self):
        r"""Set of :math:`\deg_\Lambda + 2\deg_X` over all stored monomials."""
        out = set()
        lo, hi = self.chart.n, self.chart.n + self.chart.d
        for bl, c in self.terms.items():
            entries = c.to_list_flat() if isinstance(c, DomainMatrix) else [c]
            for p in entries:
                for m in p.itermonoms():
                    out.add(len(bl) + 2 * sum(m[lo:hi]))
        return out

    def equivariant_part(self, k):
        """Component of equivariant degree ``k``."""
        lo, hi = self.chart.n, self.chart.n + self.chart.d
        ring = self.chart.ring

        def keep(bl):
            def fn(p):
                kept = {m: v for m, v in p.items() if len(bl) + 2 * sum(m[lo:hi]) == k}
                return ring.from_dict(kept) if kept else ring.zero
            return fn

        return EqForm.from_terms(self.chart, {b: self.chart.apply(c, keep(b))
                                              for b, c in self.terms.items()})

    def is_even(self):
        return all(deg % 2 == 0 for deg in self.equivariant_degrees())

    def __repr__(self):
        return f"EqForm({self.form!r})"


@dataclass(frozen=True, eq=False)
class VectorField:
    r"""Polynomial vector field :math:`\sum_i v^i \partial_i` on a chart.

    With ``is_action`` the components must be linear in the Lie parameters, as for
    the infinitesimal action :math:`X^M`.
    """

    chart: ChartRing
    components: tuple
    is_action: bool = False

    def __post_init__(self):
        if len(self.components) != self.chart.n:
            raise ValueError(
                f"{len(self.components)} components on a chart of dim {self.chart.n}")
        comps = tuple(self.chart.ring(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if self.is_action:
            lo, hi = self.chart.n, self.chart.n + self.chart.d
            for c in comps:
                if any(sum(m[lo:hi]) != 1 for m in c.itermonoms()):
                    raise ValueError(
                        "action field must be linear in the Lie parameters")

    @classmethod
    def coordinate(cls, chart, i):
        return cls(chart, tuple(1 if j == i else 0 for j in range(chart.n)))

    def apply(self, p):
        """Derivative of a polynomial along the field."""
        out = self.chart.zero()
        for i, v in enumerate(self.components):
            if v:
                out += v * self.chart.diff(p, self.chart.coords[i])
        return self.chart.truncate(out)


def _check_chart(alpha, v):
    if v.chart != alpha.chart:
        raise ValueError("vector field and form live on different charts")


def d(alpha):
    r"""Exterior derivative :math:`\sum_j \partial_j c_I\, dx^j \wedge dx^I`."""
    chart = alpha.chart
    out = EqForm.zero(chart)
    for j, name in enumerate(chart.coords):
        dj = EqForm.from_terms(chart, {
            b: chart.apply(c, lambda p, name=name: chart.diff(p, name))
            for b, c in alpha.terms.items()})
        if dj:
            out = out + EqForm.dx(chart, j).wedge(dj)
    return out


def iota(v, alpha):
    r"""Interior product :math:`\iota(v)\alpha`."""
    _check_chart(alpha, v)
    return EqForm(alpha.chart, contract(list(v.components), alpha.form))


def lie(v, alpha):
    """Lie derivative via the Cartan identity."""
    return d(iota(v, alpha)) + iota(v, d(alpha))


def d_g(alpha, action):
    r"""Equivariant differential :math:`(d_{\mathfrak g}\alpha)(X) = d\alpha(X) - \iota(X^M)\alpha(X)`.

    Raises:
        ValueError: if ``action`` is not flagged linear in the Lie parameters.
    """
    if not action.is_action:
        raise ValueError("d_g needs an action field linear in X")
    return d(alpha) - iota(action, alpha)


def theta(action):
    r"""Dual one-form :math:`\theta_X = \sum_i (X^M)^i dx^i` for the flat metric."""
    chart = action.chart
    return EqForm.from_terms(chart, {(i,): c for i, c in enumerate(action.components)})


def tangent_moment(action):
    r""":math:`\mu^M(X)_{ij} = -\partial_j (X^M)^i` on a flat chart, as nested lists."""
    chart = action.chart
    return [[-chart.diff(action.components[i], chart.coords[j])
             for j in range(chart.n)] for i in range(chart.n)]


def moment(connection, action, fiber_action):
    r"""Moment :math:`\mu^{\mathcal E}(X) = \mathcal L^{\mathcal E}(X) - \nabla_{X^M}`.

    Args:
        connection (EqForm): matrix-valued connection one-form ``A``.
        action (VectorField): the infinitesimal action, linear in ``X``.
        fiber_action: ``r x r`` matrix (nested list or ``DomainMatrix``) linear in ``X``.

    Returns:
        Matrix-valued zero-form ``L - iota(X^M) A``.
    """
    chart = action.chart
    if not action.is_action:
        raise ValueError("moment needs an action field linear in X")
    L = fiber_action if isinstance(fiber_action, DomainMatrix) else chart.matrix(fiber_action)
    if connection.is_zero():
        return EqForm.scalar(chart, L)
    if connection.rank != L.shape[0]:
        raise ValueError(
            f"connection of rank {connection.rank} with a fiber action of size {L.shape[0]}")
    if any(len(b) != 1 for b in connection.terms):
        raise ValueError("connection must be a one-form")
    return EqForm.scalar(chart, L) - iota(action, connection)


def curvature(connection):
    r""":math:`F = dA + A \wedge A` of a matrix-valued connection one-form."""
    return d(connection) + connection.wedge(connection)


def equivariant_curvature(connection, action, fiber_action):
    r""":math:`F_{\mathfrak g} = F + \mu(X)`."""
    return curvature(connection) + moment(connection, action, fiber_action)


def kosmann_check(action):
    r"""Spin moment against :math:`-\frac14 c(d\theta_X)` on a flat chart.

    On a flat chart the spinor connection is trivial, so the spinor moment is the
    spin lift of :math:`\mu^M(X)`. Returns the Clifford residual, zero when the
    identity holds.
    """
    chart = action.chart
    mu = tangent_moment(action)
    tau = spin_lift(mu)
    dtheta = d(theta(action))
    rhs = quantize(dtheta.form).scale(QQ_I(QQ(-1, 4)))
    residual = tau - rhs
    return residual.map_coeffs(chart.truncate)


def _check_nilpotent_entries(R, what):
    lo, hi = R.chart.n, R.chart.n + R.chart.d
    c = R.terms.get(())
    if c is None:
        return
    entries = c.to_list_flat() if isinstance(c, DomainMatrix) else [c]
    for p in entries:
        for m in p.itermonoms():
            if sum(m[lo:hi]) == 0:
                raise ValueError(
                    f"{what}: degree-zero entries must vanish at X = 0 to be nilpotent")


def _nilpotency_cap(chart):
    return chart.n + 2 * chart.J + 1


def nilpotent_exp(s):
    """``exp(s)`` of a scalar or matrix form of positive equivariant degree."""
    chart = s.chart
    cap = _nilpotency_cap(chart)
    one = EqForm.scalar(chart, chart.mat_eye(s.rank)) if s.is_matrix() else EqForm.scalar(chart, 1)
    out, term = one, one
    for k in range(1, cap + 2):
        term = term.wedge(s) * QQ_I(QQ(1, k))
        if term.is_zero():
            return out
        out = out + term
    raise ValueError("exponential series did not terminate: argument is not nilpotent")


def ahat(R_g):
    r"""Equivariant :math:`\hat A`-form :math:`\det^{1/2}\big(\frac{R_{\mathfrak g}/2}{\sinh(R_{\mathfrak g}/2)}\big)`.

    Computed as :math:`\exp(\frac12 \mathrm{tr}\log f(R_{\mathfrak g}))` with
    :math:`f(z) = (z/2)/\sinh(z/2)`; every series is exact because the entries are
    nilpotent.

    Args:
        R_g (EqForm): ``n x n`` matrix-valued form, antisymmetric.

    Returns:
        Scalar :class:`EqForm` with constant term 1.

    Raises:
        ValueError: if ``R_g`` is not antisymmetric or not nilpotent.
    """
    chart = R_g.chart
    if R_g.is_zero():
        return EqForm.scalar(chart, 1)
    if not R_g.is_matrix():
        raise ValueError("ahat expects a matrix-valued form")
    for bl, c in R_g.terms.items():
        if c.transpose() != -c:
            raise ValueError("ahat expects an antisymmetric matrix of forms")
    _check_nilpotent_entries(R_g, "ahat")
    cap = _nilpotency_cap(chart)
    if R_g.rank == 2:
        # R_g^2 = -w^2 for R_g = [[0, w], [-w, 0]], so the root of the determinant is f(iw)
        f = ahat_coefficients(cap + 2)
        return series_in(R_g.entry(0, 1), [c * (-1)**(k // 2) for k, c in enumerate(f)])
    g = log_ahat_coefficients(cap + 1)
    s = EqForm.zero(chart)
    power = R_g
    for k in range(1, cap + 1):
        if power.is_zero():
            break
        if g[k]:
            s = s + power.trace() * QQ_I(g[k] / 2)
        power = power.wedge(R_g)
    else:
        if not power.is_zero():
            raise ValueError("matrix powers did not vanish: entries are not nilpotent")
    return nilpotent_exp(s)


def ch_rel(F_g, grading=None):
    r"""Relative Chern character :math:`\mathrm{Str}(\exp(-F_{\mathfrak g}))`.

    ``F_g`` is a scalar or matrix-valued form of positive equivariant degree; a
    ``grading`` list of ``+1/-1`` turns the trace into a supertrace.
    """
    _check_nilpotent_entries(F_g, "ch_rel")
    e = nilpotent_exp(-F_g)
    if F_g.is_matrix():
        return e.trace(grading)
    return e


def series_in(s, coefficients):
    """``sum_k coefficients[k] * s^k`` for a nilpotent scalar form ``s``."""
    chart = s.chart
    out = EqForm.zero(chart)
    power = EqForm.scalar(chart, 1)
    for c in coefficients:
        if power.is_zero():
            break
        if c:
            out = out + power * QQ_I(c)
        power = power.wedge(s)
    return out


# Closedness models on R^2 with the rotation action X (x1 d/dx2 - x2 d/dx1)


def rotation_chart(J=2):
    return ChartRing.standard(2, 1, J)


def rotation_action(chart):
    x1, x2 = chart.x
    X = chart.X[0]
    return VectorField(chart, (-X * x2, X * x1), is_action=True)


def line_bundle_model(chart, a=1, c=0):
    r"""Line bundle with :math:`A = a(x_1dx_2 - x_2dx_1)` and fiber action :math:`cX`.

    Returns ``(connection, fiber_action, F_g)`` with
    :math:`F_{\mathfrak g} = 2a\,dx_{12} + cX - aX|x|^2`.
    """
    x1, x2 = chart.x
    X = chart.X[0]
    A = EqForm.from_terms(chart, {(1,): chart.matrix([[x1 * a]]),
                                  (0,): chart.matrix([[-x2 * a]])})
    L = [[X * c]]
    return A, L, equivariant_curvature(A, rotation_action(chart), L)


def tangent_model(chart, a=1):
    r"""Rank-2 model :math:`A = a(x_1dx_2 - x_2dx_1)J_2` with fiber action :math:`XJ_2`.

    Here :math:`J_2 = [[0, 1], [-1, 0]]`, and
    :math:`R_{\mathfrak g} = (2a\,dx_{12} + X - aX|x|^2) J_2`.
    """
    x1, x2 = chart.x
    X = chart.X[0]
    J2 = chart.matrix([[0, 1], [-1, 0]])
    A = EqForm.from_terms(chart, {(1,): J2.rmul(x1 * a), (0,): J2.rmul(-x2 * a)})
    L = J2.rmul(X)
    return A, L, equivariant_curvature(A, rotation_action(chart), L)
