###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Getzler symbols on the zero fiber and the flat-chart Dirac algebra
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .eqforms import (EqForm, VectorField, curvature, d, iota, line_bundle_model, moment,
                      rotation_action, tangent_model, tangent_moment, theta)
from .gradealg import CLIFFORD, Multivector, blades, quantize, spin_lift
from .polynomials import ChartRing

logger = logging.getLogger()

SYMBOL_COORD = "eta"


def symbol_chart(n, d=0, J=0, aux=()):
    r"""Chart of :math:`T_mM` with coordinates ``eta1..etan`` and Lie parameters ``X1..Xd``."""
    return ChartRing.standard(n, d, J, coord=SYMBOL_COORD, aux=aux)


def constant_symbol(chart, r, c=1):
    """The symbol section ``c * Id_r`` (constant in ``eta``, exterior degree 0)."""
    return EqForm.scalar(chart, chart.mat_eye(r).rmul(chart.ring(c)))


def _q(num, den=1):
    return QQ_I(QQ(num, den))


def _linear_in_X(chart, p):
    lo, hi = chart.n, chart.n + chart.d
    return all(sum(m[lo:hi]) == 1 and not any(m[:lo]) for m in p.itermonoms())


@dataclass(frozen=True, eq=False)
class CurvatureModel:
    r"""Constant curvature data of the zero fiber.

    ``R[j][k]`` are scalar 2-forms with constant coefficients, antisymmetric in ``(j, k)``;
    ``mu_M[j][k]`` are polynomials linear in ``X``, antisymmetric; ``F`` is an ``r x r``
    matrix-valued 2-form and ``mu_E`` an ``r x r`` matrix linear in ``X``. Together they give
    :math:`R_{\mathfrak g} = R + \mu^M(X)` and :math:`F_{\mathfrak g} = F + \mu^E(X)`.
    """

    chart: ChartRing
    R: tuple
    mu_M: tuple
    F: EqForm = None
    mu_E: DomainMatrix = None
    rank: int = 1

    def __post_init__(self):
        chart, n, r = self.chart, self.chart.n, self.rank
        R = tuple(tuple(self._form(self.R[j][k]) for k in range(n)) for j in range(n))
        mu = tuple(tuple(chart.ring(self.mu_M[j][k]) for k in range(n)) for j in range(n))
        F = EqForm.zero(chart) if self.F is None else self.F
        mu_E = chart.mat_zero(r) if self.mu_E is None else self.mu_E
        for j in range(n):
            for k in range(n):
                if R[j][k] != -R[k][j]:
                    raise ValueError(f"R is not antisymmetric at ({j}, {k})")
                if mu[j][k] != -mu[k][j]:
                    raise ValueError(f"mu_M is not antisymmetric at ({j}, {k})")
                if any(len(b) != 2 for b in R[j][k].terms):
                    raise ValueError(f"R[{j}][{k}] is not a 2-form")
                if not _linear_in_X(chart, mu[j][k]):
                    raise ValueError(f"mu_M[{j}][{k}] is not linear in X")
        if any(len(b) != 2 for b in F.terms) or (F and F.rank != r):
            raise ValueError(f"F must be an {r} x {r} matrix-valued 2-form")
        if mu_E.shape != (r, r) or not all(_linear_in_X(chart, e) for e in mu_E.to_list_flat()):
            raise ValueError(f"mu_E must be an {r} x {r} matrix linear in X")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "mu_M", mu)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "mu_E", mu_E)

    def _form(self, value):
        if isinstance(value, EqForm):
            return value
        if isinstance(value, Multivector):
            return EqForm(self.chart, value)
        if not value:
            return EqForm.zero(self.chart)
        raise TypeError(f"curvature entry {value!r} is not a form")

    @classmethod
    def zero(cls, chart, r=1):
        n = chart.n
        return cls(chart, [[0] * n for _ in range(n)], [[0] * n for _ in range(n)], rank=r)

    def on_chart(self, chart):
        """The same data on a chart that shares the variable names in use."""
        if chart == self.chart:
            return self
        n = self.chart.n
        return CurvatureModel(
            chart,
            [[self.R[j][k].with_chart(chart) for k in range(n)] for j in range(n)],
            [[chart.convert(self.mu_M[j][k], self.chart) for k in range(n)] for j in range(n)],
            self.F.with_chart(chart),
            chart.mat_convert(self.mu_E, self.chart),
            self.rank)

    def omega(self, j, k):
        r""":math:`R_{jk} + \mu^M_{jk}(X)` as a scalar form."""
        return self.R[j][k] + EqForm.scalar(self.chart, self.mu_M[j][k])

    def R_g(self):
        n = self.chart.n
        return EqForm.from_matrix(self.chart, [[self.omega(j, k) for k in range(n)] for j in range(n)])

    def F_g(self):
        return self.F + EqForm.scalar(self.chart, self.mu_E)

    def half_K(self, k):
        r""":math:`\frac12 \mathsf K(\eta, \partial_k) = \frac14 \sum_j \eta^j R_{jk}`."""
        out = EqForm.zero(self.chart)
        for j, eta in enumerate(self.chart.x):
            out = out + self.R[j][k] * (eta * _q(1, 4))
        return out

    def moment_term(self, k):
        r""":math:`\frac14 \sum_j \eta^j \mu^M_{jk}(X)`."""
        return sum((eta * self.mu_M[j][k] for j, eta in enumerate(self.chart.x)),
                   self.chart.zero()) * _q(1, 4)


def _direction(chart, xi):
    if isinstance(xi, int):
        return [1 if j == xi else 0 for j in range(chart.n)]
    if len(xi) != chart.n:
        raise ValueError(f"direction of length {len(xi)} on a chart of dim {chart.n}")
    return list(xi)


def _partial(s, i):
    if isinstance(s, EqForm):
        name = s.chart.coords[i]
        return s.map_coeffs(lambda p: s.chart.diff(p, name))
    return s.partial(i)


def _left(form, s):
    if isinstance(s, EqForm):
        return form.wedge(s)
    return s.left(form)


def sym_nabla(xi, K, s):
    r"""Symbol of :math:`\nabla_\xi`: :math:`\partial_\xi s + \frac12 \mathsf K(\eta, \xi) \wedge s`."""
    chart = s.chart
    K = K.on_chart(chart)
    out = EqForm.zero(chart)
    for k, c in enumerate(_direction(chart, xi)):
        if c:
            out = out + (_partial(s, k) + K.half_K(k).wedge(s)) * chart.ring(c)
    return out


def sym_clifford(xi, s):
    r"""Symbol of :math:`c(\xi)`: exterior multiplication :math:`\xi \wedge s`."""
    chart = s.chart
    v = EqForm.from_terms(chart, {(k,): c for k, c in enumerate(_direction(chart, xi)) if c})
    return v.wedge(s)


def sym_poly(p, s):
    """Symbol of multiplication by a polynomial in the Lie parameters (re-truncated)."""
    return s * s.chart.ring(p)


def sym_conj_nabla(xi, K, s):
    r"""Symbol of the conjugated connection :math:`\nabla_\xi + \omega_X(\xi)`.

    Adds :math:`\frac14 \sum_{j,k} \eta^j \xi^k \mu^M_{jk}(X)` to :func:`sym_nabla`.
    """
    chart = s.chart
    K = K.on_chart(chart)
    out = sym_nabla(xi, K, s)
    for k, c in enumerate(_direction(chart, xi)):
        if c:
            out = out + s * (K.moment_term(k) * chart.ring(c))
    return out


def harmonic_oscillator(K, s):
    r"""Generalized harmonic oscillator applied to ``s``.

    .. math::
        -\sum_i \Big(\partial_i - \frac14 \sum_j \Omega_{ij} \eta^j\Big)^2 + F_{\mathfrak g},
        \qquad \Omega = R + \mu^M(X).

    The square is expanded with :math:`W_i = \sum_j \Omega_{ij}\eta^j` (even, with
    :math:`\partial_i W_i = 0`) into :math:`-\sum_i \partial_i^2 + \frac12 W_i\partial_i
    - \frac1{16} W_i^2`. ``s`` is an :class:`EqForm` symbol section or any element exposing
    ``partial(i)``, ``left(form)`` and addition (the Gaussian elements of the heat kernel).
    """
    K = K.on_chart(s.chart)
    chart = s.chart
    out = _left(K.F_g(), s)
    for i in range(chart.n):
        W = EqForm.zero(chart)
        for j, eta in enumerate(chart.x):
            W = W + K.omega(i, j) * eta
        di = _partial(s, i)
        out = out - _partial(di, i)
        out = out + _left(W * _q(1, 2), di)
        out = out - _left(W.wedge(W) * _q(1, 16), s)
    return out


# Flat-chart Dirac algebra. Sections of S x W are Clifford multivectors whose coefficients
# are r x 1 columns over the chart ring; the spinor module is Cl(n) acting on itself.


@dataclass(frozen=True, eq=False)
class DiracReport:
    """Residual witnesses of the flat-chart identities; empty lists mean the identity holds."""

    residuals: dict = field(default_factory=dict)
    sections_checked: int = 0

    @property
    def ok(self):
        return not any(self.residuals.values())

    def failures(self):
        return {name: w for name, w in self.residuals.items() if w}


@dataclass(frozen=True, eq=False)
class ChartDiracData:
    r"""Dirac operator of a flat chart twisted by ``W = C^r``.

    Args:
        chart (ChartRing): coordinates ``x`` and Lie parameters ``X``.
        action (VectorField): :math:`X^M`, linear in ``X`` and in ``x``, Killing.
        connection (EqForm): ``r x r`` matrix one-form ``A`` of ``W`` (``None`` for flat).
        fiber_action: ``r x r`` matrix linear in ``X`` (``None`` for the trivial lift).
        rank (int): ``r``.

    Raises:
        ValueError: if the action is not linear, not Killing, or shapes disagree.
    """

    chart: ChartRing
    action: VectorField
    connection: EqForm = None
    fiber_action: DomainMatrix = None
    rank: int = 1

    def __post_init__(self):
        chart, r = self.chart, self.rank
        if self.action.chart != chart or not self.action.is_action:
            raise ValueError("the action must be an X-linear vector field on this chart")
        for c in self.action.components:
            if any(sum(m[:chart.n]) != 1 for m in c.itermonoms()):
                raise ValueError("the action must be linear in the coordinates")
        mu = tangent_moment(self.action)
        if any(mu[i][j] != -mu[j][i] for i in range(chart.n) for j in range(chart.n)):
            raise ValueError("the action is not Killing for the flat metric")
        A = EqForm.from_terms(chart, {}) if self.connection is None else self.connection
        if A and (A.rank != r or any(len(b) != 1 for b in A.terms)):
            raise ValueError(f"connection must be an {r} x {r} matrix one-form")
        L = chart.mat_zero(r) if self.fiber_action is None else self.fiber_action
        object.__setattr__(self, "connection", A)
        object.__setattr__(self, "fiber_action", L)

    @classmethod
    def rotation(cls, chart, a=0, c=0):
        r"""Rotation of :math:`\mathbb R^2` on a line bundle with ``A = a(x_1dx_2 - x_2dx_1)``."""
        A, L, _ = line_bundle_model(chart, a, c)
        return cls(chart, rotation_action(chart), A, chart.matrix(L), 1)

    @classmethod
    def tangent(cls, chart, a=1):
        r"""Rotation of :math:`\mathbb R^2` on the rank-2 bundle of :func:`tangent_model`."""
        A, L, _ = tangent_model(chart, a)
        return cls(chart, rotation_action(chart), A, L, 2)

    # geometric data

    @cached_property
    def theta(self):
        return theta(self.action)

    @cached_property
    def dtheta(self):
        return d(self.theta)

    @cached_property
    def div_theta(self):
        chart = self.chart
        return sum((chart.diff(c, chart.coords[i]) for i, c in enumerate(self.action.components)),
                   chart.zero())

    @cached_property
    def tangent_moment(self):
        return tangent_moment(self.action)

    @cached_property
    def spin_moment(self):
        return spin_lift(self.tangent_moment).map_coeffs(self.chart.truncate)

    @cached_property
    def twist_moment(self):
        mu = moment(self.connection, self.action, self.fiber_action).coefficient(())
        if isinstance(mu, DomainMatrix):
            return mu
        return self.chart.mat_zero(self.rank)

    @cached_property
    def twist_curvature(self):
        return curvature(self.connection)

    # sections and operators

    def _trunc(self, s):
        return s.map_coeffs(self.chart.mat_truncate)

    def section(self, blade, a, coeff=1):
        col = [[coeff if i == a else 0] for i in range(self.rank)]
        return Multivector(self.chart.n, {tuple(blade): self.chart.matrix(col)}, CLIFFORD)

    def zero_section(self):
        return Multivector.zero(self.chart.n, CLIFFORD)

    def spanning_sections(self, max_degree=4):
        """``x^alpha e_K w_a`` for all blades ``K``, twist vectors ``w_a`` and ``|alpha| <= max_degree``."""
        from .utils import monomials
        chart = self.chart
        out = []
        for alpha in monomials(chart.n, max_degree):
            mono = chart.monomial(dict(zip(chart.coords, alpha)))
            for K in blades(chart.n):
                for a in range(self.rank):
                    out.append(self.section(K, a, mono))
        return out

    def clifford(self, mv, s):
        """Left Clifford multiplication by a multivector (scalar or ``r x r`` coefficients)."""
        return self._trunc(mv.retag(CLIFFORD).product(s))

    def multiply(self, p, s):
        return self._trunc(s.scale(self.chart.ring(p)))

    def nabla(self, i, s):
        chart = self.chart
        name = chart.coords[i]
        out = s.map_coeffs(lambda m: chart.mat_apply(m, lambda p: chart.diff(p, name)))
        A_i = self.connection.form.coefficient((i,))
        if A_i is not None:
            out = out + s.map_coeffs(lambda m: A_i * m)
        return self._trunc(out)

    def nabla_X(self, s):
        out = self.zero_section()
        for i, v in enumerate(self.action.components):
            if v:
                out = out + self.multiply(v, self.nabla(i, s))
        return out

    def dirac(self, s):
        r""":math:`D = \sum_i c(e_i)\nabla_i`."""
        n = self.chart.n
        out = self.zero_section()
        for i in range(n):
            out = out + self.clifford(Multivector.basis(n, (i,), CLIFFORD), self.nabla(i, s))
        return out

    def c_theta(self, s):
        return self.clifford(Multivector.vector(self.chart.n, self.action.components, CLIFFORD), s)

    def dirac_u(self, u, s):
        r""":math:`D_u = D + u\,c(\theta_X)`, the Dirac operator of :math:`\nabla + u\theta_X`."""
        return self.dirac(s) + self.c_theta(s).scale(QQ_I(u))

    def lie(self, s):
        r"""Lie derivative :math:`\nabla_{X^M} + \mu^S(X) + \mu^W(X)`."""
        return (self.nabla_X(s) + self.clifford(self.spin_moment, s)
                + self._trunc(s.map_coeffs(lambda m: self.twist_moment * m)))

    def bismut(self, u, s):
        r""":math:`H_u(X) = D_u^2 + \mathcal L(X)`."""
        return self.dirac_u(u, self.dirac_u(u, s)) + self.lie(s)

    def shifted_laplacian(self, u, s):
        r""":math:`-\sum_i (\nabla_i - u\theta_i)^2`."""
        out = self.zero_section()
        uq = QQ_I(u)
        for i, th in enumerate(self.action.components):
            step = self.nabla(i, s) - self.multiply(th * uq, s)
            out = out - (self.nabla(i, step) - self.multiply(th * uq, step))
        return out

    def c_F(self, s):
        return self.clifford(quantize(self.twist_curvature.form), s)


def _witness(name, s, residual):
    return f"{name}: section {s!r} leaves residual {residual!r}"


def chart_dirac_identities(data, max_degree=4, u_values=(QQ(1, 3), QQ(1, 4))):
    r"""Check the flat-chart Dirac identities on ``x^alpha e_K w_a``, ``|alpha| <= max_degree``.

    * commutator: :math:`D c(\theta) + c(\theta) D = -2\nabla_X + c(d\theta) + d^*\theta`;
    * deformation: :math:`D_u^2 - D_{-u}^2 = 2u\,(D c(\theta) + c(\theta) D)`;
    * Lichnerowicz: :math:`H_u = -\sum(\nabla_i - u\theta_i)^2 + c(F) + \mu + u\,c(d\theta)
      + (1-4u)\nabla_X - 2u\,\mathrm{div}\,\theta`;
    * at :math:`u = 1/4`: :math:`H_{1/4} = -\sum(\nabla_i - \frac14\theta_i)^2 + c(F) + \mu^W
      - \frac12 \mathrm{div}\,\theta`;
    * :math:`d\theta_X(\partial_i, \partial_j) = -2(\mu^M(X)\partial_i, \partial_j)`.

    Returns:
        DiracReport: residual witnesses per identity.
    """
    chart = data.chart
    n = chart.n
    residuals = {"commutator": [], "deformation": [], "lichnerowicz": [],
                 "lichnerowicz_quarter": [], "theta_moment": []}
    mu = data.tangent_moment
    for i in range(n):
        for j in range(n):
            lhs = data.dtheta.coefficient((i, j)) if i < j else (
                -data.dtheta.coefficient((j, i)) if j < i else chart.zero())
            if lhs != mu[j][i] * _q(-2):
                residuals["theta_moment"].append(f"dtheta({i},{j}) = {lhs}, mu = {mu[j][i]}")
    c_dtheta = quantize(data.dtheta.form)
    codiff = -data.div_theta
    sections = data.spanning_sections(max_degree)
    for s in sections:
        anti = data.dirac(data.c_theta(s)) + data.c_theta(data.dirac(s))
        rhs = (data.nabla_X(s).scale(_q(-2)) + data.clifford(c_dtheta, s)
               + data.multiply(codiff, s))
        if anti != rhs:
            residuals["commutator"].append(_witness("commutator", s, anti - rhs))
        for u in u_values:
            uq = QQ_I(u)
            plus = data.dirac_u(u, data.dirac_u(u, s))
            minus = data.dirac_u(-u, data.dirac_u(-u, s))
            if plus - minus != anti.scale(2 * uq):
                residuals["deformation"].append(_witness(f"deformation u={u}", s,
                                                         plus - minus - anti.scale(2 * uq)))
            expected = (data.shifted_laplacian(u, s) + data.c_F(s) + data.lie(s)
                        - data.nabla_X(s) + data.clifford(c_dtheta, s).scale(uq)
                        + data.nabla_X(s).scale(1 - 4 * uq)
                        - data.multiply(data.div_theta * (2 * uq), s))
            got = data.bismut(u, s)
            if got != expected:
                residuals["lichnerowicz"].append(_witness(f"lichnerowicz u={u}", s, got - expected))
        quarter = QQ(1, 4)
        expected = (data.shifted_laplacian(quarter, s) + data.c_F(s)
                    + data._trunc(s.map_coeffs(lambda m: data.twist_moment * m))
                    - data.multiply(data.div_theta * _q(1, 2), s))
        got = data.bismut(quarter, s)
        if got != expected:
            residuals["lichnerowicz_quarter"].append(_witness("u=1/4", s, got - expected))
    logger.info(f"flat Dirac identities on {len(sections)} sections: "
                f"{sum(len(v) for v in residuals.values())} residuals")
    return DiracReport(residuals, len(sections))


def radial_primitive(theta_form, base=None):
    r""":math:`\alpha(z) = -\frac14 \int_0^1 (\iota(\mathcal R)\theta)(m + s(z - m))\, s^{-1} ds`.

    :math:`\mathcal R = \sum_j (z - m)^j \partial_j` is the radial field at the base point ``m``.
    A part of degree ``k`` in ``z - m`` integrates to ``1/k``.

    Raises:
        ValueError: if ``theta_form`` is not a one-form or does not vanish at the base point.
    """
    chart = theta_form.chart
    n = chart.n
    base = [0] * n if base is None else list(base)
    if any(len(b) != 1 for b in theta_form.terms):
        raise ValueError("radial_primitive needs a one-form")
    at_base = theta_form.evaluate(dict(zip(chart.coords, base)))
    if not at_base.is_zero():
        raise ValueError("theta does not vanish at the base point")
    shift = {name: chart.x[i] + chart.ring(base[i]) for i, name in enumerate(chart.coords)}
    unshift = {name: chart.x[i] - chart.ring(base[i]) for i, name in enumerate(chart.coords)}
    # work in w = z - m
    f = sum((chart.compose(theta_form.coefficient((i,)), shift) * chart.x[i] for i in range(n)),
            chart.zero())
    alpha = chart.zero()
    for k, part in chart.homogeneous_parts(f).items():
        if k == 0:
            if part:
                raise ValueError("the radial contraction does not vanish at the base point")
            continue
        alpha += part * _q(-1, 4 * k)
    return chart.compose(alpha, unshift)


def conjugate_one_form(theta_form, base=None):
    r""":math:`\omega_X = -d\alpha_X - \frac14\theta_X`."""
    alpha = radial_primitive(theta_form, base)
    chart = theta_form.chart
    return -d(EqForm.scalar(chart, alpha)) - theta_form * _q(1, 4)


def radial_field(chart, base=None):
    base = [0] * chart.n if base is None else list(base)
    return VectorField(chart, tuple(chart.x[i] - chart.ring(base[i]) for i in range(chart.n)))


def conjugate_form_omega(data, base=None):
    """Conjugating one-form of the flat Dirac data at a fixed point of the action."""
    return conjugate_one_form(data.theta, base)


def omega_checks(data, base=None):
    r"""Residuals of :math:`\iota(\mathcal R)\omega_X = 0`, of the linear part
    :math:`\frac14 (\mu^M(X)\mathcal R, \cdot)` and of :math:`\omega_X(m) = 0`."""
    chart = data.chart
    n = chart.n
    base = [0] * n if base is None else list(base)
    omega = conjugate_form_omega(data, base)
    radial = radial_field(chart, base)
    out = {}
    out["radial"] = iota(radial, omega)
    mu = data.tangent_moment
    linear = {}
    for j in range(n):
        coeff = omega.coefficient((j,))
        part = chart.homogeneous_parts(chart.compose(coeff, {
            name: chart.x[i] + chart.ring(base[i]) for i, name in enumerate(chart.coords)})).get(1)
        expected = sum((mu[j][k] * radial.components[k] for k in range(n)), chart.zero()) * _q(1, 4)
        expected = chart.compose(expected, {
            name: chart.x[i] + chart.ring(base[i]) for i, name in enumerate(chart.coords)})
        linear[(j,)] = (part or chart.zero()) - expected
    out["linear"] = EqForm.from_terms(chart, linear)
    out["base"] = omega.evaluate(dict(zip(chart.coords, base)))
    return {name: form.map_coeffs(chart.truncate) for name, form in out.items()}
