###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Mehler kernel of the zero-fiber harmonic oscillator, with the Gaussian kept as a formal factor.
"""
import logging
from dataclasses import dataclass

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .eqforms import EqForm, ahat, ch_rel, nilpotent_exp
from .polynomials import ChartRing
from .scalar import Scalar, scaled_equal
from .series import coth_coefficients
from .symbols import harmonic_oscillator

logger = logging.getLogger()

HEAT_TIME = "tau"


def heat_chart(chart):
    """``chart`` with the formal heat time ``tau`` appended to its auxiliary variables."""
    if HEAT_TIME in chart.aux:
        return chart
    return ChartRing(chart.coords, chart.params, chart.J, chart.aux + (HEAT_TIME,))


@dataclass(frozen=True, eq=False)
class GaussianElement:
    r"""The function :math:`\tau^{-s} (4\pi\tau)^{-n/2} e^{-|\xi|^2/4\tau} \, b(\xi, X, \tau)`.

    ``shift`` is :math:`s`, ``body`` is :math:`b`: a scalar or matrix-valued :class:`EqForm`
    on a chart whose coordinates are :math:`\xi` and which carries ``tau`` as an auxiliary
    variable. Derivatives are pushed through the prefactor and the Gaussian, so every
    element stays in this normal form.
    """

    chart: ChartRing
    shift: int
    body: EqForm

    def __post_init__(self):
        if HEAT_TIME not in self.chart.aux:
            raise ValueError(f"chart has no heat time variable {HEAT_TIME!r}")
        if self.body.chart != self.chart:
            raise ValueError("body lives on another chart")

    @classmethod
    def free(cls, chart, r=1):
        """The flat heat kernel times ``Id_r``."""
        return cls(chart, 0, EqForm.scalar(chart, chart.mat_eye(r)))

    @property
    def tau(self):
        return self.chart.gen(HEAT_TIME)

    def _body_at(self, shift):
        k = shift - self.shift
        if k < 0:
            raise ValueError(f"cannot lower the shift from {self.shift} to {shift}")
        return self.body * self.tau**k

    def _same(self, other):
        if not isinstance(other, GaussianElement):
            raise TypeError(f"expected a GaussianElement, got {type(other)}")
        if other.chart != self.chart:
            raise ValueError("chart mismatch")

    def __add__(self, other):
        self._same(other)
        s = max(self.shift, other.shift)
        return GaussianElement(self.chart, s, self._body_at(s) + other._body_at(s))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GaussianElement(self.chart, self.shift, -self.body)

    def __eq__(self, other):
        if not isinstance(other, GaussianElement):
            return NotImplemented
        return self.chart == other.chart and (self - other).is_zero()

    __hash__ = None

    def is_zero(self):
        return self.body.is_zero()

    # conjugated derivative rules

    def partial(self, i):
        r""":math:`\partial_{\xi_i}`: the body becomes :math:`\tau \partial_i b - \frac12 \xi_i b`, shift + 1."""
        chart = self.chart
        name = chart.coords[i]
        db = self.body.map_coeffs(lambda p: chart.diff(p, name))
        body = db * self.tau - self.body * (chart.x[i] * QQ_I(QQ(1, 2)))
        return GaussianElement(chart, self.shift + 1, body)

    def d_tau(self):
        r""":math:`\partial_\tau`: the body becomes
        :math:`\tau^2 \partial_\tau b - (s + n/2)\tau b + \frac14 |\xi|^2 b`, shift + 2."""
        chart, tau = self.chart, self.tau
        db = self.body.map_coeffs(lambda p: chart.diff(p, HEAT_TIME))
        r2 = sum((x**2 for x in chart.x), chart.zero())
        c = -(QQ(self.shift) + QQ(chart.n, 2))
        body = db * tau**2 + self.body * (tau * QQ_I(c)) + self.body * (r2 * QQ_I(QQ(1, 4)))
        return GaussianElement(chart, self.shift + 2, body)

    def left(self, form):
        """Left multiplication by a form that does not involve ``tau``."""
        return GaussianElement(self.chart, self.shift, form.with_chart(self.chart).wedge(self.body))

    # inspection

    def reflect(self):
        r"""Pull back along :math:`\xi \mapsto -\xi`."""
        chart = self.chart
        sub = {name: -x for name, x in zip(chart.coords, chart.x)}
        return GaussianElement(chart, self.shift,
                               self.body.map_coeffs(lambda p: chart.compose(p, sub)))

    def tau_degrees(self):
        """``(lowest, highest)`` total power of ``tau`` beyond ``(4 pi tau)^(-n/2)``; ``None`` for zero."""
        k = self.chart._index(HEAT_TIME)
        degrees = set()
        for c in self.body.terms.values():
            entries = c.to_list_flat() if isinstance(c, DomainMatrix) else [c]
            for p in entries:
                degrees.update(m[k] for m in p.itermonoms())
        if not degrees:
            return None
        return min(degrees) - self.shift, max(degrees) - self.shift

    def value_at_origin(self):
        r"""Body at :math:`\xi = 0, \tau = 1`, where the Gaussian and :math:`\tau^{-s}` equal 1."""
        values = {name: 0 for name in self.chart.coords}
        values[HEAT_TIME] = 1
        return self.body.evaluate(values)

    def normalization(self):
        r""":math:`(4\pi)^{-n/2}` as a :class:`Scalar`; only defined for even ``n``."""
        n = self.chart.n
        if n % 2:
            raise ValueError(f"(4 pi)^(-{n}/2) is not an exact Scalar for odd n")
        return Scalar(QQ(1, 2**(n // 2)), 0, -(n // 2))

    def monomial_dump(self, limit=6):
        """Readable list of the leading stored terms, for failure reports."""
        out = []
        for blade, c in self.body.terms.items():
            entries = c.to_list_flat() if isinstance(c, DomainMatrix) else [c]
            for p in entries:
                for monom, coeff in p.items():
                    out.append(f"{blade}: {coeff} * {monom}")
                    if len(out) >= limit:
                        return out
        return out

    def __repr__(self):
        return f"GaussianElement(shift={self.shift}, body={self.body!r})"


def _quadratic_exponent(K, chart):
    r""":math:`-\frac14 \sum_{k \geq 1} h_{2k} \tau^{2k-1} \langle \xi | \Omega^{2k} | \xi \rangle`."""
    Omega = K.R_g()
    out = EqForm.zero(chart)
    if Omega.is_zero():
        return out
    tau = chart.gen(HEAT_TIME)
    cap = chart.n + 2 * chart.J + 1
    h = coth_coefficients(2 * cap + 2)
    square = Omega.wedge(Omega)
    power = square
    for k in range(1, cap + 1):
        if power.is_zero():
            return out
        if h[2 * k]:
            quad = EqForm.zero(chart)
            for i, xi in enumerate(chart.x):
                for j, xj in enumerate(chart.x):
                    quad = quad + power.entry(i, j) * (xi * xj)
            out = out + quad * (tau**(2 * k - 1) * QQ_I(-h[2 * k] / 4))
        power = power.wedge(square)
    raise ValueError("powers of R_g did not vanish: entries are not nilpotent")


def mehler_kernel(K):
    r"""Mehler kernel of the harmonic oscillator of ``K``.

    .. math::
        (4\pi\tau)^{-n/2} \det{}^{1/2}\Big(\frac{\tau\Omega/2}{\sinh(\tau\Omega/2)}\Big)
        \exp\Big(-\frac1{4\tau}\big\langle\xi\big|\tfrac{\tau\Omega}2\coth\tfrac{\tau\Omega}2\big|\xi\big\rangle\Big)
        \exp(-\tau F_{\mathfrak g}), \qquad \Omega = R_{\mathfrak g}.

    The leading :math:`|\xi|^2/4\tau` of the coth series is the formal Gaussian; the rest
    is expanded exactly since every entry of :math:`\Omega` is nilpotent.

    The formal heat time :math:`\tau` is the ``tau`` variable that :func:`heat_chart`
    appends to ``K.chart``. The dimension ``n`` and the truncation order ``J`` in the Lie
    parameters are ``K.chart.n`` and ``K.chart.J``. The kernel lives on
    ``heat_chart(K.chart)``.

    Args:
        K (CurvatureModel): constant curvature data on a symbol chart.

    Returns:
        :class:`GaussianElement` with shift 0 and an ``r x r`` matrix body.

    Raises:
        ValueError: if ``R_g`` or ``F_g`` is not nilpotent.
    """
    chart = heat_chart(K.chart)
    K = K.on_chart(chart)
    tau = chart.gen(HEAT_TIME)
    det_factor = ahat(K.R_g() * tau)
    quadratic = nilpotent_exp(_quadratic_exponent(K, chart))
    twist = nilpotent_exp(-(K.F_g() * tau))
    eye = EqForm.scalar(chart, chart.mat_eye(K.rank))
    body = det_factor.wedge(quadratic).wedge(eye).wedge(twist)
    kernel = GaussianElement(chart, 0, body)
    low = kernel.tau_degrees()[0]
    if low < -(chart.n + 2 * chart.J):
        raise ValueError(f"tau-Laurent degree {low} below -(n + 2J)")
    return kernel


def heat_residual(K, kernel):
    r""":math:`(\partial_\tau + \widehat{H})\,k` for any Gaussian element ``kernel``."""
    return kernel.d_tau() + harmonic_oscillator(K, kernel)


def verify_heat_equation(K):
    """Residual of the heat equation on the Mehler kernel of ``K``; zero when it holds."""
    residual = heat_residual(K, mehler_kernel(K))
    if not residual.is_zero():
        logger.warning("heat equation fails, leading terms: %s", residual.monomial_dump())
    return residual


@dataclass(frozen=True)
class SupertraceComparison:
    r"""Both sides of the top-degree comparison as ``(Scalar, polynomial in X)`` pairs.

    ``kernel`` is :math:`(4\pi)^{-n/2}` times the Berezin supertrace of the kernel at
    :math:`\tau = 1, \xi = 0`; ``integrand`` is :math:`(2\pi i)^{-n/2}` times the top
    coefficient of :math:`\hat A_{\mathfrak g} \mathrm{Ch}_{\mathfrak g}`.
    """

    kernel: tuple
    integrand: tuple

    @property
    def ok(self):
        return scaled_equal(*self.kernel, *self.integrand)


def kernel_supertrace_at_one(K, grading=None):
    """Compare the kernel supertrace at ``tau = 1`` with the equivariant integrand of ``K``.

    Args:
        K (CurvatureModel): curvature data on a symbol chart of even dimension.
        grading: optional ``+1/-1`` list turning the twisting trace into a supertrace.

    Returns:
        :class:`SupertraceComparison`.

    Raises:
        ValueError: for odd dimension.
    """
    n = K.chart.n
    if n % 2:
        raise ValueError(f"supertrace needs an even dimension, got {n}")
    kernel = mehler_kernel(K)
    chart = kernel.chart
    top = tuple(range(n))
    berezin = QQ_I(0, -2)**(n // 2)
    lhs = kernel.value_at_origin().trace(grading).coefficient(top) * berezin

    F_g = K.F_g()
    if F_g.is_matrix() or K.rank == 1:
        ch = ch_rel(F_g, grading)
    else:
        ch = EqForm.scalar(K.chart, sum(grading) if grading is not None else K.rank)
    integrand = ahat(K.R_g()).wedge(ch)
    rhs = chart.convert(integrand.coefficient(top), K.chart)
    comparison = SupertraceComparison((kernel.normalization(), lhs),
                                      (Scalar(1, -(n // 2), -(n // 2)), rhs))
    if not comparison.ok:
        logger.warning("kernel supertrace %s differs from integrand %s",
                       comparison.kernel, comparison.integrand)
    return comparison
