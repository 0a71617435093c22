###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Clifford-model rescaled bundle: Cl(n) x M_r over V = R^n x R^n, its radial-gauge connections,
zero-fiber symbols and the normalized supertrace of rescaled sections
"""
import logging
from dataclasses import dataclass
from functools import cached_property

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .dnc import LocalModel
from .eqforms import EqForm
from .gradealg import CLIFFORD, Multivector, TwistedElement, blade_product, blades, spin_lift, symbol_map
from .polynomials import ChartRing
from .rescale import (DEFAULT_TRUNCATION, MAX_TRUNCATION, ConnectionData, FilteredBundle,
                      LaurentSection, Section, eval_section_zero)
from .symbols import CurvatureModel, sym_clifford, sym_nabla, sym_poly, symbol_chart
from .utils import monomials

logger = logging.getLogger()


@dataclass(frozen=True)
class CliffordBundle(FilteredBundle):
    r"""The bundle :math:`Cl(n) \otimes M_r` on the chart ``(x, y)`` of :math:`V = \mathbb R^n \times \mathbb R^n`.

    The frame is :math:`e_K \otimes E_{ab}` over blades ``K`` and matrix units; its filtration
    degree is ``|K|``. Lie parameters carry weight 2. The chart has auxiliary variables
    ``eta1..etan`` for symbolic normal vectors.
    """

    dim: int = 0
    twist: int = 1

    @classmethod
    def build(cls, n, r=1, d=0, J=0):
        if n < 1 or r < 1:
            raise ValueError(f"Clifford model needs n >= 1 and r >= 1, got n={n}, r={r}")
        params = tuple(f"X{i + 1}" for i in range(d))
        aux = tuple(f"eta{i + 1}" for i in range(n))
        model = LocalModel(n, n, params, J, aux)
        degrees = tuple(len(K) for K in blades(n) for _ in range(r * r))
        return cls(model, degrees, None, 2, n, r)

    @cached_property
    def frame(self):
        return [(K, a, b) for K in blades(self.dim) for a in range(self.twist)
                for b in range(self.twist)]

    @cached_property
    def _positions(self):
        return {key: i for i, key in enumerate(self.frame)}

    def index(self, K, a=0, b=0):
        return self._positions[(tuple(K), a, b)]

    @property
    def top(self):
        return tuple(range(self.dim))

    @cached_property
    def eta(self):
        return tuple(self.chart.gen(name) for name in self.model.aux)

    # End sections

    def _empty(self):
        size = self.rank
        return [[self.chart.zero()] * size for _ in range(size)]

    def _coeff(self, c):
        return self.chart.ring(c)

    def left(self, mv):
        """Left Clifford multiplication by a multivector with scalar coefficients."""
        rows = self._empty()
        for (J, a, b), col in self._positions.items():
            for I, c in mv.terms.items():
                sign, K = blade_product(I, J, CLIFFORD)
                rows[self.index(K, a, b)][col] += self._coeff(c) * sign
        return self.chart.matrix(rows)

    def right(self, mv):
        """Right Clifford multiplication by a multivector with scalar coefficients."""
        rows = self._empty()
        for (J, a, b), col in self._positions.items():
            for I, c in mv.terms.items():
                sign, K = blade_product(J, I, CLIFFORD)
                rows[self.index(K, a, b)][col] += self._coeff(c) * sign
        return self.chart.matrix(rows)

    def twist_left(self, M):
        """``1 (x) M`` acting by left multiplication on the matrix factor."""
        M = M.to_list() if isinstance(M, DomainMatrix) else M
        rows = self._empty()
        r = self.twist
        for (J, a, b), col in self._positions.items():
            for c in range(r):
                rows[self.index(J, c, b)][col] += self._coeff(M[c][a])
        return self.chart.matrix(rows)

    def twist_right(self, M):
        M = M.to_list() if isinstance(M, DomainMatrix) else M
        rows = self._empty()
        r = self.twist
        for (J, a, b), col in self._positions.items():
            for c in range(r):
                rows[self.index(J, a, c)][col] += self._coeff(M[b][c])
        return self.chart.matrix(rows)

    # sections and algebra elements

    def section(self, element):
        """Section with the coefficients of a :class:`TwistedElement` (or a scalar multivector for r = 1)."""
        comps = [self.chart.zero()] * self.rank
        for K, c in element.terms.items():
            if isinstance(c, DomainMatrix):
                for a, row in enumerate(c.to_list()):
                    for b, e in enumerate(row):
                        comps[self.index(K, a, b)] = self._coeff(e)
            elif self.twist == 1:
                comps[self.index(K)] = self._coeff(c)
            else:
                raise ValueError("scalar coefficients need r = 1")
        return Section(self, tuple(comps))

    def element(self, section):
        """Inverse of :meth:`section`: the :class:`TwistedElement` with polynomial coefficients."""
        r = self.twist
        terms = {}
        for (K, a, b), i in self._positions.items():
            c = section.components[i]
            if c:
                terms.setdefault(K, [[self.chart.zero()] * r for _ in range(r)])[a][b] = c
        return TwistedElement(self.dim, {K: self.chart.matrix(rows) for K, rows in terms.items()},
                              CLIFFORD)


def _antisymmetric_pairs(table, n, what):
    for j in range(n):
        for k in range(n):
            if not _is_negative(table[j][k], table[k][j]):
                raise ValueError(f"{what} is not antisymmetric in ({j}, {k})")


def _is_negative(a, b):
    rows_a = a.to_list() if isinstance(a, DomainMatrix) else a
    rows_b = b.to_list() if isinstance(b, DomainMatrix) else b
    if not isinstance(rows_a, list):
        return rows_a == -rows_b
    return all(QQ_I.convert(x) == -QQ_I.convert(y)
               for ra, rb in zip(rows_a, rows_b) for x, y in zip(ra, rb))


def _zero_table(n, size):
    return [[[[0] * size for _ in range(size)] for _ in range(n)] for _ in range(n)]


@dataclass(frozen=True, eq=False)
class CliffordModel:
    r"""Radial-gauge connection on a :class:`CliffordBundle` with constant curvature data.

    ``R[j][k]`` is an antisymmetric ``n x n`` rational matrix (a curvature value in
    :math:`\mathfrak{so}(n)`), antisymmetric in ``(j, k)``; ``F[j][k]`` is an ``r x r``
    twisting curvature value. The connection is

    .. math::
        A_{x_j} = 0, \qquad A_{y_j} = \frac12 \sum_i y^i \big(L(\tau(R_{ij})) + F_{ij}\big),

    so :math:`\sum_j y^j A_{y_j} = 0`: the blade frame is synchronous and its curvature on
    ``M`` is :math:`L(\tau(R_{jk})) + F_{jk}`.
    """

    bundle: CliffordBundle
    R: tuple = None
    F: tuple = None
    check: bool = True

    def __post_init__(self):
        n, r = self.bundle.dim, self.bundle.twist
        R = _zero_table(n, n) if self.R is None else self.R
        F = _zero_table(n, r) if self.F is None else self.F
        _antisymmetric_pairs(R, n, "R")
        _antisymmetric_pairs(F, n, "F")
        for j in range(n):
            for k in range(n):
                A = R[j][k]
                if any(QQ_I.convert(A[a][b]) != -QQ_I.convert(A[b][a])
                       for a in range(n) for b in range(n)):
                    raise ValueError(f"R[{j}][{k}] is not in so({n})")
        object.__setattr__(self, "R", tuple(tuple(R[j]) for j in range(n)))
        object.__setattr__(self, "F", tuple(tuple(F[j]) for j in range(n)))

    @classmethod
    def flat(cls, bundle):
        return cls(bundle)

    def bivector(self, j, k):
        r""":math:`\tau(R_{jk})`, the spinor curvature value."""
        return spin_lift([[QQ_I.convert(e) for e in row] for row in self.R[j][k]])

    @cached_property
    def connection(self):
        bundle = self.bundle
        chart, n = bundle.chart, bundle.dim
        half = chart.ring(QQ_I(QQ(1, 2)))
        blocks = [[bundle.left(self.bivector(i, j)) + bundle.twist_left(self.F[i][j])
                   for j in range(n)] for i in range(n)]
        ys = chart.x[n:]
        A = [chart.mat_zero(bundle.rank) for _ in range(n)]
        for j in range(n):
            Ay = chart.mat_zero(bundle.rank)
            for i in range(n):
                Ay = Ay + blocks[i][j].mul(ys[i] * half)
            A.append(Ay)
        return ConnectionData(bundle, tuple(A), self.check)

    @cached_property
    def symbol_chart(self):
        chart = self.bundle.chart
        return symbol_chart(self.bundle.dim, chart.d, chart.J)

    def curvature_model(self):
        r"""Zero-fiber curvature data: :math:`R_{jk} = 2\,\sigma(\tau(R_{jk}))` and the twisting ``F``."""
        chart, n, r = self.symbol_chart, self.bundle.dim, self.bundle.twist
        R = [[EqForm(chart, symbol_map(self.bivector(j, k))) * QQ_I(2) for k in range(n)]
             for j in range(n)]
        F = EqForm.from_terms(chart, {(j, k): chart.matrix(self.F[j][k])
                                      for j in range(n) for k in range(j + 1, n)})
        zero = [[0] * n for _ in range(n)]
        return CurvatureModel(chart, R, zero, F, None, r)


def module_generator(bundle, i, alpha=None, beta=None, gamma=None):
    r""":math:`y^\alpha x^\gamma X^\beta e_i\, t^{q_i + 2|\beta| - |\alpha|}`, a generator of the rescaled module."""
    model, chart = bundle.model, bundle.chart
    alpha = alpha or (0,) * model.k
    beta = beta or (0,) * chart.d
    gamma = gamma or (0,) * model.l
    mono = chart.monomial({**dict(zip(model.y_names, alpha)), **dict(zip(chart.params, beta)),
                           **dict(zip(model.x_names, gamma))})
    power = bundle.degrees[i] + bundle.param_weight * sum(beta) - sum(alpha)
    return LaurentSection(bundle, {-power: Section.basis(bundle, i, mono)})


def module_generators(bundle, max_y_degree=1, with_params=True):
    """Generators over the frame with ``|alpha| <= max_y_degree`` and ``|beta| <= 1``."""
    chart = bundle.chart
    betas = [None]
    if with_params and chart.J:
        betas += [tuple(1 if j == i else 0 for j in range(chart.d)) for i in range(chart.d)]
    out = []
    for i in range(bundle.rank):
        for alpha in monomials(bundle.model.k, max_y_degree):
            for beta in betas:
                out.append(module_generator(bundle, i, alpha, beta))
    return out


def _truncation(bundle, N):
    if N is not None:
        return N
    return min(MAX_TRUNCATION, max(DEFAULT_TRUNCATION, bundle.max_degree + 4))


def zero_fiber_symbol(s, connection, m, N=None):
    r"""Zero-fiber value of a rescaled section at ``m`` as a symbol section in ``eta``.

    The normal vector is the symbolic :math:`\eta`; the blade components become the exterior
    part of an ``r x r`` matrix-valued form on the symbol chart.
    """
    bundle = s.bundle
    values = eval_section_zero(s, connection, m, bundle.eta, _truncation(bundle, N))
    chart = symbol_chart(bundle.dim, bundle.chart.d, bundle.chart.J)
    r = bundle.twist
    terms = {}
    for (K, a, b), i in bundle._positions.items():
        if values[i]:
            rows = terms.setdefault(K, [[0] * r for _ in range(r)])
            rows[a][b] = chart.convert(values[i], bundle.chart)
    return EqForm.from_terms(chart, {K: chart.matrix(rows) for K, rows in terms.items()})


def symbol_consistency(model, generators, m, N=None):
    r"""Compare zero-fiber values of :math:`t\nabla_{y_k}s`, :math:`t\,c(e_k)s` and
    :math:`t^{2|\beta|}X^\beta s` with the symbol operators applied to the value of ``s``.

    Returns:
        list of witness strings, empty when every identity holds.
    """
    bundle = model.bundle
    connection = model.connection
    K = model.curvature_model()
    n = bundle.dim
    l = bundle.model.l
    chart = bundle.chart
    failures = []

    def compare(label, lhs, rhs):
        if lhs != rhs:
            failures.append(f"{label}: zero-fiber value {lhs!r} but symbol {rhs!r}")

    for g, s in enumerate(generators):
        sigma = zero_fiber_symbol(s, connection, m, N)
        for k in range(n):
            ts = s.map(lambda v, k=k: connection.nabla(l + k, v)).shift(1)
            compare(f"generator {g}, nabla_{k}", zero_fiber_symbol(ts, connection, m, N),
                    sym_nabla(k, K, sigma))
            ck = bundle.left(Multivector.basis(n, (k,), CLIFFORD))
            ts = s.map(lambda v, ck=ck: v.apply(ck)).shift(1)
            compare(f"generator {g}, c(e_{k})", zero_fiber_symbol(ts, connection, m, N),
                    sym_clifford(k, sigma))
        for beta in monomials(chart.d, chart.J, 1):
            mono = chart.monomial(dict(zip(chart.params, beta)))
            ts = s.map(lambda v, mono=mono: v.scale(mono)).shift(bundle.param_weight * sum(beta))
            compare(f"generator {g}, X^{beta}", zero_fiber_symbol(ts, connection, m, N),
                    sym_poly(K.chart.convert(mono, chart), sigma))
    logger.info(f"symbol consistency on {len(generators)} generators: {len(failures)} failures")
    return failures


def trace_chart(bundle):
    """Ring of ``str_t`` values: the Lie parameters and ``t``."""
    chart = bundle.chart
    return ChartRing((), chart.params, chart.J, ("t",))


def _berezin_constant(n):
    if n % 2:
        raise ValueError(f"Berezin supertrace needs even dimension, got {n}")
    return QQ_I(0, -2)**(n // 2)


def str_t(s, m):
    r"""Normalized supertrace :math:`t^{-n}\,\mathrm{Str}(s_t)(m)` with :math:`X` read as :math:`t^{-2}X`.

    Only top-blade diagonal components contribute. For a member of the rescaled module the
    result is a polynomial in ``t``; its value at ``t = 0`` is the Berezin supertrace of
    the zero-fiber value (:func:`str_zero_fiber`).

    Raises:
        ValueError: if ``n`` is odd, ``s`` depends on ``eta`` or a negative power of ``t``
            appears (``s`` is not in the rescaled module).
    """
    bundle = s.bundle
    n, r = bundle.dim, bundle.twist
    const = _berezin_constant(n)
    chart = bundle.chart
    out_chart = trace_chart(bundle)
    lo, hi = chart.n, chart.n + chart.d
    out = out_chart.zero()
    for p, sp in s.terms.items():
        for a in range(r):
            comp = bundle.evaluate_base(sp.components[bundle.index(bundle.top, a, a)], m)
            for monom, coeff in comp.items():
                if any(monom[hi:]):
                    raise ValueError("str_t needs sections free of the symbolic normal vector")
                beta = monom[lo:hi]
                power = -n - p - 2 * sum(beta)
                if power < 0:
                    raise ValueError(f"t^{power} in the normalized supertrace: "
                                     f"section is not in the rescaled module")
                exps = {**dict(zip(chart.params, beta)), "t": power}
                out += out_chart.monomial(exps) * coeff
    return out_chart.truncate(out * const)


def str_zero_fiber(s, connection, m, N=None):
    r"""Berezin supertrace of the zero-fiber value at ``(m, 0)``, in the trace chart."""
    bundle = s.bundle
    const = _berezin_constant(bundle.dim)
    values = eval_section_zero(s, connection, m, (0,) * bundle.dim, _truncation(bundle, N))
    out_chart = trace_chart(bundle)
    out = out_chart.zero()
    for a in range(bundle.twist):
        out += out_chart.convert(values[bundle.index(bundle.top, a, a)], bundle.chart)
    return out * const
