###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Rescaled bundles on the local model R^l x R^k: filtered frames, connections, order functions,
the rescaled module and its evaluation maps
"""
import logging
from dataclasses import dataclass, field
from itertools import product
from math import factorial

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .dnc import LocalModel
from .eqforms import EqForm, VectorField, d, iota
from .gradealg import blades

logger = logging.getLogger()

POS_INF = float("inf")
NEG_INF = float("-inf")
DEFAULT_TRUNCATION = 8
MAX_TRUNCATION = 24


@dataclass(frozen=True)
class OrderResult:
    """An order computed from a finite jet, with a flag saying whether the jet was long enough."""

    value: float
    certified: bool
    bound: int

    @property
    def inconclusive(self):
        return not self.certified


@dataclass(frozen=True)
class FilteredBundle:
    r"""Trivial bundle :math:`V \times \mathbb{C}^r` with a filtration adapted to a frame.

    The frame section ``e_i`` has filtration degree ``degrees[i]``. The elementary matrix
    ``E_ab`` (mapping ``e_b`` to ``e_a``) has End degree ``end_degrees[a][b]``, by default
    ``q_a - q_b``. A monomial :math:`X^\beta` in the Lie parameters adds
    ``param_weight * |beta|`` to both filtrations.

    Args:
        model (LocalModel): the chart ``(x, y)``.
        degrees (tuple[int]): filtration degrees ``q_i`` of the frame.
        end_degrees (tuple[tuple[int]]): optional End degrees of elementary matrices.
        param_weight (int): weight of the Lie parameters, 0 or 2.

    Raises:
        ValueError: on a bad weight or when an End degree is too small to map
            ``F^p`` into ``F^{p+j}``.
    """

    model: LocalModel
    degrees: tuple
    end_degrees: tuple = None
    param_weight: int = 0

    def __post_init__(self):
        if self.param_weight not in (0, 2):
            raise ValueError(f"param_weight must be 0 or 2, got {self.param_weight}")
        object.__setattr__(self, "degrees", tuple(int(q) for q in self.degrees))
        if self.end_degrees is None:
            ends = tuple(tuple(qa - qb for qb in self.degrees) for qa in self.degrees)
            object.__setattr__(self, "end_degrees", ends)
        else:
            object.__setattr__(self, "end_degrees", tuple(tuple(row) for row in self.end_degrees))
        bad = self.check_end_compatibility()
        if bad:
            raise ValueError(f"End degrees incompatible with the frame filtration at {bad}")

    @property
    def rank(self):
        return len(self.degrees)

    @property
    def chart(self):
        return self.model.chart

    @property
    def max_degree(self):
        return max(self.degrees) + self.param_weight * self.chart.J

    def check_end_compatibility(self):
        """Elementary matrices ``E_ab`` whose End degree ``j`` fails ``q_a <= q_b + j``."""
        return [(a, b) for a in range(self.rank) for b in range(self.rank)
                if self.degrees[a] > self.degrees[b] + self.end_degrees[a][b]]

    # monomial bookkeeping

    def weight(self, monom):
        """Shift in order contributed by a monomial: ``w |beta| - |alpha_y|``."""
        l, k, n = self.model.l, self.model.k, self.chart.n
        return self.param_weight * sum(monom[n:n + self.chart.d]) - sum(monom[l:l + k])

    def restrict(self, p):
        """Part of ``p`` that survives ``y = 0``."""
        l, k = self.model.l, self.model.k
        keep = {m: c for m, c in p.items() if not any(m[l:l + k])}
        return self.chart.ring.from_dict(keep) if keep else self.chart.zero()

    def y_parts(self, p):
        return self.chart.homogeneous_parts(p, self.model.y_names)

    def evaluate_base(self, p, m):
        """Restrict to ``y = 0`` and substitute the base point ``x = m``."""
        values = dict(zip(self.model.x_names, m))
        values.update({name: 0 for name in self.model.y_names})
        return self.chart.evaluate(p, values)

    # decompositions into graded pieces; the Clifford model overrides end_terms

    def section_terms(self, components):
        for i, p in enumerate(components):
            yield self.degrees[i], p

    def end_terms(self, phi):
        rows = phi.to_list()
        for a in range(self.rank):
            for b in range(self.rank):
                yield self.end_degrees[a][b], rows[a][b]

    def end_basis(self):
        """Elementary matrices with their End degrees."""
        out = []
        for a in range(self.rank):
            for b in range(self.rank):
                rows = [[1 if (i, j) == (a, b) else 0 for j in range(self.rank)]
                        for i in range(self.rank)]
                out.append((self.chart.matrix(rows), self.end_degrees[a][b]))
        return out


def _max_order(bundle, terms, restrict):
    best = NEG_INF
    for deg, p in terms:
        if restrict:
            p = bundle.restrict(p)
        for monom in p.itermonoms():
            best = max(best, deg + bundle.weight(monom))
    return best


def end_filtration_order(bundle, phi):
    r"""Filtration order of an End section restricted to ``M`` (:math:`-\infty` if it vanishes there)."""
    return _max_order(bundle, bundle.end_terms(phi), restrict=True)


def getzler_order(bundle, phi):
    """Getzler order of multiplication by an End-valued polynomial in the given frame."""
    return _max_order(bundle, bundle.end_terms(phi), restrict=False)


@dataclass(frozen=True, eq=False)
class Section:
    """Section of a :class:`FilteredBundle`: ``rank`` polynomial components in the frame."""

    bundle: FilteredBundle
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.bundle.rank:
            raise ValueError(f"{len(self.components)} components for a rank "
                             f"{self.bundle.rank} bundle")
        chart = self.bundle.chart
        object.__setattr__(self, "components",
                           tuple(chart.truncate(chart.ring(c)) for c in self.components))

    @classmethod
    def zero(cls, bundle):
        return cls(bundle, (0,) * bundle.rank)

    @classmethod
    def basis(cls, bundle, i, coeff=1):
        return cls(bundle, tuple(coeff if j == i else 0 for j in range(bundle.rank)))

    def __add__(self, other):
        return Section(self.bundle, tuple(a + b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return Section(self.bundle, tuple(-a for a in self.components))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return Section(self.bundle, tuple(a * c for a in self.components))

    def apply(self, phi):
        """``phi @ self`` for an End-valued matrix ``phi``."""
        rows = phi.to_list()
        zero = self.bundle.chart.zero()
        return Section(self.bundle, tuple(sum((e * c for e, c in zip(row, self.components)), zero)
                                          for row in rows))

    def map(self, fn):
        return Section(self.bundle, tuple(fn(c) for c in self.components))

    def is_zero(self):
        return not any(self.components)

    def __eq__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        return self.bundle == other.bundle and (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"Section{self.components}"


def filtration_order(section):
    r"""Largest frame degree among components that survive ``y = 0``; :math:`-\infty` if none."""
    bundle = section.bundle
    return _max_order(bundle, bundle.section_terms(section.components), restrict=True)


@dataclass(frozen=True, eq=False)
class ConnectionData:
    r"""Connection :math:`\nabla = d + \sum_j A_j\, dz^j` over the coordinates ``x1..xl, y1..yk``.

    Construction checks that the restriction to ``M`` preserves the filtration, that the
    curvature has filtration order at most 2, and that the induced End connection has
    filtration order 0 along ``M``.
    """

    bundle: FilteredBundle
    A: tuple
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        chart = self.bundle.chart
        if len(self.A) != chart.n:
            raise ValueError(f"{len(self.A)} connection matrices, expected {chart.n}")
        object.__setattr__(self, "A", tuple(
            chart.mat_truncate(m if isinstance(m, DomainMatrix) else chart.matrix(m)) for m in self.A))
        if self.check:
            problems = self.violations()
            if problems:
                raise ValueError("connection violates the rescaling conditions: "
                                 + "; ".join(problems))

    @classmethod
    def flat(cls, bundle):
        r = bundle.rank
        return cls(bundle, tuple(bundle.chart.mat_zero(r) for _ in range(bundle.chart.n)))

    def _index(self, j):
        return self.bundle.chart.coords.index(j) if isinstance(j, str) else j

    def nabla(self, j, section):
        r"""Covariant derivative :math:`\nabla_{\partial_j}` of a section."""
        j = self._index(j)
        name = self.bundle.chart.coords[j]
        chart = self.bundle.chart
        return section.map(lambda p: chart.diff(p, name)) + section.apply(self.A[j])

    def nabla_field(self, components, section):
        r"""Covariant derivative along :math:`\sum_j v^j \partial_j`."""
        out = Section.zero(self.bundle)
        for j, v in enumerate(components):
            if v:
                out = out + self.nabla(j, section).scale(self.bundle.chart.ring(v))
        return out

    def nabla_end(self, j, phi):
        r"""Induced End connection :math:`\partial_j\phi + [A_j, \phi]`."""
        j = self._index(j)
        chart = self.bundle.chart
        name = chart.coords[j]
        dphi = chart.mat_apply(phi, lambda p: chart.diff(p, name))
        return chart.mat_truncate(dphi + self.A[j] * phi - phi * self.A[j])

    def curvature(self, j, k):
        r"""Curvature component :math:`K_{jk} = \partial_j A_k - \partial_k A_j + [A_j, A_k]`."""
        chart = self.bundle.chart
        dj = chart.mat_apply(self.A[k], lambda p: chart.diff(p, chart.coords[j]))
        dk = chart.mat_apply(self.A[j], lambda p: chart.diff(p, chart.coords[k]))
        return chart.mat_truncate(dj - dk + self.A[j] * self.A[k] - self.A[k] * self.A[j])

    def radial(self):
        r"""Connection matrix along the Euler field :math:`\sum_j y^j\partial_{y_j}`."""
        chart = self.bundle.chart
        l = self.bundle.model.l
        out = chart.mat_zero(self.bundle.rank)
        for j in range(self.bundle.model.k):
            out = out + self.A[l + j] * chart.x[l + j]
        return chart.mat_truncate(out)

    # the three rescaling conditions

    def check_restriction(self):
        """Along ``M`` the tangential connection preserves the filtration."""
        bundle = self.bundle
        return [f"A_{bundle.chart.coords[i]} has order {o} on M"
                for i in range(bundle.model.l)
                for o in [end_filtration_order(bundle, self.A[i])] if o > 0]

    def check_curvature(self):
        bundle = self.bundle
        n = bundle.chart.n
        return [f"K_({bundle.chart.coords[j]},{bundle.chart.coords[k]}) has order {o} on M"
                for j in range(n) for k in range(j + 1, n)
                for o in [end_filtration_order(bundle, self.curvature(j, k))] if o > 2]

    def check_end_connection(self):
        """``[A_j, E]`` has order at most ``deg E`` on ``M`` for every elementary ``E``."""
        bundle = self.bundle
        out = []
        for j in range(bundle.chart.n):
            for E, deg in bundle.end_basis():
                comm = self.A[j] * E - E * self.A[j]
                o = end_filtration_order(bundle, comm)
                if o > deg:
                    out.append(f"[A_{bundle.chart.coords[j]}, E] raises order {deg} to {o}")
        return out

    def violations(self):
        return self.check_restriction() + self.check_curvature() + self.check_end_connection()


@dataclass(frozen=True, eq=False)
class DiffOp:
    r"""Differential operator :math:`\sum \phi\,\nabla_{j_1}\cdots\nabla_{j_s}` in normal form.

    ``terms`` maps a word of coordinate indices to its End-valued prefactor. The word
    ``(j1, j2)`` stands for :math:`\nabla_{j_1}\nabla_{j_2}`.
    """

    connection: ConnectionData
    terms: dict
    declared_order: int = None

    def __post_init__(self):
        chart = self.connection.bundle.chart
        clean = {}
        for word, phi in self.terms.items():
            phi = chart.mat_truncate(phi)
            if any(phi.to_list_flat()):
                clean[tuple(word)] = phi
        object.__setattr__(self, "terms", clean)
        if self.declared_order is not None and self.getzler_order() > self.declared_order:
            raise ValueError(f"declared Getzler order {self.declared_order} is below "
                             f"{self.getzler_order()}")

    @classmethod
    def multiplication(cls, connection, phi):
        return cls(connection, {(): phi})

    @classmethod
    def derivative(cls, connection, *word):
        eye = connection.bundle.chart.mat_eye(connection.bundle.rank)
        return cls(connection, {tuple(connection._index(j) for j in word): eye})

    def getzler_order(self):
        bundle = self.connection.bundle
        return max((getzler_order(bundle, phi) + len(word) for word, phi in self.terms.items()),
                   default=NEG_INF)

    def apply(self, section):
        out = Section.zero(section.bundle)
        for word, phi in self.terms.items():
            s = section
            for j in reversed(word):
                s = self.connection.nabla(j, s)
            out = out + s.apply(phi)
        return out

    def _pull(self, word, phi):
        if not word:
            return [(phi, ())]
        out = []
        for psi, w in self._pull(word[1:], phi):
            out.append((self.connection.nabla_end(word[0], psi), w))
            out.append((psi, (word[0],) + w))
        return out

    def compose(self, other):
        """Normal form of ``self o other``."""
        if other.connection is not self.connection:
            raise ValueError("operators built on different connections")
        terms = {}
        for w1, phi1 in self.terms.items():
            for w2, phi2 in other.terms.items():
                for psi, w in self._pull(w1, phi2):
                    key = w + w2
                    prod = phi1 * psi
                    terms[key] = terms[key] + prod if key in terms else prod
        return DiffOp(self.connection, terms)

    __matmul__ = compose


def synchronous_frame(connection, N=DEFAULT_TRUNCATION):
    r"""Homogeneous pieces :math:`P_0, \dots, P_N` of the frame solving :math:`\nabla_{\mathcal R}\tilde e = 0`.

    Column ``i`` of :math:`\sum_m P_m` is the synchronous extension of ``e_i`` up to y-degree ``N``.
    """
    bundle = connection.bundle
    chart = bundle.chart
    r = bundle.rank
    radial = connection.radial()
    entries = radial.to_list()
    Q = {}
    for a in range(r):
        for b in range(r):
            for deg, part in bundle.y_parts(entries[a][b]).items():
                Q.setdefault(deg, [[chart.zero()] * r for _ in range(r)])[a][b] = part
    Q = {deg: chart.matrix(rows) for deg, rows in Q.items()}
    P = [chart.mat_eye(r)]
    for m in range(1, N + 1):
        acc = chart.mat_zero(r)
        for a in range(1, m + 1):
            if a in Q:
                acc = acc + Q[a] * P[m - a]
        P.append(chart.mat_truncate(acc * chart.ring(QQ_I(QQ(-1, m)))))
    return P


def _check_truncation(N):
    if not 1 <= N <= MAX_TRUNCATION:
        raise ValueError(f"truncation N must lie in [1, {MAX_TRUNCATION}], got {N}")


def _vector_y_parts(section):
    parts = {}
    bundle = section.bundle
    for i, c in enumerate(section.components):
        for deg, part in bundle.y_parts(c).items():
            parts.setdefault(deg, [0] * bundle.rank)[i] = part
    return {deg: Section(bundle, tuple(v)) for deg, v in parts.items()}


def taylor_expand(section, connection, N=DEFAULT_TRUNCATION):
    r"""Synchronous Taylor coefficients :math:`\sigma_I` for :math:`|I| < N`.

    Returns:
        list of ``(I, Section)`` sorted by ``I``; each value is y-free and stands for its
        synchronous extension.

    Raises:
        ValueError: if ``N`` lies outside the supported truncation range.
    """
    _check_truncation(N)
    bundle = section.bundle
    chart = bundle.chart
    P = synchronous_frame(connection, N)
    parts = _vector_y_parts(section)
    g = []
    for m in range(N):
        gm = parts.get(m, Section.zero(bundle))
        for a in range(1, m + 1):
            gm = gm - g[m - a].apply(P[a])
        g.append(gm)
    l, k = bundle.model.l, bundle.model.k
    coefficients = {}
    for gm in g:
        for i, c in enumerate(gm.components):
            for monom, coeff in c.items():
                I = tuple(monom[l:l + k])
                rest = tuple(0 if l <= s < l + k else e for s, e in enumerate(monom))
                vec = coefficients.setdefault(I, [chart.zero()] * bundle.rank)
                vec[i] = vec[i] + chart.ring({rest: coeff})
    return [(I, Section(bundle, tuple(v))) for I, v in sorted(coefficients.items())
            if any(v)]


def taylor_remainder(section, connection, expansion, N=DEFAULT_TRUNCATION):
    r"""Part of :math:`\sigma - \sum_I y^I \tilde\sigma_I` of y-degree below ``N`` (zero when the expansion is right)."""
    bundle = section.bundle
    chart = bundle.chart
    frame = synchronous_frame(connection, N)
    total = frame[0]
    for Pm in frame[1:]:
        total = total + Pm
    out = section
    for I, coeff in expansion:
        mono = chart.monomial(dict(zip(bundle.model.y_names, I)))
        out = out - coeff.apply(total).scale(mono)
    return out.map(lambda p: sum((part for deg, part in bundle.y_parts(p).items() if deg < N),
                                 chart.zero()))


def taylor_order(section, connection, N=DEFAULT_TRUNCATION):
    r"""Taylor order :math:`\min_I (|I| - o^f(\sigma_I))` from the jet of length ``N``.

    The value is certified when it is at most ``N - max_degree``; the zero section
    gets :math:`+\infty`.
    """
    if section.is_zero():
        return OrderResult(POS_INF, True, N)
    best = POS_INF
    for I, coeff in taylor_expand(section, connection, N):
        best = min(best, sum(I) - filtration_order(coeff))
    certified = best <= N - section.bundle.max_degree
    if not certified:
        logger.debug(f"taylor order {best} not certified at N={N}")
    return OrderResult(best, certified, N)


def _normal_words(k, bound):
    """Multi-indices over ``k`` normal directions with total degree at most ``bound``, shortest first."""
    return sorted((a for a in product(range(bound + 1), repeat=k) if sum(a) <= bound), key=sum)


def scaling_order_bruteforce(section, connection, op_bound=3):
    r"""Scaling order :math:`\min_D (o^g(D) - o^f(D\sigma))` over ``D = E \nabla^\alpha``.

    ``E`` runs through the End basis and :math:`\nabla^\alpha` through ordered words in the
    normal derivatives with :math:`|\alpha| \le` ``op_bound``. Longer words can only give
    values of at least ``op_bound + 1 - max_degree``; below that the result is certified.
    """
    if op_bound < 0:
        raise ValueError(f"op_bound must be >= 0, got {op_bound}")
    bundle = section.bundle
    if section.is_zero():
        return OrderResult(POS_INF, True, op_bound)
    l, k = bundle.model.l, bundle.model.k
    derived = {(0,) * k: section}
    basis = bundle.end_basis()
    best = POS_INF
    for alpha in _normal_words(k, op_bound):
        if alpha not in derived:
            # strip the outermost derivative: the first nonzero slot
            j = next(i for i, a in enumerate(alpha) if a)
            inner = tuple(a - (1 if i == j else 0) for i, a in enumerate(alpha))
            derived[alpha] = connection.nabla(l + j, derived[inner])
        v = derived[alpha]
        if v.is_zero():
            continue
        for E, deg in basis:
            f = filtration_order(v.apply(E))
            if f != NEG_INF:
                best = min(best, deg + sum(alpha) - f)
    certified = best <= op_bound + 1 - bundle.max_degree
    return OrderResult(best, certified, op_bound)


@dataclass(frozen=True, eq=False)
class LaurentSection:
    r"""Finite sum :math:`\sum_p s_p t^{-p}` of sections."""

    bundle: FilteredBundle
    terms: dict

    def __post_init__(self):
        object.__setattr__(self, "terms", {p: s for p, s in self.terms.items() if not s.is_zero()})

    def __add__(self, other):
        terms = dict(self.terms)
        for p, s in other.terms.items():
            terms[p] = terms[p] + s if p in terms else s
        return LaurentSection(self.bundle, terms)

    def shift(self, power):
        """Multiply by ``t**power``."""
        return LaurentSection(self.bundle, {p - power: s for p, s in self.terms.items()})

    def map(self, fn):
        """Apply a linear map ``Section -> Section`` termwise."""
        return LaurentSection(self.bundle, {p: fn(s) for p, s in self.terms.items()})


def section_membership(s, connection, N=DEFAULT_TRUNCATION):
    r"""True iff :math:`o^{sc}(s_p) \ge p` for every term.

    Raises:
        RuntimeError: if a jet of length ``N`` cannot decide a term.
    """
    for p, sp in s.terms.items():
        order = taylor_order(sp, connection, N)
        if order.certified:
            if order.value < p:
                return False
        elif N - s.bundle.max_degree < p:
            raise RuntimeError(f"membership of the t^-{p} term undecided at N={N}")
    return True


def synchronous_extension(connection, i, N=DEFAULT_TRUNCATION):
    r"""The frame element :math:`\tilde e_i t^{q_i}` of the rescaled module."""
    bundle = connection.bundle
    total = synchronous_frame(connection, N)
    column = [bundle.chart.zero()] * bundle.rank
    for Pm in total:
        rows = Pm.to_list()
        for a in range(bundle.rank):
            column[a] = column[a] + rows[a][i]
    return LaurentSection(bundle, {-bundle.degrees[i]: Section(bundle, tuple(column))})


def standard_frame(connection, N=DEFAULT_TRUNCATION):
    return [synchronous_extension(connection, i, N) for i in range(connection.bundle.rank)]


def eval_section_generic(s, point, lam):
    r"""Value :math:`\sum_p s_p(v)\lambda^{-p}` at a point of the chart with :math:`\lambda \ne 0`."""
    lam = lam if isinstance(lam, QQ_I.dtype) else QQ_I(lam)
    if not lam:
        raise ValueError("lambda = 0 is the zero fiber: use eval_section_zero")
    bundle = s.bundle
    chart = bundle.chart
    names = bundle.model.x_names + bundle.model.y_names
    if len(point) != len(names):
        raise ValueError(f"point of length {len(point)}, expected {len(names)}")
    values = dict(zip(names, point))
    out = [chart.zero()] * bundle.rank
    for p, sp in s.terms.items():
        for i, c in enumerate(sp.components):
            out[i] = out[i] + chart.evaluate(c, values) * lam**(-p)
    return tuple(out)


def eval_section_zero(s, connection, m, Xm, N=DEFAULT_TRUNCATION):
    r"""Zero-fiber value :math:`\varepsilon_m(\exp(t\nabla_X)s)` in :math:`\mathrm{gr}(F)_m`.

    The coefficient of :math:`t^{-j}` in :math:`\exp(t\nabla_X)s` is
    :math:`c_j = \sum_k \nabla_X^k s_{j+k}/k!`. Component ``i`` of the graded value is read
    from :math:`c_{-q_i}` at ``(m, 0)``; with Lie parameters of weight ``w`` the
    :math:`X^\beta` part is read from :math:`c_{-(q_i + w|\beta|)}`.

    Args:
        s (LaurentSection): member of the rescaled module.
        connection (ConnectionData): the connection defining the module.
        m (sequence): base point.
        Xm (sequence): normal vector, rationals or chart polynomials.

    Returns:
        tuple of polynomials, one per frame component.

    Raises:
        ValueError: if ``s`` is not in the rescaled module.
    """
    if not section_membership(s, connection, N):
        raise ValueError("section is not in the rescaled module")
    bundle = s.bundle
    chart = bundle.chart
    model = bundle.model
    if len(Xm) != model.k:
        raise ValueError(f"normal vector of length {len(Xm)}, expected {model.k}")
    field_ = [0] * model.l + [chart.ring(v) for v in Xm]
    lowest = -bundle.max_degree
    c = {}
    for p, sp in s.terms.items():
        v, k = sp, 0
        while p - k >= lowest and not v.is_zero():
            term = v.scale(chart.ring(QQ_I(QQ(1, factorial(k)))))
            c[p - k] = c[p - k] + term if p - k in c else term
            v = connection.nabla_field(field_, v)
            k += 1
    lo, hi = chart.n, chart.n + chart.d
    out = []
    for i, q in enumerate(bundle.degrees):
        value = chart.zero()
        for key, cj in c.items():
            comp = bundle.evaluate_base(cj.components[i], m)
            for monom, coeff in comp.items():
                if -key == q + bundle.param_weight * sum(monom[lo:hi]):
                    value += chart.ring({monom: coeff})
        out.append(value)
    return tuple(out)


def _constant(p):
    if not p.is_ground:
        raise ValueError(f"frame value {p} is not a number: substitute parameters first")
    return p.LC


def frame_rank_test(frame, connection, generic_points=(), zero_points=(), N=DEFAULT_TRUNCATION):
    r"""True iff the frame evaluates to linearly independent vectors at every sample.

    ``generic_points`` are ``(point, lam)`` pairs and ``zero_points`` are ``(m, Xm)`` pairs.
    """
    samples = [[eval_section_generic(s, point, lam) for s in frame] for point, lam in generic_points]
    samples += [[eval_section_zero(s, connection, m, Xm, N) for s in frame] for m, Xm in zero_points]
    for vectors in samples:
        rows = [[_constant(c) for c in vec] for vec in vectors]
        M = DomainMatrix(rows, (len(rows), len(rows[0])), QQ_I)
        if M.rank() < len(frame):
            logger.info(f"frame rank drops to {M.rank()} < {len(frame)}")
            return False
    return True


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    witness: str = None

    def __bool__(self):
        return self.member


def _form_membership(model, terms):
    """Trivially filtered flat module on forms: ``s_p`` must vanish to order ``p`` along ``M``."""
    for p, form in terms.items():
        for blade, c in form.terms.items():
            if p > 0 and not model.vanishes_to_order(c, p):
                return MembershipReport(False, f"t^-{p} coefficient {c} on dx{blade} vanishes "
                                               f"to order {model.y_degree(c)} < {p}")
    return MembershipReport(True)


def clifford_action(one_form, alpha):
    r"""Clifford action :math:`c(v) = v\wedge - \iota(v^\sharp)` of a one-form on forms (flat metric)."""
    chart = alpha.chart
    dual = VectorField(chart, tuple(one_form.coefficient((i,)) for i in range(chart.n)))
    return one_form.wedge(alpha) - iota(dual, alpha)


def hodge_codifferential(alpha):
    r"""Flat codifferential :math:`d^* = -\sum_j \iota(\partial_j)\partial_j`."""
    chart = alpha.chart
    out = EqForm.zero(chart)
    for j, name in enumerate(chart.coords):
        dj = alpha.map_coeffs(lambda p, name=name: chart.diff(p, name))
        out = out - iota(VectorField.coordinate(chart, j), dj)
    return out


def witten_operator(one_form, terms):
    r"""Apply :math:`t(d + d^* + t^{-2}c(\omega))` to ``{p: form}`` standing for :math:`\sum_p s_p t^{-p}`."""
    out = {}
    for p, form in terms.items():
        for key, value in ((p - 1, d(form) + hodge_codifferential(form)),
                           (p + 1, clifford_action(one_form, form))):
            out[key] = out[key] + value if key in out else value
    return {p: f for p, f in out.items() if not f.is_zero()}


def witten_membership(model, f, terms):
    r"""Check that the Witten-deformed operator preserves the trivially filtered module on :math:`\Lambda`.

    Args:
        model (LocalModel): chart ``(x, y)``; forms live on all ``l + k`` coordinates.
        f: Morse-Bott function (chart polynomial), or a closed one-form as an ``EqForm``
            for the Novikov variant.
        terms (dict): ``p -> EqForm`` for a member :math:`\sum_p s_p t^{-p}`.

    Returns:
        MembershipReport: truthy iff the image is a member; otherwise carries a witness.

    Raises:
        ValueError: if the input is not a member or the one-form is not closed.
    """
    chart = model.chart
    if isinstance(f, EqForm):
        if not d(f).is_zero():
            raise ValueError("Novikov one-form must be closed")
        one_form = f
    else:
        one_form = d(EqForm.scalar(chart, f))
    if not _form_membership(model, terms):
        raise ValueError("input is not in the rescaled module")
    return _form_membership(model, witten_operator(one_form, terms))


def form_generators(model):
    """Module generators ``e_I t^0`` of the trivially filtered module on forms."""
    chart = model.chart
    return [{0: EqForm.dx(chart, *blade)} for blade in blades(chart.n)]
