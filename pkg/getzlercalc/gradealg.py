###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Exterior and Clifford algebras over exact coefficient rings
"""
import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

from .polynomials import mat_is_zero, mat_trace

EXTERIOR = "exterior"
CLIFFORD = "clifford"
ALGEBRAS = (EXTERIOR, CLIFFORD)


def _in_domain(m, c):
    """``(m, c)`` with the scalar ``c`` converted into the domain of the matrix ``m``."""
    if isinstance(c, PolyElement) and c.ring.to_domain() != m.domain:
        dom = m.domain.unify(c.ring.to_domain())
        m = m.convert_to(dom)
    return m, m.domain.convert(c)


def _coeff_mul(a, b):
    if isinstance(a, DomainMatrix):
        if isinstance(b, DomainMatrix):
            return a * b
        a, b = _in_domain(a, b)
        return a.mul(b)
    if isinstance(b, DomainMatrix):
        b, a = _in_domain(b, a)
        return b.rmul(a)
    return a * b


def _coeff_is_zero(c):
    if isinstance(c, DomainMatrix):
        return mat_is_zero(c)
    return not c


def _convert(c):
    if isinstance(c, int):
        return QQ_I(c)
    return c


@lru_cache(maxsize=None)
def blade_product(I, J, algebra):
    r"""Product of basis blades ``e_I * e_J`` as ``(sign, K)``.

    Blades are sorted tuples of 0-based indices. The reordering sign is
    :math:`(-1)^{\#\{(i, j) \in I \times J : i > j\}}`. In the exterior algebra an
    overlap gives ``(0, None)``; in the Clifford algebra every repeated generator
    contributes :math:`e_i^2 = -1` and ``K`` is the symmetric difference.
    """
    swaps = sum(1 for i in I for j in J if i > j)
    sign = -1 if swaps % 2 else 1
    common = set(I) & set(J)
    if common:
        if algebra == EXTERIOR:
            return 0, None
        if len(common) % 2:
            sign = -sign
    return sign, tuple(sorted(set(I) ^ set(J)))


def blades(n, k=None):
    """All blades of ``Λ(R^n)`` ordered by degree, or only those of degree ``k``."""
    degrees = range(n + 1) if k is None else (k,)
    return [I for d in degrees for I in combinations(range(n), d)]


@dataclass(frozen=True, eq=False)
class Multivector:
    r"""Element of :math:`\Lambda(\mathbb{R}^n)` or :math:`Cl(n)` with exact coefficients.

    ``terms`` maps sorted 0-based index tuples to coefficients. Coefficients are
    ``QQ_I`` elements, polynomials over ``QQ_I`` or dense ``DomainMatrix`` instances
    (twisted elements). Zero coefficients are never stored.

    Args:
        dim (int): dimension ``n`` of the generating space.
        terms (dict): blade -> coefficient.
        algebra (str): ``"exterior"`` or ``"clifford"``.
    """

    dim: int
    terms: dict
    algebra: str = EXTERIOR

    def __post_init__(self):
        if self.algebra not in ALGEBRAS:
            raise ValueError(f"unknown algebra {self.algebra}")
        clean = {}
        for blade, coeff in self.terms.items():
            blade = tuple(blade)
            if any(i < 0 or i >= self.dim for i in blade) or list(blade) != sorted(set(blade)):
                raise ValueError(f"invalid blade {blade} for dim {self.dim}")
            coeff = _convert(coeff)
            if not _coeff_is_zero(coeff):
                clean[blade] = coeff
        object.__setattr__(self, "terms", clean)

    @classmethod
    def zero(cls, n, algebra=EXTERIOR):
        return cls(n, {}, algebra)

    @classmethod
    def scalar(cls, n, c, algebra=EXTERIOR):
        return cls(n, {(): c}, algebra)

    @classmethod
    def basis(cls, n, blade, algebra=EXTERIOR, coeff=1):
        return cls(n, {tuple(blade): coeff}, algebra)

    @classmethod
    def vector(cls, n, coeffs, algebra=EXTERIOR):
        return cls(n, {(i,): c for i, c in enumerate(coeffs)}, algebra)

    def _new(self, terms, algebra=None):
        return dataclasses.replace(self, terms=terms,
                                   algebra=algebra or self.algebra)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if not isinstance(other, Multivector):
            raise TypeError(f"expected a Multivector, got {type(other)}")
        if other.dim != self.dim:
            raise ValueError(
                f"dimension mismatch: {self.dim} and {other.dim}")
        if other.algebra != self.algebra:
            raise ValueError(
                f"algebra mismatch: {self.algebra} and {other.algebra}")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for blade, c in other.terms.items():
            terms[blade] = terms[blade] + c if blade in terms else c
        return self._new(terms)

    def __neg__(self):
        return self._new({b: -c for b, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return (self.dim == other.dim and self.algebra == other.algebra
                and (self - other).is_zero())

    __hash__ = None

    def scale(self, c):
        """Left multiplication of every coefficient by ``c``."""
        c = _convert(c)
        return self._new({b: _coeff_mul(c, v) for b, v in self.terms.items()})

    def rscale(self, c):
        c = _convert(c)
        return self._new({b: _coeff_mul(v, c) for b, v in self.terms.items()})

    def map_coeffs(self, fn):
        return self._new({b: fn(c) for b, c in self.terms.items()})

    def product(self, other):
        self._check(other)
        terms = {}
        for I, a in self.terms.items():
            for J, b in other.terms.items():
                sign, K = blade_product(I, J, self.algebra)
                if not sign:
                    continue
                c = _coeff_mul(a, b)
                if sign < 0:
                    c = -c
                terms[K] = terms[K] + c if K in terms else c
        return self._new(terms)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return self.product(other)
        return self.rscale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k):
        out = Multivector.scalar(self.dim, 1, self.algebra)
        for _ in range(k):
            out = out.product(self)
        return out

    def grade(self, k):
        return self._new({b: c for b, c in self.terms.items() if len(b) == k})

    def even(self):
        return self._new({b: c for b, c in self.terms.items() if len(b) % 2 == 0})

    def odd(self):
        return self._new({b: c for b, c in self.terms.items() if len(b) % 2})

    def degree(self):
        """Largest blade length; ``-1`` for zero."""
        return max((len(b) for b in self.terms), default=-1)

    def is_homogeneous(self):
        return len({len(b) for b in self.terms}) <= 1

    def coefficient(self, blade, default=None):
        return self.terms.get(tuple(blade), default)

    def top(self):
        return self.terms.get(tuple(range(self.dim)))

    def scalar_part(self):
        return self.terms.get(())

    def retag(self, algebra):
        return self._new(dict(self.terms), algebra)

    def __repr__(self):
        if not self.terms:
            return f"Multivector[{self.algebra}](0)"
        body = " + ".join(
            f"({c})*e{''.join(str(i + 1) for i in b) or '0'}"
            for b, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])))
        return f"Multivector[{self.algebra}]({body})"


class TwistedElement(Multivector):
    r"""Element of :math:`Cl(n) \otimes M_r`, stored blade-wise with ``r x r``
    ``DomainMatrix`` coefficients."""

    @classmethod
    def from_entries(cls, n, r, entries, ring, algebra=CLIFFORD):
        """Build from an ``r x r`` nested list of Multivectors over ``ring``."""
        terms = {}
        for a in range(r):
            for b in range(r):
                for blade, c in entries[a][b].terms.items():
                    terms.setdefault(blade, [[ring.zero] * r for _ in range(r)])
                    terms[blade][a][b] += c
        dom = ring.to_domain()
        return cls(n, {blade: DomainMatrix(rows, (r, r), dom)
                       for blade, rows in terms.items()}, algebra)

    @classmethod
    def embed(cls, mv, matrix):
        """``mv ⊗ matrix``."""
        return cls(mv.dim, {b: _coeff_mul(c, matrix) for b, c in mv.terms.items()},
                   mv.algebra)

    @property
    def rank(self):
        for c in self.terms.values():
            return c.shape[0]
        return 0

    def entry(self, a, b):
        return Multivector(self.dim, {blade: c.to_list()[a][b]
                                      for blade, c in self.terms.items()},
                           self.algebra)


def wedge(a, b):
    """Exterior product."""
    if a.algebra != EXTERIOR or b.algebra != EXTERIOR:
        raise ValueError("wedge needs exterior-tagged multivectors")
    return a.product(b)


def clifford_mul(a, b):
    """Clifford product with ``e_i * e_i = -1``."""
    if a.algebra != CLIFFORD or b.algebra != CLIFFORD:
        raise ValueError("clifford_mul needs clifford-tagged multivectors")
    return a.product(b)


def quantize(a):
    r"""Quantization :math:`e_{i_1}\wedge\dots\wedge e_{i_k} \mapsto e_{i_1}\cdots e_{i_k}`."""
    if a.algebra != EXTERIOR:
        raise ValueError("quantize expects an exterior multivector")
    return a.retag(CLIFFORD)


def symbol_map(a):
    """Inverse of :func:`quantize`."""
    if a.algebra != CLIFFORD:
        raise ValueError("symbol_map expects a clifford multivector")
    return a.retag(EXTERIOR)


def contract(v, a):
    r"""Interior product :math:`\iota(v) a` on the exterior algebra.

    ``v`` is a sequence of ``n`` coefficients or a single index ``i`` meaning
    :math:`e_i`.
    """
    if a.algebra != EXTERIOR:
        raise ValueError("contract expects an exterior multivector")
    if isinstance(v, int):
        v = [1 if j == v else 0 for j in range(a.dim)]
    if len(v) != a.dim:
        raise ValueError(f"vector of length {len(v)} for dim {a.dim}")
    terms = {}
    for blade, c in a.terms.items():
        for pos, i in enumerate(blade):
            if not v[i]:
                continue
            K = blade[:pos] + blade[pos + 1:]
            t = _coeff_mul(_convert(v[i]), c)
            if pos % 2:
                t = -t
            terms[K] = terms[K] + t if K in terms else t
    return a._new(terms)


def spin_lift(A, algebra=CLIFFORD):
    r"""Spin lift :math:`\tau(A) = -\frac14 \sum_{ij} A_{ij} e_i e_j` of an ``n x n`` matrix.

    For antisymmetric ``A`` it satisfies :math:`[\tau(A), c(v)] = c(Av)`.
    """
    n = len(A)
    out = Multivector.zero(n, algebra)
    quarter = QQ_I(QQ(1, 4))
    for i in range(n):
        for j in range(n):
            if not A[i][j]:
                continue
            sign, K = blade_product((i,), (j,), algebra)
            if not sign:
                continue
            c = _coeff_mul(-quarter * sign, _convert(A[i][j]))
            out = out + Multivector(n, {K: c}, algebra)
    return out


def berezin_str(a, grading=None):
    r"""Berezin supertrace :math:`(-2i)^{n/2}\,\mathrm{tr}(a_{[n]})`.

    ``a_{[n]}`` is the coefficient of the top blade. Matrix coefficients are traced,
    or supertraced when ``grading`` (a list of ``+1/-1`` on the twisting factor) is
    given. The result lives in the coefficient ring.

    Raises:
        ValueError: if ``n`` is odd.
    """
    n = a.dim
    if n % 2:
        raise ValueError(f"Berezin supertrace needs even dimension, got {n}")
    const = QQ_I(0, -2)**(n // 2)
    top = a.top()
    if top is None:
        return QQ_I.zero
    if isinstance(top, DomainMatrix):
        if grading is None:
            value = mat_trace(top)
        else:
            rows = top.to_list()
            if len(grading) != len(rows):
                raise ValueError("grading length does not match twisting rank")
            value = top.domain.zero
            for k, g in enumerate(grading):
                value = value + rows[k][k] if g > 0 else value - rows[k][k]
    else:
        value = top
    return value * const
