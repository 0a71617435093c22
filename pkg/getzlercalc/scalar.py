###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Exact scalars: finite sums of Gaussian rationals times powers of 2 pi.
"""
import math

from sympy import QQ
from sympy.polys.domains import QQ_I
from sympy.polys.polyerrors import CoercionFailed

_I = QQ_I(0, 1)


def _as_rational(q):
    if isinstance(q, tuple):
        return QQ(*q)
    return QQ(q)


def _as_gaussian(c):
    if isinstance(c, tuple):
        return QQ_I(_as_rational(c))
    return QQ_I.convert(c)


class Scalar:
    r"""Exact number :math:`\sum_m c_m (2\pi)^m` with Gaussian-rational :math:`c_m`.

    ``Scalar(q, i_pow, twopi_pow)`` is the monomial :math:`q \cdot i^{k} \cdot (2\pi)^{m}`.
    The power of ``i`` is absorbed into the ``QQ_I`` coefficient, so ``terms`` (power of
    :math:`2\pi` -> nonzero coefficient) is the canonical form. Since :math:`2\pi` is
    transcendental over :math:`\mathbb{Q}(i)` these are the Laurent polynomials
    :math:`\mathbb{Q}(i)[2\pi, (2\pi)^{-1}]` and the ring operations are exact.

    Args:
        q: rational coefficient (``int``, ``(num, den)`` tuple or ``QQ`` element).
        i_pow (int): power of the imaginary unit, any integer.
        twopi_pow (int): power of :math:`2\pi`, any integer.
    """

    __slots__ = ("terms",)

    def __init__(self, q=0, i_pow=0, twopi_pow=0):
        c = QQ_I(_as_rational(q)) * _I**(i_pow % 4)
        self.terms = {twopi_pow: c} if c else {}

    @classmethod
    def from_terms(cls, terms):
        """Build from ``{power of 2 pi: coefficient in QQ_I}``."""
        out = cls()
        for m, c in terms.items():
            c = _as_gaussian(c)
            if c:
                out.terms[int(m)] = c
        return out

    @classmethod
    def one(cls):
        return cls(1)

    @classmethod
    def i(cls):
        return cls(1, 1)

    @classmethod
    def twopi(cls, power=1):
        return cls(1, 0, power)

    @classmethod
    def from_domain(cls, z):
        """Embed a ``QQ_I`` element."""
        return cls.from_terms({0: z})

    @staticmethod
    def _lift(other):
        if isinstance(other, Scalar):
            return other
        return Scalar.from_domain(other)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_monomial(self):
        return len(self.terms) == 1

    def __eq__(self, other):
        try:
            other = self._lift(other)
        except (CoercionFailed, TypeError):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __neg__(self):
        return Scalar.from_terms({m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return Scalar.from_terms(terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 + m2
                terms[m] = terms[m] + c1 * c2 if m in terms else c1 * c2
        return Scalar.from_terms(terms)

    __rmul__ = __mul__

    def __pow__(self, e):
        if not isinstance(e, int):
            raise ValueError("Scalar powers must be integers")
        if e < 0:
            if not self.terms:
                raise ZeroDivisionError("zero Scalar has no inverse")
            if not self.is_monomial():
                raise NotImplementedError(f"{self} is not a monomial in 2pi and has no inverse")
            ((m, c),) = self.terms.items()
            return Scalar.from_terms({-m: QQ_I.one / c})**(-e)
        out = Scalar.one()
        for _ in range(e):
            out = out * self
        return out

    def to_domain(self):
        """Return the value in ``QQ_I``; only defined without powers of 2 pi."""
        if any(self.terms):
            raise ValueError(f"{self} carries powers of 2pi")
        return self.terms.get(0, QQ_I.zero)

    def split(self):
        """Return ``(value in QQ_I, power of 2 pi)`` of a monomial."""
        if not self.terms:
            return QQ_I.zero, 0
        if not self.is_monomial():
            raise ValueError(f"{self} is not a monomial in 2pi")
        ((m, c),) = self.terms.items()
        return c, m

    def to_complex(self):
        return sum((complex(float(c.x), float(c.y)) * (2 * math.pi)**m
                    for m, c in self.terms.items()), 0j)

    def __repr__(self):
        if not self.terms:
            return "Scalar(0)"
        parts = [f"({c})" + (f"*(2pi)^{m}" if m else "")
                 for m, c in sorted(self.terms.items())]
        return "Scalar(" + " + ".join(parts) + ")"


def scaled_equal(s1, p1, s2, p2):
    r"""Compare ``s1 * p1`` with ``s2 * p2`` exactly.

    ``s1, s2`` are :class:`Scalar` prefactors and ``p1, p2`` are ring elements over
    ``QQ_I`` (domain elements or polynomials). Each power of :math:`2\pi` is compared on
    its own since the powers are independent over the polynomials.
    """
    zero = QQ_I.zero
    return all(p1 * s1.terms.get(m, zero) == p2 * s2.terms.get(m, zero)
               for m in set(s1.terms) | set(s2.terms))
