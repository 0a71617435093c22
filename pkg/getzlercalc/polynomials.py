###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Polynomial charts: coordinates, Lie-algebra parameters and auxiliary variables over QQ<I>.
"""
from dataclasses import dataclass, field
from functools import cached_property

from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyRing


@dataclass(frozen=True)
class ChartRing:
    r"""Polynomial ring :math:`\mathbb{Q}(i)[x, X, a]` of a chart.

    ``coords`` are chart coordinates, ``params`` are the Lie-algebra parameters
    :math:`X_1, \dots, X_d`, truncated at total degree ``J`` after every product, and
    ``aux`` are further untruncated variables (heat time, symbolic base points).

    Args:
        coords (tuple[str]): coordinate names.
        params (tuple[str]): Lie parameter names.
        J (int): truncation order in the Lie parameters.
        aux (tuple[str]): auxiliary variable names.
    """

    coords: tuple = ()
    params: tuple = ()
    J: int = 0
    aux: tuple = field(default=())

    def __post_init__(self):
        names = self.coords + self.params + self.aux
        if len(set(names)) != len(names):
            raise ValueError(f"repeated variable names in chart: {names}")
        if self.J < 0:
            raise ValueError(f"truncation order J must be >= 0, got {self.J}")

    @classmethod
    def standard(cls, n, d=0, J=0, coord="x", param="X", aux=()):
        return cls(tuple(f"{coord}{i + 1}" for i in range(n)),
                   tuple(f"{param}{i + 1}" for i in range(d)), J, tuple(aux))

    @property
    def n(self):
        return len(self.coords)

    @property
    def d(self):
        return len(self.params)

    @cached_property
    def ring(self):
        names = self.coords + self.params + self.aux
        if not names:
            names = ("_u",)
        return PolyRing(names, QQ_I)

    @property
    def domain(self):
        return QQ_I

    @cached_property
    def x(self):
        return tuple(self.ring.gens[:self.n])

    @cached_property
    def X(self):
        return tuple(self.ring.gens[self.n:self.n + self.d])

    @cached_property
    def a(self):
        k = self.n + self.d
        return tuple(self.ring.gens[k:k + len(self.aux)])

    def gen(self, name):
        return self.ring.gens[self._index(name)]

    def _index(self, name):
        names = self.coords + self.params + self.aux
        if name not in names:
            raise ValueError(f"{name} is not a variable of this chart")
        return names.index(name)

    def const(self, c):
        return self.ring(c)

    def zero(self):
        return self.ring.zero

    def one(self):
        return self.ring.one

    def param_degree(self, p):
        """Largest total degree in the Lie parameters among the monomials of ``p``."""
        if not p:
            return -1
        lo, hi = self.n, self.n + self.d
        return max(sum(m[lo:hi]) for m in p.itermonoms())

    def coord_degree(self, p):
        if not p:
            return -1
        return max(sum(m[:self.n]) for m in p.itermonoms())

    def truncate(self, p):
        """Drop monomials of Lie-parameter degree above ``J``."""
        if not self.d or not p:
            return p
        lo, hi = self.n, self.n + self.d
        keep = {m: c for m, c in p.items() if sum(m[lo:hi]) <= self.J}
        return self.ring.from_dict(keep) if keep else self.ring.zero

    def mul(self, p, q):
        return self.truncate(p * q)

    def convert(self, p, other):
        """Move ``p`` from chart ``other`` to this chart by variable name."""
        if other is self or other == self:
            return p
        return self.truncate(p.set_ring(self.ring))

    def evaluate(self, p, values):
        """Substitute ``{name: value}`` and keep the result in this ring."""
        if not values:
            return p
        idx = {self._index(k): self.ring(v) for k, v in values.items()}
        out = self.ring.zero
        for monom, coeff in p.items():
            term = self.ring({tuple(0 if i in idx else e
                                    for i, e in enumerate(monom)): coeff})
            for i, value in idx.items():
                if monom[i]:
                    term = term * value**monom[i]
            out += term
        return self.truncate(out)

    def compose(self, p, substitution):
        """Substitute polynomials for variables: ``{name: polynomial}``."""
        if not substitution:
            return p
        pairs = [(self.ring.gens[self._index(k)], v)
                 for k, v in substitution.items()]
        return self.truncate(p.compose(pairs))

    def diff(self, p, name):
        return p.diff(self.ring.gens[self._index(name)])

    def homogeneous_parts(self, p, names=None):
        """Split ``p`` by total degree in ``names`` (default: coordinates)."""
        idx = [self._index(k) for k in (names or self.coords)]
        parts = {}
        for monom, coeff in p.items():
            deg = sum(monom[i] for i in idx)
            parts.setdefault(deg, {})[monom] = coeff
        return {deg: self.ring.from_dict(terms)
                for deg, terms in sorted(parts.items())}

    def monomial(self, exponents):
        """Monomial from ``{name: exponent}``."""
        m = [0] * self.ring.ngens
        for k, e in exponents.items():
            m[self._index(k)] = e
        return self.ring({tuple(m): QQ_I.one})

    def coefficient(self, p, exponents):
        """Coefficient polynomial of ``p`` at the monomial ``{name: exponent}`` in the given
        variables; the remaining variables stay symbolic."""
        idx = {self._index(k): e for k, e in exponents.items()}
        out = {}
        for monom, coeff in p.items():
            if all(monom[i] == e for i, e in idx.items()):
                rest = tuple(0 if i in idx else e for i, e in enumerate(monom))
                out[rest] = out.get(rest, QQ_I.zero) + coeff
        out = {m: c for m, c in out.items() if c}
        return self.ring.from_dict(out) if out else self.ring.zero

    # Dense matrices over the chart ring. Sparse DomainMatrix formats keep stale
    # zeros after applyfunc, so every matrix here is built dense from lists.

    def matrix(self, rows):
        rows = [[self.ring(e) for e in row] for row in rows]
        return DomainMatrix(rows, (len(rows), len(rows[0]) if rows else 0),
                            self.ring.to_domain())

    def mat_zero(self, r, c=None):
        c = r if c is None else c
        return self.matrix([[0] * c for _ in range(r)])

    def mat_eye(self, r):
        return self.matrix([[1 if i == j else 0 for j in range(r)]
                            for i in range(r)])

    def mat_apply(self, m, fn):
        return self.matrix([[fn(e) for e in row] for row in m.to_list()])

    def mat_truncate(self, m):
        return self.mat_apply(m, self.truncate)

    def mat_convert(self, m, other):
        return self.matrix([[self.convert(e, other) for e in row]
                            for row in m.to_list()])

    def apply(self, c, fn):
        """Apply ``fn`` to a scalar coefficient or to every entry of a matrix one."""
        if isinstance(c, DomainMatrix):
            return self.mat_apply(c, fn)
        return fn(c)


def mat_is_zero(m):
    return all(not e for e in m.to_list_flat())


def mat_trace(m):
    rows = m.to_list()
    out = m.domain.zero
    for i in range(min(len(rows), len(rows[0]) if rows else 0)):
        out += rows[i][i]
    return out
