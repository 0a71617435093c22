"""
Exact one-variable power series behind the characteristic forms.

All coefficients are ``QQ`` elements; lists are indexed by the power of ``z``.
"""
from functools import lru_cache

from sympy import QQ
from sympy.polys.rings import ring
from sympy.polys.ring_series import rs_cosh, rs_log, rs_mul, rs_series_inversion, rs_sinh

_R, _z = ring("z", QQ)


def _coefficients(p, prec):
    return [p.get((k,), QQ.zero) for k in range(prec)]


@lru_cache(maxsize=None)
def _sinhc(prec):
    # sinh(z/2)/(z/2), obtained from the series of sinh(z/2) shifted down by one
    s = rs_sinh(_z / 2, _z, prec + 1)
    shifted = {}
    for (k,), c in s.items():
        if k >= 1:
            shifted[(k - 1,)] = c * 2
    return _R.from_dict(shifted)


@lru_cache(maxsize=None)
def ahat_coefficients(prec):
    r"""Coefficients of :math:`f(z) = (z/2)/\sinh(z/2)` up to ``z**(prec-1)``."""
    return tuple(_coefficients(rs_series_inversion(_sinhc(prec), _z, prec), prec))


@lru_cache(maxsize=None)
def log_ahat_coefficients(prec):
    r"""Coefficients of :math:`\log f(z)`; the constant term is 0."""
    f = rs_series_inversion(_sinhc(prec), _z, prec)
    return tuple(_coefficients(rs_log(f, _z, prec), prec))


@lru_cache(maxsize=None)
def coth_coefficients(prec):
    r"""Coefficients of :math:`h(z) = (z/2)\coth(z/2) = \cosh(z/2) f(z)`."""
    f = rs_series_inversion(_sinhc(prec), _z, prec)
    h = rs_mul(rs_cosh(_z / 2, _z, prec), f, _z, prec)
    return tuple(_coefficients(h, prec))
