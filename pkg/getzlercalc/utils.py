import logging
import random
from itertools import product

import numpy as np
import torch
from sympy import QQ
from sympy.polys.domains import QQ_I

from .dnc import LaurentFn, LocalModel
from .gradealg import EXTERIOR, Multivector, blades
from .rescale import ConnectionData, DiffOp, FilteredBundle, Section

logger = logging.getLogger()


def setup_seed(seed: int = 9):
    torch.manual_seed(seed)
    np.random.seed(seed)
    random.seed(seed)
    torch.backends.cudnn.deterministic = True
    torch.backends.cudnn.benchmark = False


def make_rng(seed):
    return np.random.default_rng(seed)


def random_rational(rng, bound=3, allow_zero=True):
    while True:
        num = int(rng.integers(-bound, bound + 1))
        den = int(rng.integers(1, bound + 1))
        if num or allow_zero:
            return QQ(num, den)


def random_gaussian(rng, bound=3, real=False):
    x = random_rational(rng, bound)
    y = QQ(0) if real else random_rational(rng, bound)
    return QQ_I(x, y)


def random_multivector(rng, n, algebra=EXTERIOR, density=0.5, bound=3, coeff=None):
    """Random multivector with about ``density`` of all blades populated.

    ``coeff(rng)`` overrides the default Gaussian-rational coefficient draw.
    """
    draw = coeff or (lambda g: random_gaussian(g, bound))
    terms = {I: draw(rng) for I in blades(n) if rng.random() < density}
    return Multivector(n, terms, algebra)


def monomials(nvars, max_degree, min_degree=0):
    """Exponent tuples in ``nvars`` variables with total degree in the given range."""
    return [e for e in product(range(max_degree + 1), repeat=nvars)
            if min_degree <= sum(e) <= max_degree]


def random_poly(rng, chart, names, max_degree, n_terms=3, bound=3, real=False,
                min_degree=0):
    """Random polynomial in the variables ``names`` of ``chart``."""
    exps = monomials(len(names), max_degree, min_degree)
    out = chart.zero()
    if not exps:
        return out
    for _ in range(n_terms):
        e = exps[int(rng.integers(len(exps)))]
        out += chart.monomial(dict(zip(names, e))) * random_gaussian(
            rng, bound, real)
    return chart.truncate(out)


def random_antisymmetric(n, draw, zero=0):
    """``n x n`` antisymmetric nested list with upper entries from ``draw()``."""
    rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = draw()
            rows[j][i] = -rows[i][j]
    return rows


def random_bundle(rng, l, k, r, max_degree=2):
    """Filtered bundle of rank ``r`` with random frame degrees in ``[0, max_degree]``."""
    degrees = tuple(int(q) for q in rng.integers(0, max_degree + 1, size=r))
    return FilteredBundle(LocalModel(l, k), degrees)


def random_connection(rng, bundle, n_terms=2, max_y_degree=2, bound=2):
    """Connection whose matrices have Getzler order at most 1 and order at most 0 along ``M``.

    Such connections satisfy the three rescaling conditions by construction.
    """
    model, chart, r = bundle.model, bundle.chart, bundle.rank
    y_exps = monomials(model.k, max_y_degree)
    x_exps = monomials(model.l, 1)
    matrices = []
    for _ in range(chart.n):
        rows = [[chart.zero()] * r for _ in range(r)]
        for _ in range(n_terms):
            a, b = int(rng.integers(r)), int(rng.integers(r))
            alpha = y_exps[int(rng.integers(len(y_exps)))]
            e = bundle.end_degrees[a][b]
            if (sum(alpha) == 0 and e > 0) or e - sum(alpha) > 1:
                continue
            beta = x_exps[int(rng.integers(len(x_exps)))]
            mono = chart.monomial({**dict(zip(model.y_names, alpha)),
                                   **dict(zip(model.x_names, beta))})
            rows[a][b] += mono * random_gaussian(rng, bound, real=True)
        matrices.append(chart.matrix(rows))
    return ConnectionData(bundle, tuple(matrices))


def random_section(rng, bundle, max_y_degree=3, n_terms=2, min_y_degree=0):
    chart, model = bundle.chart, bundle.model
    comps = []
    for _ in range(bundle.rank):
        p = random_poly(rng, chart, model.y_names, max_y_degree, n_terms, real=True,
                        min_degree=min_y_degree)
        comps.append(p * random_poly(rng, chart, model.x_names, 1, 1, real=True))
    return Section(bundle, tuple(comps))


def random_end(rng, bundle, n_terms=2):
    """Endomorphism with entries of y-degree at most 1."""
    chart, model, r = bundle.chart, bundle.model, bundle.rank
    rows = [[chart.zero()] * r for _ in range(r)]
    exps = monomials(model.k, 1)
    for _ in range(n_terms):
        a, b = int(rng.integers(r)), int(rng.integers(r))
        alpha = exps[int(rng.integers(len(exps)))]
        rows[a][b] += chart.monomial(dict(zip(model.y_names, alpha))) * random_gaussian(rng, real=True)
    return chart.matrix(rows)


def random_op(rng, connection):
    """Differential operator of order at most 1 built from ``connection``."""
    words = [(), (connection.bundle.model.l,), (0,)]
    terms = {}
    for _ in range(2):
        w = words[int(rng.integers(len(words)))]
        terms[w] = random_end(rng, connection.bundle)
    return DiffOp(connection, terms)


def sample_points(rng, model, n=10):
    """``n`` generic points ``(point, lam)`` and ``n`` zero-fiber points ``(m, Xm)``."""
    generic = [(tuple(random_rational(rng) for _ in range(model.l + model.k)),
                random_rational(rng, allow_zero=False)) for _ in range(n)]
    zero = [(tuple(random_rational(rng) for _ in range(model.l)),
             tuple(random_rational(rng) for _ in range(model.k))) for _ in range(n)]
    return generic, zero


def random_member(rng, model, max_p=2):
    """Laurent function whose ``t^-p`` coefficient vanishes to order ``p`` along the base."""
    chart = model.chart
    terms = {}
    for p in range(-1, max_p + 1):
        y_part = random_poly(rng, chart, model.y_names, max(p, 0) + 1, n_terms=2, real=True,
                             min_degree=max(p, 0))
        x_part = random_poly(rng, chart, model.x_names, 1, n_terms=2, real=True)
        terms[p] = y_part * x_part
    return LaurentFn(model, terms)


def random_form(rng, chart, max_degree=2):
    """Scalar form with random polynomial coefficients in coordinates and parameters."""
    from .eqforms import EqForm
    terms = {}
    for blade in blades(chart.n):
        if rng.random() < 0.5:
            terms[blade] = random_poly(rng, chart, chart.coords + chart.params, max_degree)
    return EqForm.from_terms(chart, terms)


def random_symbol(rng, chart, r, max_degree=2, density=0.4, bound=2):
    """Random ``r x r`` matrix-valued form on a symbol chart, polynomial in ``eta`` and ``X``."""
    from .eqforms import EqForm
    names = chart.coords + chart.params
    terms = {}
    for blade in blades(chart.n):
        if rng.random() < density:
            rows = [[random_poly(rng, chart, names, max_degree, 2, bound) for _ in range(r)]
                    for _ in range(r)]
            terms[blade] = chart.matrix(rows)
    return EqForm.from_terms(chart, terms)


def random_curvature_model(rng, chart, r=1, bound=2, with_moments=True):
    """Constant curvature data with antisymmetric ``R`` and moments linear in ``X``."""
    from .eqforms import EqForm
    from .symbols import CurvatureModel
    n = chart.n

    def two_form():
        return EqForm.from_terms(chart, {b: random_gaussian(rng, bound, real=True)
                                         for b in blades(n, 2) if rng.random() < 0.6})

    def linear():
        if not with_moments or not chart.d:
            return chart.zero()
        return random_poly(rng, chart, chart.params, 1, 2, bound, real=True, min_degree=1)

    R = random_antisymmetric(n, two_form, EqForm.zero(chart))
    mu = random_antisymmetric(n, linear, chart.zero())
    F = EqForm.from_terms(chart, {b: chart.matrix([[random_gaussian(rng, bound)
                                                    for _ in range(r)] for _ in range(r)])
                                  for b in blades(n, 2) if rng.random() < 0.6})
    mu_E = chart.matrix([[linear() for _ in range(r)] for _ in range(r)])
    return CurvatureModel(chart, R, mu, F, mu_E, r)


def random_clifford_model(rng, n=2, r=1, d=0, J=0, bound=2, check=True):
    """Clifford-model connection from random constant curvature data."""
    from .clifford_model import CliffordBundle, CliffordModel
    bundle = CliffordBundle.build(n, r, d, J)

    def so_n():
        return random_antisymmetric(n, lambda: random_gaussian(rng, bound, real=True), QQ_I(0))

    def twist():
        return [[random_gaussian(rng, bound) for _ in range(r)] for _ in range(r)]

    def neg(M):
        return [[-e for e in row] for row in M]

    R = [[None] * n for _ in range(n)]
    F = [[None] * n for _ in range(n)]
    zero_R = [[QQ_I(0)] * n for _ in range(n)]
    zero_F = [[QQ_I(0)] * r for _ in range(r)]
    for j in range(n):
        R[j][j], F[j][j] = zero_R, zero_F
        for k in range(j + 1, n):
            R[j][k], F[j][k] = so_n(), twist()
            R[k][j], F[k][j] = neg(R[j][k]), neg(F[j][k])
    return CliffordModel(bundle, R, F, check)


def random_rescaled_section(rng, model, n_terms=3, max_y_degree=1, extra_power=1):
    """Random member: combination of generators and of their images under t*nabla and t*c(e_k)."""
    from .clifford_model import module_generator
    from .gradealg import CLIFFORD
    bundle = model.bundle
    chart = bundle.chart
    n = bundle.dim
    exps = monomials(bundle.model.k, max_y_degree)
    out = None
    for _ in range(n_terms):
        i = int(rng.integers(bundle.rank))
        alpha = exps[int(rng.integers(len(exps)))]
        beta = None
        if chart.d and chart.J and rng.random() < 0.5:
            beta = tuple(int(b) for b in rng.integers(0, 2, size=chart.d))
            if sum(beta) > chart.J:
                beta = None
        s = module_generator(bundle, i, alpha, beta)
        move = rng.random()
        k = int(rng.integers(n))
        if move < 0.3:
            s = s.map(lambda v: model.connection.nabla(n + k, v)).shift(1)
        elif move < 0.5:
            ck = bundle.left(Multivector.basis(n, (k,), CLIFFORD))
            s = s.map(lambda v: v.apply(ck)).shift(1)
        s = s.shift(int(rng.integers(extra_power + 1)))
        c = random_gaussian(rng, 2)
        s = s.map(lambda v: v.scale(c))
        out = s if out is None else out + s
    return out
