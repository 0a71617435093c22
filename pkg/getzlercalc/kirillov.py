###########################
# getzlercalc: exact Getzler calculus and equivariant index checks
###########################
"""
Numeric check of the equivariant index formula on the round two-sphere.

The sphere carries the rotation about its axis and the Dirac operator twisted by
``O(k) x K^(-1/2)``, i.e. the Dolbeault operator with values in ``O(k)``. The equivariant
integrand is built from curvature data obtained with ``torch.autograd`` on two
stereographic charts, integrated with a polar Gauss-Legendre rule under a smooth
partition of unity, and compared with the character of ``H^0(CP^1, O(k))``.
"""
import logging
import math
import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pandas as pd
import torch

EPS = sys.float_info.epsilon
TORCH_FLOAT_DATATYPE = torch.float64
TORCH_COMPLEX_DATATYPE = torch.complex128

device = "cuda" if torch.cuda.is_available() else "cpu"

# chart disk radius the panel count in QuadratureConfig refers to
REFERENCE_RADIUS = 2.0

logger = logging.getLogger()


@dataclass(frozen=True)
class QuadratureConfig:
    r"""Polar Gauss-Legendre rule on each chart disk.

    Args:
        order (int): Gauss-Legendre nodes per radial panel.
        panels (int): radial panels on a disk of radius ``REFERENCE_RADIUS``; larger chart
            disks get proportionally more. The comparison rule doubles this.
        angular (int): Gauss-Legendre nodes on :math:`[0, 2\pi]`.
        overlap (tuple[float, float]): radii ``a < 1 < b`` of the partition of unity; the
            first chart weight is 1 for ``r <= a`` and 0 for ``r >= b``.
        tolerance (float): acceptance threshold for both the rule comparison and the check.
    """

    order: int = 16
    panels: int = 8
    angular: int = 8
    overlap: tuple = (0.5, 2.0)
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.order < 1 or self.panels < 1 or self.angular < 1:
            raise ValueError("quadrature order, panels and angular nodes must be positive")
        a, b = self.overlap
        if not 0 < a < 1 < b:
            raise ValueError(f"overlap radii must satisfy 0 < a < 1 < b, got {self.overlap}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        object.__setattr__(self, "overlap", (float(a), float(b)))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "overlap" in d:
            d["overlap"] = tuple(d["overlap"])
        return cls(**d)

    def refined(self):
        return QuadratureConfig(self.order, 2 * self.panels, self.angular, self.overlap,
                                self.tolerance)


@dataclass(frozen=True)
class StereographicChart:
    """Stereographic chart; ``orientation = -1`` is the chart around the opposite pole.

    The transition ``zeta -> 1/zeta`` preserves orientation and reverses the rotation.
    """

    orientation: int = 1
    max_radius: float = 1e6

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {self.orientation}")

    def check(self, p):
        if p.shape[-1] != 2:
            raise ValueError(f"chart points need 2 coordinates, got shape {tuple(p.shape)}")
        r = torch.linalg.norm(p, dim=-1)
        if not torch.all(torch.isfinite(r)) or torch.any(r > self.max_radius):
            raise ValueError("point outside the chart domain")

    def to_other(self, p):
        """Coordinates in the other chart, :math:`\\zeta \\mapsto 1/\\zeta`."""
        r2 = (p**2).sum(-1, keepdim=True)
        return torch.stack((p[..., 0], -p[..., 1]), -1) / r2

    def height(self, p):
        """Axis coordinate of the embedded point; +1 at this chart's origin."""
        r2 = (p**2).sum(-1)
        return self.orientation * (1 - r2) / (1 + r2)

    def embed(self, p):
        r2 = (p**2).sum(-1)
        x = 2 * p[..., 0] / (1 + r2)
        y = self.orientation * 2 * p[..., 1] / (1 + r2)
        return torch.stack((x, y, self.height(p)), -1)


def _points(p):
    p = torch.as_tensor(p, dtype=TORCH_FLOAT_DATATYPE)
    if p.dim() == 1:
        p = p.unsqueeze(0)
    return p.detach().clone().requires_grad_(True)


def _tracked(p):
    if isinstance(p, torch.Tensor) and p.requires_grad:
        return p
    return _points(p)


def _grad(y, p, create_graph=True):
    return torch.autograd.grad(y.sum(), p, create_graph=create_graph)[0]


def ahat_profile(w):
    r""":math:`f(w) = (w/2)/\sin(w/2)` and :math:`f'(w)`, with a series near 0."""
    small = torch.abs(w) < 1e-4
    safe = torch.where(small, torch.ones_like(w), w)
    s, c = torch.sin(safe / 2), torch.cos(safe / 2)
    f = torch.where(small, 1 + w**2 / 24, (safe / 2) / s)
    df = torch.where(small, w / 12, (s / 2 - safe * c / 4) / s**2)
    return f, df


@dataclass(frozen=True)
class GeometryModel:
    r"""Round unit sphere with the rotation :math:`X_0` and the lifts to its line bundles.

    The metric in either chart is :math:`\lambda |d\zeta|^2` with
    :math:`\lambda = 4/(1 + |\zeta|^2)^2`; the rotation field is
    :math:`s \cdot \sigma (-v, u)` with :math:`\sigma` the chart orientation. Line bundles
    ``O(k)`` carry the curvature :math:`-\frac{ik}2 K\,\mathrm{vol}`, their moment is
    :math:`-\frac{ik}2 \mu^M_{12}`, and ``lift_shift`` adds :math:`-i\,\delta s` to the moment
    of the twisting bundle.
    """

    lift_shift: float = 0.0
    max_radius: float = 1e6

    @property
    def charts(self):
        return (StereographicChart(1, self.max_radius), StereographicChart(-1, self.max_radius))

    # metric data

    @staticmethod
    def log_conformal_factor(p):
        return math.log(4.0) - 2 * torch.log1p((p**2).sum(-1))

    def conformal_factor(self, p):
        return torch.exp(self.log_conformal_factor(p))

    def christoffel(self, p):
        r""":math:`\Gamma^k_{ij}` as a ``(N, 2, 2, 2)`` tensor indexed ``[:, k, i, j]``."""
        p = _tracked(p)
        g = _grad(self.log_conformal_factor(p), p)
        eye = torch.eye(2, dtype=TORCH_FLOAT_DATATYPE)
        # Gamma^k_ij = 1/2 (delta_ki g_j + delta_kj g_i - delta_ij g_k)
        return 0.5 * (torch.einsum("ki,nj->nkij", eye, g) + torch.einsum("kj,ni->nkij", eye, g)
                      - torch.einsum("ij,nk->nkij", eye, g))

    def gauss_curvature(self, p):
        r""":math:`K = -\Delta \log\lambda / (2\lambda)`."""
        p = _tracked(p)
        g = _grad(self.log_conformal_factor(p), p)
        lap = sum(_grad(g[:, i], p)[:, i] for i in range(2))
        return -lap / (2 * self.conformal_factor(p))

    def action(self, chart, p, s):
        return s * chart.orientation * torch.stack((-p[..., 1], p[..., 0]), -1)

    def tangent_moment(self, chart, p, s):
        r""":math:`\mu^M_{ij} = -(\nabla X)^i{}_j` at the points, shape ``(N, 2, 2)``."""
        p = _tracked(p)
        X = self.action(chart, p, s)
        jac = torch.stack([_grad(X[:, i], p) for i in range(2)], 1)
        gamma = self.christoffel(p)
        return -(jac + torch.einsum("nijk,nk->nij", gamma, X))

    def theta_differential(self, chart, p, s):
        r"""Coefficient of :math:`du \wedge dv` in :math:`d\theta_X`, :math:`\theta_X = \lambda X^\flat`."""
        p = _tracked(p)
        theta = self.conformal_factor(p).unsqueeze(-1) * self.action(chart, p, s)
        return _grad(theta[:, 1], p)[:, 0] - _grad(theta[:, 0], p)[:, 1]

    def moment_relation_residual(self, chart, p, s):
        r""":math:`d\theta_X(e_1, e_2) + 2(\mu^M e_1, e_2)` in an orthonormal frame."""
        p = _points(p)
        dtheta = self.theta_differential(chart, p, s) / self.conformal_factor(p)
        return (dtheta + 2 * self.tangent_moment(chart, p, s)[:, 1, 0]).detach()

    def closedness_residual(self, chart, p, s):
        r""":math:`d\mu^M_{12} - \iota(X) R_{12}` with :math:`R_{12} = K\,\mathrm{vol}`."""
        p = _points(p)
        mu = self.tangent_moment(chart, p, s)[:, 0, 1]
        dmu = _grad(mu, p)
        X = self.action(chart, p, s)
        density = self.gauss_curvature(p) * self.conformal_factor(p)
        iota = torch.stack((-X[:, 1], X[:, 0]), -1) * density.unsqueeze(-1)
        return (dmu - iota).detach()

    # line bundles

    def line_curvature(self, p, k):
        """Density of the curvature of ``O(k)`` with respect to ``du dv``."""
        p = _points(p)
        density = (self.gauss_curvature(p) * self.conformal_factor(p)).detach()
        return -0.5j * k * density.to(TORCH_COMPLEX_DATATYPE)

    def line_moment(self, chart, p, s, k):
        w = self.tangent_moment(chart, _points(p), s)[:, 0, 1].detach()
        return -0.5j * k * w.to(TORCH_COMPLEX_DATATYPE)


def equivariant_integrand(geo, k, s, points, chart=None):
    r"""Top-degree density of :math:`(2\pi i)^{-1}\hat A_{\mathfrak g}(sX_0)\mathrm{Ch}_{\mathfrak g}(sX_0, W)`.

    ``W = O(k) x O(1)`` is the twisting bundle of the Dolbeault operator. Returns the
    density with respect to ``du dv`` at every point, as a complex tensor that is real for
    ``lift_shift = 0``.

    Raises:
        ValueError: for points outside the chart.
    """
    chart = chart or geo.charts[0]
    p = _points(points)
    chart.check(p)
    R = (geo.gauss_curvature(p) * geo.conformal_factor(p)).detach()
    w = geo.tangent_moment(chart, p, s)[:, 0, 1].detach()
    f, df = ahat_profile(w)
    F = geo.line_curvature(p, k) + geo.line_curvature(p, 1)
    mu = geo.line_moment(chart, p, s, k) + geo.line_moment(chart, p, s, 1) - 1j * geo.lift_shift * s
    top = torch.exp(-mu) * (df * R - f * F)
    return top / (2j * math.pi)


def partition_weight(r, overlap):
    """Smooth step: 1 for ``r <= a``, 0 for ``r >= b``."""
    a, b = overlap
    t = ((b - r) / (b - a)).clamp(0.0, 1.0)

    def h(x):
        return torch.where(x > 0, torch.exp(-1 / x.clamp_min(EPS)), torch.zeros_like(x))

    return h(t) / (h(t) + h(1 - t))


@lru_cache(maxsize=None)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def polar_rule(radius, order, panels, angular, breaks=()):
    """Nodes ``(N, 2)`` and weights ``(N,)`` of a polar Gauss-Legendre rule on a disk.

    ``breaks`` are extra radial panel edges, placed where the integrand stops being analytic.
    """
    x, w = _leggauss(order)
    edges = np.union1d(np.linspace(0.0, radius, panels + 1),
                       [r for r in breaks if 0.0 < r < radius])
    r = np.concatenate([0.5 * (hi - lo) * x + 0.5 * (hi + lo) for lo, hi in zip(edges, edges[1:])])
    wr = np.concatenate([0.5 * (hi - lo) * w for lo, hi in zip(edges, edges[1:])])
    xa, wa = _leggauss(angular)
    phi = np.pi * (xa + 1)
    wphi = np.pi * wa
    R, PHI = np.meshgrid(r, phi, indexing="ij")
    W = np.outer(wr * r, wphi)
    nodes = np.stack((R * np.cos(PHI), R * np.sin(PHI)), -1).reshape(-1, 2)
    return (torch.as_tensor(nodes, dtype=TORCH_FLOAT_DATATYPE),
            torch.as_tensor(W.reshape(-1), dtype=TORCH_FLOAT_DATATYPE))


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    converged: bool


def _panels(cfg, radius):
    # panel width of the default rule, whatever the disk radius
    return max(cfg.panels, math.ceil(cfg.panels * radius / REFERENCE_RADIUS))


def _integrate_once(geo, density, cfg):
    a, b = cfg.overlap
    total = torch.zeros((), dtype=TORCH_COMPLEX_DATATYPE)
    first, second = geo.charts
    nodes, weights = polar_rule(b, cfg.order, _panels(cfg, b), cfg.angular, breaks=(a,))
    psi = partition_weight(torch.linalg.norm(nodes, dim=-1), cfg.overlap)
    total = total + torch.sum(psi * weights * density(first, nodes))
    nodes, weights = polar_rule(1 / a, cfg.order, _panels(cfg, 1 / a), cfg.angular, breaks=(1 / b,))
    psi = 1 - partition_weight(1 / torch.linalg.norm(nodes, dim=-1), cfg.overlap)
    total = total + torch.sum(psi * weights * density(second, nodes))
    return complex(total.item())


def integrate_density(geo, density, cfg):
    """Integrate ``density(chart, nodes)`` over the sphere and compare with the refined rule."""
    coarse = _integrate_once(geo, density, cfg)
    fine = _integrate_once(geo, density, cfg.refined())
    error = abs(fine - coarse)
    converged = error < cfg.tolerance
    if not converged:
        logger.warning("quadrature did not converge: rule difference %.3e", error)
    return QuadratureResult(fine, error, converged)


def integrate(geo, k, s, cfg):
    return integrate_density(geo, lambda chart, p: equivariant_integrand(geo, k, s, p, chart), cfg)


def area(geo, cfg):
    return integrate_density(geo, lambda chart, p: geo.conformal_factor(p), cfg)


def chern_number(geo, k, cfg):
    r""":math:`\frac{i}{2\pi}\int F_k`."""
    result = integrate_density(geo, lambda chart, p: geo.line_curvature(p, k), cfg)
    return QuadratureResult(result.value * 1j / (2 * math.pi), result.error / (2 * math.pi),
                            result.converged)


def character(k, s, shift=0.0):
    r"""Character of :math:`e^{-sX_0}` on :math:`H^0(\mathbb{CP}^1, O(k))`.

    The weights form the ladder :math:`j - k/2 + \delta`, ``j = 0..k``, where ``shift`` is
    :math:`\delta`.
    """
    if k < 0:
        raise NotImplementedError(f"O({k}) has higher cohomology; only k >= 0 is supported")
    weights = np.arange(k + 1) - k / 2 + shift
    return complex(np.exp(1j * s * weights).sum())


def index_oracle(k, s, shift=0.0):
    """Real part of :func:`character`; the imaginary part vanishes for ``shift = 0``."""
    return character(k, s, shift).real


@lru_cache(maxsize=None)
def calibrate_weight_shift(cfg, geo=GeometryModel(), h=1e-2):
    r"""Weight shift :math:`\delta` from the slope of :math:`\mathrm{Im}\int` at ``s = 0`` for ``k = 1``.

    The character slope is :math:`i\,\delta\,(k+1)`; the result is rounded to a multiple of 1/2.
    """
    slope = (integrate(geo, 1, h, cfg).value - integrate(geo, 1, -h, cfg).value) / (2 * h)
    # slope.imag = delta * (k + 1) with k = 1
    shift = round(slope.imag) / 2
    logger.info("calibrated weight shift %.1f (slope %.3e)", shift, slope.imag)
    return shift


@dataclass(frozen=True)
class KirillovReport:
    k: int
    s: float
    lhs: complex
    rhs: complex
    error: float
    converged: bool
    passed: bool

    def to_record(self):
        return {"k": self.k, "s": self.s, "lhs": self.lhs.real, "lhs_imag": self.lhs.imag,
                "rhs": self.rhs.real, "rhs_imag": self.rhs.imag, "abs_error": self.error,
                "converged": self.converged, "passed": self.passed}


def kirillov_check(k, s, cfg, geo=None):
    """Compare the integral of the equivariant integrand with the character of ``O(k)``."""
    geo = geo or GeometryModel()
    shift = calibrate_weight_shift(cfg, geo)
    result = integrate(geo, k, s, cfg)
    rhs = character(k, s, shift)
    error = abs(result.value - rhs)
    passed = result.converged and error < cfg.tolerance
    logger.info("kirillov k=%d s=%.4f: integral %.12f%+.2ei, character %.12f, error %.3e",
                k, s, result.value.real, result.value.imag, rhs.real, error)
    return KirillovReport(k, s, result.value, rhs, error, result.converged, passed)


def kirillov_sweep(k, s_values, cfg, geo=None):
    """Table of :func:`kirillov_check` over ``s_values``; agreement is reported, not asserted."""
    rows = [kirillov_check(k, float(s), cfg, geo).to_record() for s in s_values]
    return pd.DataFrame(rows, columns=["k", "s", "lhs", "lhs_imag", "rhs", "rhs_imag",
                                       "abs_error", "converged", "passed"])
