"""Radial functionals of a Gaussian location.

For a location ``y ~ N(mu, Sigma)`` in ``d`` dimensions and a radial
function ``nu`` this module evaluates ``G[nu] = E[nu(|y|)]`` three ways:

* :func:`eval_quadrature`, a fixed polar rule (general purpose),
* :func:`eval_series`, the multinomial power series built from the radial
  moments :func:`psi_mean` / :func:`psi_mgf` and angular weights :func:`omega`,
* :func:`closed_first_moment` / :func:`closed_second_moment` for a zero-mean
  isotropic location.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special, stats

from . import specfun
from .errors import (
    DegenerateCovarianceError,
    DivergenceError,
    DomainError,
    FallbackNeededError,
    InvalidArgumentError,
    MgfDomainError,
    ParameterDegeneracyError,
    PoleError,
    SeriesDivergenceError,
    UnsupportedBranchError,
    UnsupportedDimensionError,
)
from .lindyn import GaussianLocation

__all__ = [
    "PathLoss",
    "IntegrandKind",
    "Integrand",
    "DiagonalizedGaussian",
    "SeriesControls",
    "diagonalize",
    "isotropic_variance",
    "eval_quadrature",
    "eval_series",
    "psi_mean",
    "psi_mgf",
    "omega",
    "closed_first_moment",
    "closed_second_moment",
    "fading_second_moment",
]


@dataclass(frozen=True)
class PathLoss:
    """Path loss ``g(r) = 1 / (eps + r**alpha)``; ``eps = 0`` is the singular model."""

    eps: float = 1.0
    alpha: float = 4.0

    def __post_init__(self):
        if not (np.isfinite(self.eps) and self.eps >= 0):
            raise InvalidArgumentError(f"eps must be finite and >= 0, got {self.eps}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidArgumentError(f"alpha must be finite and > 0, got {self.alpha}")
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "alpha", float(self.alpha))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (self.eps + r**self.alpha)

    @property
    def singular(self) -> bool:
        return self.eps == 0.0


class IntegrandKind(enum.Enum):
    PATHLOSS_MEAN = "pathloss_mean"
    PATHLOSS_SQUARED = "pathloss_squared"
    NAKAGAMI_MGF = "nakagami_mgf"
    EXP_MGF = "exp_mgf"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Integrand:
    """Radial function ``nu(r)`` whose Gaussian expectation is wanted.

    Use the constructors :meth:`mean`, :meth:`squared`, :meth:`nakagami_mgf`,
    :meth:`exp_mgf` and :meth:`custom` rather than the raw fields.
    ``NAKAGAMI_MGF`` is ``(m / (m - beta g))**m``, the fading-averaged
    ``exp(beta h g)`` for unit-mean Gamma(m) power gain ``h``; ``EXP_MGF`` is
    ``exp(beta g)`` (no fading).
    """

    kind: IntegrandKind
    pathloss: Optional[PathLoss] = None
    beta: float = 0.0
    m: Optional[float] = None
    custom_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind is IntegrandKind.CUSTOM:
            if not callable(self.custom_fn):
                raise InvalidArgumentError("custom integrand needs a callable custom_fn")
            return
        if self.pathloss is None:
            raise InvalidArgumentError(f"{self.kind.value} integrand needs a PathLoss")
        if self.kind is IntegrandKind.NAKAGAMI_MGF:
            if self.m is None or not (np.isfinite(self.m) and self.m > 0):
                raise InvalidArgumentError(f"Nakagami shape m must be > 0, got {self.m}")
        if self.kind in (IntegrandKind.NAKAGAMI_MGF, IntegrandKind.EXP_MGF):
            if not np.isfinite(self.beta):
                raise InvalidArgumentError("beta must be finite")
            _check_mgf_domain(self.pathloss, self.beta, self.m)

    @classmethod
    def mean(cls, pl: PathLoss) -> "Integrand":
        return cls(IntegrandKind.PATHLOSS_MEAN, pl)

    @classmethod
    def squared(cls, pl: PathLoss) -> "Integrand":
        return cls(IntegrandKind.PATHLOSS_SQUARED, pl)

    @classmethod
    def nakagami_mgf(cls, pl: PathLoss, beta: float, m: float) -> "Integrand":
        return cls(IntegrandKind.NAKAGAMI_MGF, pl, beta=float(beta), m=float(m))

    @classmethod
    def exp_mgf(cls, pl: PathLoss, beta: float) -> "Integrand":
        return cls(IntegrandKind.EXP_MGF, pl, beta=float(beta))

    @classmethod
    def custom(cls, fn: Callable) -> "Integrand":
        return cls(IntegrandKind.CUSTOM, custom_fn=fn)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        kind = self.kind
        if kind is IntegrandKind.CUSTOM:
            return np.broadcast_to(np.asarray(self.custom_fn(r), dtype=float), r.shape).copy()
        g = self.pathloss(r)
        if kind is IntegrandKind.PATHLOSS_MEAN:
            return g
        if kind is IntegrandKind.PATHLOSS_SQUARED:
            return g * g
        if self.beta == 0.0:
            return np.ones_like(r)
        if kind is IntegrandKind.EXP_MGF:
            return np.exp(self.beta * g)
        return np.exp(-self.m * np.log1p(-self.beta * g / self.m))

    @property
    def singular_power(self) -> float:
        """Exponent ``q`` with ``nu(r) ~ r**-q`` at the origin (0 when bounded)."""
        if self.pathloss is None or not self.pathloss.singular:
            return 0.0
        if self.kind is IntegrandKind.PATHLOSS_MEAN:
            return self.pathloss.alpha
        if self.kind is IntegrandKind.PATHLOSS_SQUARED:
            return 2.0 * self.pathloss.alpha
        return 0.0

    def feature_scales(self):
        """Radii around which ``nu`` varies quickly (complex singularities nearby)."""
        if self.pathloss is None:
            return []
        eps, alpha = self.pathloss.eps, self.pathloss.alpha
        scales = []
        if eps > 0:
            scales.append(eps ** (1.0 / alpha))
        if self.kind is IntegrandKind.NAKAGAMI_MGF and self.beta != 0.0:
            shifted = abs(eps - self.beta / self.m)
            if shifted > 0:
                scales.append(shifted ** (1.0 / alpha))
        elif self.kind is IntegrandKind.EXP_MGF and self.beta != 0.0 and eps == 0.0:
            scales.append(abs(self.beta) ** (1.0 / alpha))
        return sorted(set(scales))


_EXP_LIMIT = 700.0


def _check_mgf_domain(pl: PathLoss, beta: float, m: Optional[float]):
    if beta <= 0:
        return
    if pl.eps == 0.0:
        raise MgfDomainError("the MGF of unbounded singular path loss does not exist for beta > 0")
    if m is not None and beta >= m * pl.eps:
        raise MgfDomainError(
            f"MGF requires beta < m*eps = {m * pl.eps:g} (sup g = 1/eps), got beta = {beta:g}")
    if m is None and beta / pl.eps > _EXP_LIMIT:
        raise MgfDomainError(
            f"exp(beta*g) overflows double precision: beta/eps = {beta / pl.eps:g} > {_EXP_LIMIT:g}")


@dataclass(frozen=True, eq=False)
class DiagonalizedGaussian:
    """Location in principal-axis coordinates: ``P^T y ~ N(eta, diag(sigma_axes**2))``."""

    eta: np.ndarray
    sigma_axes: np.ndarray
    P: np.ndarray
    det_sigma: float

    @property
    def d(self) -> int:
        return self.eta.shape[0]

    @property
    def sigma_max(self) -> float:
        return float(self.sigma_axes.max())

    @property
    def sigma_min(self) -> float:
        return float(self.sigma_axes.min())


@dataclass(frozen=True)
class SeriesControls:
    """Truncation of the series: ``n_max`` outer terms, radial cutoff ``R``, relative ``tol``.

    ``R=None`` picks ``|eta| + sigma_max * sqrt(chi2_d.isf(tail_mass))``.
    """

    n_max: int = 40
    R: Optional[float] = None
    tol: float = 1e-10
    tail_mass: float = 1e-4

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvalidArgumentError(f"n_max must be a positive integer, got {self.n_max}")
        if self.R is not None and not (np.isfinite(self.R) and self.R > 0):
            raise InvalidArgumentError(f"R must be positive, got {self.R}")
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be positive, got {self.tol}")
        if not 0 < self.tail_mass < 1:
            raise InvalidArgumentError("tail_mass must lie in (0, 1)")

    def cutoff(self, diag: DiagonalizedGaussian) -> float:
        if self.R is not None:
            return float(self.R)
        k = math.sqrt(stats.chi2.isf(self.tail_mass, diag.d))
        return float(np.linalg.norm(diag.eta) + k * diag.sigma_max)


# ---------------------------------------------------------------------------
# Location geometry
# ---------------------------------------------------------------------------


def diagonalize(loc: GaussianLocation) -> DiagonalizedGaussian:
    """Principal axes of ``loc.sigma``, sorted by decreasing spread.

    Each eigenvector is signed so that its first non-negligible component is
    positive, which makes the output deterministic.
    """
    sigma = 0.5 * (loc.sigma + loc.sigma.T)
    w, V = np.linalg.eigh(sigma)
    order = np.argsort(w, kind="stable")[::-1]
    w, V = w[order], V[:, order]
    if w.size == 0 or w[0] <= 0 or w[-1] < 1e-14 * w[0]:
        raise DegenerateCovarianceError(
            f"covariance is singular or not positive definite (eigenvalues {w})")
    for k in range(V.shape[1]):
        col = V[:, k]
        lead = np.flatnonzero(np.abs(col) > 1e-12)[0]
        if col[lead] < 0:
            V[:, k] = -col
    eta = V.T @ loc.mu
    return DiagonalizedGaussian(eta=eta, sigma_axes=np.sqrt(w), P=V, det_sigma=float(np.prod(w)))


def isotropic_variance(loc: GaussianLocation, tol: float = 1e-10) -> Optional[float]:
    """``sigma**2`` if ``mu = 0`` and ``Sigma = sigma**2 I`` within ``tol``, else ``None``."""
    d = loc.d
    s2 = float(np.trace(loc.sigma)) / d
    if s2 <= 0:
        return None
    if np.max(np.abs(loc.sigma - s2 * np.eye(d))) > tol * s2:
        return None
    if np.linalg.norm(loc.mu) > tol * math.sqrt(s2):
        return None
    return s2


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

_GL_NODES = 16
_TAIL_SIGMAS = 9.0
_FAR_FIELD_SIGMAS = 19.0


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    x, w = special.roots_legendre(n)
    return x, w


@lru_cache(maxsize=None)
def _gauss_jacobi(n, p):
    # weight (1 + x)**p on [-1, 1]
    x, w = special.roots_jacobi(n, 0.0, p)
    return x, w


@lru_cache(maxsize=None)
def _hermite(n):
    x, w = special.roots_hermitenorm(n)
    return x, w / math.sqrt(2.0 * math.pi)


def _breakpoints(nu: Integrand, r_lo, r_hi, center, h_max):
    pts = {r_lo, r_hi}
    if r_lo < center < r_hi:
        pts.add(center)
    scales = nu.feature_scales()
    alpha = nu.pathloss.alpha if nu.pathloss is not None else 1.0
    down = 40 if alpha != round(alpha) else 8
    if not scales and nu.singular_power == 0.0:
        scales = [h_max]
    for s in scales:
        k_up = int(math.ceil(math.log2(max(r_hi / s, 1.0)))) + 1
        for k in range(-down, k_up + 1):
            p = s * 2.0**k
            if r_lo < p < r_hi:
                pts.add(p)
    pts = sorted(pts)
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        pieces = max(1, int(math.ceil((b - a) / h_max)))
        edges.extend(a + (b - a) * np.arange(1, pieces + 1) / pieces)
    edges = np.asarray(edges)
    edges[-1] = r_hi
    return edges


def _radial_rule(nu: Integrand, dg: DiagonalizedGaussian, split: int):
    """Composite radial rule; returns per-panel (nodes, weights-including-r**(d-1) * nu)."""
    d = dg.d
    rho = float(np.linalg.norm(dg.eta))
    r_hi = rho + _TAIL_SIGMAS * dg.sigma_max
    r_lo = max(0.0, rho - _TAIL_SIGMAS * dg.sigma_max)
    q = nu.singular_power
    p = d - 1 - q
    if q > 0 and p <= -1:
        raise DivergenceError(
            f"Gamma((d - {q:g})/2) pole: E[g^k] diverges at the origin for singular path loss, "
            f"which needs k*alpha < d={d}")
    h_max = dg.sigma_min
    edges = _breakpoints(nu, r_lo, r_hi, rho, h_max)
    if split > 1:
        fine = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            fine.extend(a + (b - a) * np.arange(1, split + 1) / split)
        edges = np.asarray(fine)
    x, w = _gauss_legendre(_GL_NODES)
    panels = []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        half = 0.5 * (b - a)
        if i == 0 and q > 0 and a == 0.0:
            # r**(d-1) nu(r) = r**p exactly for the singular path loss powers
            xj, wj = _gauss_jacobi(_GL_NODES, float(p))
            r = half * (xj + 1.0)
            weights = wj * half ** (p + 1.0)
        else:
            r = a + half * (x + 1.0)
            weights = w * half * r ** (d - 1) * nu(r)
        panels.append((r, weights))
    return panels


def _angular(dg: DiagonalizedGaussian, r, density: float):
    """Surface integral of the Gaussian density over the sphere of radius ``r`` (per node)."""
    d = dg.d
    eta, s = dg.eta, dg.sigma_axes
    r = np.asarray(r)
    if d == 1:
        z1 = (r - eta[0]) / s[0]
        z2 = (-r - eta[0]) / s[0]
        return (np.exp(-0.5 * z1 * z1) + np.exp(-0.5 * z2 * z2)) / (math.sqrt(2 * math.pi) * s[0])
    r_max = float(r.max())
    M = max(32, int(math.ceil(density * 2.0 * math.pi * r_max / dg.sigma_min)))
    phi = 2.0 * math.pi * (np.arange(M) + 0.5) / M
    c, sn = np.cos(phi), np.sin(phi)
    R = r[:, None]
    if d == 2:
        e = ((R * c - eta[0]) / s[0]) ** 2 + ((R * sn - eta[1]) / s[1]) ** 2
        vals = np.exp(-0.5 * e).sum(axis=1) * (2.0 * math.pi / M)
        return vals / (2.0 * math.pi * s[0] * s[1])
    n_theta = max(16, (M + 1) // 2)
    xt, wt = _gauss_legendre(n_theta)
    st = np.sqrt(1.0 - xt * xt)
    R3 = r[:, None, None]
    u1 = R3 * st[None, :, None] * c[None, None, :]
    u2 = R3 * st[None, :, None] * sn[None, None, :]
    u3 = R3 * xt[None, :, None]
    e = ((u1 - eta[0]) / s[0]) ** 2 + ((u2 - eta[1]) / s[1]) ** 2 + ((u3 - eta[2]) / s[2]) ** 2
    vals = np.exp(-0.5 * e).sum(axis=2) @ wt * (2.0 * math.pi / M)
    return vals / ((2.0 * math.pi) ** 1.5 * s[0] * s[1] * s[2])


def _polar(nu, dg, split, density):
    total = 0.0
    for r, weights in _radial_rule(nu, dg, split):
        total += float(np.dot(weights, _angular(dg, r, density)))
    return total


def _far_field(nu, dg, n):
    """Tensor Gauss-Hermite in standardised coordinates (blob far from the origin)."""
    z, w = _hermite(n)
    d = dg.d
    grids = np.meshgrid(*([z] * d), indexing="ij")
    wts = np.ones_like(grids[0])
    for ax in np.meshgrid(*([w] * d), indexing="ij"):
        wts = wts * ax
    r2 = np.zeros_like(grids[0])
    for a in range(d):
        r2 += (dg.eta[a] + dg.sigma_axes[a] * grids[a]) ** 2
    return float(np.sum(wts * nu(np.sqrt(r2))))


def eval_quadrature(nu: Integrand, loc, return_error: bool = False):
    """Gaussian expectation ``E[nu(|y|)]`` for ``y`` distributed as ``loc``.

    Parameters
    ----------
    nu : Integrand
    loc : GaussianLocation or DiagonalizedGaussian
    return_error : bool
        Also return an absolute error estimate, the difference to a refined
        rule (costs about four extra evaluations).

    Notes
    -----
    The expectation is written in polar form around the origin, where the
    path loss has its structure. Radial panels are graded geometrically
    around the integrand's characteristic radii and capped at the smallest
    principal spread. The singular path-loss powers get a Gauss-Jacobi
    panel at ``r = 0``. The angular rule is periodic trapezoid (d=2) or
    Gauss-Legendre in ``cos(theta)`` times trapezoid (d=3), sized to the
    narrowest angular footprint of the density. When the density sits far
    from the origin a tensor Gauss-Hermite rule is tried first. The rule
    is fixed for a given location, so values are smooth in any integrand
    parameter.
    """
    dg = loc if isinstance(loc, DiagonalizedGaussian) else diagonalize(loc)
    if dg.d not in (1, 2, 3):
        raise UnsupportedDimensionError(f"d must be 1, 2 or 3, got {dg.d}")
    q = nu.singular_power
    if q > 0 and dg.d - 1 - q <= -1:
        raise DivergenceError(
            f"Gamma((d - {q:g})/2) pole: E[nu] diverges, nu ~ r^-{q:g} is not integrable "
            f"at the origin in d={dg.d}")
    rho = float(np.linalg.norm(dg.eta))
    if rho >= _FAR_FIELD_SIGMAS * dg.sigma_max:
        n = 48 if dg.d < 3 else 40
        coarse, fine = _far_field(nu, dg, n), _far_field(nu, dg, 2 * n)
        err = abs(fine - coarse)
        if err <= 1e-11 * abs(fine):
            return (fine, err) if return_error else fine
    value = _polar(nu, dg, split=1, density=1.0)
    if not np.isfinite(value):
        raise DivergenceError("quadrature produced a non-finite value")
    if not return_error:
        return value
    # the estimate compares against a rule with twice the radial panels and 1.5x the angular nodes
    return value, abs(_polar(nu, dg, split=2, density=1.5) - value)


# ---------------------------------------------------------------------------
# Radial moments Psi
# ---------------------------------------------------------------------------


def _hyp_radial(j, c, alpha, z):
    b = (c + 1.0) / alpha
    try:
        return specfun.gauss_2f1(j, b, b + 1.0, z)
    except (DomainError, PoleError) as exc:
        raise FallbackNeededError(f"2F1 failed for the radial moment: {exc}") from exc


def _scaled_psi_power(c, pl: PathLoss, R, power):
    """``R**-(c+1) * int_0^R r**c g(r)**power dr`` for integer ``power`` >= 1."""
    eps, alpha = pl.eps, pl.alpha
    if eps == 0.0:
        k = c - power * alpha + 1.0
        if k <= 0:
            raise DivergenceError(
                f"radial moment diverges at r=0: c - {power}*alpha + 1 = {k:g} <= 0")
        return R ** (-power * alpha) / k
    return _hyp_radial(power, c, alpha, -(R**alpha) / eps) / ((c + 1.0) * eps**power)


def _scaled_psi_nakagami(c, pl: PathLoss, beta, m, R):
    if beta == 0.0:
        return 1.0 / (c + 1.0)
    if m != round(m):
        raise FallbackNeededError(f"no closed radial moment for non-integer m = {m}")
    m_int = int(round(m))
    shifted = pl.eps - beta / m
    if abs(shifted) <= 1e-14 * max(pl.eps, abs(beta) / m):
        raise ParameterDegeneracyError("beta = m*eps makes the shifted path-loss constant vanish")
    if shifted < 0:
        raise MgfDomainError(f"MGF requires beta < m*eps, got beta={beta:g}, m*eps={m * pl.eps:g}")
    z = -(R**pl.alpha) / shifted
    ratio = (beta / m) / shifted
    total = 1.0
    for j in range(1, m_int + 1):
        total += math.comb(m_int, j) * ratio**j * _hyp_radial(j, c, pl.alpha, z)
    return total / (c + 1.0)


def psi_mean(c: int, pl: PathLoss, R: float) -> float:
    """``int_0^R r**c / (eps + r**alpha) dr``."""
    if not R > 0:
        raise InvalidArgumentError(f"R must be positive, got {R}")
    return float(R ** (c + 1) * _scaled_psi_power(c, pl, R, 1))


def psi_mgf(c: int, pl: PathLoss, beta: float, m: float, R: float) -> float:
    """``int_0^R r**c (m / (m - beta g(r)))**m dr`` for integer Nakagami shape ``m``.

    Writing ``eps' = eps - beta/m`` the integrand is
    ``(1 + (beta/m) / (eps' + r**alpha))**m``. The binomial expansion yields
    one hypergeometric term per power.

    Raises
    ------
    ParameterDegeneracyError
        ``eps' = 0``.
    FallbackNeededError
        Non-integer ``m`` or a failed hypergeometric evaluation; use quadrature.
    """
    if not R > 0:
        raise InvalidArgumentError(f"R must be positive, got {R}")
    if pl.eps == 0.0 and beta > 0:
        raise MgfDomainError("the MGF of unbounded singular path loss does not exist for beta > 0")
    return float(R ** (c + 1) * _scaled_psi_nakagami(c, pl, beta, m, R))


def _scaled_psi_quadrature(nu: Integrand, cs, R):
    """``R**-(c+1) int_0^R nu(r) r**c dr`` for every ``c`` in ``cs`` by graded Gauss-Legendre."""
    cs = np.asarray(cs, dtype=float)
    edges = [0.0]
    scales = [s / R for s in nu.feature_scales() if s < R] or [1.0]
    pts = {1.0}
    for s in scales:
        for k in range(-40, 2):
            p = s * 2.0**k
            if 0 < p < 1:
                pts.add(p)
    pts.update(np.linspace(0.0, 1.0, 33)[1:-1])
    edges += sorted(pts)
    x, w = _gauss_legendre(24)
    total = np.zeros_like(cs)
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        rho = a + half * (x + 1.0)
        vals = nu(R * rho) * w * half
        total += (rho[None, :] ** cs[:, None]) @ vals
    return total


def _scaled_psi(nu: Integrand, cs, R):
    kind = nu.kind
    try:
        if kind is IntegrandKind.PATHLOSS_MEAN:
            return np.array([_scaled_psi_power(c, nu.pathloss, R, 1) for c in cs])
        if kind is IntegrandKind.PATHLOSS_SQUARED:
            return np.array([_scaled_psi_power(c, nu.pathloss, R, 2) for c in cs])
        if kind is IntegrandKind.NAKAGAMI_MGF:
            return np.array([_scaled_psi_nakagami(c, nu.pathloss, nu.beta, nu.m, R) for c in cs])
    except FallbackNeededError:
        pass
    if nu.singular_power > 0:
        raise DivergenceError("singular integrand has no radial moment by quadrature")
    return _scaled_psi_quadrature(nu, cs, R)


# ---------------------------------------------------------------------------
# Angular weights Omega
# ---------------------------------------------------------------------------


def _circle_moment(p: int, q: int) -> float:
    """``int_0^{2 pi} cos(phi)**p sin(phi)**q dphi``."""
    if p % 2 or q % 2:
        return 0.0
    return 2.0 * math.exp(math.lgamma((p + 1) / 2) + math.lgamma((q + 1) / 2) - math.lgamma((p + q + 2) / 2))


@lru_cache(maxsize=None)
def _circle_table(kmax):
    J = np.zeros((2 * kmax + 1, 2 * kmax + 1))
    for p in range(0, 2 * kmax + 1, 2):
        for q in range(0, 2 * kmax + 1 - p, 2):
            J[p, q] = _circle_moment(p, q)
    return J


def _angular_weights(dg: DiagonalizedGaussian, scale: float, kmax: int) -> np.ndarray:
    """``W[k1, k2] = int_S (scale**2 a)**k1 (scale b)**k2 dS`` for ``k1 + k2 <= kmax``.

    ``a(w) = sum w_i**2 / sigma_i**2`` and ``b(w) = -2 sum w_i eta_i / sigma_i**2`` are
    the quadratic and linear coefficients of the Gaussian exponent along direction ``w``.
    """
    d = dg.d
    s2 = dg.sigma_axes**2
    p = scale**2 / s2
    q = -2.0 * scale * dg.eta / s2
    W = np.zeros((kmax + 1, kmax + 1))
    if not np.all(np.isfinite(p)) or not np.all(np.isfinite(q)):
        raise SeriesDivergenceError("angular coefficients overflow")
    if d == 1:
        for k1 in range(kmax + 1):
            for k2 in range(0, kmax + 1 - k1, 2):
                if k2 == 0 or q[0] != 0.0:
                    W[k1, k2] = 2.0 * p[0] ** k1 * q[0] ** k2
        return W
    if d != 2:
        raise UnsupportedDimensionError(f"angular weights are implemented for d in (1, 2), got d={d}")
    J = _circle_table(kmax)
    for k1 in range(kmax + 1):
        i = np.arange(k1 + 1)
        a_terms = special.comb(k1, i) * p[0] ** i * p[1] ** (k1 - i)
        for k2 in range(kmax + 1 - k1):
            j = np.arange(k2 + 1)
            b_terms = special.comb(k2, j) * q[0] ** j * q[1] ** (k2 - j)
            cos_pow = 2 * i[:, None] + j[None, :]
            sin_pow = 2 * (k1 - i)[:, None] + (k2 - j)[None, :]
            W[k1, k2] = float(np.sum(np.outer(a_terms, b_terms) * J[cos_pow, sin_pow]))
    return W


def omega(diag: DiagonalizedGaussian, k1: int, k2: int, k3: int) -> float:
    """Angular coefficient of the ``(k1, k2, k3)`` multinomial term.

    ``Omega = X**k3 * int_S a(w)**k1 b(w)**k2 dS`` with ``X = sum eta_i**2 / sigma_i**2``.
    """
    if min(k1, k2, k3) < 0:
        raise InvalidArgumentError("k1, k2, k3 must be non-negative")
    if diag.d not in (1, 2):
        raise UnsupportedDimensionError(f"the series form supports d in (1, 2), got d={diag.d}")
    x3 = float(np.sum(diag.eta**2 / diag.sigma_axes**2))
    W = _angular_weights(diag, 1.0, k1 + k2)
    return float(x3**k3 * W[k1, k2])


# ---------------------------------------------------------------------------
# Series form
# ---------------------------------------------------------------------------


def eval_series(nu: Integrand, diag: DiagonalizedGaussian, ctl: Optional[SeriesControls] = None) -> float:
    """Series evaluation of ``E[nu(|y|)]`` for ``d`` in (1, 2).

    The Gaussian exponent along direction ``w`` is ``-(r**2 a + r b + X) / 2``.
    Expanding the exponential in powers and the power by the multinomial
    theorem gives

        G = K sum_n (-1/2)**n sum_{k1+k2+k3=n} Omega(k) Psi(2 k1 + k2 + d - 1) / (k1! k2! k3!)

    with ``K = (2 pi)**(-d/2) |Sigma|**(-1/2)``. The radial integrals are truncated at
    ``ctl.R``. Terms ``n = 0 .. n_max - 1`` are summed. Internally ``r`` is
    rescaled by ``R`` so the terms stay representable.

    The terms grow like ``((R + |eta|) / sigma_min)**(2n) / (2**n n!)`` before
    they decay. The series is therefore practical only while that ratio is
    moderate (roughly below 5 for ``n_max = 40``).

    Raises
    ------
    SeriesDivergenceError
        Non-finite terms, or increments still not shrinking (or not below
        ``max(tol, 1e-5)`` relative) after ``n_max`` terms.
    """
    ctl = ctl or SeriesControls()
    d = diag.d
    if d not in (1, 2):
        raise UnsupportedDimensionError(f"the series form supports d in (1, 2), got d={d}")
    R = ctl.cutoff(diag)
    n_terms = int(ctl.n_max)
    kmax = n_terms - 1
    cs = np.arange(d - 1, 2 * kmax + d)
    psi = _scaled_psi(nu, cs, R)
    W = _angular_weights(diag, R, kmax)
    x3 = float(np.sum(diag.eta**2 / diag.sigma_axes**2))
    inv_fact = np.exp(-special.gammaln(np.arange(kmax + 1) + 1.0))
    prefactor = R**d / ((2.0 * math.pi) ** (d / 2.0) * math.sqrt(diag.det_sigma))

    total = 0.0
    increments = []
    for n in range(n_terms):
        inc = 0.0
        for k1 in range(n + 1):
            for k2 in range(n + 1 - k1):
                k3 = n - k1 - k2
                if W[k1, k2] == 0.0 or (k3 and x3 == 0.0):
                    continue
                inc += (x3**k3 * inv_fact[k1] * inv_fact[k2] * inv_fact[k3]
                        * W[k1, k2] * psi[2 * k1 + k2])
        inc *= (-0.5) ** n
        if not math.isfinite(inc):
            raise SeriesDivergenceError(f"series term n={n} is not finite")
        total += inc
        increments.append(abs(inc))
        if n >= 2 and increments[-1] <= ctl.tol * abs(total) and increments[-1] <= increments[-2]:
            return float(prefactor * total)
    if len(increments) >= 3:
        shrinking = increments[-1] < increments[-2] < increments[-3]
        if not shrinking or increments[-1] > max(ctl.tol, 1e-5) * abs(total):
            raise SeriesDivergenceError(
                f"series not converged after {n_terms} terms "
                f"(last increments {increments[-3]:.3g}, {increments[-2]:.3g}, {increments[-1]:.3g};"
                f" partial sum {total:.3g})")
    return float(prefactor * total)


# ---------------------------------------------------------------------------
# Closed forms for mu = 0, Sigma = sigma**2 I
# ---------------------------------------------------------------------------

_MAX_CLOSED_ARG = 100.0


def _sphere_area(d):
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _isotropic_or_raise(loc: GaussianLocation, d):
    if d is not None and d != loc.d:
        raise InvalidArgumentError(f"d={d} does not match the location dimension {loc.d}")
    s2 = isotropic_variance(loc)
    if s2 is None:
        raise UnsupportedBranchError("closed forms need mu = 0 and Sigma = sigma^2 I")
    return s2


def fading_second_moment(m: Optional[float]) -> float:
    """``E[h**2]`` for unit-mean Gamma(m, rate m) power gain; ``m=None`` means no fading."""
    if m is None:
        return 1.0
    if not m > 0:
        raise InvalidArgumentError(f"Nakagami shape must be positive, got {m}")
    return (m + 1.0) / m


def _singular_moment(d, alpha_eff, s2):
    if alpha_eff >= d:
        raise DivergenceError(
            f"Gamma((d - {alpha_eff:g})/2) pole: singular path-loss moment diverges for d={d}")
    sigma = math.sqrt(s2)
    return (_sphere_area(d) * math.gamma((d - alpha_eff) / 2.0)
            / (2.0 ** (alpha_eff / 2.0 + 1.0) * math.pi ** (d / 2.0) * sigma**alpha_eff))


def closed_first_moment(loc: GaussianLocation, pl: PathLoss, d: Optional[int] = None) -> float:
    """``E[g(|y|)]`` for ``y ~ N(0, sigma**2 I)`` in closed form.

    Supported branches: ``eps = 0`` with ``alpha < d``, ``alpha = 2`` with ``eps > 0``,
    and ``alpha = 4``, ``d = 2`` with ``eps > 0``.
    """
    s2 = _isotropic_or_raise(loc, d)
    d = loc.d
    eps, alpha = pl.eps, pl.alpha
    if eps == 0.0:
        return _singular_moment(d, alpha, s2)
    if alpha == 2.0:
        x = eps / (2.0 * s2)
        if x > _MAX_CLOSED_ARG:
            raise UnsupportedBranchError("closed form loses accuracy for eps >> sigma^2")
        h = d / 2.0
        scaled_tail = math.exp(x) * specfun.upper_incomplete_gamma(1.0 - h, x)
        return (_sphere_area(d) * eps ** (h - 1.0) * math.gamma(h) * scaled_tail
                / (2.0 * (2.0 * math.pi) ** h * s2**h))
    if alpha == 4.0 and d == 2:
        x = math.sqrt(eps) / (2.0 * s2)
        si, ci = specfun.sici(x)
        return (2.0 * ci * math.sin(x) + math.cos(x) * (math.pi - 2.0 * si)) / (4.0 * math.sqrt(eps) * s2)
    raise UnsupportedBranchError(f"no closed first moment for eps={eps:g}, alpha={alpha:g}, d={d}")


def closed_second_moment(loc: GaussianLocation, pl: PathLoss, m: Optional[float],
                         d: Optional[int] = None) -> float:
    """``E[h**2 g(|y|)**2]`` for ``y ~ N(0, sigma**2 I)`` and Nakagami-``m`` power gain.

    ``m=None`` means no fading. Supported branches: ``eps = 0`` with ``2 alpha < d``,
    and ``alpha = 2`` with ``eps > 0``.
    """
    s2 = _isotropic_or_raise(loc, d)
    d = loc.d
    h2 = fading_second_moment(m)
    eps, alpha = pl.eps, pl.alpha
    if eps == 0.0:
        return h2 * _singular_moment(d, 2.0 * alpha, s2)
    if alpha == 2.0:
        p = 1.0 / (2.0 * s2)
        x = p * eps
        if x > _MAX_CLOSED_ARG:
            raise UnsupportedBranchError("closed form loses accuracy for eps >> sigma^2")
        h = d / 2.0
        scaled_tail = math.exp(x) * specfun.upper_incomplete_gamma(1.0 - h, x)
        bracket = p ** (1.0 - h) / eps - eps ** (h - 2.0) * scaled_tail * (h - 1.0 + x)
        g2 = _sphere_area(d) * math.gamma(h) * bracket / (2.0 * (2.0 * math.pi) ** h * s2**h)
        return h2 * g2
    raise UnsupportedBranchError(
        f"no closed second moment for eps={eps:g}, alpha={alpha:g} (quadrature serves this case)")
