"""Mean, variance and MGF of the aggregate interference at a mobile reference node.

The interference at time ``t`` predicted from states known at ``s`` is
``I(t|s) = sum_i h_i g(|y_i(t) - y_0(t)|)``. Each relative location is
Gaussian (see :mod:`glcinterference.lindyn`), so every statistic reduces to
per-interferer radial functionals evaluated by :mod:`glcinterference.cgppf`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import cgppf
from .cgppf import Integrand, PathLoss
from .errors import (
    DivergenceError,
    InvalidArgumentError,
    SeriesDivergenceError,
    UnsupportedBranchError,
    UnsupportedDimensionError,
)
from .lindyn import GaussianLocation, GlcModel, NodeState, check_homogeneous, relative_distribution

__all__ = [
    "FadingKind",
    "FadingModel",
    "Scenario",
    "PredictionResult",
    "METHODS",
    "relative_locations",
    "radial_functional",
    "mean_interference",
    "variance_interference",
    "mgf_interference",
    "interference_moments",
]

METHODS = ("auto", "quadrature", "series", "closed")


class FadingKind(enum.Enum):
    NONE = "none"
    NAKAGAMI = "nakagami"


@dataclass(frozen=True)
class FadingModel:
    """Multiplicative power gain ``h``: none (``h = 1``) or Nakagami-m (Gamma(m, rate m))."""

    kind: FadingKind = FadingKind.NONE
    m: Optional[float] = None

    def __post_init__(self):
        kind = FadingKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is FadingKind.NAKAGAMI:
            if self.m is None or not (np.isfinite(self.m) and self.m >= 0.5):
                raise InvalidArgumentError(f"Nakagami shape must be >= 0.5, got {self.m}")
            object.__setattr__(self, "m", float(self.m))
        elif self.m is not None:
            raise InvalidArgumentError("m is only meaningful for Nakagami fading")

    @classmethod
    def none(cls) -> "FadingModel":
        return cls(FadingKind.NONE)

    @classmethod
    def nakagami(cls, m: float) -> "FadingModel":
        return cls(FadingKind.NAKAGAMI, m)

    @property
    def second_moment(self) -> float:
        return cgppf.fading_second_moment(self.m if self.kind is FadingKind.NAKAGAMI else None)

    def mgf_integrand(self, pl: PathLoss, beta: float) -> Integrand:
        """Radial function ``E_h[exp(beta h g(r))]``."""
        if self.kind is FadingKind.NAKAGAMI:
            return Integrand.nakagami_mgf(pl, beta, self.m)
        return Integrand.exp_mgf(pl, beta)


Node = Tuple[GlcModel, NodeState]


@dataclass(frozen=True)
class Scenario:
    """A reference node, ``N >= 1`` interferers, and the channel."""

    reference: Node
    interferers: Tuple[Node, ...]
    pathloss: PathLoss
    fading: FadingModel = field(default_factory=FadingModel)
    d: Optional[int] = None

    def __post_init__(self):
        interferers = tuple((m, s) for m, s in self.interferers)
        if not interferers:
            raise InvalidArgumentError("a scenario needs at least one interferer")
        object.__setattr__(self, "interferers", interferers)
        object.__setattr__(self, "reference", tuple(self.reference))
        nodes = (self.reference,) + interferers
        d = self.d if self.d is not None else self.reference[0].d
        s = self.reference[1].s
        for k, (model, state) in enumerate(nodes):
            if model.d != d:
                raise InvalidArgumentError(f"node {k} has output dimension {model.d}, expected {d}")
            if state.x.shape[0] != model.n:
                raise InvalidArgumentError(f"node {k} state has wrong length for its model")
            if state.s != s:
                raise InvalidArgumentError(f"node {k} anchor time {state.s} differs from {s}")
        object.__setattr__(self, "d", int(d))

    @property
    def N(self) -> int:
        return len(self.interferers)

    @property
    def s(self) -> float:
        return self.reference[1].s

    def is_homogeneous(self, rel_tol: float = 1e-12) -> bool:
        return check_homogeneous([m for m, _ in self.interferers], rel_tol)


@dataclass(frozen=True, eq=False)
class PredictionResult:
    """Interference statistics at time ``t`` from information at ``s``.

    ``variance`` is ``inf`` when the second moment does not exist.
    """

    mean: float
    variance: float
    per_interferer_mean: np.ndarray
    t: float
    s: float
    per_interferer_variance: Optional[np.ndarray] = None

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def _check_method(method):
    if method not in METHODS:
        raise InvalidArgumentError(f"method must be one of {METHODS}, got {method!r}")


def relative_locations(sc: Scenario, t: float) -> List[GaussianLocation]:
    """Relative location law of every interferer with respect to the reference."""
    if t < sc.s:
        raise InvalidArgumentError(f"t={t} precedes the anchor time s={sc.s}")
    return [relative_distribution(node, sc.reference, t) for node in sc.interferers]


def _is_deterministic(loc: GaussianLocation) -> bool:
    return loc.t == loc.s or not np.any(loc.sigma)


def _deterministic(nu: Integrand, loc: GaussianLocation) -> float:
    value = float(nu(np.linalg.norm(loc.mu)))
    if not math.isfinite(value):
        raise DivergenceError("path loss is infinite at zero realized distance")
    return value


def radial_functional(nu: Integrand, loc: GaussianLocation, method: str = "auto",
                      closed: Optional[Callable[[GaussianLocation], float]] = None) -> float:
    """``E[nu(|y|)]`` for one location law, dispatched by ``method``.

    A location with zero covariance (``t = s``) is evaluated at its mean.
    ``closed`` is an optional closed-form evaluator tried for isotropic,
    zero-mean laws.
    """
    if _is_deterministic(loc):
        return _deterministic(nu, loc)
    if method == "closed":
        if closed is None:
            raise UnsupportedBranchError("no closed form for this functional")
        return closed(loc)
    if method == "auto" and closed is not None and cgppf.isotropic_variance(loc) is not None:
        try:
            return closed(loc)
        except UnsupportedBranchError:
            pass
    if method == "series":
        try:
            return cgppf.eval_series(nu, cgppf.diagonalize(loc))
        except (SeriesDivergenceError, UnsupportedDimensionError) as exc:
            warnings.warn(f"series form unavailable ({exc}); using quadrature", RuntimeWarning,
                          stacklevel=3)
    return cgppf.eval_quadrature(nu, loc)


def _per_interferer(sc: Scenario, t: float, fn):
    values = []
    for i, loc in enumerate(relative_locations(sc, t)):
        try:
            values.append(fn(loc))
        except DivergenceError as exc:
            raise DivergenceError(f"interferer {i + 1}: {exc}") from exc
    return np.array(values, dtype=float)


def _means(sc: Scenario, t: float, method: str) -> np.ndarray:
    nu = Integrand.mean(sc.pathloss)

    def closed(loc):
        return cgppf.closed_first_moment(loc, sc.pathloss)

    return _per_interferer(sc, t, lambda loc: radial_functional(nu, loc, method, closed))


def _variances(sc: Scenario, t: float, method: str, means: np.ndarray) -> np.ndarray:
    nu = Integrand.squared(sc.pathloss)
    h2 = sc.fading.second_moment
    m = sc.fading.m

    def closed(loc):
        return cgppf.closed_second_moment(loc, sc.pathloss, m) / h2

    # the second moment has no closed form for every branch, so "closed" degrades to "auto"
    method = "auto" if method == "closed" else method
    second = _per_interferer(sc, t, lambda loc: radial_functional(nu, loc, method, closed))
    out = h2 * second - means**2
    return np.maximum(out, 0.0)


def mean_interference(sc: Scenario, t: float, method: str = "auto") -> PredictionResult:
    """Predicted mean (and variance) of the aggregate interference at time ``t``.

    Parameters
    ----------
    sc : Scenario
    t : float
        Prediction time, ``t >= sc.s``. At ``t = s`` the locations are known and
        only fading remains random.
    method : {"auto", "quadrature", "series", "closed"}
        ``auto`` uses the isotropic closed forms when they apply and quadrature
        otherwise. ``series`` falls back to quadrature with a warning when the
        series does not converge.
    """
    _check_method(method)
    means = _means(sc, t, method)
    try:
        variances = _variances(sc, t, method, means)
        variance = float(np.sum(variances))
    except DivergenceError:
        variances = np.full(sc.N, math.inf)
        variance = math.inf
    return PredictionResult(
        mean=float(np.sum(means)),
        variance=variance,
        per_interferer_mean=means,
        t=float(t),
        s=sc.s,
        per_interferer_variance=variances,
    )


def variance_interference(sc: Scenario, t: float, method: str = "auto") -> float:
    """``Var[I(t|s)]``, summed over independent interferers.

    Raises
    ------
    DivergenceError
        If some interferer's second moment does not exist.
    """
    _check_method(method)
    means = _means(sc, t, method)
    return float(np.sum(_variances(sc, t, method, means)))


def mgf_interference(sc: Scenario, t: float, beta: float, method: str = "auto") -> float:
    """``E[exp(beta I(t|s))]``: the product of per-interferer radial functionals.

    Raises
    ------
    MgfDomainError
        ``beta`` outside the existence region (``beta < m eps`` for Nakagami
        fading, ``beta <= 0`` for singular path loss).
    """
    _check_method(method)
    if beta == 0.0:
        return 1.0
    nu = sc.fading.mgf_integrand(sc.pathloss, beta)
    factors = _per_interferer(sc, t, lambda loc: radial_functional(nu, loc, method))
    return float(np.prod(factors))


def interference_moments(sc: Scenario, times: Sequence[float], method: str = "auto"):
    """Convenience: :func:`mean_interference` over a grid of times."""
    return [mean_interference(sc, t, method) for t in times]
