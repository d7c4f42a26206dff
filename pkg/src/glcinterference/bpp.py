"""When does a Gaussian binomial point process stand in for the exact prediction?

For homogeneous interferers every relative location shares one covariance,
so after rotating to its principal axes the per-interferer laws differ only
through the standardized offsets ``eta_a / sigma_a``. If those ratios agree
across interferers as ``t`` grows, every interferer contributes the same
radial functional. The aggregate statistics then reduce to ``N`` copies of a
single one. This module probes that condition on a finite horizon grid
and evaluates the resulting approximations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cgppf, specfun
from .cgppf import Integrand
from .errors import HomogeneityError, InvalidArgumentError
from .lindyn import GaussianLocation, is_lyapunov_stable, relative_distribution
from .predict import Scenario, radial_functional

__all__ = [
    "BppVerdict",
    "BppConditionWarning",
    "probe_horizons",
    "ratio_trajectories",
    "check_bpp_condition",
    "bpp_approx_mean",
    "bpp_approx_mgf",
    "brownian_bpp_mean_closed",
]


class BppConditionWarning(UserWarning):
    """Issued when an approximation is requested for a scenario failing the condition."""


@dataclass(frozen=True, eq=False)
class BppVerdict:
    """Outcome of the finite-horizon BPP test.

    ``satisfied`` is the pairwise test (ratios agree across interferers);
    ``zero_limit_satisfied`` is the stronger test that every ratio tends to 0.
    Arrays indexed by probe follow ``horizons``.
    """

    satisfied: bool
    zero_limit_satisfied: bool
    per_axis_ratios: np.ndarray
    max_pairwise_gap: float
    horizon: float
    rationale: str
    horizons: np.ndarray = field(repr=False, default=None)
    gaps: np.ndarray = field(repr=False, default=None)
    max_abs_ratios: np.ndarray = field(repr=False, default=None)
    gap_tol: float = 1e-2
    lyapunov_stable: Optional[bool] = None

    def as_dict(self) -> dict:
        return {
            "satisfied": bool(self.satisfied),
            "zero_limit_satisfied": bool(self.zero_limit_satisfied),
            "max_pairwise_gap": float(self.max_pairwise_gap),
            "max_abs_ratio": float(self.max_abs_ratios[-1]),
            "horizon": float(self.horizon),
            "gap_tol": float(self.gap_tol),
            "rationale": self.rationale,
            "lyapunov_stable_advisory": self.lyapunov_stable,
            "per_axis_ratios": self.per_axis_ratios.tolist(),
            "probe": {
                "horizons": self.horizons.tolist(),
                "gaps": self.gaps.tolist(),
                "max_abs_ratios": self.max_abs_ratios.tolist(),
            },
        }


def probe_horizons(s: float, t1: float, n: int = 16, first: float = 2.0, last: float = 1024.0) -> np.ndarray:
    """Geometric grid ``s + (t1 - s) * [first .. last]`` with ``n`` points."""
    if not t1 > s:
        raise InvalidArgumentError(f"base horizon t1={t1} must exceed s={s}")
    return s + (t1 - s) * np.geomspace(first, last, n)


def _require_homogeneous(sc: Scenario):
    if not sc.is_homogeneous():
        raise HomogeneityError("interferers do not share (A, C, Q); the BPP condition presumes homogeneity")


def ratio_trajectories(sc: Scenario, horizons: Sequence[float]) -> np.ndarray:
    """Standardized offsets ``eta_a / sigma_a`` for each horizon, interferer and axis.

    Returns an array of shape ``(len(horizons), N, d)``. The principal axes
    come from the covariance shared by the (homogeneous) interferers, so all
    interferers are expressed in one frame.
    """
    _require_homogeneous(sc)
    horizons = np.asarray(horizons, dtype=float)
    if horizons.ndim != 1 or horizons.size == 0:
        raise InvalidArgumentError("horizons must be a non-empty 1-D grid")
    if np.any(horizons <= sc.s) or np.any(np.diff(horizons) <= 0):
        raise InvalidArgumentError("horizons must be strictly increasing and later than s")
    out = np.empty((horizons.size, sc.N, sc.d))
    for k, t in enumerate(horizons):
        locs = [relative_distribution(node, sc.reference, t) for node in sc.interferers]
        frame = cgppf.diagonalize(locs[0])
        for i, loc in enumerate(locs):
            out[k, i] = (frame.P.T @ loc.mu) / frame.sigma_axes
    return out


def _non_increasing(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) <= 1e-9 * np.abs(values[:-1]) + 1e-15))


def check_bpp_condition(sc: Scenario, horizon: Optional[float] = None, gap_tol: float = 1e-2,
                        n_probe: int = 16) -> BppVerdict:
    """Test the BPP condition on a geometric horizon grid.

    Parameters
    ----------
    sc : Scenario
        Must have homogeneous interferers.
    horizon : float, optional
        Base time ``t1``; the probe grid runs from ``s + 2 (t1 - s)`` to
        ``s + 1024 (t1 - s)``. Defaults to ``s + 1``.
    gap_tol : float
        Threshold on the largest pairwise ratio gap (and, for the zero-limit
        test, on the largest absolute ratio) at the final probe.
    n_probe : int
        Number of probe horizons.

    Notes
    -----
    A limit cannot be observed from samples. Each test therefore requires
    its statistic to fall below ``gap_tol`` at the last probe and to be
    non-increasing over the second half of the grid. The Lyapunov-stability
    flag of the interferer dynamics is reported as an advisory only.
    """
    if not gap_tol > 0:
        raise InvalidArgumentError(f"gap_tol must be positive, got {gap_tol}")
    t1 = sc.s + 1.0 if horizon is None else float(horizon)
    grid = probe_horizons(sc.s, t1, n_probe)
    ratios = ratio_trajectories(sc, grid)
    spread = ratios.max(axis=1) - ratios.min(axis=1)
    gaps = spread.max(axis=1)
    max_abs = np.abs(ratios).max(axis=(1, 2))
    tail = slice(n_probe // 2, None)

    gap_ok = bool(gaps[-1] < gap_tol and _non_increasing(gaps[tail]))
    zero_ok = bool(max_abs[-1] < gap_tol and _non_increasing(max_abs[tail]))
    if sc.N == 1:
        rationale = "single interferer: no pairs to compare"
    elif gap_ok:
        rationale = "standardized offsets agree across interferers"
    elif gaps[-1] >= gap_tol:
        rationale = "standardized offsets still differ at the last probe"
    else:
        rationale = "offset gap below threshold but not settling"
    if not zero_ok:
        rationale += "; offsets do not vanish"
    return BppVerdict(
        satisfied=gap_ok,
        zero_limit_satisfied=zero_ok,
        per_axis_ratios=ratios[-1],
        max_pairwise_gap=float(gaps[-1]),
        horizon=float(grid[-1]),
        rationale=rationale,
        horizons=grid,
        gaps=gaps,
        max_abs_ratios=max_abs,
        gap_tol=float(gap_tol),
        lyapunov_stable=is_lyapunov_stable(sc.interferers[0][0].A),
    )


def _representative_location(sc: Scenario, t: float, representative: int, center: bool) -> GaussianLocation:
    if not 0 <= representative < sc.N:
        raise InvalidArgumentError(f"representative must be in [0, {sc.N}), got {representative}")
    loc = relative_distribution(sc.interferers[representative], sc.reference, t)
    if center:
        loc = GaussianLocation(np.zeros_like(loc.mu), loc.sigma, loc.t, loc.s)
    return loc


def _advise(sc: Scenario, check: bool):
    if check and sc.N > 1:
        try:
            ok = check_bpp_condition(sc).satisfied
        except HomogeneityError:
            ok = False
        if not ok:
            warnings.warn("scenario does not satisfy the BPP condition; the approximation may be poor",
                          BppConditionWarning, stacklevel=3)


def bpp_approx_mean(sc: Scenario, t: float, representative: int = 0, center: bool = False,
                    method: str = "auto", check: bool = False) -> float:
    """``N * E[g(|y_r|)]`` for a single representative interferer ``r``.

    With ``center=True`` the representative's relative mean is replaced by
    zero. That is the Gaussian BPP at the reference node, the limit object
    when the standardized offsets vanish.
    """
    loc = _representative_location(sc, t, representative, center)
    _advise(sc, check)
    nu = Integrand.mean(sc.pathloss)
    value = radial_functional(nu, loc, method, lambda l: cgppf.closed_first_moment(l, sc.pathloss))
    return sc.N * value


def bpp_approx_mgf(sc: Scenario, t: float, beta: float, representative: int = 0,
                   center: bool = False, method: str = "auto", check: bool = False) -> float:
    """``E[exp(beta h g(|y_r|))]**N`` for a representative interferer ``r``."""
    loc = _representative_location(sc, t, representative, center)
    _advise(sc, check)
    if beta == 0.0:
        return 1.0
    nu = sc.fading.mgf_integrand(sc.pathloss, beta)
    return radial_functional(nu, loc, method) ** sc.N


def brownian_bpp_mean_closed(eps: float, sigma2: float, N: int) -> float:
    """``N`` times the isotropic zero-mean first moment for ``alpha = 4``, ``d = 2``.

    ``N [2 Ci(x) sin(x) + cos(x) (pi - 2 Si(x))] / (4 sqrt(eps) sigma2)`` with
    ``x = sqrt(eps) / (2 sigma2)``.
    """
    if not (eps > 0 and sigma2 > 0):
        raise InvalidArgumentError(f"eps and sigma2 must be positive, got {eps}, {sigma2}")
    if int(N) != N or N < 1:
        raise InvalidArgumentError(f"N must be a positive integer, got {N}")
    x = math.sqrt(eps) / (2.0 * sigma2)
    si, ci = specfun.sici(x)
    return N * (2.0 * ci * math.sin(x) + math.cos(x) * (math.pi - 2.0 * si)) / (4.0 * math.sqrt(eps) * sigma2)
