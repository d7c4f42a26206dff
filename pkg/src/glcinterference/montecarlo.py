"""Monte Carlo realizations of node trajectories, fading and interference.

Trajectories are sampled exactly. Over a step ``dt`` the state moves to
``expm(A dt) x + xi`` with ``xi ~ N(0, Theta(dt))``, so there is no
discretization bias at any step size. Each realization owns an independent
Philox stream keyed by ``(seed, realization index)``. Results therefore do
not depend on how realizations are spread across threads.
"""

from __future__ import annotations

import hashlib
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cgppf import PathLoss
from .errors import DivergenceError, InvalidArgumentError
from .lindyn import GlcModel, transition
from .predict import FadingKind, FadingModel, Scenario

__all__ = [
    "TrajectorySet",
    "EmpiricalStats",
    "realization_rng",
    "scenario_digest",
    "thread_count",
    "simulate_trajectories",
    "sample_fading",
    "realized_interference",
    "interference_samples",
    "sample_relative_endpoints",
    "empirical_statistics",
    "empirical_statistics_grid",
    "summarize_samples",
]


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """One realization of every node's state on a time grid.

    ``states[k]`` has shape ``(len(times), n_k)``; node 0 is the reference.
    ``locations[k]`` holds the matching outputs ``C x``.
    """

    times: np.ndarray
    states: Tuple[np.ndarray, ...]
    locations: Tuple[np.ndarray, ...]
    seed: int
    scenario_hash: str
    realization: int = 0

    def __eq__(self, other):
        if not isinstance(other, TrajectorySet):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.realization == other.realization
            and self.scenario_hash == other.scenario_hash
            and np.array_equal(self.times, other.times)
            and all(np.array_equal(a, b) for a, b in zip(self.states, other.states))
        )

    __hash__ = None


@dataclass(frozen=True)
class EmpiricalStats:
    """Sample statistics of ``M`` independent realizations of ``I(t)``."""

    mean_hat: float
    var_hat: float
    std_error_mean: float
    M: int
    mgf_hat: Optional[float] = None
    mgf_std_error: Optional[float] = None
    beta: Optional[float] = None


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for realization ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def scenario_digest(sc: Scenario) -> str:
    """SHA-256 of the numerical content of a scenario."""
    h = hashlib.sha256()
    for model, state in (sc.reference,) + sc.interferers:
        for arr in (model.A, model.C, model.Q, state.x):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
            h.update(repr(arr.shape).encode())
        h.update(repr(float(state.s)).encode())
    h.update(repr((sc.pathloss.eps, sc.pathloss.alpha, sc.fading.kind.value, sc.fading.m)).encode())
    return h.hexdigest()


def thread_count() -> int:
    """Worker threads, capped by the ``GLC_THREADS`` environment variable."""
    raw = os.environ.get("GLC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InvalidArgumentError(f"GLC_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def _check_grid(times, s) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidArgumentError("time grid must be a non-empty 1-D sequence")
    if times[0] != s:
        raise InvalidArgumentError(f"time grid must start at the anchor time s={s}, got {times[0]}")
    if np.any(np.diff(times) <= 0):
        raise InvalidArgumentError("time grid must be strictly increasing")
    return times


def _noise_factor(W: np.ndarray) -> np.ndarray:
    """Symmetric square root ``L`` with ``L L^T = W``, clamping round-off negatives."""
    w, V = np.linalg.eigh(0.5 * (W + W.T))
    scale = max(float(np.max(np.abs(w), initial=0.0)), 1e-300)
    if np.any(w < -1e-12 * scale):
        warnings.warn(f"step covariance has negative eigenvalue {w.min():.3g}; clamped to 0",
                      RuntimeWarning, stacklevel=3)
    return V * np.sqrt(np.clip(w, 0.0, None))


class _Stepper:
    """Cached exact one-step transitions for every node and step length."""

    def __init__(self, sc: Scenario, times: np.ndarray):
        self.nodes = (sc.reference,) + sc.interferers
        self.steps = np.diff(times)
        cache: Dict[Tuple[int, float], Tuple[np.ndarray, np.ndarray]] = {}
        self.plan: List[List[Tuple[np.ndarray, np.ndarray]]] = []
        for k, (model, _) in enumerate(self.nodes):
            key_model = self._model_key(model)
            per_node = []
            for dt in self.steps:
                key = (key_model, float(dt))
                if key not in cache:
                    F, W = transition(model, float(dt))
                    cache[key] = (F, _noise_factor(W))
                per_node.append(cache[key])
            self.plan.append(per_node)

    @staticmethod
    def _model_key(model: GlcModel):
        return hashlib.sha1(b"".join(np.ascontiguousarray(a).tobytes() for a in (model.A, model.Q))
                            + repr(model.A.shape).encode()).hexdigest()

    def run(self, rng: np.random.Generator) -> List[np.ndarray]:
        out = []
        T = self.steps.size + 1
        for k, (model, state) in enumerate(self.nodes):
            n = model.n
            xs = np.empty((T, n))
            xs[0] = state.x
            z = rng.standard_normal((T - 1, n))
            for j, (F, L) in enumerate(self.plan[k]):
                xs[j + 1] = F @ xs[j] + L @ z[j]
            out.append(xs)
        return out


def simulate_trajectories(sc: Scenario, times: Sequence[float], seed: int,
                          realization: int = 0) -> TrajectorySet:
    """Sample one realization of every node on ``times`` (``times[0]`` = anchor ``s``)."""
    times = _check_grid(times, sc.s)
    stepper = _Stepper(sc, times)
    states = stepper.run(realization_rng(seed, realization))
    locs = tuple(xs @ model.C.T for (model, _), xs in zip(stepper.nodes, states))
    for arr in states + list(locs):
        arr.setflags(write=False)
    return TrajectorySet(times, tuple(states), locs, int(seed), scenario_digest(sc), int(realization))


def sample_fading(f: FadingModel, rng: np.random.Generator, size=None):
    """Power gain draw(s): Gamma(shape m, rate m) for Nakagami, 1 for no fading."""
    if f.kind is FadingKind.NONE:
        return 1.0 if size is None else np.ones(size)
    return rng.gamma(f.m, 1.0 / f.m, size)


def _grid_index(times: np.ndarray, t: float) -> int:
    idx = int(np.searchsorted(times, t))
    for j in (idx - 1, idx):
        if 0 <= j < times.size and abs(times[j] - t) <= 1e-12 * max(1.0, abs(t)):
            return j
    raise InvalidArgumentError(f"t={t} is not on the trajectory grid (no interpolation)")


def _interference(distances: np.ndarray, gains: np.ndarray, pl: PathLoss) -> float:
    g = pl(distances)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("realized interferer coincides with the reference under singular path loss")
    return float(np.dot(gains, g))


def realized_interference(traj: TrajectorySet, t: float, pl: PathLoss, f: FadingModel,
                          rng: np.random.Generator) -> float:
    """``sum_i h_i g(|y_i(t) - y_0(t)|)`` at a grid time with fresh fading draws."""
    j = _grid_index(traj.times, t)
    y0 = traj.locations[0][j]
    dist = np.array([np.linalg.norm(y[j] - y0) for y in traj.locations[1:]])
    gains = np.atleast_1d(sample_fading(f, rng, dist.size))
    return _interference(dist, gains, pl)


def _run_parallel(fn, M: int):
    workers = min(thread_count(), M)
    if workers <= 1:
        return [fn(i) for i in range(M)]
    chunks = np.array_split(np.arange(M), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: [fn(int(i)) for i in idx], chunks))
    return [item for part in parts for item in part]


def interference_samples(sc: Scenario, times: Sequence[float], M: int, seed: int) -> np.ndarray:
    """Realized interference, shape ``(M, len(times))``.

    Each realization samples one trajectory of every node over the whole grid
    (prefixed by ``s`` if needed) and fresh fading at every grid time.
    """
    if int(M) != M or M < 1:
        raise InvalidArgumentError(f"M must be a positive integer, got {M}")
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return np.empty((int(M), 0))
    prefixed = times[0] != sc.s
    grid = _check_grid(np.concatenate([[sc.s], times]) if prefixed else times, sc.s)
    stepper = _Stepper(sc, grid)
    C = [model.C for model, _ in stepper.nodes]
    pl, fading = sc.pathloss, sc.fading
    offset = 1 if prefixed else 0

    def one(i):
        rng = realization_rng(seed, i)
        states = stepper.run(rng)
        locs = [xs[offset:] @ c.T for xs, c in zip(states, C)]
        dist = np.linalg.norm(np.stack(locs[1:]) - locs[0][None], axis=2)  # (N, T)
        gains = sample_fading(fading, rng, dist.T.shape).T
        g = pl(dist)
        if not np.all(np.isfinite(g)):
            raise DivergenceError("realized interferer coincides with the reference under singular path loss")
        return np.sum(gains * g, axis=0)

    return np.array(_run_parallel(one, int(M)))


def sample_relative_endpoints(sc: Scenario, t: float, M: int, seed: int) -> np.ndarray:
    """Realized ``y_i(t) - y_0(t)`` for every interferer, shape ``(M, N, d)``."""
    if t < sc.s:
        raise InvalidArgumentError(f"t={t} precedes s={sc.s}")
    grid = np.array([sc.s, t]) if t > sc.s else np.array([sc.s])
    stepper = _Stepper(sc, grid)
    C = [model.C for model, _ in stepper.nodes]

    def one(i):
        states = stepper.run(realization_rng(seed, i))
        y = [xs[-1] @ c.T for xs, c in zip(states, C)]
        return np.stack(y[1:]) - y[0]

    return np.array(_run_parallel(one, int(M)))


def _pairwise_mean(x: np.ndarray) -> float:
    # numpy reduces float arrays pairwise in a fixed order
    return float(np.sum(x) / x.size)


def summarize_samples(samples: np.ndarray, beta: Optional[float]) -> EmpiricalStats:
    M = samples.size
    mean = _pairwise_mean(samples)
    var = float(np.sum((samples - mean) ** 2) / (M - 1))
    mgf = mgf_se = None
    if beta is not None:
        e = np.exp(beta * samples)
        mgf = _pairwise_mean(e)
        mgf_se = math.sqrt(float(np.sum((e - mgf) ** 2) / (M - 1)) / M)
    return EmpiricalStats(mean, var, math.sqrt(var / M), M, mgf, mgf_se,
                          None if beta is None else float(beta))


def empirical_statistics(sc: Scenario, t: float, M: int, beta: Optional[float] = None,
                         seed: int = 0) -> EmpiricalStats:
    """Sample mean, variance and (optionally) MGF of ``I(t)`` over ``M`` realizations.

    Every realization draws fresh trajectories and fading from its own stream.
    """
    if int(M) != M or M < 2:
        raise InvalidArgumentError(f"need M >= 2 realizations for a variance, got {M}")
    samples = interference_samples(sc, [t], M, seed)[:, 0]
    return summarize_samples(samples, beta)


def empirical_statistics_grid(sc: Scenario, times: Sequence[float], M: int, seed: int = 0,
                              beta: Optional[float] = None):
    """Per-time :class:`EmpiricalStats` plus the raw ``(M, T)`` sample matrix."""
    if int(M) != M or M < 2:
        raise InvalidArgumentError(f"need M >= 2 realizations for a variance, got {M}")
    samples = interference_samples(sc, times, M, seed)
    return [summarize_samples(samples[:, j], beta) for j in range(samples.shape[1])], samples
