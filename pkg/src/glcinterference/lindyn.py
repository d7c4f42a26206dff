"""Linear continuous-time mobility models and their Gaussian location laws.

A node evolves as ``dx/dt = A x + w`` with white Gaussian ``w`` of power
spectral density ``Q`` and is observed at location ``y = C x``. Given the
state at an anchor time ``s`` the location at ``t >= s`` is Gaussian with
mean ``C expm(A (t-s)) x(s)`` and covariance ``C Theta(t) C^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from .errors import InvalidArgumentError

__all__ = [
    "GlcModel",
    "NodeState",
    "GaussianLocation",
    "matrix_exponential",
    "state_covariance_theta",
    "state_covariance_theta_quadrature",
    "transition",
    "predict_node_distribution",
    "relative_distribution",
    "check_homogeneous",
    "is_lyapunov_stable",
]


def _frozen_array(value, name, ndim):
    arr = np.array(value, dtype=float)
    if arr.ndim != ndim:
        raise InvalidArgumentError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must contain only finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GlcModel:
    """State-space mobility model ``dx = A x dt + dW``, ``y = C x``, ``Cov[dW] = Q dt``."""

    A: np.ndarray
    C: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        A = _frozen_array(self.A, "A", 2)
        C = _frozen_array(self.C, "C", 2)
        Q = _frozen_array(self.Q, "Q", 2)
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidArgumentError(f"A must be square, got {A.shape}")
        if Q.shape != (n, n):
            raise InvalidArgumentError(f"Q must be {n}x{n}, got {Q.shape}")
        if C.shape[1] != n or not 1 <= C.shape[0] <= 3:
            raise InvalidArgumentError(f"C must be d x {n} with 1 <= d <= 3, got {C.shape}")
        scale = max(1.0, float(np.max(np.abs(Q))))
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * scale):
            raise InvalidArgumentError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-12 * scale:
            raise InvalidArgumentError("Q must be positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Q", Q)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.C.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GlcModel):
            return NotImplemented
        return (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.C, other.C)
            and np.array_equal(self.Q, other.Q)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NodeState:
    """State vector ``x`` known at anchor time ``s``."""

    x: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x, "x", 1))
        if not np.isfinite(self.s):
            raise InvalidArgumentError("anchor time s must be finite")
        object.__setattr__(self, "s", float(self.s))

    def __eq__(self, other):
        if not isinstance(other, NodeState):
            return NotImplemented
        return self.s == other.s and np.array_equal(self.x, other.x)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GaussianLocation:
    """Gaussian law of a (relative) location at prediction time ``t``."""

    mu: np.ndarray
    sigma: np.ndarray
    t: float
    s: float

    def __post_init__(self):
        mu = _frozen_array(self.mu, "mu", 1)
        sigma = _frozen_array(self.sigma, "sigma", 2)
        d = mu.shape[0]
        if sigma.shape != (d, d):
            raise InvalidArgumentError(f"sigma must be {d}x{d}, got {sigma.shape}")
        scale = max(float(np.max(np.abs(sigma))), 1e-300)
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10 * scale):
            raise InvalidArgumentError("sigma must be symmetric")
        if d and np.linalg.eigvalsh(sigma).min() < -1e-10 * scale:
            raise InvalidArgumentError("sigma must be positive semidefinite")
        if self.t < self.s:
            raise InvalidArgumentError(f"prediction time t={self.t} precedes anchor s={self.s}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self) -> int:
        return self.mu.shape[0]


# ---------------------------------------------------------------------------
# Matrix exponential: scaling and squaring with Pade approximants
# ---------------------------------------------------------------------------

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ),
}
# Largest 1-norm for which each degree meets unit roundoff (Higham 2005).
_THETA = ((3, 1.495585217958292e-2), (5, 2.539398330063230e-1),
          (7, 9.504178996162932e-1), (9, 2.097847961257068e0))
_THETA_13 = 5.371920351148152


def _pade(A, m):
    b = _PADE_COEFFS[m]
    ident = np.eye(A.shape[0])
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    else:
        powers = [ident, A2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ A2)
        U = A @ sum(b[2 * j + 1] * powers[j] for j in range((m + 1) // 2))
        V = sum(b[2 * j] * powers[j] for j in range((m + 1) // 2))
    return np.linalg.solve(V - U, V + U)


def matrix_exponential(A, dt: float = 1.0) -> np.ndarray:
    """Return ``expm(A * dt)``.

    Scaling and squaring around a diagonal Pade approximant whose degree is
    picked from the 1-norm of ``A * dt``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"matrix_exponential needs a square matrix, got {A.shape}")
    if not np.isfinite(dt) or not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix_exponential needs finite input")
    M = A * float(dt)
    if M.size == 0:
        return np.zeros_like(M)
    norm = np.linalg.norm(M, 1)
    for m, theta in _THETA:
        if norm <= theta:
            return _pade(M, m)
    squarings = max(0, int(np.ceil(np.log2(norm / _THETA_13))))
    E = _pade(M / 2.0**squarings, 13)
    for _ in range(squarings):
        E = E @ E
    return E


# ---------------------------------------------------------------------------
# Location laws
# ---------------------------------------------------------------------------


def _check_times(s, t):
    if not (np.isfinite(s) and np.isfinite(t)):
        raise InvalidArgumentError("times must be finite")
    if t < s:
        raise InvalidArgumentError(f"t={t} precedes anchor time s={s}")


def state_covariance_theta(model: GlcModel, s: float, t: float) -> np.ndarray:
    """Noise-driven state covariance ``int_s^t e^{A(t-u)} Q e^{A^T(t-u)} du``.

    On a short step ``h`` with ``|A| h <= 1`` the value is read off the
    exponential of the block matrix ``[[-A, Q], [0, A^T]] h`` (Van Loan's
    identity) as ``E22^T E12``. It is then doubled up to ``t - s`` with
    ``Theta(2h) = Theta(h) + e^{Ah} Theta(h) e^{A^T h}``. A single block
    exponential over a long interval would contain ``e^{-A (t-s)}``. That
    factor is huge for stable ``A``, and the product cancels catastrophically.
    """
    _check_times(s, t)
    n = model.n
    dt = float(t) - float(s)
    if dt == 0.0:
        return np.zeros((n, n))
    norm = np.linalg.norm(model.A, 1) * dt
    doublings = max(0, int(np.ceil(np.log2(norm)))) if norm > 1.0 else 0
    h = dt / 2.0**doublings
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -model.A
    block[:n, n:] = model.Q
    block[n:, n:] = model.A.T
    E = matrix_exponential(block, h)
    F = E[n:, n:].T
    theta = F @ E[:n, n:]
    for _ in range(doublings):
        theta = theta + F @ theta @ F.T
        F = F @ F
    return 0.5 * (theta + theta.T)


def state_covariance_theta_quadrature(model: GlcModel, s: float, t: float,
                                      epsabs: float = 1e-13) -> np.ndarray:
    """Same quantity as :func:`state_covariance_theta`, by adaptive quadrature."""
    _check_times(s, t)
    dt = float(t) - float(s)
    if dt == 0.0:
        return np.zeros((model.n, model.n))

    def integrand(u):
        E = matrix_exponential(model.A, u)
        return E @ model.Q @ E.T

    theta, _ = integrate.quad_vec(integrand, 0.0, dt, epsabs=epsabs, epsrel=1e-12)
    return 0.5 * (theta + theta.T)


def transition(model: GlcModel, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Exact one-step discretisation ``x' = F x + xi``, ``xi ~ N(0, W)``; returns ``(F, W)``."""
    if dt < 0:
        raise InvalidArgumentError("dt must be non-negative")
    return matrix_exponential(model.A, dt), state_covariance_theta(model, 0.0, dt)


def predict_node_distribution(model: GlcModel, state: NodeState, t: float) -> GaussianLocation:
    """Gaussian law of the node location at time ``t`` given ``state``."""
    if state.x.shape[0] != model.n:
        raise InvalidArgumentError(
            f"state has {state.x.shape[0]} components, model expects {model.n}")
    _check_times(state.s, t)
    F = matrix_exponential(model.A, t - state.s)
    theta = state_covariance_theta(model, state.s, t)
    mu = model.C @ F @ state.x
    sigma = model.C @ theta @ model.C.T
    return GaussianLocation(mu, 0.5 * (sigma + sigma.T), float(t), state.s)


def relative_distribution(interferer: Tuple[GlcModel, NodeState],
                          reference: Tuple[GlcModel, NodeState],
                          t: float) -> GaussianLocation:
    """Law of ``y_i(t) - y_0(t)``: means subtract, covariances add (independent noises)."""
    model_i, state_i = interferer
    model_0, state_0 = reference
    if state_i.s != state_0.s:
        raise InvalidArgumentError(
            f"anchor times differ: interferer s={state_i.s}, reference s={state_0.s}")
    if model_i.d != model_0.d:
        raise InvalidArgumentError(
            f"output dimensions differ: interferer d={model_i.d}, reference d={model_0.d}")
    loc_i = predict_node_distribution(model_i, state_i, t)
    loc_0 = predict_node_distribution(model_0, state_0, t)
    return GaussianLocation(loc_i.mu - loc_0.mu, loc_i.sigma + loc_0.sigma, float(t), state_i.s)


def _close(X, Y, rel_tol):
    if X.shape != Y.shape:
        return False
    scale = max(float(np.max(np.abs(X), initial=0.0)), float(np.max(np.abs(Y), initial=0.0)))
    return bool(np.all(np.abs(X - Y) <= rel_tol * scale))


def check_homogeneous(models: Sequence[GlcModel], rel_tol: float = 1e-12) -> bool:
    """True when every model has the same ``A``, ``C`` and noise density ``Q``."""
    models = list(models)
    if not models:
        raise InvalidArgumentError("check_homogeneous needs at least one model")
    first = models[0]
    return all(
        _close(first.A, m.A, rel_tol) and _close(first.C, m.C, rel_tol) and _close(first.Q, m.Q, rel_tol)
        for m in models[1:]
    )


def is_lyapunov_stable(A, tol: float = 1e-9) -> bool:
    """Marginal (Lyapunov) stability of ``dx/dt = A x``.

    All eigenvalues in the closed left half plane, and those on the imaginary
    axis semisimple.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    eig = linalg.eigvals(A)
    if np.any(eig.real > tol * scale):
        return False
    seen = []
    for lam in eig[np.abs(eig.real) <= tol * scale]:
        if any(abs(lam - other) <= 1e-6 * scale for other in seen):
            continue
        seen.append(lam)
        algebraic = int(np.sum(np.abs(eig - lam) <= 1e-6 * scale))
        rank = np.linalg.matrix_rank(A - lam * np.eye(n), tol=1e-8 * scale)
        if n - rank != algebraic:
            return False
    return True
