import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repro", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repro")

from glcinterference.cgppf import PathLoss
from glcinterference.lindyn import GaussianLocation, GlcModel, NodeState
from glcinterference.predict import FadingModel, Scenario


def brownian_model(d=2, q=1.0):
    return GlcModel(np.zeros((d, d)), np.eye(d), q * np.eye(d))


def brownian_scenario(n=6, offsets=None, eps=1.0, alpha=4.0, fading=None, d=2):
    model = brownian_model(d)
    ref = (model, NodeState(np.zeros(d)))
    if offsets is None:
        offsets = [np.zeros(d)] * n
    nodes = [(model, NodeState(np.asarray(p, dtype=float))) for p in offsets]
    fading = FadingModel.nakagami(2.0) if fading is None else fading
    return Scenario(ref, nodes, PathLoss(eps, alpha), fading, d)


def static_pair(distance=1.0, eps=1.0, alpha=4.0, fading=None):
    """Reference at the origin and one interferer at ``distance``, both noiseless."""
    model = GlcModel(np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)))
    ref = (model, NodeState(np.zeros(2)))
    other = (model, NodeState(np.array([distance, 0.0])))
    return Scenario(ref, [other], PathLoss(eps, alpha), fading or FadingModel.none(), 2)


def location(mu, sigma, t=1.0, s=0.0):
    return GaussianLocation(np.asarray(mu, dtype=float), np.asarray(sigma, dtype=float), t, s)


def random_spd(rng, d, cond=10.0, scale=1.0):
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    eig = scale * np.geomspace(1.0, 1.0 / cond, d) * rng.uniform(0.5, 2.0)
    return (q * eig) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed, detail = results[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail}")
