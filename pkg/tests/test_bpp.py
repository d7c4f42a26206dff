import warnings

import numpy as np
import pytest

from glcinterference import bpp
from glcinterference.errors import HomogeneityError, InvalidArgumentError
from glcinterference.lindyn import GlcModel, NodeState
from glcinterference.predict import Scenario, mean_interference, mgf_interference
from glcinterference.scenarios import build_preset, inertia2d
from glcinterference.cgppf import PathLoss

from conftest import brownian_model, brownian_scenario


@pytest.fixture(scope="module")
def inertia():
    return inertia2d().scenario


@pytest.fixture(scope="module")
def inertia_equal():
    v = np.tile([0.3, -0.2], (7, 1))
    return inertia2d(velocities=v).scenario


class TestProbe:
    def test_grid(self):
        grid = bpp.probe_horizons(0.0, 1.0, 16)
        assert grid[0] == pytest.approx(2.0) and grid[-1] == pytest.approx(1024.0)
        np.testing.assert_allclose(grid[1:] / grid[:-1], grid[1] / grid[0], rtol=1e-12)

    def test_bad_horizon(self):
        with pytest.raises(InvalidArgumentError):
            bpp.probe_horizons(1.0, 1.0)

    def test_ratio_shape(self):
        r = bpp.ratio_trajectories(brownian_scenario(3), [1.0, 2.0])
        assert r.shape == (2, 3, 2)
        assert not np.any(r)

    def test_ratio_decay_for_offsets(self):
        sc = brownian_scenario(offsets=[[2.0, 0.0]])
        r = bpp.ratio_trajectories(sc, [1.0, 4.0])
        # eta is fixed while sigma grows like sqrt(2 t)
        assert abs(r[1, 0, :]).max() == pytest.approx(abs(r[0, 0, :]).max() / 2.0, rel=1e-12)

    def test_heterogeneous_rejected(self):
        ref = (brownian_model(), NodeState(np.zeros(2)))
        other = GlcModel(np.zeros((2, 2)), np.eye(2), 2.0 * np.eye(2))
        sc = Scenario(ref, [(brownian_model(), NodeState(np.zeros(2))), (other, NodeState(np.zeros(2)))],
                      PathLoss(1.0, 4.0))
        with pytest.raises(HomogeneityError):
            bpp.check_bpp_condition(sc)

    def test_bad_gap_tol(self):
        with pytest.raises(InvalidArgumentError):
            bpp.check_bpp_condition(brownian_scenario(2), gap_tol=0.0)


class TestVerdicts:
    @pytest.mark.parametrize("tol", [1e-3, 1e-2, 1e-1])
    def test_brownian_satisfied(self, tol):
        v = bpp.check_bpp_condition(build_preset("brownian2d").scenario, 1.0, tol)
        assert v.satisfied and v.zero_limit_satisfied

    def test_brownian_offsets_vanish(self):
        sc = brownian_scenario(offsets=[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5]])
        v = bpp.check_bpp_condition(sc, 1.0, 0.1)
        assert v.satisfied and v.zero_limit_satisfied

    @pytest.mark.parametrize("tol", [1e-3, 1e-2, 1e-1])
    def test_inertia_violated(self, inertia, tol):
        v = bpp.check_bpp_condition(inertia, 1.0, tol)
        assert not v.satisfied and not v.zero_limit_satisfied
        assert v.max_pairwise_gap > 1.0

    @pytest.mark.parametrize("tol", [1e-3, 1e-2, 1e-1])
    def test_inertia_equal_velocity(self, inertia_equal, tol):
        v = bpp.check_bpp_condition(inertia_equal, 1.0, tol)
        assert v.satisfied

    def test_single_interferer(self):
        v = bpp.check_bpp_condition(brownian_scenario(1))
        assert v.satisfied and "single" in v.rationale

    def test_as_dict(self):
        d = bpp.check_bpp_condition(brownian_scenario(2)).as_dict()
        assert d["satisfied"] is True
        assert len(d["probe"]["horizons"]) == 16
        assert d["lyapunov_stable_advisory"] is True


class TestApproximations:
    def test_exact_for_coincident_starts(self):
        sc = brownian_scenario(6)
        for t in (10.0, 100.0):
            assert bpp.bpp_approx_mean(sc, t) == pytest.approx(mean_interference(sc, t).mean, rel=1e-12)
            assert bpp.bpp_approx_mgf(sc, t, 0.5) == pytest.approx(mgf_interference(sc, t, 0.5), rel=1e-10)

    @pytest.mark.parametrize("t", [10.0, 50.0, 100.0, 500.0])
    def test_closed_helper(self, t):
        sc = brownian_scenario(6)
        assert bpp.brownian_bpp_mean_closed(1.0, 2.0 * t, 6) == pytest.approx(
            mean_interference(sc, t).mean, rel=1e-10)

    def test_closed_helper_validation(self):
        with pytest.raises(InvalidArgumentError):
            bpp.brownian_bpp_mean_closed(0.0, 1.0, 2)
        with pytest.raises(InvalidArgumentError):
            bpp.brownian_bpp_mean_closed(1.0, 1.0, 1.5)

    def test_inertia_exact_far_below_bpp(self, inertia):
        exact = mean_interference(inertia, 500.0).mean
        approx = bpp.bpp_approx_mean(inertia, 500.0, center=True)
        assert approx > 100.0 * exact

    def test_warns_when_violated(self, inertia):
        with pytest.warns(bpp.BppConditionWarning):
            bpp.bpp_approx_mean(inertia, 10.0, check=True)

    def test_no_warning_when_satisfied(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            bpp.bpp_approx_mean(brownian_scenario(3), 10.0, check=True)

    def test_bad_representative(self):
        with pytest.raises(InvalidArgumentError):
            bpp.bpp_approx_mean(brownian_scenario(2), 1.0, representative=2)

    def test_mgf_beta_zero(self):
        assert bpp.bpp_approx_mgf(brownian_scenario(2), 1.0, 0.0) == 1.0
