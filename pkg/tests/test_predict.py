import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glcinterference import cgppf, montecarlo
from glcinterference.cgppf import PathLoss
from glcinterference.errors import (
    DivergenceError,
    InvalidArgumentError,
    MgfDomainError,
    UnsupportedBranchError,
)
from glcinterference.lindyn import GlcModel, NodeState
from glcinterference.predict import (
    FadingModel,
    Scenario,
    mean_interference,
    mgf_interference,
    radial_functional,
    relative_locations,
    variance_interference,
)

from conftest import brownian_model, brownian_scenario, location, static_pair

# frozen mean interference of the six-node Brownian scenario (eps=1, alpha=4, d=2)
BROWNIAN_MEANS = {10: 0.2201, 50: 0.0463, 100: 0.0233, 500: 0.0047}


class TestKnownLocations:
    def test_mean_at_anchor(self):
        res = mean_interference(static_pair(1.0), 0.0)
        assert res.mean == 0.5
        assert res.variance == 0.0

    def test_nakagami_variance_at_anchor(self):
        res = mean_interference(static_pair(1.0, fading=FadingModel.nakagami(2.0)), 0.0)
        # E[h^2] = 1 + 1/m, so Var = g^2 / m
        assert res.variance == pytest.approx(0.25 / 2.0, rel=1e-14)

    def test_mgf_no_fading(self):
        assert mgf_interference(static_pair(1.0), 0.0, 2.0) == pytest.approx(math.e, rel=1e-15)

    def test_mgf_nakagami(self):
        m, beta = 2.0, 0.5
        sc = static_pair(1.0, fading=FadingModel.nakagami(m))
        assert mgf_interference(sc, 0.0, beta) == pytest.approx((m / (m - beta * 0.5)) ** m, rel=1e-14)

    def test_mgf_zero_is_one(self):
        assert mgf_interference(brownian_scenario(3), 10.0, 0.0) == 1.0

    def test_singular_collision(self):
        with pytest.raises(DivergenceError):
            mean_interference(static_pair(0.0, eps=0.0, alpha=1.0), 0.0)

    def test_noiseless_motion_is_deterministic(self):
        sc = static_pair(3.0)
        assert mean_interference(sc, 7.0).mean == pytest.approx(1.0 / 82.0, rel=1e-14)


class TestBrownian:
    @pytest.mark.parametrize("t,expected", sorted(BROWNIAN_MEANS.items()))
    def test_frozen_means(self, t, expected):
        assert mean_interference(brownian_scenario(6), t).mean == pytest.approx(expected, abs=5e-4)

    @pytest.mark.parametrize("t", [10.0, 100.0])
    def test_closed_matches_quadrature(self, t):
        sc = brownian_scenario(6)
        closed = mean_interference(sc, t, "closed").mean
        quad = mean_interference(sc, t, "quadrature").mean
        assert closed == pytest.approx(quad, rel=1e-6)

    def test_relative_covariance(self):
        loc = relative_locations(brownian_scenario(2), 10.0)[0]
        np.testing.assert_allclose(loc.sigma, 20.0 * np.eye(2), rtol=1e-12)

    def test_variance_closed_form_alpha2(self):
        pl = PathLoss(1.0, 2.0)
        sc = brownian_scenario(1, eps=1.0, alpha=2.0, fading=FadingModel.none())
        loc = relative_locations(sc, 5.0)[0]
        mean = cgppf.closed_first_moment(loc, pl)
        second = cgppf.closed_second_moment(loc, pl, None)
        assert variance_interference(sc, 5.0, "quadrature") == pytest.approx(second - mean**2, rel=1e-8)

    def test_additivity(self):
        a = [[1.0, 0.0]]
        b = [[0.0, 2.0], [-1.0, -1.0]]
        total = mean_interference(brownian_scenario(offsets=a + b), 3.0)
        parts = [mean_interference(brownian_scenario(offsets=o), 3.0) for o in (a, b)]
        assert total.mean == pytest.approx(sum(p.mean for p in parts), rel=1e-12)
        assert total.variance == pytest.approx(sum(p.variance for p in parts), rel=1e-12)

    def test_mgf_factorizes(self):
        a, b = [[1.0, 0.0]], [[0.0, 2.0]]
        total = mgf_interference(brownian_scenario(offsets=a + b), 3.0, 0.5)
        prod = math.prod(mgf_interference(brownian_scenario(offsets=o), 3.0, 0.5) for o in (a, b))
        assert total == pytest.approx(prod, rel=1e-12)

    def test_mean_decreases_with_eps(self):
        means = [mean_interference(brownian_scenario(2, eps=e), 10.0).mean for e in (0.5, 1.0, 2.0, 5.0)]
        assert all(x > y for x, y in zip(means, means[1:]))

    def test_mean_decreases_with_time(self):
        sc = brownian_scenario(3)
        means = [mean_interference(sc, t).mean for t in (1.0, 10.0, 100.0)]
        assert all(x > y for x, y in zip(means, means[1:]))

    def test_monte_carlo_agrees(self):
        sc = brownian_scenario(offsets=[[1.0, 0.0], [0.0, -2.0]])
        pred = mean_interference(sc, 2.0)
        emp = montecarlo.empirical_statistics(sc, 2.0, 4000, seed=11)
        assert abs(emp.mean_hat - pred.mean) < 4.0 * emp.std_error_mean

    def test_series_method(self):
        sc = brownian_scenario(offsets=[[0.5, 0.0]])
        assert mean_interference(sc, 2.0, "series").mean == pytest.approx(
            mean_interference(sc, 2.0, "quadrature").mean, rel=1e-3)


@settings(max_examples=15)
@given(offset=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
       t=st.floats(0.5, 50.0), beta=st.floats(0.05, 0.9))
def test_jensen_and_positivity(offset, t, beta):
    sc = brownian_scenario(offsets=[offset], fading=FadingModel.nakagami(2.0))
    res = mean_interference(sc, t)
    assert 0.0 < res.mean <= 1.0
    assert res.variance >= 0.0
    assert mgf_interference(sc, t, beta) >= math.exp(beta * res.mean) * (1 - 1e-10)


class TestMethods:
    def test_closed_rejects_anisotropic(self):
        model = GlcModel(np.zeros((2, 2)), np.eye(2), np.diag([1.0, 2.0]))
        ref = (brownian_model(), NodeState(np.zeros(2)))
        sc = Scenario(ref, [(model, NodeState(np.zeros(2)))], PathLoss(1.0, 4.0), FadingModel.none(), 2)
        with pytest.raises(UnsupportedBranchError):
            mean_interference(sc, 1.0, "closed")

    def test_auto_falls_back_for_offset(self):
        sc = brownian_scenario(offsets=[[1.0, 1.0]])
        assert mean_interference(sc, 1.0).mean == mean_interference(sc, 1.0, "quadrature").mean

    def test_series_divergence_falls_back(self):
        nu = cgppf.Integrand.mean(PathLoss(1.0, 4.0))
        loc = location([40.0, 0.0], 0.01 * np.eye(2))
        with pytest.warns(RuntimeWarning, match="series form unavailable"):
            value = radial_functional(nu, loc, "series")
        assert value == pytest.approx(cgppf.eval_quadrature(nu, loc), rel=1e-12)

    def test_unknown_method(self):
        with pytest.raises(InvalidArgumentError):
            mean_interference(brownian_scenario(1), 1.0, "magic")

    def test_time_before_anchor(self):
        with pytest.raises(InvalidArgumentError):
            mean_interference(brownian_scenario(1), -1.0)


class TestDomains:
    def test_mgf_beyond_m_eps(self):
        sc = brownian_scenario(1, eps=1.0, fading=FadingModel.nakagami(2.0))
        with pytest.raises(MgfDomainError):
            mgf_interference(sc, 1.0, 2.0)

    def test_mgf_singular_pathloss(self):
        sc = brownian_scenario(1, eps=0.0, alpha=1.0, fading=FadingModel.none())
        with pytest.raises(MgfDomainError):
            mgf_interference(sc, 1.0, 0.1)

    def test_negative_beta_singular_is_fine(self):
        sc = brownian_scenario(1, eps=0.0, alpha=1.0, fading=FadingModel.none())
        assert 0.0 < mgf_interference(sc, 1.0, -0.1) < 1.0

    def test_infinite_variance(self):
        # alpha=1 < d keeps the mean finite while 2*alpha = d makes the second moment diverge
        sc = brownian_scenario(1, eps=0.0, alpha=1.0, fading=FadingModel.none())
        res = mean_interference(sc, 1.0)
        assert math.isfinite(res.mean) and res.variance == math.inf
        with pytest.raises(DivergenceError):
            variance_interference(sc, 1.0)

    def test_singular_mean_closed_form(self):
        sc = brownian_scenario(1, eps=0.0, alpha=1.0, fading=FadingModel.none())
        # E[1/|y|] for y ~ N(0, s2 I) in 2-D is sqrt(pi / (2 s2))
        assert mean_interference(sc, 1.0).mean == pytest.approx(math.sqrt(math.pi / 4.0), rel=1e-12)


class TestValidation:
    def test_no_interferers(self):
        ref = (brownian_model(), NodeState(np.zeros(2)))
        with pytest.raises(InvalidArgumentError):
            Scenario(ref, [], PathLoss(1.0, 4.0))

    def test_dimension_mismatch(self):
        ref = (brownian_model(2), NodeState(np.zeros(2)))
        with pytest.raises(InvalidArgumentError):
            Scenario(ref, [(brownian_model(3), NodeState(np.zeros(3)))], PathLoss(1.0, 4.0))

    def test_anchor_mismatch(self):
        ref = (brownian_model(), NodeState(np.zeros(2), s=0.0))
        with pytest.raises(InvalidArgumentError):
            Scenario(ref, [(brownian_model(), NodeState(np.zeros(2), s=1.0))], PathLoss(1.0, 4.0))

    def test_state_length(self):
        ref = (brownian_model(), NodeState(np.zeros(2)))
        with pytest.raises(InvalidArgumentError):
            Scenario(ref, [(brownian_model(), NodeState(np.zeros(3)))], PathLoss(1.0, 4.0))

    @pytest.mark.parametrize("m", [0.2, float("nan"), None])
    def test_bad_nakagami(self, m):
        with pytest.raises(InvalidArgumentError):
            FadingModel.nakagami(m)

    def test_m_without_nakagami(self):
        with pytest.raises(InvalidArgumentError):
            FadingModel("none", 2.0)

    def test_second_moment(self):
        assert FadingModel.none().second_moment == 1.0
        assert FadingModel.nakagami(4.0).second_moment == 1.25
