"""Coupled-chain contraction harness and bias sweeps."""

import math

import numpy as np
import pytest

from pdlangevin.analytic import GaussModel1D, stationary_cov_pd, target_variance
from pdlangevin.coupling import (
    CouplingTrace,
    bias_sweep_tau,
    fit_contraction_rate,
    lambda_sweep,
    run_coupled_pair,
)
from pdlangevin.models import gauss1d_target
from pdlangevin.samplers import SamplerParams, run_ensemble

BENCH = GaussModel1D(1.0, 2.0, 1.5)


def _inits(rng, scale=2.0):
    a = (scale * rng.standard_normal(1), scale * rng.standard_normal(1))
    b = (scale * rng.standard_normal(1), scale * rng.standard_normal(1))
    return a, b


class TestRunCoupledPair:
    def test_equal_inits_stay_collapsed(self):
        target = gauss1d_target(BENCH)
        p = SamplerParams(tau=0.1, lam=1.0, theta=0.95, seed=0)
        init = (np.array([0.4]), np.array([-0.2]))
        trace = run_coupled_pair(target, p, init, init, n_steps=100)
        assert np.all(trace.delta == 0.0)
        assert np.all(trace.plain == 0.0)

    def test_per_step_contraction_strongly_convex(self):
        target = gauss1d_target(BENCH)
        theta = 0.95
        p = SamplerParams(tau=0.1, lam=1.0, theta=theta, seed=1)
        rng = np.random.default_rng(1)
        for _ in range(5):
            a, b = _inits(rng)
            trace = run_coupled_pair(target, p, a, b, n_steps=60)
            ratio = trace.delta[1:] / trace.delta[:-1]
            assert np.all(ratio <= theta * (1.0 + 1e-9))

    def test_theta_one_terminal_bound(self):
        target = gauss1d_target(BENCH)
        p = SamplerParams(tau=0.1, lam=1.0, theta=1.0, seed=2)
        rng = np.random.default_rng(2)
        for _ in range(5):
            a, b = _inits(rng)
            trace = run_coupled_pair(target, p, a, b, n_steps=300)
            tsl = p.tau * p.sigma * target.K.norm() ** 2
            C = (1.0 - tsl) ** -0.5
            # terminal weighted primal distance bounded by C * initial joint
            u_term = trace.primal_sq[-1] - 2.0 * target.g_prox.modulus * 0.0
            assert np.all(trace.plain <= trace.plain[0] * (1.0 + 1e-9))
            assert math.sqrt(max(u_term, 0.0)) <= C * math.sqrt(trace.plain[0]) + 1e-9

    def test_regime_violation_rejected(self):
        target = gauss1d_target(BENCH)
        # theta below every admissible window
        p = SamplerParams(tau=1e-3, lam=1.0, theta=0.5)
        with pytest.raises(ValueError, match="regime"):
            run_coupled_pair(target, p, (np.zeros(1), np.zeros(1)), (np.ones(1), np.zeros(1)), 10)

    def test_initial_record_consistent(self):
        target = gauss1d_target(BENCH)
        p = SamplerParams(tau=0.1, lam=1.0, theta=0.95, seed=3)
        a = (np.array([1.0]), np.array([0.5]))
        b = (np.array([-1.0]), np.array([0.0]))
        trace = run_coupled_pair(target, p, a, b, n_steps=1)
        u0 = a[0] - b[0]
        v0 = a[1] - b[1]
        want = (1 / p.tau + 2 * target.g_prox.modulus) * float(u0 @ u0) + (
            1 / p.sigma + 2 * target.fstar_prox.modulus
        ) * float(v0 @ v0)
        assert trace.delta[0] == pytest.approx(want, rel=1e-12)


class TestFitContractionRate:
    def _synthetic(self, deltas):
        n = len(deltas)
        z = np.zeros(n)
        return CouplingTrace(
            primal_sq=z, dual_sq=z, incr_sq=z, cross=z,
            delta=np.asarray(deltas, dtype=float), plain=z,
            params=SamplerParams(tau=0.1, lam=1.0), L=1.0,
        )

    def test_exact_geometric_decay(self):
        theta = 0.9
        trace = self._synthetic(theta ** np.arange(50))
        assert fit_contraction_rate(trace) == pytest.approx(math.log(theta), abs=1e-12)

    def test_collapsed_sentinel(self):
        trace = self._synthetic([1.0, 0.5, 0.0, 0.0])
        assert fit_contraction_rate(trace) == -math.inf

    def test_too_short(self):
        with pytest.raises(ValueError):
            fit_contraction_rate(self._synthetic([1.0, 0.9]), burn=0)

    def test_quadratic_run_rate_below_log_theta(self):
        target = gauss1d_target(BENCH)
        theta = 0.95
        p = SamplerParams(tau=0.1, lam=1.0, theta=theta, seed=4)
        trace = run_coupled_pair(
            target, p, (np.array([2.0]), np.array([1.0])), (np.array([-1.0]), np.array([0.5])), 80
        )
        assert fit_contraction_rate(trace, burn=5) <= math.log(theta) + 1e-3


class TestBiasSweepTau:
    def test_requires_decreasing_taus(self):
        target = gauss1d_target(BENCH)
        with pytest.raises(ValueError, match="decreasing"):
            bias_sweep_tau(target, 1.0, [1e-3, 2e-3], (0.0, 1.0), n_chains=2, n_steps=4, burn_in=0)

    def test_moment_reference_runs(self):
        m = GaussModel1D(1.0, 2.0, 1.5, lam=10.0)
        target = gauss1d_target(m)
        ref = (0.0, stationary_cov_pd(m)[0, 0])
        result = bias_sweep_tau(
            target, 10.0, [4e-3, 2e-3], ref,
            n_chains=300, n_steps=3000, burn_in=1500, seed=5,
        )
        assert result.w2.shape == (2,)
        assert np.all(result.w2 >= 0)
        assert result.stationary.dtype == bool

    def test_nonstationary_flagged(self):
        m = GaussModel1D(1.0, 2.0, 1.5, lam=1.0)
        target = gauss1d_target(m)
        # far-out point init and no burn-in: halves of the run differ
        result = bias_sweep_tau(
            target, 1.0, [1e-3], (0.0, target_variance(m)),
            n_chains=200, n_steps=400, burn_in=0, seed=6,
        )
        assert not result.stationary[0]


class TestLambdaSweep:
    def test_requires_increasing(self):
        target = gauss1d_target(BENCH)
        with pytest.raises(ValueError, match="increasing"):
            lambda_sweep(target, [10.0, 1.0], lambda lam: 1e-3, (0.0, 1.0), n_chains=2, n_steps=4)

    def test_decreasing_bias(self):
        target = gauss1d_target(BENCH)
        ref = (0.0, target_variance(BENCH))
        result = lambda_sweep(
            target, [1.0, 100.0], lambda lam: 0.01, ref,
            n_chains=2000, n_steps=4000, burn_in=1000, seed=7,
        )
        assert result.w2[1] < result.w2[0]
        assert result.loglog_slope() < 0

    def test_points_property(self):
        target = gauss1d_target(BENCH)
        result = lambda_sweep(
            target, [1.0, 10.0], lambda lam: 0.01, (0.0, target_variance(BENCH)),
            n_chains=50, n_steps=200, burn_in=100, seed=8,
        )
        pts = result.points
        assert len(pts) == 2 and pts[0][0] == 1.0


class TestDualConcentration:
    def test_dual_residual_variance_decreases_with_lambda(self):
        # the gap between the dual state and the exact subgradient at the
        # primal state concentrates as the step ratio grows
        target = gauss1d_target(BENCH)
        spreads = []
        for lam in (1.0, 10.0, 100.0):
            p = SamplerParams(tau=0.01, lam=lam, seed=9)
            store = run_ensemble(target, p, n_chains=2000, n_steps=3000, burn_in=1500, thinning=3)
            resid = store.y_samples[:, 0] - BENCH.k * store.x_samples[:, 0] / BENCH.c_f
            spreads.append(resid.var(ddof=1))
        assert spreads[0] > spreads[1] > spreads[2]
