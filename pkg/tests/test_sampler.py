import numpy as np
import pytest

from volbayes.diagnostics import ess, split_rhat
from volbayes.paramspace import RejectionError
from volbayes.sampler import (
    ChainFailure,
    DualAveraging,
    HmcConfig,
    PhasePoint,
    SamplingError,
    energy,
    leapfrog,
    nuts_transition,
    run_chains,
    run_warmup,
    warmup_windows,
)
from volbayes.sampler.run import _run_single_chain


class StdNormal:
    """Isotropic unit Gaussian in d dimensions."""

    def __init__(self, dim=1):
        self.dimension = dim

    def log_posterior(self, u):
        return -0.5 * float(u @ u), -u


class ScaledNormal:
    dimension = 1

    def __init__(self, sd):
        self.var = sd * sd

    def log_posterior(self, u):
        return -0.5 * float(u @ u) / self.var, -u / self.var


class CorrelatedGauss:
    dimension = 2

    def __init__(self, rho):
        self.prec = np.linalg.inv(np.array([[1.0, rho], [rho, 1.0]]))

    def log_posterior(self, u):
        return -0.5 * float(u @ self.prec @ u), -self.prec @ u


class WalledNormal:
    """Unit Gaussian with a hard wall: density vanishes above the cut."""

    dimension = 1

    def __init__(self, wall=1.5):
        self.wall = wall

    def log_posterior(self, u):
        if u[0] > self.wall:
            raise RejectionError("beyond wall")
        return -0.5 * float(u @ u), -u


class Hopeless:
    dimension = 1

    def log_posterior(self, u):
        raise RejectionError("nothing is finite")


def phase(target, theta, momentum):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    lp, grad = target.log_posterior(theta)
    return PhasePoint(theta, np.atleast_1d(np.asarray(momentum, dtype=float)), lp, grad)


ONES = np.ones(1)


class TestLeapfrog:
    def test_hand_executed_step(self):
        z = phase(StdNormal(), 1.0, 0.0)
        z1 = leapfrog(z, 0.1, ONES, StdNormal().log_posterior)
        assert z1.theta[0] == pytest.approx(0.995, abs=1e-15)
        assert z1.momentum[0] == pytest.approx(-0.09975, abs=1e-15)

    def test_vanishing_step_is_identity(self):
        z = phase(StdNormal(), 0.7, -0.3)
        z1 = leapfrog(z, 1e-8, ONES, StdNormal().log_posterior)
        assert abs(z1.theta[0] - 0.7) <= 1e-7
        assert abs(z1.momentum[0] - (-0.3)) <= 1e-7

    def test_reversibility(self):
        target = StdNormal(3)
        rng = np.random.default_rng(0)
        inv_mass = np.array([1.0, 0.5, 2.0])
        for _ in range(20):
            z = phase(target, rng.normal(size=3), rng.normal(size=3))
            fwd = z
            for _ in range(10):
                fwd = leapfrog(fwd, 0.15, inv_mass, target.log_posterior)
            back = PhasePoint(fwd.theta, -fwd.momentum, fwd.lp, fwd.grad)
            for _ in range(10):
                back = leapfrog(back, 0.15, inv_mass, target.log_posterior)
            assert np.all(np.abs(back.theta - z.theta) < 1e-10)
            assert np.all(np.abs(-back.momentum - z.momentum) < 1e-10)

    def test_energy_error_quadratic_in_step(self):
        target = StdNormal(1)
        rng = np.random.default_rng(1)
        errs = {0.2: [], 0.1: []}
        for _ in range(100):
            z = phase(target, rng.normal(), rng.normal())
            h0 = energy(z, ONES)
            for eps in errs:
                z1 = leapfrog(z, eps, ONES, target.log_posterior)
                errs[eps].append(abs(energy(z1, ONES) - h0))
        ratio = np.mean(errs[0.2]) / np.mean(errs[0.1])
        assert ratio >= 3.5

    def test_divergence_signal_on_rejection(self):
        target = WalledNormal(wall=0.0)
        z = phase(target, -0.05, 5.0)  # big momentum pushes over the wall
        z1 = leapfrog(z, 1.0, ONES, target.log_posterior)
        assert not z1.finite
        assert energy(z1, ONES) == np.inf


class TestNutsTransition:
    def test_ten_dim_standard_normal_moments(self):
        target = StdNormal(10)
        outs = run_chains(target, HmcConfig(chains=4, warmup=400, draws=400, seed=11))
        pooled = np.vstack([o.draws for o in outs])
        assert np.all(np.abs(pooled.mean(axis=0)) < 0.15)
        assert np.all((pooled.var(axis=0) > 0.8) & (pooled.var(axis=0) < 1.2))

    def test_correlated_gaussian_recovers_correlation(self):
        target = CorrelatedGauss(0.9)
        outs = run_chains(target, HmcConfig(chains=4, warmup=400, draws=400, seed=5))
        pooled = np.vstack([o.draws for o in outs])
        corr = np.corrcoef(pooled.T)[0, 1]
        assert abs(corr - 0.9) < 0.1

    def test_depth_zero_is_single_step_metropolis(self):
        target = StdNormal(1)
        rng = np.random.default_rng(3)
        z = phase(target, 0.4, 0.0)
        moves = stays = 0
        for _ in range(3000):
            z_new, stats = nuts_transition(z, 0.9, ONES, target.log_posterior, 0, rng)
            assert stats.n_leapfrog == 1
            if np.array_equal(z_new.theta, z.theta):
                stays += 1
            else:
                moves += 1
        # acceptance of one-step proposals from a fixed point must match the
        # Metropolis rule min(1, exp(H_old - H_new)) in expectation
        probe = np.random.default_rng(1234)
        acc = []
        for _ in range(20000):
            m = probe.standard_normal()
            z0 = PhasePoint(z.theta, np.array([m]), z.lp, z.grad)
            h0 = energy(z0, ONES)
            z1 = leapfrog(z0, 0.9, ONES, target.log_posterior)
            acc.append(min(1.0, np.exp(h0 - energy(z1, ONES))))
        expected = float(np.mean(acc))
        observed = moves / (moves + stays)
        assert observed == pytest.approx(expected, abs=0.03)

    def test_divergent_transitions_stay_in_support(self):
        target = WalledNormal(wall=1.5)
        rng = np.random.default_rng(8)
        z = phase(target, 1.2, 0.0)
        n_div = 0
        for _ in range(500):
            z, stats = nuts_transition(z, 0.6, ONES, target.log_posterior, 6, rng)
            n_div += stats.divergent
            assert z.theta[0] <= 1.5
            assert np.isfinite(z.lp)
        assert n_div > 0  # the wall is actually being hit

    def test_detailed_balance_bin_flows(self):
        # stationary chain on a binned 1-D normal: flows i->j and j->i agree
        target = StdNormal(1)
        rng = np.random.default_rng(42)
        edges = np.array([-1.0, -0.3, 0.3, 1.0])
        n_steps = 100_000
        flows = np.zeros((5, 5))
        z = phase(target, rng.standard_normal(), 0.0)
        prev_bin = int(np.searchsorted(edges, z.theta[0]))
        for _ in range(n_steps):
            z, _ = nuts_transition(z, 0.7, ONES, target.log_posterior, 6, rng)
            cur_bin = int(np.searchsorted(edges, z.theta[0]))
            flows[prev_bin, cur_bin] += 1
            prev_bin = cur_bin
        for i in range(5):
            for j in range(i + 1, 5):
                f, g = flows[i, j], flows[j, i]
                if f + g == 0:
                    continue
                assert abs(f - g) <= 3.0 * np.sqrt(f + g), (i, j, f, g)


class TestAdaptation:
    def test_windows_cover_expected_layout(self):
        w = warmup_windows(400)
        assert w[0][0] == 60  # 0.15 * 400
        assert w[-1][1] == 360  # 400 - 0.10 * 400
        sizes = [e - s for s, e in w]
        assert sizes[0] == 25
        assert all(b >= a for a, b in zip(sizes, sizes[1:]))
        with pytest.raises(ValueError):
            warmup_windows(10)

    def test_mass_matches_target_scale(self):
        target = ScaledNormal(10.0)
        outs = run_chains(target, HmcConfig(chains=1, warmup=400, draws=50, seed=3))
        assert 50.0 <= outs[0].inv_mass[0] <= 200.0

    def test_realized_acceptance_near_target(self):
        target = StdNormal(5)
        outs = run_chains(target, HmcConfig(chains=2, warmup=400, draws=400, seed=21))
        mean_accept = np.mean([o.stats["accept_stat"].mean() for o in outs])
        assert 0.6 <= mean_accept <= 0.95

    def test_adaptation_deterministic_given_seed(self):
        target = StdNormal(3)

        def adapt_once():
            rng = np.random.default_rng(77)
            lp, grad = target.log_posterior(np.ones(3))
            z = PhasePoint(np.ones(3), np.zeros(3), lp, grad)
            return run_warmup(target, z, HmcConfig(chains=1, warmup=100, draws=1), rng)

        eps1, mass1, _ = adapt_once()
        eps2, mass2, _ = adapt_once()
        assert eps1 == eps2
        assert np.array_equal(mass1, mass2)

    def test_all_divergent_warmup_aborts(self):
        rng = np.random.default_rng(0)
        z = PhasePoint(np.zeros(1), np.zeros(1), 0.0, np.zeros(1))
        with pytest.raises(ChainFailure, match="divergent"):
            run_warmup(Hopeless(), z, HmcConfig(chains=1, warmup=30, draws=1), rng)

    def test_dual_averaging_converges_on_synthetic_feedback(self):
        # acceptance falls with step size: fixed point near accept=target
        da = DualAveraging(target=0.8)
        da.restart(1.0)
        eps = 1.0
        for _ in range(500):
            accept = float(np.exp(-eps))  # accept 0.8 at eps ~ 0.223
            eps = da.update(accept)
        assert np.exp(-da.averaged) == pytest.approx(0.8, abs=0.03)


class TestRunChains:
    def test_reproducible_across_runs(self):
        target = StdNormal(4)
        cfg = HmcConfig(chains=3, warmup=150, draws=100, seed=9)
        a = run_chains(target, cfg)
        b = run_chains(target, cfg)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.draws, cb.draws)
            assert ca.step_size == cb.step_size

    def test_row_counts_match_config(self):
        outs = run_chains(StdNormal(2), HmcConfig(chains=1, warmup=100, draws=400, seed=1))
        assert len(outs) == 1
        assert outs[0].draws.shape == (400, 2)

    def test_worker_pool_matches_sequential(self):
        target = StdNormal(3)
        seq = run_chains(target, HmcConfig(chains=2, warmup=100, draws=50, seed=4, workers=1))
        par = run_chains(target, HmcConfig(chains=2, warmup=100, draws=50, seed=4, workers=2))
        for a, b in zip(seq, par):
            assert np.array_equal(a.draws, b.draws)

    def test_all_chains_failing_raises(self):
        with pytest.raises(SamplingError):
            run_chains(Hopeless(), HmcConfig(chains=2, warmup=30, draws=10, seed=0))

    def test_single_chain_failure_is_reported_not_fatal(self):
        out = _run_single_chain(Hopeless(), HmcConfig(chains=1, warmup=30, draws=10), 0, 123)
        assert out.failed
        assert "finite starting point" in out.error or "divergent" in out.error

    def test_garch_fit_has_effective_samples(self, garch_fit_2000):
        model, outputs = garch_fit_2000
        ok = [o for o in outputs if not o.failed]
        for j in range(model.dimension):
            per_chain = [o.draws[:, j] for o in ok]
            assert ess(per_chain) >= 100.0
            assert split_rhat(per_chain) < 1.05

    def test_constrained_draws_satisfy_constraints(self, garch_fit_2000):
        model, outputs = garch_fit_2000
        for o in outputs:
            if o.failed:
                continue
            for i, c in enumerate(model.transform_spec.constraints):
                assert np.all([c.contains(v) for v in o.draws[:, i]])
