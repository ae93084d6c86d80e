import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from admmtopo import graph as G
from admmtopo.errors import DimensionMismatch, Diverged, NonFiniteState, ParameterOutOfRange, WindowTooNoisy
from admmtopo.iterate import (AdmmState, admm_matrix_step, admm_message_step, admm_n_step,
                              consensus_value, fit_rate, gd_step, initial_state, measure_rate,
                              random_init, random_u0, run, suggested_burn_in, trajectory)
from admmtopo.operators import build_factor_graph, build_operators
from admmtopo.spectral import (REACHABLE_FROM_VERTEX_INIT, predict_ta_spectrum, reachable_rate,
                               second_largest_ta, walk_spectrum)
from conftest import connected_graphs, gammas, rhos

C6_RHO = math.sqrt(3)
C6_GAMMA = 4 / (3 - math.sqrt((2 - C6_RHO) / (2 + C6_RHO)))


class TestMessageStep:
    def test_zero_fixed(self):
        fg = build_factor_graph(G.cycle(6))
        s = admm_message_step(initial_state(fg, np.zeros(6)), fg, 1.0, 1.5)
        assert not np.any(s.n) and not np.any(s.z) and not np.any(s.u)

    def test_consensus_fixed(self):
        fg = build_factor_graph(G.house())
        s0 = initial_state(fg, np.full(5, 2.5))
        s1 = admm_message_step(s0, fg, 0.8, 1.3)
        assert np.allclose(s1.n, s0.n, atol=1e-14) and np.allclose(s1.z, 2.5, atol=1e-14)

    def test_one_step_matches_matrix(self):
        fg = build_factor_graph(G.cycle(6))
        ops = build_operators(fg, 1.0, 1.5)
        s0 = initial_state(fg, random_init(6, 3))
        s1 = admm_message_step(s0, fg, 1.0, 1.5)
        assert np.max(np.abs(s1.n - admm_matrix_step(s0.n, ops))) < 1e-10
        assert s1.t == 1

    def test_local_argmin(self):
        # x_a minimizes 1/2 (x_i - x_j)^2 + rho/2 |x_a - n_a|^2: gradient vanishes
        fg = build_factor_graph(G.paw())
        s0 = initial_state(fg, random_init(4, 0))
        rho = 0.9
        x = admm_message_step(s0, fg, rho, 1.0).x.reshape(-1, 2)
        n = s0.n.reshape(-1, 2)
        grad_i = (x[:, 0] - x[:, 1]) + rho * (x[:, 0] - n[:, 0])
        grad_j = (x[:, 1] - x[:, 0]) + rho * (x[:, 1] - n[:, 1])
        assert np.max(np.abs(grad_i)) < 1e-14 and np.max(np.abs(grad_j)) < 1e-14

    def test_s_equals_gather_z(self):
        fg = build_factor_graph(G.house())
        s = initial_state(fg, random_init(5, 1))
        for _ in range(5):
            s = admm_message_step(s, fg, 1.1, 1.6)
            assert np.array_equal(s.s, fg.gather(s.z))

    def test_errors(self):
        fg = build_factor_graph(G.cycle(4))
        with pytest.raises(DimensionMismatch):
            initial_state(fg, np.zeros(3))
        with pytest.raises(DimensionMismatch):
            initial_state(fg, np.zeros(4), u0=np.zeros(3))
        s = initial_state(fg, np.zeros(4))
        bad = AdmmState(s.x, s.m, np.zeros(3), s.u, s.z, s.s)
        with pytest.raises(DimensionMismatch):
            admm_message_step(bad, fg, 1.0, 1.0)
        with pytest.raises(ParameterOutOfRange):
            admm_message_step(s, fg, 1.0, 2.5)
        nan = AdmmState(s.x, s.m, np.full(8, np.nan), s.u, s.z, s.s)
        with pytest.raises(NonFiniteState):
            admm_message_step(nan, fg, 1.0, 1.0)

    def test_matrix_step_dimension(self):
        ops = build_operators(build_factor_graph(G.cycle(4)), 1.0, 1.0)
        with pytest.raises(DimensionMismatch):
            admm_matrix_step(np.ones(3), ops)
        assert np.allclose(admm_matrix_step(np.ones(8), ops), 1.0)

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs(max_n=10), rhos, gammas, st.integers(0, 2**31))
    def test_reduction_equivalence(self, g, rho, gamma, seed):
        fg = build_factor_graph(g)
        ops = build_operators(fg, rho, gamma)
        states = trajectory(fg, random_init(g.n_vertices, seed), rho, gamma, 100)
        n = states[0].n
        for s in states[1:]:
            n = ops.TA @ n
            assert np.max(np.abs(s.n - n)) < 1e-9

    @settings(max_examples=20, deadline=None)
    @given(connected_graphs(max_n=10), rhos, gammas)
    def test_n_step_closure(self, g, rho, gamma):
        fg = build_factor_graph(g)
        states = trajectory(fg, random_init(g.n_vertices, 5), rho, gamma, 20)
        step = admm_n_step(fg, rho, gamma)
        n = states[0].n
        for s in states[1:]:
            n = step(n)
            assert np.max(np.abs(s.n - n)) < 1e-10


class TestGd:
    def test_constant_fixed(self):
        g = G.house()
        assert np.allclose(gd_step(np.full(5, 3.0), g, 0.3), 3.0, atol=1e-15)

    def test_alpha_zero_identity(self):
        z = random_init(6)
        assert np.array_equal(gd_step(z, G.cycle(6), 0.0), z)

    def test_errors(self):
        with pytest.raises(ParameterOutOfRange):
            gd_step(np.zeros(6), G.cycle(6), -0.1)
        with pytest.raises(DimensionMismatch):
            gd_step(np.zeros(5), G.cycle(6), 0.1)

    @given(connected_graphs(), st.floats(0, 1))
    def test_matches_dense(self, g, alpha):
        z = random_init(g.n_vertices, 2)
        dense = z - alpha * g.laplacian() @ z
        assert np.max(np.abs(gd_step(z, g, alpha) - dense)) < 1e-12


class TestRate:
    def test_c6_admm(self):
        fg = build_factor_graph(G.cycle(6))
        stats = measure_rate(admm_n_step(fg, C6_RHO, C6_GAMMA), fg.gather(random_init(6)))
        assert stats.fitted_rate == pytest.approx(0.464, rel=0.02)
        assert 0 < stats.fitted_rate < 1

    def test_c6_gd(self):
        g = G.cycle(6)
        stats = measure_rate(lambda z: gd_step(z, g, 0.4), random_init(6))
        assert stats.fitted_rate == pytest.approx(0.6, rel=0.02)

    def test_k4_admm(self):
        fg = build_factor_graph(G.complete(4))
        stats = measure_rate(admm_n_step(fg, 2.0, 4 / 3), fg.gather(random_init(4)))
        assert stats.fitted_rate == pytest.approx(1 / 3, rel=0.02)

    def test_matrix_form_c6(self):
        ops = build_operators(build_factor_graph(G.cycle(6)), C6_RHO, C6_GAMMA)
        stats = measure_rate(lambda v: ops.TA @ v, ops.fg.gather(random_init(6)), window=200)
        assert stats.fitted_rate == pytest.approx(0.464, rel=0.02)

    def test_jordan_bias_without_log_term(self):
        # at the optimum the leading eigenvalue is defective; a plain slope overshoots
        fg = build_factor_graph(G.cycle(6))
        init = fg.gather(random_init(6))
        step = admm_n_step(fg, C6_RHO, C6_GAMMA)
        aware = measure_rate(step, init).fitted_rate
        plain = measure_rate(step, init, jordan_aware=False, min_r2=0.9).fitted_rate
        assert abs(aware - 0.4641) < abs(plain - 0.4641)

    def test_fit_rate_exact_geometric(self):
        r = 0.7 ** np.arange(60)
        rate, r2 = fit_rate(r, 0, jordan_aware=False)
        assert rate == pytest.approx(0.7, rel=1e-10) and r2 == pytest.approx(1.0)

    def test_window_minimum(self):
        with pytest.raises(ParameterOutOfRange):
            measure_rate(lambda x: x, np.ones(2), window=10)

    def test_diverged(self):
        with pytest.raises(Diverged):
            measure_rate(lambda x: 1.5 * x, np.ones(3), fixed_point=np.zeros(3))

    def test_too_fast(self):
        with pytest.raises(WindowTooNoisy):
            measure_rate(lambda x: 0.01 * x, np.ones(3), fixed_point=np.zeros(3))

    def test_noisy(self):
        # geometric decay that stalls halfway through the fit window
        floor = 0.5**35

        def stalling(x):
            return x * 0.5 if x[0] > floor else x

        with pytest.raises(WindowTooNoisy):
            measure_rate(stalling, np.ones(2), fixed_point=np.zeros(2))

    # faster modes leave fewer than 30 residuals above round-off after burn-in
    MIN_TAU = 0.5

    @staticmethod
    def _separated(values, tau, ratio=0.75):
        """Distinct moduli below tau are at most ``ratio * tau``.

        Only about 13 decades sit above round-off, so burn-in cannot be long
        enough to suppress a closer second mode.
        """
        below = [v for v in values if v < tau - 1e-9]
        return not below or max(below) <= ratio * tau

    @staticmethod
    def _beat_resolved(eigs, tau, decades=9.0):
        """A complex dominant pair beats with period pi / |arg|; the usable
        window (decades above round-off after burn-in) must hold two beats."""
        top = [z for z in eigs if abs(abs(z) - tau) < 1e-9]
        angles = [abs(np.angle(z)) for z in top if abs(np.angle(z)) > 1e-9]
        if not angles:
            return True
        usable = decades * np.log(10.0) / -np.log(tau)
        return np.pi / min(angles) <= usable / 2

    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(connected_graphs(min_n=4, max_n=9), st.floats(0.3, 3.0), st.floats(0.5, 1.8))
    def test_rate_matches_prediction_generic_init(self, g, rho, gamma):
        ts = predict_ta_spectrum(walk_spectrum(g), rho, gamma)
        tau, _ = second_largest_ta(None, rho, gamma, spectrum=ts)
        assume(self.MIN_TAU < tau < 0.95 and self._separated(np.abs(ts.eigs[1:]), tau))
        assume(self._beat_resolved(ts.eigs[1:], tau))
        fg = build_factor_graph(g)
        n0 = fg.gather(random_init(g.n_vertices)) - random_u0(fg)
        stats = measure_rate(admm_n_step(fg, rho, gamma), n0, burn_in=suggested_burn_in(tau),
                             window=200, min_r2=0.9)
        assert stats.fitted_rate == pytest.approx(tau, rel=0.02)

    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(connected_graphs(min_n=4, max_n=9), st.floats(0.3, 3.0), st.floats(0.5, 1.8))
    def test_vertex_init_sees_reachable_rate(self, g, rho, gamma):
        report = walk_spectrum(g)
        ts = predict_ta_spectrum(report, rho, gamma)
        tau = reachable_rate(report, rho, gamma, spectrum=ts)
        mods = [abs(z) for z, b in zip(ts.eigs[1:], ts.branches[1:])
                if b in REACHABLE_FROM_VERTEX_INIT]
        reach = [z for z, b in zip(ts.eigs[1:], ts.branches[1:])
                 if b in REACHABLE_FROM_VERTEX_INIT]
        assume(self.MIN_TAU < tau < 0.95 and self._separated(mods, tau))
        assume(self._beat_resolved(reach, tau))
        fg = build_factor_graph(g)
        stats = measure_rate(admm_n_step(fg, rho, gamma), fg.gather(random_init(g.n_vertices)),
                             burn_in=suggested_burn_in(tau), window=200, min_r2=0.9)
        assert stats.fitted_rate == pytest.approx(tau, rel=0.02)

    def test_paw_cycle_root_invisible_from_vertex_init(self):
        g = G.paw()
        fg = build_factor_graph(g)
        z_only = measure_rate(admm_n_step(fg, 1.0, 1.0), fg.gather(random_init(4)), window=200)
        full = measure_rate(admm_n_step(fg, 1.0, 1.0),
                            fg.gather(random_init(4)) - random_u0(fg), window=200)
        assert full.fitted_rate == pytest.approx(2 / 3, rel=0.02)
        assert z_only.fitted_rate == pytest.approx(
            reachable_rate(walk_spectrum(g), 1.0, 1.0), rel=0.02)
        assert z_only.fitted_rate < 0.65

    def test_to_rows(self):
        g = G.cycle(6)
        stats = measure_rate(lambda z: gd_step(z, g, 0.4), random_init(6))
        rows = list(stats.to_rows())
        assert rows[0][0] == 0 and rows[0][2] == pytest.approx(math.log(rows[0][1]))


class TestConsensus:
    def test_c6_mean(self):
        fg = build_factor_graph(G.cycle(6))
        z = consensus_value(fg, np.arange(1.0, 7.0), 1.0, 1.5)
        assert np.allclose(z, 3.5, atol=1e-8)

    def test_constant(self):
        fg = build_factor_graph(G.house())
        assert np.allclose(consensus_value(fg, np.full(5, 2.0), 1.0, 1.0), 2.0)

    def test_zero(self):
        fg = build_factor_graph(G.house())
        assert not np.any(consensus_value(fg, np.zeros(5), 1.0, 1.0))

    @pytest.mark.parametrize("seed", range(5))
    def test_degree_weighted_limit(self, seed):
        g = G.erdos_renyi(8, 0.4, seed=seed)
        fg = build_factor_graph(g)
        z0 = random_init(8, seed)
        d = np.asarray(g.degrees, float)
        z = consensus_value(fg, z0, 1.2, 1.4)
        assert np.allclose(z, d @ z0 / d.sum(), atol=1e-8)

    def test_diverged(self):
        fg = build_factor_graph(G.cycle(6))
        with pytest.raises(Diverged):
            consensus_value(fg, random_init(6), 0.01, 1.99, max_iters=10)


def test_run_length():
    assert len(run(lambda x: x + 1, np.zeros(1), 5)) == 6
