import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeforge.plasticity import (
    BCMParams,
    BCMState,
    RSTDPState,
    STDPParams,
    STPParams,
    STPState,
    apply_stdp,
    batch_stdp,
    bcm_update,
    feedback_target,
    hebbian_update,
    pbln_normalize,
    rstdp_step,
    stdp_window,
    stp_on_spike,
)
from spikeforge.spiketrain import SpikeTrain


def brute_force_stdp(pre_steps, post_steps, p):
    """Independent oracle: literal double sum over all spike pairs."""
    total = 0.0
    for tf in post_steps:
        for tn in pre_steps:
            dt = float(tf) - float(tn)
            if dt > 0:
                total += p.a_plus * np.exp(-dt / p.tau_plus)
            elif dt < 0:
                total += -p.a_minus * np.exp(dt / p.tau_minus)
    return total


class TestSTDPWindow:
    def test_limit_from_above_is_a_plus(self):
        p = STDPParams(a_plus=0.03, tau_plus=20.0)
        assert stdp_window(1e-9, p) == pytest.approx(0.03)

    def test_value_at_tau_plus(self):
        p = STDPParams(a_plus=0.03)
        assert stdp_window(p.tau_plus, p) == pytest.approx(0.03 * np.exp(-1))

    def test_value_at_minus_tau_minus(self):
        p = STDPParams(a_minus=0.02)
        assert stdp_window(-p.tau_minus, p) == pytest.approx(-0.02 * np.exp(-1))

    def test_zero_gap_is_zero(self):
        assert stdp_window(0.0, STDPParams()) == 0.0

    @settings(max_examples=100)
    @given(dt=st.floats(0.01, 100.0))
    def test_sign_structure(self, dt):
        p = STDPParams()
        assert stdp_window(dt, p) > 0
        assert stdp_window(-dt, p) < 0
        # strictly decreasing in |dt| on each side
        assert stdp_window(dt, p) > stdp_window(dt + 1.0, p)
        assert stdp_window(-dt, p) < stdp_window(-dt - 1.0, p)


class TestApplySTDP:
    def test_empty_trains_unchanged(self):
        p = STDPParams()
        w = np.array([[0.5]])
        out = apply_stdp(SpikeTrain.zeros(20), SpikeTrain.zeros(20), w, p)
        assert out[0, 0] == 0.5

    def test_single_pair_potentiation(self):
        p = STDPParams(a_plus=0.1, tau_plus=20.0)
        pre = SpikeTrain.from_times([5], 20)
        post = SpikeTrain.from_times([10], 20)
        out = apply_stdp(pre, post, np.array([[0.0]]), p)
        assert out[0, 0] == pytest.approx(0.1 * np.exp(-5 / 20.0))

    def test_mixed_pairs_hand_oracle(self):
        p = STDPParams(a_plus=0.1, a_minus=0.05, tau_plus=20.0, tau_minus=20.0,
                       w_min=-1.0)
        pre = SpikeTrain.from_times([0, 10], 20)
        post = SpikeTrain.from_times([5], 20)
        out = apply_stdp(pre, post, np.array([[0.0]]), p)
        expected = 0.1 * np.exp(-5 / 20.0) - 0.05 * np.exp(-5 / 20.0)
        assert out[0, 0] == pytest.approx(expected)

    def test_mismatched_durations_rejected(self):
        with pytest.raises(ValueError):
            apply_stdp(SpikeTrain.zeros(10), SpikeTrain.zeros(20),
                       np.zeros((1, 1)), STDPParams())

    def test_matches_brute_force_on_random_trains(self):
        rng = np.random.default_rng(7)
        p = STDPParams(a_plus=0.02, a_minus=0.015, tau_plus=17.0,
                       tau_minus=34.0, w_min=-100.0, w_max=100.0)
        for _ in range(25):
            t_steps = 100
            pre = SpikeTrain((rng.random((t_steps, 2)) < 0.1).astype(np.uint8))
            post = SpikeTrain((rng.random((t_steps, 3)) < 0.1).astype(np.uint8))
            w0 = np.zeros((2, 3))
            out = apply_stdp(pre, post, w0, p)
            for i in range(2):
                for j in range(3):
                    expect = brute_force_stdp(pre.spike_steps(i),
                                              post.spike_steps(j), p)
                    assert out[i, j] == pytest.approx(expect, abs=1e-9)

    def test_clamping_respected(self):
        p = STDPParams(a_plus=10.0, w_min=0.0, w_max=1.0)
        pre = SpikeTrain.from_times([0], 10)
        post = SpikeTrain.from_times([1], 10)
        out = apply_stdp(pre, post, np.array([[0.9]]), p)
        assert out[0, 0] == 1.0


class TestHebbian:
    def test_coactive(self):
        assert hebbian_update(1.0, 1.0) == 1.0

    def test_zero_pre(self):
        assert hebbian_update(0.0, 5.0) == 0.0

    def test_accumulated_equals_sum(self):
        rng = np.random.default_rng(0)
        x = rng.random(50)
        y = rng.random(50)
        total = sum(hebbian_update(a, b) for a, b in zip(x, y))
        assert total == pytest.approx(np.dot(x, y))


class TestBCM:
    def test_at_threshold_pure_decay(self):
        dw, _ = bcm_update(1.0, 2.0, BCMState(theta_m=2.0), 0.5,
                           BCMParams(epsilon=0.1))
        assert dw == pytest.approx(-0.05)

    def test_zero_pre_rate(self):
        dw, _ = bcm_update(0.0, 3.0, BCMState(theta_m=1.0), 2.0,
                           BCMParams(epsilon=0.01))
        assert dw == pytest.approx(-0.02)

    def test_supra_threshold_potentiates(self):
        dw, _ = bcm_update(1.0, 2.0, BCMState(theta_m=1.0), 0.0,
                           BCMParams(epsilon=0.0))
        assert dw == pytest.approx(2.0)

    def test_threshold_tracks_activity(self):
        st_b = BCMState(theta_m=0.0)
        p = BCMParams(theta_window=10)
        for _ in range(200):
            _, st_b = bcm_update(1.0, 2.0, st_b, 0.0, p)
        assert st_b.theta_m == pytest.approx(2.0, abs=1e-6)

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            bcm_update(-1.0, 1.0, BCMState(), 0.0, BCMParams())


class TestSTP:
    def test_first_spike_efficacy_is_u(self):
        p = STPParams(u_frac=0.3)
        _, a = stp_on_spike(STPState.initial(p), np.inf, p)
        assert a == pytest.approx(0.3)

    def test_full_recovery_fixed_point(self):
        p = STPParams(u_frac=0.2)
        st_p = STPState(u=0.9, r=0.1)
        st_p, _ = stp_on_spike(st_p, 1e9, p)
        assert st_p.u == pytest.approx(p.u_frac, abs=1e-9)
        assert st_p.r == pytest.approx(1.0, abs=1e-9)

    def test_second_spike_hand_computed(self):
        p = STPParams(u_frac=0.2, tau_fac=50.0, tau_rec=50.0)
        st_p = STPState.initial(p)
        decay = np.exp(-1.0)
        u2 = 0.2 + 0.2 * 0.8 * decay
        r2 = 1.0 + (1.0 - 0.2 * 1.0 - 1.0) * decay
        new, a = stp_on_spike(st_p, 50.0, p)
        assert new.u == pytest.approx(u2)
        assert new.r == pytest.approx(r2)
        assert a == pytest.approx(u2 * r2)

    @settings(max_examples=50, deadline=None)
    @given(u_frac=st.floats(0.01, 1.0),
           gaps=st.lists(st.floats(0.0, 500.0), min_size=1, max_size=50))
    def test_state_stays_bounded(self, u_frac, gaps):
        p = STPParams(u_frac=u_frac, tau_fac=80.0, tau_rec=120.0)
        st_p = STPState.initial(p)
        for gap in gaps:
            st_p, a = stp_on_spike(st_p, gap, p)
            assert 0.0 < st_p.u <= 1.0
            assert 0.0 <= st_p.r <= 1.0
            assert 0.0 <= a <= 1.0

    def test_negative_gap_rejected(self):
        with pytest.raises(ValueError):
            stp_on_spike(STPState.initial(STPParams()), -1.0, STPParams())


class TestRSTDP:
    def test_zero_reward_changes_nothing_but_trace(self):
        st_r = RSTDPState(e=np.array([0.4]), tau_e=100.0)
        new, dw = rstdp_step(st_r, 0.1, 0.0, 1.0)
        assert dw[0] == 0.0
        assert new.e[0] != st_r.e[0]

    def test_trace_decays_exponentially(self):
        tau_e = 50.0
        st_r = RSTDPState(e=np.array([1.0]), tau_e=tau_e)
        dt = 0.01
        for _ in range(int(100 / dt)):
            st_r, _ = rstdp_step(st_r, 0.0, 0.0, dt)
        assert st_r.e[0] == pytest.approx(np.exp(-100 / tau_e), rel=1e-2)

    def test_reward_gates_trace(self):
        st_r = RSTDPState(e=np.array([0.5]), tau_e=1e12)
        _, dw = rstdp_step(st_r, 0.0, 2.0, 1e-9)
        assert dw[0] == pytest.approx(1.0)


class TestBatchSTDP:
    def test_identical_samples_scale_linearly(self):
        p = STDPParams(w_min=-100, w_max=100)
        pre = SpikeTrain.from_times([2, 9], 20)
        post = SpikeTrain.from_times([5], 20)
        single = batch_stdp([pre], [post], p)
        b = 4
        total = batch_stdp([pre] * b, [post] * b, p)
        assert total == pytest.approx(b * single)

    def test_empty_batch_is_zero(self):
        assert batch_stdp([], [], STDPParams()) == pytest.approx(0.0)

    def test_two_distinct_samples_sum_of_oracles(self):
        p = STDPParams(a_plus=0.05, a_minus=0.04, w_min=-100, w_max=100)
        rng = np.random.default_rng(3)
        pres, posts, expected = [], [], 0.0
        for _ in range(2):
            pre = SpikeTrain((rng.random((50, 1)) < 0.2).astype(np.uint8))
            post = SpikeTrain((rng.random((50, 1)) < 0.2).astype(np.uint8))
            pres.append(pre)
            posts.append(post)
            expected += brute_force_stdp(pre.spike_steps(0), post.spike_steps(0), p)
        assert batch_stdp(pres, posts, p)[0, 0] == pytest.approx(expected, abs=1e-12)


class TestFeedbackTarget:
    def test_zero_error_returns_layer_rates(self):
        s_l = np.array([0.3, 0.7])
        out = feedback_target(s_l, np.eye(2), np.array([1.0, 2.0]),
                              np.array([1.0, 2.0]))
        assert np.allclose(out, s_l)

    def test_zero_feedback_matrix(self):
        s_l = np.array([0.3, 0.7])
        out = feedback_target(s_l, np.zeros((2, 2)), np.array([1.0, 0.0]),
                              np.array([0.0, 1.0]))
        assert np.allclose(out, s_l)

    def test_identity_feedback_subtracts_error(self):
        s_l = np.array([0.5, 0.5])
        out = feedback_target(s_l, np.eye(2), np.array([0.1, -0.2]),
                              np.array([0.0, 0.0]))
        assert np.allclose(out, s_l - np.array([0.1, -0.2]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            feedback_target(np.zeros(2), np.zeros((3, 2)), np.zeros(2),
                            np.zeros(2))


class TestPbln:
    def test_constant_vector_is_zeroed(self):
        out = pbln_normalize(np.full(8, 3.7))
        assert np.allclose(out, 0.0)

    def test_two_point_case(self):
        out = pbln_normalize(np.array([-1.0, 1.0]), eps=0.0)
        assert np.allclose(out, [-1.0, 1.0])

    @settings(max_examples=100)
    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30))
    def test_output_centered(self, xs):
        out = pbln_normalize(np.array(xs))
        assert abs(out.mean()) < 1e-12

    @settings(max_examples=50)
    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=30))
    def test_unit_variance_without_eps(self, xs):
        x = np.array(xs)
        if x.var() < 1e-12:
            return
        out = pbln_normalize(x, eps=0.0)
        assert out.var() == pytest.approx(1.0, abs=1e-9)
