"""Structural checks for the basal-ganglia decision circuit and task."""

import numpy as np
import pytest

from spikeforge.circuits.bdm import (
    BDMConfig,
    CorridorEnv,
    build_bdm,
    run_bdm_task,
)


class TestConfig:
    def test_rejects_unknown_variant(self):
        with pytest.raises(ValueError, match="neuron_variant"):
            BDMConfig(neuron_variant="quantum")

    def test_rejects_empty_action_space(self):
        with pytest.raises(ValueError, match="space"):
            BDMConfig(action_space=0)

    def test_accepts_all_variants(self):
        for variant in ("lif", "simplified_hh", "simplified_hh_no_na",
                        "simplified_hh_no_k"):
            BDMConfig(neuron_variant=variant)


class TestStructure:
    def test_pathway_signs(self):
        net = build_bdm(BDMConfig())
        projs = net.net.projections
        assert projs[net.proj_strd1_gpi].sign == "inhibitory"
        assert projs[net.proj_strd2_gpe].sign == "inhibitory"
        assert projs[net.proj_gpe_stn].sign == "inhibitory"
        assert projs[net.proj_gpi_tha].sign == "inhibitory"
        assert projs[net.proj_stn_gpi].sign == "excitatory"
        assert projs[net.proj_tha_pmc].sign == "excitatory"
        assert projs[net.proj_hyperdirect].sign == "excitatory"

    def test_striatal_projections_are_rstdp(self):
        net = build_bdm(BDMConfig())
        assert net.net.projections[net.proj_direct].plasticity == "rstdp"
        assert net.net.projections[net.proj_indirect].plasticity == "rstdp"

    def test_dopamine_polarity_opposes(self):
        net = build_bdm(BDMConfig())
        direct = net.net.projections[net.proj_direct].reward_gain
        indirect = net.net.projections[net.proj_indirect].reward_gain
        assert direct > 0 > indirect

    def test_variants_share_layout(self):
        nets = [build_bdm(BDMConfig(neuron_variant=v))
                for v in ("lif", "simplified_hh", "simplified_hh_no_na")]
        assert len({n.n_total for n in nets}) == 1
        assert len({tuple(sorted(n.slices)) for n in nets}) == 1

    def test_no_na_variant_has_zero_sodium(self):
        net = build_bdm(BDMConfig(neuron_variant="simplified_hh_no_na"))
        assert net.net.populations[net.pop].params.gbar_na == 0.0


class TestSelection:
    def test_action_in_range(self):
        net = build_bdm(BDMConfig())
        rng = np.random.default_rng(0)
        for state in range(3):
            assert 0 <= net.select_action(state, rng) < 3

    def test_no_learning_without_reward(self):
        net = build_bdm(BDMConfig())
        rng = np.random.default_rng(0)
        w_before = net.net.projections[net.proj_direct].weights.copy()
        net.select_action(0, rng)
        w_after = net.net.projections[net.proj_direct].weights
        assert np.array_equal(w_before, w_after)

    def test_learn_moves_direct_weights(self):
        net = build_bdm(BDMConfig())
        rng = np.random.default_rng(0)
        for _ in range(5):
            net.select_action(1, rng)
            net.learn(1.0)
        w = net.net.projections[net.proj_direct].weights
        assert not np.allclose(w, 1.0)


class TestEnv:
    def test_episode_terminates(self):
        env = CorridorEnv(seed=0, length=7)
        env.reset(0)
        steps = 0
        done = False
        while not done:
            _, _, done = env.act(1)
            steps += 1
        assert steps == 7

    def test_rewards_are_plus_minus_one(self):
        env = CorridorEnv(seed=1)
        env.reset(0)
        done = False
        while not done:
            reward, state, done = env.act(np.random.default_rng(0).integers(3))
            assert reward in (-1.0, 1.0)
            assert 0 <= state < 3

    def test_gap_sequence_fixed_per_seed(self):
        a, b = CorridorEnv(seed=5), CorridorEnv(seed=5)
        assert np.array_equal(a.gaps, b.gaps)

    def test_perfect_policy_scores_maximum(self):
        env = CorridorEnv(seed=3)
        env.reset(0)
        total, done = 0.0, False
        while not done:
            state = env._state()
            action = {env.BELOW: env.DOWN, env.ALIGNED: env.STAY,
                      env.ABOVE: env.UP}[state]
            reward, _, done = env.act(action)
            total += reward
        assert total == env.length


class TestRunTask:
    def test_curve_shape_and_bounds(self):
        cfg = BDMConfig(episodes=3, steps_per_episode=5)
        net = build_bdm(cfg)
        curve = run_bdm_task(net, CorridorEnv(seed=0, length=5), seed=0)
        assert curve.shape == (3,)
        assert np.all(np.abs(curve) <= 5)

    def test_deterministic_given_seed(self):
        cfg = BDMConfig(episodes=2, steps_per_episode=5)
        curves = [run_bdm_task(build_bdm(cfg), CorridorEnv(seed=4, length=5),
                               seed=4) for _ in range(2)]
        assert np.array_equal(curves[0], curves[1])
