import json

import numpy as np
import pytest

from spikeforge.network import Network, Recorder, StimulusItem, wta_readout
from spikeforge.neurons import IFParams, LIFParams
from spikeforge.plasticity import STDPParams


def two_pop_if(delay=0, weight=2.0, **connect_kw):
    """IF source firing every step under drive, feeding one IF target."""
    net = Network()
    src = net.add_population(1, "if", IFParams(v_th=1.0))
    dst = net.add_population(1, "if", IFParams(v_th=1.0))
    net.connect(src, dst, weight=weight, delay=delay, **connect_kw)
    return net, src, dst


class TestDelivery:
    def test_zero_delay_arrives_next_step(self):
        net, src, dst = two_pop_if(delay=0)
        net.seed(0)
        drive = {src: np.array([2.0])}
        s0 = net.step(drive)
        assert s0[src][0] and not s0[dst][0]
        s1 = net.step({})
        assert s1[dst][0]

    def test_delay_d_arrives_at_t_plus_d(self):
        d = 5
        net, src, dst = two_pop_if(delay=d)
        net.seed(0)
        net.step({src: np.array([2.0])})  # source spikes at t=0
        for t in range(1, d):
            assert not net.step({})[dst][0]
        assert net.step({})[dst][0]  # t = d

    def test_current_superposition(self):
        # Two subthreshold projections together cross threshold.
        net = Network()
        a = net.add_population(1, "if", IFParams(v_th=1.0))
        b = net.add_population(1, "if", IFParams(v_th=1.0))
        c = net.add_population(1, "if", IFParams(v_th=1.2))
        net.connect(a, c, weight=0.7)
        net.connect(b, c, weight=0.7)
        net.seed(0)
        net.step({a: np.array([2.0]), b: np.array([2.0])})
        assert net.step({})[c][0]

    def test_inhibition_cancels_excitation(self):
        net = Network()
        a = net.add_population(1, "if", IFParams(v_th=1.0))
        b = net.add_population(1, "if", IFParams(v_th=1.0))
        c = net.add_population(1, "if", IFParams(v_th=1.0))
        net.connect(a, c, weight=1.5)
        net.connect(b, c, weight=-1.5, sign="inhibitory")
        net.seed(0)
        net.step({a: np.array([2.0]), b: np.array([2.0])})
        spikes = net.step({})
        assert not spikes[c][0]

    def test_mask_restricts_fanout(self):
        net = Network()
        src = net.add_population(2, "if", IFParams(v_th=1.0))
        dst = net.add_population(2, "if", IFParams(v_th=1.0))
        mask = np.array([[True, False], [False, False]])
        net.connect(src, dst, mask=mask, weight=2.0)
        net.seed(0)
        net.step({src: np.full(2, 2.0)})
        spikes = net.step({})
        assert spikes[dst].tolist() == [True, False]


class TestConstructionValidation:
    def test_duplicate_name_rejected(self):
        net = Network()
        net.add_population(1, "if", name="x")
        with pytest.raises(ValueError):
            net.add_population(1, "if", name="x")

    def test_name_lookup(self):
        net = Network()
        pid = net.add_population(3, "lif", name="inputs")
        assert net.pop_id("inputs") == pid
        assert net.pop("inputs").size == 3

    def test_sign_violation_rejected(self):
        net = Network()
        a = net.add_population(1, "if")
        b = net.add_population(1, "if")
        with pytest.raises(ValueError):
            net.connect(a, b, weight=-0.5, sign="excitatory")
        with pytest.raises(ValueError):
            net.connect(a, b, weight=0.5, sign="inhibitory")

    def test_bad_mask_shape_rejected(self):
        net = Network()
        a = net.add_population(2, "if")
        b = net.add_population(3, "if")
        with pytest.raises(ValueError):
            net.connect(a, b, mask=np.ones((3, 2), dtype=bool))

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            Network().add_population(1, "perceptron")

    def test_lateral_inhibition_synapse_count(self):
        net = Network()
        p = net.add_population(5, "if")
        proj_id = net.lateral_inhibit(p, strength=0.3)
        proj = net.projections[proj_id]
        assert proj.n_synapses() == 5 * 4
        assert not proj.mask.diagonal().any()

    def test_run_rejects_unknown_schedule_target(self):
        net = Network()
        net.add_population(1, "if")
        bad = StimulusItem(population=99, onset=0, offset=5, amplitude=1.0)
        with pytest.raises(KeyError):
            net.run(10, schedule=[bad])


def _build_driven_net():
    """LIF pair with background noise and online STDP, for determinism runs."""
    net = Network()
    src = net.add_population(8, "lif", LIFParams(tau=10.0, v_th=0.8),
                             background_rate=0.4, background_weight=10.0)
    dst = net.add_population(4, "lif", LIFParams(tau=10.0, v_th=0.8))
    net.connect(src, dst, weight=0.3, delay=1, plasticity="stdp",
                stdp=STDPParams(a_plus=0.01, a_minus=0.008, w_max=0.5))
    return net, src, dst


def _run_driven(seed, workers):
    net, src, dst = _build_driven_net()
    rec = net.run(200, seed=seed, workers=workers)
    proj = net.projections[0]
    return rec, proj.weights.copy()


class TestDeterminism:
    def test_same_seed_bitwise_identical(self):
        rec1, w1 = _run_driven(seed=5, workers=1)
        rec2, w2 = _run_driven(seed=5, workers=1)
        assert rec1.spike_steps == rec2.spike_steps
        assert rec1.spike_neurons == rec2.spike_neurons
        assert np.array_equal(w1, w2)

    def test_worker_count_does_not_change_results(self):
        rec1, w1 = _run_driven(seed=5, workers=1)
        for workers in (2, 4, 7):
            recw, ww = _run_driven(seed=5, workers=workers)
            assert recw.spike_steps == rec1.spike_steps
            assert recw.spike_pops == rec1.spike_pops
            assert recw.spike_neurons == rec1.spike_neurons
            assert np.array_equal(ww, w1)

    def test_different_seeds_differ(self):
        rec1, _ = _run_driven(seed=5, workers=1)
        rec2, _ = _run_driven(seed=6, workers=1)
        assert (rec1.spike_steps, rec1.spike_neurons) \
            != (rec2.spike_steps, rec2.spike_neurons)


class TestOnlinePlasticity:
    def test_causal_pairing_potentiates(self):
        net, src, dst = two_pop_if(delay=0, weight=2.0, plasticity="stdp",
                                   stdp=STDPParams(a_plus=0.05, a_minus=0.05,
                                                   w_max=5.0))
        net.seed(0)
        w0 = net.projections[0].weights[0, 0]
        for _ in range(20):
            net.step({src: np.array([2.0])})
        assert net.projections[0].weights[0, 0] > w0

    def test_rstdp_defers_until_reward(self):
        net, src, dst = two_pop_if(delay=0, weight=2.0, plasticity="rstdp",
                                   stdp=STDPParams(a_plus=0.05, w_max=5.0))
        net.seed(0)
        w0 = net.projections[0].weights[0, 0]
        for _ in range(20):
            net.step({src: np.array([2.0])})
        proj = net.projections[0]
        assert proj.weights[0, 0] == w0
        assert proj.eligibility[0, 0] != 0.0
        proj.apply_reward(1.0)
        assert proj.weights[0, 0] > w0

    def test_sign_clamp_survives_plasticity(self):
        net = Network()
        src = net.add_population(1, "if", IFParams(v_th=1.0))
        dst = net.add_population(1, "if", IFParams(v_th=1.0))
        net.connect(src, dst, weight=-0.01, sign="inhibitory",
                    plasticity="stdp",
                    stdp=STDPParams(a_plus=1.0, a_minus=0.0, w_min=-1.0))
        net.seed(0)
        for _ in range(30):
            net.step({src: np.array([2.0]), dst: np.array([2.0])})
        assert np.all(net.projections[0].weights <= 0.0)


class TestRecorderAndReadout:
    def test_schedule_windows_drive_spikes(self):
        net = Network()
        p = net.add_population(2, "if", IFParams(v_th=1.0))
        sched = [StimulusItem(population=p, onset=5, offset=8, amplitude=2.0,
                              neuron_start=0, neuron_stop=1)]
        rec = net.run(15, schedule=sched)
        assert rec.first_spike_step(p) == 5
        counts = rec.spike_counts(p, 2)
        assert counts.tolist() == [3, 0]

    def test_wta_readout_and_ties(self):
        rec = Recorder()
        rec.record_spikes(0, 0, np.array([False, True, False]))
        rec.record_spikes(1, 0, np.array([False, True, True]))
        winner, decisive = wta_readout(rec, 0, 3, (0, 2))
        assert winner == 1 and decisive
        winner, decisive = wta_readout(rec, 0, 3, (1, 2))
        assert winner == 1 and not decisive  # 1-1 tie breaks low
        winner, decisive = wta_readout(rec, 0, 3, (5, 9))
        assert winner == 0 and not decisive  # empty window

    def test_raster_export_format(self, tmp_path):
        net = Network()
        p = net.add_population(1, "if", IFParams(v_th=1.0))
        sched = [StimulusItem(population=p, onset=0, offset=2, amplitude=2.0)]
        rec = net.run(4, schedule=sched)
        path = tmp_path / "raster.csv"
        rec.export_raster(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,population,neuron"
        assert lines[1] == "0,0,0"
        assert lines[2] == "1,0,0"
        assert len(lines) == 3

    def test_voltage_probe_export(self, tmp_path):
        net = Network()
        p = net.add_population(1, "lif", LIFParams(tau=10.0, v_th=100.0))
        rec = Recorder()
        rec.add_probe(p, 0)
        sched = [StimulusItem(population=p, onset=0, offset=5, amplitude=0.5)]
        net.run(5, schedule=sched, recorder=rec)
        path = tmp_path / "v.csv"
        rec.export_voltages(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,population,neuron,v"
        assert len(lines) == 6
        vals = [float(l.split(",")[3]) for l in lines[1:]]
        assert all(b > a for a, b in zip(vals, vals[1:]))  # charging up

    def test_metrics_export_round_trips(self, tmp_path):
        rec = Recorder()
        rec.append_metric("reward", 1.0)
        rec.append_metric("reward", -0.5)
        rec.append_metric("accuracy", 0.25)
        path = tmp_path / "metrics.json"
        rec.export_metrics(path)
        data = json.loads(path.read_text())
        assert data == {"reward": [1.0, -0.5], "accuracy": [0.25]}
        # stable serialization: keys sorted, trailing newline
        text = path.read_text()
        assert text.index("accuracy") < text.index("reward")
        assert text.endswith("\n")
