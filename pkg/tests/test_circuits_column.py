"""Structural checks for the thalamocortical column."""

import numpy as np
import pytest

from spikeforge.circuits.column import (
    ColumnConfig,
    build_column,
    classify_presets,
    stimulate_l4,
)


class TestConfig:
    def test_rejects_bad_ratio(self):
        with pytest.raises(ValueError, match="exc_ratio"):
            ColumnConfig(exc_ratio={"l1": 0.0, "l23": 1.5, "l4": 0.8,
                                    "l5": 0.8, "l6": 0.8})

    def test_rejects_bad_burst_fraction(self):
        with pytest.raises(ValueError, match="burst_fraction"):
            ColumnConfig(burst_fraction=-0.1)


class TestStructure:
    def test_l1_has_no_excitatory_groups(self):
        net = build_column(ColumnConfig())
        assert "l1_exc" not in net.groups
        assert "l1_burst" not in net.groups
        assert any(name.startswith("l1_") for name in net.groups)

    def test_every_layer_present(self):
        net = build_column(ColumnConfig())
        for layer in ("l1", "l23", "l4", "l5", "l6", "thalamus", "rtn"):
            assert net.layer_populations(layer), layer

    def test_group_sizes_sum_to_layer_sizes(self):
        cfg = ColumnConfig()
        net = build_column(cfg)
        for layer in ("l23", "l4", "l5", "l6"):
            total = sum(net.net.populations[pid].size
                        for pid in net.layer_populations(layer))
            assert total == cfg.layer_sizes[layer]

    def test_interneuron_projections_inhibitory(self):
        net = build_column(ColumnConfig())
        for proj in net.net.projections.values():
            name = proj.pre.name
            if name.endswith(("_basket", "_lts")) or name == "rtn":
                assert proj.sign == "inhibitory", name
                assert (proj.weights <= 0).all()


class TestStimulation:
    def test_unstimulated_column_silent(self):
        net = build_column(ColumnConfig(background_rate=0.0))
        rec = net.net.run(100, seed=0)
        assert rec.total_spikes() == 0

    def test_stimulus_evokes_spikes(self):
        net = build_column(ColumnConfig())
        rec = stimulate_l4(net, steps=100, seed=0)
        assert rec.total_spikes() > 0
        assert net.first_layer_latency(rec, "l4") is not None

    def test_l4_leads_downstream_layers(self):
        net = build_column(ColumnConfig(background_rate=0.0))
        rec = stimulate_l4(net, steps=150, seed=0)
        l4 = net.first_layer_latency(rec, "l4")
        for layer in ("l23", "l5", "l6"):
            downstream = net.first_layer_latency(rec, layer)
            assert downstream is None or l4 <= downstream


class TestClassifier:
    def test_preset_labels(self):
        labels = classify_presets()
        assert labels["regular_spiking"] == "regular"
        assert labels["chattering"] == "bursting"
        assert labels["fast_spiking"] == "fast"
        assert labels["low_threshold_spiking"] == "low_threshold"
