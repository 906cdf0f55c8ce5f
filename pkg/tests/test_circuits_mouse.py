"""Structural checks for the scaled mouse-brain model."""

import numpy as np
import pytest

from spikeforge.circuits.mouse import (
    TYPE_COUNTS,
    MouseBrainConfig,
    build_mouse_brain,
    generate_connectome,
    load_connectome,
    run_spontaneous,
    save_connectome,
)


class TestConfig:
    def test_full_scale_counts_exact(self):
        counts = MouseBrainConfig(scale=1.0).scaled_counts()
        assert counts == {"E": 56100, "I_BC": 14960, "I_MC": 7480,
                          "TC": 1300, "TI": 260, "TRN": 520}

    def test_scaled_counts_round(self):
        counts = MouseBrainConfig(scale=0.02).scaled_counts()
        assert counts["E"] == 1122
        assert all(v >= 1 for v in counts.values())

    def test_rejects_zero_scale(self):
        with pytest.raises(ValueError, match="scale"):
            MouseBrainConfig(scale=0.0)

    def test_rejects_scale_above_one(self):
        with pytest.raises(ValueError, match="scale"):
            MouseBrainConfig(scale=1.5)

    def test_rejects_scale_erasing_a_type(self):
        with pytest.raises(ValueError, match="below 1"):
            MouseBrainConfig(scale=0.0001)


class TestConnectome:
    def test_roundtrip(self, tmp_path):
        edges = generate_connectome(10, seed=3)
        path = tmp_path / "connectome.csv"
        save_connectome(edges, path)
        assert load_connectome(path) == edges

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,0.5\n")
        with pytest.raises(ValueError, match="header"):
            load_connectome(path)

    def test_bad_area_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("src_area,dst_area,weight\n1,2,0.5\n1,x,0.5\n")
        with pytest.raises(ValueError, match="row 3.*dst_area"):
            load_connectome(path)

    def test_bad_weight_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("src_area,dst_area,weight\n1,2,heavy\n")
        with pytest.raises(ValueError, match="weight"):
            load_connectome(path)

    def test_negative_weight_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("src_area,dst_area,weight\n1,2,-3.0\n")
        with pytest.raises(ValueError, match="non-negative"):
            load_connectome(path)

    def test_csv_format(self, tmp_path):
        path = tmp_path / "connectome.csv"
        save_connectome(generate_connectome(6, seed=0), path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.split(b"\n")[0] == b"src_area,dst_area,weight"


class TestNetwork:
    def test_population_per_type(self):
        net = build_mouse_brain(MouseBrainConfig(scale=0.005))
        assert set(net.pops) == set(TYPE_COUNTS)

    def test_inhibitory_types_project_negatively(self):
        net = build_mouse_brain(MouseBrainConfig(scale=0.005))
        for (src, dst), proj_id in net.projections.items():
            proj = net.net.projections[proj_id]
            if src in ("E", "TC"):
                assert proj.sign == "excitatory", (src, dst)
            else:
                assert proj.sign == "inhibitory", (src, dst)

    def test_spontaneous_run_finite(self):
        net = build_mouse_brain(MouseBrainConfig(scale=0.005))
        rec, rates = run_spontaneous(net, steps=200, seed=0)
        assert all(np.isfinite(r) for r in rates.values())

    def test_loaded_connectome_used(self, tmp_path):
        path = tmp_path / "connectome.csv"
        save_connectome(generate_connectome(8, seed=1), path)
        cfg = MouseBrainConfig(scale=0.005, n_areas=8,
                               connectome_path=str(path))
        net = build_mouse_brain(cfg)
        assert net.connectome == load_connectome(path)
