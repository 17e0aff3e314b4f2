import json
import math
import subprocess
import sys

import numpy as np
import pytest

HO_MODEL = {"family": "coupled_oscillator",
            "params": {"n_com": 0, "n_rel": 0, "com_length": 4.0, "rel_length": 2.0}}
HO_13_MODEL = {"family": "coupled_oscillator",
               "params": {"n_com": 1, "n_rel": 3, "com_length": 4.0, "rel_length": 2.0}}


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "localent", *args],
                          capture_output=True, text=True)


def write_cfg(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestPoint:
    def test_hydrogen_worked_example(self, tmp_path):
        cfg = {"mode": "point",
               "model": {"family": "hydrogen", "params": {"n": 1, "l": 0, "m": 0}},
               "region": {"center_rel": [2.0, 0.0, 0.0], "center_com": [0.0, 0.0, 0.0],
                          "half_widths_a": 0.1, "half_widths_b": 0.1}}
        res = run_cli("point", "--config", write_cfg(tmp_path, "p.json", cfg))
        assert res.returncode == 0
        doc = json.loads(res.stdout)
        assert math.isclose(doc["report"]["epsilon"], 5.5555555555555556e-06,
                            rel_tol=1e-10)
        assert doc["report"]["validity"] == "valid"

    def test_product_state_zero(self, tmp_path):
        cfg = {"model": {"family": "gaussian_product",
                         "params": {"widths_a": [1.0], "widths_b": [1.5]}},
               "region": {"center_a": [0.2], "center_b": [0.1],
                          "half_widths_a": 0.05, "half_widths_b": 0.05}}
        res = run_cli("point", "--config", write_cfg(tmp_path, "p.json", cfg))
        assert res.returncode == 0
        doc = json.loads(res.stdout)
        assert doc["report"]["epsilon"] < 1e-25
        assert doc["report"]["E_D"] < 1e-20

    def test_node_center_exit_code_2(self, tmp_path):
        cfg = {"model": HO_13_MODEL,
               "region": {"center_com": [0.0], "center_rel": [0.9],
                          "half_widths_a": 0.1, "half_widths_b": 0.1, "sigma": 0.1}}
        res = run_cli("point", "--config", write_cfg(tmp_path, "p.json", cfg))
        assert res.returncode == 2
        doc = json.loads(res.stdout)
        assert doc["report"]["validity"] == "near_node_cutoff"
        assert math.isclose(doc["report"]["epsilon"], 0.1 ** 4 / 9.0, rel_tol=1e-12)

    def test_config_error_diagnostics(self, tmp_path):
        cfg = {"model": {"family": "coupled_oscillator",
                         "params": {"n_com": 0, "n_rel": 0, "omega": -1.0}},
               "region": {"center_a": [0.0], "center_b": [0.0],
                          "half_widths_a": 0.1, "half_widths_b": 0.1}}
        res = run_cli("point", "--config", write_cfg(tmp_path, "p.json", cfg))
        assert res.returncode == 1
        assert "model.params.omega" in res.stderr

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"model": \n oops}')
        res = run_cli("point", "--config", str(path))
        assert res.returncode == 1
        assert "line" in res.stderr

    def test_missing_file(self):
        res = run_cli("point", "--config", "/nonexistent/cfg.json")
        assert res.returncode == 1


class TestMap:
    def map_cfg(self, model, count=12, probability=True):
        return {"model": model,
                "region": {"center_com": [0.0], "center_rel": [0.0],
                           "half_widths_a": 0.1, "half_widths_b": 0.1, "sigma": 0.1},
                "sweep": {"axes": [{"name": "R", "min": -8.0, "max": 8.0, "count": count},
                                   {"name": "r", "min": -6.0, "max": 6.0, "count": count}]},
                "probability": probability}

    def test_header_and_shape(self, tmp_path):
        cfg = write_cfg(tmp_path, "m.json", self.map_cfg(HO_MODEL, count=6))
        out = tmp_path / "map.csv"
        res = run_cli("map", "--config", cfg, "--out", str(out))
        assert res.returncode == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "axis1,axis2,prob_density,eps,E_D,E_ND,p_ab,validity"
        assert len(lines) == 1 + 36

    def test_determinism_and_threads(self, tmp_path):
        cfg = write_cfg(tmp_path, "m.json", self.map_cfg(HO_13_MODEL, count=8))
        outs = []
        for name, threads in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "2")):
            out = tmp_path / name
            res = run_cli("map", "--config", cfg, "--out", str(out),
                          "--threads", threads)
            assert res.returncode == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_ground_state_constant_entropy(self, tmp_path):
        cfg = write_cfg(tmp_path, "m.json", self.map_cfg(HO_MODEL, count=10))
        out = tmp_path / "map.csv"
        run_cli("map", "--config", cfg, "--out", str(out))
        data = np.genfromtxt(out, delimiter=",", names=True,
                             dtype=None, encoding="utf-8")
        assert np.var(data["E_D"]) < 1e-20
        assert np.all(data["E_ND"] <= data["E_D"] * data["p_ab"] * (1 + 1e-12))

    def test_one_dimensional_sweep(self, tmp_path):
        cfg = self.map_cfg(HO_MODEL, count=5, probability=False)
        cfg["sweep"]["axes"] = [{"name": "r", "min": -3.0, "max": 3.0, "count": 7}]
        path = write_cfg(tmp_path, "m.json", cfg)
        out = tmp_path / "map.csv"
        res = run_cli("map", "--config", path, "--out", str(out))
        assert res.returncode == 0
        data = np.genfromtxt(out, delimiter=",", names=True,
                             dtype=None, encoding="utf-8")
        assert data.shape[0] == 7
        assert np.all(np.isnan(data["p_ab"]))

    def test_hydrogen_singular_cell_marked(self, tmp_path):
        cfg = {"model": {"family": "hydrogen", "params": {"n": 1, "l": 0, "m": 0}},
               "region": {"center_rel": [1.0, 0.0, 0.0], "center_com": [0.0] * 3,
                          "half_widths_a": 0.05, "half_widths_b": 0.05},
               "sweep": {"axes": [{"name": "r_x", "min": -1.0, "max": 1.0, "count": 3}]},
               "probability": False}
        out = tmp_path / "map.csv"
        res = run_cli("map", "--config", write_cfg(tmp_path, "m.json", cfg),
                      "--out", str(out))
        assert res.returncode == 0
        rows = out.read_text().splitlines()[1:]
        # middle cell sits exactly at r = 0
        assert rows[1].endswith("singular")


class TestVerify:
    def test_ho_suite_passes(self, tmp_path):
        cfg = {"model": HO_MODEL,
               "region": {"center_com": [0.3], "center_rel": [-0.4],
                          "half_widths_a": 0.1, "half_widths_b": 0.4},
               "verify": {"nodes_per_axis": 48, "ladder": [1.0, 0.5, 0.25],
                          "vary": "a", "lambda3": True}}
        res = run_cli("verify", "--config", write_cfg(tmp_path, "v.json", cfg))
        assert res.returncode == 0
        doc = json.loads(res.stdout)
        assert doc["passed"] is True
        names = {c["name"] for c in doc["checks"]}
        assert {"eps_rel_error", "eps_slope", "lambda3_rel_error",
                "lambda3_slope"} <= names

    def test_oversized_region_fails_with_classification(self, tmp_path):
        cfg = {"model": HO_MODEL,
               "region": {"center_com": [0.0], "center_rel": [0.0],
                          "half_widths_a": 2.0, "half_widths_b": 2.0},
               "verify": {"ladder": [1.0]}}
        res = run_cli("verify", "--config", write_cfg(tmp_path, "v.json", cfg))
        assert res.returncode == 2
        doc = json.loads(res.stdout)
        assert doc["passed"] is False
        validity = [c for c in doc["checks"] if c["name"] == "region_validity"][0]
        assert validity["value"] == "invalid_region_too_large"

    def test_hydrogen_inverse_square_across_radii(self, tmp_path):
        # eps * r^2 constant across separations, oracle within tolerance
        vals = []
        for r in (2.0, 4.0):
            cfg = {"model": {"family": "hydrogen", "params": {"n": 1, "l": 0, "m": 0}},
                   "region": {"center_rel": [r, 0.0, 0.0], "center_com": [0.0] * 3,
                              "half_widths_a": 0.05, "half_widths_b": 0.05},
                   "verify": {"nodes_per_axis": 10, "ladder": [1.0], "lambda3": False}}
            res = run_cli("verify", "--config", write_cfg(tmp_path, f"v{r}.json", cfg))
            assert res.returncode == 0
            doc = json.loads(res.stdout)
            vals.append(doc["comparison"]["rungs"][0]["eps_formula"] * r * r)
        assert abs(vals[0] - vals[1]) <= 1e-9 * vals[0]


class TestModels:
    def test_lists_families(self):
        res = run_cli("models")
        assert res.returncode == 0
        doc = json.loads(res.stdout)
        assert {"coupled_oscillator", "hydrogen", "gaussian_product", "wkb"} <= set(doc)


class TestWkbConfig:
    def test_wkb_point_via_level(self, tmp_path):
        cfg = {"model": {"family": "wkb",
                         "params": {"potential": {"type": "harmonic", "omega": 1.0,
                                                  "mass": 1.0},
                                    "level": 400, "bracket": [1.0, 900.0],
                                    "mass": 1.0, "domain": [-90.0, 90.0]}},
               "region": {"center_com": [0.0], "center_rel": [3.3],
                          "half_widths_a": 0.01, "half_widths_b": 0.01},
               "lambda3": False}
        res = run_cli("point", "--config", write_cfg(tmp_path, "w.json", cfg))
        assert res.returncode == 0
        doc = json.loads(res.stdout)
        assert doc["report"]["epsilon"] > 0
