import json

import numpy as np
import pytest

import scnctl


def test_scenario_names():
    assert set(scnctl.scenario_names()) == {
        "estimation",
        "smd_control",
        "silencing",
        "robustness_sweep",
        "cartpole",
        "sparsity",
    }


def test_estimation_run_shapes_and_accuracy():
    out = scnctl.run("estimation", {"integration.duration": 8.0})
    n = out["time"].shape[0]
    assert out["x"].shape == (n, 2)
    assert out["x_hat"].shape == (n, 2)
    assert "u" not in out
    assert out["metrics"]["rmse_vs_oracle_after_transient"][0] < 0.05
    assert out["spike_times"].shape == out["spike_neurons"].shape
    assert out["metrics"]["spike_count"] == out["spike_times"].shape[0]


def test_control_replay_is_identical():
    a = scnctl.run("smd_control", {"integration.duration": 2.0, "seed": 3})
    b = scnctl.run("smd_control", {"integration.duration": 2.0, "seed": 3})
    assert a["trajectory_csv"] == b["trajectory_csv"]
    np.testing.assert_array_equal(a["u"], b["u"])
    assert a["metrics"]["max_spikes_per_step"] <= 1


def test_summary_json_parses():
    out = scnctl.run("smd_control", {"integration.duration": 1.0})
    summary = json.loads(out["summary_json"])
    assert summary["scenario"]["name"] == "smd_control"
    assert summary["metrics"]["spike_count"] == out["metrics"]["spike_count"]


def test_bad_overrides_raise():
    with pytest.raises(ValueError, match="unknown key"):
        scnctl.run("estimation", {"network.nerons": 3})
    with pytest.raises(ValueError):
        scnctl.run("no_such_scenario")


def test_sweep_shape():
    res = scnctl.sweep({"integration.duration": 0.5}, noise=[1e-4, 1e-2], pulse=[100, 900])
    assert res["scn_error"].shape == (2, 2)
    assert np.all(res["scn_error"][:, 1] > res["scn_error"][:, 0])
    assert res["failures"] == []


def test_riccati_scalar_root():
    p = scnctl.solve_care(np.array([[0.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))
    assert p[0, 0] == pytest.approx(1.0, abs=1e-12)
    a = np.array([[0.0, 1.0], [-5.0 / 3.0, -0.5 / 3.0]])
    c = np.array([[1.0, 0.0]])
    kf = scnctl.kalman_gain(a, c, 1e-3 * np.eye(2), 1e-3 * np.eye(1))
    assert np.all(np.linalg.eigvals(a + kf @ c).real < 0)


def test_weights_json():
    doc = json.loads(scnctl.weights_json("cartpole"))
    assert doc["format"] == "scn-weights"
    assert doc["fields"]["D_x"]["rows"] == 4
    assert doc["fields"]["D_x"]["cols"] == 100


def test_spearman():
    assert scnctl.spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
