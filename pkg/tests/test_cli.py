import csv
import json

import pytest
import yaml

import main_shtc
from main_shtc import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main

CANONICAL_STATE = "0.5,0.3333333333333333,3.0,0.3,0.0"
CANONICAL_LAMBDAS = [-1.7, -0.7, 0.3, 1.3, 2.3]

POLY_ISO = {
    "phase1": {"family": "polytropic-isentropic", "K": 1.0, "gamma": 2.0},
    "phase2": {"family": "ideal-isothermal", "cT2": 1.0},
}


def _write(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _canonical_verify(**gates):
    return {
        "eos": POLY_ISO,
        "sampling": {"n_states": 1, "seed": 7, "alpha_range": [0.5, 0.5],
                     "pressure_range": [4.0, 4.0], "u_range": [0.3, 0.3]},
        "relax": {"tau_alpha": 1.0, "tau_c": 1.0, "zeta": 1.0},
        "gates": gates,
    }


def _verify(config, out, workers=1):
    return main(["verify", "--config", str(config), "--out", str(out), "--workers", str(workers)])


def test_eigen_prints_canonical_spectrum(config_dir, capsys):
    code = main(["eigen", "--config", str(config_dir / "verify_canonical.yaml"), "--state", CANONICAL_STATE])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6
    lambdas = [float(line.split()[1]) for line in lines[1:]]
    assert lambdas == pytest.approx(CANONICAL_LAMBDAS, rel=1e-8)
    assert lines[3].split()[-1] == "linearly-degenerate"


def test_eigen_rejects_non_equilibrium_state(config_dir):
    code = main(["eigen", "--config", str(config_dir / "verify_canonical.yaml"),
                 "--state", "0.5,0.3333333333333333,3.0,0.3,0.5"])
    assert code == EXIT_FAILURE


@pytest.mark.parametrize("state", ["0.5,0.3,3.0", "0.5,abc,3.0,0.3,0.0", "1.5,0.3,3.0,0.3,0.0"])
def test_eigen_malformed_state_is_a_usage_error(config_dir, state):
    assert main(["eigen", "--config", str(config_dir / "verify_canonical.yaml"), "--state", state]) == EXIT_USAGE


def test_verify_canonical_report(config_dir, tmp_path):
    out = tmp_path / "report.json"
    assert _verify(config_dir / "verify_canonical.yaml", out) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert report["seed"] == 7
    # one sampled state plus the two vanishing-phase states
    assert report["summary"]["n_states"] == 3
    first = report["states"][0]
    assert first["index"] == 0
    assert first["lambdas"] == pytest.approx(CANONICAL_LAMBDAS, rel=1e-10)
    assert first["sk_products"] == pytest.approx([-8.0, 2.0, 0.0, 2.0, -8.0], abs=1e-6)
    assert first["sk_pass"] is False
    assert "SK product C" in report["summary"]["discrepancies"]
    assert [s["state"]["alpha"] for s in report["states"][1:]] == pytest.approx([1e-3, 1.0 - 1e-3])


def test_verify_is_deterministic(tmp_path):
    config = _write(tmp_path / "cfg.yaml", _canonical_verify())
    runs = []
    for k, workers in enumerate((1, 1, 2)):
        out = tmp_path / f"report{k}.json"
        assert _verify(config, out, workers) == EXIT_OK
        report = json.loads(out.read_text(encoding="utf-8"))
        report.pop("generated_at")
        runs.append(report)
    assert runs[0] == runs[1] == runs[2]


def test_verify_sk_gate(tmp_path):
    config = _write(tmp_path / "cfg.yaml", _canonical_verify(require_sk_pass=True))
    out = tmp_path / "report.json"
    assert _verify(config, out) == EXIT_FAILURE
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is False
    assert "SK condition fails" in report["states"][0]["failures"]


def test_verify_degenerate_phases(config_dir, tmp_path):
    out = tmp_path / "report.json"
    assert _verify(config_dir / "verify_degenerate.yaml", out) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["summary"]["n_degenerate"] == report["summary"]["n_states"] == 22
    assert all(s["minors"]["H2"] == pytest.approx(0.0, abs=1e-8 * s["minors"]["H1"] ** 2)
               for s in report["states"])


@pytest.mark.parametrize("text", [
    "eos: [1, 2",
    "- just\n- a list\n",
    "sampling: {n_states: 3}\n",
    "[sampling]\nn_states = 3\n",
])
def test_verify_malformed_config(tmp_path, text):
    config = tmp_path / "bad.yaml"
    config.write_text(text, encoding="utf-8")
    out = tmp_path / "report.json"
    assert _verify(config, out) == EXIT_USAGE
    assert not out.exists()


def test_verify_rejects_bad_sampling_range(tmp_path):
    data = _canonical_verify()
    data["sampling"]["alpha_range"] = [0.0, 0.5]
    out = tmp_path / "report.json"
    assert _verify(_write(tmp_path / "cfg.yaml", data), out) == EXIT_USAGE
    assert not out.exists()


def test_missing_config_file(tmp_path):
    assert _verify(tmp_path / "nope.yaml", tmp_path / "report.json") == EXIT_USAGE


def _relaxation_config(**time):
    return {
        "eos": dict(POLY_ISO, calibrate_pressure=4.0),
        "grid": {"n_cells": 20, "domain": [0.0, 1.0]},
        "time": dict({"cfl": 0.9, "t_end": 0.3, "output_every": 0.05}, **time),
        "bc": "periodic",
        "relax": {"tau_alpha": 1.0, "zeta": 5.0},
        "initial": {"kind": "uniform", "state": {"p": 4.0, "alpha": 0.5, "u": 0.0, "w": 0.2}},
    }


def test_simulate_initial_snapshot_only(tmp_path):
    config = _write(tmp_path / "cfg.yaml", _relaxation_config(t_end=0.0))
    outdir = tmp_path / "out"
    assert main(["simulate", "--config", config, "--outdir", str(outdir)]) == EXIT_OK
    rows = _read_csv(outdir / main_shtc.SNAPSHOT_FILE)
    assert len(rows) == 20
    assert list(rows[0]) == ["t", "x", "alpha", "c", "rho", "u", "w", "p1", "p2", "E"]
    assert {float(r["t"]) for r in rows} == {0.0}
    assert float(rows[0]["w"]) == pytest.approx(0.2)
    assert len(_read_csv(outdir / main_shtc.DIAGNOSTICS_FILE)) == 1


def test_simulate_relaxation_dissipates_energy(tmp_path):
    config = _write(tmp_path / "cfg.yaml", _relaxation_config())
    outdir = tmp_path / "out"
    assert main(["simulate", "--config", config, "--outdir", str(outdir)]) == EXIT_OK
    diag = _read_csv(outdir / main_shtc.DIAGNOSTICS_FILE)
    assert [float(d["t"]) for d in diag] == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3])
    energy = [float(d["energy"]) for d in diag]
    assert all(b <= a for a, b in zip(energy, energy[1:]))
    assert float(diag[-1]["max_w"]) < 0.2
    assert len(_read_csv(outdir / main_shtc.SNAPSHOT_FILE)) == 20 * len(diag)


def test_simulate_step_failure_exits_nonzero(tmp_path):
    config = _write(tmp_path / "cfg.yaml", _relaxation_config(max_steps=1))
    assert main(["simulate", "--config", config, "--outdir", str(tmp_path / "out")]) == EXIT_FAILURE


def test_simulate_bad_config(tmp_path):
    data = _relaxation_config()
    data["time"]["cfl"] = 1.5
    config = _write(tmp_path / "cfg.yaml", data)
    assert main(["simulate", "--config", config, "--outdir", str(tmp_path / "out")]) == EXIT_USAGE


def test_verify_creates_the_report_directory(config_dir, tmp_path):
    out = tmp_path / "reports" / "nested" / "report.json"
    assert _verify(config_dir / "verify_canonical.yaml", out) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["passed"] is True


def test_unwritable_report_is_a_usage_error(config_dir, tmp_path):
    # the output path is an existing directory
    assert _verify(config_dir / "verify_canonical.yaml", tmp_path) == EXIT_USAGE


def test_unwritable_outdir_is_a_usage_error(tmp_path):
    config = _write(tmp_path / "cfg.yaml", _relaxation_config(t_end=0.0))
    blocker = tmp_path / "taken"
    blocker.write_text("", encoding="utf-8")
    assert main(["simulate", "--config", config, "--outdir", str(blocker)]) == EXIT_USAGE
