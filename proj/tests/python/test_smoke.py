import json
import math
import os
import subprocess
import sys
import tempfile

import numpy as np
import pytest

import quditls as q


def test_gate_matrix():
    g = q.gate_G(2, math.pi / 2)
    expected = np.diag([1, 1j, 1j, 1])
    assert np.allclose(g, expected, atol=1e-12)

    # periodicity
    assert np.allclose(q.gate_G(3, 1.2), q.gate_G(3, 1.2 + 2 * math.pi), atol=1e-12)


def test_preparation_equal_superposition():
    for d in (2, 3, 4, 5):
        psi = q.preparation(d) @ np.eye(d * d)[:, 0]
        assert np.allclose(np.abs(psi), 1.0 / d, atol=1e-10)


def test_entangling_phase_and_targets():
    ep = q.entangling_phase(3)
    assert abs(ep["theta"] - 2 * math.pi / 3) < 1e-5
    assert ep["fidelity"] > 1 - 1e-9

    lam = q.target_state(5)
    assert np.allclose(lam, [0.6, 0.4, 0.4, 0.4, 0.4])


def test_thresholds_and_concurrence():
    assert q.schmidt_threshold(3, 2) == pytest.approx(2 / 3)
    assert q.certify_schmidt_number(0.978, 3) == 3
    assert q.max_concurrence(4) == pytest.approx(1.2247, abs=1e-4)
    assert q.eof_lower_bound(1.08, 5) == pytest.approx(1.262, abs=1e-3)

    psi = np.zeros(9, dtype=complex)
    for j in range(3):
        psi[j * 3 + j] = 1 / math.sqrt(3)
    assert q.concurrence_pure(psi, 3) == pytest.approx(math.sqrt(4 / 3), abs=1e-9)


def test_solver_and_propagator():
    p = q.solve_gate_params(2, math.pi / 2, n_max=8)
    assert q.pulse_phase(p, 0, 1, p.t_g) == pytest.approx(math.pi / 4, abs=1e-10)
    u = q.composed_gate(p, 2)
    ideal = np.kron(q.gate_G(2, math.pi / 2), np.eye(p.n_max + 1))
    # equal up to a global phase
    tr = np.trace(ideal.conj().T @ u)
    assert np.max(np.abs(u - (tr / abs(tr)) * ideal)) < 1e-7


def test_spacing_scan():
    com, br = q.spacing_scan(math.pi)
    assert com <= 1e-10 and br > 0
    com, br = q.spacing_scan(0.0)
    assert br <= 1e-10 and com > 0


def test_decay_fit():
    ns = list(range(1, 10))
    fs = [0.98 * 0.99**n for n in ns]
    fit = q.decay_fit(ns, fs)
    assert fit["per_gate_fidelity"] == pytest.approx(0.99, abs=1e-6)
    assert fit["spam_amplitude"] == pytest.approx(0.98, abs=1e-6)


def test_small_noisy_simulation():
    res = q.simulate_noisy_gate(2, n_gates=3, samples=4, n_max=10, seed=7)
    assert res["gate_counts"] == [1, 2, 3]
    assert 0.9 < res["fidelity"][0] <= 1.0
    rho = np.asarray(res["rho_spin_1"])
    assert rho.shape == (4, 4)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-8)
    rep = q.full_report(rho, 2)
    assert rep["schmidt_number_certified"] == 2


def test_run_certify_roundtrip(tmp_path):
    (tmp_path / "in.json").write_text(
        json.dumps(
            {"dimension": 3, "fidelity": [0.978, 0.012], "concurrence": [1.12, 0.02]}
        )
    )
    rep = json.loads(
        q.run(
            "certify",
            f"[run]\ncertify_input = {tmp_path}/in.json\n",
            str(tmp_path),
        )
    )
    assert rep["report"]["schmidt_number_certified"] == 3
    assert rep["report"]["fidelity_threshold"] == pytest.approx(2 / 3)


def test_run_solve_params(tmp_path):
    rep = json.loads(q.run("solve-params", "", str(tmp_path)))
    assert rep["schema"] == 1
    assert rep["composed_gate_defect"] < 1e-7
    assert (tmp_path / "params.json").exists()


@pytest.fixture()
def cli():
    path = os.environ.get("QUDITLS_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("QUDITLS_CLI not set")
    return path


def test_cli_exit_codes(cli, tmp_path):
    # config parse error -> exit 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[run]\ndimension = 9\n")
    r = subprocess.run(
        [cli, "solve-params", "--config", str(bad)], capture_output=True, text=True
    )
    assert r.returncode == 2
    assert json.loads(r.stderr)["error"]["code"] == 2

    # missing certify input -> exit 5
    r = subprocess.run(
        [cli, "certify", "--input", str(tmp_path / "nope.json"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 5

    # good run -> exit 0 and a parseable report
    r = subprocess.run(
        [cli, "solve-params", "--dimension", "3", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0
    rep = json.loads((tmp_path / "params.json").read_text())
    assert rep["theta"] == pytest.approx(2 * math.pi / 3, abs=1e-5)


def test_cli_deterministic_reports(cli, tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(
        "[run]\nsequence = decay\ngates_max = 3\nshots = 100\nseed = 11\n"
        "[noise]\nsamples = 4\nn_max = 8\nthreads = 2\n"
    )
    od = tmp_path / "rep"
    outs = []
    for _ in range(2):
        r = subprocess.run(
            [cli, "simulate", "--config", str(cfg), "--out", str(od)],
            capture_output=True,
            text=True,
        )
        assert r.returncode == 0, r.stderr
        outs.append((od / "simulate.json").read_bytes())
    assert outs[0] == outs[1]
