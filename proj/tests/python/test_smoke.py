import json
import os
import subprocess

import numpy as np
import pytest

import ssmprune as sp


def energy_layer(name, energies):
    layer = sp.DiagonalLayer()
    layer.name = name
    n = len(energies)
    layer.lam = np.zeros(n, dtype=complex)
    layer.B = np.ones((n, 1), dtype=complex)
    layer.C = np.sqrt(np.asarray(energies, dtype=complex)).reshape(1, n)
    return layer


def hand_trace_stack():
    stack = sp.ModelStack()
    stack.layers = [energy_layer("L1", [8, 1]), energy_layer("L2", [4, 4])]
    return stack


def test_mode_energy_scalar():
    layer = sp.DiagonalLayer()
    layer.name = "s"
    layer.lam = np.array([0.5 + 0j])
    layer.B = np.array([[1 + 0j]])
    layer.C = np.array([[1 + 0j]])
    assert sp.mode_energy(layer, 0).E == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert sp.layer_energy_exact(layer) == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_impulse_matches_numpy():
    layer = sp.synth(seed=3, layers=1, modes=[5], channels=2).layers[0]
    slices = sp.impulse_response(layer, 6)
    for t, H in enumerate(slices):
        want = layer.C @ np.diag(layer.lam**t) @ layer.B
        np.testing.assert_allclose(H, want, atol=1e-12)


def test_hand_trace_selection():
    stack = hand_trace_stack()
    table = sp.score_table(stack)
    np.testing.assert_allclose(table.layers[1].normalized, [1.0, 0.5], rtol=1e-9)
    decision = sp.select(table, ratio=0.25)
    assert decision.tau == pytest.approx(0.5)
    assert [d.kept for d in decision.layers] == [[0], [0, 1]]
    reduced = sp.materialize(decision, stack)
    assert [layer.n for layer in reduced.layers] == [1, 2]


def test_certificate_tightness():
    layer = sp.DiagonalLayer()
    layer.name = "t"
    layer.lam = np.array([0.5 + 0j])
    layer.B = np.array([[1 + 0j]])
    layer.C = np.array([[1 + 0j]])
    stack = sp.ModelStack()
    stack.layers = [layer]
    decision = sp.select(sp.score_table(stack), ratio=1.0)
    (cert,) = sp.certify(stack, decision)
    assert sp.kappa(0.5) == pytest.approx(np.sqrt(3.0))
    assert cert.bound == pytest.approx(2.0, rel=1e-12)
    assert cert.empirical_hinf == pytest.approx(2.0, rel=1e-12)


def test_distortion_and_sweep():
    stack = sp.synth(seed=1, layers=2, modes=[6])
    decision = sp.select(sp.score_table(stack), ratio=0.5)
    rows = sp.distortion(stack, decision, grid_points=256)
    assert all(r.exact_h2 >= 0 for r in rows)
    sweep = sp.sweep(stack, sp.Method.aire, sp.Scope.prefix, [0.0, 0.5])
    assert sweep[0].exact_h2 == 0.0
    assert sweep[1].exact_h2 >= sweep[0].exact_h2


def test_save_load_round_trip(tmp_path):
    stack = sp.synth(seed=4, layers=2, conjugate_pairs=True, bidirectional=True)
    sp.save_model(stack, tmp_path / "m")
    back = sp.load_model(tmp_path / "m")
    for a, b in zip(stack.layers, back.layers):
        assert np.array_equal(a.lam, b.lam)
        assert np.array_equal(a.B, b.B)
        assert np.array_equal(a.C, b.C)
        assert np.array_equal(a.C_bwd, b.C_bwd)
        assert b.conjugate_pairs


def test_errors_map_to_python_exceptions(tmp_path):
    layer = energy_layer("bad", [1.0])
    layer.lam = np.array([1.5 + 0j])
    stack = sp.ModelStack()
    stack.layers = [layer]
    with pytest.raises(ValueError):
        sp.score_table(stack)
    with pytest.raises(ValueError):
        sp.score_table(hand_trace_stack(), sp.Method.random, sp.Scope.prefix)
    with pytest.raises(OSError):
        sp.load_model(tmp_path / "missing")


def test_run_cli_in_process(tmp_path):
    code, _, _ = sp.run_cli(["synth", "--out", str(tmp_path / "m"), "--seed", "2"])
    assert code == 0
    code, out, _ = sp.run_cli(["score", "--model", str(tmp_path / "m")])
    assert code == 0
    assert json.loads(out)["kind"] == "scores"
    code, _, err = sp.run_cli(["select", "--model", str(tmp_path / "m"), "--ratio", "2"])
    assert code == 2
    assert err


@pytest.mark.skipif("SSMPRUNE_CLI" not in os.environ, reason="CLI binary path not provided")
def test_cli_binary(tmp_path):
    cli = os.environ["SSMPRUNE_CLI"]
    subprocess.run([cli, "synth", "--out", str(tmp_path / "m")], check=True)
    out = subprocess.run([cli, "score", "--model", str(tmp_path / "m")], check=True,
                         capture_output=True, text=True).stdout
    assert json.loads(out)["method"] == "aire"
    assert subprocess.run([cli, "score", "--model", str(tmp_path / "nope")],
                          capture_output=True).returncode == 3
