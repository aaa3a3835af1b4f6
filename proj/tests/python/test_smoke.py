import math

import numpy as np
import pytest

import promptadherence as pa


def tone(hz, seconds=1.0, rate=16000, amp=0.3):
    t = np.arange(int(seconds * rate)) / rate
    return (amp * np.sin(2 * np.pi * hz * t)).astype(np.float32)


def test_backend_dims():
    assert pa.known_backend_dim("builtin-logmel") == 192
    assert pa.known_backend_dim("vggish") == 128
    assert pa.known_backend_dim("openl3") == 6144
    assert pa.known_backend_dim("clap0") == 512
    assert pa.known_backend_dim("clap1") == 512
    assert pa.known_backend_dim("clap2") == 128
    assert pa.known_backend_dim("nope") is None


def test_aemb_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(7, 128)).astype(np.float32).astype(np.float64)
    path = tmp_path / "x.aemb"
    pa.write_embeddings(str(path), x, "clap2")
    y, backend = pa.read_embeddings(str(path))
    assert backend == "clap2"
    np.testing.assert_array_equal(x, y)
    raw = path.read_bytes()
    assert raw[:4] == b"AEMB"
    assert int.from_bytes(raw[4:8], "little") == 1
    path.write_bytes(raw + b"x")
    with pytest.raises(pa.DataError):
        pa.read_embeddings(str(path))


def test_embed_and_metrics():
    v = pa.embed(tone(440.0))
    assert v.shape == (192,)
    assert np.all(np.isfinite(v))
    rng = np.random.default_rng(1)
    a = rng.normal(size=(50, 4))
    assert pa.frechet_distance(a, a) == pytest.approx(0.0, abs=1e-9)
    assert pa.mmd2(a, a) == 0.0
    b = a.copy()
    b[:, 0] += 2.0
    assert pa.frechet_distance(a, b) == pytest.approx(4.0, abs=1e-8)


def test_adherence_score():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(40, 3))
    xnm = x + 1.0
    s = pa.adherence_score("fad", x, xnm, x)
    assert s["score"] == 1.0
    assert pa.adherence_value(1.0, 3.0) == 0.5
    with pytest.raises(pa.MathDomainError):
        pa.adherence_value(0.0, 0.0)
    with pytest.raises(pa.ConfigError):
        pa.adherence_score("kid", x, xnm, x)


def test_derangement_and_projection():
    p = pa.random_derangement(10, 3)
    assert sorted(p) == list(range(10))
    assert all(p[i] != i for i in range(10))
    assert pa.random_derangement(10, 3) == p
    rng = np.random.default_rng(3)
    x = rng.normal(size=(200, 6)) @ rng.normal(size=(6, 6))
    fit = pa.fit_projection(x, 3)
    y = fit["transformed"]
    assert y.shape == (200, 3)
    np.testing.assert_allclose(np.cov(y, rowvar=False), np.eye(3), atol=1e-4)


def test_dsp_and_stats():
    x = tone(440.0, 1.0)
    assert len(pa.pitch_shift(x, 12.0)) == len(x)
    imp = np.zeros(16000, dtype=np.float32)
    imp[0] = 1.0
    assert np.argmax(pa.time_shift(imp, 0.5)) == 8000
    p, n_eff, n_pos = pa.sign_test([1.0] * 5)
    assert p == 0.03125 and n_eff == 5 and n_pos == 5
    assert pa.cles([1.0, 3.0], [2.0]) == 0.5
    assert pa.significance_stars(0.03125) == 1


def test_run_experiment_counting():
    cfg = {
        "collections": [
            {"name": "a", "synthetic": {"n_projects": 4, "seconds": 10, "seed": 1}},
        ],
        "n_windows": 8,
        "metrics": ["fad"],
        "fusions": ["mix"],
        "projections": ["np"],
        "seed": 1,
        "n_repeats": 2,
    }
    report, csv = pa.run_experiment(cfg, 2)
    assert report["experiment"] == 2
    assert len(report["records"]) == 2
    assert csv.count("\n") == 3
    for r in report["records"]:
        assert -1.0 <= r["score_cand"] <= 1.0
        assert math.isfinite(r["score_pert"])
    with pytest.raises(pa.ConfigError):
        pa.run_experiment({"collections": []}, 2)
