import json
import subprocess
import sys

import numpy as np
import pytest


def spex(*args, cwd=None, env=None):
    return subprocess.run(["spex", *args], capture_output=True, text=True,
                          cwd=cwd, env=env)


@pytest.fixture()
def gen_dataset(tmp_path):
    out = tmp_path / "pts.csv"
    res = spex("gen", "--kind", "three_gaussians", "--n", "60",
               "--seed", "3", "--out", str(out))
    assert res.returncode == 0, res.stderr
    return out, tmp_path / "pts.labels.csv"


def test_gen_deterministic(tmp_path):
    for name in ("a.csv", "b.csv"):
        res = spex("gen", "--kind", "two_moons", "--n", "30", "--noise", "0.05",
                   "--out", str(tmp_path / name))
        assert res.returncode == 0, res.stderr
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.labels.csv").exists()


def test_fit_predict_eval_pipeline(gen_dataset, tmp_path):
    pts, labels = gen_dataset
    tree = tmp_path / "tree.json"
    res = spex("fit", "--algo", "spex-clique", "--points", str(pts),
               "--labels", str(labels), "--leaves", "3", "--out", str(tree),
               "--ground-truth", str(labels))
    assert res.returncode == 0, res.stderr
    metrics = json.loads((tmp_path / "tree.metrics.json").read_text())
    assert set(metrics) == {"ARI", "AMI", "REF", "objective"}
    assert metrics["ARI"] > 0.8

    pred = tmp_path / "pred.csv"
    res = spex("predict", "--tree", str(tree), "--points", str(pts),
               "--out", str(pred))
    assert res.returncode == 0, res.stderr
    assert pred.read_text() == (tmp_path / "tree.assignments.csv").read_text()

    res = spex("eval", "--pred", str(pred), "--ground-truth", str(labels))
    assert res.returncode == 0, res.stderr
    out = json.loads(res.stdout)
    assert out["ARI"] == pytest.approx(metrics["ARI"])


def test_fit_byte_identical_outputs(gen_dataset, tmp_path):
    pts, labels = gen_dataset
    blobs = []
    for name in ("t1.json", "t2.json"):
        res = spex("fit", "--algo", "cart", "--points", str(pts),
                   "--labels", str(labels), "--out", str(tmp_path / name))
        assert res.returncode == 0, res.stderr
        blobs.append((tmp_path / name).read_bytes())
    assert blobs[0] == blobs[1]


def test_fit_with_kmeans_reference(gen_dataset, tmp_path):
    pts, _ = gen_dataset
    res = spex("fit", "--algo", "emn", "--points", str(pts),
               "--ref", "kmeans:3", "--out", str(tmp_path / "t.json"))
    assert res.returncode == 0, res.stderr
    metrics = json.loads((tmp_path / "t.metrics.json").read_text())
    assert metrics["REF"] > 0.8


def test_fit_spex_knn(gen_dataset, tmp_path):
    pts, labels = gen_dataset
    res = spex("fit", "--algo", "spex-knn", "--points", str(pts),
               "--knn", "5", "--leaves", "3", "--ground-truth", str(labels),
               "--out", str(tmp_path / "t.json"))
    assert res.returncode == 0, res.stderr
    metrics = json.loads((tmp_path / "t.metrics.json").read_text())
    assert metrics["ARI"] > 0.8


def test_validation_exit_codes(gen_dataset, tmp_path):
    pts, _ = gen_dataset
    res = spex("fit", "--algo", "emn", "--points", str(pts),
               "--out", str(tmp_path / "t.json"))
    assert res.returncode == 1
    assert "EMN requires a centroid-bearing reference" in res.stderr

    res = spex("fit", "--algo", "spex-knn", "--points", str(pts),
               "--leaves", "2", "--out", str(tmp_path / "t.json"))
    assert res.returncode == 1

    res = spex("eval", "--pred", str(pts))
    assert res.returncode == 1


def test_bad_threads_env(gen_dataset, tmp_path):
    import os

    pts, _ = gen_dataset
    env = dict(os.environ, SPEX_THREADS="banana")
    res = spex("gen", "--kind", "two_moons", "--n", "20",
               "--out", str(tmp_path / "x.csv"), env=env)
    assert res.returncode == 1
    env = dict(os.environ, SPEX_THREADS="0")
    res = spex("gen", "--kind", "two_moons", "--n", "20",
               "--out", str(tmp_path / "x.csv"), env=env)
    assert res.returncode == 0


def test_verify_pass_and_fail_exit(tmp_path):
    res = spex("verify", "--suite", "equivalence", "--trials", "3",
               "--out", str(tmp_path / "r.json"))
    assert res.returncode == 0, res.stderr
    assert "equivalence: PASS (3/3)" in res.stdout
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc[0]["ok"] is True
