import json
from pathlib import Path

import numpy as np
import pytest

from qsdlearn.exceptions import DataError, DegenerateClassError, NumericalIntegrityError
from qsdlearn.experiments import (
    ExperimentConfig,
    bound_accuracy_study,
    generate_synthetic,
    ingest_csv,
    least_squares_line,
    minmax_apply,
    minmax_fit,
    run_experiment,
    stratified_folds,
    stratified_split,
    synthetic_study_configs,
    write_atomic,
)
import qsdlearn.experiments as experiments


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_ingest_basic(tmp_path):
    p = write(tmp_path, "a.csv", "0.1,0.2,a\n0.3,0.4,b\n0.5,0.6,a\n0.7,0.8,b\n")
    ds = ingest_csv(p)
    assert (ds.num_points, ds.num_features, ds.num_classes) == (4, 2, 2)
    assert ds.y.tolist() == [1, 2, 1, 2]
    assert ds.class_names == ("a", "b")


def test_ingest_named_label_column(tmp_path):
    p = write(tmp_path, "h.csv", "f1,label,f2\n1,x,2\n3,y,4\n")
    ds = ingest_csv(p, label_column="label")
    np.testing.assert_array_equal(ds.X, [[1, 2], [3, 4]])
    assert ds.metadata["feature_names"] == ["f1", "f2"]
    assert ds.metadata["label_mapping"] == {"x": 1, "y": 2}


def test_ingest_header_label_last(tmp_path):
    p = write(tmp_path, "h.csv", "f1,f2,label\n1,2,1\n3,4,0\n")
    ds = ingest_csv(p, label_column="label")
    assert ds.y.tolist() == [1, 2] and ds.class_names == ("1", "0")


def test_ingest_label_by_index(tmp_path):
    p = write(tmp_path, "i.csv", "b,1,2\na,3,4\n")
    ds = ingest_csv(p, label_column=0)
    np.testing.assert_array_equal(ds.X, [[1, 2], [3, 4]])


def test_ingest_errors(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(tmp_path / "missing.csv")
    with pytest.raises(DegenerateClassError):
        ingest_csv(write(tmp_path, "one.csv", "1,2,a\n3,4,a\n"))
    with pytest.raises(DataError, match="row 2, column 2"):
        ingest_csv(write(tmp_path, "bad.csv", "1,2,a\n3,zz,b\n"))
    with pytest.raises(DataError, match="row 2"):
        ingest_csv(write(tmp_path, "short.csv", "1,2,a\n3,b\n"))
    with pytest.raises(DataError, match="row 3, column 1"):
        ingest_csv(write(tmp_path, "empty_cell.csv", "x,y,c\n1,2,a\n,4,b\n"))
    with pytest.raises(DataError):
        ingest_csv(write(tmp_path, "nan.csv", "1,nan,a\n3,4,b\n"))


def test_generate_blobs_counts():
    ds = generate_synthetic("blobs", {"num_classes": 2, "points_per_class": 50,
                                      "centers": [[0, 0], [5, 5]], "spread": 0.5}, seed=7)
    assert (ds.num_points, ds.num_features) == (100, 2)


def test_generate_deterministic():
    a = generate_synthetic("diagonal2x2", {}, seed=11)
    b = generate_synthetic("diagonal2x2", {}, seed=11)
    assert a.X.tobytes() == b.X.tobytes()
    assert np.all((a.X > 0) & (a.X < 1))
    assert a.num_points == 4 and a.num_features == 1


def test_generate_three_blobs_pgm_only():
    ds = generate_synthetic("blobs", {"num_classes": 3}, seed=2)
    assert ds.num_classes == 3
    cfg = ExperimentConfig(generator={"kind": "blobs", "num_classes": 3}, classifier="helstrom")
    with pytest.raises(DegenerateClassError):
        run_experiment(cfg)


def test_generate_invalid():
    with pytest.raises(DataError):
        generate_synthetic("moons")
    with pytest.raises(DataError):
        generate_synthetic("blobs", {"num_classes": 3, "centers": [[0, 0]]})


def test_stratified_split_proportions():
    ds = generate_synthetic("blobs", {"points_per_class": 50}, seed=7)
    tr, te = stratified_split(ds, 0.3, seed=1)
    assert len(te) == 30 and len(tr) == 70
    assert np.bincount(ds.y[te]).tolist() == [0, 15, 15]
    assert not set(tr) & set(te)
    tr2, te2 = stratified_split(ds, 0.3, seed=1)
    assert te.tolist() == te2.tolist()


def test_stratified_split_tiny_classes():
    ds = generate_synthetic("diagonal2x2", {"points_per_class": 2}, seed=0)
    tr, te = stratified_split(ds, 0.3, seed=0)
    assert np.bincount(ds.y[tr]).tolist() == [0, 1, 1]


def test_stratified_folds_cover_once():
    ds = generate_synthetic("blobs", {"points_per_class": 10}, seed=0)
    folds = stratified_folds(ds, 5, seed=0)
    seen = np.concatenate([te for _, te in folds])
    assert sorted(seen.tolist()) == list(range(20))
    for tr, te in folds:
        assert set(ds.y[tr]) == {1, 2}


def test_minmax():
    X = np.array([[0.0, 5.0], [2.0, 5.0]])
    lo, hi = minmax_fit(X)
    np.testing.assert_array_equal(minmax_apply(X, lo, hi), [[0, 0], [1, 0]])


def test_write_atomic_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    write_atomic(target, "old\n")

    def boom(*args):
        raise OSError("disk full")

    monkeypatch.setattr(experiments.os, "replace", boom)
    with pytest.raises(OSError):
        write_atomic(target, "new\n")
    assert target.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


BLOBS = {"kind": "blobs", "points_per_class": 50, "centers": [[0, 0], [5, 5]], "spread": 0.5}


def test_run_experiment_helstrom_sweep(tmp_path):
    out = tmp_path / "r.json"
    res = run_experiment(ExperimentConfig(generator=BLOBS, copies_min=1, copies_max=3,
                                          seed=7, output=str(out)))
    assert [r["n"] for r in res.records] == [1, 2, 3]
    hb = [r["helstrom_bound"] for r in res.records]
    assert all(b >= a - 1e-9 for a, b in zip(hb, hb[1:]))
    doc = json.loads(out.read_text())
    assert doc["schema"] == "qsd-result/1"
    assert doc["metadata"]["config"]["generator"] == BLOBS
    assert "wall_time_ms" not in out.read_text()
    timing = json.loads(Path(str(out) + ".timing.json").read_text())
    assert set(timing["wall_time_ms"]) == {"1", "2", "3"}


def test_run_experiment_is_byte_reproducible(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        run_experiment(ExperimentConfig(generator=BLOBS, copies_max=2, seed=5, output=str(out)))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_run_experiment_pgm_three_classes_csv(tmp_path):
    out = tmp_path / "r.csv"
    gen = {"kind": "blobs", "num_classes": 3, "points_per_class": 20}
    res = run_experiment(ExperimentConfig(generator=gen, classifier="pgm", copies_max=2,
                                          output=str(out), format="csv"))
    assert all("pgm_bound" in r for r in res.records)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1] == "n,metric,value"
    assert [l.split(",")[1] for l in lines[2:6]] == [
        "pgm_bound", "balanced_accuracy", "f1_macro", "cohen_kappa"]
    assert len(lines) == 2 + 2 * 4


def test_run_experiment_truncates_at_capacity():
    res = run_experiment(ExperimentConfig(generator=BLOBS, copies_max=5, max_dim=30))
    # (2 + 1)^3 = 27 fits, 81 does not
    assert [r["n"] for r in res.records] == [1, 2, 3]
    assert res.truncation["truncated_at"] == 4


def test_run_experiment_folds_and_scaling():
    res = run_experiment(ExperimentConfig(generator=BLOBS, folds=4, test_fraction=None,
                                          scaling="minmax", copies_max=2))
    assert len(res.records) == 2
    assert res.records[0]["balanced_accuracy"] > 0.9


def test_run_experiment_integrity_violation(monkeypatch):
    real_train = experiments.train

    def sabotaged(ds, kind, n, max_dim):
        model = real_train(ds, kind, n, max_dim)
        object.__setattr__(model, "bound", model.bound - 0.1 * n)
        return model

    monkeypatch.setattr(experiments, "train", sabotaged)
    with pytest.raises(NumericalIntegrityError):
        run_experiment(ExperimentConfig(generator=BLOBS, copies_max=2))


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(copies_min=2, copies_max=1, generator=BLOBS).validate()
    with pytest.raises(ValueError):
        ExperimentConfig().validate()


def test_least_squares_line():
    line = least_squares_line([0, 1, 2], [1, 3, 5])
    assert line["slope"] == pytest.approx(2) and line["intercept"] == pytest.approx(1)
    assert line["r2"] == pytest.approx(1)


def test_study_on_synthetic_suite():
    report = bound_accuracy_study(synthetic_study_configs(10, seed=0))
    assert len(report["rows"]) == 10
    assert -1 <= report["pearson"] <= 1
    assert set(report["line"]) == {"slope", "intercept", "r2"}


def test_study_zero_variance_duplicates():
    cfg = ExperimentConfig(generator=BLOBS, seed=1)
    report = bound_accuracy_study([cfg, cfg, cfg])
    assert report["pearson"] is None and report["line"] is None
    assert all(r["balanced_accuracy"] == 1.0 for r in report["rows"])


def test_study_needs_three():
    with pytest.raises(ValueError):
        bound_accuracy_study([ExperimentConfig(generator=BLOBS)] * 2)
