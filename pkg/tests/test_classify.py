import json

import numpy as np
import pytest
import scipy.stats
from sklearn.metrics import balanced_accuracy_score, cohen_kappa_score, f1_score

from qsdlearn.classify import (
    TrainedModel,
    confusion_matrix,
    dumps_model,
    evaluate,
    loads_model,
    metrics_from_confusion,
    pearson,
    predict,
    predict_many,
    train,
)
from qsdlearn.discrimination import Ensemble, helstrom, pgm
from qsdlearn.encoding import Dataset, amplitude_encode
from qsdlearn.exceptions import DataError, DegenerateClassError, ShapeError
from qsdlearn.sampling import random_dataset

from oracles import balanced_accuracy_loops

TWO_POINTS = Dataset(np.array([[0.0], [1.0]]), [1, 2], 2)


def test_train_helstrom_two_points():
    model = train(TWO_POINTS, "helstrom", 1)
    expected = helstrom(amplitude_encode([0.0]), amplitude_encode([1.0])).bound
    assert model.bound == pytest.approx(expected, abs=1e-15)
    assert model.priors == (0.5, 0.5)
    assert model.dim == 2 and model.num_classes == 2


def test_train_pgm_is_complete():
    model = train(TWO_POINTS, "pgm", 1)
    assert np.max(np.abs(sum(model.measurement.effects) - np.eye(2))) < 1e-9
    assert model.full_rank_sigma


def test_train_helstrom_rejects_multiclass():
    ds = Dataset(np.array([[0.0], [1.0], [2.0]]), [1, 2, 3], 3)
    with pytest.raises(DegenerateClassError):
        train(ds, "helstrom")
    assert train(ds, "pgm").num_classes == 3


def test_train_unknown_kind():
    with pytest.raises(ValueError):
        train(TWO_POINTS, "svm")


def test_predict_training_point_of_orthogonal_setup():
    # [0] encodes to e2, and no amplitude encoding is orthogonal to e2, so use
    # two-feature points whose encodings are orthogonal: [1, 0] -> (1,0,1)/sqrt2, [-1, 0] -> (-1,0,1)/sqrt2
    ds = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0]]), [1, 2], 2)
    for kind in ("helstrom", "pgm"):
        model = train(ds, kind)
        p = predict(model, [1.0, 0.0])
        assert p.label == 1
        assert p.probabilities[0] == pytest.approx(1.0, abs=1e-12)
        assert predict(model, [-1.0, 0.0]).label == 2


def test_predict_helstrom_tie_goes_to_class_one():
    # encodings of [0] and [1] sit at 90 and 45 degrees; [sqrt2 - 1] lies on the bisector
    model = train(TWO_POINTS, "helstrom")
    p = predict(model, [np.sqrt(2) - 1])
    assert abs(p.scores[0] - p.scores[1]) < 1e-12
    assert p.label == 1


def test_predict_pgm_diagonal_brute_force():
    # diagonal centroids: F_i = p_i c_i / sigma entrywise, so score_i(e_k) = p_i^2 c_i[k] / sigma[k]
    cents = [np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.5, 0.3]), np.diag([0.1, 0.1, 0.8])]
    priors = (0.5, 0.3, 0.2)
    M = pgm(Ensemble(priors, cents))
    model = TrainedModel("pgm", 1, 2, priors, tuple(cents), M, 0.0)
    sigma = sum(p * c for p, c in zip(priors, cents)).diagonal().real
    for k in range(3):
        basis = np.zeros(3)
        basis[k] = 1.0
        probs = M.probabilities(np.diag(basis))
        brute = [priors[i] * priors[i] * cents[i][k, k].real / sigma[k] for i in range(3)]
        np.testing.assert_allclose(priors * probs, brute, atol=1e-12)
    # [0, 0] encodes to the last basis state
    p = predict(model, [0.0, 0.0])
    brute = [priors[i] ** 2 * cents[i][2, 2].real / sigma[2] for i in range(3)]
    np.testing.assert_allclose(p.scores, brute, atol=1e-12)
    assert p.label == int(np.argmax(brute)) + 1


def test_predict_dimension_mismatch():
    model = train(TWO_POINTS)
    with pytest.raises(ShapeError):
        predict(model, [1.0, 2.0])


def test_prediction_invariants(rng):
    for _ in range(20):
        ds = random_dataset(rng, num_classes=int(rng.integers(2, 4)))
        kind = "helstrom" if ds.num_classes == 2 and rng.integers(2) else "pgm"
        model = train(ds, kind, int(rng.integers(1, 3)))
        for x in rng.uniform(-2, 2, size=(10, ds.num_features)):
            p = predict(model, x)
            assert abs(p.probabilities.sum() - 1) < 1e-9
            assert np.all(p.scores >= -1e-9)
            assert p.label == int(np.flatnonzero(p.scores >= p.scores.max() - 1e-12)[0]) + 1
            if kind == "helstrom":
                assert abs(p.scores.sum() - 1) < 1e-9
            q = predict(model, x)
            assert q.label == p.label and q.scores.tobytes() == p.scores.tobytes()


def test_helstrom_bound_grows_with_copies(rng):
    for _ in range(20):
        ds = random_dataset(rng, max_features=2, max_points=12)
        bounds = [train(ds, "helstrom", n).bound for n in (1, 2, 3)]
        assert all(b2 >= b1 - 1e-9 for b1, b2 in zip(bounds, bounds[1:]))


# metrics

def test_metrics_perfect():
    rep = metrics_from_confusion([[3, 0], [0, 4]])
    assert (rep.balanced_accuracy, rep.f1_macro, rep.cohen_kappa) == (1.0, 1.0, 1.0)


def test_metrics_one_class_predictions():
    rep = metrics_from_confusion([[5, 0], [5, 0]])
    assert rep.balanced_accuracy == 0.5
    assert rep.cohen_kappa == 0.0


def test_metrics_hand_example():
    # p_o = 2/3, p_e = (3*3 + 3*3) / 36 = 1/2
    rep = metrics_from_confusion([[2, 1], [1, 2]])
    assert rep.balanced_accuracy == pytest.approx(2 / 3, abs=1e-15)
    assert rep.cohen_kappa == pytest.approx(1 / 3, abs=1e-15)
    assert rep.f1_macro == pytest.approx(2 / 3, abs=1e-15)


def test_metrics_kappa_degenerate_chance():
    assert metrics_from_confusion([[4, 0], [0, 0]]).cohen_kappa == 0.0


def test_metrics_absent_class_contributes_zero_f1():
    rep = metrics_from_confusion([[2, 0, 0], [0, 2, 0], [0, 0, 0]])
    assert rep.f1_macro == pytest.approx(2 / 3)
    assert rep.balanced_accuracy == 1.0


def test_metrics_empty():
    with pytest.raises(DataError):
        metrics_from_confusion(np.zeros((2, 2), dtype=int))


def test_metrics_agree_with_sklearn(rng):
    for _ in range(100):
        ell = int(rng.integers(2, 5))
        y_true = np.concatenate([np.arange(1, ell + 1), rng.integers(1, ell + 1, size=20)])
        y_pred = rng.integers(1, ell + 1, size=y_true.size)
        rep = metrics_from_confusion(confusion_matrix(y_true, y_pred, ell))
        labels = list(range(1, ell + 1))
        assert rep.confusion.sum(axis=1).tolist() == np.bincount(y_true, minlength=ell + 1)[1:].tolist()
        assert rep.balanced_accuracy == pytest.approx(balanced_accuracy_score(y_true, y_pred), abs=1e-12)
        assert rep.balanced_accuracy == pytest.approx(
            balanced_accuracy_loops(list(y_true), list(y_pred), labels), abs=1e-12)
        assert rep.f1_macro == pytest.approx(
            f1_score(y_true, y_pred, labels=labels, average="macro", zero_division=0), abs=1e-12)
        assert rep.cohen_kappa == pytest.approx(cohen_kappa_score(y_true, y_pred), abs=1e-12)
        assert 0 <= rep.balanced_accuracy <= 1 and 0 <= rep.f1_macro <= 1
        assert -1 <= rep.cohen_kappa <= 1


def test_evaluate_end_to_end(rng):
    ds = random_dataset(rng, num_classes=3, max_points=30)
    model = train(ds, "pgm", 2)
    rep = evaluate(model, ds)
    y_pred = predict_many(model, ds.X)
    assert rep.confusion.tolist() == confusion_matrix(ds.y, y_pred, 3).tolist()


def test_evaluate_class_mismatch():
    model = train(TWO_POINTS)
    ds3 = Dataset(np.array([[0.0], [1.0], [2.0]]), [1, 2, 3], 3)
    with pytest.raises(ShapeError):
        evaluate(model, ds3)


# pearson

def test_pearson_examples():
    xs = np.array([1.0, 2.0, 5.0, 7.0])
    assert pearson(xs, 2 * xs + 1) == pytest.approx(1.0, abs=1e-15)
    assert pearson(xs, -xs) == pytest.approx(-1.0, abs=1e-15)
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)


def test_pearson_matches_scipy(rng):
    for _ in range(50):
        x, y = rng.standard_normal((2, 12))
        assert pearson(x, y) == pytest.approx(scipy.stats.pearsonr(x, y)[0], abs=1e-12)


def test_pearson_errors():
    with pytest.raises(ZeroDivisionError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1], [2])


# persistence

def test_model_json_round_trip(rng):
    ds = random_dataset(rng, num_classes=3)
    model = train(ds, "pgm", 2)
    text = dumps_model(model)
    doc = json.loads(text)
    assert doc["version"] == "qsd-model/1"
    assert doc["effects"][0]["dims"] == [model.dim, model.dim]
    assert len(doc["effects"][0]["data"][0]) == 2
    back = loads_model(text)
    for A, B in zip(back.measurement.effects, model.measurement.effects):
        np.testing.assert_array_equal(A, B)
    for x in rng.uniform(-1, 1, size=(5, ds.num_features)):
        assert predict(back, x).scores.tobytes() == predict(model, x).scores.tobytes()


def test_model_json_rejects_unknown_version():
    doc = json.loads(dumps_model(train(TWO_POINTS)))
    doc["version"] = "qsd-model/0"
    with pytest.raises(DataError):
        loads_model(json.dumps(doc))
