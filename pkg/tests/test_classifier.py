import math

import numpy as np
import pytest

from corpusfilter.classifier import (
    LabeledExample,
    LinearClassifier,
    TrainConfig,
    binarize_fwe_annotations,
    evaluate,
    load_classifier,
    loss_and_gradient,
    save_classifier,
    score,
    score_batch,
    train_logistic,
)
from corpusfilter.errors import (
    DimensionMismatchError,
    ScoreOutOfRangeError,
    SingleClassDataError,
)

from conftest import gaussian_examples


def zero_clf(dim):
    return LinearClassifier(w=np.zeros(dim), b=0.0, dim=dim, normalize_inputs=False)


def finite_difference_grad(w, b, data, lam, h=1e-5):
    """Central finite differences on the loss; independent oracle."""

    def loss_at(wv, bv):
        clf = LinearClassifier(w=wv, b=bv, dim=len(wv), normalize_inputs=False)
        return loss_and_gradient(clf, data, lam)[0]

    gw = np.zeros_like(w)
    for i in range(len(w)):
        e = np.zeros_like(w)
        e[i] = h
        gw[i] = (loss_at(w + e, b) - loss_at(w - e, b)) / (2 * h)
    gb = (loss_at(w, b + h) - loss_at(w, b - h)) / (2 * h)
    return gw, gb


def test_loss_at_origin_is_ln2():
    data = gaussian_examples(n=50, seed=1)
    loss, _, _ = loss_and_gradient(zero_clf(2), data, 0.0)
    assert abs(loss - math.log(2)) < 1e-12


def test_hand_gradient_single_example():
    data = [LabeledExample(x=np.array([1.0, 0.0]), y=1)]
    loss, gw, gb = loss_and_gradient(zero_clf(2), data, 0.0)
    assert np.allclose(gw, [-0.5, 0.0])
    assert abs(gb + 0.5) < 1e-12
    assert abs(loss - math.log(2)) < 1e-12


@pytest.mark.parametrize("trial", range(10))
def test_gradient_matches_finite_differences(trial):
    rng = np.random.default_rng(trial)
    dim = int(rng.integers(2, 8))
    n = int(rng.integers(3, 30))
    lam = float(rng.choice([0.0, 1e-4, 1e-2, 0.5]))
    data = [
        LabeledExample(x=rng.normal(size=dim), y=int(rng.integers(2))) for _ in range(n)
    ]
    w = rng.normal(size=dim)
    b = float(rng.normal())
    clf = LinearClassifier(w=w, b=b, dim=dim, normalize_inputs=False)
    _, gw, gb = loss_and_gradient(clf, data, lam)
    fw, fb = finite_difference_grad(w, b, data, lam)
    scale = max(np.max(np.abs(fw)), abs(fb), 1e-8)
    assert np.max(np.abs(gw - fw)) / scale < 1e-4
    assert abs(gb - fb) / scale < 1e-4


def test_train_separable_blobs():
    data = gaussian_examples(n=200, separation=4.0, seed=0)
    clf = train_logistic(data, TrainConfig(seed=0))
    assert evaluate(clf, data)["accuracy"] >= 0.95


def test_train_single_class_error():
    data = [LabeledExample(x=np.array([1.0, 2.0]), y=1) for _ in range(10)]
    with pytest.raises(SingleClassDataError):
        train_logistic(data, TrainConfig())


def test_train_deterministic():
    data = gaussian_examples(n=100, seed=2)
    a = train_logistic(data, TrainConfig(seed=3))
    b = train_logistic(data, TrainConfig(seed=3))
    assert np.array_equal(a.w, b.w) and a.b == b.b


def test_seeds_converge_to_same_loss():
    # lambda > 0 makes the optimum unique, so seeds only move the start
    data = gaussian_examples(n=200, seed=4)
    losses = [
        train_logistic(data, TrainConfig(seed=s, l2_lambda=1e-3)).train_loss
        for s in range(5)
    ]
    assert max(losses) - min(losses) < 1e-3


def test_minibatch_mode_trains():
    data = gaussian_examples(n=200, separation=4.0, seed=5)
    clf = train_logistic(data, TrainConfig(seed=0, batch_size=32, learning_rate=0.5))
    assert evaluate(clf, data)["accuracy"] >= 0.95


def test_score_closed_forms():
    clf = zero_clf(3)
    assert score(clf, np.array([5.0, -1.0, 2.0])) == 0.5
    clf1 = LinearClassifier(w=np.array([1.0]), b=0.0, dim=1, normalize_inputs=False)
    assert abs(score(clf1, np.array([math.log(3)])) - 0.75) < 1e-12
    assert abs(score(clf1, np.array([-math.log(3)])) - 0.25) < 1e-12


def test_score_monotone_in_logit():
    rng = np.random.default_rng(0)
    clf = LinearClassifier(w=rng.normal(size=4), b=0.3, dim=4, normalize_inputs=False)
    X = rng.normal(size=(100, 4))
    logits = X @ clf.w + clf.b
    scores = score_batch(clf, X)
    order = np.argsort(logits)
    assert np.all(np.diff(scores[order]) >= 0)


def test_score_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        score(zero_clf(3), np.array([1.0, 2.0]))


def test_rescaling_preserves_ranking():
    rng = np.random.default_rng(1)
    clf = LinearClassifier(w=rng.normal(size=4), b=-0.2, dim=4, normalize_inputs=False)
    big = LinearClassifier(w=3.0 * clf.w, b=3.0 * clf.b, dim=4, normalize_inputs=False)
    X = rng.normal(size=(50, 4))
    assert np.array_equal(
        np.argsort(score_batch(clf, X)), np.argsort(score_batch(big, X))
    )


def test_evaluate_perfect_separation():
    data = [LabeledExample(x=np.array([v]), y=int(v > 0)) for v in (-3.0, -2.0, 2.0, 3.0)]
    clf = LinearClassifier(w=np.array([5.0]), b=0.0, dim=1, normalize_inputs=False)
    result = evaluate(clf, data)
    assert result["auc"] == 1.0 and result["accuracy"] == 1.0


def test_evaluate_all_ties_auc_half():
    data = [LabeledExample(x=np.zeros(2), y=i % 2) for i in range(10)]
    result = evaluate(zero_clf(2), data)
    assert result["auc"] == 0.5


def test_evaluate_enumerated_case():
    # scores 0.9(y=1), 0.8(y=0), 0.7(y=1), 0.1(y=0)
    xs = [math.log(s / (1 - s)) for s in (0.9, 0.8, 0.7, 0.1)]
    ys = [1, 0, 1, 0]
    clf = LinearClassifier(w=np.array([1.0]), b=0.0, dim=1, normalize_inputs=False)
    data = [LabeledExample(x=np.array([x]), y=y) for x, y in zip(xs, ys)]
    result = evaluate(clf, data)
    assert abs(result["accuracy"] - 0.75) < 1e-12
    assert abs(result["auc"] - 0.75) < 1e-12


def test_evaluate_single_class_reports_no_auc():
    data = [LabeledExample(x=np.array([float(i)]), y=1) for i in range(4)]
    clf = LinearClassifier(w=np.array([1.0]), b=0.0, dim=1, normalize_inputs=False)
    result = evaluate(clf, data)
    assert result["auc"] is None and result["n"] == 4


def test_binarize_fwe_annotations():
    records = [{"text": f"t{s}", "score": s} for s in range(6)]
    labels = [y for _, y in binarize_fwe_annotations(records)]
    assert labels == [0, 0, 1, 1, 1, 1]


def test_binarize_rejects_out_of_range():
    with pytest.raises(ScoreOutOfRangeError):
        binarize_fwe_annotations([{"text": "t", "score": 6}])
    with pytest.raises(ScoreOutOfRangeError):
        binarize_fwe_annotations([{"text": "t", "score": -1}])


def test_classifier_file_roundtrip(tmp_path):
    data = gaussian_examples(n=60, seed=6)
    clf = train_logistic(data, TrainConfig(seed=1))
    clf.trained_on = "synthetic blobs"
    path = str(tmp_path / "clf.json")
    save_classifier(clf, path)
    back = load_classifier(path)
    assert np.array_equal(back.w, clf.w)
    assert back.b == clf.b
    assert back.trained_on == clf.trained_on
    # saving again is byte-identical
    path2 = str(tmp_path / "clf2.json")
    save_classifier(back, path2)
    assert open(path, "rb").read() == open(path2, "rb").read()
