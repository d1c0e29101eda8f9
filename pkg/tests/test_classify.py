import numpy as np
import pytest

from churnforge.classify import (
    fit_gnb,
    fit_knn,
    gnb_decide,
    gnb_fit,
    gnb_predict,
    gnb_predict_many,
    knn_decide,
    knn_fit,
    knn_predict,
    knn_predict_many,
)
from churnforge.label import LabeledWorker
from churnforge.model import ConfigurationError, DropoutLabel, WorkerFeatures
from oracles import gnb_oracle, knn_oracle, random_instance

D, A = DropoutLabel.DROPOUT, DropoutLabel.ACTIVE


def lw(wid, part, win, label):
    return LabeledWorker(WorkerFeatures(wid, part, win), label)


FIVE = [
    lw("a", 2, 0, D), lw("b", 4, 1, D), lw("c", 6, 3, A), lw("d", 8, 2, A), lw("e", 10, 4, A),
]


def test_knn_minimal_fit():
    model = knn_fit([lw("a", 3, 1, D)], 1)
    assert model.vectors.shape == (1, 3)
    assert knn_predict(model, WorkerFeatures("x", 50, 0)) is D


def test_knn_constant_feature_standardizes_to_zero():
    train = [lw("a", 5, 1, D), lw("b", 5, 2, A), lw("c", 5, 3, A)]
    model = knn_fit(train, 1)
    assert np.all(model.vectors[:, 0] == 0.0)


def test_knn_five_worker_zscores():
    model = knn_fit(list(reversed(FIVE)), 3)
    # participation 2,4,6,8,10: mean 6, population std sqrt(8)
    assert model.vectors[:, 0] == pytest.approx([(v - 6) / np.sqrt(8) for v in (2, 4, 6, 8, 10)])
    # wins 0,1,3,2,4: mean 2, population std sqrt(2)
    assert model.vectors[:, 1] == pytest.approx([(v - 2) / np.sqrt(2) for v in (0, 1, 3, 2, 4)])
    rates = np.array([0, 0.25, 0.5, 0.25, 0.4])
    assert model.vectors[:, 2] == pytest.approx((rates - rates.mean()) / rates.std())
    assert list(model.targets) == [True, True, False, False, False]


def test_knn_config_errors():
    with pytest.raises(ConfigurationError):
        knn_fit(FIVE, 2)
    with pytest.raises(ConfigurationError):
        knn_fit(FIVE[:2], 3)
    with pytest.raises(ConfigurationError):
        fit_knn(np.empty((0, 3)), [], 1)


def test_knn_exact_match_and_majority():
    model = knn_fit(FIVE, 1)
    for item in FIVE:
        assert knn_predict(model, item.features) is item.label
    X = [[0.0, 0, 0], [0.1, 0, 0], [0.2, 0, 0], [5.0, 0, 0]]
    m3 = fit_knn(X, [True, True, False, False], 3, scale=False)
    assert knn_decide(m3, [[0.05, 0, 0]])[0]


def test_knn_distance_tie_goes_to_stored_order():
    X = [[-1.0, 0, 0], [1.0, 0, 0]]
    assert knn_decide(fit_knn(X, [True, False], 1, scale=False), [[0.0, 0, 0]])[0]
    assert not knn_decide(fit_knn(X, [False, True], 1, scale=False), [[0.0, 0, 0]])[0]


def test_knn_k_equals_n_is_majority():
    model = knn_fit(FIVE, 5)
    probes = [WorkerFeatures("p", p, w) for p, w in [(1, 0), (3, 3), (100, 50), (7, 1)]]
    assert knn_predict_many(model, probes) == [A] * 4


def test_gnb_balanced_moments():
    train = [lw("a", 2, 0, D), lw("b", 4, 2, D), lw("c", 10, 5, A), lw("d", 20, 5, A)]
    model = gnb_fit(train)
    assert list(model.priors) == [0.5, 0.5]
    assert model.means[0] == pytest.approx([3, 1, 0.25])
    assert model.means[1] == pytest.approx([15, 5, 0.375])
    assert model.variances[0] == pytest.approx([1, 1, 0.0625])
    # active wins are 5 and 5: clamped to the floor
    assert model.variances[1] == pytest.approx([25, model.var_floor, 0.125 ** 2])
    assert model.var_floor == pytest.approx(1e-9 * 49)


def test_gnb_identical_class_vectors_use_floor():
    train = [lw("a", 3, 1, D), lw("b", 3, 1, D), lw("c", 9, 6, A), lw("d", 12, 2, A)]
    model = gnb_fit(train)
    assert np.all(model.variances[0] == model.var_floor)
    assert model.priors.sum() == 1.0


def test_gnb_needs_both_classes():
    with pytest.raises(ConfigurationError):
        gnb_fit([lw("a", 3, 1, D), lw("b", 4, 1, D)])


def test_gnb_dominant_likelihood_and_tie():
    train = [lw("a", 2, 0, D), lw("b", 4, 0, D), lw("c", 100, 40, A), lw("d", 120, 60, A)]
    model = gnb_fit(train)
    assert gnb_predict(model, WorkerFeatures("x", 3, 0)) is D
    assert gnb_predict(model, WorkerFeatures("x", 110, 50)) is A
    sym = fit_gnb([[-2.0], [-1.0], [1.0], [2.0]], [True, True, False, False])
    assert gnb_decide(sym, [[0.0]])[0]


@pytest.mark.parametrize("seed", range(30))
def test_oracles_agree(seed):
    X, y, tests = random_instance(1000 + seed)
    for k in (1, 3):
        got = knn_decide(fit_knn(X, y, k), tests)
        assert list(got) == [knn_oracle(X, y, k, t) for t in tests]
    got = gnb_decide(fit_gnb(X, y), tests)
    assert list(got) == [gnb_oracle(X, y, t) for t in tests]


@pytest.mark.parametrize("seed", range(20))
def test_affine_rescaling_keeps_predictions(seed):
    X, y, tests = random_instance(2000 + seed)
    X, tests = np.array(X), np.array(tests)
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.1, 50, size=3)
    b = rng.uniform(-100, 100, size=3)
    for k in (1, 3):
        assert np.array_equal(knn_decide(fit_knn(X, y, k), tests),
                              knn_decide(fit_knn(a * X + b, y, k), a * tests + b))
    assert np.array_equal(gnb_decide(fit_gnb(X, y), tests), gnb_decide(fit_gnb(a * X + b, y), a * tests + b))


def test_training_order_does_not_matter():
    rng = np.random.default_rng(4)
    train = [lw(f"w{i:02d}", int(p), int(rng.integers(0, p + 1)), D if rng.random() < 0.5 else A)
             for i, p in enumerate(rng.integers(1, 30, size=25))]
    probes = [WorkerFeatures(f"p{i}", int(p), int(p) // 3) for i, p in enumerate(rng.integers(1, 30, size=15))]
    shuffled = [train[i] for i in rng.permutation(len(train))]
    for k in (1, 3):
        assert knn_predict_many(knn_fit(train, k), probes) == knn_predict_many(knn_fit(shuffled, k), probes)
    assert gnb_predict_many(gnb_fit(train), probes) == gnb_predict_many(gnb_fit(shuffled), probes)


def test_unscaled_mode_and_dump():
    model = knn_fit(FIVE, 3, scale=False)
    assert list(model.scaler.std) == [1, 1, 1]
    assert "k=3" in model.dump()
    assert "variance floor" in gnb_fit(FIVE).dump()
