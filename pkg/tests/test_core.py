import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from forgetbench.core import (
    PROB_FLOOR,
    CanonicalHasher,
    Dataset,
    Digest,
    LossFunction,
    LossKind,
    Sample,
    Task,
    evaluate,
    loss_eval,
)
from forgetbench.errors import ContractViolation
from forgetbench.representation import RepresentationLearner
from forgetbench.weighted import LogisticLearner, MlpLearner, SgdConfig

from conftest import ConstantLearner, balanced

CE = LossFunction(LossKind.CROSS_ENTROPY)
MSE = LossFunction(LossKind.MEAN_SQUARED_ERROR)
ZO = LossFunction(LossKind.ZERO_ONE)


def test_constant_predictor_on_single_label_data(constant_learner):
    zeros = balanced(5).subset(range(5))
    assert set(zeros.y.tolist()) == {0}
    rep = evaluate(constant_learner(0), zeros, ZO)
    assert rep.accuracy == 1.0
    assert rep.confusion.tolist() == [[5, 0], [0, 0]]


def test_constant_predictor_balanced(constant_learner):
    rep = evaluate(constant_learner(0), balanced(5), ZO)
    assert rep.accuracy == 0.5
    assert rep.confusion.tolist() == [[5, 0], [5, 0]]
    assert rep.n == 10
    assert rep.mean_loss == 0.5


def test_cross_entropy_uniform():
    assert loss_eval(CE, [0.5, 0.5], 0) == pytest.approx(math.log(2), abs=1e-12)


def test_cross_entropy_perfect_prediction():
    assert 0.0 <= loss_eval(CE, [1.0, 0.0], 0) <= -math.log(1 - PROB_FLOOR) + 1e-15


def test_cross_entropy_confident_wrong_is_finite():
    assert loss_eval(CE, [1.0, 0.0], 1) == pytest.approx(-math.log(PROB_FLOOR))


def test_zero_one_argmax():
    assert loss_eval(ZO, [0.4, 0.6], 0) == 1.0
    assert loss_eval(ZO, [0.4, 0.6], 1) == 0.0


def test_zero_one_tie_goes_to_lowest_class():
    assert loss_eval(ZO, [0.5, 0.5], 0) == 0.0
    assert loss_eval(ZO, [0.5, 0.5], 1) == 1.0


def test_mse_exact_match_is_zero():
    assert loss_eval(MSE, [0.0, 1.0, 0.0], 1) == 0.0
    assert loss_eval(MSE, [0.5, 0.5], 0) == pytest.approx(0.25)


@pytest.mark.parametrize("dist", [[0.5, 0.6], [1.2, -0.2], [0.3, 0.3, 0.3], [float("nan"), 1.0]])
def test_loss_rejects_non_distributions(dist):
    with pytest.raises(ContractViolation):
        loss_eval(CE, dist, 0)


def test_loss_kind_from_string():
    assert LossFunction("zero_one").kind is LossKind.ZERO_ONE
    with pytest.raises(ValueError):
        LossFunction("hinge")


distributions = arrays(np.float64, st.integers(2, 6), elements=st.floats(0.0, 1.0)).filter(
    lambda a: a.sum() > 1e-3).map(lambda a: a / a.sum())


@given(distributions, st.data())
def test_losses_non_negative(p, data):
    label = data.draw(st.integers(0, p.size - 1))
    for loss in (CE, MSE, ZO):
        assert loss_eval(loss, p, label) >= 0.0


@given(st.integers(0, 5), st.integers(2, 6))
def test_losses_zero_on_one_hot(label, k):
    label = label % k
    p = np.zeros(k)
    p[label] = 1.0
    assert loss_eval(MSE, p, label) == 0.0
    assert loss_eval(ZO, p, label) == 0.0
    assert loss_eval(CE, p, label) == 0.0


def test_dataset_invariants():
    with pytest.raises(ContractViolation):
        Dataset(np.zeros((0, 2)), [], 2, "empty")
    with pytest.raises(ContractViolation):
        Dataset([[0.1], [0.2]], [0, 2], 2, "bad label")
    with pytest.raises(ContractViolation):
        Dataset([[0.1], [0.2]], [0, 0], 2, "missing class")
    with pytest.raises(ContractViolation):
        Dataset([[np.inf], [0.2]], [0, 1], 2, "non-finite")
    with pytest.raises(ContractViolation):
        Dataset([[0.1], [0.2]], [0, 1], 1, "one class")


def test_dataset_from_samples_roundtrip():
    samples = [Sample((0.1, 0.2), 0), Sample((0.3, 0.4), 1)]
    d = Dataset.from_samples(samples, 2, "s")
    assert d.samples == samples
    assert d.feature_dim == 2
    with pytest.raises(ContractViolation):
        Dataset.from_samples([Sample((0.1,), 0), Sample((0.3, 0.4), 1)], 2, "s")


def test_sample_invariants():
    with pytest.raises(ContractViolation):
        Sample((), 0)
    with pytest.raises(ContractViolation):
        Sample((float("nan"),), 0)


def test_task_rejects_shared_samples():
    d = balanced(3)
    with pytest.raises(ContractViolation):
        Task("t", d, d, 2)
    other = balanced(3, seed=1)
    assert Task("t", d, other, 2).feature_dim == 2
    with pytest.raises(ContractViolation):
        Task("t", d, balanced(3, dim=3), 2)


def test_digest_is_fixed_width_and_order_sensitive_to_fields():
    a = CanonicalHasher("x").text("ab").text("c").digest()
    b = CanonicalHasher("x").text("a").text("bc").digest()
    assert a != b  # length prefixes separate fields
    assert len(a.value) == 16
    with pytest.raises(ContractViolation):
        Digest(b"short")


def test_digest_ignores_signed_zero():
    assert CanonicalHasher("z").floats([0.0]).digest() == CanonicalHasher("z").floats([-0.0]).digest()


def _fitted_learners():
    d = balanced(10, dim=3, seed=4)
    rep = RepresentationLearner()
    rep.fit(d, 2)
    log = LogisticLearner(SgdConfig(learning_rate=0.5, batch_size=4, seed=1))
    log.fit(d, 5)
    mlp = MlpLearner(config=SgdConfig(learning_rate=0.5, batch_size=4, seed=1))
    mlp.fit(d, 5)
    return d, [rep, log, mlp]


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_evaluate_properties(idx):
    d, learners = _fitted_learners()
    learner = learners[idx]
    before = learner.fingerprint()
    test = balanced(7, dim=3, seed=9)
    reports = {loss.kind: evaluate(learner, test, loss) for loss in (CE, MSE, ZO)}
    assert learner.fingerprint() == before
    zo = reports[LossKind.ZERO_ONE]
    assert zo.accuracy + zo.mean_loss == 1.0
    for rep in reports.values():
        assert rep.confusion.sum() == rep.n
        assert rep.confusion.sum(axis=1).tolist() == test.class_counts()
        assert rep.accuracy == np.trace(rep.confusion) / rep.n
        assert rep.mean_loss >= 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=60).filter(lambda ys: len(set(ys)) == 2),
       st.integers(0, 1))
def test_accuracy_plus_zero_one_loss_is_one(labels, const):
    X = np.arange(len(labels), dtype=float).reshape(-1, 1) / len(labels)
    rep = evaluate(ConstantLearner(const), Dataset(X, labels, 2, "d"), ZO)
    assert rep.accuracy + rep.mean_loss == 1.0
