"""Experiment protocols and small oracle-checked witnesses.

The protocols run a learner through a fixed schedule and return plain
report dataclasses; nothing here writes files.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .core import Dataset, LossFunction, Learner, Task, evaluate, row_keys
from .data import BlobSpec, gen_blobs, pad_task
from .errors import ContractViolation, IncompatibleInputError
from .representation import RepresentationStore
from .weighted import LinearRegressor, PolynomialRegressor, vandermonde

WITNESS_TOL = 1e-4
ORACLE_TOL = 1e-9
INTERPOLATION_MSE = 1e-8
OVERFIT_FACTOR = 10.0
CONTROL_FACTOR = 3.0
MSE_RTOL = 1e-6
MSE_ATOL = 1e-12


@dataclass
class ForgettingReport:
    task_a: str
    task_b: str
    learner_kind: str
    acc_a_before: float
    acc_b: float
    acc_a_after: float
    forgetting_delta: float
    predictions_identical: bool
    predictions_a_before: list = field(default_factory=list)
    predictions_a_after: list = field(default_factory=list)
    padded: bool = False

    def __post_init__(self):
        if not -1.0 <= self.forgetting_delta <= 1.0:
            raise ContractViolation("forgetting_delta outside [-1, 1]")
        if self.forgetting_delta != self.acc_a_before - self.acc_a_after:
            raise ContractViolation("forgetting_delta must equal acc_a_before - acc_a_after")
        if self.predictions_identical and self.forgetting_delta != 0.0:
            raise ContractViolation("identical predictions must give zero forgetting")
        if self.predictions_a_before or self.predictions_a_after:
            if self.predictions_identical != (list(self.predictions_a_before) == list(self.predictions_a_after)):
                raise ContractViolation("predictions_identical disagrees with the stored predictions")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class OverfitEpoch:
    epoch: int
    train_accuracy: float
    test_accuracy: float
    train_loss: float
    test_loss: float
    changed: bool
    fingerprint: str
    test_predictions: list = field(default_factory=list)


@dataclass
class OverfitReport:
    task: str
    learner_kind: str
    records: list[OverfitEpoch] = field(default_factory=list)

    def __post_init__(self):
        self.records = [r if isinstance(r, OverfitEpoch) else OverfitEpoch(**r) for r in self.records]
        if [r.epoch for r in self.records] != list(range(1, len(self.records) + 1)):
            raise ContractViolation("overfit records must be consecutive epochs from 1")

    @property
    def last_changed_epoch(self) -> int:
        """Last epoch that modified the learner (0 if none did)."""
        changed = [r.epoch for r in self.records if r.changed]
        return changed[-1] if changed else 0

    @property
    def changed_is_monotone(self) -> bool:
        flags = [r.changed for r in self.records]
        return all(a or not b for a, b in zip(flags, flags[1:]))

    @property
    def predictions_constant(self) -> bool:
        first = self.records[0].test_predictions
        return all(r.test_predictions == first for r in self.records)

    @property
    def fingerprint_stable(self) -> bool:
        """Fingerprint unchanged from the last changing epoch onwards."""
        k = max(self.last_changed_epoch, 1)
        return len({r.fingerprint for r in self.records[k - 1:]}) == 1

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class WitnessReport:
    name: str
    passed: bool
    tolerance: float
    oracle: str
    quantities: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _fixed_input(learner: Learner) -> bool:
    return getattr(learner, "fixed_input", False)


def run_forgetting(learner_factory: Callable[[], Learner], task_a: Task, task_b: Task,
                   epochs: int = 10, pad: bool = False,
                   loss: LossFunction | None = None) -> ForgettingReport:
    """Train on A, evaluate A, train on B, evaluate B, re-evaluate A.

    One learner instance is used throughout; it is never reset between the
    two tasks.
    """
    if epochs < 1:
        raise ContractViolation("epochs must be >= 1")
    if task_a.feature_dim == task_b.feature_dim:
        shared = set(row_keys(task_a.train.X)) & set(row_keys(task_b.train.X))
        if shared:
            raise ContractViolation(f"training sets of {task_a.name!r} and {task_b.name!r} overlap")

    learner = learner_factory()
    padded = False
    mismatch = (task_a.feature_dim != task_b.feature_dim
                or task_a.class_count != task_b.class_count)
    if _fixed_input(learner) and mismatch:
        if not pad or task_a.class_count != task_b.class_count:
            raise IncompatibleInputError(
                f"{learner.kind} learner cannot take {task_a.name!r} ({task_a.feature_dim} features) "
                f"and {task_b.name!r} ({task_b.feature_dim} features) without padding")
        dim = max(task_a.feature_dim, task_b.feature_dim)
        task_a, task_b = pad_task(task_a, dim), pad_task(task_b, dim)
        padded = True

    loss = loss or LossFunction()
    learner.fit(task_a.train, epochs, task=task_a.name)
    before = evaluate(learner, task_a.test, loss, task=task_a.name)
    learner.fit(task_b.train, epochs, task=task_b.name)
    on_b = evaluate(learner, task_b.test, loss, task=task_b.name)
    after = evaluate(learner, task_a.test, loss, task=task_a.name)

    return ForgettingReport(
        task_a=task_a.name,
        task_b=task_b.name,
        learner_kind=learner.kind,
        acc_a_before=before.accuracy,
        acc_b=on_b.accuracy,
        acc_a_after=after.accuracy,
        forgetting_delta=before.accuracy - after.accuracy,
        predictions_identical=before.predictions == after.predictions,
        predictions_a_before=list(before.predictions),
        predictions_a_after=list(after.predictions),
        padded=padded,
    )


def run_overfitting(learner: Learner, task: Task, epochs: int = 10,
                    loss: LossFunction | None = None) -> OverfitReport:
    """Train for ``epochs`` single passes over the same data, probing after each."""
    if epochs < 1:
        raise ContractViolation("epochs must be >= 1")
    loss = loss or LossFunction()
    report = OverfitReport(task.name, learner.kind)
    for epoch in range(1, epochs + 1):
        log = learner.fit(task.train, 1, task=task.name)
        tr = evaluate(learner, task.train, loss, task=task.name)
        te = evaluate(learner, task.test, loss, task=task.name)
        report.records.append(OverfitEpoch(
            epoch=epoch,
            train_accuracy=tr.accuracy,
            test_accuracy=te.accuracy,
            train_loss=tr.mean_loss,
            test_loss=te.mean_loss,
            changed=bool(log.records[-1].changed),
            fingerprint=learner.fingerprint().hex(),
            test_predictions=list(te.predictions),
        ))
    return report


# --- closed-form oracles -------------------------------------------------

def least_squares_weight(xs, ys) -> float:
    """Optimum of mean (w x - y)^2 for scalar x: sum(xy) / sum(x^2)."""
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    return sum(x * y for x, y in zip(xs, ys)) / sum(x * x for x in xs)


def normal_equations_fit(x, y, degree) -> np.ndarray:
    """Polynomial coefficients from the normal equations.

    Overdetermined systems use (A^T A) c = A^T y; underdetermined ones use the
    minimum-norm form c = A^T (A A^T)^-1 y.
    """
    A = vandermonde(x, degree)
    y = np.asarray(y, dtype=np.float64)
    if A.shape[0] >= A.shape[1]:
        return np.linalg.solve(A.T @ A, A.T @ y)
    return A.T @ np.linalg.solve(A @ A.T, y)


def _mse(coef, x, y):
    r = vandermonde(x, len(coef) - 1) @ coef - np.asarray(y, dtype=np.float64)
    return float(np.mean(r * r))


def _close(a, b):
    return bool(abs(a - b) <= MSE_ATOL + MSE_RTOL * abs(b))


# --- witnesses -------------------------------------------------------------

def witness_theorem_forgetting() -> WitnessReport:
    """Retraining a 1-D linear map on a conflicting target overwrites the old output."""
    L, L2 = ([1.0], [1.0]), ([1.0], [-1.0])
    reg = LinearRegressor(1)
    reg.fit(*L)
    before = float(reg.predict([1.0])[0])
    reg.fit(*L2)
    after = float(reg.predict([1.0])[0])
    oracle_before = least_squares_weight(*L) * 1.0
    oracle_after = least_squares_weight(*L2) * 1.0

    control = LinearRegressor(1)
    control.fit(*L)
    control.fit(*L)
    control_out = float(control.predict([1.0])[0])

    # classes: 1 <-> output +1, 0 <-> output -1
    store = RepresentationStore()
    store.ingest([1.0], 1, "L")
    rep_before = store.predict([1.0], "L")[0]
    store.ingest([1.0], 0, "L'")
    rep_after = store.predict([1.0], "L")[0]

    checks = {
        "phase1_matches_target": abs(before - 1.0) <= WITNESS_TOL,
        "phase2_matches_target": abs(after + 1.0) <= WITNESS_TOL,
        "phase1_matches_oracle": abs(before - oracle_before) <= ORACLE_TOL,
        "phase2_matches_oracle": abs(after - oracle_after) <= ORACLE_TOL,
        "forgetting_witnessed": abs(before - after) > WITNESS_TOL,
        "same_problem_control_kept": abs(control_out - 1.0) <= WITNESS_TOL,
        "representation_learner_kept": rep_before == rep_after == 1,
    }
    return WitnessReport(
        name="forgetting_different_problem",
        passed=all(checks.values()),
        tolerance=WITNESS_TOL,
        oracle="closed-form least squares w = sum(xy)/sum(x^2) on each phase",
        quantities={
            "predict_1_after_L": before,
            "predict_1_after_L_prime": after,
            "oracle_after_L": oracle_before,
            "oracle_after_L_prime": oracle_after,
            "control_predict_1_after_L_twice": control_out,
            "representation_label_before": rep_before,
            "representation_label_after": rep_after,
            "checks": checks,
        },
    )


def _two_phase(first, second):
    reg = LinearRegressor(1)
    reg.fit(*first)
    reg.fit(*second)
    return float(reg.predict([1.0])[0]), least_squares_weight(*second)


def witness_theorem_same_problem() -> WitnessReport:
    """Training on more data from the same linear law keeps old outputs."""
    single = _two_phase(([1.0], [2.0]), ([2.0], [4.0]))
    xs1 = np.linspace(0.1, 1.0, 10)
    xs2 = np.linspace(1.1, 2.0, 10)
    larger = _two_phase((xs1, 2 * xs1), (xs2, 2 * xs2))
    inconsistent = _two_phase((xs1, 2 * xs1), (xs2, 3 * xs2))

    checks = {
        "single_point_preserved": abs(single[0] - 2.0) <= WITNESS_TOL,
        "single_point_matches_oracle": abs(single[0] - single[1]) <= ORACLE_TOL,
        "larger_sets_preserved": abs(larger[0] - 2.0) <= WITNESS_TOL,
        "larger_sets_match_oracle": abs(larger[0] - larger[1]) <= ORACLE_TOL,
        "inconsistent_control_not_preserved": abs(inconsistent[0] - 2.0) > WITNESS_TOL,
        "inconsistent_control_moves_to_3": abs(inconsistent[0] - 3.0) <= WITNESS_TOL,
    }
    return WitnessReport(
        name="no_forgetting_same_problem",
        passed=all(checks.values()),
        tolerance=WITNESS_TOL,
        oracle="closed-form least squares w = sum(xy)/sum(x^2) on the last phase",
        quantities={
            "predict_1_single_point": single[0],
            "oracle_single_point": single[1],
            "predict_1_larger_sets": larger[0],
            "oracle_larger_sets": larger[1],
            "predict_1_inconsistent": inconsistent[0],
            "oracle_inconsistent": inconsistent[1],
            "checks": checks,
        },
    )


def noisy_line(seed=0, n_train=5, n_test=5, noise=0.1):
    """Train and held-out samples of y = x + noise with x uniform on [0, 1]."""
    rng = np.random.default_rng(seed)
    x_tr = np.sort(rng.uniform(0.0, 1.0, n_train))
    x_te = np.sort(rng.uniform(0.0, 1.0, n_test))
    y_tr = x_tr + noise * rng.standard_normal(n_train)
    y_te = x_te + noise * rng.standard_normal(n_test)
    return x_tr, y_tr, x_te, y_te


def overfit_probe(degree=9, seed=0) -> dict:
    """Fit a polynomial to the noisy line by the system path and by the oracle."""
    x_tr, y_tr, x_te, y_te = noisy_line(seed)
    model = PolynomialRegressor(degree).fit(x_tr, y_tr)
    coef = normal_equations_fit(x_tr, y_tr, degree)
    return {
        "degree": degree,
        "train_mse": model.mse(x_tr, y_tr),
        "test_mse": model.mse(x_te, y_te),
        "oracle_train_mse": _mse(coef, x_tr, y_tr),
        "oracle_test_mse": _mse(coef, x_te, y_te),
    }


def witness_theorem_overfitting(seed=0) -> WitnessReport:
    """An exact fit of the training problem fails a problem drawn alongside it."""
    high = overfit_probe(9, seed)
    line = overfit_probe(1, seed)
    checks = {
        "train_minimised": high["train_mse"] < INTERPOLATION_MSE,
        "oracle_train_minimised": high["oracle_train_mse"] < INTERPOLATION_MSE,
        "held_out_not_solved": high["test_mse"] >= OVERFIT_FACTOR * line["test_mse"],
        "oracle_held_out_not_solved": high["oracle_test_mse"] >= OVERFIT_FACTOR * line["oracle_test_mse"],
        "system_matches_oracle": all(
            _close(p[k], p["oracle_" + k]) for p in (high, line) for k in ("train_mse", "test_mse")),
        "linear_control_balanced": (line["test_mse"] <= CONTROL_FACTOR * line["train_mse"]
                                    and line["train_mse"] <= CONTROL_FACTOR * line["test_mse"]),
    }
    return WitnessReport(
        name="overfitting",
        passed=all(checks.values()),
        tolerance=INTERPOLATION_MSE,
        oracle="polynomial normal equations (primal for degree 1, minimum-norm dual for degree 9)",
        quantities={"degree_9": high, "degree_1": line, "seed": seed, "checks": checks},
    )


def run_witnesses() -> list[WitnessReport]:
    return [witness_theorem_forgetting(), witness_theorem_same_problem(), witness_theorem_overfitting()]


def _side(x: np.ndarray) -> np.ndarray:
    return (x[:, 0] >= 0.5).astype(np.int64)


def make_conflicting_tasks(seed: int = 42, train_size: int = 200, test_size: int = 100,
                           spread: float = 0.1) -> tuple[Task, Task]:
    """Two 2-D tasks on the same blobs with opposite labelings.

    Task A labels a point 1 when ``x0 >= 0.5``; task B labels it 1 when
    ``x0 < 0.5``. Every input is therefore in conflict.
    """
    seeds = np.random.SeedSequence(seed).generate_state(4, dtype=np.uint64).tolist()

    def blobs(n, s, name, labeler):
        half = n // 2
        spec = BlobSpec(((0.25, 0.5), (0.75, 0.5)), (spread, spread), (half, n - half))
        return gen_blobs(spec, seed=s, name=name, labeler=labeler)

    tasks = []
    for name, labeler, (s_tr, s_te) in (("conflict-a", _side, seeds[:2]),
                                         ("conflict-b", lambda x: 1 - _side(x), seeds[2:])):
        tr = blobs(train_size, s_tr, name, labeler)
        te = blobs(test_size, s_te, name, labeler)
        tasks.append(Task(name, tr, te, 2))
    return tasks[0], tasks[1]


def dataset_counts(data: Dataset) -> dict:
    return {"samples": len(data), "class_counts": data.class_counts()}
