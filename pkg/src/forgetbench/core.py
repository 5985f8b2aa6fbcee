"""Domain types, losses, evaluation and the learner contract."""

from __future__ import annotations

import abc
import enum
import hashlib
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractViolation

PROB_FLOOR = 1e-12
NORMALIZATION_TOL = 1e-9
DIGEST_SIZE = 16


@dataclass(frozen=True)
class Sample:
    features: tuple
    label: int

    def __post_init__(self):
        if len(self.features) == 0:
            raise ContractViolation("sample features must be non-empty")
        if not all(np.isfinite(self.features)):
            raise ContractViolation("sample features must be finite")
        if self.label < 0:
            raise ContractViolation("labels are non-negative class ids")


@dataclass(eq=False)
class Dataset:
    """Labelled feature matrix.

    ``X`` has shape (n, feature_dim) and ``y`` holds dense class ids in
    ``0 .. class_count - 1``. Every class must be represented unless the
    dataset was carved out with :meth:`subset`.
    """

    X: np.ndarray
    y: np.ndarray
    class_count: int
    name: str
    provenance: dict = field(default_factory=dict)
    require_all_classes: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.X = np.array(self.X, dtype=np.float64, copy=True)
        self.y = np.array(self.y, dtype=np.int64, copy=True)
        if self.X.ndim != 2 or self.X.shape[0] == 0 or self.X.shape[1] == 0:
            raise ContractViolation(f"dataset {self.name!r}: need a non-empty 2-D feature matrix")
        if self.y.shape != (self.X.shape[0],):
            raise ContractViolation(f"dataset {self.name!r}: one label per sample required")
        if self.class_count < 2:
            raise ContractViolation("class_count must be >= 2")
        if not np.all(np.isfinite(self.X)):
            raise ContractViolation(f"dataset {self.name!r}: non-finite feature value")
        if self.y.min() < 0 or self.y.max() >= self.class_count:
            raise ContractViolation(f"dataset {self.name!r}: label outside 0..{self.class_count - 1}")
        missing = set(range(self.class_count)) - set(np.unique(self.y).tolist())
        if missing and self.require_all_classes:
            raise ContractViolation(f"dataset {self.name!r}: classes {sorted(missing)} have no samples")
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], class_count: int, name: str, **kw) -> "Dataset":
        if not samples:
            raise ContractViolation(f"dataset {name!r}: no samples")
        dims = {len(s.features) for s in samples}
        if len(dims) != 1:
            raise ContractViolation(f"dataset {name!r}: mixed feature lengths {sorted(dims)}")
        X = np.array([s.features for s in samples], dtype=np.float64)
        y = np.array([s.label for s in samples], dtype=np.int64)
        return cls(X, y, class_count, name, **kw)

    def subset(self, indices) -> "Dataset":
        """Rows ``indices`` as a new dataset; classes may be absent from it."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.class_count, self.name,
                       provenance=self.provenance, require_all_classes=False)

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> list[Sample]:
        return [Sample(tuple(row.tolist()), int(lab)) for row, lab in zip(self.X, self.y)]

    def class_counts(self) -> list[int]:
        return np.bincount(self.y, minlength=self.class_count).tolist()

    def __len__(self):
        return self.X.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.class_count == other.class_count
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


def row_keys(X: np.ndarray) -> list[bytes]:
    """Exact-equality keys for feature rows (``-0.0`` and ``0.0`` coincide)."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64) + 0.0)
    return [row.tobytes() for row in X]


@dataclass(eq=False)
class Task:
    name: str
    train: Dataset
    test: Dataset
    class_count: int

    def __post_init__(self):
        if self.train.feature_dim != self.test.feature_dim:
            raise ContractViolation(f"task {self.name!r}: train/test feature_dim differ")
        if not (self.train.class_count == self.test.class_count == self.class_count):
            raise ContractViolation(f"task {self.name!r}: class_count mismatch")
        shared = set(row_keys(self.train.X)) & set(row_keys(self.test.X))
        if shared:
            raise ContractViolation(f"task {self.name!r}: {len(shared)} samples appear in both splits")

    @property
    def feature_dim(self) -> int:
        return self.train.feature_dim


class LossKind(str, enum.Enum):
    CROSS_ENTROPY = "cross_entropy"
    MEAN_SQUARED_ERROR = "mean_squared_error"
    ZERO_ONE = "zero_one"


@dataclass(frozen=True)
class LossFunction:
    kind: LossKind = LossKind.CROSS_ENTROPY

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))

    def __call__(self, predicted_distribution, true_label: int) -> float:
        return loss_eval(self, predicted_distribution, true_label)


def _check_distribution(p: np.ndarray) -> None:
    if p.ndim != 1 or p.size < 2:
        raise ContractViolation("predicted distribution must be a 1-D vector over >= 2 classes")
    if not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0:
        raise ContractViolation("distribution entries must lie in [0, 1]")
    if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
        raise ContractViolation(f"distribution sums to {p.sum()!r}, not 1")


def argmax_low(scores) -> int:
    """Index of the largest score; the lowest index wins ties."""
    return int(np.argmax(scores))


def loss_eval(loss: LossFunction, predicted_distribution, true_label: int) -> float:
    p = np.asarray(predicted_distribution, dtype=np.float64)
    _check_distribution(p)
    if not 0 <= true_label < p.size:
        raise ContractViolation(f"true label {true_label} outside distribution support")
    kind = loss.kind
    if kind is LossKind.CROSS_ENTROPY:
        return float(-np.log(np.clip(p[true_label], PROB_FLOOR, 1.0)))
    if kind is LossKind.MEAN_SQUARED_ERROR:
        target = np.zeros_like(p)
        target[true_label] = 1.0
        return float(np.mean((p - target) ** 2))
    return 0.0 if argmax_low(p) == true_label else 1.0


@dataclass(frozen=True)
class Digest:
    value: bytes

    def __post_init__(self):
        if len(self.value) != DIGEST_SIZE:
            raise ContractViolation(f"digest must be {DIGEST_SIZE} bytes")

    def hex(self) -> str:
        return self.value.hex()

    def __str__(self):
        return self.hex()


class CanonicalHasher:
    """128-bit BLAKE2b over length-prefixed fields.

    Callers are responsible for feeding fields in a canonical order.
    """

    def __init__(self, domain: str):
        self._h = hashlib.blake2b(digest_size=DIGEST_SIZE)
        self.text(domain)

    def _chunk(self, payload: bytes):
        self._h.update(struct.pack("<Q", len(payload)))
        self._h.update(payload)

    def text(self, s: str):
        self._chunk(s.encode("utf-8"))
        return self

    def integer(self, v: int):
        self._chunk(struct.pack("<q", int(v)))
        return self

    def floats(self, values):
        arr = np.ascontiguousarray(np.asarray(values, dtype="<f8").ravel() + 0.0)
        self._chunk(arr.tobytes())
        return self

    def digest(self) -> Digest:
        return Digest(self._h.digest())


@dataclass
class EpochRecord:
    epoch: int
    changed: bool
    train_loss: float | None = None
    train_accuracy: float | None = None


@dataclass
class EpochLog:
    records: list[EpochRecord] = field(default_factory=list)

    @property
    def changed(self) -> list[bool]:
        return [r.changed for r in self.records]

    @property
    def losses(self) -> list[float]:
        return [r.train_loss for r in self.records]

    def __len__(self):
        return len(self.records)


class Learner(abc.ABC):
    """Contract implemented by both learner families.

    ``task`` arguments name the task a sample belongs to. Learners that keep
    per-task state use it; weighted learners ignore it.
    """

    kind: str = "learner"

    @abc.abstractmethod
    def fit(self, train: Dataset, epochs: int = 1, task: str | None = None) -> EpochLog: ...

    @abc.abstractmethod
    def predict(self, features, task: str | None = None) -> int: ...

    def predict_distribution(self, features, class_count: int, task: str | None = None) -> np.ndarray:
        """Class distribution used for loss computation; one-hot by default."""
        out = np.zeros(class_count)
        out[self.predict(features, task)] = 1.0
        return out

    def check_compatible(self, data: Dataset) -> None:
        """Raise IncompatibleInputError if ``data`` cannot be fed to this learner."""

    @abc.abstractmethod
    def fingerprint(self) -> Digest: ...

    @abc.abstractmethod
    def reset(self) -> None: ...


@dataclass
class EvalReport:
    accuracy: float
    mean_loss: float
    confusion: np.ndarray
    n: int
    predictions: tuple = ()

    def __post_init__(self):
        assert int(self.confusion.sum()) == self.n


def evaluate(learner: Learner, data: Dataset, loss: LossFunction | None = None,
             task: str | None = None) -> EvalReport:
    """Score ``learner`` on ``data`` without touching its state.

    Rows of the confusion matrix are true classes, columns predictions.
    """
    loss = loss or LossFunction()
    if len(data) == 0:
        raise ContractViolation("cannot evaluate on an empty dataset")
    learner.check_compatible(data)
    k = data.class_count
    confusion = np.zeros((k, k), dtype=np.int64)
    preds = []
    total = 0.0
    for x, y in zip(data.X, data.y):
        dist = learner.predict_distribution(x, k, task)
        pred = argmax_low(dist)
        preds.append(pred)
        confusion[int(y), pred] += 1
        total += loss_eval(loss, dist, int(y))
    n = len(data)
    correct = int(np.trace(confusion))
    return EvalReport(
        accuracy=correct / n,
        mean_loss=total / n,
        confusion=confusion,
        n=n,
        predictions=tuple(preds),
    )


def as_features(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ContractViolation("features must be a non-empty 1-D vector")
    return x

