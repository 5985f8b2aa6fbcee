"""Weighted mappings trained by loss minimisation.

Two families live here:

* softmax classifiers (``LogisticModel``, ``MlpModel``) trained with plain
  mini-batch SGD on cross-entropy, and
* linear least-squares regressors without a softmax (``LinearRegressor``,
  ``PolynomialRegressor``) used by the small theorem witnesses, where exact
  closed-form answers exist.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import (
    CanonicalHasher,
    Dataset,
    Digest,
    EpochLog,
    EpochRecord,
    Learner,
    LossFunction,
    LossKind,
    PROB_FLOOR,
    argmax_low,
    as_features,
)
from .errors import ContractViolation, IncompatibleInputError, TrainingDivergedError

MODEL_FORMAT = "forgetbench.mlp"
MODEL_VERSION = 1
ACTIVATIONS = ("tanh", "relu")
GRADCHECK_STEP = 1e-5


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _act(name, z):
    return np.tanh(z) if name == "tanh" else np.maximum(z, 0.0)


def _act_grad(name, z, a):
    return 1.0 - a * a if name == "tanh" else (z > 0.0).astype(z.dtype)


class MlpModel:
    """Fully connected network with a softmax output layer.

    ``layers`` is a list of ``(weights, bias)`` pairs, weights shaped
    ``(fan_in, fan_out)``. Hidden layers use ``activation``.
    """

    def __init__(self, layers, activation="tanh"):
        if activation not in ACTIVATIONS:
            raise ContractViolation(f"unknown activation {activation!r}")
        if not layers:
            raise ContractViolation("model needs at least one layer")
        self.activation = activation
        self.layers = [(np.array(W, dtype=np.float64), np.array(b, dtype=np.float64)) for W, b in layers]
        for i, (W, b) in enumerate(self.layers):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ContractViolation(f"layer {i}: bias must match weight columns")
            if i and W.shape[0] != self.layers[i - 1][0].shape[1]:
                raise ContractViolation(f"layer {i}: shape does not compose with layer {i - 1}")
        if self.class_count < 2:
            raise ContractViolation("output layer needs >= 2 classes")

    @classmethod
    def initialize(cls, input_dim, class_count, hidden_sizes=(16,), activation="tanh", seed=0):
        # Glorot-uniform weights, zero biases
        rng = np.random.default_rng(seed)
        sizes = [input_dim, *hidden_sizes, class_count]
        layers = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            r = np.sqrt(6.0 / (fan_in + fan_out))
            layers.append((rng.uniform(-r, r, size=(fan_in, fan_out)), np.zeros(fan_out)))
        return cls(layers, activation)

    @classmethod
    def zeros(cls, input_dim, class_count, hidden_sizes=(), activation="tanh"):
        sizes = [input_dim, *hidden_sizes, class_count]
        return cls([(np.zeros((a, b)), np.zeros(b)) for a, b in zip(sizes[:-1], sizes[1:])], activation)

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def class_count(self) -> int:
        return self.layers[-1][0].shape[1]

    @property
    def hidden_sizes(self) -> tuple:
        return tuple(W.shape[1] for W, _ in self.layers[:-1])

    def copy(self):
        return copy.deepcopy(self)

    def _check_input(self, X):
        if X.shape[-1] != self.input_dim:
            raise IncompatibleInputError(
                f"model expects {self.input_dim} features, got {X.shape[-1]}")

    def forward(self, features) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        self._check_input(X)
        return softmax(self._logits(X))

    def _logits(self, X):
        h = X
        for W, b in self.layers[:-1]:
            h = _act(self.activation, h @ W + b)
        W, b = self.layers[-1]
        return h @ W + b

    def loss_and_gradients(self, X, y, loss: LossFunction | LossKind = LossKind.CROSS_ENTROPY):
        """Mean loss over the batch and its gradient for every layer."""
        kind = loss.kind if isinstance(loss, LossFunction) else LossKind(loss)
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = np.atleast_1d(np.asarray(y, dtype=np.int64))
        self._check_input(X)
        n = X.shape[0]
        pre, post = [], [X]
        h = X
        for W, b in self.layers[:-1]:
            z = h @ W + b
            h = _act(self.activation, z)
            pre.append(z)
            post.append(h)
        W, b = self.layers[-1]
        p = softmax(h @ W + b)
        target = np.zeros_like(p)
        target[np.arange(n), y] = 1.0

        if kind is LossKind.CROSS_ENTROPY:
            value = float(-np.log(np.clip(p[np.arange(n), y], PROB_FLOOR, 1.0)).mean())
            dz = (p - target) / n
        elif kind is LossKind.MEAN_SQUARED_ERROR:
            k = p.shape[1]
            value = float(((p - target) ** 2).mean(axis=1).mean())
            g = 2.0 * (p - target) / (k * n)
            dz = p * (g - (p * g).sum(axis=1, keepdims=True))
        else:
            raise ContractViolation(f"{kind.value} loss has no gradient")

        grads = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            W, _ = self.layers[i]
            grads[i] = (post[i].T @ dz, dz.sum(axis=0))
            if i:
                dh = dz @ W.T
                dz = dh * _act_grad(self.activation, pre[i - 1], post[i])
        return value, grads

    def parameters(self) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in self.layers])

    def set_parameters(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        pos = 0
        for W, b in self.layers:
            W[...] = flat[pos:pos + W.size].reshape(W.shape)
            pos += W.size
            b[...] = flat[pos:pos + b.size]
            pos += b.size
        if pos != flat.size:
            raise ContractViolation("parameter vector has the wrong length")

    def fingerprint(self) -> Digest:
        h = CanonicalHasher("forgetbench.mlp.v1").text(self.activation).integer(len(self.layers))
        for W, b in self.layers:
            h.integer(W.shape[0]).integer(W.shape[1]).floats(W).floats(b)
        return h.digest()

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "activation": self.activation,
            "layers": [{"weights": W.tolist(), "bias": b.tolist()} for W, b in self.layers],
        }

    @classmethod
    def from_dict(cls, d: dict):
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ContractViolation("not a forgetbench model file of a supported version")
        layers = []
        for layer in d["layers"]:
            W = np.array(layer["weights"], dtype=np.float64)
            layers.append((W.reshape(len(layer["weights"]), -1), np.array(layer["bias"], dtype=np.float64)))
        if len(layers) == 1:
            return LogisticModel(*layers[0])
        return MlpModel(layers, d["activation"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


class LogisticModel(MlpModel):
    """Multinomial logistic regression: one affine layer plus softmax."""

    def __init__(self, weights, bias):
        super().__init__([(weights, bias)], activation="tanh")

    @classmethod
    def initialize(cls, input_dim, class_count, seed=0):
        W, b = MlpModel.initialize(input_dim, class_count, (), seed=seed).layers[0]
        return cls(W, b)

    @classmethod
    def zeros(cls, input_dim, class_count):
        return cls(np.zeros((input_dim, class_count)), np.zeros(class_count))

    @property
    def weights(self):
        return self.layers[0][0]

    @property
    def bias(self):
        return self.layers[0][1]


def forward(model: MlpModel, features) -> np.ndarray:
    return model.forward(features)


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.1
    epochs: int = 10
    batch_size: int = 16
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ContractViolation("learning_rate must be positive")
        if self.epochs < 1:
            raise ContractViolation("epochs must be >= 1")
        if self.batch_size < 1:
            raise ContractViolation("batch_size must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ContractViolation("seed must fit in 64 unsigned bits")


def train(model: MlpModel, data: Dataset, loss: LossFunction | None = None,
          cfg: SgdConfig | None = None) -> EpochLog:
    """Plain SGD on ``data``; updates ``model`` in place.

    Each epoch visits every sample once, in a seeded shuffled order when
    ``cfg.shuffle`` is set. The recorded loss and accuracy are measured on
    the full training set after the epoch.
    """
    loss = loss or LossFunction()
    cfg = cfg or SgdConfig()
    if loss.kind is not LossKind.CROSS_ENTROPY:
        raise ContractViolation("SGD training is defined for cross-entropy loss only")
    if data.feature_dim != model.input_dim or data.class_count != model.class_count:
        raise IncompatibleInputError(
            f"model is {model.input_dim}->{model.class_count}, "
            f"data is {data.feature_dim}->{data.class_count}")
    n = len(data)
    if cfg.batch_size > n:
        raise ContractViolation(f"batch_size {cfg.batch_size} exceeds training size {n}")

    rng = np.random.default_rng(cfg.seed)
    X, y = data.X, data.y
    log = EpochLog()
    for epoch in range(1, cfg.epochs + 1):
        before = model.parameters()
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            with np.errstate(over="ignore", invalid="ignore"):  # checked below
                value, grads = model.loss_and_gradients(X[idx], y[idx], loss)
                if not np.isfinite(value):
                    raise TrainingDivergedError(epoch)
                for (W, b), (dW, db) in zip(model.layers, grads):
                    W -= cfg.learning_rate * dW
                    b -= cfg.learning_rate * db
        after = model.parameters()
        if not np.all(np.isfinite(after)):
            raise TrainingDivergedError(epoch)
        with np.errstate(over="ignore", invalid="ignore"):
            value, _ = model.loss_and_gradients(X, y, loss)
        if not np.isfinite(value):
            raise TrainingDivergedError(epoch)
        acc = float(np.mean(np.argmax(model._logits(X), axis=1) == y))
        log.records.append(EpochRecord(epoch, not np.array_equal(before, after), value, acc))
    return log


train_fn = train  # MlpLearner.fit's ``train`` argument shadows the function


def gradient_check(model: MlpModel, sample, loss: LossFunction | None = None,
                   step: float = GRADCHECK_STEP) -> float:
    """Largest relative gap between backprop and central-difference gradients.

    ``sample`` is a ``(features, label)`` pair or a :class:`Sample`.
    The gap for each parameter is ``|a - n| / max(1, |a| + |n|)``.
    """
    loss = loss or LossFunction()
    x, y = (sample.features, sample.label) if hasattr(sample, "features") else sample
    x = as_features(x)
    _, grads = model.loss_and_gradients(x, [y], loss)
    analytic = np.concatenate([np.concatenate([dW.ravel(), db]) for dW, db in grads])

    probe = model.copy()
    theta = model.parameters()
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        t = theta.copy()
        t[i] += step
        probe.set_parameters(t)
        up, _ = probe.loss_and_gradients(x, [y], loss)
        t[i] -= 2 * step
        probe.set_parameters(t)
        down, _ = probe.loss_and_gradients(x, [y], loss)
        numeric[i] = (up - down) / (2 * step)
    gap = np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic) + np.abs(numeric))
    return float(gap.max())


class LinearRegressor:
    """``x -> x . w`` fitted to squared error by full-batch gradient descent.

    No bias and no softmax, so the least-squares optimum is available in
    closed form for checking.
    """

    def __init__(self, dim=1, weights=None):
        self.w = np.zeros(dim) if weights is None else np.array(weights, dtype=np.float64).ravel()
        self.steps_taken = 0

    @staticmethod
    def _design(xs):
        X = np.asarray(xs, dtype=np.float64)
        return X.reshape(-1, 1) if X.ndim < 2 else X

    def predict(self, xs):
        return self._design(xs) @ self.w

    def mse(self, xs, ys):
        r = self.predict(xs) - np.asarray(ys, dtype=np.float64)
        return float(np.mean(r * r))

    def fit(self, xs, ys, learning_rate=0.1, tol=1e-10, max_steps=100_000) -> int:
        X = self._design(xs)
        y = np.asarray(ys, dtype=np.float64).ravel()
        if X.shape[0] == 0 or X.shape[0] != y.size:
            raise ContractViolation("need matching, non-empty inputs and targets")
        if X.shape[1] != self.w.size:
            raise IncompatibleInputError(f"regressor has {self.w.size} inputs, got {X.shape[1]}")
        n = y.size
        for step in range(1, max_steps + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                grad = 2.0 * X.T @ (X @ self.w - y) / n
                delta = learning_rate * grad
                self.w = self.w - delta
            if not np.all(np.isfinite(self.w)):
                raise TrainingDivergedError(step, f"regression diverged at step {step}")
            if np.max(np.abs(delta)) < tol:
                break
        self.steps_taken = step
        return step


def vandermonde(x, degree):
    return np.vander(np.asarray(x, dtype=np.float64).ravel(), degree + 1, increasing=True)


class PolynomialRegressor:
    """Least-squares polynomial of fixed degree.

    When there are fewer points than coefficients the minimum-norm
    interpolant is returned (SVD-based ``lstsq``).
    """

    def __init__(self, degree):
        if degree < 0:
            raise ContractViolation("degree must be >= 0")
        self.degree = degree
        self.coef = None

    def fit(self, x, y):
        A = vandermonde(x, self.degree)
        self.coef, *_ = np.linalg.lstsq(A, np.asarray(y, dtype=np.float64), rcond=None)
        return self

    def predict(self, x):
        if self.coef is None:
            raise ContractViolation("polynomial is not fitted")
        return vandermonde(x, self.degree) @ self.coef

    def mse(self, x, y):
        r = self.predict(x) - np.asarray(y, dtype=np.float64)
        return float(np.mean(r * r))


class MlpLearner(Learner):
    """Learner-contract wrapper around :class:`MlpModel` and :func:`train`.

    The network is built lazily from the first training set's shape, so a
    single factory works for any task.
    """

    kind = "mlp"
    fixed_input = True

    def __init__(self, hidden_sizes=(16,), activation="tanh", config: SgdConfig | None = None,
                 init_seed: int | None = None):
        self.hidden_sizes = tuple(hidden_sizes)
        self.activation = activation
        self.config = config or SgdConfig(learning_rate=0.5, batch_size=16, seed=0)
        self.init_seed = self.config.seed if init_seed is None else init_seed
        self.reset()

    def reset(self):
        self.model = None
        self._epochs_seen = 0

    def _build(self, data: Dataset):
        return MlpModel.initialize(data.feature_dim, data.class_count, self.hidden_sizes,
                                   self.activation, self.init_seed)

    def check_compatible(self, data: Dataset):
        if self.model is None:
            raise ContractViolation(f"{self.kind} learner has not been fitted")
        if data.feature_dim != self.model.input_dim or data.class_count != self.model.class_count:
            raise IncompatibleInputError(
                f"{self.kind} learner was built for {self.model.input_dim} features / "
                f"{self.model.class_count} classes, got {data.feature_dim} / {data.class_count}")

    def fit(self, train: Dataset, epochs: int = 1, task: str | None = None) -> EpochLog:
        if epochs < 1:
            raise ContractViolation("epochs must be >= 1")
        if self.model is None:
            self.model = self._build(train)
        else:
            self.check_compatible(train)
        batch = min(self.config.batch_size, len(train))
        # a fresh shuffle stream per fit call, still fully determined by the config
        seed = (self.config.seed + self._epochs_seen) % 2**64
        cfg = replace(self.config, epochs=epochs, batch_size=batch, seed=seed)
        log = train_fn(self.model, train, LossFunction(LossKind.CROSS_ENTROPY), cfg)
        for r in log.records:
            r.epoch += self._epochs_seen
        self._epochs_seen += epochs
        return log

    def predict(self, features, task=None) -> int:
        return argmax_low(self.predict_distribution(features, None, task))

    def predict_distribution(self, features, class_count, task=None):
        if self.model is None:
            raise ContractViolation(f"{self.kind} learner has not been fitted")
        p = self.model.forward(as_features(features))
        if class_count is not None and class_count != p.size:
            raise IncompatibleInputError(f"model has {p.size} classes, data has {class_count}")
        return p

    def fingerprint(self) -> Digest:
        if self.model is None:
            return CanonicalHasher(f"forgetbench.{self.kind}.unfitted").digest()
        return self.model.fingerprint()


class LogisticLearner(MlpLearner):
    kind = "logistic"

    def __init__(self, config: SgdConfig | None = None, init_seed: int | None = None):
        super().__init__((), "tanh", config, init_seed)

    def _build(self, data):
        return LogisticModel.initialize(data.feature_dim, data.class_count, self.init_seed)

