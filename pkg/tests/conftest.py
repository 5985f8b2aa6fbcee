from pathlib import Path

import numpy as np
import pytest

from forgetbench.core import Dataset, Learner, Digest, CanonicalHasher, EpochLog
from forgetbench.data import load_pima, load_wbc

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
WBC_PATH = DATA_DIR / "wdbc.data"
PIMA_PATH = DATA_DIR / "pima-indians-diabetes.csv"


class ConstantLearner(Learner):
    kind = "constant"

    def __init__(self, label=0):
        self.label = label

    def fit(self, train, epochs=1, task=None):
        return EpochLog()

    def predict(self, features, task=None):
        return self.label

    def fingerprint(self):
        return CanonicalHasher("constant").integer(self.label).digest()

    def reset(self):
        pass


@pytest.fixture
def constant_learner():
    return ConstantLearner


@pytest.fixture(scope="session")
def wbc():
    return load_wbc(WBC_PATH)


@pytest.fixture(scope="session")
def pima():
    return load_pima(PIMA_PATH)


def balanced(n_per_class=5, dim=2, seed=0, name="toy"):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(2 * n_per_class, dim))
    y = np.repeat([0, 1], n_per_class)
    return Dataset(X, y, 2, name)
