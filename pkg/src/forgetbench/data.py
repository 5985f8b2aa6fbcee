"""Dataset loading, splitting, normalization and synthetic generators.

Loaders return raw (unscaled) features. :func:`split` computes min-max
parameters on the training part only and applies them to both parts, so
the resulting :class:`~forgetbench.core.Task` is ready for any learner.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, Task, row_keys
from .errors import ContractViolation, LoadError

WBC_VARIANT = "UCI WDBC (diagnostic, 569x30)"
PIMA_VARIANT = "UCI Pima Indians Diabetes (768x8)"
WBC_LABELS = {"B": 0, "M": 1}

# Row and class counts of the canonical files.
EXPECTED_COUNTS = {
    "wbc": {"samples": 569, "class_counts": [357, 212]},
    "pima": {"samples": 768, "class_counts": [500, 268]},
}


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_rows(path):
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise LoadError(path, None, f"cannot read file ({exc})") from exc
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1)
            if r and any(c.strip() for c in r)]
    if not rows:
        raise LoadError(path, None, "file contains no data rows")
    return path, rows


def _floats(path, lineno, cells):
    try:
        values = [float(c) for c in cells]
    except ValueError as exc:
        raise LoadError(path, lineno, f"unparseable number ({exc})") from None
    if not all(np.isfinite(values)):
        raise LoadError(path, lineno, "non-finite value")
    return values


def load_wbc(path, name: str = "wbc") -> Dataset:
    """Read the UCI ``wdbc.data`` layout: id, diagnosis (M/B), 30 features."""
    path, rows = _read_rows(path)
    X, y = [], []
    for lineno, row in rows:
        if len(row) != 32:
            raise LoadError(path, lineno, f"expected 32 columns, found {len(row)}")
        diagnosis = row[1].strip()
        if diagnosis not in WBC_LABELS:
            raise LoadError(path, lineno, f"unknown diagnosis {diagnosis!r}")
        X.append(_floats(path, lineno, row[2:]))
        y.append(WBC_LABELS[diagnosis])
    return _build(path, X, y, name, WBC_VARIANT)


def _is_header(row) -> bool:
    try:
        [float(c) for c in row]
    except ValueError:
        return True
    return False


def load_pima(path, name: str = "pima") -> Dataset:
    """Read the Pima CSV: 8 numeric features then outcome in {0, 1}.

    A non-numeric first row is treated as a header and skipped.
    """
    path, rows = _read_rows(path)
    if _is_header(rows[0][1]):
        rows = rows[1:]
        if not rows:
            raise LoadError(path, None, "file contains a header but no data rows")
    X, y = [], []
    for lineno, row in rows:
        if len(row) != 9:
            raise LoadError(path, lineno, f"expected 9 columns, found {len(row)}")
        values = _floats(path, lineno, row)
        outcome = values[-1]
        if outcome not in (0.0, 1.0):
            raise LoadError(path, lineno, f"outcome must be 0 or 1, got {row[-1].strip()!r}")
        X.append(values[:-1])
        y.append(int(outcome))
    return _build(path, X, y, name, PIMA_VARIANT)


def _build(path, X, y, name, variant):
    try:
        return Dataset(np.array(X), np.array(y), 2, name,
                       provenance={"name": name, "variant": variant,
                                   "path": str(path), "sha256": file_sha256(path)})
    except ContractViolation as exc:
        raise LoadError(path, None, str(exc)) from None


def sniff_format(path) -> str:
    """Guess ``"wbc"`` or ``"pima"`` from the column count of the first data row."""
    path, rows = _read_rows(path)
    first = rows[1][1] if _is_header(rows[0][1]) and len(rows) > 1 else rows[0][1]
    if len(first) == 32:
        return "wbc"
    if len(first) == 9:
        return "pima"
    raise LoadError(path, rows[0][0], f"unrecognised layout with {len(first)} columns")


def load_any(path, name: str | None = None) -> Dataset:
    fmt = sniff_format(path)
    loader = load_wbc if fmt == "wbc" else load_pima
    return loader(path, name or fmt)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 7
    stratified: bool = True
    normalize: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ContractViolation("train_fraction must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ContractViolation("seed must fit in 64 unsigned bits")


def minmax_params(X: np.ndarray):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    # constant columns map to 0
    return lo, np.where(span > 0, span, 1.0)


def apply_minmax(X: np.ndarray, lo, span) -> np.ndarray:
    return np.clip((X - lo) / span, 0.0, 1.0)


def split(dataset: Dataset, spec: SplitSpec | None = None, name: str | None = None) -> Task:
    """Seeded shuffle-then-cut into train and test parts.

    With ``stratified`` each class is cut separately at
    ``round(train_fraction * class_size)``. Test samples whose features
    duplicate a training sample are moved to train.
    """
    spec = spec or SplitSpec()
    rng = np.random.default_rng(spec.seed)
    y = dataset.y
    if spec.stratified:
        train_idx, test_idx = [], []
        for c in range(dataset.class_count):
            members = rng.permutation(np.flatnonzero(y == c))
            cut = int(round(spec.train_fraction * members.size))
            train_idx.extend(members[:cut].tolist())
            test_idx.extend(members[cut:].tolist())
    else:
        order = rng.permutation(len(dataset))
        cut = int(round(spec.train_fraction * len(dataset)))
        train_idx, test_idx = order[:cut].tolist(), order[cut:].tolist()

    seen = set(row_keys(dataset.X[train_idx])) if train_idx else set()
    keys = row_keys(dataset.X)
    dupes = [i for i in test_idx if keys[i] in seen]
    if dupes:
        train_idx.extend(dupes)
        test_idx = [i for i in test_idx if keys[i] not in seen]
    train_idx, test_idx = sorted(train_idx), sorted(test_idx)

    for part, idx in (("train", train_idx), ("test", test_idx)):
        present = set(y[idx].tolist())
        if len(present) < dataset.class_count:
            raise ContractViolation(
                f"split of {dataset.name!r} at fraction {spec.train_fraction} "
                f"leaves a class empty in the {part} part")

    Xtr, Xte = dataset.X[train_idx], dataset.X[test_idx]
    if spec.normalize:
        lo, span = minmax_params(Xtr)
        Xtr, Xte = apply_minmax(Xtr, lo, span), apply_minmax(Xte, lo, span)
    name = name or dataset.name
    prov = dict(dataset.provenance)
    train = Dataset(Xtr, y[train_idx], dataset.class_count, name, provenance=prov)
    test = Dataset(Xte, y[test_idx], dataset.class_count, name, provenance=prov)
    # scaling can collapse distinct raw rows onto one point
    test = _drop_overlap(train, test)
    return Task(name, train, test, dataset.class_count)


def _drop_overlap(train: Dataset, test: Dataset) -> Dataset:
    seen = set(row_keys(train.X))
    keep = [i for i, k in enumerate(row_keys(test.X)) if k not in seen]
    if len(keep) == len(test):
        return test
    if len(set(test.y[keep].tolist())) < test.class_count:
        raise ContractViolation(
            f"split of {test.name!r}: after scaling, every test sample of some class "
            "coincides with a training sample")
    return Dataset(test.X[keep], test.y[keep], test.class_count, test.name, provenance=test.provenance)


@dataclass(frozen=True)
class BlobSpec:
    centers: tuple = ((0.25, 0.5), (0.75, 0.5))
    spreads: tuple = (0.05, 0.05)
    counts: tuple = (100, 100)

    def __post_init__(self):
        if not (len(self.centers) == len(self.spreads) == len(self.counts)) or not self.centers:
            raise ContractViolation("centers, spreads and counts must have equal, non-zero length")
        if any(s < 0 for s in self.spreads):
            raise ContractViolation("spreads must be non-negative")
        if any(c <= 0 for c in self.counts):
            raise ContractViolation("counts must be positive")


def gen_blobs(spec: BlobSpec | None = None, seed: int = 0, name: str = "blobs",
              labeler=None) -> Dataset:
    """Isotropic Gaussian blobs clipped to the unit box.

    Points are labelled by blob index unless ``labeler`` (a function from an
    ``(n, dim)`` array to integer labels) is given.
    """
    spec = spec or BlobSpec()
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for k, (center, sigma, count) in enumerate(zip(spec.centers, spec.spreads, spec.counts)):
        c = np.asarray(center, dtype=np.float64)
        pts.append(np.clip(c + sigma * rng.standard_normal((count, c.size)), 0.0, 1.0))
        labels.append(np.full(count, k))
    X = np.vstack(pts)
    y = np.concatenate(labels) if labeler is None else np.asarray(labeler(X), dtype=np.int64)
    class_count = max(2, int(y.max()) + 1)
    return Dataset(X, y, class_count, name, provenance={"name": name, "variant": "synthetic blobs",
                                                       "seed": int(seed)})


def pad_dataset(data: Dataset, dim: int) -> Dataset:
    """Zero-pad features on the right up to ``dim`` columns."""
    if dim < data.feature_dim:
        raise ContractViolation("cannot pad to fewer columns")
    X = np.hstack([data.X, np.zeros((len(data), dim - data.feature_dim))])
    return Dataset(X, data.y, data.class_count, data.name, provenance=data.provenance)


def pad_task(task: Task, dim: int) -> Task:
    return Task(task.name, pad_dataset(task.train, dim), pad_dataset(task.test, dim), task.class_count)
