"""Prototype-based world-modelling learner.

The store keeps one *literal* representation per distinct training input
and a set of *abstract* representations (running-mean centroids) that
aggregate nearby literals of the same label. Everything is partitioned by
``task_tag`` and dimension: learning on one task never reads or writes
another task's representations, and representations of different
dimension are never compared.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CanonicalHasher, Dataset, Digest, EpochLog, EpochRecord, Learner, as_features
from .errors import ContractViolation, NoCompatibleKnowledgeError

LITERAL = "literal"
ABSTRACT = "abstract"
DISTANCE = "normalized_euclidean"
STORE_FORMAT = "forgetbench.store"
STORE_VERSION = 1
DEFAULT_TAU = 0.15


@dataclass(frozen=True)
class Representation:
    vector: tuple
    label: int
    task_tag: str
    kind: str = LITERAL
    support: int = 1

    def __post_init__(self):
        if self.kind not in (LITERAL, ABSTRACT):
            raise ContractViolation(f"unknown representation kind {self.kind!r}")
        if not self.vector:
            raise ContractViolation("representation vector must be non-empty")
        if self.support < 1 or (self.kind == LITERAL and self.support != 1):
            raise ContractViolation("literal support is 1; abstract support is >= 1")

    @property
    def dim(self) -> int:
        return len(self.vector)

    def sort_key(self):
        return (self.task_tag, self.kind, self.label, self.vector, self.support)


def distance(a, b) -> float:
    """Euclidean distance scaled by 1/sqrt(dim)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.sqrt(np.sum((a - b) ** 2) / a.size))


def _distances(V: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((V - x) ** 2, axis=1) / x.size)


def _vkey(v: np.ndarray) -> bytes:
    return np.ascontiguousarray(v + 0.0).tobytes()


class _Group:
    """All representations sharing one (task_tag, dim)."""

    def __init__(self, tag, dim):
        self.tag = tag
        self.dim = dim
        self.literals: dict[tuple[int, bytes], np.ndarray] = {}
        # label -> list of [mean vector, support]
        self.abstracts: dict[int, list[list]] = {}
        self._matrix = None

    def invalidate(self):
        self._matrix = None

    def representations(self):
        for (label, _), v in self.literals.items():
            yield Representation(tuple(v.tolist()), label, self.tag, LITERAL, 1)
        for label, items in self.abstracts.items():
            for mean, support in items:
                yield Representation(tuple(mean.tolist()), label, self.tag, ABSTRACT, support)

    def matrix(self):
        """(vectors, labels, is_literal) in canonical order; cached until mutated."""
        if self._matrix is None:
            reps = sorted(self.representations(), key=Representation.sort_key)
            V = np.array([r.vector for r in reps], dtype=np.float64).reshape(len(reps), self.dim)
            labels = np.array([r.label for r in reps], dtype=np.int64)
            literal = np.array([r.kind == LITERAL for r in reps], dtype=bool)
            self._matrix = (V, labels, literal)
        return self._matrix


class RepresentationStore:
    """Additive store of literal and abstract representations.

    ``merge_threshold`` (tau) is the normalized distance below which an
    input joins an existing abstract representation, and below which two
    abstract representations are merged during compaction.
    """

    def __init__(self, merge_threshold: float = DEFAULT_TAU):
        if not 0.0 <= merge_threshold < 1.0:
            raise ContractViolation("merge_threshold must lie in [0, 1)")
        self.merge_threshold = float(merge_threshold)
        self._groups: dict[tuple[str, int], _Group] = {}

    def __len__(self):
        return sum(len(g.literals) + sum(len(a) for a in g.abstracts.values())
                   for g in self._groups.values())

    @property
    def representations(self) -> list[Representation]:
        reps = [r for g in self._groups.values() for r in g.representations()]
        return sorted(reps, key=Representation.sort_key)

    @property
    def task_tags(self) -> list[str]:
        return sorted({tag for tag, _ in self._groups})

    def ingest(self, features, label: int, task_tag: str) -> bool:
        """Add one labelled input; return whether the store changed."""
        x = as_features(features)
        if not np.all(np.isfinite(x)):
            raise ContractViolation("features must be finite")
        if x.min() < 0.0 or x.max() > 1.0:
            raise ContractViolation("features must be normalized to [0, 1]")
        label = int(label)
        if label < 0:
            raise ContractViolation("labels are non-negative class ids")
        x = x + 0.0
        group = self._groups.get((task_tag, x.size))
        if group is None:
            group = self._groups[(task_tag, x.size)] = _Group(task_tag, x.size)
        key = (label, _vkey(x))
        if key in group.literals:
            return False
        group.literals[key] = x.copy()

        items = group.abstracts.setdefault(label, [])
        best = None
        if items:
            d = _distances(np.array([it[0] for it in items]), x)
            hits = np.flatnonzero((d < self.merge_threshold) & (d == d.min()))
            if hits.size:
                best = min((items[i] for i in hits), key=lambda it: tuple(it[0].tolist()))
        if best is None:
            items.append([x.copy(), 1])
        else:
            best[1] += 1
            best[0] = best[0] + (x - best[0]) / best[1]
        group.invalidate()
        return True

    def compact(self, task_tag: str | None = None) -> bool:
        """Merge abstract representations closer than tau until none remain.

        Only groups of ``task_tag`` are touched when it is given. Returns
        whether anything was merged.
        """
        merged = False
        for (tag, _), group in sorted(self._groups.items()):
            if task_tag is not None and tag != task_tag:
                continue
            for label in sorted(group.abstracts):
                if self._compact_items(group.abstracts[label]):
                    merged = True
                    group.invalidate()
        return merged

    def _compact_items(self, items: list[list]) -> bool:
        if len(items) < 2 or self.merge_threshold == 0.0:
            return False
        items.sort(key=lambda it: tuple(it[0].tolist()))
        merged = False
        while len(items) > 1:
            M = np.array([it[0] for it in items])
            D = np.sqrt(((M[:, None, :] - M[None, :, :]) ** 2).sum(axis=2) / M.shape[1])
            D[np.tril_indices(len(items))] = np.inf
            flat = int(np.argmin(D))
            i, j = divmod(flat, len(items))
            if not D[i, j] < self.merge_threshold:
                break
            (mi, si), (mj, sj) = items[i], items[j]
            items[i] = [(si * mi + sj * mj) / (si + sj), si + sj]
            del items[j]
            items.sort(key=lambda it: tuple(it[0].tolist()))
            merged = True
        return merged

    def _candidate_groups(self, dim, task_tag):
        return [g for (tag, d), g in sorted(self._groups.items())
                if d == dim and (task_tag is None or tag == task_tag)]

    def knows(self, dim: int, task_tag: str | None = None) -> bool:
        return bool(self._candidate_groups(dim, task_tag))

    def nearest(self, features, task_tag: str | None = None):
        """(label, task_tag, distance, kind) of the nearest representation.

        Ties are broken by distance, then literal before abstract, then
        lower label, then task tag.
        """
        x = as_features(features)
        groups = self._candidate_groups(x.size, task_tag)
        if not groups:
            scope = f" for task {task_tag!r}" if task_tag is not None else ""
            raise NoCompatibleKnowledgeError(f"no {x.size}-dimensional knowledge{scope}")
        best = None
        for g in groups:
            V, labels, literal = g.matrix()
            d = _distances(V, x)
            m = d.min()
            for idx in np.flatnonzero(d == m):
                cand = (float(m), 0 if literal[idx] else 1, int(labels[idx]), g.tag)
                if best is None or cand < best:
                    best = cand
        dist, kind, label, tag = best
        return label, tag, dist, LITERAL if kind == 0 else ABSTRACT

    def predict(self, features, task_tag: str | None = None) -> tuple[int, str]:
        label, tag, _, _ = self.nearest(features, task_tag)
        return label, tag

    def fit(self, train: Dataset, task_tag: str, epochs: int = 1) -> EpochLog:
        """Ingest ``train`` ``epochs`` times, compacting after each pass."""
        if epochs < 1:
            raise ContractViolation("epochs must be >= 1")
        log = EpochLog()
        for epoch in range(1, epochs + 1):
            changed = False
            for x, y in zip(train.X, train.y):
                changed |= self.ingest(x, int(y), task_tag)
            changed |= self.compact(task_tag)
            log.records.append(EpochRecord(epoch, changed))
        return log

    def fingerprint(self) -> Digest:
        reps = self.representations
        h = CanonicalHasher(f"{STORE_FORMAT}.v{STORE_VERSION}").text(DISTANCE).integer(len(reps))
        for r in reps:
            h.text(r.task_tag).text(r.kind).integer(r.label).integer(r.support)
            h.integer(r.dim).floats(r.vector)
        return h.digest()

    def to_dict(self) -> dict:
        return {
            "format": STORE_FORMAT,
            "version": STORE_VERSION,
            "distance": DISTANCE,
            "merge_threshold": self.merge_threshold,
            "representations": [
                {"task_tag": r.task_tag, "kind": r.kind, "label": r.label,
                 "support": r.support, "vector": list(r.vector)}
                for r in self.representations
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RepresentationStore":
        if d.get("format") != STORE_FORMAT or d.get("version") != STORE_VERSION:
            raise ContractViolation("not a forgetbench store file of a supported version")
        store = cls(d["merge_threshold"])
        for item in d["representations"]:
            rep = Representation(tuple(float(v) for v in item["vector"]), int(item["label"]),
                                 item["task_tag"], item["kind"], int(item["support"]))
            store._insert(rep)
        return store

    def _insert(self, rep: Representation):
        v = np.array(rep.vector, dtype=np.float64)
        group = self._groups.get((rep.task_tag, rep.dim))
        if group is None:
            group = self._groups[(rep.task_tag, rep.dim)] = _Group(rep.task_tag, rep.dim)
        if rep.kind == LITERAL:
            group.literals[(rep.label, _vkey(v))] = v
        else:
            group.abstracts.setdefault(rep.label, []).append([v, rep.support])
        group.invalidate()

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "RepresentationStore":
        return cls.from_dict(json.loads(Path(path).read_text()))


class RepresentationLearner(Learner):
    """Learner-contract adapter over :class:`RepresentationStore`.

    The task tag defaults to the training dataset's name.
    """

    kind = "representation"

    def __init__(self, merge_threshold: float = DEFAULT_TAU):
        self.merge_threshold = merge_threshold
        self.reset()

    def reset(self):
        self.store = RepresentationStore(self.merge_threshold)

    def fit(self, train: Dataset, epochs: int = 1, task: str | None = None) -> EpochLog:
        return self.store.fit(train, train.name if task is None else task, epochs)

    def predict(self, features, task=None) -> int:
        return self.store.predict(features, task)[0]

    def check_compatible(self, data: Dataset):
        if not self.store.knows(data.feature_dim):
            raise NoCompatibleKnowledgeError(f"no {data.feature_dim}-dimensional knowledge")

    def fingerprint(self) -> Digest:
        return self.store.fingerprint()
