import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forgetbench.core import Dataset, row_keys
from forgetbench.data import (
    BlobSpec,
    SplitSpec,
    file_sha256,
    gen_blobs,
    load_any,
    load_pima,
    load_wbc,
    pad_task,
    sniff_format,
    split,
)
from forgetbench.errors import ContractViolation, LoadError

from conftest import PIMA_PATH, WBC_PATH, balanced

WBC_SHA256 = "a906fc5c0c27c1ff5abb84df814dd29743c24a7eedd6cac902d2b68a171cf41d"
PIMA_SHA256 = "33e704cdafa8769a75728e4658dcce5bc1da1ce36174603687fe545f46e39394"


def count_labels_by_hand(path, column, mapping):
    counts = {}
    for line in path.read_text().splitlines():
        if line.strip():
            key = mapping[line.split(",")[column].strip()]
            counts[key] = counts.get(key, 0) + 1
    return [counts[0], counts[1]]


def test_vendored_files_match_recorded_digests():
    assert file_sha256(WBC_PATH) == WBC_SHA256
    assert file_sha256(PIMA_PATH) == PIMA_SHA256


def test_wbc_counts(wbc):
    assert len(wbc) == 569 and wbc.feature_dim == 30 and wbc.class_count == 2
    assert wbc.class_counts() == [357, 212]
    assert wbc.class_counts() == count_labels_by_hand(WBC_PATH, 1, {"B": 0, "M": 1})
    assert wbc.provenance["sha256"] == WBC_SHA256


def test_pima_counts(pima):
    assert len(pima) == 768 and pima.feature_dim == 8
    assert pima.class_counts() == [500, 268]
    assert pima.class_counts() == count_labels_by_hand(PIMA_PATH, -1, {"0": 0, "1": 1})


def test_short_row_names_its_line(tmp_path):
    lines = WBC_PATH.read_text().splitlines()[:4]
    lines[2] = "1,M,2.0,3.0,4.0"
    bad = tmp_path / "bad.data"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(LoadError) as exc:
        load_wbc(bad)
    assert exc.value.line == 3
    assert ":3:" in str(exc.value)


def test_unknown_diagnosis_and_bad_number(tmp_path):
    row = WBC_PATH.read_text().splitlines()[0].split(",")
    bad = tmp_path / "x.data"
    bad.write_text(",".join([row[0], "X"] + row[2:]) + "\n")
    with pytest.raises(LoadError):
        load_wbc(bad)
    bad.write_text(",".join(row[:5] + ["abc"] + row[6:]) + "\n")
    with pytest.raises(LoadError):
        load_wbc(bad)


def test_empty_file_is_a_load_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(LoadError):
        load_pima(empty)
    with pytest.raises(LoadError):
        load_wbc(empty)
    with pytest.raises(LoadError):
        load_wbc(tmp_path / "missing.csv")


def test_pima_header_detection(tmp_path):
    header = "Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,DiabetesPedigreeFunction,Age,Outcome\n"
    with_header = tmp_path / "h.csv"
    with_header.write_text(header + PIMA_PATH.read_text())
    a = load_pima(PIMA_PATH)
    b = load_pima(with_header)
    assert a == b


def test_pima_outcome_domain(tmp_path):
    lines = PIMA_PATH.read_text().splitlines()[:3]
    lines[1] = lines[1].rsplit(",", 1)[0] + ",2"
    bad = tmp_path / "p.csv"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(LoadError) as exc:
        load_pima(bad)
    assert exc.value.line == 2


def test_loaders_are_pure(wbc):
    assert load_wbc(WBC_PATH) == wbc
    assert sniff_format(WBC_PATH) == "wbc" and sniff_format(PIMA_PATH) == "pima"
    assert load_any(PIMA_PATH) == load_pima(PIMA_PATH)


def test_split_arithmetic():
    task = split(balanced(5), SplitSpec(0.8, seed=3, normalize=False))
    assert task.train.class_counts() == [4, 4]
    assert task.test.class_counts() == [1, 1]


def test_split_rejects_empty_test_class():
    with pytest.raises(ContractViolation):
        split(balanced(5), SplitSpec(0.999))
    with pytest.raises(ContractViolation):
        SplitSpec(1.0)


def test_split_is_deterministic(wbc):
    a, b = split(wbc, SplitSpec(seed=11)), split(wbc, SplitSpec(seed=11))
    assert a.train == b.train and a.test == b.test
    c = split(wbc, SplitSpec(seed=12))
    assert not c.train == a.train


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(2, 30), st.floats(0.2, 0.8), st.integers(0, 2**63))
def test_split_covers_and_preserves_ratios(n0, n1, frac, seed):
    rng = np.random.default_rng(seed % 1000)
    X = rng.uniform(size=(n0 + n1, 3))
    data = Dataset(X, [0] * n0 + [1] * n1, 2, "d")
    try:
        task = split(data, SplitSpec(frac, seed=seed, normalize=False))
    except ContractViolation:
        cuts = [(round(frac * n), n) for n in (n0, n1)]
        assert any(cut in (0, n) for cut, n in cuts)
        return
    assert len(task.train) + len(task.test) == n0 + n1
    assert not set(row_keys(task.train.X)) & set(row_keys(task.test.X))
    for c, n in enumerate((n0, n1)):
        assert abs(task.train.class_counts()[c] - frac * n) <= 1


def test_duplicate_rows_go_to_train():
    X = [[0.1, 0.1]] * 2 + [[0.2, 0.3], [0.3, 0.2], [0.4, 0.1], [0.1, 0.4]] + \
        [[0.9, 0.9], [0.8, 0.8], [0.7, 0.7], [0.6, 0.9]]
    data = Dataset(X, [0] * 6 + [1] * 4, 2, "dup")
    for seed in range(20):
        task = split(data, SplitSpec(0.5, seed=seed, normalize=False))
        assert len(task.train) + len(task.test) == 10
        in_train = [0.1, 0.1] in task.train.X.tolist()
        in_test = [0.1, 0.1] in task.test.X.tolist()
        assert not (in_train and in_test)
        assert not set(row_keys(task.train.X)) & set(row_keys(task.test.X))


def test_normalization_ranges(wbc):
    task = split(wbc, SplitSpec())
    assert task.train.X.min(axis=0).tolist() == [0.0] * 30
    assert task.train.X.max(axis=0).tolist() == [1.0] * 30
    assert task.test.X.min() >= 0.0 and task.test.X.max() <= 1.0


def test_normalization_uses_train_parameters_only(pima):
    raw = split(pima, SplitSpec(seed=4, normalize=False))
    scaled = split(pima, SplitSpec(seed=4))
    lo, hi = raw.train.X.min(axis=0), raw.train.X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    np.testing.assert_allclose(scaled.train.X, (raw.train.X - lo) / span, atol=1e-15)
    expected_test = np.clip((raw.test.X - lo) / span, 0.0, 1.0)
    assert len(scaled.test) <= len(raw.test)
    kept = {tuple(r) for r in scaled.test.X.tolist()}
    assert kept <= {tuple(r) for r in expected_test.tolist()}


def test_clamped_collisions_that_empty_a_class_are_reported():
    X = [[0.0], [10.0], [5.0], [2.0], [20.0], [-5.0]]
    data = Dataset(X, [0, 1, 0, 1, 0, 1], 2, "n")
    with pytest.raises(ContractViolation, match="coincides"):
        split(data, SplitSpec(0.5, seed=1))


def test_blobs_construction():
    spec = BlobSpec(((0.25, 0.5), (0.75, 0.5)), (0.05, 0.05), (100, 100))
    d = gen_blobs(spec, seed=5)
    assert len(d) == 200 and d.class_counts() == [100, 100]
    assert d.X.min() >= 0 and d.X.max() <= 1
    assert gen_blobs(spec, seed=5) == d
    assert not gen_blobs(spec, seed=6) == d


def test_blobs_zero_spread_sits_on_centers():
    d = gen_blobs(BlobSpec(((0.25, 0.5), (0.75, 0.5)), (0.0, 0.0), (3, 4)), seed=0)
    assert d.X[d.y == 0].tolist() == [[0.25, 0.5]] * 3
    assert d.X[d.y == 1].tolist() == [[0.75, 0.5]] * 4


def test_blob_parameters_validated():
    with pytest.raises(ContractViolation):
        BlobSpec(((0.5, 0.5), (0.2, 0.2)), (-0.1, 0.1), (5, 5))
    with pytest.raises(ContractViolation):
        BlobSpec(((0.5, 0.5), (0.2, 0.2)), (0.1, 0.1), (0, 5))


def test_pad_task_appends_zero_columns(pima):
    task = split(pima, SplitSpec())
    padded = pad_task(task, 30)
    assert padded.feature_dim == 30
    assert np.array_equal(padded.train.X[:, :8], task.train.X)
    assert not padded.train.X[:, 8:].any()
