"""Report envelopes and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .errors import ForgetbenchError

SCHEMA_VERSION = 1

OVERFIT_COLUMNS = ["epoch", "train_acc", "test_acc", "train_loss", "test_loss", "changed"]
FORGETTING_COLUMNS = ["task_a", "task_b", "learner", "acc_a_before", "acc_b", "acc_a_after",
                      "forgetting_delta", "predictions_identical"]
WITNESS_COLUMNS = ["name", "passed", "tolerance"]


class ReportWriteError(ForgetbenchError, OSError):
    pass


def envelope(config: dict, provenance: list, results: dict, seed: int, tolerances: dict) -> dict:
    """Assemble a report in the fixed top-level key order."""
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "dataset_provenance": provenance,
        "results": results,
        "environment": {"seed": seed, "tolerances": tolerances},
    }


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _overfit_rows(section):
    for r in section["records"]:
        yield [r["epoch"], r["train_accuracy"], r["test_accuracy"], r["train_loss"],
               r["test_loss"], str(r["changed"]).lower()]


def _forgetting_rows(sections):
    for s in sections:
        yield [s["task_a"], s["task_b"], s["learner_kind"], s["acc_a_before"], s["acc_b"],
               s["acc_a_after"], s["forgetting_delta"], str(s["predictions_identical"]).lower()]


def _witness_rows(sections):
    for w in sections:
        yield [w["name"], str(w["passed"]).lower(), w["tolerance"]]


def csv_tables(report: dict) -> dict[str, str]:
    """One CSV text per result section present in ``report``."""
    results = report["results"]
    tables = {}
    specs = [
        ("overfitting", OVERFIT_COLUMNS, lambda v: _overfit_rows(v)),
        ("forgetting", FORGETTING_COLUMNS, lambda v: _forgetting_rows(v)),
        ("conflict", FORGETTING_COLUMNS, lambda v: _forgetting_rows(v)),
        ("theorems", WITNESS_COLUMNS, lambda v: _witness_rows(v)),
    ]
    for key, columns, rows in specs:
        if key not in results:
            continue
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows(results[key]):
            w.writerow([repr(c) if isinstance(c, float) else c for c in row])
        tables[key] = buf.getvalue()
    return tables


def emit_report(report: dict, fmt: str, path) -> list[Path]:
    """Write ``report`` to ``path``; returns the files written.

    CSV output with several result sections writes one file per section,
    named ``<stem>.<section>.csv`` next to ``path``.
    """
    path = Path(path)
    if fmt == "json":
        outputs = {path: to_json(report)}
    elif fmt == "csv":
        tables = csv_tables(report)
        if len(tables) == 1:
            outputs = {path: next(iter(tables.values()))}
        else:
            outputs = {path.with_name(f"{path.stem}.{k}.csv"): v for k, v in tables.items()}
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    written = []
    for p, text in outputs.items():
        try:
            with open(p, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ReportWriteError(f"cannot write report to {p}: {exc.strerror or exc}") from None
        written.append(p)
    return written


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())
