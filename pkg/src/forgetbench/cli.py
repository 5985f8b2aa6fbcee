"""Command-line entry point.

Examples::

    forgetbench forgetting --learner representation \\
        --task-a data/wdbc.data --task-b data/pima-indians-diabetes.csv --out r.json
    forgetbench overfitting --dataset data/wdbc.data --format csv --out curve.csv
    forgetbench theorems --out w.json --check
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from .data import EXPECTED_COUNTS, SplitSpec, load_any, sniff_format, split
from .errors import ForgetbenchError, IncompatibleInputError
from .protocols import (
    MSE_RTOL,
    ORACLE_TOL,
    WITNESS_TOL,
    dataset_counts,
    make_conflicting_tasks,
    run_forgetting,
    run_overfitting,
    run_witnesses,
)
from .reporting import emit_report, envelope
from .representation import DEFAULT_TAU, RepresentationLearner
from .weighted import LogisticLearner, MlpLearner, SgdConfig

# Test accuracies reported for the published two-task run.
PUBLISHED_ACCURACY = {"wbc": 0.9532, "pima": 0.6970}
PUBLISHED_STABLE_EPOCH = 5
CONFLICT_MIN_DELTA = 0.2
CONFLICT_MIN_ACC_B = 0.9

COMMANDS = ("forgetting", "overfitting", "theorems", "all")
LEARNERS = ("representation", "logistic", "mlp")


class UsageError(ForgetbenchError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="forgetbench",
        description="Run forgetting / overfitting protocols and theorem witnesses.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--learner", choices=LEARNERS, default="representation")
    p.add_argument("--task-a", help="first task CSV (WDBC or Pima layout)")
    p.add_argument("--task-b", help="second task CSV (WDBC or Pima layout)")
    p.add_argument("--dataset", help="dataset CSV for overfitting (defaults to --task-a)")
    p.add_argument("--conflicting", action="store_true",
                   help="forgetting on the synthetic conflicting 2-D task pair instead of files")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--split", type=float, default=0.7, help="train fraction")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="representation merge threshold")
    p.add_argument("--lr", type=float, default=0.5, help="SGD learning rate (weighted learners)")
    p.add_argument("--batch-size", type=int, default=16, help="SGD batch size (weighted learners)")
    p.add_argument("--pad", action="store_true", help="zero-pad mixed-dimension tasks for weighted learners")
    p.add_argument("--check", action="store_true", help="exit 1 if any acceptance assertion fails")
    p.add_argument("--out", required=True, help="report path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _validate(args):
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must fit in 64 unsigned bits")
    if not 0.0 < args.split < 1.0:
        raise UsageError("--split must lie in (0, 1)")
    if args.epochs < 1:
        raise UsageError("--epochs must be >= 1")
    if not 0.0 <= args.tau < 1.0:
        raise UsageError("--tau must lie in [0, 1)")
    if not args.lr > 0 or args.batch_size < 1:
        raise UsageError("--lr must be positive and --batch-size >= 1")
    needs_ab = args.command == "all" or (args.command == "forgetting" and not args.conflicting)
    if needs_ab and not (args.task_a and args.task_b):
        raise UsageError(f"{args.command} needs --task-a and --task-b")
    if args.command == "overfitting" and not (args.dataset or args.task_a):
        raise UsageError("overfitting needs --dataset")
    for flag in ("task_a", "task_b", "dataset"):
        value = getattr(args, flag)
        if value and not Path(value).is_file():
            raise UsageError(f"--{flag.replace('_', '-')}: no such file {value!r}")


def learner_factory(args):
    cfg = SgdConfig(learning_rate=args.lr, batch_size=args.batch_size, seed=args.seed)
    if args.learner == "representation":
        return lambda: RepresentationLearner(args.tau)
    if args.learner == "logistic":
        return lambda: LogisticLearner(cfg)
    return lambda: MlpLearner((16,), "tanh", cfg)


class _Run:
    """Accumulates results, provenance and check outcomes for one invocation."""

    def __init__(self, args):
        self.args = args
        self.provenance = []
        self.results = {}
        self.checks = []
        self._tasks = {}

    def check(self, name, passed, detail=None):
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})

    def task(self, path) -> tuple[str, object]:
        if path in self._tasks:
            return self._tasks[path]
        fmt = sniff_format(path)
        data = load_any(path, fmt)
        counts = dataset_counts(data)
        task = split(data, SplitSpec(self.args.split, self.args.seed))
        self.provenance.append({
            "name": data.name,
            "variant": data.provenance["variant"],
            "sha256": data.provenance["sha256"],
            "sizes": {**counts, "train": len(task.train), "test": len(task.test)},
        })
        expected = EXPECTED_COUNTS[fmt]
        self.check(f"dataset_integrity:{fmt}", counts == expected,
                   {"found": counts, "expected": expected})
        self._tasks[path] = (fmt, task)
        return fmt, task

    def forgetting(self, path_a, path_b):
        fmt_a, a = self.task(path_a)
        fmt_b, b = self.task(path_b)
        rep = run_forgetting(learner_factory(self.args), a, b, self.args.epochs, pad=self.args.pad)
        self.results.setdefault("forgetting", []).append(rep.to_dict())
        self.results.setdefault("accuracy_vs_published", []).extend([
            {"task": a.name, "phase": "after_first_task", "measured": rep.acc_a_before,
             "published": PUBLISHED_ACCURACY[fmt_a]},
            {"task": b.name, "phase": "after_second_task", "measured": rep.acc_b,
             "published": PUBLISHED_ACCURACY[fmt_b]},
            {"task": a.name, "phase": "after_second_task", "measured": rep.acc_a_after,
             "published": PUBLISHED_ACCURACY[fmt_a]},
        ])
        if rep.learner_kind == "representation":
            self.check(f"zero_forgetting:{a.name}->{b.name}",
                       rep.predictions_identical and rep.forgetting_delta == 0.0,
                       {"forgetting_delta": rep.forgetting_delta})

    def conflict(self, learner_name):
        a, b = make_conflicting_tasks(self.args.seed)
        args = argparse.Namespace(**{**vars(self.args), "learner": learner_name})
        rep = run_forgetting(learner_factory(args), a, b, self.args.epochs)
        self.results.setdefault("conflict", []).append(rep.to_dict())
        if rep.learner_kind == "representation":
            self.check("conflict_zero_forgetting:representation",
                       rep.predictions_identical and rep.forgetting_delta == 0.0,
                       {"forgetting_delta": rep.forgetting_delta})
        else:
            self.check(f"conflict_forgetting:{rep.learner_kind}",
                       rep.acc_b >= CONFLICT_MIN_ACC_B and rep.forgetting_delta >= CONFLICT_MIN_DELTA,
                       {"acc_b": rep.acc_b, "forgetting_delta": rep.forgetting_delta})

    def overfitting(self, path):
        _, task = self.task(path)
        learner = learner_factory(self.args)()
        rep = run_overfitting(learner, task, self.args.epochs)
        section = rep.to_dict()
        section["last_changed_epoch"] = rep.last_changed_epoch
        section["published_last_changed_epoch"] = PUBLISHED_STABLE_EPOCH
        self.results["overfitting"] = section
        if rep.learner_kind == "representation":
            self.check("stable_predictions", rep.predictions_constant)
            self.check("changed_flags_monotone", rep.changed_is_monotone)
            self.check("fingerprint_stable_after_last_change", rep.fingerprint_stable)

    def theorems(self):
        witnesses = run_witnesses()
        self.results["theorems"] = [w.to_dict() for w in witnesses]
        for w in witnesses:
            self.check(f"witness:{w.name}", w.passed)

    def report(self):
        config = {k: v for k, v in vars(self.args).items()}
        config["sgd"] = asdict(SgdConfig(self.args.lr, self.args.epochs, self.args.batch_size, self.args.seed))
        results = dict(self.results)
        results["checks"] = self.checks
        results["failed_checks"] = [c["name"] for c in self.checks if not c["passed"]]
        tolerances = {"witness": WITNESS_TOL, "oracle": ORACLE_TOL, "mse_relative": MSE_RTOL,
                      "conflict_min_delta": CONFLICT_MIN_DELTA, "conflict_min_acc_b": CONFLICT_MIN_ACC_B}
        return envelope(config, self.provenance, results, self.args.seed, tolerances)


def run(args) -> dict:
    r = _Run(args)
    cmd = args.command
    if cmd == "forgetting":
        if args.conflicting:
            r.conflict(args.learner)
        else:
            r.forgetting(args.task_a, args.task_b)
    elif cmd == "overfitting":
        r.overfitting(args.dataset or args.task_a)
    elif cmd == "theorems":
        r.theorems()
    else:
        r.forgetting(args.task_a, args.task_b)
        r.forgetting(args.task_b, args.task_a)
        r.overfitting(args.dataset or args.task_a)
        r.conflict("mlp")
        r.conflict("representation")
        r.theorems()
    return r.report()


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
        report = run(args)
        emit_report(report, args.format, args.out)
    except IncompatibleInputError as exc:
        print(f"forgetbench: error: {exc} (use --pad)", file=sys.stderr)
        return 2
    except (ForgetbenchError, OSError) as exc:
        print(f"forgetbench: error: {exc}", file=sys.stderr)
        return 2
    if args.check and report["results"]["failed_checks"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
