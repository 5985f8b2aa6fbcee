"""Testbench for catastrophic forgetting and overfitting.

Weighted-mapping learners trained by loss minimisation are run side by side
with a prototype-based representation learner through sequential-task and
repeated-epoch protocols, plus small closed-form witnesses.
"""

from .core import (
    Dataset,
    Digest,
    EpochLog,
    EpochRecord,
    EvalReport,
    Learner,
    LossFunction,
    LossKind,
    Sample,
    Task,
    evaluate,
    loss_eval,
)
from .data import BlobSpec, SplitSpec, gen_blobs, load_any, load_pima, load_wbc, split
from .errors import (
    ContractViolation,
    ForgetbenchError,
    IncompatibleInputError,
    LoadError,
    NoCompatibleKnowledgeError,
    TrainingDivergedError,
)
from .protocols import (
    ForgettingReport,
    OverfitReport,
    WitnessReport,
    least_squares_weight,
    make_conflicting_tasks,
    run_forgetting,
    run_overfitting,
    run_witnesses,
    witness_theorem_forgetting,
    witness_theorem_overfitting,
    witness_theorem_same_problem,
)
from .representation import Representation, RepresentationLearner, RepresentationStore
from .weighted import (
    LinearRegressor,
    LogisticLearner,
    LogisticModel,
    MlpLearner,
    MlpModel,
    PolynomialRegressor,
    SgdConfig,
    forward,
    gradient_check,
    train,
)

__version__ = "0.1.0"
