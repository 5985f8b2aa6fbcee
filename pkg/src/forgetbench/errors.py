"""Exception hierarchy shared across the package."""


class ForgetbenchError(Exception):
    pass


class ContractViolation(ForgetbenchError, ValueError):
    """A precondition on an argument or object state was not met."""


class IncompatibleInputError(ForgetbenchError, ValueError):
    """Input dimension or class count does not match what a model was built for."""


class TrainingDivergedError(ForgetbenchError, ArithmeticError):
    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"training diverged (non-finite loss) at epoch {epoch}")


class NoCompatibleKnowledgeError(ForgetbenchError, LookupError):
    """The learner holds nothing it can compare the query against.

    This is an explicit "I do not know" outcome rather than a guess.
    """


class LoadError(ForgetbenchError, ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
