"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to its
documented exit statuses (3 data error, 4 numerical failure).
"""


class SasvError(Exception):
    exit_code = 3


class DataError(SasvError, ValueError):
    exit_code = 3


class NumericalError(SasvError, ArithmeticError):
    exit_code = 4


class InvalidConfig(DataError):
    """A cost, prior or settings object violates its invariants."""


class ZeroNormalizer(NumericalError):
    """The cost-weighted prior mass is zero; effective priors are undefined."""


class DegenerateRejectMass(NumericalError):
    """The reject-side prior mass is zero; conditional priors are undefined."""


class UnsupportedSpoofNontarget(DataError):
    """The two-term composition was requested with a nonzero spoof-nontarget prior."""


class EmptyClass(DataError):
    pass


class NonFiniteObjective(NumericalError):
    def __init__(self, params, value):
        super().__init__(f"objective is {value!r} at params {params!r}")
        self.params = params
        self.value = value


class MaxIterations(RuntimeWarning):
    """Warning: the optimizer ran out of iterations before converging."""


class ParseError(DataError):
    def __init__(self, line, reason, path=None):
        where = f"{path}:{line}" if path is not None else f"line {line}"
        super().__init__(f"{where}: {reason}")
        self.line = line
        self.reason = reason
        self.path = path


class DuplicateTrialId(DataError):
    def __init__(self, trial_id, line=None):
        msg = f"duplicate trial id {trial_id!r}"
        if line is not None:
            msg += f" (line {line})"
        super().__init__(msg)
        self.trial_id = trial_id


class EmptyJoin(DataError):
    pass


class ConstantScores(DataError):
    def __init__(self, system):
        super().__init__(f"system {system} has max == min; cannot min-max normalize")
        self.system = system


class TrialMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class ZeroNormAfterNormalization(NumericalError):
    pass
