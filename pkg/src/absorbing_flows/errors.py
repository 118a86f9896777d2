"""Exception hierarchy shared by every module in the package."""


class FlowError(ValueError):
    """Base class for all validation and construction failures."""


class DimensionMismatch(FlowError):
    pass


class NotHermitian(FlowError):
    pass


class NoConvergence(FlowError, ArithmeticError):
    pass


class EmptyInput(FlowError):
    pass


class NotAState(FlowError):
    pass


class NotUnitary(FlowError):
    pass


class NotADensity(FlowError):
    pass


class ScalarInput(FlowError):
    pass


class NotOrthonormal(FlowError):
    pass


class NotCompletelyPositive(FlowError):
    pass


class DegenerateState(FlowError):
    pass


class UnbalancedKraus(FlowError):
    pass


class TracialState(FlowError):
    pass


class EpsilonTooLarge(FlowError):
    pass


class NotInvariant(FlowError):
    pass


class NoInvariantState(FlowError):
    pass


class InconsistentVerdict(FlowError):
    """Ergodicity and irreducibility disagree for a generator with a faithful invariant state."""


class IndexOutOfRange(FlowError):
    pass


class ConstructionFailed(FlowError):
    pass


class SchemaError(FlowError):
    pass
