"""Exception types shared by the package."""


class FusionError(Exception):
    """Base class for all library errors."""


class GraphError(FusionError):
    pass


class TargetHasNoChildren(GraphError):
    pass


class TargetNotObserved(GraphError):
    pass


class NotAnInterventionNode(GraphError):
    pass


class NotFullSwig(GraphError):
    pass


class UnknownScenario(GraphError):
    pass


class TableError(FusionError):
    pass


class UnknownVariable(TableError):
    pass


class ZeroProbabilityEvent(TableError):
    pass


class TargetNotBinary(TableError):
    pass


class InconsistentTables(TableError):
    pass


class SharedChildrenNonEmpty(TableError):
    pass


class MissingTable(TableError):
    pass


class StrategyError(FusionError):
    pass


class DimensionMismatch(StrategyError):
    pass


class IncompletePovm(StrategyError):
    pass


class UnknownStrategy(StrategyError):
    pass


class ParamOutOfRange(StrategyError):
    pass


class WitnessError(FusionError):
    pass


class UnknownWitness(WitnessError):
    pass


class DivisorZero(WitnessError):
    pass


class GuardFailed(WitnessError):
    def __init__(self, failed):
        super().__init__(f"{len(failed)} support guard(s) fail: " + ", ".join(failed))
        self.failed = list(failed)


class GeometryError(FusionError):
    pass


class MultipleLatentComponents(GeometryError):
    pass


class BudgetExceeded(FusionError):
    pass


class InflationError(FusionError):
    pass


class UnsupportedScenario(InflationError):
    pass


class UnsupportedOrder(InflationError):
    pass


class SignatureMismatch(InflationError):
    pass


class Infeasible(FusionError):
    """The linear data constraints alone admit no probability distribution."""


class UnknownClaim(FusionError):
    pass
