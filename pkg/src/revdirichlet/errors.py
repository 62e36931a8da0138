"""Exception hierarchy shared by every module of the package."""


class RevDirichletError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(RevDirichletError):
    pass


class DuplicateEdge(GraphError):
    pass


class UnknownVertex(GraphError):
    pass


class EmptyVertexSet(GraphError):
    pass


class SelfLoopRejected(GraphError):
    pass


class PreconditionViolated(RevDirichletError):
    pass


class NotStronglyConnected(PreconditionViolated):
    pass


class UnknownEdge(RevDirichletError):
    pass


class NotNullDivergence(RevDirichletError):
    pass


class NullDivergenceRequired(PreconditionViolated):
    pass


class BudgetExceeded(RevDirichletError):
    pass


class NonPositiveAlpha(RevDirichletError):
    pass


class InvalidEnvironment(RevDirichletError):
    pass


class SingularSystem(RevDirichletError):
    pass


class DegenerateSampler(RevDirichletError):
    pass


class UnknownSpec(RevDirichletError):
    pass


class StageFailure(RevDirichletError):
    """A reconstruction stage found data contradicting its hypotheses.

    ``witness`` is a JSON-friendly description of the offending input.
    """

    stage = "unknown"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness if witness is not None else {}


class OracleInvalid(StageFailure):
    stage = "validate_oracle"


class CycleProductViolation(StageFailure):
    stage = "edge_ratios"


class PathProductMismatch(StageFailure):
    stage = "derive_factorization"


class GaugeInconsistency(StageFailure):
    stage = "recover_gauge"


class FormMismatch(StageFailure):
    stage = "classify_vertex"


class NegativeBeta(StageFailure):
    stage = "classify_vertex"


class BranchMismatch(StageFailure):
    stage = "characterize"
