"""Exception types shared across the package."""


class GraphVistaError(Exception):
    """Base class for all package errors."""


class ParameterError(GraphVistaError, ValueError):
    """An argument violates a documented precondition."""


class NodeNotFoundError(GraphVistaError, KeyError):
    """A node id was looked up that does not exist in the graph."""

    def __init__(self, node):
        super().__init__(node)
        self.node = node

    def __str__(self):
        return f"unknown node id: {self.node!r}"


class ConvergenceError(GraphVistaError):
    """An iterative solver failed to converge within its iteration cap."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class DisconnectedError(GraphVistaError):
    """Two query nodes lie in different connected components.

    Carries the component label (index into the component list, largest
    first) and size for each endpoint.
    """

    def __init__(self, source, target, source_component, target_component,
                 source_size, target_size):
        super().__init__(
            f"no path between {source!r} (component {source_component}, "
            f"size {source_size}) and {target!r} (component "
            f"{target_component}, size {target_size})"
        )
        self.source = source
        self.target = target
        self.source_component = source_component
        self.target_component = target_component
        self.source_size = source_size
        self.target_size = target_size


class InfeasibleCapError(GraphVistaError):
    """A node cap cannot be met because protected nodes already exceed it."""


class InstanceError(GraphVistaError, ValueError):
    """A task instance is malformed (bad arity, unknown type, bad params)."""


class UnparseableQuestionError(GraphVistaError):
    """No question template matched and no fallback parser was supplied."""


class FallbackParseError(GraphVistaError):
    """The semantic-fallback parser returned output violating the schema."""


class ClassificationError(GraphVistaError, ValueError):
    """A task type outside the known routing table was categorized."""


class PlanError(GraphVistaError, ValueError):
    """No execution-plan template exists for the requested task type."""


class LayoutError(GraphVistaError):
    """The layout engine was handed a graph above its size limit."""


class ActionError(GraphVistaError):
    """A highlight action referenced an element absent from the subgraph."""


class TransportError(GraphVistaError):
    """A reasoner request failed at the transport level after retries."""


class ProviderError(GraphVistaError):
    """The reasoner endpoint answered with a non-success status or bad body."""

    def __init__(self, message, status=None, body=None):
        super().__init__(message)
        self.status = status
        self.body = body


class ReasonerTimeoutError(TransportError):
    """A reasoner request exceeded the configured timeout."""


class AnswerFormatError(GraphVistaError):
    """A reasoner's final answer failed schema validation after retry."""


class SessionAbortedError(GraphVistaError):
    """A reasoning session died mid-loop; partial history is preserved."""

    def __init__(self, message, session, cause=None):
        super().__init__(message)
        self.session = session
        self.cause = cause


class TemplateMissingError(GraphVistaError):
    """No gold-trace template exists for the requested task type."""


class InapplicableCategoryError(GraphVistaError):
    """An error category cannot perturb the given trace shape."""


class NumericError(GraphVistaError, ValueError):
    """A numeric routine received a non-finite or out-of-domain value."""
