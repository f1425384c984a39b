"""Exception types shared across the package."""
from __future__ import annotations


class ContainmentError(Exception):
    """Base class for package-specific errors."""


class SelfLoopError(ContainmentError):
    """An edge connects an agent to itself."""


class LeaderReceivesEdgeError(ContainmentError):
    """An edge lists a leader as receiver; leaders take no input."""


class SingularFollowerBlockError(ContainmentError):
    """The follower block of the Laplacian is not positive definite.

    Raised when the follower subgraph is disconnected from the leaders in a
    way that breaks the connectivity requirement.
    """


class DegenerateFormationError(ContainmentError):
    """Leader offsets do not span a proper convex polygon."""


class DegenerateEdgeError(ContainmentError):
    """Two leader offsets coincide, so they define no edge line."""


class ZeroDistanceError(ContainmentError):
    """A formation edge line passes through the origin.

    The hull margin degenerates to zero in that case, which violates the
    strict-enclosure requirement on the leader formation.
    """


class InconsistentViewError(ContainmentError):
    """A neighbor view contains an agent that is not a graph neighbor."""


class NonFiniteStateError(ContainmentError):
    """Integration produced NaN/Inf or exceeded the blow-up guard."""

    def __init__(self, message: str, time: float, partial_run=None):
        super().__init__(message)
        self.time = time
        self.partial_run = partial_run


class ValidationFailedError(ContainmentError):
    """A scenario failed pre-run validation checks."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ScenarioParseError(ContainmentError):
    """A scenario file is malformed; the message carries field context."""
