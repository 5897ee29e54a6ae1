"""Exception taxonomy.

Resource-cap errors (anything derived from CapExceededError) are kept apart
from mathematical failures so that callers, in particular the CLI, can map
"the computation was too large" and "the check failed" to different exit
codes.
"""


class TreeGroupsError(Exception):
    """Base class for all package errors."""


class ShapeError(TreeGroupsError):
    """Arity, depth or domain mismatch between operands."""


class DepthExceededError(TreeGroupsError):
    """A vertex or requested depth does not fit inside a portrait."""


class NotAnAutomorphismError(TreeGroupsError):
    """A leaf permutation does not respect the tree's prefix blocks."""


class InvalidSpecError(TreeGroupsError):
    """A group specification violates its invariants or cannot be parsed."""


class CapExceededError(TreeGroupsError):
    """Base class for configurable resource limits."""


class EnumerationTooLargeError(CapExceededError):
    """A group or coset space is larger than the enumeration cap."""


class StateCapError(CapExceededError):
    """The dynamic-programming state space exceeded its cap."""


class PreconditionError(TreeGroupsError):
    """An operation was called outside its stated hypotheses."""


class HypothesisViolationError(TreeGroupsError):
    """A verified mathematical hypothesis fails on the given inputs.

    Carries a witness describing the first failure.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ExtensionFailureError(HypothesisViolationError):
    """A level-by-level bijection extension found mismatching classes."""
