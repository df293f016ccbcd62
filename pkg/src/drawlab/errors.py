"""Exception types shared across the package."""


class DrawlabError(Exception):
    """Base class for drawlab errors."""


class InstanceFormatError(DrawlabError):
    """Instance document is malformed or violates a structural invariant."""


class IncompleteAssignmentError(DrawlabError):
    """An operation that requires a complete assignment received a partial one."""


class InfeasibleScenarioError(DrawlabError):
    """No valid assignment exists for the requested constraint set."""


class ProposalBudgetError(DrawlabError):
    """Rejection sampler exhausted its proposal budget (scenario near-infeasible)."""


class EnumerationBudgetError(DrawlabError):
    """Exact enumeration would exceed the configured budget."""


class ResultFormatError(DrawlabError):
    """Results document is malformed or has an unknown schema id."""
