"""Exception types shared across the package.

Exit-code mapping used by the CLI: UsageError -> 1, InvariantViolation -> 2,
anything else -> 3.
"""


class KpplabError(Exception):
    pass


class UsageError(KpplabError):
    """Invalid configuration or violated operation precondition."""


class InvariantViolation(KpplabError):
    """A declared runtime invariant (coupling order, nestedness, ...) failed."""
