"""Exception hierarchy shared by the library and the CLI.

Exit codes: 2 for unparseable input, 3 for inputs that parse but violate
an operation's preconditions, 4 for states the underlying theory proves
unreachable (reaching one means the library itself is wrong).
"""


class PolydualError(Exception):
    exit_code = 1


class ParseError(PolydualError):
    """Input document is malformed (bad JSON, wrong schema, bad numbers)."""

    exit_code = 2


class PreconditionError(PolydualError):
    """Input is well-formed but violates an operation's contract."""

    exit_code = 3


class InternalConsistencyError(PolydualError):
    """A check that is guaranteed by construction failed."""

    exit_code = 4
