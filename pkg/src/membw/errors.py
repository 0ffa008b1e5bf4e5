"""Exception types shared across the package.

Validation failures raise :class:`InvariantError` with a message that names
the violated invariant; the CLI maps these (and scenario parse problems) to
exit code 2.
"""

from __future__ import annotations


class MembwError(Exception):
    """Base class for all package-specific errors."""


class InvariantError(MembwError, ValueError):
    """A domain-type invariant or operation precondition was violated."""


class ScenarioError(MembwError, ValueError):
    """A scenario file is malformed or internally inconsistent."""


class ScheduleExhaustedError(MembwError):
    """A span does not fit into a fully bounded memory schedule.

    ``shortfall`` is the number of regulation periods by which the schedule
    is too short.
    """

    def __init__(self, shortfall: int):
        super().__init__(f"schedule exhausted: span exceeds total length by {shortfall} period(s)")
        self.shortfall = shortfall


class OracleTooLargeError(MembwError):
    """A brute-force oracle was asked to enumerate an unreasonably large space."""
