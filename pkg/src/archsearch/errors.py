"""Exception types shared across the package.

Data errors (bad files, unresolvable references, conflicting pins) are kept
distinct from usage errors so the CLI can map them to exit codes and the
service can map them to HTTP statuses.
"""


class ArchSearchError(Exception):
    """Base class for all errors raised by this package."""


class GraphParseError(ArchSearchError):
    """Malformed graph or model document; carries a location hint."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(message if location is None else f"{message} (at {location})")


class ReferentialError(ArchSearchError):
    """An id or name referenced by a document does not resolve."""


class PinBindingError(ArchSearchError):
    """A pin pattern matched nothing in the graph it was bound against."""


class PinConflictError(ArchSearchError):
    """Two pins demand incompatible targets for the same entity."""

    def __init__(self, message: str, first=None, second=None):
        self.first = first
        self.second = second
        super().__init__(message)


class ConfigError(ArchSearchError):
    """A run/matrix configuration violates its invariants."""


class ContractViolation(ArchSearchError):
    """An operation was called with arguments outside its contract."""


class NotFoundError(ArchSearchError):
    """A run id or solution reference does not exist in the store."""


class StoreError(ArchSearchError):
    """The on-disk result store is corrupt or unusable."""
