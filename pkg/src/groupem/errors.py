"""Exception types shared across the package."""


class GroupSpecError(ValueError):
    """Malformed group spec string."""


class UnsupportedKindError(GroupSpecError):
    """Group spec names a kind we do not implement."""


class DomainError(ValueError):
    """Element does not belong to the group it was used with."""


class CodecError(ValueError):
    """Byte string is not a canonical element encoding."""


class CapacityError(RuntimeError):
    """Requested exhaustive work exceeds the configured cap."""


class ConfigError(ValueError):
    """Invalid experiment or operation configuration."""


class BudgetError(RuntimeError):
    """An adversary exceeded its query budget."""


class ProtocolError(RuntimeError):
    """An adversary repeated a query whose answer it could already derive."""
