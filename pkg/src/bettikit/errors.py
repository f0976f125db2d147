"""Exception hierarchy for the toolkit.

Every error raised on purpose derives from ToolkitError so the CLI can
catch one type and map it to a nonzero exit code.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(ToolkitError):
    """Shape mismatch: non-square input, kernel larger than image, etc."""


class DataError(ToolkitError):
    """Malformed values: non-finite entries, asymmetric matrix, bad labels."""


class ContractError(ToolkitError):
    """A documented precondition was violated by the caller."""


class ResourceError(ToolkitError):
    """Work refused because it exceeds a configured guard or budget."""


class FormatError(ToolkitError):
    """A file does not conform to its declared on-disk format."""
