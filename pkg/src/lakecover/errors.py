"""Exception hierarchy shared by every lakecover module."""


class LakeError(Exception):
    """Base class for lakecover errors."""


class SchemaError(LakeError):
    pass


class TypeMismatchError(LakeError, TypeError):
    pass


class NotFoundError(LakeError, KeyError):
    """Raised by the object store when a key does not exist."""

    def __str__(self):
        return f"object not found: {self.args[0]!r}" if self.args else "object not found"


class CoverageContractError(LakeError):
    """A set that was required to be a coverage set is not one."""


class UnindexedColumnError(LakeError):
    pass


class NotCacheableError(LakeError):
    """The predicate cannot be represented as an interval."""


class CombinationLimitError(LakeError):
    pass


class MalformedRecordError(LakeError, ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CorrectnessError(LakeError):
    """Two execution modes returned different rows for the same query."""
