"""Exception hierarchy shared by all modules.

The CLI maps ``ConfigError`` to exit code 2 and ``DataError`` to exit code 3.
"""


class TweetMineError(Exception):
    pass


class ConfigError(TweetMineError, ValueError):
    """Bad parameters or inconsistent configuration."""


class DataError(TweetMineError, ValueError):
    """Input data violates a format or content contract."""


class ParseError(DataError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SchemaError(DataError):
    def __init__(self, field: str, message: str = ""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class DuplicateIdError(DataError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id {record_id!r}")
        self.record_id = record_id


class EmptyInputError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class UndefinedCorrelationError(DataError):
    pass


class ZeroVarianceError(DataError):
    pass


class VocabularyError(DataError):
    """A term or vector does not belong to the expected vocabulary."""


class DegenerateTrainingError(DataError):
    pass


class DomainError(ConfigError):
    pass


class ConvergenceError(TweetMineError, RuntimeError):
    def __init__(self, message: str, diagnostics):
        super().__init__(f"{message}: {diagnostics}")
        self.diagnostics = diagnostics
