"""Exception hierarchy shared across the package."""

from __future__ import annotations


class VsqlError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(VsqlError):
    """Invalid or contradictory pipeline configuration."""


class SchemaError(VsqlError):
    """Schema document failed to parse or validate; names the offending element."""


class SqlSyntaxError(VsqlError):
    """SQL text is not valid under the supported dialect subset."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnsupportedSqlError(VsqlError):
    """Syntactically recognizable construct outside the supported subset."""

    def __init__(self, construct: str, line: int = 0, column: int = 0):
        self.construct = construct
        suffix = f" (line {line}, column {column})" if line else ""
        super().__init__(f"unsupported SQL construct: {construct}{suffix}")


class QualifyError(VsqlError):
    """Column/relation resolution failure."""


class UnknownRelationError(QualifyError):
    pass


class UnknownColumnError(QualifyError):
    pass


class AmbiguousColumnError(QualifyError):
    pass


class ViewError(VsqlError):
    """Invalid view definition, or a view file that failed ingestion."""


class ReconstructionError(VsqlError):
    """A reconstruction stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class GatewayError(VsqlError):
    """Provider/gateway failure."""


class TransportError(GatewayError):
    """Network-level failure after exhausting retries."""


class AuthError(GatewayError):
    """Missing or rejected credentials."""


class ContextOverflowError(GatewayError):
    """Provider reported the prompt exceeds the model context window."""


class NoSqlFoundError(GatewayError):
    """A completion contained no extractable SQL."""

    def __init__(self, message: str = "no SQL found in completion", completion: str = ""):
        self.completion = completion
        super().__init__(message)


class EvalError(VsqlError):
    """Run-level evaluation failure (missing database, bad dataset)."""
