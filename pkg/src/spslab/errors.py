from __future__ import annotations

from typing import Any


class SpsError(Exception):
    """Base class for every error raised by spslab."""

    exit_code = 1
    kind = "Error"


class InputError(SpsError, ValueError):
    """Malformed input: parse errors, dimension mismatch, bad parameters."""

    exit_code = 2
    kind = "Input error"

    def __init__(
        self, message: str, *, line: int | None = None, column: int | None = None
    ) -> None:
        if line is not None:
            where = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class ResourceError(SpsError):
    """A configured desk-scale cap was exceeded."""

    exit_code = 3
    kind = "Resource limit"

    def __init__(
        self,
        message: str,
        *,
        cap: str,
        required: int | None = None,
        progress: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.cap = cap
        self.required = required
        self.progress = progress or {}


class PreconditionError(SpsError):
    """An operation was called on input outside its documented domain."""

    exit_code = 4
    kind = "Precondition failed"

    def __init__(self, message: str, *, detail: Any = None) -> None:
        super().__init__(message)
        self.detail = detail


class StructuralError(SpsError):
    """A construction step that is guaranteed to succeed did not."""

    exit_code = 4
    kind = "Structural error"


def check_cap(name: str, required: int, cap: int, what: str) -> None:
    if required > cap:
        raise ResourceError(
            f"{what} needs {required}, above the configured {name}={cap}",
            cap=name,
            required=required,
        )
