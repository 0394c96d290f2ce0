from __future__ import annotations


class SourceError(Exception):
    """Error anchored to a source line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ParseError(SourceError):
    pass


class TypecheckError(SourceError):
    pass


class ShapeMismatch(Exception):
    """Raised when diffing two programs whose statement skeletons differ."""
