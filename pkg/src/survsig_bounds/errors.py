"""Exception types shared across the package."""

from __future__ import annotations


class InputError(ValueError):
    """Malformed or inconsistent user input.

    ``source`` and ``line`` are filled in when the problem can be traced to a
    location in an input file.
    """

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        self.message = message
        self.source = source
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        if self.source is None:
            return self.message
        where = self.source if self.line is None else f"{self.source}:{self.line}"
        return f"{where}: {self.message}"


class NumericError(ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""
