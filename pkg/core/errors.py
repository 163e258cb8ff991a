# core/errors.py

from typing import Optional


class PolicyVaultError(Exception):
    """Base class for all errors raised by the pipeline."""


class InputError(PolicyVaultError, ValueError):
    """A malformed input file or argument.

    The optional location is rendered in front of the message so the
    command line can print it as-is.
    """

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[str] = None):
        self.path = path
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.path:
            where.append(str(self.path))
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column '{self.column}'")
        if where:
            return f"{' '.join(where)}: {self.reason}"
        return self.reason


class ConfigError(InputError):
    """Lexicon, schema, sensitivity or run configuration problem."""


class ModelError(PolicyVaultError, ValueError):
    """Fitting or sampling precondition violated."""
