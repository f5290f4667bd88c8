from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

from .model import PropertyGraph

Severity = Literal["error", "warning"]


@dataclass(frozen=True)
class SourceDiagnostic:
    line: int
    column: int
    message: str
    severity: Severity = "error"

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    """Outcome of reading a document.  ``graph`` is None iff an error was reported."""

    graph: Optional[PropertyGraph]
    diagnostics: list[SourceDiagnostic] = field(default_factory=list)

    @property
    def errors(self) -> list[SourceDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def ok(self) -> bool:
        return self.graph is not None


class PGSyntaxError(ValueError):
    """A single positioned error raised while lexing or parsing one line."""

    def __init__(self, column: int, message: str):
        super().__init__(message)
        self.column = column
        self.message = message
