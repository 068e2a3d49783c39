"""Diagnostics and error types shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Half-open source region; line/col are 1-based."""

    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NO_SPAN = Span(0, 0)


class BoundcheckError(Exception):
    """Base for all user-facing errors; carries a source span."""

    def __init__(self, msg: str, span: Span = NO_SPAN):
        super().__init__(msg)
        self.msg = msg
        self.span = span

    def __str__(self) -> str:
        if self.span != NO_SPAN:
            return f"{self.span}: {self.msg}"
        return self.msg


class ParseError(BoundcheckError):
    """Syntax error with position and the set of expected tokens."""

    def __init__(self, line: int, col: int, expected: frozenset[str], found: str):
        self.expected = expected
        self.found = found
        what = ", ".join(sorted(expected))
        super().__init__(f"expected {what}, found {found!r}", Span(line, col))


class DuplicateName(BoundcheckError):
    pass


class UnboundIdentifier(BoundcheckError):
    pass


class UnboundVariable(BoundcheckError):
    pass


class UnboundRefinementVar(BoundcheckError):
    pass


class IllSorted(BoundcheckError):
    pass


class ImplicationOutsideBound(BoundcheckError):
    pass


class ShapeMismatch(BoundcheckError):
    pass


class NotAFunction(BoundcheckError):
    pass


class ArityMismatch(BoundcheckError):
    pass


class MalformedBound(BoundcheckError):
    pass


class UnsupportedTerm(BoundcheckError):
    pass


class NonMonotonic(BoundcheckError):
    """A kappa variable would occur negatively: internal invariant breach."""


class StuckTerm(BoundcheckError):
    """Evaluator hit an ill-formed application; signals a checker bug."""


class SolverSpawnError(BoundcheckError):
    pass


class ProtocolError(BoundcheckError):
    pass


class SolverFailure(BoundcheckError):
    pass


class OracleOutOfScope(BoundcheckError):
    pass
