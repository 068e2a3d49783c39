"""Solver verdicts. Valid means the negated VC was unsatisfiable."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SolverVerdict:
    pass


@dataclass(frozen=True)
class Valid(SolverVerdict):
    def __str__(self) -> str:
        return "valid"


@dataclass(frozen=True)
class Invalid(SolverVerdict):
    model: Optional[str] = None

    def __str__(self) -> str:
        return "invalid"


@dataclass(frozen=True)
class Unknown(SolverVerdict):
    reason: str = ""

    def __str__(self) -> str:
        return "unknown"
