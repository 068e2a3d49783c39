"""SMT discharge: script emission, external solver driver, finite oracle."""

from .verdict import Invalid, SolverVerdict, Unknown, Valid

__all__ = ["SolverVerdict", "Valid", "Invalid", "Unknown"]
