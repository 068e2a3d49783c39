"""boundcheck: a refinement type checker with bounded abstract refinements.

Programs in a small annotated lambda calculus are parsed, normalized,
elaborated (bounds become ghost functions), checked bidirectionally into
quantifier-free verification conditions, and discharged through an SMT
interface; unknown refinement instantiations are inferred by predicate
abstraction.
"""

__version__ = "0.1.0"
