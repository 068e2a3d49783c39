"""Deterministic fresh-name supply.

Reserved prefixes: "$t" for ANF temporaries, "$bf" for bound (ghost)
functions, "$m" for materialization binders, "$w" for witness binders,
"$k" for inference kappa variables, "$v" for value variables.
"""

from __future__ import annotations

import itertools

RESERVED_PREFIXES = ("$t", "$bf", "$m", "$w", "$k", "$v", "$a", "$x")


class NameSupply:
    def __init__(self) -> None:
        self._counters: dict[str, itertools.count] = {}

    def fresh(self, prefix: str) -> str:
        ctr = self._counters.setdefault(prefix, itertools.count())
        return f"{prefix}{next(ctr)}"

    def reset(self) -> None:
        self._counters.clear()


def is_reserved(name: str) -> bool:
    return name.startswith("$")
