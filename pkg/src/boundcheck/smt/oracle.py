"""Brute-force validity oracle over a finite integer subdomain.

Variables range over [-bound, bound]; arithmetic is evaluated exactly (the
domain restriction applies to variables, not to terms). Uninterpreted
boolean predicates are interpreted by enumerating all boolean assignments
to the ground applications reached at each valuation, grouped by (symbol,
evaluated arguments) so functional consistency holds by construction.

Valid is validity over the finite subdomain: full validity implies it,
and any Invalid verdict comes with a genuine countermodel (the partial
predicate tables extend arbitrarily to all of Z). Used as a falsifier and
cross-check, never as the production checker.
"""

from __future__ import annotations

import itertools
from typing import Optional

from ..errors import OracleOutOfScope
from ..logic import (
    BOOL,
    Binder,
    F_TRUE,
    FApp,
    FArith,
    FBool,
    FCmp,
    FConn,
    FInt,
    FIte,
    FKapp,
    FNot,
    FVar,
    Formula,
    INT,
    VC,
)
from .verdict import Invalid, SolverVerdict, Unknown, Valid

MAX_SYMBOLS = 2
MAX_CELLS = 12


def check_oracle(
    vc: VC,
    int_bound: int = 2,
    max_symbols: int = MAX_SYMBOLS,
    max_cells: int = MAX_CELLS,
) -> SolverVerdict:
    """Exhaustively check hypotheses => goal over the finite subdomain."""
    sorts: dict[str, str] = {}
    for b in vc.binders:
        if b.sort == INT:
            sorts[b.name] = "int"
        elif b.sort == BOOL:
            sorts[b.name] = "bool"
        else:
            raise OracleOutOfScope(f"binder {b.name} has sort {b.sort}")

    symbols: dict[str, int] = {}
    for f in vc.all_formulas():
        _scan(f, symbols)

    if len(symbols) > max_symbols:
        raise OracleOutOfScope(f"{len(symbols)} uninterpreted symbols, limit {max_symbols}")
    width = 2 * int_bound + 1
    for sym, arity in symbols.items():
        if width**arity > max_cells:
            raise OracleOutOfScope(
                f"symbol {sym} has {width ** arity} domain cells, limit {max_cells}"
            )

    hyps = list(vc.hypotheses())
    goal = vc.goal
    names = list(sorts)
    ranges = [
        range(-int_bound, int_bound + 1) if sorts[n] == "int" else (False, True)
        for n in names
    ]

    for values in itertools.product(*ranges):
        env = dict(zip(names, values))
        apps: dict[tuple[str, tuple[int, ...]], bool] = {}
        _collect_apps(hyps, goal, env, apps)
        keys = list(apps)
        if not keys:
            if _holds(hyps, goal, env, apps) is False:
                return Invalid(_model_text(env, apps))
            continue
        for bits in itertools.product((False, True), repeat=len(keys)):
            table = dict(zip(keys, bits))
            if _holds(hyps, goal, env, table) is False:
                return Invalid(_model_text(env, table))
    return Valid()


def _scan(f: Formula, symbols: dict[str, int]) -> None:
    match f:
        case FApp(fun, args, sort):
            if sort != BOOL:
                raise OracleOutOfScope(f"uninterpreted function {fun} is not a predicate")
            symbols.setdefault(fun, len(args))
            if symbols[fun] != len(args):
                raise OracleOutOfScope(f"symbol {fun} used at two arities")
            for a in args:
                if _mentions_app(a):
                    raise OracleOutOfScope(f"predicate {fun} has a predicate-dependent argument")
        case FKapp(k, _):
            raise OracleOutOfScope(f"kappa variable {k} in oracle input")
        case FVar(_, _) | FInt(_) | FBool(_):
            pass
        case FArith(_, l, r) | FCmp(_, l, r):
            _scan(l, symbols)
            _scan(r, symbols)
        case FNot(a):
            _scan(a, symbols)
        case FConn(_, args):
            for a in args:
                _scan(a, symbols)
        case FIte(c, t, e):
            _scan(c, symbols)
            _scan(t, symbols)
            _scan(e, symbols)
        case _:
            raise TypeError(f)


def _mentions_app(f: Formula) -> bool:
    match f:
        case FApp(_, _, _) | FKapp(_, _):
            return True
        case FVar(_, _) | FInt(_) | FBool(_):
            return False
        case FArith(_, l, r) | FCmp(_, l, r):
            return _mentions_app(l) or _mentions_app(r)
        case FNot(a):
            return _mentions_app(a)
        case FConn(_, args):
            return any(_mentions_app(a) for a in args)
        case FIte(c, t, e):
            return _mentions_app(c) or _mentions_app(t) or _mentions_app(e)
    raise TypeError(f)


def _collect_apps(hyps, goal, env, apps: dict) -> None:
    for h in hyps:
        _ground(h, env, apps)
    _ground(goal, env, apps)


def _ground(f: Formula, env: dict, apps: dict) -> None:
    match f:
        case FApp(fun, args, _):
            vals = tuple(_eval(a, env, apps, grounding=True) for a in args)
            apps.setdefault((fun, vals), False)
        case FVar(_, _) | FInt(_) | FBool(_):
            pass
        case FArith(_, l, r) | FCmp(_, l, r):
            _ground(l, env, apps)
            _ground(r, env, apps)
        case FNot(a):
            _ground(a, env, apps)
        case FConn(_, args):
            for a in args:
                _ground(a, env, apps)
        case FIte(c, t, e):
            _ground(c, env, apps)
            _ground(t, env, apps)
            _ground(e, env, apps)
        case _:
            raise TypeError(f)


def _eval(f: Formula, env: dict, apps: dict, grounding: bool = False):
    match f:
        case FVar(n, _):
            return env[n]
        case FInt(v):
            return v
        case FBool(v):
            return v
        case FArith(op, l, r):
            a, b = _eval(l, env, apps, grounding), _eval(r, env, apps, grounding)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            return a * b
        case FCmp(op, l, r):
            a, b = _eval(l, env, apps, grounding), _eval(r, env, apps, grounding)
            match op:
                case "=":
                    return a == b
                case "!=":
                    return a != b
                case "<":
                    return a < b
                case "<=":
                    return a <= b
                case ">":
                    return a > b
                case ">=":
                    return a >= b
        case FNot(a):
            return not _eval(a, env, apps, grounding)
        case FConn(op, args):
            vals = [_eval(a, env, apps, grounding) for a in args]
            match op:
                case "and":
                    return all(vals)
                case "or":
                    return any(vals)
                case "=>":
                    out = vals[-1]
                    for v in reversed(vals[:-1]):
                        out = (not v) or out
                    return out
                case "<=>":
                    return vals[0] == vals[1]
        case FIte(c, t, e):
            return _eval(t if _eval(c, env, apps, grounding) else e, env, apps, grounding)
        case FApp(fun, args, _):
            vals = tuple(_eval(a, env, apps, grounding) for a in args)
            if grounding:
                apps.setdefault((fun, vals), False)
                return False
            return apps[(fun, vals)]
    raise TypeError(f)


def _holds(hyps, goal, env, apps) -> bool:
    for h in hyps:
        if not _eval(h, env, apps):
            return True  # hypothesis failed: implication holds vacuously
    return bool(_eval(goal, env, apps))


def _model_text(env: dict, apps: dict) -> str:
    parts = [f"{n} = {str(v).lower() if isinstance(v, bool) else v}" for n, v in env.items()]
    for (fun, args), val in apps.items():
        sargs = ", ".join(str(a) for a in args)
        parts.append(f"{fun}({sargs}) = {str(val).lower()}")
    return "; ".join(parts)
