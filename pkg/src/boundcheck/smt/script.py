"""Serialize VCs to SMT-LIB2 scripts (logic QF_UFLIA).

Validity via unsatisfiability: hypotheses are asserted, the goal is
asserted negated, and `unsat` means the VC is valid. Output is
deterministic byte-for-byte for fixed input (declarations in first-use
order).
"""

from __future__ import annotations

from ..errors import UnsupportedTerm
from ..logic import (
    BOOL,
    Binder,
    BoolSort,
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
    IntSort,
    Sort,
    UnknownSort,
    VC,
)

_CONN = {"and": "and", "or": "or", "=>": "=>", "<=>": "="}
_CMP = {"=": "=", "!=": "distinct", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _sort_name(s: Sort) -> str:
    match s:
        case IntSort():
            return "Int"
        case BoolSort():
            return "Bool"
        case UnknownSort(n):
            return f"S_{n}"
    raise TypeError(s)


def _sexpr(f: Formula) -> str:
    match f:
        case FVar(n, _):
            return _mangle(n)
        case FInt(v):
            return str(v) if v >= 0 else f"(- {-v})"
        case FBool(v):
            return "true" if v else "false"
        case FArith(op, l, r):
            return f"({op} {_sexpr(l)} {_sexpr(r)})"
        case FCmp(op, l, r):
            return f"({_CMP[op]} {_sexpr(l)} {_sexpr(r)})"
        case FNot(a):
            return f"(not {_sexpr(a)})"
        case FConn(op, args):
            inner = " ".join(_sexpr(a) for a in args)
            return f"({_CONN[op]} {inner})"
        case FIte(c, t, e):
            return f"(ite {_sexpr(c)} {_sexpr(t)} {_sexpr(e)})"
        case FApp(fun, args, _):
            inner = " ".join(_sexpr(a) for a in args)
            return f"({_mangle(fun)} {inner})"
        case FKapp(k, _):
            raise UnsupportedTerm(f"kappa variable {k} cannot be serialized; solve first")
    raise TypeError(f)


def _mangle(name: str) -> str:
    """SMT-LIB2 simple symbols cannot contain '$'; quote when needed."""
    if any(c in name for c in "$'"):
        return f"|{name}|"
    return name


def emit_script(vc: VC, get_model: bool = False) -> str:
    """Declarations, hypothesis assertions, negated goal, check-sat."""
    lines = ["(set-logic QF_UFLIA)"]

    sorts_seen: list[str] = []
    funs_seen: dict[str, tuple[tuple[Sort, ...], Sort]] = {}

    def note_sort(s: Sort) -> None:
        if isinstance(s, UnknownSort):
            nm = _sort_name(s)
            if nm not in sorts_seen:
                sorts_seen.append(nm)

    for name, arg_sorts, res in vc.funs:
        for s in arg_sorts + (res,):
            note_sort(s)
        funs_seen.setdefault(name, (arg_sorts, res))

    def walk(f: Formula) -> None:
        match f:
            case FApp(fun, args, sort):
                arg_sorts = tuple(_infer_sort(a) for a in args)
                for s in arg_sorts + (sort,):
                    note_sort(s)
                funs_seen.setdefault(fun, (arg_sorts, sort))
                for a in args:
                    walk(a)
            case FVar(_, s):
                note_sort(s)
            case FArith(_, l, r) | FCmp(_, l, r):
                walk(l)
                walk(r)
            case FNot(a):
                walk(a)
            case FConn(_, args) | FKapp(_, args):
                for a in args:
                    walk(a)
            case FIte(c, t, e):
                walk(c)
                walk(t)
                walk(e)
            case _:
                pass

    for b in vc.binders:
        note_sort(b.sort)
        walk(b.hyp)
    walk(vc.goal)

    for nm in sorts_seen:
        lines.append(f"(declare-sort {nm} 0)")
    for fun, (arg_sorts, res) in funs_seen.items():
        args = " ".join(_sort_name(s) for s in arg_sorts)
        lines.append(f"(declare-fun {_mangle(fun)} ({args}) {_sort_name(res)})")
    for b in vc.binders:
        lines.append(f"(declare-const {_mangle(b.name)} {_sort_name(b.sort)})")
    for b in vc.binders:
        if b.hyp != F_TRUE:
            lines.append(f"(assert {_sexpr(b.hyp)})")
    lines.append(f"(assert (not {_sexpr(vc.goal)}))")
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def _infer_sort(f: Formula) -> Sort:
    from ..logic import sort_of_formula

    return sort_of_formula(f)
