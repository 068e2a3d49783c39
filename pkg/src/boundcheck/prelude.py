"""Built-in primitives: their schemas (the tc table for operators) and names.

Integer and boolean literals are typed directly by the checker; everything
else (arithmetic, comparisons, assert, the strict selector ite) enters the
environment as a trusted primitive, exactly like user `assume` declarations.
"""

from __future__ import annotations

from .core import (
    B_BOOL,
    B_INT,
    PBin,
    PNot,
    PVar,
    RConc,
    Schema,
    SMono,
    SAll,
    TBase,
    TFun,
    b_var,
    t_base,
)


def _arith(op: str) -> Schema:
    # x:Int -> y:Int -> {v:Int | v = x op y}
    out = TBase(B_INT, "v", RConc(PBin("=", PVar("v"), PBin(op, PVar("x"), PVar("y")))))
    return SMono(TFun("x", t_base(B_INT), TFun("y", t_base(B_INT), out)))


def _cmp(op: str) -> Schema:
    # x:Int -> y:Int -> {v:Bool | v <=> x op y}
    out = TBase(B_BOOL, "v", RConc(PBin("<=>", PVar("v"), PBin(op, PVar("x"), PVar("y")))))
    return SMono(TFun("x", t_base(B_INT), TFun("y", t_base(B_INT), out)))


def _boolop(op: str) -> Schema:
    out = TBase(B_BOOL, "v", RConc(PBin("<=>", PVar("v"), PBin(op, PVar("x"), PVar("y")))))
    return SMono(TFun("x", t_base(B_BOOL), TFun("y", t_base(B_BOOL), out)))


def _not_schema() -> Schema:
    out = TBase(B_BOOL, "v", RConc(PBin("<=>", PVar("v"), PNot(PVar("x")))))
    return SMono(TFun("x", t_base(B_BOOL), out))


def _mul_schema() -> Schema:
    # unrefined: v = x * y is outside the linear fragment
    return SMono(TFun("x", t_base(B_INT), TFun("y", t_base(B_INT), t_base(B_INT))))


def _assert_schema() -> Schema:
    # forall a. {b:Bool | b} -> x:a -> a
    pre = TBase(B_BOOL, "b", RConc(PVar("b")))
    a = t_base(b_var("a"))
    return SAll("a", SMono(TFun("b", pre, TFun("x", a, a))))


def _ite_schema() -> Schema:
    # forall a. Bool -> a -> a -> a   (strict selector; thunk for laziness)
    a = t_base(b_var("a"))
    return SAll("a", SMono(TFun("c", t_base(B_BOOL), TFun("t", a, TFun("e", a, a)))))


PRELUDE: dict[str, Schema] = {
    "+": _arith("+"),
    "-": _arith("-"),
    "*": _mul_schema(),
    "<=": _cmp("<="),
    "<": _cmp("<"),
    ">=": _cmp(">="),
    ">": _cmp(">"),
    "==": _cmp("="),
    "/=": _cmp("!="),
    "&&": _boolop("and"),
    "||": _boolop("or"),
    "not": _not_schema(),
    "assert": _assert_schema(),
    "ite": _ite_schema(),
}

PRIM_ARITY: dict[str, int] = {
    "+": 2,
    "-": 2,
    "*": 2,
    "<=": 2,
    "<": 2,
    ">=": 2,
    ">": 2,
    "==": 2,
    "/=": 2,
    "&&": 2,
    "||": 2,
    "not": 1,
    "assert": 2,
    "ite": 3,
}


def is_prim(name: str) -> bool:
    return name in PRELUDE
