"""Call-by-value evaluation for the core calculus and its bounded extension.

Used by the differential tests: ANF preserves values, and the bound
elaboration preserves values (ghost calls return true and are dead).
Fuel is decremented once per beta/delta step; running out yields OutOfFuel
rather than divergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import (
    App,
    Bound,
    CAbs,
    CApp,
    Const,
    CoreTerm,
    Lam,
    Let,
    PAppT,
    PLam,
    TApp,
    TLam,
    Var,
)
from .errors import StuckTerm
from .prelude import PRIM_ARITY, is_prim


class Value:
    pass


@dataclass(frozen=True)
class IntV(Value):
    value: int


@dataclass(frozen=True)
class BoolV(Value):
    value: bool


@dataclass
class Closure(Value):
    binder: str
    body: CoreTerm
    env: "Env"


@dataclass
class TyClosure(Value):
    """Suspended body of a type or refinement abstraction (types erased)."""

    body: CoreTerm
    env: "Env"


@dataclass
class BoundClosure(Value):
    """Suspended body of a bound abstraction (lambda-bound mode only)."""

    bound: Bound
    body: CoreTerm
    env: "Env"


@dataclass(frozen=True)
class CrashV(Value):
    """The result of assert False; propagates strictly."""


@dataclass(frozen=True)
class PrimV(Value):
    name: str
    args: tuple[Value, ...] = ()


@dataclass(frozen=True)
class OutOfFuel:
    pass


OUT_OF_FUEL = OutOfFuel()

Env = dict[str, Value]

LAM_P = "lp"
LAM_B = "lb"


class _Fuel:
    __slots__ = ("left",)

    def __init__(self, amount: int):
        self.left = amount

    def tick(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        return True


def eval_term(
    e: CoreTerm,
    fuel: int = 10_000,
    lang: str = LAM_P,
    env: Optional[Env] = None,
) -> Union[Value, OutOfFuel]:
    """Evaluate a closed term (modulo env). lang: "lp" or "lb"; in "lb"
    mode bound application of a bound abstraction reduces in one step."""
    f = _Fuel(fuel)
    try:
        return _eval(e, dict(env) if env else {}, f, lang)
    except _Exhausted:
        return OUT_OF_FUEL


class _Exhausted(Exception):
    pass


def _tick(f: _Fuel) -> None:
    if not f.tick():
        raise _Exhausted()


def _eval(e: CoreTerm, env: Env, fuel: _Fuel, lang: str) -> Value:
    match e:
        case Var(n):
            if n in env:
                return env[n]
            if is_prim(n):
                return PrimV(n)
            raise StuckTerm(f"unbound variable {n}", e.span)
        case Const(v):
            return BoolV(v) if isinstance(v, bool) else IntV(v)
        case Lam(b, _, body):
            return Closure(b, body, env)
        case TLam(_, body) | PLam(_, _, body):
            return TyClosure(body, env)
        case CAbs(bd, body):
            if lang != LAM_B:
                raise StuckTerm("bound abstraction in plain-core evaluation", e.span)
            return BoundClosure(bd, body, env)
        case App(fn, arg):
            vf = _eval(fn, env, fuel, lang)
            if isinstance(vf, CrashV):
                return vf
            va = _eval(arg, env, fuel, lang)
            if isinstance(va, CrashV):
                return va
            return _apply(vf, va, fuel, lang, e)
        case Let(b, bound, body, _, rec):
            if rec:
                # recursion is tied through the environment
                hole: Env = dict(env)
                vb = _eval(bound, hole, fuel, lang)
                if isinstance(vb, CrashV):
                    return vb
                if isinstance(vb, (Closure, TyClosure, BoundClosure)):
                    vb.env[b] = vb
                hole[b] = vb
                _tick(fuel)
                return _eval(body, {**env, b: vb}, fuel, lang)
            vb = _eval(bound, env, fuel, lang)
            if isinstance(vb, CrashV):
                return vb
            _tick(fuel)
            return _eval(body, {**env, b: vb}, fuel, lang)
        case TApp(t, _):
            v = _eval(t, env, fuel, lang)
            return _force_ty(v, fuel, lang, e)
        case PAppT(t, _):
            v = _eval(t, env, fuel, lang)
            return _force_ty(v, fuel, lang, e)
        case CApp(t, _):
            v = _eval(t, env, fuel, lang)
            if isinstance(v, CrashV):
                return v
            if lang != LAM_B:
                raise StuckTerm("bound application in plain-core evaluation", e.span)
            # instantiations are implicit in source terms: force through
            # suspended type/refinement abstractions first
            while isinstance(v, TyClosure):
                _tick(fuel)
                v = _eval(v.body, v.env, fuel, lang)
            if isinstance(v, CrashV):
                return v
            if not isinstance(v, BoundClosure):
                raise StuckTerm("bound application of a non-bound value", e.span)
            _tick(fuel)
            return _eval(v.body, v.env, fuel, lang)
    raise TypeError(e)


def _force_ty(v: Value, fuel: _Fuel, lang: str, at: CoreTerm) -> Value:
    if isinstance(v, CrashV):
        return v
    if not isinstance(v, TyClosure):
        raise StuckTerm("type/refinement application of a non-abstraction", at.span)
    _tick(fuel)
    return _eval(v.body, v.env, fuel, lang)


def _apply(vf: Value, va: Value, fuel: _Fuel, lang: str, at: CoreTerm) -> Value:
    # instantiations are implicit in source terms: force through suspended
    # type/refinement abstractions before applying
    while isinstance(vf, TyClosure):
        _tick(fuel)
        vf = _eval(vf.body, vf.env, fuel, lang)
    match vf:
        case CrashV():
            return vf
        case Closure(b, body, env):
            _tick(fuel)
            return _eval(body, {**env, b: va}, fuel, lang)
        case PrimV(name, args):
            args = args + (va,)
            if len(args) < PRIM_ARITY[name]:
                return PrimV(name, args)
            _tick(fuel)
            return _delta(name, args, at)
        case _:
            raise StuckTerm("application of a non-function value", at.span)


def _delta(name: str, args: tuple[Value, ...], at: CoreTerm) -> Value:
    def int_of(v: Value) -> int:
        if not isinstance(v, IntV):
            raise StuckTerm(f"primitive {name} applied to a non-integer", at.span)
        return v.value

    def bool_of(v: Value) -> bool:
        if not isinstance(v, BoolV):
            raise StuckTerm(f"primitive {name} applied to a non-boolean", at.span)
        return v.value

    match name:
        case "+":
            return IntV(int_of(args[0]) + int_of(args[1]))
        case "-":
            return IntV(int_of(args[0]) - int_of(args[1]))
        case "*":
            return IntV(int_of(args[0]) * int_of(args[1]))
        case "<=":
            return BoolV(int_of(args[0]) <= int_of(args[1]))
        case "<":
            return BoolV(int_of(args[0]) < int_of(args[1]))
        case ">=":
            return BoolV(int_of(args[0]) >= int_of(args[1]))
        case ">":
            return BoolV(int_of(args[0]) > int_of(args[1]))
        case "==":
            return BoolV(int_of(args[0]) == int_of(args[1]))
        case "/=":
            return BoolV(int_of(args[0]) != int_of(args[1]))
        case "&&":
            return BoolV(bool_of(args[0]) and bool_of(args[1]))
        case "||":
            return BoolV(bool_of(args[0]) or bool_of(args[1]))
        case "not":
            return BoolV(not bool_of(args[0]))
        case "assert":
            if bool_of(args[0]):
                return args[1]
            return CrashV()
        case "ite":
            return args[1] if bool_of(args[0]) else args[2]
    raise StuckTerm(f"unknown primitive {name}", at.span)


def erase_bounds(e: CoreTerm) -> CoreTerm:
    """Drop every bound abstraction/application node (the erasure used by
    the erasure-commutes differential test)."""
    match e:
        case Var(_) | Const(_):
            return e
        case Lam(b, bt, body):
            return Lam(b, bt, erase_bounds(body), span=e.span)
        case App(f, a):
            return App(erase_bounds(f), erase_bounds(a), span=e.span)
        case Let(b, bound, body, annot, rec):
            return Let(b, erase_bounds(bound), erase_bounds(body), annot, rec, span=e.span)
        case TLam(a, body):
            return TLam(a, erase_bounds(body), span=e.span)
        case TApp(t, ty):
            return TApp(erase_bounds(t), ty, span=e.span)
        case PLam(p, pt, body):
            return PLam(p, pt, erase_bounds(body), span=e.span)
        case PAppT(t, phi):
            return PAppT(erase_bounds(t), phi, span=e.span)
        case CAbs(_, body):
            return erase_bounds(body)
        case CApp(t, _):
            return erase_bounds(t)
    raise TypeError(e)
