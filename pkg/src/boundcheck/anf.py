"""Administrative normal form: name every value-application argument.

Only value applications are normalized; type, refinement and bound
applications keep their operands in place. Evaluation order (left-to-right,
call-by-value) is preserved: the function part's bindings are emitted
before the argument's.
"""

from __future__ import annotations

from typing import Optional

from .core import (
    App,
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
from .names import NameSupply

Bindings = list[tuple[str, CoreTerm]]


def normalize(e: CoreTerm, supply: Optional[NameSupply] = None) -> CoreTerm:
    """Rewrite e so that every App argument is a variable.

    Non-variable arguments are let-bound to fresh "$t" names immediately
    before use. Idempotent; output node count is at most 3x the input.
    """
    supply = supply or NameSupply()

    def wrap(bindings: Bindings, body: CoreTerm) -> CoreTerm:
        for name, bound in reversed(bindings):
            body = Let(name, bound, body, span=bound.span)
        return body

    def atom(e: CoreTerm, bindings: Bindings) -> CoreTerm:
        """Normalize e to a variable, accumulating let bindings."""
        match e:
            case Var(_):
                return e
            case _:
                ne = norm(e)
                name = supply.fresh("$t")
                bindings.append((name, ne))
                return Var(name, span=e.span)

    def spine(e: CoreTerm, bindings: Bindings) -> CoreTerm:
        """Normalize the function position of an application in place."""
        match e:
            case App(f, a):
                nf = spine(f, bindings)
                na = atom(a, bindings)
                return App(nf, na, span=e.span)
            case TApp(t, ty):
                return TApp(spine(t, bindings), ty, span=e.span)
            case PAppT(t, phi):
                return PAppT(spine(t, bindings), phi, span=e.span)
            case CApp(t, bd):
                return CApp(spine(t, bindings), bd, span=e.span)
            case Var(_):
                return e
            case _:
                return atom(e, bindings)

    def norm(e: CoreTerm) -> CoreTerm:
        match e:
            case Var(_) | Const(_):
                return e
            case Lam(b, bt, body):
                return Lam(b, bt, tail(body), span=e.span)
            case App(_, _):
                bindings: Bindings = []
                out = spine(e, bindings)
                return wrap(bindings, out)
            case Let(b, bound, body, annot, rec):
                return Let(b, norm(bound), tail(body), annot, rec, span=e.span)
            case TLam(a, body):
                return TLam(a, norm(body), span=e.span)
            case TApp(_, _) | PAppT(_, _) | CApp(_, _):
                bindings = []
                out = spine(e, bindings)
                return wrap(bindings, out)
            case PLam(p, pt, body):
                return PLam(p, pt, norm(body), span=e.span)
            case CAbs(bd, body):
                return CAbs(bd, norm(body), span=e.span)
        raise TypeError(e)

    def tail(e: CoreTerm) -> CoreTerm:
        """Normalize a lambda or let body: value applications in tail
        position are let-bound so the result itself is named."""
        match e:
            case App(_, _):
                bindings: Bindings = []
                out = spine(e, bindings)
                name = supply.fresh("$t")
                bindings.append((name, out))
                return wrap(bindings, Var(name, span=e.span))
            case Let(b, bound, body, annot, rec):
                return Let(b, norm(bound), tail(body), annot, rec, span=e.span)
            case _:
                return norm(e)

    return norm(e)


def is_normal(e: CoreTerm) -> bool:
    """True if every App argument is already a variable."""
    match e:
        case Var(_) | Const(_):
            return True
        case Lam(_, _, body) | TLam(_, body) | PLam(_, _, body) | CAbs(_, body):
            return is_normal(body)
        case App(f, a):
            return isinstance(a, Var) and is_normal(f)
        case Let(_, bound, body, _, _):
            return is_normal(bound) and is_normal(body)
        case TApp(t, _) | PAppT(t, _) | CApp(t, _):
            return is_normal(t)
    raise TypeError(e)
