"""Elaboration of bounds into ghost functions.

Bound abstractions become lambda parameters whose output type carries the
bound's constraint; bound applications become constant-true witness
functions; and at every variable binding site, calls to the in-scope ghost
functions are materialized over all candidate argument tuples so the
constraint instances strengthen subsequent subtyping environments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import (
    App,
    B_BOOL,
    Bound,
    CAbs,
    CApp,
    Const,
    CoreTerm,
    Lam,
    Let,
    PAppT,
    PLam,
    RType,
    SAll,
    SBound,
    SMono,
    SPAll,
    Schema,
    TApp,
    TBase,
    TFun,
    TLam,
    UType,
    UBool,
    UFun,
    UInt,
    UVar,
    Var,
    bound_shape,
    schema_shape,
    t_base,
    to_shape,
)
from .errors import BoundcheckError, MalformedBound
from .names import NameSupply
from .prelude import PRELUDE


# ---------------------------------------------------------------------------
# Bound-type translation and witnesses
# ---------------------------------------------------------------------------


def tx_bound_type(phi: Bound) -> RType:
    """The ghost function's type: x1:b1 -> ... -> xn:bn -> {v:Bool | body}."""
    out: RType = TBase(B_BOOL, "v", phi.body)
    for name, base in reversed(phi.params):
        out = TFun(name, t_base(base), out)
    return out


def witness_term(phi: Bound) -> CoreTerm:
    """The constant-true function discharging a bound: \\x1...xn -> true."""
    out: CoreTerm = Const(True)
    for name, base in reversed(phi.params):
        out = Lam(name, t_base(base), out)
    return out


def tx_schema(s: Schema) -> Schema:
    """Rewrite Bounded(phi, sigma) wrappers into ghost-parameter arrows, in
    declaration order, innermost of the quantifier prefix."""

    def go(s: Schema, pending: list[Bound]) -> Schema:
        match s:
            case SBound(bd, b):
                return go(b, pending + [bd])
            case SAll(a, b):
                return SAll(a, go(b, pending))
            case SPAll(p, pt, b):
                return SPAll(p, pt, go(b, pending))
            case SMono(t):
                for i, bd in reversed(list(enumerate(pending))):
                    t = TFun(f"$bf_{i}_{bd.name}", tx_bound_type(bd), t)
                return SMono(t)
        raise TypeError(s)

    return go(s, [])


# ---------------------------------------------------------------------------
# Candidate generation and weaving
# ---------------------------------------------------------------------------


@dataclass
class MaterializeStats:
    """Per-binding-site instrumentation for the n^k cost bound."""

    sites: list[tuple[str, int, int]] = field(default_factory=list)
    # (binder, candidates inserted, n^k budget at the site)


def candidates(var_env: dict[str, UType], bound_env: dict[str, UType]) -> list[CoreTerm]:
    """All full applications f x1..xk with f a ghost and xi drawn (with
    repetition) from the variable environment, shape-checked at Bool.

    Deterministic: ghosts in insertion order, argument tuples in
    lexicographic order of variable-environment insertion.
    """
    out: list[CoreTerm] = []
    seen: set[tuple[str, tuple[str, ...]]] = set()
    names = list(var_env)
    for f, fu in bound_env.items():
        arg_sorts: list[UType] = []
        u = fu
        while isinstance(u, UFun):
            arg_sorts.append(u.dom)
            u = u.cod
        if not isinstance(u, UBool):
            continue
        tuples: list[list[str]] = [[]]
        for sort in arg_sorts:
            matching = [n for n in names if var_env[n] == sort]
            tuples = [t + [m] for t in tuples for m in matching]
        for t in tuples:
            key = (f, tuple(t))
            if key in seen:
                continue
            seen.add(key)
            app: CoreTerm = Var(f)
            for x in t:
                app = App(app, Var(x))
            out.append(app)
    return out


def _mentions(call: CoreTerm, name: str) -> bool:
    match call:
        case App(f, a):
            return _mentions(f, name) or _mentions(a, name)
        case Var(n):
            return n == name
        case _:
            return False


class Elaborator:
    """Carries the fresh-name supply, materialization mode and stats."""

    def __init__(
        self,
        supply: Optional[NameSupply] = None,
        materialize_all: bool = False,
        max_materialize: Optional[int] = None,
    ):
        self.supply = supply or NameSupply()
        self.materialize_all = materialize_all
        self.max_materialize = max_materialize
        self.stats = MaterializeStats()

    # -- weaving ------------------------------------------------------------

    def weave(
        self,
        var_env: dict[str, UType],
        bound_env: dict[str, UType],
        e: CoreTerm,
        new_binding: tuple[str, Optional[UType]],
    ) -> CoreTerm:
        """Wrap e in let-bound ghost calls materializing the bound
        constraints for the newly introduced binder."""
        if not bound_env:
            return e
        name, _ = new_binding
        cands = candidates(var_env, bound_env)
        if not self.materialize_all:
            cands = [c for c in cands if _mentions(c, name)]
        budget = sum(
            len([n for n in var_env]) ** _ghost_arity(u) for u in bound_env.values()
        )
        self.stats.sites.append((name, len(cands), budget))
        if self.max_materialize is not None and len(cands) > self.max_materialize:
            raise BoundcheckError(
                f"materialization at {name} needs {len(cands)} ghost calls, "
                f"over the --max-materialize cap {self.max_materialize}"
            )
        for c in reversed(cands):
            e = Let(self.supply.fresh("$m"), c, e, span=e.span)
        return e

    # -- translation ----------------------------------------------------------

    def translate(
        self,
        var_env: dict[str, UType],
        bound_env: dict[str, UType],
        e: CoreTerm,
        shapes: Optional[dict[str, UType]] = None,
        schema: Optional[Schema] = None,
    ) -> CoreTerm:
        """Translate a bounded term to the plain core language.

        var_env/bound_env map names to shapes; `shapes` carries the shapes
        of the enclosing top-level definitions and trusted primitives.
        `schema` (the definition's annotation) supplies binder shapes for
        unannotated lambdas.
        """
        self._top = dict(shapes or {})
        return self._tx(dict(var_env), dict(bound_env), e, schema)

    def _tx(
        self,
        venv: dict[str, UType],
        benv: dict[str, UType],
        e: CoreTerm,
        exp: Optional[Schema],
    ) -> CoreTerm:
        match e:
            case Var(_) | Const(_):
                return e
            case Lam(b, bt, body):
                exp_dom, exp_cod = _expected_arrow(exp)
                shape = to_shape(bt) if bt is not None else exp_dom
                venv2 = dict(venv)
                if shape is not None:
                    venv2[b] = shape
                body2 = self._tx(venv2, benv, body, exp_cod)
                woven = self.weave(venv2, benv, body2, (b, shape))
                return Lam(b, bt, woven, span=e.span)
            case App(_, _):
                # rebuild the whole spine so witness lets introduced by a
                # bound application at its head wrap the full application
                args: list[CoreTerm] = []
                spans = []
                t = e
                while isinstance(t, App):
                    args.append(t.arg)
                    spans.append(t.span)
                    t = t.fun
                args.reverse()
                spans.reverse()
                head = self._tx(venv, benv, t, None)
                wlets: list[tuple[str, CoreTerm]] = []
                while isinstance(head, Let):
                    wlets.append((head.binder, head.bound))
                    head = head.body
                core: CoreTerm = head
                for a, sp in zip(args, spans):
                    core = App(core, self._tx(venv, benv, a, None), span=sp)
                for wn, w in reversed(wlets):
                    core = Let(wn, w, core, span=e.span)
                return core
            case Let(b, bound, body, annot, rec):
                bound2 = self._tx(venv, benv, bound, annot)
                shape = self._shape_of(venv, benv, bound2)
                if shape is None and annot is not None:
                    shape = schema_shape(annot)
                venv2 = dict(venv)
                if shape is not None:
                    venv2[b] = shape
                body2 = self._tx(venv2, benv, body, exp)
                woven = self.weave(venv2, benv, body2, (b, shape))
                return Let(b, bound2, woven, annot, rec, span=e.span)
            case TLam(a, body):
                inner = exp.body if isinstance(exp, SAll) else None
                return TLam(a, self._tx(venv, benv, body, inner), span=e.span)
            case TApp(t, ty):
                return TApp(self._tx(venv, benv, t, None), ty, span=e.span)
            case PLam(p, pt, body):
                inner = exp.body if isinstance(exp, SPAll) else None
                return PLam(p, pt, self._tx(venv, benv, body, inner), span=e.span)
            case PAppT(t, phi):
                return PAppT(self._tx(venv, benv, t, None), phi, span=e.span)
            case CAbs(bd, body):
                _check_bound(bd)
                f = self.supply.fresh("$bf")
                benv2 = dict(benv)
                benv2[f] = bound_shape(bd)
                inner = exp.body if isinstance(exp, SBound) else exp
                body2 = self._tx(venv, benv2, body, inner)
                return Lam(f, tx_bound_type(bd), body2, span=e.span)
            case CApp(_, _):
                # peel the whole chain so witness lets stay outside the
                # application spine (ANF: spine heads remain variables)
                bounds: list[Bound] = []
                t = e
                while isinstance(t, CApp):
                    _check_bound(t.bound)
                    bounds.append(t.bound)
                    t = t.term
                bounds.reverse()  # outermost bound applied first
                t2 = self._tx(venv, benv, t, None)
                wnames: list[str] = []
                witnesses: list[CoreTerm] = []
                for bd in bounds:
                    wnames.append(self.supply.fresh("$w"))
                    witnesses.append(self._witness(venv, benv, bd))
                app: CoreTerm = t2
                for wn in wnames:
                    app = App(app, Var(wn, span=e.span), span=e.span)
                for wn, w in zip(reversed(wnames), reversed(witnesses)):
                    app = Let(wn, w, app, span=e.span)
                return app
        raise TypeError(e)

    def _witness(self, venv: dict[str, UType], benv: dict[str, UType], bd: Bound) -> CoreTerm:
        """Build the constant-true witness, weaving ghost calls through its
        body like any other lambda chain (binders are left unannotated so
        checking takes their types from the expected ghost type)."""
        body: CoreTerm = Const(True)
        venv2 = dict(venv)
        for name, base in bd.params:
            venv2[name] = to_shape(t_base(base))
        for name, base in reversed(bd.params):
            woven = self.weave(venv2, benv, body, (name, to_shape(t_base(base))))
            body = Lam(name, None, woven)
            del venv2[name]
        return body

    def _shape_of(self, venv: dict[str, UType], benv: dict[str, UType], e: CoreTerm) -> Optional[UType]:
        """Best-effort syntactic shape of an ANF-bound expression; None when
        it cannot be determined locally (such binders are simply never
        eligible as ghost-call arguments)."""
        match e:
            case Const(v):
                return UBool() if isinstance(v, bool) else UInt()
            case Var(n):
                if n in venv:
                    return venv[n]
                if n in benv:
                    return benv[n]
                if n in self._top:
                    return self._top[n]
                if n in PRELUDE:
                    return schema_shape(PRELUDE[n])
                return None
            case App(f, _):
                fu = self._shape_of(venv, benv, f)
                if isinstance(fu, UFun):
                    return fu.cod
                return None
            case Lam(_, bt, body):
                if bt is None:
                    return None
                inner = self._shape_of(venv, benv, body)
                return UFun(to_shape(bt), inner) if inner is not None else None
            case Let(_, _, body, _, _):
                return self._shape_of(venv, benv, body)
            case _:
                return None


def _expected_arrow(exp: Optional[Schema]) -> tuple[Optional[UType], Optional[Schema]]:
    """Domain shape and codomain schema of an expected arrow, if known."""
    if isinstance(exp, SMono) and isinstance(exp.ty, TFun):
        return to_shape(exp.ty.dom), SMono(exp.ty.cod)
    return None, None


def _ghost_arity(u: UType) -> int:
    n = 0
    while isinstance(u, UFun):
        n += 1
        u = u.cod
    return n


def _check_bound(bd: Bound) -> None:
    """Horn-shape validation: atomic antecedents, atomic consequent."""
    from .core import RAnd, RImp, RVarApp

    r = bd.body
    ok = True
    while isinstance(r, RImp):
        if isinstance(r.lhs, (RAnd, RImp)):
            ok = False
        r = r.rhs
    if isinstance(r, (RAnd, RImp)):
        ok = False
    if not ok:
        raise MalformedBound(f"bound {bd.name} is not Horn-shaped")


# ---------------------------------------------------------------------------
# Whole-definition driver
# ---------------------------------------------------------------------------


def translate_def(
    elab: Elaborator,
    term: CoreTerm,
    top_shapes: dict[str, UType],
) -> CoreTerm:
    """Elaborate one definition body (already in ANF)."""
    return elab.translate({}, {}, term, shapes=top_shapes)
