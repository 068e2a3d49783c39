"""Shape checking and inference over elaborated terms.

Shapes are refinement-erased types. This pass:
  - rejects programs whose erasure is not well-typed (so any accepted
    program erases to a program the plain shape system accepts);
  - resolves the shapes at which each reference to a polymorphic name
    instantiates its type variables (recorded per occurrence);
  - resolves the shapes of unannotated binders.

Both maps are keyed by node identity of the checked term.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
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
    SAll,
    SBound,
    SMono,
    SPAll,
    Schema,
    TApp,
    TLam,
    U_BOOL,
    U_INT,
    UFun,
    UType,
    UVar,
    Var,
    schema_shape,
    to_shape,
)
from .errors import NotAFunction, ShapeMismatch, UnboundVariable
from .prelude import PRELUDE


@dataclass(frozen=True)
class UMeta(UType):
    """A unification variable (internal to this pass)."""

    uid: int

    def __str__(self) -> str:
        return f"?{self.uid}"


class ShapeError(ShapeMismatch):
    pass


@dataclass
class ShapeResult:
    """Instantiation shapes per polymorphic reference and binder shapes per
    unannotated binder, keyed by id() of the relevant node."""

    instantiations: dict[int, list[tuple[str, UType]]]
    binder_shapes: dict[int, UType]
    synthesized: UType


class ShapeChecker:
    def __init__(self, top: dict[str, Schema]):
        self.top = top
        self.subst: dict[int, UType] = {}
        self.uid = itertools.count()
        self.instantiations: dict[int, list[tuple[str, UType]]] = {}
        self.binder_shapes: dict[int, UType] = {}

    # -- unification ---------------------------------------------------------

    def fresh(self) -> UMeta:
        return UMeta(next(self.uid))

    def resolve(self, u: UType) -> UType:
        while isinstance(u, UMeta) and u.uid in self.subst:
            u = self.subst[u.uid]
        return u

    def zonk(self, u: UType) -> UType:
        u = self.resolve(u)
        if isinstance(u, UFun):
            return UFun(self.zonk(u.dom), self.zonk(u.cod))
        return u

    def _occurs(self, m: UMeta, u: UType) -> bool:
        u = self.resolve(u)
        if isinstance(u, UMeta):
            return u.uid == m.uid
        if isinstance(u, UFun):
            return self._occurs(m, u.dom) or self._occurs(m, u.cod)
        return False

    def unify(self, a: UType, b: UType, at: CoreTerm) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, UMeta):
            if self._occurs(a, b):
                raise ShapeError(f"infinite shape {a} = {b}", at.span)
            self.subst[a.uid] = b
            return
        if isinstance(b, UMeta):
            self.unify(b, a, at)
            return
        if isinstance(a, UFun) and isinstance(b, UFun):
            self.unify(a.dom, b.dom, at)
            self.unify(a.cod, b.cod, at)
            return
        raise ShapeError(f"shape mismatch: {self.zonk(a)} vs {self.zonk(b)}", at.span)

    # -- schema instantiation --------------------------------------------------

    def instantiate(self, node: CoreTerm, schema: Schema) -> UType:
        """Fresh metas for the schema's type variables; records them so the
        refinement checker can build matching templates later."""
        tyvars: list[str] = []
        s = schema
        while True:
            match s:
                case SAll(a, b):
                    tyvars.append(a)
                    s = b
                case SPAll(_, _, b) | SBound(_, b):
                    s = b
                case SMono(_):
                    break
                case _:
                    raise TypeError(s)
        shape = schema_shape(schema)
        if not tyvars:
            return shape
        mapping = {a: self.fresh() for a in tyvars}
        self.instantiations[id(node)] = [(a, mapping[a]) for a in tyvars]
        return _subst_shape(shape, mapping)

    # -- traversal ---------------------------------------------------------------

    def check_def(self, term: CoreTerm, annot: Optional[Schema], name: str) -> ShapeResult:
        env: dict[str, UType] = {}
        tyvars: set[str] = set()
        if annot is not None:
            env[name] = schema_shape(annot)  # recursion sees the full shape
        got = self.infer(term, env, tyvars)
        if annot is not None:
            self.unify(got, schema_shape(annot), term)
        result = ShapeResult(
            {k: [(a, self.zonk(u)) for a, u in v] for k, v in self.instantiations.items()},
            {k: self.zonk(u) for k, u in self.binder_shapes.items()},
            self.zonk(got),
        )
        return result

    def infer(self, e: CoreTerm, env: dict[str, UType], tyvars: set[str]) -> UType:
        match e:
            case Const(v):
                return U_BOOL if isinstance(v, bool) else U_INT
            case Var(n):
                if n in env:
                    return env[n]
                if n in self.top:
                    return self.instantiate(e, self.top[n])
                if n in PRELUDE:
                    return self.instantiate(e, PRELUDE[n])
                raise UnboundVariable(f"unbound variable {n}", e.span)
            case Lam(b, bt, body):
                if bt is not None:
                    dom = to_shape(bt)
                else:
                    dom = self.fresh()
                    self.binder_shapes[id(e)] = dom
                cod = self.infer(body, {**env, b: dom}, tyvars)
                return UFun(dom, cod)
            case App(f, a):
                fu = self.resolve(self.infer(f, env, tyvars))
                au = self.infer(a, env, tyvars)
                if isinstance(fu, UFun):
                    self.unify(fu.dom, au, e)
                    return fu.cod
                if isinstance(fu, UMeta):
                    cod = self.fresh()
                    self.unify(fu, UFun(au, cod), e)
                    return cod
                raise NotAFunction(f"applied expression has shape {self.zonk(fu)}", e.span)
            case Let(b, bound, body, annot, rec):
                if annot is not None:
                    bshape = schema_shape(annot)
                    benv = {**env, b: bshape} if rec else env
                    got = self.infer(bound, benv, tyvars)
                    self.unify(got, bshape, e)
                else:
                    if rec:
                        raise UnboundVariable(
                            f"recursive let {b} requires a schema annotation", e.span
                        )
                    bshape = self.infer(bound, env, tyvars)
                    self.binder_shapes[id(e)] = bshape
                return self.infer(body, {**env, b: bshape}, tyvars)
            case TLam(a, body):
                return self.infer(body, env, tyvars | {a})
            case TApp(t, ty):
                u = self.infer(t, env, tyvars)
                # pin the corresponding recorded meta to the explicit type
                node, depth = t, 0
                while isinstance(node, TApp):
                    node, depth = node.term, depth + 1
                if isinstance(node, Var) and id(node) in self.instantiations:
                    insts = self.instantiations[id(node)]
                    if depth < len(insts):
                        self.unify(insts[depth][1], to_shape(ty), e)
                return u
            case PLam(_, _, body):
                return self.infer(body, env, tyvars)
            case PAppT(t, _):
                return self.infer(t, env, tyvars)
            case CAbs(_, _) | CApp(_, _):
                raise ShapeError("bound abstraction survived elaboration", e.span)
        raise TypeError(e)


def _subst_shape(u: UType, mapping: dict[str, UType]) -> UType:
    match u:
        case UVar(n):
            return mapping.get(n, u)
        case UFun(d, c):
            return UFun(_subst_shape(d, mapping), _subst_shape(c, mapping))
        case _:
            return u


def check_def_shapes(term: CoreTerm, annot: Optional[Schema], name: str, top: dict[str, Schema]) -> ShapeResult:
    """Shape-check one (elaborated) definition against the environment of
    previously checked top-level schemas. Unresolved instantiation metas
    default to Int."""
    ck = ShapeChecker(top)
    result = ck.check_def(term, annot, name)
    result.instantiations = {
        k: [(a, _default_metas(u)) for a, u in v] for k, v in result.instantiations.items()
    }
    result.binder_shapes = {k: _default_metas(u) for k, u in result.binder_shapes.items()}
    result.synthesized = _default_metas(result.synthesized)
    return result


def _default_metas(u: UType) -> UType:
    if isinstance(u, UMeta):
        return U_INT
    if isinstance(u, UFun):
        return UFun(_default_metas(u.dom), _default_metas(u.cod))
    return u
