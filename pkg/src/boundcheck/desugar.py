"""Resolve a parsed program into well-scoped core terms.

Responsibilities:
  - resolve bound attachments `(Name p q ...) => sigma` against their
    declarations into full Bound instances (value-parameter base types are
    inferred from the actual rvars' sorts);
  - classify refinement applications: heads that name a quantified rvar
    stay abstract, heads naming declared uninterpreted functions become
    concrete predicates, anything else is an error;
  - wrap each annotated definition's body in TLam/PLam/CAbs matching its
    schema quantifiers, and insert a bound application at every reference
    to a definition whose schema carries bounds;
  - alpha-rename so binders are globally unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    App,
    B_BOOL,
    B_INT,
    Base,
    Bound,
    CAbs,
    CApp,
    Const,
    CoreTerm,
    Lam,
    Let,
    PApp,
    PAppT,
    PLam,
    RAnd,
    RConc,
    RImp,
    RKappa,
    RType,
    RVarApp,
    Refinement,
    SAll,
    SBound,
    SMono,
    SPAll,
    Schema,
    TApp,
    TBase,
    TFun,
    TLam,
    Var,
    alpha_rename,
    pred_free_vars,
)
from .errors import (
    MalformedBound,
    NO_SPAN,
    Span,
    UnboundIdentifier,
    UnboundRefinementVar,
)
from .names import NameSupply
from .surface import BoundDecl, Def, Program, Qualifier


@dataclass(frozen=True)
class ResolvedDef:
    name: str
    schema: Optional[Schema]  # resolved annotation, if any
    term: CoreTerm  # quantifier-wrapped body
    recursive: bool
    span: Span


@dataclass(frozen=True)
class ResolvedProgram:
    qualifiers: tuple[Qualifier, ...]
    uninterp: dict[str, tuple[tuple[Base, ...], Base]]
    bound_decls: dict[str, BoundDecl]
    assumes: tuple[tuple[str, Schema], ...]
    defs: tuple[ResolvedDef, ...]


def schema_bounds(sch: Optional[Schema]) -> tuple[Bound, ...]:
    """The bound instances attached to a schema, outermost first."""
    out: list[Bound] = []
    while sch is not None:
        match sch:
            case SBound(bd, b):
                out.append(bd)
                sch = b
            case SAll(_, b) | SPAll(_, _, b):
                sch = b
            case _:
                break
    return tuple(out)


def desugar_program(prog: Program, supply: Optional[NameSupply] = None) -> ResolvedProgram:
    supply = supply or NameSupply()
    decls = {b.name: b for b in prog.bounds}
    uninterp = {name: (args, res) for name, args, res in prog.uninterp_funs}

    assumes: list[tuple[str, Schema]] = []
    for name, sch in prog.assumes:
        assumes.append((name, _resolve_schema(sch, decls, uninterp, name)))

    bounded: dict[str, tuple[Bound, ...]] = {name: schema_bounds(s) for name, s in assumes}
    used: set[str] = {name for name, _ in assumes} | {d.name for d in prog.defs}

    defs: list[ResolvedDef] = []
    for d in prog.defs:
        schema = _resolve_schema(d.annot, decls, uninterp, d.name) if d.annot is not None else None
        self_bounds = {d.name: schema_bounds(schema)} if d.recursive else {}
        body = _insert_bound_apps(d.term, {**bounded, **self_bounds})
        body = _resolve_term_refts(body, decls, uninterp, d.name)
        if schema is not None:
            body = _wrap_quantifiers(body, schema)
        body = alpha_rename(body, supply, used)
        defs.append(ResolvedDef(d.name, schema, body, d.recursive, d.span))
        bounded[d.name] = schema_bounds(schema)
    return ResolvedProgram(prog.qualifiers, uninterp, decls, tuple(assumes), tuple(defs))


# ---------------------------------------------------------------------------
# Bound resolution
# ---------------------------------------------------------------------------


def instantiate_bound_decl(
    decl: BoundDecl, rvar_args: tuple[str, ...], rvar_sorts: dict[str, RType]
) -> Bound:
    """Build a Bound instance from a declaration and actual rvar names.

    Value-parameter base types come from the positions at which each
    parameter is applied to the (sorted) actual rvars.
    """
    if len(rvar_args) != len(decl.rvar_formals):
        raise MalformedBound(
            f"bound {decl.name} takes {len(decl.rvar_formals)} refinement parameters, "
            f"got {len(rvar_args)}",
            decl.span,
        )
    formal_to_actual = dict(zip(decl.rvar_formals, rvar_args))
    body = _rename_rvar_heads(decl.body, formal_to_actual)

    param_types: dict[str, Base] = {}

    def visit(r: Refinement) -> None:
        match r:
            case RVarApp(head, args):
                sorts = _rvar_arg_sorts(head, rvar_sorts, decl)
                for a, s in zip(args, sorts):
                    fvs = sorted(pred_free_vars(a))
                    if len(fvs) == 1 and fvs[0] in decl.params:
                        param_types.setdefault(fvs[0], s)
            case RAnd(l, rr) | RImp(l, rr):
                visit(l)
                visit(rr)
            case _:
                pass

    visit(body)
    params = tuple(
        (p, param_types.get(p, B_BOOL if _used_as_bool(body, p) else B_INT))
        for p in decl.params
    )
    _validate_horn(body, decl)
    return Bound(decl.name, params, body, rvars=rvar_args)


def _used_as_bool(body: Refinement, param: str) -> bool:
    """A bound parameter standing alone as an atom is Bool-sorted."""
    from .core import PVar

    match body:
        case RConc(PVar(n)):
            return n == param
        case RAnd(l, r) | RImp(l, r):
            return _used_as_bool(l, param) or _used_as_bool(r, param)
        case _:
            return False


def _rvar_arg_sorts(head: str, rvar_sorts: dict[str, RType], decl: BoundDecl) -> list[Base]:
    t = rvar_sorts.get(head)
    if t is None:
        raise UnboundRefinementVar(
            f"refinement variable {head} in bound {decl.name} is not quantified", decl.span
        )
    sorts: list[Base] = []
    while isinstance(t, TFun):
        d = t.dom
        if not isinstance(d, TBase):
            raise MalformedBound(f"refinement variable {head} has a non-base argument sort", decl.span)
        sorts.append(d.base)
        t = t.cod
    return sorts


def _rename_rvar_heads(r: Refinement, mapping: dict[str, str]) -> Refinement:
    match r:
        case RConc(_) | RKappa(_, _):
            return r
        case RVarApp(n, args):
            return RVarApp(mapping.get(n, n), args)
        case RAnd(l, rr):
            return RAnd(_rename_rvar_heads(l, mapping), _rename_rvar_heads(rr, mapping))
        case RImp(l, rr):
            return RImp(_rename_rvar_heads(l, mapping), _rename_rvar_heads(rr, mapping))
    raise TypeError(r)


def _validate_horn(body: Refinement, decl: BoundDecl) -> None:
    """Bound bodies are s1 => ... => sn => s with atomic antecedents and an
    atomic consequent, mentioning at least one abstract application."""
    r = body
    seen_rvar = False
    while isinstance(r, RImp):
        if isinstance(r.lhs, (RAnd, RImp)):
            raise MalformedBound(f"bound {decl.name}: antecedent must be atomic", decl.span)
        seen_rvar = seen_rvar or isinstance(r.lhs, RVarApp)
        r = r.rhs
    if isinstance(r, (RAnd, RImp)):
        raise MalformedBound(f"bound {decl.name}: consequent must be atomic", decl.span)
    seen_rvar = seen_rvar or isinstance(r, RVarApp)
    if not seen_rvar:
        raise MalformedBound(f"bound {decl.name}: no abstract refinement application in body", decl.span)


# ---------------------------------------------------------------------------
# Schema resolution
# ---------------------------------------------------------------------------


def _resolve_schema(
    sch: Schema,
    decls: dict[str, BoundDecl],
    uninterp: dict[str, tuple[tuple[Base, ...], Base]],
    where: str,
) -> Schema:
    rvar_sorts: dict[str, RType] = {}

    def go(s: Schema) -> Schema:
        match s:
            case SMono(t):
                return SMono(_resolve_type(t, rvar_sorts, uninterp, where))
            case SAll(a, b):
                return SAll(a, go(b))
            case SPAll(p, pt, b):
                rvar_sorts[p] = pt
                return SPAll(p, pt, go(b))
            case SBound(bd, b):
                decl = decls.get(bd.name)
                if decl is None:
                    raise UnboundIdentifier(f"bound {bd.name} referenced in {where} is not declared", NO_SPAN)
                for rv in bd.rvars:
                    if rv not in rvar_sorts:
                        raise UnboundRefinementVar(
                            f"refinement variable {rv} attached to bound {bd.name} in {where} is not quantified",
                            NO_SPAN,
                        )
                inst = instantiate_bound_decl(decl, bd.rvars, rvar_sorts)
                return SBound(inst, go(b))
        raise TypeError(s)

    return go(sch)


def _resolve_type(
    t: RType,
    rvar_sorts: dict[str, RType],
    uninterp: dict[str, tuple[tuple[Base, ...], Base]],
    where: str,
) -> RType:
    match t:
        case TBase(b, v, r):
            return TBase(b, v, resolve_refinement(r, set(rvar_sorts), uninterp, where))
        case TFun(x, d, c, r):
            return TFun(
                x,
                _resolve_type(d, rvar_sorts, uninterp, where),
                _resolve_type(c, rvar_sorts, uninterp, where),
                resolve_refinement(r, set(rvar_sorts), uninterp, where),
            )
    raise TypeError(t)


def resolve_refinement(
    r: Refinement,
    rvars: set[str],
    uninterp: dict[str, tuple[tuple[Base, ...], Base]],
    where: str,
) -> Refinement:
    """Classify RVarApp heads: quantified rvars stay abstract; declared
    uninterpreted functions become concrete predicate applications."""
    match r:
        case RConc(_) | RKappa(_, _):
            return r
        case RVarApp(n, args):
            if n in rvars:
                return r
            if n in uninterp:
                return RConc(PApp(n, args))
            raise UnboundRefinementVar(f"refinement variable {n} in {where} is not quantified", NO_SPAN)
        case RAnd(l, rr):
            return RAnd(
                resolve_refinement(l, rvars, uninterp, where),
                resolve_refinement(rr, rvars, uninterp, where),
            )
        case RImp(l, rr):
            return RImp(
                resolve_refinement(l, rvars, uninterp, where),
                resolve_refinement(rr, rvars, uninterp, where),
            )
    raise TypeError(r)


# ---------------------------------------------------------------------------
# Term resolution
# ---------------------------------------------------------------------------


def _insert_bound_apps(e: CoreTerm, bounded: dict[str, tuple[Bound, ...]]) -> CoreTerm:
    """Wrap every reference to a bounded definition in CApp nodes, one per
    attached bound, outermost bound applied first."""

    def go(e: CoreTerm, shadowed: frozenset[str]) -> CoreTerm:
        match e:
            case Var(n):
                if n in shadowed:
                    return e
                out: CoreTerm = e
                for bd in bounded.get(n, ()):
                    out = CApp(out, bd, span=e.span)
                return out
            case Const(_):
                return e
            case Lam(b, bt, body):
                return Lam(b, bt, go(body, shadowed | {b}), span=e.span)
            case App(f, a):
                return App(go(f, shadowed), go(a, shadowed), span=e.span)
            case Let(b, bound, body, annot, rec):
                inner = shadowed | {b}
                return Let(b, go(bound, inner if rec else shadowed), go(body, inner), annot, rec, span=e.span)
            case TLam(a, body):
                return TLam(a, go(body, shadowed), span=e.span)
            case TApp(t, ty):
                return TApp(go(t, shadowed), ty, span=e.span)
            case PLam(p, pt, body):
                return PLam(p, pt, go(body, shadowed), span=e.span)
            case PAppT(t, phi):
                return PAppT(go(t, shadowed), phi, span=e.span)
            case CAbs(bd, body):
                return CAbs(bd, go(body, shadowed), span=e.span)
            case CApp(t, bd):
                return CApp(go(t, shadowed), bd, span=e.span)
        raise TypeError(e)

    return go(e, frozenset())


def _resolve_term_refts(
    e: CoreTerm,
    decls: dict[str, BoundDecl],
    uninterp: dict[str, tuple[tuple[Base, ...], Base]],
    where: str,
) -> CoreTerm:
    """Resolve refinements inside binder annotations (rvar heads appearing
    in lambda/let annotations), leaving term structure unchanged."""

    rvars: set[str] = set()

    def go_type(t: Optional[RType]) -> Optional[RType]:
        return None if t is None else _resolve_type_with(t)

    def _resolve_type_with(t: RType) -> RType:
        match t:
            case TBase(b, v, r):
                return TBase(b, v, resolve_refinement(r, rvars, uninterp, where))
            case TFun(x, d, c, r):
                return TFun(x, _resolve_type_with(d), _resolve_type_with(c), resolve_refinement(r, rvars, uninterp, where))
        raise TypeError(t)

    def go(e: CoreTerm) -> CoreTerm:
        match e:
            case Var(_) | Const(_):
                return e
            case Lam(b, bt, body):
                return Lam(b, go_type(bt), go(body), span=e.span)
            case App(f, a):
                return App(go(f), go(a), span=e.span)
            case Let(b, bound, body, annot, rec):
                return Let(b, go(bound), go(body), annot, rec, span=e.span)
            case TLam(a, body):
                return TLam(a, go(body), span=e.span)
            case TApp(t, ty):
                return TApp(go(t), _resolve_type_with(ty), span=e.span)
            case PLam(p, pt, body):
                rvars.add(p)
                out = PLam(p, _resolve_type_with(pt), go(body), span=e.span)
                return out
            case PAppT(t, phi):
                return PAppT(go(t), phi, span=e.span)
            case CAbs(bd, body):
                return CAbs(bd, go(body), span=e.span)
            case CApp(t, bd):
                return CApp(go(t), bd, span=e.span)
        raise TypeError(e)

    return go(e)


def _wrap_quantifiers(body: CoreTerm, schema: Schema) -> CoreTerm:
    """Wrap a definition body in TLam/PLam/CAbs mirroring its schema."""
    match schema:
        case SMono(_):
            return body
        case SAll(a, b):
            return TLam(a, _wrap_quantifiers(body, b), span=body.span)
        case SPAll(p, pt, b):
            return PLam(p, pt, _wrap_quantifiers(body, b), span=body.span)
        case SBound(bd, b):
            return CAbs(bd, _wrap_quantifiers(body, b), span=body.span)
    raise TypeError(schema)
