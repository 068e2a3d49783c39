"""Abstract syntax of the core calculus and its bounded extension.

Terms, refined types, schemas and bounds; shape erasure; capture-avoiding
substitution; abstract-refinement instantiation; alpha renaming.

Conventions:
  - applications of abstract refinements carry *all* their arguments
    explicitly (the value variable, when present, is the last argument);
  - implication nodes in refinements are only legal inside bound bodies
    and in types produced by bound elaboration;
  - after parsing, every binder in a program is globally unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

from .errors import NO_SPAN, ArityMismatch, Span
from .names import NameSupply

# ---------------------------------------------------------------------------
# Refinement-logic terms (the SMT-embeddable fragment)
# ---------------------------------------------------------------------------

# Binary operators of the logic, grouped by signature.
ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or", "=>", "<=>")


@dataclass(frozen=True)
class Pred:
    """Base class for logic terms."""


@dataclass(frozen=True)
class PVar(Pred):
    name: str


@dataclass(frozen=True)
class PInt(Pred):
    value: int


@dataclass(frozen=True)
class PBool(Pred):
    value: bool


@dataclass(frozen=True)
class PBin(Pred):
    op: str
    lhs: Pred
    rhs: Pred


@dataclass(frozen=True)
class PNot(Pred):
    arg: Pred


@dataclass(frozen=True)
class PIte(Pred):
    cond: Pred
    then: Pred
    els: Pred


@dataclass(frozen=True)
class PApp(Pred):
    """Application of a declared uninterpreted function."""

    fun: str
    args: tuple[Pred, ...]


TRUE = PBool(True)
FALSE = PBool(False)


def pred_free_vars(p: Pred) -> set[str]:
    match p:
        case PVar(n):
            return {n}
        case PInt() | PBool():
            return set()
        case PBin(_, l, r):
            return pred_free_vars(l) | pred_free_vars(r)
        case PNot(a):
            return pred_free_vars(a)
        case PIte(c, t, e):
            return pred_free_vars(c) | pred_free_vars(t) | pred_free_vars(e)
        case PApp(_, args):
            out: set[str] = set()
            for a in args:
                out |= pred_free_vars(a)
            return out
    raise TypeError(p)


def pred_subst(p: Pred, mapping: dict[str, Pred]) -> Pred:
    """Simultaneous substitution of logic terms for variables."""
    match p:
        case PVar(n):
            return mapping.get(n, p)
        case PInt() | PBool():
            return p
        case PBin(op, l, r):
            return PBin(op, pred_subst(l, mapping), pred_subst(r, mapping))
        case PNot(a):
            return PNot(pred_subst(a, mapping))
        case PIte(c, t, e):
            return PIte(pred_subst(c, mapping), pred_subst(t, mapping), pred_subst(e, mapping))
        case PApp(f, args):
            return PApp(f, tuple(pred_subst(a, mapping) for a in args))
    raise TypeError(p)


# ---------------------------------------------------------------------------
# Refinements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Refinement:
    """Base class for refinement trees."""


@dataclass(frozen=True)
class RConc(Refinement):
    """A concrete predicate from the refinement logic."""

    pred: Pred


@dataclass(frozen=True)
class RVarApp(Refinement):
    """Application of an abstract refinement variable to logic terms.

    All arguments are explicit; by construction the value variable, when
    one is involved, is the last argument.
    """

    rvar: str
    args: tuple[Pred, ...]


@dataclass(frozen=True)
class RKappa(Refinement):
    """Application of an inference placeholder (appears only in templates)."""

    kvar: str
    args: tuple[Pred, ...]


@dataclass(frozen=True)
class RAnd(Refinement):
    lhs: Refinement
    rhs: Refinement


@dataclass(frozen=True)
class RImp(Refinement):
    """Implication; legal only inside bound bodies and elaborated ghost types."""

    lhs: Refinement
    rhs: Refinement


R_TRUE = RConc(TRUE)


def is_trivially_true(r: Refinement) -> bool:
    return isinstance(r, RConc) and r.pred == TRUE


def r_and(*parts: Refinement) -> Refinement:
    """Conjunction, dropping trivially-true conjuncts."""
    out: Optional[Refinement] = None
    for p in parts:
        if is_trivially_true(p):
            continue
        out = p if out is None else RAnd(out, p)
    return out if out is not None else R_TRUE


def conjuncts(r: Refinement) -> Iterator[Refinement]:
    if isinstance(r, RAnd):
        yield from conjuncts(r.lhs)
        yield from conjuncts(r.rhs)
    else:
        yield r


def refinement_free_vars(r: Refinement) -> set[str]:
    match r:
        case RConc(p):
            return pred_free_vars(p)
        case RVarApp(_, args) | RKappa(_, args):
            out: set[str] = set()
            for a in args:
                out |= pred_free_vars(a)
            return out
        case RAnd(l, rr) | RImp(l, rr):
            return refinement_free_vars(l) | refinement_free_vars(rr)
    raise TypeError(r)


def refinement_rvars(r: Refinement) -> set[str]:
    """Names of abstract refinement variables applied anywhere in r."""
    match r:
        case RConc(_):
            return set()
        case RVarApp(n, _):
            return {n}
        case RKappa(_, _):
            return set()
        case RAnd(l, rr) | RImp(l, rr):
            return refinement_rvars(l) | refinement_rvars(rr)
    raise TypeError(r)


def refinement_kappas(r: Refinement) -> set[str]:
    match r:
        case RConc(_) | RVarApp(_, _):
            return set()
        case RKappa(n, _):
            return {n}
        case RAnd(l, rr) | RImp(l, rr):
            return refinement_kappas(l) | refinement_kappas(rr)
    raise TypeError(r)


def refinement_subst(r: Refinement, mapping: dict[str, Pred]) -> Refinement:
    match r:
        case RConc(p):
            return RConc(pred_subst(p, mapping))
        case RVarApp(n, args):
            return RVarApp(n, tuple(pred_subst(a, mapping) for a in args))
        case RKappa(n, args):
            return RKappa(n, tuple(pred_subst(a, mapping) for a in args))
        case RAnd(l, rr):
            return RAnd(refinement_subst(l, mapping), refinement_subst(rr, mapping))
        case RImp(l, rr):
            return RImp(refinement_subst(l, mapping), refinement_subst(rr, mapping))
    raise TypeError(r)


def has_implication(r: Refinement) -> bool:
    match r:
        case RImp(_, _):
            return True
        case RAnd(l, rr):
            return has_implication(l) or has_implication(rr)
        case _:
            return False


# ---------------------------------------------------------------------------
# Unrefined shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UType:
    pass


@dataclass(frozen=True)
class UInt(UType):
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class UBool(UType):
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class UVar(UType):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class UFun(UType):
    dom: UType
    cod: UType

    def __str__(self) -> str:
        d = f"({self.dom})" if isinstance(self.dom, UFun) else str(self.dom)
        return f"{d} -> {self.cod}"


U_INT = UInt()
U_BOOL = UBool()


def shape_args(u: UType) -> tuple[list[UType], UType]:
    """Split an arrow shape into (argument shapes, result shape)."""
    args = []
    while isinstance(u, UFun):
        args.append(u.dom)
        u = u.cod
    return args, u


# ---------------------------------------------------------------------------
# Refined types, schemas, bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Base:
    """A basic type: Int, Bool, or a type variable."""

    kind: str  # "Int" | "Bool" | "var"
    name: str = ""

    def __str__(self) -> str:
        return self.name if self.kind == "var" else self.kind


B_INT = Base("Int")
B_BOOL = Base("Bool")


def b_var(name: str) -> Base:
    return Base("var", name)


@dataclass(frozen=True)
class RType:
    pass


@dataclass(frozen=True)
class TBase(RType):
    base: Base
    vvar: str
    reft: Refinement


@dataclass(frozen=True)
class TFun(RType):
    binder: str
    dom: RType
    cod: RType
    reft: Refinement = R_TRUE  # syntactically true on well-formed programs


def t_base(base: Base, vvar: str = "v", reft: Refinement = R_TRUE) -> TBase:
    return TBase(base, vvar, reft)


@dataclass(frozen=True)
class Bound:
    """A parametric Horn-shaped constraint between abstract refinements.

    `params` are the value parameters (with base types); the body is an
    implication chain whose antecedents and consequent are atomic.
    `rvars` records which abstract refinement variables the instance
    constrains, in attachment order (used for display and resolution).
    """

    name: str
    params: tuple[tuple[str, Base], ...]
    body: Refinement
    rvars: tuple[str, ...] = ()


@dataclass(frozen=True)
class Schema:
    pass


@dataclass(frozen=True)
class SMono(Schema):
    ty: RType


@dataclass(frozen=True)
class SAll(Schema):
    tyvar: str
    body: Schema


@dataclass(frozen=True)
class SPAll(Schema):
    rvar: str
    rvar_ty: RType
    body: Schema


@dataclass(frozen=True)
class SBound(Schema):
    bound: Bound
    body: Schema


def schema_mono(s: Schema) -> RType:
    """The monomorphic core of a schema (unwraps all quantifiers)."""
    while True:
        match s:
            case SMono(t):
                return t
            case SAll(_, b) | SPAll(_, _, b) | SBound(_, b):
                s = b
            case _:
                raise TypeError(s)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoreTerm:
    span: Span = field(default=NO_SPAN, compare=False, kw_only=True)


@dataclass(frozen=True)
class Var(CoreTerm):
    name: str


@dataclass(frozen=True)
class Const(CoreTerm):
    value: Union[int, bool]


@dataclass(frozen=True)
class Lam(CoreTerm):
    binder: str
    binder_ty: Optional[RType]
    body: CoreTerm


@dataclass(frozen=True)
class App(CoreTerm):
    fun: CoreTerm
    arg: CoreTerm  # a Var once in ANF; the parser accepts general terms


@dataclass(frozen=True)
class Let(CoreTerm):
    binder: str
    bound: CoreTerm
    body: CoreTerm
    annot: Optional[Schema] = None
    recursive: bool = False


@dataclass(frozen=True)
class TLam(CoreTerm):
    tyvar: str
    body: CoreTerm


@dataclass(frozen=True)
class TApp(CoreTerm):
    term: CoreTerm
    ty: RType


@dataclass(frozen=True)
class ParamRefinement:
    """A parametric refinement: lambda-closed refinement lam x1:b1...xn:bn. r."""

    params: tuple[tuple[str, Base], ...]
    body: Refinement


@dataclass(frozen=True)
class PLam(CoreTerm):
    rvar: str
    rvar_ty: RType
    body: CoreTerm


@dataclass(frozen=True)
class PAppT(CoreTerm):
    """Refinement application e[phi]."""

    term: CoreTerm
    phi: ParamRefinement


@dataclass(frozen=True)
class CAbs(CoreTerm):
    """Bound abstraction; occurs only before elaboration."""

    bound: Bound
    body: CoreTerm


@dataclass(frozen=True)
class CApp(CoreTerm):
    """Bound application; occurs only before elaboration."""

    term: CoreTerm
    bound: Bound


# ---------------------------------------------------------------------------
# Shape erasure
# ---------------------------------------------------------------------------


def to_shape(t: RType) -> UType:
    """Erase refinements, keeping the function structure."""
    match t:
        case TBase(Base("Int"), _, _):
            return U_INT
        case TBase(Base("Bool"), _, _):
            return U_BOOL
        case TBase(Base("var", n), _, _):
            return UVar(n)
        case TFun(_, d, c, _):
            return UFun(to_shape(d), to_shape(c))
    raise TypeError(t)


def schema_shape(s: Schema) -> UType:
    return to_shape(schema_mono(s))


def bound_shape(b: Bound) -> UType:
    """Shape of the ghost function a bound elaborates into."""
    u: UType = U_BOOL
    for _, base in reversed(b.params):
        u = UFun(to_shape(t_base(base)), u)
    return u


# ---------------------------------------------------------------------------
# Substitution into types and schemas
# ---------------------------------------------------------------------------


def type_free_vars(t: RType) -> set[str]:
    match t:
        case TBase(_, v, r):
            return refinement_free_vars(r) - {v}
        case TFun(x, d, c, r):
            return type_free_vars(d) | (type_free_vars(c) - {x}) | refinement_free_vars(r)
    raise TypeError(t)


def subst_type(t: RType, x: str, e: Pred, supply: Optional[NameSupply] = None) -> RType:
    """Capture-avoiding substitution of the logic term e for x in t."""
    match t:
        case TBase(b, v, r):
            if v == x:
                return t
            if isinstance(e, PVar) and e.name == v or v in pred_free_vars(e):
                # rename the value variable away from e's free vars
                supply = supply or NameSupply()
                v2 = supply.fresh("$v")
                while v2 in pred_free_vars(e) or v2 == x:
                    v2 = supply.fresh("$v")
                r = refinement_subst(r, {v: PVar(v2)})
                v = v2
            return TBase(b, v, refinement_subst(r, {x: e}))
        case TFun(w, d, c, r):
            d2 = subst_type(d, x, e, supply)
            if w == x:
                return TFun(w, d2, c, r)
            if w in pred_free_vars(e):
                supply = supply or NameSupply()
                w2 = supply.fresh("$x")
                while w2 in pred_free_vars(e) or w2 == x:
                    w2 = supply.fresh("$x")
                c = subst_rtype_var(c, w, w2)
                w = w2
            return TFun(w, d2, subst_type(c, x, e, supply), refinement_subst(r, {x: e}))
    raise TypeError(t)


def subst_rtype_var(t: RType, x: str, y: str) -> RType:
    return subst_type(t, x, PVar(y))


def subst_schema(s: Schema, x: str, e: Pred, supply: Optional[NameSupply] = None) -> Schema:
    match s:
        case SMono(t):
            return SMono(subst_type(t, x, e, supply))
        case SAll(a, b):
            return SAll(a, subst_schema(b, x, e, supply))
        case SPAll(p, pt, b):
            return SPAll(p, subst_type(pt, x, e, supply), subst_schema(b, x, e, supply))
        case SBound(bd, b):
            body = refinement_subst(bd.body, {x: e}) if x not in [n for n, _ in bd.params] else bd.body
            return SBound(replace(bd, body=body), subst_schema(b, x, e, supply))
    raise TypeError(s)


def subst_type_tyvar(t: RType, a: str, repl: RType) -> RType:
    """Replace the type variable a by repl, merging refinements at base nodes."""
    match t:
        case TBase(Base("var", n), v, r) if n == a:
            match repl:
                case TBase(b2, v2, r2):
                    r2v = refinement_subst(r2, {v2: PVar(v)}) if v2 != v else r2
                    return TBase(b2, v, r_and(r2v, r))
                case TFun(_, _, _, _):
                    # refinements on a var instantiated at function type must be
                    # trivially true on well-formed programs
                    return repl
        case TBase(_, _, _):
            return t
        case TFun(x, d, c, r):
            return TFun(x, subst_type_tyvar(d, a, repl), subst_type_tyvar(c, a, repl), r)
    raise TypeError(t)


def subst_schema_tyvar(s: Schema, a: str, repl: RType) -> Schema:
    match s:
        case SMono(t):
            return SMono(subst_type_tyvar(t, a, repl))
        case SAll(b, body):
            if b == a:
                return s
            return SAll(b, subst_schema_tyvar(body, a, repl))
        case SPAll(p, pt, body):
            return SPAll(p, subst_type_tyvar(pt, a, repl), subst_schema_tyvar(body, a, repl))
        case SBound(bd, body):
            params = tuple((n, b) for n, b in bd.params)
            return SBound(Bound(bd.name, params, bd.body), subst_schema_tyvar(body, a, repl))
    raise TypeError(s)


# ---------------------------------------------------------------------------
# Abstract-refinement instantiation
# ---------------------------------------------------------------------------


def instantiate_refinement(r: Refinement, rvar: str, params: tuple[str, ...], body: Refinement) -> Refinement:
    """Replace every application of rvar by body with formals bound to the
    application's arguments (two symbolic reduction steps: substitute the
    witness, then beta-reduce it with the application's arguments)."""
    match r:
        case RConc(_) | RKappa(_, _):
            return r
        case RVarApp(n, args):
            if n != rvar:
                return r
            if len(args) != len(params):
                raise ArityMismatch(
                    f"refinement variable {rvar} applied to {len(args)} arguments, "
                    f"witness takes {len(params)}"
                )
            return refinement_subst(body, dict(zip(params, args)))
        case RAnd(l, rr):
            return r_and(
                instantiate_refinement(l, rvar, params, body),
                instantiate_refinement(rr, rvar, params, body),
            )
        case RImp(l, rr):
            return RImp(
                instantiate_refinement(l, rvar, params, body),
                instantiate_refinement(rr, rvar, params, body),
            )
    raise TypeError(r)


def instantiate_type(t: RType, rvar: str, params: tuple[str, ...], body: Refinement) -> RType:
    match t:
        case TBase(b, v, r):
            return TBase(b, v, instantiate_refinement(r, rvar, params, body))
        case TFun(x, d, c, r):
            return TFun(
                x,
                instantiate_type(d, rvar, params, body),
                instantiate_type(c, rvar, params, body),
                instantiate_refinement(r, rvar, params, body),
            )
    raise TypeError(t)


def instantiate_rvar(s: Schema, rvar: str, witness: tuple[tuple[str, ...], Refinement]) -> Schema:
    """Instantiate the abstract refinement rvar throughout a schema.

    The witness is (formal parameter names, refinement body); after the
    call no application of rvar remains.
    """
    params, body = witness
    match s:
        case SMono(t):
            return SMono(instantiate_type(t, rvar, params, body))
        case SAll(a, b):
            return SAll(a, instantiate_rvar(b, rvar, witness))
        case SPAll(p, pt, b):
            if p == rvar:
                return s  # shadowed
            return SPAll(p, instantiate_type(pt, rvar, params, body), instantiate_rvar(b, rvar, witness))
        case SBound(bd, b):
            new_body = instantiate_refinement(bd.body, rvar, params, body)
            return SBound(replace(bd, body=new_body), instantiate_rvar(b, rvar, witness))
    raise TypeError(s)


# ---------------------------------------------------------------------------
# Alpha renaming and alpha equivalence
# ---------------------------------------------------------------------------


def rename_term_var(e: CoreTerm, x: str, y: str) -> CoreTerm:
    """Rename the free term variable x to y (y assumed fresh)."""
    mapping = {x: PVar(y)}

    def go(e: CoreTerm) -> CoreTerm:
        match e:
            case Var(n):
                return Var(y, span=e.span) if n == x else e
            case Const(_):
                return e
            case Lam(b, bt, body):
                bt2 = subst_type(bt, x, PVar(y)) if bt is not None else None
                if b == x:
                    return Lam(b, bt2, body, span=e.span)
                return Lam(b, bt2, go(body), span=e.span)
            case App(f, a):
                return App(go(f), go(a), span=e.span)
            case Let(b, bound, body, annot, rec):
                bound2 = go(bound) if not (rec and b == x) else bound
                annot2 = subst_schema(annot, x, PVar(y)) if annot is not None else None
                if b == x:
                    return Let(b, bound2, body, annot2, rec, span=e.span)
                return Let(b, bound2, go(body), annot2, rec, span=e.span)
            case TLam(a, body):
                return TLam(a, go(body), span=e.span)
            case TApp(t, ty):
                return TApp(go(t), subst_type(ty, x, PVar(y)), span=e.span)
            case PLam(p, pt, body):
                return PLam(p, subst_type(pt, x, PVar(y)), go(body), span=e.span)
            case PAppT(t, phi):
                if x in [n for n, _ in phi.params]:
                    return PAppT(go(t), phi, span=e.span)
                return PAppT(go(t), ParamRefinement(phi.params, refinement_subst(phi.body, mapping)), span=e.span)
            case CAbs(bd, body):
                return CAbs(_rename_bound(bd, x, y), go(body), span=e.span)
            case CApp(t, bd):
                return CApp(go(t), _rename_bound(bd, x, y), span=e.span)
        raise TypeError(e)

    return go(e)


def _rename_bound(bd: Bound, x: str, y: str) -> Bound:
    if x in [n for n, _ in bd.params]:
        return bd
    return replace(bd, body=refinement_subst(bd.body, {x: PVar(y)}))


def alpha_rename(
    e: CoreTerm, supply: NameSupply, used: Optional[set[str]] = None
) -> CoreTerm:
    """Make every term binder globally unique.

    Binders keep their source names unless already taken; collisions get a
    deterministic numeric suffix. `used` accumulates across calls so a
    shared set makes uniqueness program-wide.
    """
    used = used if used is not None else set()

    def pick(b: str) -> str:
        if b not in used:
            used.add(b)
            return b
        b2 = supply.fresh(b + "_")
        while b2 in used:
            b2 = supply.fresh(b + "_")
        used.add(b2)
        return b2

    def go(e: CoreTerm) -> CoreTerm:
        match e:
            case Var(_) | Const(_):
                return e
            case Lam(b, bt, body):
                b2 = pick(b)
                body = rename_term_var(body, b, b2) if b2 != b else body
                return Lam(b2, bt, go(body), span=e.span)
            case App(f, a):
                return App(go(f), go(a), span=e.span)
            case Let(b, bound, body, annot, rec):
                b2 = pick(b)
                if b2 != b:
                    bound = rename_term_var(bound, b, b2) if rec else bound
                    body = rename_term_var(body, b, b2)
                return Let(b2, go(bound), go(body), annot, rec, span=e.span)
            case TLam(a, body):
                return TLam(a, go(body), span=e.span)
            case TApp(t, ty):
                return TApp(go(t), ty, span=e.span)
            case PLam(p, pt, body):
                return PLam(p, pt, go(body), span=e.span)
            case PAppT(t, phi):
                return PAppT(go(t), phi, span=e.span)
            case CAbs(bd, body):
                return CAbs(bd, go(body), span=e.span)
            case CApp(t, bd):
                return CApp(go(t), bd, span=e.span)
        raise TypeError(e)

    return go(e)


def term_free_vars(e: CoreTerm) -> set[str]:
    match e:
        case Var(n):
            return {n}
        case Const(_):
            return set()
        case Lam(b, bt, body):
            out = term_free_vars(body) - {b}
            if bt is not None:
                out |= type_free_vars(bt)
            return out
        case App(f, a):
            return term_free_vars(f) | term_free_vars(a)
        case Let(b, bound, body, _, rec):
            bound_fv = term_free_vars(bound)
            if rec:
                bound_fv -= {b}
            return bound_fv | (term_free_vars(body) - {b})
        case TLam(_, body):
            return term_free_vars(body)
        case TApp(t, ty):
            return term_free_vars(t) | type_free_vars(ty)
        case PLam(_, _, body):
            return term_free_vars(body)
        case PAppT(t, phi):
            fv = refinement_free_vars(phi.body) - {n for n, _ in phi.params}
            return term_free_vars(t) | fv
        case CAbs(_, body):
            return term_free_vars(body)
        case CApp(t, _):
            return term_free_vars(t)
    raise TypeError(e)


def alpha_equal(a: CoreTerm, b: CoreTerm, env: Optional[dict[str, str]] = None) -> bool:
    """Structural equality modulo term-binder names (types compared as-is
    after mapping term variables; sufficient for round-trip tests)."""
    env = env or {}

    def go(a: CoreTerm, b: CoreTerm, env: dict[str, str]) -> bool:
        match a, b:
            case Var(n1), Var(n2):
                return env.get(n1, n1) == n2
            case Const(v1), Const(v2):
                return v1 == v2 and type(v1) is type(v2)
            case Lam(x1, t1, e1), Lam(x2, t2, e2):
                if (t1 is None) != (t2 is None):
                    return False
                if t1 is not None and _type_alpha(t1, t2, env):
                    pass
                elif t1 is not None:
                    return False
                return go(e1, e2, {**env, x1: x2})
            case App(f1, a1), App(f2, a2):
                return go(f1, f2, env) and go(a1, a2, env)
            case Let(x1, b1, e1, an1, r1), Let(x2, b2, e2, an2, r2):
                if r1 != r2 or (an1 is None) != (an2 is None):
                    return False
                inner = {**env, x1: x2}
                benv = inner if r1 else env
                return go(b1, b2, benv) and go(e1, e2, inner)
            case TLam(v1, e1), TLam(v2, e2):
                return v1 == v2 and go(e1, e2, env)
            case TApp(e1, t1), TApp(e2, t2):
                return _type_alpha(t1, t2, env) and go(e1, e2, env)
            case PLam(p1, t1, e1), PLam(p2, t2, e2):
                return p1 == p2 and _type_alpha(t1, t2, env) and go(e1, e2, env)
            case PAppT(e1, ph1), PAppT(e2, ph2):
                return ph1 == ph2 and go(e1, e2, env)
            case CAbs(b1, e1), CAbs(b2, e2):
                return b1.name == b2.name and go(e1, e2, env)
            case CApp(e1, b1), CApp(e2, b2):
                return b1.name == b2.name and go(e1, e2, env)
        return False

    return go(a, b, env)


def _type_alpha(t1: RType, t2: RType, env: dict[str, str]) -> bool:
    """Type equality under a term-variable mapping (value vars aligned)."""
    match t1, t2:
        case TBase(b1, v1, r1), TBase(b2, v2, r2):
            if b1 != b2:
                return False
            m = {k: PVar(v) for k, v in env.items()}
            m[v1] = PVar(v2)
            return refinement_subst(r1, m) == r2
        case TFun(x1, d1, c1, r1), TFun(x2, d2, c2, r2):
            if not _type_alpha(d1, d2, env):
                return False
            m = {k: PVar(v) for k, v in env.items()}
            return refinement_subst(r1, m) == r2 and _type_alpha(c1, c2, {**env, x1: x2})
    return False


# ---------------------------------------------------------------------------
# Term substitution (variable for variable, used by ANF and tests)
# ---------------------------------------------------------------------------


def subst_term(e: CoreTerm, x: str, y: str) -> CoreTerm:
    """Replace free occurrences of variable x by variable y in a term."""
    return rename_term_var(e, x, y)
