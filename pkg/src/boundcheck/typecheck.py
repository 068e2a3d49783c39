"""Bidirectional refinement type checking over elaborated terms.

Checking descends through lambdas, lets and quantifier abstractions;
synthesis handles variables, constants, applications and instantiations.
Subtyping emits one VC per base-type comparison, with the environment's
base-typed bindings embedded as hypotheses. Implicit instantiations of
type and refinement variables use kappa templates created through the
inference module, guided by the shape pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import (
    App,
    B_BOOL,
    B_INT,
    Base,
    CAbs,
    CApp,
    Const,
    CoreTerm,
    Lam,
    Let,
    PAppT,
    PBin,
    PBool,
    PInt,
    PLam,
    PNot,
    PVar,
    Pred,
    R_TRUE,
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
    b_var,
    has_implication,
    instantiate_rvar,
    is_trivially_true,
    r_and,
    refinement_subst,
    subst_type,
    to_shape,
)
from .errors import (
    BoundcheckError,
    IllSorted,
    ImplicationOutsideBound,
    NO_SPAN,
    NotAFunction,
    ShapeMismatch,
    Span,
    UnboundVariable,
)
from .infer import TemplateStore
from .logic import (
    BOOL,
    EmbedEnv,
    Sort,
    VC,
    check_sorts,
    embed_refinement,
    mk_vc,
    sort_of_base,
)
from .names import NameSupply
from .prelude import PRELUDE
from .shapes import ShapeResult


@dataclass
class Diagnostic:
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


@dataclass
class CheckResult:
    name: str
    schema: Optional[Schema]
    vcs: list[VC]
    wf_obligations: list[str]
    diagnostics: list[Diagnostic]


class TypeEnv:
    """Ordered local bindings plus in-scope type and refinement variables.

    Extension is functional (each bind returns a new env sharing tails) so
    scopes unwind naturally during checking.
    """

    def __init__(
        self,
        entries: tuple[tuple[str, Schema], ...] = (),
        tyvars: frozenset[str] = frozenset(),
        rvars: tuple[tuple[str, RType], ...] = (),
    ):
        self.entries = entries
        self.tyvars = tyvars
        self.rvars = rvars

    def bind(self, name: str, schema: Schema) -> "TypeEnv":
        return TypeEnv(self.entries + ((name, schema),), self.tyvars, self.rvars)

    def bind_tyvar(self, a: str) -> "TypeEnv":
        return TypeEnv(self.entries, self.tyvars | {a}, self.rvars)

    def bind_rvar(self, p: str, pt: RType) -> "TypeEnv":
        return TypeEnv(self.entries, self.tyvars, self.rvars + ((p, pt),))

    def lookup(self, name: str) -> Optional[Schema]:
        for n, s in reversed(self.entries):
            if n == name:
                return s
        return None

    def base_slots(self) -> list[tuple[str, Sort]]:
        out = []
        for n, s in self.entries:
            if isinstance(s, SMono) and isinstance(s.ty, TBase):
                out.append((n, sort_of_base(s.ty.base)))
        return out

    def rvar_sigs(self) -> tuple[tuple[str, tuple[Sort, ...]], ...]:
        out = []
        for p, pt in self.rvars:
            sorts: list[Sort] = []
            t = pt
            while isinstance(t, TFun):
                sorts.append(sort_of_base(t.dom.base) if isinstance(t.dom, TBase) else sort_of_base(B_INT))
                t = t.cod
            out.append((p, tuple(sorts)))
        return tuple(out)

    def embeddable_bindings(self) -> list[tuple[str, RType]]:
        return [(n, s.ty) for n, s in self.entries if isinstance(s, SMono)]


def tc_const(value: Union[int, bool]) -> RType:
    """The tc table for literals."""
    if isinstance(value, bool):
        v = PVar("v")
        reft = RConc(v) if value else RConc(PNot(v))
        return TBase(B_BOOL, "v", reft)
    return TBase(B_INT, "v", RConc(PBin("=", PVar("v"), PInt(value))))


class Checker:
    def __init__(
        self,
        globals_: dict[str, Schema],
        uninterp: dict[str, tuple[tuple[Base, ...], Base]],
        templates: TemplateStore,
        supply: Optional[NameSupply] = None,
    ):
        self.globals = dict(globals_)
        self.uninterp = uninterp
        self.templates = templates
        self.supply = supply or NameSupply()
        self.vcs: list[VC] = []
        self.wf_obligations: list[str] = []
        self.diagnostics: list[Diagnostic] = []
        self.current_def = "?"
        self._vc_counter = 0
        self.shape_result: Optional[ShapeResult] = None

    # -- embedding ------------------------------------------------------------

    def _embed_env(self, env: TypeEnv) -> EmbedEnv:
        ee = EmbedEnv()
        for name, (args, res) in self.uninterp.items():
            ee.fun_sigs[name] = (tuple(sort_of_base(a) for a in args), sort_of_base(res))
        for p, sig in env.rvar_sigs():
            ee.rvar_sigs[p] = sig
        return ee

    def _vc_name(self, rule: str, span: Span) -> str:
        self._vc_counter += 1
        return f"{self.current_def}:{span.line}:{span.col}:{rule}:{self._vc_counter}"

    # -- well-formedness --------------------------------------------------------

    def wf(self, env: TypeEnv, schema: Schema, allow_implications: bool = False) -> list[str]:
        """Sort-check every refinement; reject implication nodes outside
        bound bodies unless elaboration introduced them."""
        obligations: list[str] = []

        def go_type(t: RType, env: TypeEnv, path: str) -> None:
            match t:
                case TBase(b, v, r):
                    if not allow_implications and has_implication(r):
                        raise ImplicationOutsideBound(
                            f"implication outside a bound in {path}"
                        )
                    ee = self._embed_env(env)
                    for n, ty in env.embeddable_bindings():
                        if isinstance(ty, TBase):
                            ee.var_sorts[n] = sort_of_base(ty.base)
                    ee.var_sorts[v] = sort_of_base(b)
                    self._check_rvar_arities(r, env, path)
                    f = embed_refinement(r, v, ee)
                    sort = check_sorts(f)
                    if sort != BOOL:
                        raise IllSorted(f"refinement in {path} has sort {sort}, wanted Bool")
                    obligations.append(f"{path}: refinement is Bool-sorted")
                case TFun(x, d, c, r):
                    if not is_trivially_true(r):
                        raise IllSorted(f"function-position refinement in {path} must be true")
                    go_type(d, env, path + ".dom")
                    go_type(c, env.bind(x, SMono(d)), path + ".cod")

        def go(s: Schema, env: TypeEnv) -> None:
            match s:
                case SMono(t):
                    go_type(t, env, self.current_def)
                case SAll(a, b):
                    go(b, env.bind_tyvar(a))
                case SPAll(p, pt, b):
                    go(b, env.bind_rvar(p, pt))
                case SBound(bd, b):
                    benv = env
                    for name, base in bd.params:
                        benv = benv.bind(name, SMono(TBase(base, "v", R_TRUE)))
                    ee = self._embed_env(benv)
                    for n, base in bd.params:
                        ee.var_sorts[n] = sort_of_base(base)
                    self._check_rvar_arities(bd.body, benv, f"bound {bd.name}")
                    f = embed_refinement(bd.body, "v", ee)
                    if check_sorts(f) != BOOL:
                        raise IllSorted(f"bound {bd.name} body is not Bool-sorted")
                    obligations.append(f"bound {bd.name}: body is Bool-sorted and Horn-shaped")
                    go(b, env)

        go(schema, env)
        return obligations

    def _check_rvar_arities(self, r: Refinement, env: TypeEnv, path: str) -> None:
        sigs = dict(env.rvar_sigs())
        def go(r: Refinement) -> None:
            match r:
                case RVarApp(n, args):
                    if n in sigs and len(args) != len(sigs[n]):
                        raise IllSorted(
                            f"refinement variable {n} applied to {len(args)} arguments "
                            f"in {path}, declared arity {len(sigs[n])}"
                        )
                case RAnd(l, rr) | RImp(l, rr):
                    go(l)
                    go(rr)
                case _:
                    pass
        go(r)

    # -- subtyping ----------------------------------------------------------------

    def sub(self, env: TypeEnv, s1: Schema, s2: Schema, span: Span, rule: str = "sub") -> None:
        match s1, s2:
            case SMono(t1), SMono(t2):
                self._sub_type(env, t1, t2, span, rule)
            case SAll(a1, b1), SAll(a2, b2):
                if a1 != a2:
                    b2 = _subst_schema_tyvar_name(b2, a2, a1)
                self.sub(env.bind_tyvar(a1), b1, b2, span, rule)
            case SPAll(p1, t1, b1), SPAll(p2, t2, b2):
                if p1 != p2:
                    b2 = _rename_schema_rvar(b2, p2, p1)
                self.sub(env.bind_rvar(p1, t1), b1, b2, span, rule)
            case _:
                raise ShapeMismatch(
                    f"cannot relate schemas of different quantifier structure", span
                )

    def _sub_type(self, env: TypeEnv, t1: RType, t2: RType, span: Span, rule: str) -> None:
        match t1, t2:
            case TBase(b1, v1, r1), TBase(b2, v2, r2):
                if b1 != b2:
                    raise ShapeMismatch(f"base mismatch {b1} vs {b2}", span)
                vv = v2
                taken = {n for n, _ in env.entries}
                if vv in taken or vv == "":
                    vv = self.supply.fresh("$v")
                lhs = refinement_subst(r1, {v1: PVar(vv)}) if v1 != vv else r1
                rhs = refinement_subst(r2, {v2: PVar(vv)}) if v2 != vv else r2
                name = self._vc_name(rule, span)
                vc = mk_vc(
                    name,
                    env.embeddable_bindings(),
                    lhs,
                    rhs,
                    vv,
                    sort_of_base(b1),
                    env=self._embed_env(env),
                )
                self.vcs.append(vc)
            case TFun(x1, d1, c1, _), TFun(x2, d2, c2, _):
                self._sub_type(env, d2, d1, span, "sub-fun-dom")
                env2 = env.bind(x2, SMono(d2))
                c1r = subst_type(c1, x1, PVar(x2), self.supply) if x1 != x2 else c1
                self._sub_type(env2, c1r, c2, span, "sub-fun-cod")
            case _:
                raise ShapeMismatch("function/base structure mismatch", span)

    # -- checking -------------------------------------------------------------------

    def check_def(
        self,
        name: str,
        term: CoreTerm,
        schema: Optional[Schema],
        shape_result: ShapeResult,
        recursive: bool,
    ) -> CheckResult:
        self.current_def = name
        self._vc_counter = 0
        self.shape_result = shape_result
        start = len(self.vcs)
        obligations: list[str] = []
        env = TypeEnv()
        try:
            if schema is not None:
                obligations = self.wf(env, schema, allow_implications=True)
                if recursive:
                    self.globals[name] = schema
                self.check(env, term, schema)
                out_schema: Optional[Schema] = schema
            else:
                out_schema = self.synth(env, term)
        except BoundcheckError as exc:
            self.diagnostics.append(Diagnostic(exc.msg, exc.span))
            out_schema = schema
        result = CheckResult(
            name, out_schema, self.vcs[start:], obligations, list(self.diagnostics)
        )
        return result

    def check(self, env: TypeEnv, e: CoreTerm, schema: Schema) -> None:
        match e, schema:
            case TLam(a, body), SAll(a2, sbody):
                if a != a2:
                    sbody = _subst_schema_tyvar_name(sbody, a2, a)
                self.check(env.bind_tyvar(a), body, sbody)
            case PLam(p, pt, body), SPAll(p2, _, sbody):
                if p != p2:
                    sbody = _rename_schema_rvar(sbody, p2, p)
                self.check(env.bind_rvar(p, pt), body, sbody)
            case Lam(b, _, body), SMono(TFun(x, dom, cod, _)):
                env2 = env.bind(b, SMono(dom))
                cod2 = subst_type(cod, x, PVar(b), self.supply) if x != b else cod
                self.check(env2, body, SMono(cod2))
            case Let(b, bound, body, annot, rec), _:
                env2 = self._check_let_binding(env, e, b, bound, annot, rec)
                self.check(env2, body, schema)
            case (TLam(_, _), _) | (PLam(_, _, _), _) | (Lam(_, _, _), SMono(TBase(_, _, _))):
                raise ShapeMismatch("abstraction checked against a non-matching schema", e.span)
            case _:
                got = self.synth(env, e)
                self.sub(env, got, schema, e.span)

    def _check_let_binding(
        self,
        env: TypeEnv,
        e: CoreTerm,
        b: str,
        bound: CoreTerm,
        annot: Optional[Schema],
        rec: bool,
    ) -> TypeEnv:
        if annot is not None:
            self.wf(env, annot, allow_implications=True)
            benv = env.bind(b, annot) if rec else env
            self.check(benv, bound, annot)
            return env.bind(b, annot)
        if rec:
            raise UnboundVariable(f"recursive let {b} requires an annotation", e.span)
        got = self.synth(env, bound)
        return env.bind(b, got)

    # -- synthesis --------------------------------------------------------------------

    def synth(self, env: TypeEnv, e: CoreTerm) -> Schema:
        match e:
            case Const(v):
                return SMono(tc_const(v))
            case Var(n):
                sch = env.lookup(n)
                local = sch is not None
                if sch is None:
                    sch = self.globals.get(n) or PRELUDE.get(n)
                if sch is None:
                    raise UnboundVariable(f"unbound variable {n}", e.span)
                if local and isinstance(sch, SMono) and isinstance(sch.ty, TBase):
                    sch = SMono(_selfify(sch.ty, n, self.supply))
                return self._instantiate_schema(env, e, sch)
            case App(f, a):
                fs = self.synth(env, f)
                if not isinstance(fs, SMono) or not isinstance(fs.ty, TFun):
                    raise NotAFunction("application head is not a function", e.span)
                fun_ty = fs.ty
                arg_pred: Pred
                match a:
                    case Var(y):
                        arg = self.synth(env, a)
                        arg_pred = PVar(y)
                    case Const(c):
                        arg = SMono(tc_const(c))
                        arg_pred = PInt(c) if not isinstance(c, bool) else PBool(c)
                    case _:
                        raise ShapeMismatch(
                            "application argument is not in normal form", e.span
                        )
                self.sub(env, arg, SMono(fun_ty.dom), e.span, rule="app-arg")
                return SMono(subst_type(fun_ty.cod, fun_ty.binder, arg_pred, self.supply))
            case Lam(b, bt, body):
                if bt is None:
                    shape = (self.shape_result.binder_shapes.get(id(e)) if self.shape_result else None)
                    if shape is None:
                        raise ShapeMismatch(
                            f"cannot synthesize a type for unannotated lambda binder {b}",
                            e.span,
                        )
                    bt = self.templates.type_template(
                        shape, env.base_slots(), env.rvar_sigs(), f"{self.current_def}@{e.span}"
                    )
                env2 = env.bind(b, SMono(bt))
                body_s = self.synth(env2, body)
                if not isinstance(body_s, SMono):
                    raise ShapeMismatch("lambda body synthesized a polymorphic schema", e.span)
                return SMono(TFun(b, bt, body_s.ty))
            case Let(b, bound, body, annot, rec):
                env2 = self._check_let_binding(env, e, b, bound, annot, rec)
                got = self.synth(env2, body)
                if _tail_var(body) == b:
                    return env2.lookup(b) or got
                return self._close_let(env, b, bound, got, e.span)
            case TLam(a, body):
                return SAll(a, self.synth(env.bind_tyvar(a), body))
            case PLam(p, pt, body):
                return SPAll(p, pt, self.synth(env.bind_rvar(p, pt), body))
            case TApp(t, ty):
                ts = self.synth(env, t)
                if not isinstance(ts, SAll):
                    raise ShapeMismatch("type application of a non-polymorphic term", e.span)
                from .core import subst_schema_tyvar

                return subst_schema_tyvar(ts.body, ts.tyvar, ty)
            case PAppT(t, phi):
                ts = self.synth(env, t)
                if not isinstance(ts, SPAll):
                    raise ShapeMismatch(
                        "refinement application of a non-refinement-polymorphic term", e.span
                    )
                params = tuple(n for n, _ in phi.params)
                return instantiate_rvar(ts.body, ts.rvar, (params, phi.body))
            case CAbs(_, _) | CApp(_, _):
                raise ShapeMismatch("bound abstraction survived elaboration", e.span)
        raise TypeError(e)

    def _close_let(
        self, env: TypeEnv, b: str, bound: CoreTerm, got: Schema, span: Span
    ) -> Schema:
        """Eliminate the let binder from a synthesized result type: exact
        substitution for atom-bound lets, covariant widening otherwise."""
        from .core import type_free_vars

        if not isinstance(got, SMono):
            return got
        if b not in type_free_vars(got.ty):
            return got
        match bound:
            case Const(c):
                p: Pred = PInt(c) if not isinstance(c, bool) else PBool(c)
                return SMono(subst_type(got.ty, b, p, self.supply))
            case Var(y):
                return SMono(subst_type(got.ty, b, PVar(y), self.supply))
            case _:
                widened = _widen_out(got.ty, b)
                if widened is not None:
                    return SMono(widened)
                raise ShapeMismatch(
                    f"let-bound {b} escapes its scope; annotate the enclosing definition",
                    span,
                )

    def _instantiate_schema(self, env: TypeEnv, node: CoreTerm, sch: Schema) -> Schema:
        """Implicit instantiation at a reference: type variables take
        kappa-refined templates at the shapes the shape pass resolved;
        refinement variables take kappa-lambda templates."""
        insts = (
            self.shape_result.instantiations.get(id(node), [])
            if self.shape_result
            else []
        )
        i = 0
        while True:
            match sch:
                case SAll(a, body):
                    if i < len(insts):
                        shape = insts[i][1]
                    else:
                        from .core import U_INT

                        shape = U_INT
                    i += 1
                    tpl = self.templates.type_template(
                        shape,
                        env.base_slots(),
                        env.rvar_sigs(),
                        f"{self.current_def}@{node.span}",
                    )
                    from .core import subst_schema_tyvar

                    sch = subst_schema_tyvar(body, a, tpl)
                case SPAll(p, pt, body):
                    params, reft = self.templates.rvar_template(
                        p,
                        pt,
                        env.base_slots(),
                        env.rvar_sigs(),
                        self.current_def,
                        node.span,
                    )
                    sch = instantiate_rvar(body, p, (params, reft))
                case _:
                    return sch


def _tail_var(body: CoreTerm) -> Optional[str]:
    """The variable a let-chain ultimately returns, if any."""
    while isinstance(body, Let):
        body = body.body
    if isinstance(body, Var):
        return body.name
    return None


def _widen_out(t: RType, b: str) -> Optional[RType]:
    """Drop refinement conjuncts mentioning b (sound in covariant base
    position only); None when b occurs somewhere widening cannot reach."""
    from .core import refinement_free_vars, type_free_vars

    match t:
        case TBase(base, v, r):
            kept = [c for c in _conjunct_list(r) if b not in refinement_free_vars(c)]
            dropped = [c for c in _conjunct_list(r) if b in refinement_free_vars(c)]
            if any(isinstance(c, RImp) for c in dropped):
                return None
            return TBase(base, v, r_and(*kept))
        case TFun(_, _, _, _):
            return None if b in type_free_vars(t) else t
    return None


def _conjunct_list(r: Refinement) -> list[Refinement]:
    from .core import conjuncts

    return list(conjuncts(r))


def _selfify(t: TBase, name: str, supply: NameSupply) -> TBase:
    v = t.vvar
    reft = t.reft
    if v == name:
        v2 = supply.fresh("$v")
        reft = refinement_subst(reft, {v: PVar(v2)})
        v = v2
    eq = RConc(PBin("=", PVar(v), PVar(name)))
    return TBase(t.base, v, r_and(reft, eq))


def _subst_schema_tyvar_name(s: Schema, frm: str, to: str) -> Schema:
    from .core import subst_schema_tyvar, t_base

    return subst_schema_tyvar(s, frm, t_base(b_var(to)))


def _rename_schema_rvar(s: Schema, frm: str, to: str) -> Schema:
    """Rename an abstract refinement variable throughout a schema."""
    def go_reft(r: Refinement) -> Refinement:
        match r:
            case RVarApp(n, args):
                return RVarApp(to if n == frm else n, args)
            case RAnd(l, rr):
                return RAnd(go_reft(l), go_reft(rr))
            case RImp(l, rr):
                return RImp(go_reft(l), go_reft(rr))
            case _:
                return r

    def go_type(t: RType) -> RType:
        match t:
            case TBase(b, v, r):
                return TBase(b, v, go_reft(r))
            case TFun(x, d, c, r):
                return TFun(x, go_type(d), go_type(c), go_reft(r))
        raise TypeError(t)

    match s:
        case SMono(t):
            return SMono(go_type(t))
        case SAll(a, b):
            return SAll(a, _rename_schema_rvar(b, frm, to))
        case SPAll(p, pt, b):
            if p == frm:
                return s
            return SPAll(p, go_type(pt), _rename_schema_rvar(b, frm, to))
        case SBound(bd, b):
            from dataclasses import replace

            return SBound(
                replace(bd, body=go_reft(bd.body)), _rename_schema_rvar(b, frm, to)
            )
    raise TypeError(s)
