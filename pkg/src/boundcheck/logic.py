"""Embedding refinements and environments into the quantifier-free logic.

Formulas are sort-annotated trees over integer arithmetic, booleans,
uninterpreted function/predicate applications, and kappa applications
(inference placeholders). A VC is a named list of sorted binders with
hypotheses plus a goal; its meaning is (and hyps) => goal with every
binder implicitly universal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import (
    ARITH_OPS,
    B_BOOL,
    B_INT,
    BOOL_OPS,
    Base,
    CMP_OPS,
    PApp,
    PBin,
    PBool,
    PInt,
    PIte,
    PNot,
    PVar,
    Pred,
    RAnd,
    RConc,
    RImp,
    RKappa,
    RVarApp,
    Refinement,
    TBase,
    TFun,
)
from .errors import IllSorted, UnsupportedTerm

# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sort:
    pass


@dataclass(frozen=True)
class IntSort(Sort):
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class BoolSort(Sort):
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class UnknownSort(Sort):
    """An uninterpreted sort standing for a type variable."""

    name: str

    def __str__(self) -> str:
        return self.name


INT = IntSort()
BOOL = BoolSort()


def sort_of_base(b: Base) -> Sort:
    if b == B_INT:
        return INT
    if b == B_BOOL:
        return BOOL
    return UnknownSort(b.name)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class FVar(Formula):
    name: str
    sort: Sort


@dataclass(frozen=True)
class FInt(Formula):
    value: int


@dataclass(frozen=True)
class FBool(Formula):
    value: bool


@dataclass(frozen=True)
class FArith(Formula):
    op: str  # + - *
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class FCmp(Formula):
    op: str  # = != < <= > >=
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class FNot(Formula):
    arg: Formula


@dataclass(frozen=True)
class FConn(Formula):
    op: str  # and or => <=>
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class FIte(Formula):
    cond: Formula
    then: Formula
    els: Formula


@dataclass(frozen=True)
class FApp(Formula):
    """Uninterpreted function or predicate application."""

    fun: str
    args: tuple[Formula, ...]
    sort: Sort


@dataclass(frozen=True)
class FKapp(Formula):
    """Kappa application; removed by substitution before discharge."""

    kvar: str
    args: tuple[Formula, ...]


F_TRUE = FBool(True)
F_FALSE = FBool(False)


def f_and(*parts: Formula) -> Formula:
    flat = [p for p in parts if p != F_TRUE]
    if not flat:
        return F_TRUE
    if len(flat) == 1:
        return flat[0]
    return FConn("and", tuple(flat))


def f_implies(lhs: Formula, rhs: Formula) -> Formula:
    if lhs == F_TRUE:
        return rhs
    return FConn("=>", (lhs, rhs))


def formula_kappas(f: Formula) -> set[str]:
    match f:
        case FKapp(k, args):
            out = {k}
            for a in args:
                out |= formula_kappas(a)
            return out
        case FVar(_, _) | FInt(_) | FBool(_):
            return set()
        case FArith(_, l, r) | FCmp(_, l, r):
            return formula_kappas(l) | formula_kappas(r)
        case FNot(a):
            return formula_kappas(a)
        case FConn(_, args) | FApp(_, args, _):
            out = set()
            for a in args:
                out |= formula_kappas(a)
            return out
        case FIte(c, t, e):
            return formula_kappas(c) | formula_kappas(t) | formula_kappas(e)
    raise TypeError(f)


def formula_vars(f: Formula) -> dict[str, Sort]:
    out: dict[str, Sort] = {}

    def go(f: Formula) -> None:
        match f:
            case FVar(n, s):
                out.setdefault(n, s)
            case FInt(_) | FBool(_):
                pass
            case FArith(_, l, r) | FCmp(_, l, r):
                go(l)
                go(r)
            case FNot(a):
                go(a)
            case FConn(_, args):
                for a in args:
                    go(a)
            case FApp(_, args, _):
                for a in args:
                    go(a)
            case FKapp(_, args):
                for a in args:
                    go(a)
            case FIte(c, t, e):
                go(c)
                go(t)
                go(e)
            case _:
                raise TypeError(f)

    go(f)
    return out


def formula_apps(f: Formula) -> dict[str, tuple[tuple[Sort, ...], Sort]]:
    """Uninterpreted symbols applied in f, with argument and result sorts."""
    out: dict[str, tuple[tuple[Sort, ...], Sort]] = {}

    def go(f: Formula) -> None:
        match f:
            case FApp(fun, args, sort):
                out.setdefault(fun, (tuple(_sort_of(a) for a in args), sort))
                for a in args:
                    go(a)
            case FVar(_, _) | FInt(_) | FBool(_):
                pass
            case FArith(_, l, r) | FCmp(_, l, r):
                go(l)
                go(r)
            case FNot(a):
                go(a)
            case FConn(_, args) | FKapp(_, args):
                for a in args:
                    go(a)
            case FIte(c, t, e):
                go(c)
                go(t)
                go(e)
            case _:
                raise TypeError(f)

    go(f)
    return out


def _sort_of(f: Formula) -> Sort:
    match f:
        case FVar(_, s):
            return s
        case FInt(_):
            return INT
        case FBool(_) | FCmp(_, _, _) | FNot(_) | FConn(_, _) | FKapp(_, _):
            return BOOL
        case FArith(_, _, _):
            return INT
        case FApp(_, _, s):
            return s
        case FIte(_, t, _):
            return _sort_of(t)
    raise TypeError(f)


def sort_of_formula(f: Formula) -> Sort:
    return _sort_of(f)


def substitute_formula(f: Formula, mapping: dict[str, Formula]) -> Formula:
    match f:
        case FVar(n, _):
            return mapping.get(n, f)
        case FInt(_) | FBool(_):
            return f
        case FArith(op, l, r):
            return FArith(op, substitute_formula(l, mapping), substitute_formula(r, mapping))
        case FCmp(op, l, r):
            return FCmp(op, substitute_formula(l, mapping), substitute_formula(r, mapping))
        case FNot(a):
            return FNot(substitute_formula(a, mapping))
        case FConn(op, args):
            return FConn(op, tuple(substitute_formula(a, mapping) for a in args))
        case FApp(fun, args, s):
            return FApp(fun, tuple(substitute_formula(a, mapping) for a in args), s)
        case FKapp(k, args):
            return FKapp(k, tuple(substitute_formula(a, mapping) for a in args))
        case FIte(c, t, e):
            return FIte(
                substitute_formula(c, mapping),
                substitute_formula(t, mapping),
                substitute_formula(e, mapping),
            )
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Sort checking (the independent gate on every built formula)
# ---------------------------------------------------------------------------


class SortEnv:
    """Variable sorts plus uninterpreted signatures and rvar/kappa arities."""

    def __init__(
        self,
        vars: Optional[dict[str, Sort]] = None,
        funs: Optional[dict[str, tuple[tuple[Sort, ...], Sort]]] = None,
    ):
        self.vars = dict(vars or {})
        self.funs = dict(funs or {})


def check_sorts(f: Formula, env: Optional[SortEnv] = None) -> Sort:
    """Verify sort-correctness; returns the formula's sort or raises IllSorted."""
    env = env or SortEnv()

    def go(f: Formula) -> Sort:
        match f:
            case FVar(n, s):
                declared = env.vars.get(n)
                if declared is not None and declared != s:
                    raise IllSorted(f"variable {n} used at {s}, declared {declared}")
                return s
            case FInt(_):
                return INT
            case FBool(_):
                return BOOL
            case FArith(op, l, r):
                if go(l) != INT or go(r) != INT:
                    raise IllSorted(f"arithmetic {op} over non-integers")
                return INT
            case FCmp(op, l, r):
                ls, rs = go(l), go(r)
                if ls != rs:
                    raise IllSorted(f"comparison {op} between {ls} and {rs}")
                if op not in ("=", "!=") and ls != INT:
                    raise IllSorted(f"ordering {op} on non-integers")
                return BOOL
            case FNot(a):
                if go(a) != BOOL:
                    raise IllSorted("negation of a non-boolean")
                return BOOL
            case FConn(op, args):
                for a in args:
                    if go(a) != BOOL:
                        raise IllSorted(f"connective {op} over a non-boolean")
                return BOOL
            case FIte(c, t, e):
                if go(c) != BOOL:
                    raise IllSorted("ite condition is not boolean")
                ts, es = go(t), go(e)
                if ts != es:
                    raise IllSorted("ite branches have different sorts")
                return ts
            case FApp(fun, args, sort):
                sig = env.funs.get(fun)
                arg_sorts = tuple(go(a) for a in args)
                if sig is not None:
                    want_args, want_res = sig
                    if want_args != arg_sorts or want_res != sort:
                        raise IllSorted(f"application of {fun} at wrong sorts")
                return sort
            case FKapp(_, args):
                for a in args:
                    go(a)
                return BOOL
        raise TypeError(f)

    return go(f)


# ---------------------------------------------------------------------------
# VCs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Binder:
    name: str
    sort: Sort
    hyp: Formula


@dataclass(frozen=True)
class VC:
    name: str
    binders: tuple[Binder, ...]
    goal: Formula
    # uninterpreted symbols and sorts needed beyond those inferable from use
    funs: tuple[tuple[str, tuple[Sort, ...], Sort], ...] = ()

    def hypotheses(self) -> Iterator[Formula]:
        for b in self.binders:
            if b.hyp != F_TRUE:
                yield b.hyp

    def all_formulas(self) -> Iterator[Formula]:
        yield from self.hypotheses()
        yield self.goal

    def kappas(self) -> set[str]:
        out: set[str] = set()
        for f in self.all_formulas():
            out |= formula_kappas(f)
        return out


# ---------------------------------------------------------------------------
# Embedding refinements
# ---------------------------------------------------------------------------


class EmbedEnv:
    """Sorting context for embedding: program variable sorts, uninterpreted
    function signatures, abstract-refinement arities (as n+1-ary boolean
    uninterpreted predicates), and kappa arities."""

    def __init__(self) -> None:
        self.var_sorts: dict[str, Sort] = {}
        self.fun_sigs: dict[str, tuple[tuple[Sort, ...], Sort]] = {}
        self.rvar_sigs: dict[str, tuple[Sort, ...]] = {}

    def copy(self) -> "EmbedEnv":
        out = EmbedEnv()
        out.var_sorts = dict(self.var_sorts)
        out.fun_sigs = dict(self.fun_sigs)
        out.rvar_sigs = dict(self.rvar_sigs)
        return out


def embed_pred(p: Pred, env: EmbedEnv) -> Formula:
    match p:
        case PVar(n):
            sort = env.var_sorts.get(n, INT)
            return FVar(n, sort)
        case PInt(v):
            return FInt(v)
        case PBool(v):
            return FBool(v)
        case PBin(op, l, r):
            fl, fr = embed_pred(l, env), embed_pred(r, env)
            if op in ARITH_OPS:
                if op == "*" and not (isinstance(fl, FInt) or isinstance(fr, FInt)):
                    raise UnsupportedTerm("multiplication needs a constant operand")
                return FArith(op, fl, fr)
            if op in CMP_OPS:
                return FCmp(op, fl, fr)
            if op in BOOL_OPS:
                return FConn(op, (fl, fr))
            raise UnsupportedTerm(f"unknown operator {op}")
        case PNot(a):
            return FNot(embed_pred(a, env))
        case PIte(c, t, e):
            return FIte(embed_pred(c, env), embed_pred(t, env), embed_pred(e, env))
        case PApp(f, args):
            sig = env.fun_sigs.get(f)
            fargs = tuple(embed_pred(a, env) for a in args)
            if sig is None:
                if f in env.rvar_sigs:
                    return FApp(f, fargs, BOOL)
                raise UnsupportedTerm(f"undeclared uninterpreted function {f}")
            return FApp(f, fargs, sig[1])
    raise TypeError(p)


def embed_refinement(r: Refinement, value_var: str, env: EmbedEnv) -> Formula:
    """Embed a refinement; abstract applications become uninterpreted
    predicate applications, kappa applications stay symbolic.

    `value_var` names the refinement's value variable for documentation of
    the call-site contract; the refinement has already been closed over it
    (arguments are explicit in RVarApp nodes).
    """
    match r:
        case RConc(p):
            return embed_pred(p, env)
        case RVarApp(n, args):
            return FApp(n, tuple(embed_pred(a, env) for a in args), BOOL)
        case RKappa(k, args):
            return FKapp(k, tuple(embed_pred(a, env) for a in args))
        case RAnd(l, rr):
            return f_and(embed_refinement(l, value_var, env), embed_refinement(rr, value_var, env))
        case RImp(l, rr):
            return f_implies(embed_refinement(l, value_var, env), embed_refinement(rr, value_var, env))
    raise TypeError(r)


# ---------------------------------------------------------------------------
# Environment embedding and VC construction
# ---------------------------------------------------------------------------


def embed_env_bindings(
    bindings: list[tuple[str, "TBase | TFun"]], env: EmbedEnv
) -> list[Binder]:
    """One Binder per base-typed binding, refinement with the value variable
    replaced by the binder name; function-typed bindings contribute sort
    declarations only (no Binder entry is needed for them at the SMT level
    beyond their absence from hypotheses)."""
    out: list[Binder] = []
    for name, t in bindings:
        if isinstance(t, TBase):
            sort = sort_of_base(t.base)
            env.var_sorts[name] = sort
            from .core import refinement_subst

            reft = refinement_subst(t.reft, {t.vvar: PVar(name)})
            hyp = embed_refinement(reft, name, env)
            out.append(Binder(name, sort, hyp))
    return out


def mk_vc(
    name: str,
    env_bindings: list[tuple[str, "TBase | TFun"]],
    lhs: Refinement,
    rhs: Refinement,
    value_var: str,
    sort: Sort,
    env: Optional[EmbedEnv] = None,
) -> VC:
    """Build the subtyping VC  embed(env) /\\ embed(lhs) => embed(rhs)
    with the value variable added as the last binder."""
    env = env.copy() if env is not None else EmbedEnv()
    binders = embed_env_bindings(env_bindings, env)
    env.var_sorts[value_var] = sort
    lhs_f = embed_refinement(lhs, value_var, env)
    binders.append(Binder(value_var, sort, lhs_f))
    goal = embed_refinement(rhs, value_var, env)
    return VC(name, tuple(binders), goal)
