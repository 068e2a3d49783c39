"""Inference of unknown refinements by monomial predicate abstraction.

Implicit instantiations get templates with fresh kappa placeholders; the
subtyping VCs over templates are split into Horn clauses (implications on
the supertype side have their antecedents pushed into the environment);
and a Houdini-style weakening loop computes the greatest conjunctive
assignment over a finite candidate space.

Candidates for a kappa are (a) instantiations of qualifier patterns over
the kappa's scope slots plus the literals 0 and 1, and (b) applications of
the abstract refinement variables in scope at the kappa's creation site to
sort-matching slots. The shipped default qualifier set is extended by
qualifiers mined from the program's own type annotations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from .core import (
    B_BOOL,
    B_INT,
    Base,
    PBin,
    PInt,
    PVar,
    Pred,
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
    TBase,
    TFun,
    b_var,
)
from .errors import NonMonotonic, Span, NO_SPAN
from .logic import (
    BOOL,
    Binder,
    EmbedEnv,
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
    VC,
    embed_pred,
    f_and,
    formula_kappas,
    sort_of_base,
    substitute_formula,
)
from .names import NameSupply
from .smt.verdict import Invalid, SolverVerdict, Unknown, Valid
from .surface import Qualifier

# ---------------------------------------------------------------------------
# Default qualifiers
# ---------------------------------------------------------------------------


def _q(name: str, body: Pred, stars: int) -> Qualifier:
    return Qualifier(name, "v", B_INT, tuple(B_INT for _ in range(stars)), body)


def default_qualifiers() -> list[Qualifier]:
    v = PVar("v")
    s0, s1 = PVar("$star0"), PVar("$star1")
    return [
        _q("Pos", PBin("<", PInt(0), v), 0),
        _q("Neg", PBin("<", v, PInt(0)), 0),
        _q("NonNeg", PBin("<=", PInt(0), v), 0),
        _q("LeStar", PBin("<=", v, s0), 1),
        _q("GeStar", PBin("<=", s0, v), 1),
        _q("EqStar", PBin("=", v, s0), 1),
        _q("EqStarPlus1", PBin("=", v, PBin("+", s0, PInt(1))), 1),
        _q("EqStarPlusStar", PBin("=", v, PBin("+", s0, s1)), 2),
    ]


def mine_qualifiers(schemas: Iterable[Schema]) -> list[Qualifier]:
    """Generalize each concrete refinement conjunct in the given schemas
    into a qualifier pattern: the value variable stays, every other free
    program variable becomes a wildcard of its sort."""
    out: list[Qualifier] = []
    seen: set = set()
    n = 0

    def note(pred: Pred, vvar: str, vsort: Base, var_sorts: dict[str, Base]) -> None:
        nonlocal n
        from .core import pred_subst

        fvs = [x for x in _pred_vars_ordered(pred) if x != vvar]
        if any(v not in var_sorts for v in fvs):
            return
        mapping: dict[str, Pred] = {vvar: PVar("v")}
        sorts: list[Base] = []
        for i, x in enumerate(fvs):
            mapping[x] = PVar(f"$star{i}")
            sorts.append(var_sorts[x])
        pat = pred_subst(pred, mapping)
        key = (pat, vsort, tuple(sorts))
        if key in seen:
            return
        seen.add(key)
        out.append(Qualifier(f"Mined{n}", "v", vsort, tuple(sorts), pat))
        n += 1

    def walk_type(t: RType, var_sorts: dict[str, Base]) -> None:
        match t:
            case TBase(b, v, r):
                for conj in _concrete_conjuncts(r):
                    note(conj, v, b, var_sorts)
            case TFun(x, d, c, _):
                walk_type(d, var_sorts)
                inner = dict(var_sorts)
                if isinstance(d, TBase):
                    inner[x] = d.base
                walk_type(c, inner)

    for s in schemas:
        body = s
        while True:
            match body:
                case SMono(t):
                    walk_type(t, {})
                    break
                case SAll(_, b) | SPAll(_, _, b) | SBound(_, b):
                    body = b
                case _:
                    break
    return out


def _concrete_conjuncts(r: Refinement) -> Iterable[Pred]:
    from .core import PBool

    match r:
        case RConc(p):
            if not isinstance(p, PBool):
                yield p
        case RAnd(l, rr):
            yield from _concrete_conjuncts(l)
            yield from _concrete_conjuncts(rr)
        case _:
            return


def _pred_vars_ordered(p: Pred) -> list[str]:
    out: list[str] = []

    def go(p: Pred) -> None:
        from .core import PApp as PA, PIte, PNot

        match p:
            case PVar(n):
                if n not in out:
                    out.append(n)
            case PBin(_, l, r):
                go(l)
                go(r)
            case PNot(a):
                go(a)
            case PIte(c, t, e):
                go(c)
                go(t)
                go(e)
            case PA(_, args):
                for a in args:
                    go(a)
            case _:
                pass

    go(p)
    return out


# ---------------------------------------------------------------------------
# Kappa variables and templates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KappaVar:
    """An unknown refinement: applied to its scope slots then its formal
    slots (value position last)."""

    name: str
    slots: tuple[tuple[str, Sort], ...]
    n_formals: int
    rvars_in_scope: tuple[tuple[str, tuple[Sort, ...]], ...] = ()
    site: str = ""


@dataclass(frozen=True)
class InstSite:
    """One implicit refinement-variable instantiation (for --dump-solution)."""

    def_name: str
    span: Span
    rvar: str
    kappa: str
    arity: int


class TemplateStore:
    """Creates kappa-refined templates and records their metadata."""

    def __init__(self, supply: Optional[NameSupply] = None):
        self.supply = supply or NameSupply()
        self.kappas: dict[str, KappaVar] = {}
        self.sites: list[InstSite] = []

    def _fresh_kappa(
        self,
        scope: list[tuple[str, Sort]],
        formals: list[tuple[str, Sort]],
        rvars: tuple[tuple[str, tuple[Sort, ...]], ...],
        site: str,
    ) -> KappaVar:
        name = self.supply.fresh("$k")
        kv = KappaVar(name, tuple(scope) + tuple(formals), len(formals), rvars, site)
        self.kappas[name] = kv
        return kv

    def type_template(
        self,
        shape,
        scope: list[tuple[str, Sort]],
        rvars: tuple[tuple[str, tuple[Sort, ...]], ...],
        site: str,
    ) -> RType:
        """A fresh type of the given shape with kappa refinements at every
        base position; binders of function shapes join the scope of deeper
        kappas."""
        from .core import UFun, UInt, UBool, UVar

        match shape:
            case UInt() | UBool() | UVar(_):
                base = (
                    B_INT
                    if isinstance(shape, UInt)
                    else B_BOOL
                    if isinstance(shape, UBool)
                    else b_var(shape.name)
                )
                v = self.supply.fresh("$v")
                vsort = sort_of_base(base)
                kv = self._fresh_kappa(scope, [(v, vsort)], rvars, site)
                args = tuple(PVar(n) for n, _ in kv.slots)
                return TBase(base, v, RKappa(kv.name, args))
            case UFun(d, c):
                x = self.supply.fresh("$x")
                dt = self.type_template(d, scope, rvars, site)
                inner = list(scope)
                if isinstance(dt, TBase):
                    inner.append((x, sort_of_base(dt.base)))
                ct = self.type_template(c, inner, rvars, site)
                return TFun(x, dt, ct)
        raise TypeError(shape)

    def rvar_template(
        self,
        rvar: str,
        rvar_ty: RType,
        scope: list[tuple[str, Sort]],
        rvars: tuple[tuple[str, tuple[Sort, ...]], ...],
        def_name: str,
        span: Span,
    ) -> tuple[tuple[str, ...], Refinement]:
        """The witness (formals, body) instantiating an abstract refinement
        with an unknown: lam x1..xn. kappa(scope..., x1..xn)."""
        arg_sorts: list[Sort] = []
        t = rvar_ty
        while isinstance(t, TFun):
            if isinstance(t.dom, TBase):
                arg_sorts.append(sort_of_base(t.dom.base))
            else:
                arg_sorts.append(INT)
            t = t.cod
        formals = [(self.supply.fresh("$x"), s) for s in arg_sorts]
        kv = self._fresh_kappa(scope, formals, rvars, f"{def_name}@{span}")
        self.sites.append(InstSite(def_name, span, rvar, kv.name, len(formals)))
        args = tuple(PVar(n) for n, _ in kv.slots)
        return tuple(n for n, _ in formals), RKappa(kv.name, args)


# ---------------------------------------------------------------------------
# Horn clauses and splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HornClause:
    name: str
    binders: tuple[Binder, ...]
    head: Formula  # an FKapp with distinct variable args, or kappa-free

    def hyp_kappas(self) -> set[str]:
        out: set[str] = set()
        for b in self.binders:
            out |= formula_kappas(b.hyp)
        return out

    def head_kappa(self) -> Optional[str]:
        if isinstance(self.head, FKapp):
            return self.head.kvar
        return None


def split(vcs: list[VC], supply: Optional[NameSupply] = None) -> list[HornClause]:
    """Decompose VCs into Horn clauses: implication goals push their
    antecedents onto fresh hypothesis binders, conjunction goals fork,
    and every resulting clause is certified kappa-positive."""
    supply = supply or NameSupply()
    out: list[HornClause] = []

    def go(name: str, binders: tuple[Binder, ...], goal: Formula, idx: int) -> int:
        match goal:
            case FConn("=>", args):
                bs = list(binders)
                for hyp in args[:-1]:
                    bs.append(Binder(supply.fresh("$h"), BOOL, hyp))
                return go(name, tuple(bs), args[-1], idx)
            case FConn("and", args):
                for a in args:
                    idx = go(name, binders, a, idx)
                return idx
            case FKapp(k, kargs):
                bs, head = _normalize_head(binders, k, kargs, supply)
                out.append(HornClause(f"{name}#{idx}", bs, head))
                return idx + 1
            case _:
                if formula_kappas(goal):
                    raise NonMonotonic(f"kappa under a non-Horn goal in {name}")
                out.append(HornClause(f"{name}#{idx}", binders, goal))
                return idx + 1

    for vc in vcs:
        go(vc.name, vc.binders, vc.goal, 0)
    for clause in out:
        certify_positive(clause)
    return out


def _normalize_head(
    binders: tuple[Binder, ...], k: str, args: tuple[Formula, ...], supply: NameSupply
) -> tuple[tuple[Binder, ...], FKapp]:
    """Heads must apply the kappa to distinct variables: non-variable or
    repeated arguments get fresh equated binders."""
    bs = list(binders)
    seen: set[str] = set()
    new_args: list[Formula] = []
    for a in args:
        if isinstance(a, FVar) and a.name not in seen:
            seen.add(a.name)
            new_args.append(a)
            continue
        from .logic import sort_of_formula

        sort = sort_of_formula(a)
        fresh = supply.fresh("$p")
        bs.append(Binder(fresh, sort, FCmp("=", FVar(fresh, sort), a)))
        seen.add(fresh)
        new_args.append(FVar(fresh, sort))
    return tuple(bs), FKapp(k, tuple(new_args))


def certify_positive(clause: HornClause) -> None:
    """Raise NonMonotonic unless every kappa occurrence is positive: bare
    in hypotheses (not under negation, iff, ite conditions, or implication
    antecedents) and, in the head, exactly the head application."""
    for b in clause.binders:
        _check_polarity(b.hyp, True, clause.name)
    if isinstance(clause.head, FKapp):
        for a in clause.head.args:
            if formula_kappas(a):
                raise NonMonotonic(f"kappa nested in head arguments of {clause.name}")
    else:
        if formula_kappas(clause.head):
            raise NonMonotonic(f"kappa in concrete head of {clause.name}")


def _check_polarity(f: Formula, positive: bool, where: str) -> None:
    match f:
        case FKapp(k, args):
            if not positive:
                raise NonMonotonic(f"kappa {k} occurs negatively in {where}")
            for a in args:
                if formula_kappas(a):
                    raise NonMonotonic(f"kappa nested under {k} in {where}")
        case FNot(a):
            _check_polarity(a, not positive, where)
        case FConn("=>", args):
            for a in args[:-1]:
                _check_polarity(a, not positive, where)
            _check_polarity(args[-1], positive, where)
        case FConn("<=>", args):
            for a in args:
                if formula_kappas(a):
                    raise NonMonotonic(f"kappa under <=> in {where}")
        case FConn(_, args):
            for a in args:
                _check_polarity(a, positive, where)
        case FIte(c, t, e):
            if formula_kappas(c):
                raise NonMonotonic(f"kappa under ite condition in {where}")
            _check_polarity(t, positive, where)
            _check_polarity(e, positive, where)
        case FArith(_, l, r) | FCmp(_, l, r):
            if formula_kappas(l) | formula_kappas(r):
                raise NonMonotonic(f"kappa under arithmetic in {where}")
        case _:
            pass


# ---------------------------------------------------------------------------
# Candidate generation
# ---------------------------------------------------------------------------

_LITERALS = (FInt(0), FInt(1))


def candidate_conjuncts(kv: KappaVar, qualifiers: list[Qualifier]) -> list[Formula]:
    """All scope-respecting instantiations of the qualifier patterns plus
    in-scope abstract-refinement applications, deduplicated, in a
    deterministic order."""
    out: list[Formula] = []
    seen: set[Formula] = set()
    if not kv.slots:
        return out
    value_name, value_sort = kv.slots[-1]
    value_var = FVar(value_name, value_sort)
    others = kv.slots[:-1]

    def add(f: Formula) -> None:
        if f not in seen:
            seen.add(f)
            out.append(f)

    for q in qualifiers:
        if sort_of_base(q.vsort) != value_sort:
            continue
        base_env = {q.vvar: B_INT}
        embedded = _embed_qualifier(q)
        if embedded is None:
            continue
        choices: list[list[Formula]] = []
        feasible = True
        for wsort in q.wildcard_sorts:
            ws = sort_of_base(wsort)
            opts: list[Formula] = [FVar(n, s) for n, s in others if s == ws]
            if ws == INT:
                opts.extend(_LITERALS)
            if not opts:
                feasible = False
                break
            choices.append(opts)
        if not feasible:
            continue
        idxs = [0] * len(choices)
        while True:
            mapping: dict[str, Formula] = {q.vvar: value_var}
            for i, opts in enumerate(choices):
                mapping[f"$star{i}"] = opts[idxs[i]]
            add(substitute_formula(embedded, mapping))
            j = len(choices) - 1
            while j >= 0:
                idxs[j] += 1
                if idxs[j] < len(choices[j]):
                    break
                idxs[j] = 0
                j -= 1
            if j < 0:
                break

    # applications of in-scope abstract refinement variables
    for rvar, arg_sorts in kv.rvars_in_scope:
        if not arg_sorts or arg_sorts[-1] != value_sort:
            continue
        choices = []
        feasible = True
        for s in arg_sorts[:-1]:
            opts = [FVar(n, ss) for n, ss in others if ss == s]
            if s == INT:
                opts.extend(_LITERALS)
            if not opts:
                feasible = False
                break
            choices.append(opts)
        if not feasible:
            continue
        idxs = [0] * len(choices)
        while True:
            args = tuple(opts[idxs[i]] for i, opts in enumerate(choices)) + (value_var,)
            add(FApp(rvar, args, BOOL))
            j = len(choices) - 1
            while j >= 0:
                idxs[j] += 1
                if idxs[j] < len(choices[j]):
                    break
                idxs[j] = 0
                j -= 1
            if j < 0 or not choices:
                break
    return out


def _embed_qualifier(q: Qualifier) -> Optional[Formula]:
    env = EmbedEnv()
    env.var_sorts[q.vvar] = sort_of_base(q.vsort)
    for i, s in enumerate(q.wildcard_sorts):
        env.var_sorts[f"$star{i}"] = sort_of_base(s)
    try:
        return embed_pred(q.body, env)
    except Exception:
        return None


# ---------------------------------------------------------------------------
# Assignment and the weakening loop
# ---------------------------------------------------------------------------

Assignment = dict[str, list[Formula]]


@dataclass(frozen=True)
class Refutation:
    clause: str
    detail: str = ""


def apply_assignment(f: Formula, assignment: Assignment, kappas: dict[str, KappaVar]) -> Formula:
    """Replace kappa applications by the conjunction of their conjuncts
    with slots substituted by the application's arguments."""
    match f:
        case FKapp(k, args):
            kv = kappas[k]
            mapping = {slot: arg for (slot, _), arg in zip(kv.slots, args)}
            conjs = [substitute_formula(c, mapping) for c in assignment.get(k, [])]
            return f_and(*conjs)
        case FVar(_, _) | FInt(_) | FBool(_):
            return f
        case FArith(op, l, r):
            return FArith(op, apply_assignment(l, assignment, kappas), apply_assignment(r, assignment, kappas))
        case FCmp(op, l, r):
            return FCmp(op, apply_assignment(l, assignment, kappas), apply_assignment(r, assignment, kappas))
        case FNot(a):
            return FNot(apply_assignment(a, assignment, kappas))
        case FConn(op, args):
            return FConn(op, tuple(apply_assignment(a, assignment, kappas) for a in args))
        case FIte(c, t, e):
            return FIte(
                apply_assignment(c, assignment, kappas),
                apply_assignment(t, assignment, kappas),
                apply_assignment(e, assignment, kappas),
            )
        case FApp(fun, args, s):
            return FApp(fun, tuple(apply_assignment(a, assignment, kappas) for a in args), s)
    raise TypeError(f)


CheckFn = Callable[[VC], SolverVerdict]


def _clause_vc(
    clause: HornClause,
    goal: Formula,
    assignment: Assignment,
    kappas: dict[str, KappaVar],
) -> VC:
    binders = tuple(
        Binder(b.name, b.sort, apply_assignment(b.hyp, assignment, kappas))
        for b in clause.binders
    )
    return VC(clause.name, binders, goal)


def solve(
    clauses: list[HornClause],
    qualifiers: list[Qualifier],
    kappas: dict[str, KappaVar],
    check: CheckFn,
) -> Union[Assignment, Refutation]:
    """Houdini: start from all candidates, repeatedly drop head conjuncts
    not implied under the current assignment, re-enqueueing dependents.
    Ends with the greatest conjunctive solution, or a refutation naming a
    failing concrete-head clause."""
    assignment: Assignment = {
        k: candidate_conjuncts(kv, qualifiers) for k, kv in kappas.items()
    }
    for clause in clauses:
        certify_positive(clause)

    deps: dict[str, list[int]] = {}
    for i, c in enumerate(clauses):
        for k in c.hyp_kappas():
            deps.setdefault(k, []).append(i)

    work = deque(range(len(clauses)))
    queued = set(work)
    sweeps = 0
    while work:
        i = work.popleft()
        queued.discard(i)
        clause = clauses[i]
        sweeps += 1
        head_k = clause.head_kappa()
        if head_k is None:
            goal = apply_assignment(clause.head, assignment, kappas)
            verdict = check(_clause_vc(clause, goal, assignment, kappas))
            if isinstance(verdict, Valid):
                continue
            return Refutation(clause.name, str(verdict))
        kv = kappas[head_k]
        head = clause.head
        assert isinstance(head, FKapp)
        mapping = {slot: arg for (slot, _), arg in zip(kv.slots, head.args)}
        current = assignment[head_k]
        if current:
            # whole-conjunction check first; bisect only on failure
            whole = f_and(*(substitute_formula(q, mapping) for q in current))
            if isinstance(check(_clause_vc(clause, whole, assignment, kappas)), Valid):
                continue
        kept: list[Formula] = []
        changed = False
        for q in current:
            goal = substitute_formula(q, mapping)
            verdict = check(_clause_vc(clause, goal, assignment, kappas))
            if isinstance(verdict, Valid):
                kept.append(q)
            else:
                changed = True
        if changed:
            assignment[head_k] = kept
            for j in deps.get(head_k, []):
                if j not in queued:
                    work.append(j)
                    queued.add(j)
            if i not in queued:
                work.append(i)
                queued.add(i)
    return assignment
