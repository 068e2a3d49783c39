"""End-to-end pipeline: parse, well-formedness, elaboration, shape pass,
checking with templates, Horn splitting, the weakening fixpoint, and
discharge reporting."""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .anf import is_normal, normalize
from .core import Schema, UType, schema_shape
from .desugar import ResolvedProgram, desugar_program
from .elaborate import Elaborator, MaterializeStats, tx_schema
from .errors import BoundcheckError, OracleOutOfScope, Span
from .infer import (
    Assignment,
    HornClause,
    Refutation,
    TemplateStore,
    apply_assignment,
    candidate_conjuncts,
    default_qualifiers,
    mine_qualifiers,
    solve,
    split,
)
from .logic import Binder, VC, F_TRUE, Formula
from .names import NameSupply
from .prelude import PRELUDE
from .shapes import check_def_shapes
from .smt.backend import PersistentSolver, check_external
from .smt.oracle import check_oracle
from .smt.verdict import Invalid, SolverVerdict, Unknown, Valid
from .surface import Program, Qualifier, parse_program
from .typecheck import Checker, CheckResult
from .vcfile import parse_vc_file


@dataclass
class Options:
    solver: Optional[str] = None
    timeout_ms: int = 10_000
    use_oracle: bool = False
    oracle_bound: int = 2
    solver_persistent: bool = False
    materialize_all: bool = False
    max_materialize: Optional[int] = None
    qualifier_files: tuple[str, ...] = ()
    extra_qualifiers: tuple[Qualifier, ...] = ()
    jobs: int = 1
    mine_quals: bool = True


@dataclass
class DefOutcome:
    name: str
    span: Span
    safe: bool
    failing: list[tuple[str, SolverVerdict]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class PipelineResult:
    program: Optional[ResolvedProgram]
    elaborated: dict[str, object]  # def name -> elaborated CoreTerm
    schemas: dict[str, Schema]  # def name -> elaborated schema
    vcs: list[VC]
    solved_vcs: list[VC]
    clauses: list[HornClause]
    assignment: Optional[Assignment]
    refutations: list[tuple[str, SolverVerdict]]
    outcomes: list[DefOutcome]
    stats: MaterializeStats
    templates: TemplateStore
    diagnostics: list[str]

    @property
    def safe(self) -> bool:
        return all(o.safe for o in self.outcomes) and not self.diagnostics


class CheckerBackend:
    """Dispatches clause/VC validity queries to the configured checker."""

    def __init__(self, opts: Options):
        self.opts = opts
        self._persistent: Optional[PersistentSolver] = None
        self.queries = 0

    def __call__(self, vc: VC) -> SolverVerdict:
        self.queries += 1
        if self.opts.use_oracle:
            try:
                return check_oracle(vc, self.opts.oracle_bound)
            except OracleOutOfScope as exc:
                return Unknown(f"oracle out of scope: {exc.msg}")
        if self.opts.solver is None:
            from .errors import SolverSpawnError

            raise SolverSpawnError(
                "no solver configured: pass --solver, set BOUNDCHECK_SOLVER, or use --oracle"
            )
        if self.opts.solver_persistent:
            if self._persistent is None:
                self._persistent = PersistentSolver(self.opts.solver, self.opts.timeout_ms)
            return self._persistent.check(vc)
        return check_external(vc, self.opts.solver, self.opts.timeout_ms)

    def close(self) -> None:
        if self._persistent is not None:
            self._persistent.close()
            self._persistent = None


def gather_qualifiers(rp: ResolvedProgram, opts: Options) -> list[Qualifier]:
    quals = list(default_qualifiers())
    quals.extend(rp.qualifiers)
    quals.extend(opts.extra_qualifiers)
    if opts.mine_quals:
        schemas = [s for _, s in rp.assumes]
        schemas += [d.schema for d in rp.defs if d.schema is not None]
        quals.extend(mine_qualifiers(schemas))
    return quals


def check_program_text(text: str, opts: Optional[Options] = None) -> PipelineResult:
    opts = opts or Options()
    supply = NameSupply()
    prog = parse_program(text)
    rp = desugar_program(prog, supply)
    return check_resolved(rp, opts, supply)


def check_resolved(
    rp: ResolvedProgram, opts: Options, supply: Optional[NameSupply] = None
) -> PipelineResult:
    supply = supply or NameSupply()
    templates = TemplateStore(supply)
    uninterp = rp.uninterp
    elab = Elaborator(supply, opts.materialize_all, opts.max_materialize)

    # surface well-formedness of user schemas (implications only in bounds)
    wf_checker = Checker({}, uninterp, templates, supply)
    for name, sch in rp.assumes:
        wf_checker.current_def = name
        wf_checker.wf(_empty_env(), sch, allow_implications=False)
    for d in rp.defs:
        if d.schema is not None:
            wf_checker.current_def = d.name
            wf_checker.wf(_empty_env(), d.schema, allow_implications=False)

    # elaborate schemas and definitions
    globals_: dict[str, Schema] = {}
    top_shapes: dict[str, UType] = {n: schema_shape(s) for n, s in PRELUDE.items()}
    for name, sch in rp.assumes:
        globals_[name] = tx_schema(sch)
        top_shapes[name] = schema_shape(globals_[name])

    elaborated: dict[str, object] = {}
    schemas: dict[str, Schema] = {}
    checker = Checker(globals_, uninterp, templates, supply)
    outcomes: list[DefOutcome] = []
    results: list[CheckResult] = []

    for d in rp.defs:
        term = normalize(d.term, supply)
        tx_sch = tx_schema(d.schema) if d.schema is not None else None
        if tx_sch is not None:
            top_shapes[d.name] = schema_shape(tx_sch)
        term = elab.translate({}, {}, term, shapes=top_shapes, schema=d.schema)
        assert is_normal(term), f"elaborated {d.name} fell out of normal form"
        elaborated[d.name] = term

        shape_env = dict(checker.globals)
        if tx_sch is not None:
            shape_env[d.name] = tx_sch
        shape_result = check_def_shapes(term, tx_sch, d.name, shape_env)

        result = checker.check_def(d.name, term, tx_sch, shape_result, d.recursive)
        results.append(result)
        schemas[d.name] = result.schema if result.schema is not None else tx_sch
        if result.schema is not None:
            checker.globals[d.name] = result.schema
            top_shapes[d.name] = schema_shape(result.schema)
        outcomes.append(
            DefOutcome(
                d.name,
                d.span,
                safe=not result.diagnostics,
                diagnostics=[str(x) for x in result.diagnostics],
            )
        )
        checker.diagnostics.clear()

    vcs = list(checker.vcs)
    clauses = split(vcs, supply)
    qualifiers = gather_qualifiers(rp, opts)

    backend = CheckerBackend(opts)
    refutations: list[tuple[str, SolverVerdict]] = []
    assignment: Optional[Assignment] = None
    try:
        solved = solve(clauses, qualifiers, templates.kappas, backend)
        if isinstance(solved, Refutation):
            # solve stops at the first refutation; gather the rest for the
            # report by replaying all concrete-head clauses at the fixpoint
            assignment = _fixpoint_assignment(clauses, qualifiers, templates, backend)
            refutations = _concrete_failures(clauses, assignment, templates, backend, opts)
        else:
            assignment = solved
            refutations = []
    finally:
        backend.close()

    solved_vcs = [
        _substitute_vc(vc, assignment or {}, templates) for vc in vcs
    ]

    failing_names = {name for name, _ in refutations}
    for oc in outcomes:
        mine = [(n, v) for n, v in refutations if n.split(":", 1)[0] == oc.name]
        if mine:
            oc.safe = False
            oc.failing = mine

    return PipelineResult(
        program=rp,
        elaborated=elaborated,
        schemas=schemas,
        vcs=vcs,
        solved_vcs=solved_vcs,
        clauses=clauses,
        assignment=assignment,
        refutations=refutations,
        outcomes=outcomes,
        stats=elab.stats,
        templates=templates,
        diagnostics=[d for r in results for d in [str(x) for x in r.diagnostics]],
    )


def _empty_env():
    from .typecheck import TypeEnv

    return TypeEnv()


def _fixpoint_assignment(
    clauses: list[HornClause],
    qualifiers: list[Qualifier],
    templates: TemplateStore,
    backend: CheckerBackend,
) -> Assignment:
    """Run the weakening loop over kappa-head clauses only, ignoring
    concrete-head failures, to reach the fixpoint for reporting."""
    kappa_clauses = [c for c in clauses if c.head_kappa() is not None]
    solved = solve(kappa_clauses, qualifiers, templates.kappas, backend)
    assert not isinstance(solved, Refutation)
    return solved


def _concrete_failures(
    clauses: list[HornClause],
    assignment: Assignment,
    templates: TemplateStore,
    backend: CheckerBackend,
    opts: Options,
) -> list[tuple[str, SolverVerdict]]:
    from .infer import _clause_vc

    checks = [c for c in clauses if c.head_kappa() is None]

    def one(c: HornClause) -> tuple[str, Optional[SolverVerdict]]:
        goal = apply_assignment(c.head, assignment, templates.kappas)
        verdict = backend(_clause_vc(c, goal, assignment, templates.kappas))
        return c.name, None if isinstance(verdict, Valid) else verdict

    out: list[tuple[str, SolverVerdict]] = []
    if opts.jobs > 1 and opts.solver is not None and not opts.solver_persistent and not opts.use_oracle:
        with concurrent.futures.ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            for name, verdict in pool.map(one, checks):
                if verdict is not None:
                    out.append((name, verdict))
    else:
        for c in checks:
            name, verdict = one(c)
            if verdict is not None:
                out.append((name, verdict))
    return out


def _substitute_vc(vc: VC, assignment: Assignment, templates: TemplateStore) -> VC:
    binders = tuple(
        Binder(b.name, b.sort, apply_assignment(b.hyp, assignment, templates.kappas))
        for b in vc.binders
    )
    goal = apply_assignment(vc.goal, assignment, templates.kappas)
    return VC(vc.name, binders, goal, funs=vc.funs)


# ---------------------------------------------------------------------------
# Solution rendering
# ---------------------------------------------------------------------------

_DISPLAY_PARAMS = ["x", "y", "z", "w", "u", "t"]


def render_solution(result: PipelineResult, backend: Optional[Callable[[VC], SolverVerdict]] = None) -> str:
    """Human-readable instantiation per implicit refinement-variable site,
    with conjuncts implied by the rest pruned for display."""
    if result.assignment is None:
        return ""
    from .vcfile import pp_formula
    from .logic import FVar, substitute_formula

    lines: list[str] = []
    for site in result.templates.sites:
        kv = result.templates.kappas[site.kappa]
        conjuncts = result.assignment.get(site.kappa, [])
        names = list(_DISPLAY_PARAMS[: max(site.arity - 1, 0)]) + ["v"]
        mapping = {}
        for (slot, sort), disp in zip(kv.slots[-site.arity :], names):
            mapping[slot] = FVar(disp, sort)
        shown = [substitute_formula(c, mapping) for c in conjuncts]
        if backend is not None and len(shown) > 1:
            shown = _prune_implied(shown, kv, site.arity, backend, mapping, result)
        body = " && ".join(pp_formula(c) for c in shown) if shown else "true"
        lines.append(f"{site.def_name}:{site.span}: {site.rvar} := \\{' '.join(names)} -> {body}")
    return "\n".join(lines)


def _prune_implied(shown, kv, arity, backend, mapping, result) -> list:
    """Drop conjuncts implied by the remaining ones (display only)."""
    from .logic import Binder as LBinder, FConn, VC as LVC, f_and, formula_vars

    kept = list(shown)
    i = 0
    while i < len(kept):
        candidate = kept[i]
        rest = kept[:i] + kept[i + 1 :]
        if not rest:
            break
        hyp = f_and(*rest)
        vars_ = formula_vars(hyp)
        vars_.update(formula_vars(candidate))
        binders = tuple(LBinder(n, s, F_TRUE) for n, s in sorted(vars_.items()))
        vc = LVC("prune", binders, FConn("=>", (hyp, candidate)))
        try:
            verdict = backend(vc)
        except BoundcheckError:
            break
        if isinstance(verdict, Valid):
            kept.pop(i)
        else:
            i += 1
    return kept


# ---------------------------------------------------------------------------
# Direct .vc checking
# ---------------------------------------------------------------------------


def check_vc_text(text: str, name: str, opts: Options) -> tuple[str, SolverVerdict]:
    vc = parse_vc_file(text, name)
    backend = CheckerBackend(opts)
    try:
        verdict = backend(vc)
    finally:
        backend.close()
    return vc.name, verdict
