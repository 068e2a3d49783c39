"""Command-line driver.

    boundcheck program.bl [flags]     full pipeline, per-definition verdicts
    boundcheck formula.vc [flags]     discharge one VC directly

Exit codes: 0 all safe, 1 any unsafe or refuted, 2 usage or parse error,
3 solver infrastructure failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Optional

from .errors import BoundcheckError, ParseError, ProtocolError, SolverSpawnError
from .evaluator import BoolV, Closure, IntV, TyClosure, BoundClosure, CrashV, OutOfFuel, eval_term, LAM_B
from .pipeline import (
    CheckerBackend,
    Options,
    PipelineResult,
    check_program_text,
    check_vc_text,
    render_solution,
)
from .smt.verdict import Invalid, Unknown, Valid
from .surface import Parser as SurfaceParser, parse_program, pp_schema, pp_term
from .vcfile import vc_to_text

ENV_SOLVER = "BOUNDCHECK_SOLVER"

EXIT_SAFE = 0
EXIT_UNSAFE = 1
EXIT_USAGE = 2
EXIT_INFRA = 3


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="boundcheck",
        description="Refinement type checker with bounded abstract refinements",
    )
    p.add_argument("input", help="a .bl program or a .vc verification condition")
    p.add_argument("--solver", help="external SMT solver command (SMT-LIB2 on stdio)")
    p.add_argument("--timeout-ms", type=int, default=10_000)
    p.add_argument("--oracle", action="store_true", help="discharge with the internal finite-domain oracle")
    p.add_argument("--oracle-bound", type=int, default=2, help="oracle variable domain half-width")
    p.add_argument("--solver-persistent", action="store_true", help="reuse one solver process with push/pop")
    p.add_argument("--qualifiers", help="extra qualifier file (qualif declarations)")
    p.add_argument("--no-mine-quals", action="store_true", help="disable annotation-derived qualifiers")
    p.add_argument("--materialize", choices=["new", "all"], default="new")
    p.add_argument("--max-materialize", type=int, default=None)
    p.add_argument("--emit-elaborated", action="store_true")
    p.add_argument("--emit-vcs", metavar="DIR")
    p.add_argument("--emit-smt", metavar="DIR")
    p.add_argument("--dump-solution", action="store_true")
    p.add_argument("--eval", metavar="NAME", help="evaluate a top-level definition")
    p.add_argument("--fuel", type=int, default=1_000_000)
    p.add_argument("--format", choices=["text", "tap", "lines"], default="text")
    p.add_argument("--jobs", type=int, default=1)
    return p


def _load_qualifier_file(path: str):
    text = Path(path).read_text()
    prog = parse_program(text)
    return prog.qualifiers


def options_from_args(args: argparse.Namespace) -> Options:
    solver = args.solver or os.environ.get(ENV_SOLVER)
    extra = ()
    if args.qualifiers:
        extra = tuple(_load_qualifier_file(args.qualifiers))
    return Options(
        solver=solver,
        timeout_ms=args.timeout_ms,
        use_oracle=args.oracle,
        oracle_bound=args.oracle_bound,
        solver_persistent=args.solver_persistent,
        materialize_all=args.materialize == "all",
        max_materialize=args.max_materialize,
        extra_qualifiers=extra,
        jobs=args.jobs,
        mine_quals=not args.no_mine_quals,
    )


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    path = Path(args.input)
    if not path.exists():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    opts = options_from_args(args)

    if path.suffix == ".vc":
        return _run_vc(text, path.stem, opts, args)
    return _run_program(text, opts, args)


def _run_vc(text: str, name: str, opts: Options, args: argparse.Namespace) -> int:
    start = time.monotonic()
    try:
        vc_name, verdict = check_vc_text(text, name, opts)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverSpawnError, ProtocolError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except BoundcheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    millis = int((time.monotonic() - start) * 1000)
    ok = isinstance(verdict, Valid)
    _emit_record(args.format, vc_name, "SAFE" if ok else "UNSAFE", "-", millis, verdict)
    return EXIT_SAFE if ok else EXIT_UNSAFE


def _emit_record(fmt: str, name: str, verdict: str, span: str, millis: int, raw=None) -> None:
    if fmt == "text":
        extra = ""
        if raw is not None and isinstance(raw, Invalid) and raw.model:
            extra = f"  model: {raw.model}"
        if raw is not None and isinstance(raw, Unknown):
            extra = f"  ({raw.reason})"
        print(f"{verdict} {name}{extra}")
    elif fmt == "tap":
        ok = "ok" if verdict == "SAFE" else "not ok"
        print(f"{ok} - {name}")
    else:
        print(f"name={name} verdict={verdict} span={span} millis={millis}")


def _run_program(text: str, opts: Options, args: argparse.Namespace) -> int:
    start = time.monotonic()
    try:
        result = check_program_text(text, opts)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverSpawnError, ProtocolError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except BoundcheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.emit_elaborated:
        for name, term in result.elaborated.items():
            sch = result.schemas.get(name)
            if sch is not None:
                print(f"val {name} :: {pp_schema(sch)}")
            print(f"let {name} = {pp_term(term)}")
        print()

    if args.emit_vcs:
        outdir = Path(args.emit_vcs)
        outdir.mkdir(parents=True, exist_ok=True)
        for vc in result.solved_vcs:
            (outdir / f"{_sanitize(vc.name)}.vc").write_text(vc_to_text(vc))
    if args.emit_smt:
        from .smt.script import emit_script

        outdir = Path(args.emit_smt)
        outdir.mkdir(parents=True, exist_ok=True)
        for vc in result.solved_vcs:
            (outdir / f"{_sanitize(vc.name)}.smt2").write_text(emit_script(vc))

    if args.dump_solution:
        backend = CheckerBackend(opts)
        try:
            text_out = render_solution(result, backend)
        finally:
            backend.close()
        if text_out:
            print(text_out)

    if args.eval:
        code = _eval_definition(result, args.eval, args.fuel)
        if code is not None:
            return code

    millis = int((time.monotonic() - start) * 1000)
    if args.format == "tap":
        print(f"1..{len(result.outcomes)}")
    worst = EXIT_SAFE
    for oc in result.outcomes:
        verdict = "SAFE" if oc.safe else "UNSAFE"
        if not oc.safe:
            worst = EXIT_UNSAFE
        detail = ""
        if oc.failing:
            names = ", ".join(n for n, _ in oc.failing)
            detail = f" [{names}]"
            models = [v.model for _, v in oc.failing if isinstance(v, Invalid) and v.model]
            if models and args.format == "text":
                detail += f" model: {models[0]}"
        unknowns = [v for _, v in oc.failing if isinstance(v, Unknown)]
        if args.format == "text":
            print(f"{verdict} {oc.name}{detail}")
            for d in oc.diagnostics:
                print(f"  diagnostic: {d}")
            for u in unknowns:
                print(f"  solver answered unknown; treated as invalid: {u.reason}")
        elif args.format == "tap":
            ok = "ok" if oc.safe else "not ok"
            print(f"{ok} - {oc.name}{detail}")
        else:
            span = f"{oc.span.line}:{oc.span.col}"
            names = ";".join(n for n, _ in oc.failing) or "-"
            print(f"name={oc.name} verdict={verdict} span={span} millis={millis} failing={names}")
        if oc.diagnostics:
            worst = EXIT_UNSAFE
    return worst


def _sanitize(name: str) -> str:
    return name.replace(":", "_").replace("/", "_")


def _eval_definition(result: PipelineResult, name: str, fuel: int) -> Optional[int]:
    rp = result.program
    if rp is None:
        return EXIT_USAGE
    env: dict = {}
    target = None
    for d in rp.defs:
        value = eval_term(d.term, fuel, LAM_B, env)
        if isinstance(value, OutOfFuel):
            print(f"{d.name}: out of fuel", file=sys.stderr)
            return EXIT_UNSAFE
        if isinstance(value, (Closure, TyClosure, BoundClosure)):
            value.env[d.name] = value
        env[d.name] = value
        if d.name == name:
            target = value
    if target is None:
        print(f"error: no definition named {name}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{name} = {_show_value(target)}")
    return None


def _show_value(v) -> str:
    match v:
        case IntV(n):
            return str(n)
        case BoolV(b):
            return "true" if b else "false"
        case CrashV():
            return "crash"
        case _:
            return "<function>"


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
