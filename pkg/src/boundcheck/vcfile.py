"""The standalone .vc file format.

    -- optional comments
    sort L
    fun len : L -> Int
    bind x : Int | true
    bind b : Bool | b <=> 0 < x
    goal : b => 0 < x

`sort` declares an uninterpreted sort, `fun` an uninterpreted function
(argument sorts arrow-separated, last position is the result), `bind`
introduces a universally quantified binder with a hypothesis, and the
final `goal` line is the formula to validate under the hypotheses.
"""

from __future__ import annotations

from .errors import ParseError
from .logic import (
    BOOL,
    Binder,
    EmbedEnv,
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
    BoolSort,
    Sort,
    UnknownSort,
    VC,
    embed_pred,
)
from .surface import Parser


def _parse_sort(tok: str) -> Sort:
    if tok == "Int":
        return INT
    if tok == "Bool":
        return BOOL
    return UnknownSort(tok)


def parse_vc_file(text: str, name: str = "vc") -> VC:
    env = EmbedEnv()
    binders: list[Binder] = []
    goal: Formula | None = None
    funs: list[tuple[str, tuple[Sort, ...], Sort]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        if line.startswith("sort "):
            _parse_sort(line[5:].strip())
            continue
        if line.startswith("fun "):
            head, _, sig = line[4:].partition(":")
            fname = head.strip()
            parts = [p.strip() for p in sig.split("->")]
            if len(parts) < 1 or not fname:
                raise ParseError(lineno, 1, frozenset({"fun NAME : S -> ... -> S"}), line)
            sorts = [_parse_sort(p) for p in parts]
            env.fun_sigs[fname] = (tuple(sorts[:-1]), sorts[-1])
            funs.append((fname, tuple(sorts[:-1]), sorts[-1]))
            continue
        if line.startswith("bind "):
            head, bar, hyp_text = line[5:].partition("|")
            bname, _, sort_tok = head.partition(":")
            bname = bname.strip()
            sort = _parse_sort(sort_tok.strip())
            if not bar:
                hyp_text = "true"
            env.var_sorts[bname] = sort
            hyp = embed_pred(Parser(hyp_text.strip()).parse_pred(wildcards=False), env)
            binders.append(Binder(bname, sort, hyp))
            continue
        if line.startswith("goal"):
            _, _, goal_text = line.partition(":")
            goal = embed_pred(Parser(goal_text.strip()).parse_pred(wildcards=False), env)
            continue
        raise ParseError(lineno, 1, frozenset({"sort", "fun", "bind", "goal"}), line)
    if goal is None:
        raise ParseError(0, 0, frozenset({"a goal line"}), "end of file")
    return VC(name, tuple(binders), goal, funs=tuple(funs))


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

_PREC = {"<=>": 1, "=>": 2, "or": 3, "and": 4, "cmp": 5, "add": 6, "mul": 7, "app": 8}
_CONN_SHOW = {"and": "&&", "or": "||", "=>": "=>", "<=>": "<=>"}
_CMP_SHOW = {"=": "=", "!=": "/=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def pp_formula(f: Formula, prec: int = 0) -> str:
    match f:
        case FVar(n, _):
            return n
        case FInt(v):
            return str(v) if v >= 0 else f"(0 - {-v})"
        case FBool(v):
            return "true" if v else "false"
        case FArith(op, l, r):
            mine = _PREC["mul"] if op == "*" else _PREC["add"]
            s = f"{pp_formula(l, mine)} {op} {pp_formula(r, mine + 1)}"
            return f"({s})" if mine < prec else s
        case FCmp(op, l, r):
            mine = _PREC["cmp"]
            s = f"{pp_formula(l, mine + 1)} {_CMP_SHOW[op]} {pp_formula(r, mine + 1)}"
            return f"({s})" if mine < prec else s
        case FNot(a):
            return f"not {pp_formula(a, _PREC['app'])}"
        case FConn(op, args):
            mine = _PREC[op]
            sep = f" {_CONN_SHOW[op]} "
            if op in ("=>", "<=>"):
                s = sep.join(pp_formula(a, mine + (1 if i + 1 < len(args) else 0)) for i, a in enumerate(args))
            else:
                s = sep.join(pp_formula(a, mine + 1) for a in args)
            return f"({s})" if mine < prec else s
        case FIte(c, t, e):
            s = f"if {pp_formula(c)} then {pp_formula(t)} else {pp_formula(e)}"
            return f"({s})" if prec > 0 else s
        case FApp(fun, args, _):
            s = fun + "".join(" " + pp_formula(a, _PREC["app"]) for a in args)
            return f"({s})" if args and prec >= _PREC["app"] else s
        case FKapp(k, args):
            s = k + "".join(" " + pp_formula(a, _PREC["app"]) for a in args)
            return f"({s})" if prec >= _PREC["app"] else s
    raise TypeError(f)


def _sort_text(s: Sort) -> str:
    match s:
        case IntSort():
            return "Int"
        case BoolSort():
            return "Bool"
        case UnknownSort(n):
            return n
    raise TypeError(s)


def vc_to_text(vc: VC) -> str:
    from .logic import formula_apps

    lines = [f"-- {vc.name}"]
    sorts: list[str] = []
    funs: dict[str, tuple[tuple[Sort, ...], Sort]] = {}
    for fname, arg_sorts, res in vc.funs:
        funs.setdefault(fname, (arg_sorts, res))
    for f in vc.all_formulas():
        for fname, sig in formula_apps(f).items():
            funs.setdefault(fname, sig)
    for b in vc.binders:
        if isinstance(b.sort, UnknownSort) and b.sort.name not in sorts:
            sorts.append(b.sort.name)
    for fname, (arg_sorts, res) in funs.items():
        for s in arg_sorts + (res,):
            if isinstance(s, UnknownSort) and s.name not in sorts:
                sorts.append(s.name)
    for s in sorts:
        lines.append(f"sort {s}")
    for fname, (arg_sorts, res) in funs.items():
        sig = " -> ".join(_sort_text(s) for s in arg_sorts + (res,))
        lines.append(f"fun {fname} : {sig}")
    for b in vc.binders:
        lines.append(f"bind {b.name} : {_sort_text(b.sort)} | {pp_formula(b.hyp)}")
    lines.append(f"goal : {pp_formula(vc.goal)}")
    return "\n".join(lines) + "\n"
