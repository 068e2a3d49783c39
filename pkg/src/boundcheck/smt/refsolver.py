"""A small SMT-LIB2 solver for QF_UFLIA, usable as a subprocess.

Decides satisfiability of quantifier-free formulas over linear integer
arithmetic, booleans, uninterpreted sorts, and uninterpreted functions:

  - uninterpreted applications are replaced by fresh constants with
    pairwise functional-consistency axioms (Ackermann reduction);
  - the boolean structure is explored as a DNF search with early
    contradiction pruning;
  - each leaf conjunction is decided by exact-rational Fourier-Motzkin
    elimination plus branch-and-bound for integrality; equalities with a
    unit-coefficient variable are eliminated by substitution first, and
    inequalities are gcd-tightened.

Answers "unknown" if branch-and-bound exceeds its depth budget (never
wrong, occasionally incomplete). Run as `python -m boundcheck.smt.refsolver`;
reads commands from stdin, writes responses to stdout.

Supported commands: set-logic, set-option, set-info, declare-sort,
declare-fun, declare-const, define-fun (constants only), assert,
check-sat, get-model, push, pop, reset, echo, exit.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Iterator, Optional, Union

Sexp = Union[str, list]

MAX_BB_DEPTH = 60


# ---------------------------------------------------------------------------
# S-expression reader
# ---------------------------------------------------------------------------


def tokenize_sexp(text: str) -> Iterator[str]:
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            yield text[i : j + 1]
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            yield text[i : j + 1]
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            yield text[i:j]
            i = j


def parse_sexps(text: str) -> list[Sexp]:
    stack: list[list] = [[]]
    for tok in tokenize_sexp(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced parentheses")
    return stack[0]


def unmangle(sym: str) -> str:
    if sym.startswith("|") and sym.endswith("|"):
        return sym[1:-1]
    return sym


# ---------------------------------------------------------------------------
# Terms: nested tuples ("op", args...) | ("var", name) | ("int", n) | ("bool", b)
# ---------------------------------------------------------------------------


class SolverError(Exception):
    pass


class Unsupported(Exception):
    """Raised when the decision loop cannot settle an answer."""


class State:
    def __init__(self) -> None:
        self.sorts: set[str] = set()
        self.funs: dict[str, tuple[list[str], str]] = {}
        # assertion stack: list of frames, each a list of terms
        self.frames: list[list[tuple]] = [[]]
        self.last_model: Optional[dict[str, object]] = None

    def all_assertions(self) -> list[tuple]:
        out: list[tuple] = []
        for fr in self.frames:
            out.extend(fr)
        return out


def term_of_sexp(s: Sexp, st: State) -> tuple:
    if isinstance(s, str):
        tok = unmangle(s)
        if tok == "true":
            return ("bool", True)
        if tok == "false":
            return ("bool", False)
        if tok.lstrip("-").isdigit():
            return ("int", int(tok))
        if tok in st.funs:
            arg_sorts, res = st.funs[tok]
            if arg_sorts:
                raise SolverError(f"function {tok} used without arguments")
            return ("var", tok)
        raise SolverError(f"unknown symbol {tok}")
    if not s:
        raise SolverError("empty application")
    head = s[0]
    if isinstance(head, list):
        raise SolverError("higher-order application")
    op = unmangle(head)
    args = [term_of_sexp(a, st) for a in s[1:]]
    if op == "-" and len(args) == 1:
        return ("neg", args[0])
    if op in ("+", "-", "*"):
        out = args[0]
        for a in args[1:]:
            out = (op, out, a)
        return out
    if op in ("<", "<=", ">", ">="):
        return (op, args[0], args[1])
    if op == "=":
        out = None
        for a, b in zip(args, args[1:]):
            eq = ("=", a, b)
            out = eq if out is None else ("and", out, eq)
        return out if out is not None else ("bool", True)
    if op == "distinct":
        parts = []
        for i in range(len(args)):
            for j in range(i + 1, len(args)):
                parts.append(("not", ("=", args[i], args[j])))
        out = ("bool", True)
        for p in parts:
            out = ("and", out, p)
        return out
    if op == "not":
        return ("not", args[0])
    if op in ("and", "or"):
        if not args:
            return ("bool", op == "and")
        out = args[0]
        for a in args[1:]:
            out = (op, out, a)
        return out
    if op == "=>":
        out = args[-1]
        for a in reversed(args[:-1]):
            out = ("or", ("not", a), out)
        return out
    if op == "xor":
        return ("not", ("=", args[0], args[1]))
    if op == "ite":
        return ("ite", args[0], args[1], args[2])
    if op in st.funs:
        return ("app", op, tuple(args))
    raise SolverError(f"unknown operator {op}")


def sort_of(t: tuple, st: State) -> str:
    match t[0]:
        case "int" | "+" | "-" | "*" | "neg":
            return "Int"
        case "bool" | "not" | "and" | "or" | "=" | "<" | "<=" | ">" | ">=":
            return "Bool"
        case "var":
            return st.funs[t[1]][1]
        case "app":
            return st.funs[t[1]][1]
        case "ite":
            return sort_of(t[2], st)
    raise SolverError(f"sort of {t}")


# ---------------------------------------------------------------------------
# Preprocessing: Ackermann reduction and integer-ite lifting
# ---------------------------------------------------------------------------


class Reducer:
    def __init__(self, st: State):
        self.st = st
        self.app_cache: dict[tuple, str] = {}
        self.by_fun: dict[str, list[tuple[tuple, str]]] = {}
        self.side: list[tuple] = []
        self.counter = 0

    def fresh(self, sort: str, tag: str) -> str:
        self.counter += 1
        name = f".{tag}{self.counter}"
        self.st.funs[name] = ([], sort)
        return name

    def reduce(self, t: tuple) -> tuple:
        match t[0]:
            case "int" | "bool" | "var":
                return t
            case "neg":
                return ("-", ("int", 0), self.reduce(t[1]))
            case "+" | "-" | "*" | "<" | "<=" | ">" | ">=" | "and" | "or":
                return (t[0], self.reduce(t[1]), self.reduce(t[2]))
            case "=":
                return ("=", self.reduce(t[1]), self.reduce(t[2]))
            case "not":
                return ("not", self.reduce(t[1]))
            case "ite":
                c = self.reduce(t[1])
                a, b = self.reduce(t[2]), self.reduce(t[3])
                if sort_of(t[2], self.st) == "Bool":
                    return ("or", ("and", c, a), ("and", ("not", c), b))
                w = self.fresh("Int", "ite")
                wv = ("var", w)
                self.side.append(("or", ("not", c), ("=", wv, a)))
                self.side.append(("or", c, ("=", wv, b)))
                return wv
            case "app":
                fun, args = t[1], tuple(self.reduce(a) for a in t[2])
                key = (fun, args)
                if key in self.app_cache:
                    return ("var", self.app_cache[key])
                res_sort = self.st.funs[fun][1]
                name = self.fresh(res_sort, f"ack.{fun}.")
                # functional consistency against earlier applications
                for prev_args, prev_name in self.by_fun.get(fun, []):
                    hyp: Optional[tuple] = None
                    for x, y in zip(prev_args, args):
                        eq = ("=", x, y)
                        hyp = eq if hyp is None else ("and", hyp, eq)
                    concl = ("=", ("var", prev_name), ("var", name))
                    ax = concl if hyp is None else ("or", ("not", hyp), concl)
                    self.side.append(ax)
                self.by_fun.setdefault(fun, []).append((args, name))
                self.app_cache[key] = name
                return ("var", name)
        raise SolverError(f"reduce {t}")


# ---------------------------------------------------------------------------
# Linear atoms
# ---------------------------------------------------------------------------

Lin = tuple[dict[str, int], int]  # sum coeff*var + const


def linear_of(t: tuple, st: State) -> Lin:
    match t[0]:
        case "int":
            return {}, t[1]
        case "var":
            return {t[1]: 1}, 0
        case "+":
            c1, k1 = linear_of(t[1], st)
            c2, k2 = linear_of(t[2], st)
            return _add(c1, c2, 1), k1 + k2
        case "-":
            c1, k1 = linear_of(t[1], st)
            c2, k2 = linear_of(t[2], st)
            return _add(c1, c2, -1), k1 - k2
        case "*":
            c1, k1 = linear_of(t[1], st)
            c2, k2 = linear_of(t[2], st)
            if not c1:
                return {v: k1 * c for v, c in c2.items()}, k1 * k2
            if not c2:
                return {v: k2 * c for v, c in c1.items()}, k1 * k2
            raise Unsupported("nonlinear multiplication")
    raise SolverError(f"non-arithmetic term {t}")


def _add(c1: dict[str, int], c2: dict[str, int], sign: int) -> dict[str, int]:
    out = dict(c1)
    for v, c in c2.items():
        out[v] = out.get(v, 0) + sign * c
        if out[v] == 0:
            del out[v]
    return out


# ---------------------------------------------------------------------------
# DNF search
# ---------------------------------------------------------------------------


class Literals:
    """A conjunction of theory literals plus boolean literals."""

    def __init__(self) -> None:
        self.bools: dict[str, bool] = {}
        self.les: list[Lin] = []  # each means expr <= 0
        self.eqs: list[Lin] = []  # each means expr = 0
        self.neqs: list[Lin] = []  # each means expr != 0

    def clone(self) -> "Literals":
        out = Literals()
        out.bools = dict(self.bools)
        out.les = list(self.les)
        out.eqs = list(self.eqs)
        out.neqs = list(self.neqs)
        return out


def solve_assertions(terms: list[tuple], st: State) -> tuple[str, Optional[dict]]:
    """Returns ("sat", model) | ("unsat", None) | ("unknown", None)."""
    red = Reducer(st)
    agenda = [red.reduce(t) for t in terms]
    agenda.extend(red.side)
    try:
        model = _search(agenda, [], Literals(), st)
    except Unsupported:
        return "unknown", None
    if model is None:
        return "unsat", None
    return "sat", model


def _search(
    agenda: list[tuple], deferred: list[tuple], lits: Literals, st: State
) -> Optional[dict]:
    """Two-phase DPLL-style search: absorb all conjunctive literals, defer
    disjunctions; prune by theory feasibility before branching."""
    agenda = list(agenda)
    deferred = list(deferred)
    while agenda:
        t = agenda.pop()
        match t[0]:
            case "bool":
                if t[1]:
                    continue
                return None
            case "and":
                agenda.append(t[1])
                agenda.append(t[2])
            case "or":
                deferred.append(t)
            case "ite":
                deferred.append(
                    ("or", ("and", t[1], t[2]), ("and", ("not", t[1]), t[3]))
                )
            case "not":
                inner = t[1]
                match inner[0]:
                    case "bool":
                        if inner[1]:
                            return None
                        continue
                    case "not":
                        agenda.append(inner[1])
                    case "and":
                        deferred.append(("or", ("not", inner[1]), ("not", inner[2])))
                    case "or":
                        agenda.append(("and", ("not", inner[1]), ("not", inner[2])))
                    case "var":
                        if not _set_bool(lits, inner[1], False):
                            return None
                    case "=":
                        if sort_of(inner[1], st) == "Bool":
                            deferred.append(
                                (
                                    "or",
                                    ("and", inner[1], ("not", inner[2])),
                                    ("and", ("not", inner[1]), inner[2]),
                                )
                            )
                        else:
                            c, k = _lin_diff(inner[1], inner[2], st)
                            lits = lits.clone()
                            lits.neqs.append((c, k))
                    case "<" | "<=" | ">" | ">=":
                        agenda.append(_negate_cmp(inner))
                    case "ite":
                        deferred.append(
                            (
                                "or",
                                ("and", inner[1], ("not", inner[2])),
                                ("and", ("not", inner[1]), ("not", inner[3])),
                            )
                        )
                    case _:
                        raise SolverError(f"negation of {inner[0]}")
            case "var":
                if not _set_bool(lits, t[1], True):
                    return None
            case "=":
                if sort_of(t[1], st) == "Bool":
                    deferred.append(
                        ("or", ("and", t[1], t[2]), ("and", ("not", t[1]), ("not", t[2])))
                    )
                else:
                    c, k = _lin_diff(t[1], t[2], st)
                    lits = lits.clone()
                    lits.eqs.append((c, k))
            case "<" | "<=" | ">" | ">=":
                lits = lits.clone()
                lits.les.append(_le_zero(t, st))
            case _:
                raise SolverError(f"search on {t[0]}")

    # all conjunctive structure absorbed; prune before branching
    model = _theory_check(lits)
    if model is None:
        return None
    if not deferred:
        return model
    # branch on simple disjunctions first (unit-like pruning resolves them)
    deferred.sort(key=_disjunction_size)
    head, rest = deferred[0], deferred[1:]
    for branch in (head[1], head[2]):
        got = _search([branch], rest, lits.clone(), st)
        if got is not None:
            return got
    return None


def _disjunction_size(t: tuple) -> int:
    if t[0] != "or":
        return 1
    return _disjunction_size(t[1]) + _disjunction_size(t[2])


def _negate_cmp(t: tuple) -> tuple:
    op, a, b = t
    return {"<": (">=",), "<=": (">",), ">": ("<=",), ">=": ("<",)}[op][0], a, b


def _set_bool(lits: Literals, name: str, val: bool) -> bool:
    if name in lits.bools and lits.bools[name] != val:
        return False
    lits.bools = dict(lits.bools)
    lits.bools[name] = val
    return True


def _lin_diff(a: tuple, b: tuple, st: State) -> Lin:
    ca, ka = linear_of(a, st)
    cb, kb = linear_of(b, st)
    return _add(ca, cb, -1), ka - kb


def _le_zero(t: tuple, st: State) -> Lin:
    op, a, b = t
    c, k = _lin_diff(a, b, st)
    match op:
        case "<=":
            return c, k
        case "<":
            return c, k + 1
        case ">=":
            return {v: -x for v, x in c.items()}, -k
        case ">":
            return {v: -x for v, x in c.items()}, -k + 1
    raise SolverError(op)


# ---------------------------------------------------------------------------
# Theory: integer feasibility of a literal conjunction
# ---------------------------------------------------------------------------


def _theory_check(lits: Literals) -> Optional[dict]:
    """Integer feasibility; returns a model dict or None."""
    # disequalities split into strict inequalities
    return _split_neqs(lits.eqs, lits.les, lits.neqs, lits.bools, 0)


def _split_neqs(eqs, les, neqs, bools, depth) -> Optional[dict]:
    if not neqs:
        assign = _lia(eqs, les, depth)
        if assign is None:
            return None
        model = dict(bools)
        model.update(assign)
        return model
    c, k = neqs[0]
    rest = neqs[1:]
    if not c:
        if k == 0:
            return None
        return _split_neqs(eqs, les, rest, bools, depth)
    # c*x + k != 0  ==>  <= -1 or >= 1
    low = ({v: x for v, x in c.items()}, k + 1)
    high = ({v: -x for v, x in c.items()}, -k + 1)
    got = _split_neqs(eqs, les + [low], rest, bools, depth)
    if got is not None:
        return got
    return _split_neqs(eqs, les + [high], rest, bools, depth)


def _lia(eqs: list[Lin], les: list[Lin], depth: int) -> Optional[dict[str, int]]:
    """Feasibility of conjunction of equalities and <=0 inequalities over Z."""
    if depth > MAX_BB_DEPTH:
        raise Unsupported("branch-and-bound depth exceeded")

    eqs = [e for e in eqs]
    les = [l for l in les]
    defs: list[tuple[str, dict[str, Fraction], Fraction]] = []  # x := expr

    # eliminate equalities with a unit-coefficient variable
    while True:
        eqs = [_norm_eq(e) for e in eqs]
        if any(e is None for e in eqs):
            return None
        eqs = [e for e in eqs if e != ({}, 0)]
        pivot = None
        for i, (c, k) in enumerate(eqs):
            for v in sorted(c):
                if abs(c[v]) == 1:
                    pivot = (i, v)
                    break
            if pivot:
                break
        if not pivot:
            break
        i, v = pivot
        c, k = eqs.pop(i)
        sign = c[v]
        expr = {w: Fraction(-x, sign) for w, x in c.items() if w != v}
        const = Fraction(-k, sign)
        defs.append((v, expr, const))
        eqs = [_subst_lin(e, v, expr, const) for e in eqs]
        les = [_subst_lin(e, v, expr, const) for e in les]

    # remaining equalities become inequality pairs
    for c, k in eqs:
        les.append((dict(c), k))
        les.append(({v: -x for v, x in c.items()}, -k))

    les2 = []
    for c, k in les:
        t = _tighten(c, k)
        if t is None:
            return None
        if t != "trivial":
            les2.append(t)

    assign = _fm_solve(les2, depth)
    if assign is None:
        return None

    # reconstruct eliminated variables (integral since pivots were unit)
    for v, expr, const in reversed(defs):
        val = const + sum(coef * assign.setdefault(w, Fraction(0)) for w, coef in expr.items())
        assign[v] = Fraction(int(val))
    return {v: int(x) for v, x in assign.items()}


def _norm_eq(e: Lin) -> Optional[Lin]:
    c, k = e
    c = {v: x for v, x in c.items() if x != 0}
    if not c:
        return None if k != 0 else ({}, 0)
    g = 0
    for x in c.values():
        g = gcd(g, abs(x))
    if k % g != 0:
        return None
    return {v: x // g for v, x in c.items()}, k // g


def _subst_lin(e: Lin, v: str, expr: dict[str, Fraction], const: Fraction) -> Lin:
    c, k = e
    if v not in c:
        return e
    mult = c[v]
    out = {w: Fraction(x) for w, x in c.items() if w != v}
    for w, coef in expr.items():
        out[w] = out.get(w, Fraction(0)) + mult * coef
        if out[w] == 0:
            del out[w]
    kk = Fraction(k) + mult * const
    # clear denominators
    denom = 1
    for x in list(out.values()) + [kk]:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    return {w: int(x * denom) for w, x in out.items()}, int(kk * denom)


def _tighten(c: dict[str, int], k: int):
    c = {v: x for v, x in c.items() if x != 0}
    if not c:
        return None if k > 0 else "trivial"
    g = 0
    for x in c.values():
        g = gcd(g, abs(x))
    # sum c*x <= -k ; divide by g, floor the bound
    bound = floor(Fraction(-k, g))
    return {v: x // g for v, x in c.items()}, -bound


def _fm_solve(les: list[Lin], depth: int) -> Optional[dict[str, Fraction]]:
    """Integer feasibility by Fourier-Motzkin over exact rationals with
    integer-preferring back-substitution; branches when a variable comes
    out fractional. Any returned assignment is all-integer."""
    if depth > MAX_BB_DEPTH:
        raise Unsupported("branch-and-bound depth exceeded")
    system = [({v: Fraction(x) for v, x in c.items()}, Fraction(k)) for c, k in les]
    elim_order: list[tuple[str, list, list]] = []

    work = _dedup(system)
    while True:
        if len(work) > 3000:
            raise Unsupported("inequality system grew too large")
        by_var: dict[str, tuple[int, int]] = {}
        for c, _ in work:
            for v, a in c.items():
                lo, hi = by_var.get(v, (0, 0))
                by_var[v] = (lo + (a < 0), hi + (a > 0))
        if not by_var:
            break
        # eliminate the variable with the fewest pairings (ties by name)
        v = min(by_var, key=lambda w: (by_var[w][0] * by_var[w][1], w))
        lows, highs, rest = [], [], []
        for c, k in work:
            a = c.get(v, Fraction(0))
            if a == 0:
                rest.append((c, k))
            elif a > 0:
                # a*v <= -k - rest  ->  v <= (-k - rest)/a
                highs.append((a, c, k))
            else:
                lows.append((a, c, k))
        elim_order.append((v, lows, highs))
        new = list(rest)
        for (al, cl, kl) in lows:
            for (ah, ch, kh) in highs:
                # combine: eliminate v
                comb: dict[str, Fraction] = {}
                for w, x in cl.items():
                    if w != v:
                        comb[w] = comb.get(w, Fraction(0)) + x * ah
                for w, x in ch.items():
                    if w != v:
                        comb[w] = comb.get(w, Fraction(0)) - x * al
                kk = kl * ah - kh * al
                comb = {w: x for w, x in comb.items() if x != 0}
                if not comb:
                    if kk > 0:
                        return None
                    continue
                new.append((comb, kk))
        work = _dedup(new)
    for c, k in work:
        if k > 0:
            return None

    # back-substitute in reverse elimination order; variables that vanished
    # inside one-sided bound families are free, default them to 0
    assign: dict[str, Fraction] = {}
    fractional: Optional[tuple[str, Fraction]] = None
    for v, lows, highs in reversed(elim_order):
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for a, c, k in lows:  # a < 0:  v >= (k + rest)/(-a)
            rest = k + sum(x * assign.setdefault(w, Fraction(0)) for w, x in c.items() if w != v)
            bound = rest / (-a)
            lo = bound if lo is None or bound > lo else lo
        for a, c, k in highs:  # a > 0: v <= (-k - rest)/a
            rest = k + sum(x * assign.setdefault(w, Fraction(0)) for w, x in c.items() if w != v)
            bound = -rest / a
            hi = bound if hi is None or bound < hi else hi
        val = _pick(lo, hi)
        if val is None:
            return None
        assign[v] = val
        if fractional is None and val.denominator != 1:
            fractional = (v, val)

    if fractional is None:
        return assign

    # branch and bound on the first fractional variable
    v, val = fractional
    fl = floor(val)
    got = _fm_solve(les + [({v: 1}, -fl)], depth + 1)  # v <= floor(val)
    if got is not None:
        return got
    return _fm_solve(les + [({v: -1}, fl + 1)], depth + 1)  # v >= floor(val)+1


def _dedup(work: list) -> list:
    """Keep only the tightest bound per coefficient vector."""
    best: dict[tuple, Fraction] = {}
    order: list[tuple] = []
    for c, k in work:
        key = tuple(sorted(c.items()))
        if key not in best:
            best[key] = k
            order.append(key)
        elif k > best[key]:
            best[key] = k
    return [(dict(key), best[key]) for key in order]


def _pick(lo: Optional[Fraction], hi: Optional[Fraction]) -> Optional[Fraction]:
    """Prefer an integer near zero within [lo, hi]; fall back to midpoint."""
    if lo is not None and hi is not None and lo > hi:
        return None
    ilo = ceil(lo) if lo is not None else None
    ihi = floor(hi) if hi is not None else None
    if lo is None and hi is None:
        return Fraction(0)
    if ilo is None:
        return Fraction(min(ihi, 0))
    if ihi is None:
        return Fraction(max(ilo, 0))
    if ilo <= ihi:
        return Fraction(min(max(0, ilo), ihi))
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# Command loop
# ---------------------------------------------------------------------------


class Session:
    def __init__(self) -> None:
        self.st = State()

    def execute(self, cmd: Sexp) -> Optional[str]:
        if not isinstance(cmd, list) or not cmd:
            raise SolverError("malformed command")
        head = cmd[0]
        match head:
            case "set-logic" | "set-option" | "set-info" | "get-info":
                return None
            case "declare-sort":
                self.st.sorts.add(unmangle(cmd[1]))
                return None
            case "declare-fun":
                name = unmangle(cmd[1])
                arg_sorts = [unmangle(a) for a in cmd[2]]
                self.st.funs[name] = (arg_sorts, unmangle(cmd[3]))
                return None
            case "declare-const":
                name = unmangle(cmd[1])
                self.st.funs[name] = ([], unmangle(cmd[2]))
                return None
            case "define-fun":
                name = unmangle(cmd[1])
                if cmd[2]:
                    raise SolverError("define-fun with parameters is unsupported")
                self.st.funs[name] = ([], unmangle(cmd[3]))
                body = term_of_sexp(cmd[4], self.st)
                self.st.frames[-1].append(("=", ("var", name), body))
                return None
            case "assert":
                self.st.frames[-1].append(term_of_sexp(cmd[1], self.st))
                return None
            case "check-sat":
                verdict, model = solve_assertions(self.st.all_assertions(), self.st)
                self.st.last_model = model
                return verdict
            case "get-model":
                return self.model_text()
            case "push":
                n = int(cmd[1]) if len(cmd) > 1 else 1
                for _ in range(n):
                    self.st.frames.append([])
                return None
            case "pop":
                n = int(cmd[1]) if len(cmd) > 1 else 1
                for _ in range(n):
                    if len(self.st.frames) > 1:
                        self.st.frames.pop()
                return None
            case "reset":
                self.st = State()
                return None
            case "echo":
                return cmd[1].strip('"') if len(cmd) > 1 else ""
            case "exit":
                raise SystemExit(0)
        raise SolverError(f"unknown command {head}")

    def model_text(self) -> str:
        model = self.st.last_model
        if model is None:
            return "(error \"no model available\")"
        lines = ["("]
        for name, (arg_sorts, res) in self.st.funs.items():
            if arg_sorts or name.startswith(".") or res not in ("Int", "Bool"):
                continue
            if name in model:
                val = model[name]
                if isinstance(val, bool):
                    sval = "true" if val else "false"
                else:
                    sval = str(val) if val >= 0 else f"(- {-val})"
            else:
                sval = "0" if res == "Int" else "false"
            lines.append(f"  (define-fun {name} () {res} {sval})")
        lines.append(")")
        return "\n".join(lines)


def main(argv: Optional[list[str]] = None) -> int:
    session = Session()
    buffer = ""
    depth = 0
    out = sys.stdout
    for line in sys.stdin:
        buffer += line
        depth = buffer.count("(") - buffer.count(")")
        if depth > 0:
            continue
        if not buffer.strip():
            buffer = ""
            continue
        try:
            cmds = parse_sexps(buffer)
        except ValueError:
            continue  # wait for more input
        buffer = ""
        for cmd in cmds:
            try:
                reply = session.execute(cmd)
            except SystemExit:
                return 0
            except SolverError as exc:
                reply = f'(error "{exc}")'
            if reply is not None:
                out.write(reply + "\n")
                out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
