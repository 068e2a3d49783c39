"""Surface language: tokenizer, parser, and pretty printer.

Program files (.bl) contain, in any order:

    -- comment
    qualif Pos(v:Int): 0 < v
    qualif Leq(v:Int, *:Int): v <= *
    uninterp len :: Int -> Int
    bound UpClosed (p :: Int -> Bool) = \\x -> p x => p (x + 1)
    bound Chain p q r = \\x y z -> q x y => p y z => r x z
    assume leq :: x:Int -> y:Int -> {v:Bool | v <=> x <= y}
    val f :: forall a. forall <p :: Int -> Bool>. (UpClosed p) => ...
    let f = \\x -> e
    letrec g = \\x -> e

Sugar: `B<p x>` for `{v:B | p x v}`; infix operators in terms desugar to
primitive applications.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
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
    PBin,
    PBool,
    PInt,
    PIte,
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
    is_trivially_true,
    r_and,
)
from .errors import (
    DuplicateName,
    NO_SPAN,
    ParseError,
    Span,
    UnboundIdentifier,
)
from .names import NameSupply

KEYWORDS = {
    "let",
    "letrec",
    "val",
    "assume",
    "bound",
    "qualif",
    "uninterp",
    "forall",
    "in",
    "true",
    "false",
    "not",
    "if",
    "then",
    "else",
    "Int",
    "Bool",
}

# ---------------------------------------------------------------------------
# Program representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Qualifier:
    """A qualifier pattern: value variable, wildcard sorts, and a body whose
    wildcards are the reserved names $star0, $star1, ..."""

    name: str
    vvar: str
    vsort: Base
    wildcard_sorts: tuple[Base, ...]
    body: Pred


@dataclass(frozen=True)
class BoundDecl:
    """A named bound as declared: rvar formals (sorts optional) plus the
    parametric body."""

    name: str
    rvar_formals: tuple[str, ...]
    rvar_sorts: tuple[Optional[RType], ...]
    params: tuple[str, ...]
    body: Refinement
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Def:
    name: str
    annot: Optional[Schema]
    term: CoreTerm
    recursive: bool
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Program:
    qualifiers: tuple[Qualifier, ...]
    uninterp_funs: tuple[tuple[str, tuple[Base, ...], Base], ...]
    bounds: tuple[BoundDecl, ...]
    assumes: tuple[tuple[str, Schema], ...]
    defs: tuple[Def, ...]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

SYMBOLS = [
    "<=>",
    "=>",
    "->",
    "::",
    "==",
    "/=",
    "<=",
    ">=",
    "&&",
    "||",
    "\\",
    "(",
    ")",
    "{",
    "}",
    "<",
    ">",
    "|",
    ":",
    ",",
    "=",
    "+",
    "-",
    "*",
    ".",
]

IDENT_START = set(string.ascii_letters + "_$")
IDENT_CONT = set(string.ascii_letters + string.digits + "_'$")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "sym" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c in IDENT_START:
            j = i
            while j < n and text[j] in IDENT_CONT:
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(line, col, frozenset({"a token"}), c)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.supply = NameSupply()

    # -- token helpers ------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def _err(self, *expected: str) -> ParseError:
        t = self.cur
        found = t.text if t.kind != "eof" else "end of input"
        return ParseError(t.line, t.col, frozenset(expected), found)

    def at_sym(self, s: str) -> bool:
        return self.cur.kind == "sym" and self.cur.text == s

    def at_kw(self, w: str) -> bool:
        return self.cur.kind == "ident" and self.cur.text == w

    def eat_sym(self, s: str) -> Token:
        if not self.at_sym(s):
            raise self._err(f"'{s}'")
        t = self.cur
        self.pos += 1
        return t

    def eat_kw(self, w: str) -> Token:
        if not self.at_kw(w):
            raise self._err(f"'{w}'")
        t = self.cur
        self.pos += 1
        return t

    def eat_ident(self) -> Token:
        t = self.cur
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self._err("an identifier")
        self.pos += 1
        return t

    def eat_int(self) -> int:
        t = self.cur
        if t.kind != "int":
            raise self._err("an integer")
        self.pos += 1
        return int(t.text)

    def span(self) -> Span:
        return Span(self.cur.line, self.cur.col)

    # -- programs -----------------------------------------------------------

    def parse_program(self) -> Program:
        qualifiers: list[Qualifier] = []
        uninterp: list[tuple[str, tuple[Base, ...], Base]] = []
        bounds: list[BoundDecl] = []
        assumes: list[tuple[str, Schema]] = []
        defs: list[Def] = []
        pending_val: dict[str, Schema] = {}
        seen: dict[str, str] = {}

        def declare(name: str, ns: str, sp: Span) -> None:
            key = f"{ns}:{name}"
            if key in seen:
                raise DuplicateName(f"duplicate {ns} {name}", sp)
            seen[key] = ns

        while self.cur.kind != "eof":
            sp = self.span()
            if self.at_kw("qualif"):
                q = self.parse_qualif()
                declare(q.name, "qualifier", sp)
                qualifiers.append(q)
            elif self.at_kw("uninterp"):
                nm, args, res = self.parse_uninterp()
                declare(nm, "uninterpreted function", sp)
                uninterp.append((nm, args, res))
            elif self.at_kw("bound"):
                b = self.parse_bound_decl()
                declare(b.name, "bound", sp)
                bounds.append(b)
            elif self.at_kw("assume"):
                self.eat_kw("assume")
                nm = self.eat_ident().text
                self.eat_sym("::")
                declare(nm, "definition", sp)
                assumes.append((nm, self.parse_schema()))
            elif self.at_kw("val"):
                self.eat_kw("val")
                nm = self.eat_ident().text
                self.eat_sym("::")
                if nm in pending_val:
                    raise DuplicateName(f"duplicate val {nm}", sp)
                pending_val[nm] = self.parse_schema()
            elif self.at_kw("let") or self.at_kw("letrec"):
                rec = self.at_kw("letrec")
                self.pos += 1
                nm = self.eat_ident().text
                declare(nm, "definition", sp)
                self.eat_sym("=")
                body = self.parse_term()
                defs.append(Def(nm, pending_val.pop(nm, None), body, rec, sp))
            else:
                raise self._err("'qualif'", "'uninterp'", "'bound'", "'assume'", "'val'", "'let'", "'letrec'")
        if pending_val:
            nm = next(iter(pending_val))
            raise UnboundIdentifier(f"val {nm} has no accompanying let", NO_SPAN)
        return Program(tuple(qualifiers), tuple(uninterp), tuple(bounds), tuple(assumes), tuple(defs))

    def parse_qualif(self) -> Qualifier:
        self.eat_kw("qualif")
        name = self.eat_ident().text
        self.eat_sym("(")
        vname = self.eat_ident().text
        self.eat_sym(":")
        vsort = self.parse_base()
        wsorts: list[Base] = []
        while self.at_sym(","):
            self.eat_sym(",")
            self.eat_sym("*")
            self.eat_sym(":")
            wsorts.append(self.parse_base())
        self.eat_sym(")")
        self.eat_sym(":")
        self._wildcard_count = 0
        body = self.parse_pred(wildcards=True)
        if self._wildcard_count != len(wsorts):
            raise ParseError(
                self.cur.line, self.cur.col, frozenset({"matching wildcard count"}), name
            )
        return Qualifier(name, vname, vsort, tuple(wsorts), body)

    def parse_uninterp(self) -> tuple[str, tuple[Base, ...], Base]:
        self.eat_kw("uninterp")
        name = self.eat_ident().text
        self.eat_sym("::")
        sorts = [self.parse_base()]
        while self.at_sym("->"):
            self.eat_sym("->")
            sorts.append(self.parse_base())
        return name, tuple(sorts[:-1]), sorts[-1]

    def parse_base(self) -> Base:
        if self.at_kw("Int"):
            self.pos += 1
            return B_INT
        if self.at_kw("Bool"):
            self.pos += 1
            return B_BOOL
        t = self.eat_ident()
        return b_var(t.text)

    def parse_bound_decl(self) -> BoundDecl:
        sp = self.span()
        self.eat_kw("bound")
        name = self.eat_ident().text
        formals: list[str] = []
        sorts: list[Optional[RType]] = []
        if self.at_sym("("):
            self.eat_sym("(")
            while True:
                formals.append(self.eat_ident().text)
                self.eat_sym("::")
                sorts.append(self.parse_rtype())
                if self.at_sym(","):
                    self.eat_sym(",")
                    continue
                break
            self.eat_sym(")")
        else:
            while not self.at_sym("="):
                formals.append(self.eat_ident().text)
                sorts.append(None)
        self.eat_sym("=")
        self.eat_sym("\\")
        params: list[str] = []
        while not self.at_sym("->"):
            params.append(self.eat_ident().text)
        self.eat_sym("->")
        body = self.parse_pred_or_reft(set(formals))
        return BoundDecl(name, tuple(formals), tuple(sorts), tuple(params), body, sp)

    # -- schemas and types ---------------------------------------------------

    def parse_schema(self) -> Schema:
        tyvars: list[str] = []
        rvars: list[tuple[str, RType]] = []
        battach: list[tuple[str, tuple[str, ...], Span]] = []
        while self.at_kw("forall"):
            self.eat_kw("forall")
            if self.at_sym("<"):
                self.eat_sym("<")
                while True:
                    rv = self.eat_ident().text
                    self.eat_sym("::")
                    rvars.append((rv, self.parse_rtype()))
                    if self.at_sym(","):
                        self.eat_sym(",")
                        continue
                    break
                self.eat_sym(">")
                self.eat_sym(".")
            else:
                while not self.at_sym("."):
                    tyvars.append(self.eat_ident().text)
                self.eat_sym(".")
        # bound attachments: (Name p q ...) => ...
        while self.at_sym("(") and self._lookahead_bound_attach():
            sp = self.span()
            self.eat_sym("(")
            bname = self.eat_ident().text
            args: list[str] = []
            while not self.at_sym(")"):
                args.append(self.eat_ident().text)
            self.eat_sym(")")
            self.eat_sym("=>")
            battach.append((bname, tuple(args), sp))
        ty = self.parse_rtype()
        sch: Schema = SMono(ty)
        for bname, args, sp in reversed(battach):
            # placeholder carrying name + rvar arguments; the desugarer
            # resolves it against the declaration into a full instance
            sch = SBound(Bound(bname, (), R_TRUE, rvars=args), sch)
        for rv, rt in reversed(rvars):
            sch = SPAll(rv, rt, sch)
        for a in reversed(tyvars):
            sch = SAll(a, sch)
        return sch

    def _lookahead_bound_attach(self) -> bool:
        """True if the '(' starts a bound attachment `(Name v ...) =>` rather
        than a parenthesized type."""
        i = self.pos + 1
        depth = 1
        while self.toks[i].kind != "eof" and depth > 0:
            t = self.toks[i]
            if t.kind == "sym":
                if t.text == "(":
                    depth += 1
                elif t.text == ")":
                    depth -= 1
                elif depth == 1 and t.text not in (")",):
                    return False  # types contain ':', '->', '{' etc.
            elif t.kind != "ident" or t.text in KEYWORDS:
                return False
            i += 1
        if depth != 0:
            return False
        nxt = self.toks[i]
        return nxt.kind == "sym" and nxt.text == "=>"

    def parse_rtype(self) -> RType:
        """rtype := arg ('->' rtype)?   with arg := (name ':')? atom"""
        binder, t = self._parse_arrow_arg()
        if self.at_sym("->"):
            self.eat_sym("->")
            cod = self.parse_rtype()
            return TFun(binder or self.supply.fresh("$x"), t, cod)
        if binder is not None:
            raise self._err("'->'")
        return t

    def _parse_arrow_arg(self) -> tuple[Optional[str], RType]:
        # name ':' type-atom   (binder) or bare type-atom
        if (
            self.cur.kind == "ident"
            and self.cur.text not in KEYWORDS
            and self.toks[self.pos + 1].kind == "sym"
            and self.toks[self.pos + 1].text == ":"
        ):
            b = self.eat_ident().text
            self.eat_sym(":")
            return b, self.parse_type_atom()
        return None, self.parse_type_atom()

    def parse_type_atom(self) -> RType:
        if self.at_sym("("):
            self.eat_sym("(")
            t = self.parse_rtype()
            self.eat_sym(")")
            return t
        if self.at_sym("{"):
            self.eat_sym("{")
            v = self.eat_ident().text
            self.eat_sym(":")
            base = self.parse_base()
            self.eat_sym("|")
            reft = self.parse_pred_or_reft(None, value_var=v)
            self.eat_sym("}")
            return TBase(base, v, reft)
        base = self.parse_base()
        if self.at_sym("<"):
            # B<p x ...>  ==  {v:B | p x ... v}
            self.eat_sym("<")
            rv = self.eat_ident().text
            args: list[Pred] = []
            while not self.at_sym(">"):
                args.append(self._parse_pred_atom_arg())
            self.eat_sym(">")
            vv = self.supply.fresh("$v")
            return TBase(base, vv, RVarApp(rv, tuple(args) + (PVar(vv),)))
        return TBase(base, self.supply.fresh("$v"), R_TRUE)

    # -- refinements / predicates --------------------------------------------

    def parse_pred_or_reft(self, rvar_names: Optional[set[str]], value_var: Optional[str] = None) -> Refinement:
        """Parse a refinement: an implication chain of conjunctions of atoms.

        Abstract applications `p x y` are recognized when the head is known
        to be an rvar formal (inside bound bodies) or by the enclosing
        program context during desugaring; at parse time inside types we
        treat any lowercase head applied to arguments as an abstract
        application (uninterpreted functions use explicit parentheses
        elsewhere in predicates).
        """
        return self._parse_reft_imp(rvar_names)

    def _parse_reft_imp(self, rvars: Optional[set[str]]) -> Refinement:
        lhs = self._parse_reft_conj(rvars)
        if self.at_sym("=>"):
            self.eat_sym("=>")
            rhs = self._parse_reft_imp(rvars)
            return RImp(lhs, rhs)
        return lhs

    def _parse_reft_conj(self, rvars: Optional[set[str]]) -> Refinement:
        parts = [self._parse_reft_atom(rvars)]
        while self.at_sym("&&"):
            self.eat_sym("&&")
            parts.append(self._parse_reft_atom(rvars))
        return r_and(*parts) if len(parts) > 1 else parts[0]

    def _parse_reft_atom(self, rvars: Optional[set[str]]) -> Refinement:
        # an abstract application or a concrete predicate (no => / && at top)
        start = self.pos
        if self.cur.kind == "ident" and self.cur.text not in KEYWORDS:
            head = self.cur.text
            nxt = self.toks[self.pos + 1]
            is_app_head = nxt.kind in ("ident", "int") or (nxt.kind == "sym" and nxt.text == "(")
            known_rvar = rvars is None or head in rvars
            if is_app_head and known_rvar:
                self.pos += 1
                args: list[Pred] = [self._parse_pred_atom_arg()]
                while (
                    self.cur.kind in ("ident", "int") and self.cur.text not in KEYWORDS
                ) or self.at_sym("("):
                    args.append(self._parse_pred_atom_arg())
                # if followed by an operator, this was a predicate, not an app
                if self.cur.kind == "sym" and self.cur.text in ("+", "-", "*", "<", "<=", ">", ">=", "==", "=", "/=", "<=>"):
                    self.pos = start
                else:
                    return RVarApp(head, tuple(args))
        return RConc(self.parse_pred(wildcards=False, stop_bool=True))

    def _parse_pred_atom_arg(self) -> Pred:
        """One argument of an abstract application: var, int, or (pred)."""
        if self.at_sym("("):
            self.eat_sym("(")
            p = self.parse_pred(wildcards=False)
            self.eat_sym(")")
            return p
        if self.cur.kind == "int":
            return PInt(self.eat_int())
        t = self.eat_ident()
        return PVar(t.text)

    # Predicate grammar (concrete logic):
    #   iff   := imp ('<=>' imp)*
    #   imp   := disj ('=>' imp)?
    #   disj  := conj ('||' conj)*
    #   conj  := cmp ('&&' cmp)*
    #   cmp   := sum (relop sum)?
    #   sum   := prod (('+'|'-') prod)*
    #   prod  := atom ('*' atom)*
    #   atom  := int | true | false | ident args? | 'not' atom | '(' iff ')'
    #            | 'if' iff 'then' iff 'else' iff | '-' atom

    def parse_pred(self, wildcards: bool, stop_bool: bool = False) -> Pred:
        self._wildcard_count = getattr(self, "_wildcard_count", 0)
        return self._pred_iff(wildcards, stop_bool)

    def _pred_iff(self, w: bool, stop: bool) -> Pred:
        lhs = self._pred_imp(w, stop)
        while self.at_sym("<=>"):
            self.eat_sym("<=>")
            lhs = PBin("<=>", lhs, self._pred_imp(w, stop))
        return lhs

    def _pred_imp(self, w: bool, stop: bool) -> Pred:
        lhs = self._pred_disj(w, stop)
        if not stop and self.at_sym("=>"):
            self.eat_sym("=>")
            return PBin("=>", lhs, self._pred_imp(w, stop))
        return lhs

    def _pred_disj(self, w: bool, stop: bool) -> Pred:
        lhs = self._pred_conj(w, stop)
        while self.at_sym("||"):
            self.eat_sym("||")
            lhs = PBin("or", lhs, self._pred_conj(w, stop))
        return lhs

    def _pred_conj(self, w: bool, stop: bool) -> Pred:
        lhs = self._pred_cmp(w)
        while not stop and self.at_sym("&&"):
            self.eat_sym("&&")
            lhs = PBin("and", lhs, self._pred_cmp(w))
        return lhs

    def _pred_cmp(self, w: bool) -> Pred:
        lhs = self._pred_sum(w)
        for op, norm in (("==", "="), ("=", "="), ("/=", "!="), ("<=", "<="), ("<", "<"), (">=", ">="), (">", ">")):
            if self.at_sym(op):
                self.eat_sym(op)
                return PBin(norm, lhs, self._pred_sum(w))
        return lhs

    def _pred_sum(self, w: bool) -> Pred:
        lhs = self._pred_prod(w)
        while self.at_sym("+") or self.at_sym("-"):
            op = self.cur.text
            self.pos += 1
            lhs = PBin(op, lhs, self._pred_prod(w))
        return lhs

    def _pred_prod(self, w: bool) -> Pred:
        lhs = self._pred_atom(w)
        while self.at_sym("*"):
            self.eat_sym("*")
            lhs = PBin("*", lhs, self._pred_atom(w))
        return lhs

    def _pred_atom(self, w: bool) -> Pred:
        if self.at_sym("("):
            self.eat_sym("(")
            p = self._pred_iff(w, False)
            self.eat_sym(")")
            return p
        if self.at_sym("-"):
            self.eat_sym("-")
            a = self._pred_atom(w)
            return PBin("-", PInt(0), a)
        if self.at_sym("*"):
            if not w:
                raise self._err("a predicate atom")
            self.eat_sym("*")
            idx = self._wildcard_count
            self._wildcard_count += 1
            return PVar(f"$star{idx}")
        if self.cur.kind == "int":
            return PInt(self.eat_int())
        if self.at_kw("true"):
            self.pos += 1
            return PBool(True)
        if self.at_kw("false"):
            self.pos += 1
            return PBool(False)
        if self.at_kw("not"):
            self.pos += 1
            return PNot(self._pred_atom(w))
        if self.at_kw("if"):
            self.pos += 1
            c = self._pred_iff(w, False)
            self.eat_kw("then")
            t = self._pred_iff(w, False)
            self.eat_kw("else")
            e = self._pred_iff(w, False)
            return PIte(c, t, e)
        t = self.eat_ident()
        # uninterpreted function application: juxtaposed simple args
        args: list[Pred] = []
        while True:
            if self.cur.kind == "int":
                args.append(PInt(self.eat_int()))
            elif self.cur.kind == "ident" and self.cur.text not in KEYWORDS and not self._next_is_binder():
                args.append(PVar(self.eat_ident().text))
            elif self.at_sym("(") :
                self.eat_sym("(")
                args.append(self._pred_iff(w, False))
                self.eat_sym(")")
            else:
                break
        if args:
            return PApp(t.text, tuple(args))
        return PVar(t.text)

    def _next_is_binder(self) -> bool:
        nxt = self.toks[self.pos + 1]
        return nxt.kind == "sym" and nxt.text == ":"

    # -- terms ----------------------------------------------------------------

    def parse_term(self) -> CoreTerm:
        sp = self.span()
        if self.at_sym("\\"):
            self.eat_sym("\\")
            binders: list[tuple[str, Optional[RType]]] = []
            while not self.at_sym("->"):
                if self.at_sym("("):
                    self.eat_sym("(")
                    nm = self.eat_ident().text
                    self.eat_sym(":")
                    bt = self.parse_rtype()
                    self.eat_sym(")")
                    binders.append((nm, bt))
                else:
                    binders.append((self.eat_ident().text, None))
            self.eat_sym("->")
            body = self.parse_term()
            for nm, bt in reversed(binders):
                body = Lam(nm, bt, body, span=sp)
            return body
        if self.at_kw("let") or self.at_kw("letrec"):
            rec = self.at_kw("letrec")
            self.pos += 1
            nm = self.eat_ident().text
            annot: Optional[Schema] = None
            if self.at_sym("::"):
                self.eat_sym("::")
                annot = self.parse_schema()
            self.eat_sym("=")
            bound = self.parse_term()
            self.eat_kw("in")
            body = self.parse_term()
            return Let(nm, bound, body, annot, rec, span=sp)
        return self._term_disj()

    def _term_disj(self) -> CoreTerm:
        lhs = self._term_conj()
        while self.at_sym("||"):
            sp = self.span()
            self.eat_sym("||")
            lhs = App(App(Var("||", span=sp), lhs, span=sp), self._term_conj(), span=sp)
        return lhs

    def _term_conj(self) -> CoreTerm:
        lhs = self._term_cmp()
        while self.at_sym("&&"):
            sp = self.span()
            self.eat_sym("&&")
            lhs = App(App(Var("&&", span=sp), lhs, span=sp), self._term_cmp(), span=sp)
        return lhs

    def _term_cmp(self) -> CoreTerm:
        lhs = self._term_sum()
        for op in ("==", "/=", "<=", "<", ">=", ">"):
            if self.at_sym(op):
                sp = self.span()
                self.eat_sym(op)
                return App(App(Var(op, span=sp), lhs, span=sp), self._term_sum(), span=sp)
        return lhs

    def _term_sum(self) -> CoreTerm:
        lhs = self._term_prod()
        while self.at_sym("+") or self.at_sym("-"):
            sp = self.span()
            op = self.cur.text
            self.pos += 1
            lhs = App(App(Var(op, span=sp), lhs, span=sp), self._term_prod(), span=sp)
        return lhs

    def _term_prod(self) -> CoreTerm:
        lhs = self._term_app()
        while self.at_sym("*"):
            sp = self.span()
            self.eat_sym("*")
            lhs = App(App(Var("*", span=sp), lhs, span=sp), self._term_app(), span=sp)
        return lhs

    def _term_app(self) -> CoreTerm:
        f = self._term_atom()
        while True:
            if self.at_sym("(") or self.cur.kind == "int" or (
                self.cur.kind == "ident" and (self.cur.text not in KEYWORDS or self.cur.text in ("true", "false", "not"))
            ):
                sp = self.span()
                arg = self._term_atom()
                f = App(f, arg, span=sp)
            else:
                return f

    def _term_atom(self) -> CoreTerm:
        sp = self.span()
        if self.at_sym("("):
            self.eat_sym("(")
            t = self.parse_term()
            self.eat_sym(")")
            return t
        if self.cur.kind == "int":
            return Const(self.eat_int(), span=sp)
        if self.at_kw("true"):
            self.pos += 1
            return Const(True, span=sp)
        if self.at_kw("false"):
            self.pos += 1
            return Const(False, span=sp)
        if self.at_kw("not"):
            self.pos += 1
            return Var("not", span=sp)
        t = self.eat_ident()
        return Var(t.text, span=sp)


def parse_program(text: str) -> Program:
    """Parse a .bl program file."""
    return Parser(text).parse_program()


def parse_type(text: str) -> RType:
    return Parser(text).parse_rtype()


def parse_schema(text: str) -> Schema:
    return Parser(text).parse_schema()


def parse_term(text: str) -> CoreTerm:
    return Parser(text).parse_term()


def parse_pred(text: str) -> Pred:
    return Parser(text).parse_pred(wildcards=False)


def parse_refinement(text: str, rvars: Optional[set[str]] = None) -> Refinement:
    return Parser(text).parse_pred_or_reft(rvars)


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_PREC = {"<=>": 1, "=>": 2, "or": 3, "and": 4, "=": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5, "+": 6, "-": 6, "*": 7}
_SHOW = {"=": "=", "!=": "/=", "and": "&&", "or": "||", "=>": "=>", "<=>": "<=>"}


def pp_pred(p: Pred, prec: int = 0) -> str:
    match p:
        case PVar(n):
            return "*" if n.startswith("$star") else n
        case PInt(v):
            return str(v)
        case PBool(v):
            return "true" if v else "false"
        case PBin(op, l, r):
            mine = _PREC[op]
            s = f"{pp_pred(l, mine + 1)} {_SHOW.get(op, op)} {pp_pred(r, mine if op in ('=>', '<=>') else mine + 1)}"
            return f"({s})" if mine < prec else s
        case PNot(a):
            return f"not {pp_pred(a, 8)}"
        case PIte(c, t, e):
            s = f"if {pp_pred(c)} then {pp_pred(t)} else {pp_pred(e)}"
            return f"({s})" if prec > 0 else s
        case PApp(f, args):
            s = f + "".join(" " + pp_pred(a, 8) for a in args)
            return f"({s})" if prec >= 8 else s
    raise TypeError(p)


def pp_refinement(r: Refinement, prec: int = 0) -> str:
    match r:
        case RConc(p):
            return pp_pred(p, prec)
        case RVarApp(n, args):
            s = n + "".join(" " + pp_pred(a, 8) for a in args)
            return f"({s})" if prec >= 8 else s
        case RKappa(n, args):
            s = n + "".join(" " + pp_pred(a, 8) for a in args)
            return f"({s})" if prec >= 8 else s
        case RAnd(l, rr):
            s = f"{pp_refinement(l, 5)} && {pp_refinement(rr, 4)}"
            return f"({s})" if prec > 4 else s
        case RImp(l, rr):
            s = f"{pp_refinement(l, 3)} => {pp_refinement(rr, 2)}"
            return f"({s})" if prec > 2 else s
    raise TypeError(r)


def pp_type(t: RType, prec: int = 0) -> str:
    match t:
        case TBase(b, v, r):
            if is_trivially_true(r):
                return str(b)
            return f"{{{v}:{b} | {pp_refinement(r)}}}"
        case TFun(x, d, c, _):
            ds = pp_type(d, 1)
            s = f"{x}:{ds} -> {pp_type(c)}" if not x.startswith("$x") else f"{ds} -> {pp_type(c)}"
            return f"({s})" if prec > 0 else s
    raise TypeError(t)


def pp_schema(s: Schema) -> str:
    tyvars: list[str] = []
    rvars: list[tuple[str, RType]] = []
    bounds: list[Bound] = []
    while True:
        match s:
            case SAll(a, b):
                tyvars.append(a)
                s = b
            case SPAll(p, pt, b):
                rvars.append((p, pt))
                s = b
            case SBound(bd, b):
                bounds.append(bd)
                s = b
            case SMono(t):
                out = ""
                if tyvars:
                    out += "forall " + " ".join(tyvars) + ". "
                if rvars:
                    out += "forall <" + ", ".join(f"{p} :: {pp_type(pt)}" for p, pt in rvars) + ">. "
                for bd in bounds:
                    args = " ".join(bd.rvars)
                    out += f"({bd.name} {args}) => " if args else f"({bd.name}) => "
                return out + pp_type(t)
            case _:
                raise TypeError(s)


def pp_term(e: CoreTerm, prec: int = 0) -> str:
    match e:
        case Var(n):
            return n
        case Const(v):
            if isinstance(v, bool):
                return "true" if v else "false"
            return str(v)
        case Lam(_, _, _):
            binders = []
            while isinstance(e, Lam):
                if e.binder_ty is not None:
                    binders.append(f"({e.binder}:{pp_type(e.binder_ty)})")
                else:
                    binders.append(e.binder)
                e = e.body
            s = "\\" + " ".join(binders) + " -> " + pp_term(e)
            return f"({s})" if prec > 0 else s
        case App(f, a):
            s = f"{pp_term(f, 1)} {pp_term(a, 2)}"
            return f"({s})" if prec > 1 else s
        case Let(x, bound, body, annot, rec):
            kw = "letrec" if rec else "let"
            ann = f" :: {pp_schema(annot)}" if annot is not None else ""
            s = f"{kw} {x}{ann} = {pp_term(bound)} in {pp_term(body)}"
            return f"({s})" if prec > 0 else s
        case TLam(a, body):
            s = f"/\\{a} -> {pp_term(body)}"
            return f"({s})" if prec > 0 else s
        case TApp(t, ty):
            s = f"{pp_term(t, 1)} [{pp_type(ty)}]"
            return f"({s})" if prec > 1 else s
        case PLam(p, pt, body):
            s = f"/\\<{p} :: {pp_type(pt)}> -> {pp_term(body)}"
            return f"({s})" if prec > 0 else s
        case PAppT(t, phi):
            ps = " ".join(n for n, _ in phi.params)
            s = f"{pp_term(t, 1)} [\\{ps} -> {pp_refinement(phi.body)}]"
            return f"({s})" if prec > 1 else s
        case CAbs(bd, body):
            s = f"[{bd.name}] => {pp_term(body)}"
            return f"({s})" if prec > 0 else s
        case CApp(t, bd):
            s = f"{pp_term(t, 1)} {{{bd.name}}}"
            return f"({s})" if prec > 1 else s
    raise TypeError(e)


def pp_qualifier(q: Qualifier) -> str:
    params = [f"{q.vvar}:{q.vsort}"] + [f"*:{s}" for s in q.wildcard_sorts]
    return f"qualif {q.name}({', '.join(params)}): {pp_pred(q.body)}"


def pp_bound_decl(b: BoundDecl) -> str:
    if any(s is not None for s in b.rvar_sorts):
        formals = ", ".join(
            f"{f} :: {pp_type(s)}" if s is not None else f
            for f, s in zip(b.rvar_formals, b.rvar_sorts)
        )
        head = f"bound {b.name} ({formals})"
    else:
        head = f"bound {b.name} " + " ".join(b.rvar_formals)
    return f"{head} = \\{' '.join(b.params)} -> {pp_refinement(b.body)}"


def pp_program(p: Program) -> str:
    lines: list[str] = []
    for q in p.qualifiers:
        lines.append(pp_qualifier(q))
    for nm, args, res in p.uninterp_funs:
        sig = " -> ".join(str(a) for a in args + (res,))
        lines.append(f"uninterp {nm} :: {sig}")
    for b in p.bounds:
        lines.append(pp_bound_decl(b))
    for nm, sch in p.assumes:
        lines.append(f"assume {nm} :: {pp_schema(sch)}")
    for d in p.defs:
        if d.annot is not None:
            lines.append(f"val {d.name} :: {pp_schema(d.annot)}")
        kw = "letrec" if d.recursive else "let"
        lines.append(f"{kw} {d.name} = {pp_term(d.term)}")
    return "\n".join(lines) + ("\n" if lines else "")


def pretty_print(x) -> str:
    """Print a Program, CoreTerm, Schema, RType or Refinement back to surface syntax."""
    match x:
        case Program():
            return pp_program(x)
        case CoreTerm():
            return pp_term(x)
        case Schema():
            return pp_schema(x)
        case RType():
            return pp_type(x)
        case Refinement():
            return pp_refinement(x)
    raise TypeError(x)
