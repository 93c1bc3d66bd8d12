"""SMT-LIB2 frontend for a QF_LRA subset.

Parses `declare-fun`/`declare-const`/`assert` scripts into a formula tree
whose leaves are normalized linear atoms.  Coefficients are kept as exact
`Fraction`s (decimals parse exactly), with float mirrors for the numeric
code.  `let` bindings are inlined during parsing; sharing is reintroduced
later at the circuit level.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import SmtParseError, UndeclaredSymbolError, UnsupportedConstructError


class Kind(enum.Enum):
    AND = "and"
    OR = "or"
    NOT = "not"
    IMPLIES = "=>"
    IFF = "iff"
    XOR = "xor"
    ITE = "ite"
    BOOL_VAR = "boolvar"
    ATOM = "atom"
    TRUE = "true"
    FALSE = "false"


class Relation(enum.Enum):
    LE = "<="
    LT = "<"
    EQ = "="


_ARITY = {
    Kind.NOT: (1, 1),
    Kind.IMPLIES: (2, 2),
    Kind.IFF: (2, 2),
    Kind.XOR: (2, 2),
    Kind.ITE: (3, 3),
    Kind.AND: (2, None),
    Kind.OR: (2, None),
}


@dataclass(frozen=True)
class LinearAtom:
    """A normalized linear constraint  sum(c_i * x_i)  REL  bound.

    `coeffs` maps variable index to an exact coefficient, sorted by index,
    with zero coefficients dropped; at least one entry is nonzero.  Only
    LE/LT/EQ survive normalization (GE/GT are sign-flipped away).
    """

    coeffs: tuple[tuple[int, Fraction], ...]
    bound: Fraction
    relation: Relation

    def coeff_floats(self) -> dict[int, float]:
        return {i: float(c) for i, c in self.coeffs}

    @property
    def bound_float(self) -> float:
        return float(self.bound)

    def negated_rows(self):
        raise NotImplementedError  # rows are built in polytope.build_polytope

    def evaluate(self, point) -> bool:
        s = sum(float(c) * point[i] for i, c in self.coeffs)
        if self.relation is Relation.LE:
            return s <= self.bound_float
        if self.relation is Relation.LT:
            return s < self.bound_float
        return s == self.bound_float


@dataclass(frozen=True)
class Formula:
    kind: Kind
    children: tuple["Formula", ...] = ()
    atom: Optional[LinearAtom] = None
    name: Optional[str] = None  # BoolVar only

    def __post_init__(self):
        if self.kind in _ARITY:
            lo, hi = _ARITY[self.kind]
            n = len(self.children)
            if n < lo or (hi is not None and n > hi):
                raise ValueError(f"{self.kind.value} with {n} children")
        if self.kind is Kind.ATOM and self.atom is None:
            raise ValueError("atom node without payload")
        if self.kind is Kind.BOOL_VAR and self.name is None:
            raise ValueError("boolvar node without name")


TRUE = Formula(Kind.TRUE)
FALSE = Formula(Kind.FALSE)


@dataclass
class ParsedFormula:
    formula: Formula
    real_vars: list[str] = field(default_factory=list)
    bool_vars: list[str] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.real_vars)


# ---------------------------------------------------------------------------
# tokenizer / reader

@dataclass
class _Token:
    text: str
    line: int
    col: int


_SYMBOL_EXTRA = set("~!@$%^&*_-+=<>.?/")


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield _Token(ch, line, col)
            i += 1
            col += 1
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SmtParseError("unterminated string", line, col)
            yield _Token(text[i : j + 1], line, col)
            col += j + 1 - i
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in ' \t\r\n();"':
                j += 1
            yield _Token(text[i:j], line, col)
            col += j - i
            i = j


def _read_sexprs(tokens: Iterable[_Token]):
    """Yield nested lists of tokens (one per top-level form)."""
    stack = []
    for tok in tokens:
        if tok.text == "(":
            stack.append(([], tok))
        elif tok.text == ")":
            if not stack:
                raise SmtParseError("unbalanced ')'", tok.line, tok.col)
            done, _ = stack.pop()
            if stack:
                stack[-1][0].append(done)
            else:
                yield done
        else:
            if stack:
                stack[-1][0].append(tok)
            else:
                yield tok
    if stack:
        _, tok = stack[-1]
        raise SmtParseError("unbalanced '('", tok.line, tok.col)


def _head(sexp):
    if isinstance(sexp, _Token):
        return sexp
    if not sexp:
        raise SmtParseError("empty list")
    h = sexp[0]
    if not isinstance(h, _Token):
        raise SmtParseError("expected operator symbol")
    return h


def _is_numeral(s: str) -> bool:
    if not s or not s[0].isdigit():
        return False
    parts = s.split(".")
    if len(parts) > 2:
        return False
    return all(p.isdigit() for p in parts) and parts[0] != ""


def _parse_number(s: str) -> Fraction:
    if "." in s:
        whole, frac = s.split(".")
        return Fraction(int(whole + frac), 10 ** len(frac))
    return Fraction(int(s))


# ---------------------------------------------------------------------------
# linear terms: (coeffs dict, constant)

_LinTerm = tuple[dict[int, Fraction], Fraction]

_BOOL_HEADS = {"and", "or", "not", "=>", "xor", "ite", "<", "<=", ">", ">=", "true", "false"}


class _Env:
    """Declared symbols plus active let bindings."""

    def __init__(self):
        self.real_index: dict[str, int] = {}
        self.real_vars: list[str] = []
        self.bool_vars: set[str] = set()
        self.lets: list[dict[str, tuple[str, object]]] = []

    def declare(self, name: str, sort: str, tok: _Token):
        if name in self.real_index or name in self.bool_vars:
            raise SmtParseError(f"symbol '{name}' redeclared", tok.line, tok.col)
        if sort == "Real":
            self.real_index[name] = len(self.real_vars)
            self.real_vars.append(name)
        elif sort == "Bool":
            self.bool_vars.add(name)
        else:
            raise UnsupportedConstructError(f"sort '{sort}'", tok.line, tok.col)

    def lookup_let(self, name: str):
        for frame in reversed(self.lets):
            if name in frame:
                return frame[name]
        return None


class _Parser:
    def __init__(self, text: str):
        self.env = _Env()
        self.asserts: list[Formula] = []
        self.logic_seen = False
        self.forms = list(_read_sexprs(_tokenize(text)))

    def run(self) -> ParsedFormula:
        for form in self.forms:
            self._command(form)
        if len(self.asserts) == 0:
            formula = TRUE
        elif len(self.asserts) == 1:
            formula = self.asserts[0]
        else:
            formula = Formula(Kind.AND, tuple(self.asserts))
        return ParsedFormula(formula, self.env.real_vars, sorted(self.env.bool_vars))

    def _command(self, form):
        if isinstance(form, _Token):
            raise SmtParseError(f"stray token '{form.text}'", form.line, form.col)
        head = _head(form)
        cmd = head.text
        if cmd == "set-logic":
            if len(form) != 2 or not isinstance(form[1], _Token):
                raise SmtParseError("malformed set-logic", head.line, head.col)
            if form[1].text != "QF_LRA":
                raise UnsupportedConstructError(
                    f"logic '{form[1].text}'", form[1].line, form[1].col)
            self.logic_seen = True
        elif cmd == "set-info":
            pass
        elif cmd == "declare-fun":
            if len(form) != 4 or not isinstance(form[1], _Token) or form[2] != []:
                raise SmtParseError("malformed declare-fun (only 0-ary supported)",
                                    head.line, head.col)
            sort = form[3]
            if not isinstance(sort, _Token):
                raise UnsupportedConstructError("compound sort", head.line, head.col)
            self.env.declare(form[1].text, sort.text, form[1])
        elif cmd == "declare-const":
            if len(form) != 3 or not isinstance(form[1], _Token) or not isinstance(form[2], _Token):
                raise SmtParseError("malformed declare-const", head.line, head.col)
            self.env.declare(form[1].text, form[2].text, form[1])
        elif cmd == "assert":
            if len(form) != 2:
                raise SmtParseError("malformed assert", head.line, head.col)
            self.asserts.append(self._formula(form[1]))
        elif cmd in ("check-sat", "exit"):
            pass
        else:
            raise UnsupportedConstructError(f"command '{cmd}'", head.line, head.col)

    # -- boolean-sorted terms ---------------------------------------------

    def _formula(self, sexp) -> Formula:
        if isinstance(sexp, _Token):
            s = sexp.text
            if s == "true":
                return TRUE
            if s == "false":
                return FALSE
            bound = self.env.lookup_let(s)
            if bound is not None:
                sort, value = bound
                if sort != "bool":
                    raise SmtParseError(f"'{s}' is Real-sorted, Bool expected",
                                        sexp.line, sexp.col)
                return value
            if s in self.env.bool_vars:
                return Formula(Kind.BOOL_VAR, name=s)
            if s in self.env.real_index:
                raise SmtParseError(f"'{s}' is Real-sorted, Bool expected",
                                    sexp.line, sexp.col)
            raise UndeclaredSymbolError(f"symbol '{s}'", sexp.line, sexp.col)

        head = _head(sexp)
        op = head.text
        args = sexp[1:]
        if op == "let":
            return self._let(sexp, "bool")
        if op in ("and", "or"):
            kids = [self._formula(a) for a in args]
            if len(kids) == 0:
                return TRUE if op == "and" else FALSE
            if len(kids) == 1:
                return kids[0]
            kind = Kind.AND if op == "and" else Kind.OR
            return Formula(kind, tuple(kids))
        if op == "not":
            if len(args) != 1:
                raise SmtParseError("'not' takes one argument", head.line, head.col)
            return Formula(Kind.NOT, (self._formula(args[0]),))
        if op == "=>":
            if len(args) != 2:
                raise UnsupportedConstructError("n-ary '=>'", head.line, head.col)
            return Formula(Kind.IMPLIES, (self._formula(args[0]), self._formula(args[1])))
        if op == "xor":
            if len(args) != 2:
                raise UnsupportedConstructError("n-ary 'xor'", head.line, head.col)
            return Formula(Kind.XOR, (self._formula(args[0]), self._formula(args[1])))
        if op == "ite":
            if len(args) != 3:
                raise SmtParseError("'ite' takes three arguments", head.line, head.col)
            c = self._formula(args[0])
            t = self._formula(args[1])  # Real-sorted ite is rejected here
            e = self._formula(args[2])
            return Formula(Kind.ITE, (c, t, e))
        if op in ("<", "<=", ">", ">="):
            if len(args) != 2:
                raise UnsupportedConstructError(f"chained '{op}'", head.line, head.col)
            lhs = self._linear(args[0])
            rhs = self._linear(args[1])
            return self._atom(op, lhs, rhs)
        if op == "=":
            if len(args) != 2:
                raise UnsupportedConstructError("n-ary '='", head.line, head.col)
            if self._is_bool_term(args[0]):
                return Formula(Kind.IFF, (self._formula(args[0]), self._formula(args[1])))
            lhs = self._linear(args[0])
            rhs = self._linear(args[1])
            return self._atom("=", lhs, rhs)
        raise UnsupportedConstructError(f"operator '{op}'", head.line, head.col)

    def _is_bool_term(self, sexp) -> bool:
        if isinstance(sexp, _Token):
            s = sexp.text
            if s in ("true", "false"):
                return True
            bound = self.env.lookup_let(s)
            if bound is not None:
                return bound[0] == "bool"
            return s in self.env.bool_vars
        return _head(sexp).text in _BOOL_HEADS or (
            _head(sexp).text == "=" and self._is_bool_term(sexp[1]))

    def _let(self, sexp, want: str):
        head = _head(sexp)
        if len(sexp) != 3 or isinstance(sexp[1], _Token):
            raise SmtParseError("malformed let", head.line, head.col)
        frame = {}
        for binding in sexp[1]:
            if isinstance(binding, _Token) or len(binding) != 2 or not isinstance(binding[0], _Token):
                raise SmtParseError("malformed let binding", head.line, head.col)
            name = binding[0].text
            if self._is_bool_term(binding[1]):
                frame[name] = ("bool", self._formula(binding[1]))
            else:
                frame[name] = ("real", self._linear(binding[1]))
        self.env.lets.append(frame)
        try:
            if want == "bool":
                return self._formula(sexp[2])
            return self._linear(sexp[2])
        finally:
            self.env.lets.pop()

    def _atom(self, op: str, lhs: _LinTerm, rhs: _LinTerm) -> Formula:
        coeffs = dict(lhs[0])
        for i, c in rhs[0].items():
            coeffs[i] = coeffs.get(i, Fraction(0)) + (-c)
        const = lhs[1] - rhs[1]
        return normalize_atom(op, coeffs, -const)

    # -- real-sorted (linear) terms ---------------------------------------

    def _linear(self, sexp) -> _LinTerm:
        if isinstance(sexp, _Token):
            s = sexp.text
            if _is_numeral(s):
                return {}, _parse_number(s)
            bound = self.env.lookup_let(s)
            if bound is not None:
                sort, value = bound
                if sort != "real":
                    raise SmtParseError(f"'{s}' is Bool-sorted, Real expected",
                                        sexp.line, sexp.col)
                return {k: v for k, v in value[0].items()}, value[1]
            if s in self.env.real_index:
                return {self.env.real_index[s]: Fraction(1)}, Fraction(0)
            if s in self.env.bool_vars:
                raise SmtParseError(f"'{s}' is Bool-sorted, Real expected",
                                    sexp.line, sexp.col)
            raise UndeclaredSymbolError(f"symbol '{s}'", sexp.line, sexp.col)

        head = _head(sexp)
        op = head.text
        args = sexp[1:]
        if op == "let":
            return self._let(sexp, "real")
        if op == "+":
            coeffs: dict[int, Fraction] = {}
            const = Fraction(0)
            for a in args:
                c, k = self._linear(a)
                const += k
                for i, v in c.items():
                    coeffs[i] = coeffs.get(i, Fraction(0)) + v
            return coeffs, const
        if op == "-":
            if len(args) == 0:
                raise SmtParseError("'-' needs arguments", head.line, head.col)
            first = self._linear(args[0])
            if len(args) == 1:
                return {i: -v for i, v in first[0].items()}, -first[1]
            coeffs = dict(first[0])
            const = first[1]
            for a in args[1:]:
                c, k = self._linear(a)
                const -= k
                for i, v in c.items():
                    coeffs[i] = coeffs.get(i, Fraction(0)) - v
            return coeffs, const
        if op == "*":
            if len(args) < 2:
                raise SmtParseError("'*' needs two arguments", head.line, head.col)
            terms = [self._linear(a) for a in args]
            nonconst = [t for t in terms if t[0]]
            if len(nonconst) > 1:
                raise UnsupportedConstructError(
                    "nonlinear multiplication of two variables", head.line, head.col)
            factor = Fraction(1)
            for t in terms:
                if not t[0]:
                    factor *= t[1]
            if not nonconst:
                return {}, factor
            coeffs, const = nonconst[0]
            return {i: v * factor for i, v in coeffs.items()}, const * factor
        if op == "/":
            if len(args) != 2:
                raise UnsupportedConstructError("n-ary '/'", head.line, head.col)
            num = self._linear(args[0])
            den = self._linear(args[1])
            if den[0]:
                raise UnsupportedConstructError(
                    "division by a non-constant", head.line, head.col)
            if den[1] == 0:
                raise SmtParseError("division by zero", head.line, head.col)
            d = den[1]
            return {i: v / d for i, v in num[0].items()}, num[1] / d
        raise UnsupportedConstructError(f"real operator '{op}'", head.line, head.col)


def normalize_atom(op: str, coeffs: dict[int, Fraction], bound: Fraction) -> Formula:
    """Fold a raw comparison `sum(coeffs) op bound` into an Atom node.

    GE/GT flip signs; EQ gets a canonical sign (lowest-index coefficient
    positive); all-zero coefficient vectors fold to a Boolean constant.
    """
    items = tuple(sorted((i, c) for i, c in coeffs.items() if c != 0))
    if not items:
        zero = Fraction(0)
        holds = {"<": zero < bound, "<=": zero <= bound, ">": zero > bound,
                 ">=": zero >= bound, "=": zero == bound}[op]
        return TRUE if holds else FALSE
    if op in (">", ">="):
        items = tuple((i, -c) for i, c in items)
        bound = -bound
        rel = Relation.LT if op == ">" else Relation.LE
    elif op == "<":
        rel = Relation.LT
    elif op == "<=":
        rel = Relation.LE
    else:
        rel = Relation.EQ
        if items[0][1] < 0:
            items = tuple((i, -c) for i, c in items)
            bound = -bound
    return Formula(Kind.ATOM, atom=LinearAtom(items, bound, rel))


def parse_smt2(text: str) -> ParsedFormula:
    """Parse an SMT-LIB2 script; returns the conjunction of all asserts."""
    return _Parser(text).run()


# ---------------------------------------------------------------------------
# printing and evaluation

def _fmt_fraction(q: Fraction) -> str:
    if q < 0:
        return f"(- {_fmt_fraction(-q)})"
    if q.denominator == 1:
        return str(q.numerator)
    # prefer a terminating decimal when the denominator is 2^a * 5^b
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        digits = max(twos, fives)
        scaled = q.numerator * 10**digits // q.denominator
        s = str(scaled).rjust(digits + 1, "0")
        return f"{s[:-digits]}.{s[-digits:]}"
    return f"(/ {q.numerator} {q.denominator})"


def _fmt_term(atom: LinearAtom, names: list[str]) -> str:
    parts = []
    for i, c in atom.coeffs:
        if c == 1:
            parts.append(names[i])
        else:
            parts.append(f"(* {_fmt_fraction(c)} {names[i]})")
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def format_formula(f: Formula, names: list[str]) -> str:
    k = f.kind
    if k is Kind.TRUE:
        return "true"
    if k is Kind.FALSE:
        return "false"
    if k is Kind.BOOL_VAR:
        return f.name
    if k is Kind.ATOM:
        op = f.atom.relation.value
        return f"({op} {_fmt_term(f.atom, names)} {_fmt_fraction(f.atom.bound)})"
    op = {Kind.AND: "and", Kind.OR: "or", Kind.NOT: "not", Kind.IMPLIES: "=>",
          Kind.IFF: "=", Kind.XOR: "xor", Kind.ITE: "ite"}[k]
    return "(" + op + " " + " ".join(format_formula(c, names) for c in f.children) + ")"


def print_smt2(parsed: ParsedFormula) -> str:
    """Render back to a parseable script (round-trip stable)."""
    lines = ["(set-logic QF_LRA)"]
    for v in parsed.real_vars:
        lines.append(f"(declare-fun {v} () Real)")
    for v in parsed.bool_vars:
        lines.append(f"(declare-fun {v} () Bool)")
    lines.append(f"(assert {format_formula(parsed.formula, parsed.real_vars)})")
    lines.append("(check-sat)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def eval_formula(f: Formula, point, bool_env: Optional[dict[str, bool]] = None) -> bool:
    """Evaluate at a real point (indexed by variable) and Boolean environment."""
    k = f.kind
    if k is Kind.TRUE:
        return True
    if k is Kind.FALSE:
        return False
    if k is Kind.ATOM:
        return f.atom.evaluate(point)
    if k is Kind.BOOL_VAR:
        if bool_env is None or f.name not in bool_env:
            raise KeyError(f"no value for Boolean variable '{f.name}'")
        return bool_env[f.name]
    if k is Kind.AND:
        return all(eval_formula(c, point, bool_env) for c in f.children)
    if k is Kind.OR:
        return any(eval_formula(c, point, bool_env) for c in f.children)
    if k is Kind.NOT:
        return not eval_formula(f.children[0], point, bool_env)
    if k is Kind.IMPLIES:
        return (not eval_formula(f.children[0], point, bool_env)) or \
            eval_formula(f.children[1], point, bool_env)
    if k is Kind.IFF:
        return eval_formula(f.children[0], point, bool_env) == \
            eval_formula(f.children[1], point, bool_env)
    if k is Kind.XOR:
        return eval_formula(f.children[0], point, bool_env) != \
            eval_formula(f.children[1], point, bool_env)
    if k is Kind.ITE:
        if eval_formula(f.children[0], point, bool_env):
            return eval_formula(f.children[1], point, bool_env)
        return eval_formula(f.children[2], point, bool_env)
    raise AssertionError(k)
