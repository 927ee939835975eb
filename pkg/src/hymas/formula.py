"""Abstract syntax, parser and syntactic transformations for HyperATL*_S.

Path formulas are built from indexed atoms ``a[pi]``, nested closed state
formulas ``{phi}[pi]``, Boolean connectives and the temporal operators
X, U and R (F and G are desugared while parsing).  State formulas are a
prefix of strategic quantifiers over a path-formula leaf.

The concrete syntax is documented in ``docs/grammar.md``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FormulaError

__all__ = [
    "QKind", "Atom", "Nested", "Top", "Bottom", "Not", "And", "Or", "Implies",
    "Iff", "Next", "Until", "Release", "Quant", "Leaf", "Prop", "AtlQuant",
    "TOP", "BOTTOM", "DOT_PI", "parse_state_formula", "parse_path_formula",
    "validate", "to_text", "to_nnf", "negate_path", "is_nnf", "rank",
    "atl_to_hyper", "atl_depth", "extract_nested_state_formulas",
    "substitute_nested", "quantifier_prefix", "x_depth", "conj", "disj",
    "eventually", "globally", "bounded_until", "bounded_eventually",
    "bounded_globally", "atoms", "sharing_pairs",
]


class QKind(enum.Enum):
    EXISTS = "exists"
    FORALL = "forall"

    def dual(self) -> "QKind":
        return QKind.FORALL if self is QKind.EXISTS else QKind.EXISTS


# ---------------------------------------------------------------- path AST


class PathFormula:
    """Marker base class for path-formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(PathFormula):
    ap: str
    var: str


@dataclass(frozen=True)
class Nested(PathFormula):
    body: "StateFormula"
    var: str


@dataclass(frozen=True)
class Top(PathFormula):
    pass


@dataclass(frozen=True)
class Bottom(PathFormula):
    pass


@dataclass(frozen=True)
class Not(PathFormula):
    operand: PathFormula


@dataclass(frozen=True)
class And(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Or(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Implies(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Iff(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Next(PathFormula):
    operand: PathFormula


@dataclass(frozen=True)
class Until(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Release(PathFormula):
    left: PathFormula
    right: PathFormula


TOP = Top()
BOTTOM = Bottom()

_BINARY = (And, Or, Implies, Iff, Until, Release)
_UNARY = (Not, Next)


# --------------------------------------------------------------- state AST


class StateFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Quant(StateFormula):
    """``<<A>>_xi pi. body`` (EXISTS) or ``[[A]]_xi pi. body`` (FORALL).

    ``sharing`` holds unordered agent pairs as sorted 2-tuples.
    """

    kind: QKind
    coalition: frozenset
    sharing: frozenset
    var: str
    body: StateFormula


@dataclass(frozen=True)
class Leaf(StateFormula):
    body: PathFormula


# ---------------------------------------------------------------- ATL* AST


@dataclass(frozen=True)
class Prop(PathFormula):
    """Unindexed atomic proposition of an ATL* path formula."""

    name: str


@dataclass(frozen=True)
class AtlQuant(PathFormula):
    """ATL* state formula; may also occur as a path subformula."""

    kind: QKind
    coalition: frozenset
    body: PathFormula


DOT_PI = "pi"


def sharing_pairs(pairs: Iterable[tuple[str, str]]) -> frozenset:
    """Normalize agent pairs to a frozenset of sorted tuples."""
    return frozenset(tuple(sorted((i, j))) for i, j in pairs)


# ------------------------------------------------------------------ helpers


def conj(parts: Iterable[PathFormula]) -> PathFormula:
    parts = list(parts)
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[PathFormula]) -> PathFormula:
    parts = list(parts)
    if not parts:
        return BOTTOM
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def eventually(psi: PathFormula) -> PathFormula:
    return Until(TOP, psi)


def globally(psi: PathFormula) -> PathFormula:
    return Release(BOTTOM, psi)


def bounded_until(left: PathFormula, right: PathFormula, k: int) -> PathFormula:
    """``left U right`` where ``right`` must occur within ``k`` steps, unrolled with X."""
    out = right
    for _ in range(k):
        out = Or(right, And(left, Next(out)))
    return out


def bounded_eventually(psi: PathFormula, k: int) -> PathFormula:
    out = psi
    for _ in range(k):
        out = Or(psi, Next(out))
    return out


def bounded_globally(psi: PathFormula, k: int) -> PathFormula:
    out = psi
    for _ in range(k):
        out = And(psi, Next(out))
    return out


def quantifier_prefix(phi: StateFormula) -> tuple[list[Quant], PathFormula]:
    """Split ``phi`` into its quantifier chain (outermost first) and leaf body."""
    quants = []
    while isinstance(phi, Quant):
        quants.append(phi)
        phi = phi.body
    return quants, phi.body


def x_depth(psi: PathFormula) -> int | None:
    """Number of letters the verdict of ``psi`` depends on, minus one.

    Returns None for formulas containing U or R, which are unbounded.
    Nested state formulas count as depth 0 at their own position.
    """
    if isinstance(psi, (Atom, Top, Bottom, Nested, Prop, AtlQuant)):
        return 0
    if isinstance(psi, Not):
        return x_depth(psi.operand)
    if isinstance(psi, Next):
        d = x_depth(psi.operand)
        return None if d is None else d + 1
    if isinstance(psi, (Until, Release)):
        return None
    dl, dr = x_depth(psi.left), x_depth(psi.right)
    if dl is None or dr is None:
        return None
    return max(dl, dr)


def atoms(psi: PathFormula) -> set[tuple[str, str]]:
    """All ``(ap, var)`` pairs occurring in ``psi`` outside nested formulas."""
    out = set()
    stack = [psi]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add((f.ap, f.var))
        elif isinstance(f, _UNARY):
            stack.append(f.operand)
        elif isinstance(f, _BINARY):
            stack.extend((f.left, f.right))
    return out


# ------------------------------------------------------------------ printer


def _agents_text(agents) -> str:
    return ",".join(sorted(agents))


def to_text(phi) -> str:
    """Render a state or path formula in the concrete syntax.

    The output is fully parenthesized and parses back to an equal AST.
    """
    if isinstance(phi, Quant):
        open_, close = ("<<", ">>") if phi.kind is QKind.EXISTS else ("[[", "]]")
        share = ""
        if phi.sharing:
            pairs = ",".join(f"{i}={j}" for i, j in sorted(phi.sharing))
            share = f" share {{{pairs}}}"
        return f"{open_}{_agents_text(phi.coalition)}{close}{share} {phi.var} . {to_text(phi.body)}"
    if isinstance(phi, Leaf):
        return to_text(phi.body)
    if isinstance(phi, Atom):
        return f"{phi.ap}[{phi.var}]"
    if isinstance(phi, Nested):
        return f"{{{to_text(phi.body)}}}[{phi.var}]"
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Not):
        return f"!{to_text(phi.operand)}"
    if isinstance(phi, Next):
        return f"X {to_text(phi.operand)}"
    ops = {And: "&", Or: "|", Implies: "->", Iff: "<->", Until: "U", Release: "R"}
    for cls, op in ops.items():
        if isinstance(phi, cls):
            return f"({to_text(phi.left)} {op} {to_text(phi.right)})"
    if isinstance(phi, Prop):
        return phi.name
    if isinstance(phi, AtlQuant):
        open_, close = ("<<", ">>") if phi.kind is QKind.EXISTS else ("[[", "]]")
        return f"{open_}{_agents_text(phi.coalition)}{close} {to_text(phi.body)}"
    raise TypeError(f"not a formula: {phi!r}")


# ------------------------------------------------------------------- parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><<|>>|\[\[|\]\]|<->|->|[!&|()\[\]{},=.])"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<bad>\S))"
)
_KEYWORDS = {"X", "U", "R", "F", "G", "true", "false", "share"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        if m.group("bad") is not None:
            raise FormulaError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        if m.group("op") is not None:
            tokens.append((m.group("op"), m.start("op")))
        else:
            tokens.append((m.group("id"), m.start("id")))
    if text[pos:].strip():
        raise FormulaError("unexpected trailing input", pos)
    tokens.append(("<eof>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, agents):
        self.tokens = _tokenize(text)
        self.i = 0
        self.agents = None if agents is None else frozenset(agents)
        self.bound: list[str] = []

    # token helpers
    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def accept(self, tok: str) -> bool:
        if self.peek() == tok:
            self.i += 1
            return True
        return False

    def expect(self, tok: str) -> None:
        if not self.accept(tok):
            raise FormulaError(f"expected {tok!r}, found {self.peek()!r}", self.pos())

    def ident(self, what: str) -> str:
        tok = self.peek()
        if tok in _KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
            raise FormulaError(f"expected {what}, found {tok!r}", self.pos())
        self.i += 1
        return tok

    # grammar
    def state(self) -> StateFormula:
        if self.peek() in ("<<", "[["):
            return self.quant()
        return Leaf(self.path())

    def quant(self) -> Quant:
        kind = QKind.EXISTS if self.take() == "<<" else QKind.FORALL
        close = ">>" if kind is QKind.EXISTS else "]]"
        coalition = []
        if not self.accept(close):
            while True:
                coalition.append(self._agent())
                if self.accept(close):
                    break
                self.expect(",")
        coalition = frozenset(coalition)
        pairs = []
        if self.peek() == "share":
            self.take()
            self.expect("{")
            if not self.accept("}"):
                while True:
                    ppos = self.pos()
                    i = self._agent()
                    self.expect("=")
                    j = self._agent()
                    if (i in coalition) != (j in coalition):
                        raise FormulaError(
                            f"sharing pair {i}={j} crosses the coalition boundary", ppos)
                    pairs.append((i, j))
                    if self.accept("}"):
                        break
                    self.expect(",")
        vpos = self.pos()
        var = self.ident("path variable")
        if var in self.bound:
            raise FormulaError(f"path variable {var!r} is already bound", vpos)
        self.expect(".")
        self.bound.append(var)
        body = self.state()
        self.bound.pop()
        return Quant(kind, coalition, sharing_pairs(pairs), var, body)

    def _agent(self) -> str:
        apos = self.pos()
        name = self.ident("agent")
        if self.agents is not None and name not in self.agents:
            raise FormulaError(f"unknown agent {name!r}", apos)
        return name

    def path(self) -> PathFormula:
        left = self.implication()
        while self.accept("<->"):
            left = Iff(left, self.implication())
        return left

    def implication(self) -> PathFormula:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> PathFormula:
        left = self.conjunction()
        while self.accept("|"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> PathFormula:
        left = self.temporal()
        while self.accept("&"):
            left = And(left, self.temporal())
        return left

    def temporal(self) -> PathFormula:
        left = self.unary()
        if self.accept("U"):
            return Until(left, self.temporal())
        if self.accept("R"):
            return Release(left, self.temporal())
        return left

    def unary(self) -> PathFormula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        if tok == "F":
            self.take()
            return eventually(self.unary())
        if tok == "G":
            self.take()
            return globally(self.unary())
        return self.primary()

    def primary(self) -> PathFormula:
        tok = self.peek()
        if tok == "true":
            self.take()
            return TOP
        if tok == "false":
            self.take()
            return BOTTOM
        if tok == "(":
            self.take()
            inner = self.path()
            self.expect(")")
            return inner
        if tok == "{":
            self.take()
            saved, self.bound = self.bound, []
            body = self.state()
            self.bound = saved
            self.expect("}")
            return Nested(body, self._index())
        if tok in ("<<", "[["):
            raise FormulaError("quantifiers inside path formulas must be wrapped as {...}[var]",
                               self.pos())
        ap = self.ident("atomic proposition")
        return Atom(ap, self._index())

    def _index(self) -> str:
        self.expect("[")
        vpos = self.pos()
        var = self.ident("path variable")
        if var not in self.bound:
            raise FormulaError(f"unbound path variable {var!r}", vpos)
        self.expect("]")
        return var


def parse_state_formula(text: str, agents: Iterable[str]) -> StateFormula:
    """Parse and validate a closed state formula over the given agent set."""
    agents = frozenset(agents)
    if not agents:
        raise FormulaError("agent set must be nonempty")
    p = _Parser(text, agents)
    phi = p.state()
    if p.peek() != "<eof>":
        raise FormulaError(f"unexpected token {p.peek()!r}", p.pos())
    validate(phi, agents)
    return phi


def parse_path_formula(text: str, variables: Iterable[str]) -> PathFormula:
    """Parse a path formula whose free path variables are ``variables``."""
    p = _Parser(text, None)
    p.bound = list(variables)
    psi = p.path()
    if p.peek() != "<eof>":
        raise FormulaError(f"unexpected token {p.peek()!r}", p.pos())
    return psi


# --------------------------------------------------------------- validation


def validate(phi: StateFormula, agents: Iterable[str], bound: Sequence[str] = ()) -> None:
    """Raise FormulaError unless ``phi`` is well scoped over ``agents``."""
    agents = frozenset(agents)
    bound = list(bound)
    while isinstance(phi, Quant):
        unknown = set(phi.coalition) - agents
        for i, j in phi.sharing:
            unknown |= {i, j} - agents
            if (i in phi.coalition) != (j in phi.coalition):
                raise FormulaError(f"sharing pair {i}={j} crosses the coalition boundary")
        if unknown:
            raise FormulaError(f"unknown agent(s) {sorted(unknown)}")
        if phi.var in bound:
            raise FormulaError(f"path variable {phi.var!r} is already bound")
        bound.append(phi.var)
        phi = phi.body
    if not isinstance(phi, Leaf):
        raise FormulaError(f"not a state formula: {phi!r}")
    _validate_path(phi.body, agents, frozenset(bound))


def _validate_path(psi: PathFormula, agents, bound) -> None:
    stack = [psi]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            if f.var not in bound:
                raise FormulaError(f"unbound path variable {f.var!r}")
        elif isinstance(f, Nested):
            if f.var not in bound:
                raise FormulaError(f"unbound path variable {f.var!r}")
            validate(f.body, agents)
        elif isinstance(f, _UNARY):
            stack.append(f.operand)
        elif isinstance(f, _BINARY):
            stack.extend((f.left, f.right))
        elif not isinstance(f, (Top, Bottom)):
            raise FormulaError(f"unexpected node in path formula: {f!r}")


# ---------------------------------------------------------------------- NNF


def to_nnf(psi: PathFormula) -> PathFormula:
    """Push negations down to atoms, eliminating ->, <-> and double negation."""
    return _nnf(psi, False)


def _nnf(f: PathFormula, neg: bool) -> PathFormula:
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Top):
        return BOTTOM if neg else TOP
    if isinstance(f, Bottom):
        return TOP if neg else BOTTOM
    if isinstance(f, Not):
        return _nnf(f.operand, not neg)
    if isinstance(f, Next):
        return Next(_nnf(f.operand, neg))
    if isinstance(f, And):
        cls = Or if neg else And
        return cls(_nnf(f.left, neg), _nnf(f.right, neg))
    if isinstance(f, Or):
        cls = And if neg else Or
        return cls(_nnf(f.left, neg), _nnf(f.right, neg))
    if isinstance(f, Implies):
        if neg:
            return And(_nnf(f.left, False), _nnf(f.right, True))
        return Or(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Iff):
        a, b = f.left, f.right
        if neg:
            return Or(And(_nnf(a, False), _nnf(b, True)), And(_nnf(a, True), _nnf(b, False)))
        return Or(And(_nnf(a, False), _nnf(b, False)), And(_nnf(a, True), _nnf(b, True)))
    if isinstance(f, Until):
        cls = Release if neg else Until
        return cls(_nnf(f.left, neg), _nnf(f.right, neg))
    if isinstance(f, Release):
        cls = Until if neg else Release
        return cls(_nnf(f.left, neg), _nnf(f.right, neg))
    if isinstance(f, Nested):
        raise FormulaError("nested state formula must be relabeled before NNF conversion")
    raise FormulaError(f"cannot convert {f!r} to negation normal form")


def negate_path(psi: PathFormula) -> PathFormula:
    return to_nnf(Not(psi))


def is_nnf(psi: PathFormula) -> bool:
    stack = [psi]
    while stack:
        f = stack.pop()
        if isinstance(f, Not):
            if not isinstance(f.operand, Atom):
                return False
        elif isinstance(f, (Implies, Iff, Nested)):
            return False
        elif isinstance(f, Next):
            stack.append(f.operand)
        elif isinstance(f, _BINARY):
            stack.extend((f.left, f.right))
    return True


# --------------------------------------------------------------------- rank


def rank(phi) -> int:
    """Nesting rank: quantifiers along the longest chain of nested formulas."""
    if isinstance(phi, Quant):
        return rank(phi.body) + 1
    if isinstance(phi, Leaf):
        return rank(phi.body)
    if isinstance(phi, Nested):
        return rank(phi.body)
    if isinstance(phi, _UNARY):
        return rank(phi.operand)
    if isinstance(phi, _BINARY):
        return max(rank(phi.left), rank(phi.right))
    return 0


# ------------------------------------------------------------ ATL* embedding


def atl_to_hyper(phi: AtlQuant, var: str = DOT_PI) -> StateFormula:
    """Translate an ATL* state formula into an equivalent HyperATL*_S formula.

    Every implicit path is bound to the single variable ``var`` with an
    empty sharing constraint.
    """
    if not isinstance(phi, AtlQuant):
        raise FormulaError("ATL* state formulas start with a strategy quantifier")
    return Quant(phi.kind, frozenset(phi.coalition), frozenset(), var,
                 Leaf(_atl_path(phi.body, var)))


def _atl_path(f: PathFormula, var: str) -> PathFormula:
    if isinstance(f, Prop):
        return Atom(f.name, var)
    if isinstance(f, AtlQuant):
        return Nested(atl_to_hyper(f, var), var)
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, _UNARY):
        return type(f)(_atl_path(f.operand, var))
    if isinstance(f, _BINARY):
        return type(f)(_atl_path(f.left, var), _atl_path(f.right, var))
    raise FormulaError(f"not an ATL* path formula: {f!r}")


def atl_depth(f: PathFormula) -> int:
    """Quantifier-nesting depth of an ATL* formula."""
    if isinstance(f, AtlQuant):
        return atl_depth(f.body) + 1
    if isinstance(f, _UNARY):
        return atl_depth(f.operand)
    if isinstance(f, _BINARY):
        return max(atl_depth(f.left), atl_depth(f.right))
    return 0


# ------------------------------------------------- nested state formulas


def extract_nested_state_formulas(psi: PathFormula) -> list[StateFormula]:
    """Nested state formulas of ``psi`` at every depth, innermost first, deduplicated."""
    out: list[StateFormula] = []
    seen: set = set()

    def visit(f: PathFormula) -> None:
        if isinstance(f, Nested):
            _, inner = quantifier_prefix(f.body)
            visit(inner)
            if f.body not in seen:
                seen.add(f.body)
                out.append(f.body)
        elif isinstance(f, _UNARY):
            visit(f.operand)
        elif isinstance(f, _BINARY):
            visit(f.left)
            visit(f.right)

    visit(psi)
    return out


def substitute_nested(psi: PathFormula, target: StateFormula, fresh: str) -> PathFormula:
    """Replace every ``{target}[v]`` in ``psi`` by the atom ``fresh[v]``."""
    if isinstance(psi, Nested):
        return Atom(fresh, psi.var) if psi.body == target else psi
    if isinstance(psi, _UNARY):
        inner = substitute_nested(psi.operand, target, fresh)
        return psi if inner is psi.operand else type(psi)(inner)
    if isinstance(psi, _BINARY):
        left = substitute_nested(psi.left, target, fresh)
        right = substitute_nested(psi.right, target, fresh)
        if left is psi.left and right is psi.right:
            return psi
        return type(psi)(left, right)
    return psi
