"""Shared automaton data structures: alphabets, positive Boolean formulas,
APA / NBA / DPA containers, lasso words and the debug dump format.

Acceptance is min-even parity everywhere: a run (or run-tree branch) is
accepting iff the least color seen infinitely often is even.  Buchi
conditions are encoded as colors {0, 1} with 0 accepting.

Transition tables are indexed by *letter class* rather than by letter.
``letter_class[i]`` maps letter index ``i`` to a class; all letters of a
class behave identically in every state, which keeps tables small when an
alphabet is much larger than the set of distinguishable labellings.
"""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import AlphabetError

__all__ = [
    "Alphabet", "LassoWord", "PosBool", "TRUE", "FALSE", "ref", "pb_and", "pb_or",
    "pb_and_all", "pb_or_all", "Apa", "Nba", "Dpa", "dump_automaton", "classes_from_keys",
]


# ------------------------------------------------------------------ alphabet


@dataclass(frozen=True)
class Alphabet:
    """An explicitly enumerated finite alphabet.

    Letters over path variables are tuples of state indices, one per entry
    of ``vars``.  Plain alphabets (``vars is None``) hold arbitrary
    hashable letters.
    """

    letters: tuple
    vars: tuple | None = None
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(self.letters)})
        if len(self._index) != len(self.letters):
            raise AlphabetError("duplicate letters in alphabet")

    @classmethod
    def assignments(cls, vars: Sequence[str], num_states: int) -> "Alphabet":
        """All maps ``vars -> {0..num_states-1}`` as tuples in ``vars`` order."""
        vars = tuple(vars)
        letters = tuple(itertools.product(range(num_states), repeat=len(vars)))
        return cls(letters, vars)

    @classmethod
    def plain(cls, symbols: Iterable) -> "Alphabet":
        return cls(tuple(symbols), None)

    def __len__(self) -> int:
        return len(self.letters)

    def index(self, letter) -> int:
        try:
            return self._index[letter]
        except (KeyError, TypeError):
            raise AlphabetError(f"letter {letter!r} is not in the alphabet") from None

    def __contains__(self, letter) -> bool:
        try:
            return letter in self._index
        except TypeError:
            return False


@dataclass(frozen=True)
class LassoWord:
    """The ultimately periodic word ``prefix . cycle^omega``."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise AlphabetError("lasso cycle must be nonempty")

    def __len__(self) -> int:
        return len(self.prefix) + len(self.cycle)

    def letter(self, i: int):
        """Letter at absolute position ``i`` of the infinite word."""
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def next_pos(self, i: int) -> int:
        """Successor of a collapsed position in ``range(len(self))``."""
        return i + 1 if i + 1 < len(self) else len(self.prefix)

    def check(self, alphabet: Alphabet) -> None:
        for l in self.prefix + self.cycle:
            if l not in alphabet:
                raise AlphabetError(f"letter {l!r} is not in the alphabet")


# ---------------------------------------------------------- positive Boolean


class PosBool:
    """Hash-consed positive Boolean formula over automaton states.

    Instances are interned, so structural equality is object identity.
    ``op`` is one of ``"true"``, ``"false"``, ``"ref"``, ``"and"``, ``"or"``.
    """

    __slots__ = ("op", "state", "children", "uid", "_models", "__weakref__")

    def __repr__(self) -> str:
        return self.to_prefix()

    def to_prefix(self, names=None) -> str:
        if self.op == "true":
            return "t"
        if self.op == "false":
            return "f"
        if self.op == "ref":
            return str(self.state if names is None else names[self.state])
        sym = "&" if self.op == "and" else "|"
        return "(" + sym + " " + " ".join(c.to_prefix(names) for c in self.children) + ")"

    def states(self) -> set:
        out = set()
        stack = [self]
        while stack:
            f = stack.pop()
            if f.op == "ref":
                out.add(f.state)
            else:
                stack.extend(f.children)
        return out

    def satisfied_by(self, chosen) -> bool:
        """``chosen |= self`` for a set of states."""
        if self.op == "true":
            return True
        if self.op == "false":
            return False
        if self.op == "ref":
            return self.state in chosen
        if self.op == "and":
            return all(c.satisfied_by(chosen) for c in self.children)
        return any(c.satisfied_by(chosen) for c in self.children)

    def models(self) -> tuple:
        """Minimal satisfying state sets, as a tuple of frozensets (memoized)."""
        cached = self._models
        if cached is not None:
            return cached
        if self.op == "true":
            res = (frozenset(),)
        elif self.op == "false":
            res = ()
        elif self.op == "ref":
            res = (frozenset((self.state,)),)
        elif self.op == "or":
            res = _minimize(m for c in self.children for m in c.models())
        else:
            acc = [frozenset()]
            for c in self.children:
                cm = c.models()
                acc = _minimize(a | b for a in acc for b in cm)
                if not acc:
                    break
            res = tuple(acc)
        self._models = tuple(sorted(res, key=lambda m: (len(m), sorted(m))))
        return self._models

    def substitute(self, fn, cache=None) -> "PosBool":
        """Replace every ``ref(q)`` by ``fn(q)`` (a PosBool)."""
        if cache is None:
            cache = {}
        hit = cache.get(self.uid)
        if hit is not None:
            return hit
        if self.op == "ref":
            out = fn(self.state)
        elif self.op in ("true", "false"):
            out = self
        elif self.op == "and":
            out = pb_and_all(c.substitute(fn, cache) for c in self.children)
        else:
            out = pb_or_all(c.substitute(fn, cache) for c in self.children)
        cache[self.uid] = out
        return out

    def dual(self, cache=None) -> "PosBool":
        """Swap and/or and true/false."""
        if self.op == "true":
            return FALSE
        if self.op == "false":
            return TRUE
        if self.op == "ref":
            return self
        if cache is None:
            cache = {}
        hit = cache.get(self.uid)
        if hit is not None:
            return hit
        kids = [c.dual(cache) for c in self.children]
        out = pb_or_all(kids) if self.op == "and" else pb_and_all(kids)
        cache[self.uid] = out
        return out


def _minimize(sets) -> list:
    uniq = sorted(set(sets), key=len)
    out: list = []
    for s in uniq:
        if not any(m <= s for m in out):
            out.append(s)
    return out


_INTERN: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
_COUNTER = itertools.count()


def _make(op: str, state=None, children: tuple = ()) -> PosBool:
    key = (op, state, tuple(c.uid for c in children))
    node = _INTERN.get(key)
    if node is None:
        node = PosBool()
        node.op = op
        node.state = state
        node.children = children
        node.uid = next(_COUNTER)
        node._models = None
        _INTERN[key] = node
    return node


TRUE = _make("true")
FALSE = _make("false")


def ref(q) -> PosBool:
    return _make("ref", q)


def _junction(op: str, parts: Iterable[PosBool]) -> PosBool:
    unit, zero = (TRUE, FALSE) if op == "and" else (FALSE, TRUE)
    seen = {}
    for p in parts:
        if p is zero:
            return zero
        if p is unit:
            continue
        if p.op == op:
            for c in p.children:
                seen[c.uid] = c
        else:
            seen[p.uid] = p
    if not seen:
        return unit
    if len(seen) == 1:
        return next(iter(seen.values()))
    kids = tuple(seen[k] for k in sorted(seen))
    return _make(op, None, kids)


def pb_and_all(parts: Iterable[PosBool]) -> PosBool:
    return _junction("and", parts)


def pb_or_all(parts: Iterable[PosBool]) -> PosBool:
    return _junction("or", parts)


def pb_and(*parts: PosBool) -> PosBool:
    return _junction("and", parts)


def pb_or(*parts: PosBool) -> PosBool:
    return _junction("or", parts)


# ---------------------------------------------------------------- automata


def classes_from_keys(keys: Sequence) -> tuple[tuple, list]:
    """Group letters by a hashable key; returns (letter_class, representatives)."""
    mapping: dict = {}
    letter_class = []
    reps = []
    for i, k in enumerate(keys):
        c = mapping.get(k)
        if c is None:
            c = mapping[k] = len(reps)
            reps.append(i)
        letter_class.append(c)
    return tuple(letter_class), reps


@dataclass(frozen=True, eq=False)
class _Automaton:
    alphabet: Alphabet
    letter_class: tuple
    init: int
    delta: tuple

    @property
    def num_states(self) -> int:
        return len(self.delta)

    @property
    def num_classes(self) -> int:
        return 1 + max(self.letter_class) if self.letter_class else 0

    def class_of(self, letter) -> int:
        return self.letter_class[self.alphabet.index(letter)]

    def _validate(self):
        if len(self.letter_class) != len(self.alphabet):
            raise AlphabetError("letter_class must cover the alphabet")
        k = self.num_classes
        for row in self.delta:
            if len(row) != k:
                raise AlphabetError("transition rows must have one entry per letter class")
        if not 0 <= self.init < len(self.delta):
            raise AlphabetError("initial state out of range")


@dataclass(frozen=True, eq=False)
class Apa(_Automaton):
    """Alternating parity automaton; ``delta[q][c]`` is a PosBool."""

    colors: tuple = ()
    names: tuple | None = None

    def __post_init__(self):
        self._validate()
        if len(self.colors) != len(self.delta):
            raise AlphabetError("one color per state expected")

    def step(self, q: int, letter) -> PosBool:
        return self.delta[q][self.class_of(letter)]


@dataclass(frozen=True, eq=False)
class Nba(_Automaton):
    """Nondeterministic Buchi automaton; ``delta[q][c]`` is a frozenset of states."""

    accepting: frozenset = frozenset()
    names: tuple | None = None

    def __post_init__(self):
        self._validate()

    def step(self, q: int, letter) -> frozenset:
        return self.delta[q][self.class_of(letter)]

    def to_apa(self) -> Apa:
        """View as an alternating automaton with disjunctive transitions."""
        delta = tuple(tuple(pb_or_all(ref(p) for p in sorted(row)) for row in rows)
                      for rows in self.delta)
        colors = tuple(0 if q in self.accepting else 1 for q in range(self.num_states))
        return Apa(self.alphabet, self.letter_class, self.init, delta, colors, self.names)


@dataclass(frozen=True, eq=False)
class Dpa(_Automaton):
    """Deterministic parity automaton; ``delta[q][c]`` is a single state."""

    colors: tuple = ()
    names: tuple | None = None

    def __post_init__(self):
        self._validate()
        if len(self.colors) != len(self.delta):
            raise AlphabetError("one color per state expected")

    def step(self, q: int, letter) -> int:
        return self.delta[q][self.class_of(letter)]

    def to_apa(self) -> Apa:
        delta = tuple(tuple(ref(p) for p in row) for row in self.delta)
        return Apa(self.alphabet, self.letter_class, self.init, delta, self.colors, self.names)

    def complement(self) -> "Dpa":
        return Dpa(self.alphabet, self.letter_class, self.init, self.delta,
                   tuple(c + 1 for c in self.colors), self.names)


# --------------------------------------------------------------------- dump


def _letter_text(alphabet: Alphabet, letter) -> str:
    if alphabet.vars is None:
        return str(letter)
    return "[" + ",".join(f"{v}={s}" for v, s in zip(alphabet.vars, letter)) + "]"


def dump_automaton(aut, title: str = "") -> str:
    """Line-based text dump, stable across runs.

    Header lines give kind, alphabet and letter classes; then one block per
    state with its color (or acceptance flag) and one transition line per
    letter class in prefix notation.
    """
    kind = {Apa: "apa", Nba: "nba", Dpa: "dpa"}[type(aut)]
    lines = []
    if title:
        lines.append(f"# {title}")
    vars_ = "-" if aut.alphabet.vars is None else ",".join(aut.alphabet.vars) or "()"
    lines.append(f"kind {kind}")
    lines.append(f"vars {vars_}")
    lines.append(f"letters {len(aut.alphabet)} classes {aut.num_classes}")
    members: dict = {}
    for i, c in enumerate(aut.letter_class):
        members.setdefault(c, []).append(i)
    for c in range(aut.num_classes):
        shown = members[c]
        text = " ".join(_letter_text(aut.alphabet, aut.alphabet.letters[i]) for i in shown[:8])
        more = f" +{len(shown) - 8}" if len(shown) > 8 else ""
        lines.append(f"class {c}: {text}{more}")
    lines.append(f"states {aut.num_states} init {aut.init}")
    for q in range(aut.num_states):
        label = ""
        if aut.names is not None:
            label = f" name {aut.names[q]}"
        if kind == "nba":
            lines.append(f"state {q} acc {int(q in aut.accepting)}{label}")
        else:
            lines.append(f"state {q} color {aut.colors[q]}{label}")
        for c in range(aut.num_classes):
            t = aut.delta[q][c]
            if kind == "apa":
                body = t.to_prefix()
            elif kind == "nba":
                body = "{" + " ".join(str(p) for p in sorted(t)) + "}"
            else:
                body = str(t)
            lines.append(f"  {c} -> {body}")
    return "\n".join(lines) + "\n"
