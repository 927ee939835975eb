"""Quantifier elimination: from a DPA for the body of a strategic quantifier
and a pinned CGS state, build an alternating automaton for the quantified
formula over the remaining path variables.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .automata.base import Alphabet, Apa, Dpa, classes_from_keys, pb_and_all, pb_or_all, ref
from .cgs import Cgs, strategic_successors
from .errors import AlphabetError, BudgetExceeded
from .formula import QKind

__all__ = ["ProductSpec", "build_product"]


@dataclass(frozen=True)
class ProductSpec:
    """One strategic quantifier ``<<A>>_xi var`` or ``[[A]]_xi var`` pinned at ``state``."""

    cgs: Cgs
    state: int
    kind: QKind
    coalition: frozenset
    sharing: frozenset
    var: str


def _minimal_sets(sets) -> list:
    ordered = sorted(set(sets), key=lambda s: (len(s), sorted(s)))
    out = []
    for s in ordered:
        if not any(t <= s for t in out):
            out.append(s)
    return out


def build_product(spec: ProductSpec, inner: Dpa, budget: int | None = None) -> Apa:
    """APA over the inner variables minus ``spec.var`` simulating the quantifier.

    States are pairs ``(q, s)`` of an inner DPA state and a CGS state,
    discovered from ``(init, spec.state)``; ``(q, s)`` has the color of
    ``q``.  Reading ``l``, the inner automaton moves on ``l[var -> s]`` and
    the CGS state moves by a joint action: for an existential quantifier
    the coalition picks its vector (disjunction) and the opponents reply
    (conjunction); a universal quantifier swaps the two connectives.
    """
    g = spec.cgs
    vars_in = inner.alphabet.vars
    if vars_in is None or spec.var not in vars_in:
        raise AlphabetError(f"inner automaton does not read path variable {spec.var!r}")
    if len(inner.alphabet) != g.num_states ** len(vars_in):
        raise AlphabetError("inner alphabet does not match the CGS state space")
    pi = vars_in.index(spec.var)
    vars_out = vars_in[:pi] + vars_in[pi + 1:]
    alphabet = Alphabet.assignments(vars_out, g.num_states)
    S = range(g.num_states)

    def inner_class(letter, s):
        return inner.letter_class[inner.alphabet.index(letter[:pi] + (s,) + letter[pi:])]

    keys = [tuple(inner_class(l, s) for s in S) for l in alphabet.letters]
    letter_class, reps = classes_from_keys(keys)
    signatures = [keys[r] for r in reps]

    groups_cache: dict = {}

    def groups(s):
        hit = groups_cache.get(s)
        if hit is None:
            hit = groups_cache[s] = _minimal_sets(
                strategic_successors(g, s, spec.coalition, spec.sharing))
        return hit

    index: dict = {}
    order: list = []
    queue: deque = deque()

    def state(key) -> int:
        v = index.get(key)
        if v is None:
            v = index[key] = len(order)
            order.append(key)
            queue.append(key)
            if budget is not None and len(order) > budget:
                raise BudgetExceeded("product", len(order), budget)
        return v

    exists = spec.kind is QKind.EXISTS
    outer, inner_op = (pb_or_all, pb_and_all) if exists else (pb_and_all, pb_or_all)
    state((inner.init, spec.state))
    rows = {}
    while queue:
        q, s = key = queue.popleft()
        row = []
        for sig in signatures:
            q2 = inner.delta[q][sig[s]]
            row.append(outer(inner_op(ref(state((q2, t))) for t in sorted(grp))
                             for grp in groups(s)))
        rows[index[key]] = tuple(row)
    delta = tuple(rows[i] for i in range(len(order)))
    colors = tuple(inner.colors[q] for q, _ in order)
    names = tuple(f"({q},{g.state_names[s]})" for q, s in order)
    return Apa(alphabet, letter_class, 0, delta, colors, names)
