"""Translation of quantifier-free path formulas into alternating automata."""

from __future__ import annotations

from collections import deque
from typing import Sequence

from ..cgs import Cgs
from ..errors import FormulaError
from ..formula import (And, Atom, Bottom, Next, Not, Or, PathFormula, Release, Top, Until,
                       atoms, is_nnf, to_text)
from .base import FALSE, TRUE, Alphabet, Apa, classes_from_keys, pb_and, pb_or, ref

__all__ = ["ltl_to_apa"]


def ltl_to_apa(psi: PathFormula, vars: Sequence[str], g: Cgs) -> Apa:
    """APA over ``vars -> states of g`` accepting exactly the zipped models of ``psi``.

    States are subformulas of ``psi`` reachable from ``psi`` itself.  Until
    states get color 1 (must be left eventually), all others color 0.
    """
    vars = tuple(vars)
    if not is_nnf(psi):
        raise FormulaError("ltl_to_apa expects a formula in negation normal form")
    used = atoms(psi)
    free = {v for _, v in used} - set(vars)
    if free:
        raise FormulaError(f"free path variable(s) {sorted(free)} outside {list(vars)}")
    alphabet = Alphabet.assignments(vars, g.num_states)
    checks = sorted(used)
    pos = {v: k for k, v in enumerate(vars)}
    keys = [tuple(ap in g.labels[letter[pos[v]]] for ap, v in checks) for letter in alphabet.letters]
    letter_class, reps = classes_from_keys(keys)
    truth = [dict(zip(checks, keys[r])) for r in reps]

    index: dict = {psi: 0}
    order = [psi]
    queue = deque([psi])

    def state(f) -> int:
        q = index.get(f)
        if q is None:
            q = index[f] = len(order)
            order.append(f)
            queue.append(f)
        return q

    def expand(f, val, memo):
        hit = memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Top):
            out = TRUE
        elif isinstance(f, Bottom):
            out = FALSE
        elif isinstance(f, Atom):
            out = TRUE if val[(f.ap, f.var)] else FALSE
        elif isinstance(f, Not):
            a = f.operand
            out = FALSE if val[(a.ap, a.var)] else TRUE
        elif isinstance(f, And):
            out = pb_and(expand(f.left, val, memo), expand(f.right, val, memo))
        elif isinstance(f, Or):
            out = pb_or(expand(f.left, val, memo), expand(f.right, val, memo))
        elif isinstance(f, Next):
            out = ref(state(f.operand))
        elif isinstance(f, Until):
            out = pb_or(expand(f.right, val, memo),
                        pb_and(expand(f.left, val, memo), ref(state(f))))
        elif isinstance(f, Release):
            out = pb_and(expand(f.right, val, memo),
                         pb_or(expand(f.left, val, memo), ref(state(f))))
        else:
            raise FormulaError(f"unexpected node {f!r} in an NNF body")
        memo[f] = out
        return out

    rows = {}
    while queue:
        f = queue.popleft()
        rows[index[f]] = tuple(expand(f, val, {}) for val in truth)
    delta = tuple(rows[q] for q in range(len(order)))
    colors = tuple(1 if isinstance(f, Until) else 0 for f in order)
    names = tuple(to_text(f) for f in order)
    return Apa(alphabet, letter_class, 0, delta, colors, names)
