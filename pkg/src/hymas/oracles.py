"""Brute-force semantic evaluators used as test oracles.

Nothing here touches automata: path formulas are evaluated directly on
lasso words by fixpoint iteration, and strategic quantifiers over a finite
horizon by enumerating strategy tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .automata.base import LassoWord
from .cgs import Cgs
from .errors import OracleError
from .formula import (And, AtlQuant, Atom, Bottom, Iff, Implies, Nested, Next, Not, Or,
                      PathFormula, Prop, QKind, Release, StateFormula, Top, Until,
                      quantifier_prefix)

__all__ = [
    "BoundedStrategy", "eval_ltl_lasso", "eval_bounded_hyper", "eval_bounded_atl",
    "bounded_solution", "bounded_depth", "DEFAULT_ORACLE_BUDGET",
]

DEFAULT_ORACLE_BUDGET = 2_000_000


@dataclass(frozen=True)
class BoundedStrategy:
    """An agent strategy defined on histories of length at most ``horizon``."""

    table: Mapping = field(default_factory=dict)
    horizon: int = 0

    def __call__(self, history: tuple) -> str:
        history = tuple(history)
        if len(history) > self.horizon:
            raise OracleError(f"history of length {len(history)} beyond horizon {self.horizon}")
        try:
            return self.table[history]
        except KeyError:
            raise OracleError(f"strategy undefined on history {history}") from None


# ------------------------------------------------------------ lasso words


def eval_ltl_lasso(psi: PathFormula, w: LassoWord, vars: Sequence[str],
                   labels: Sequence[Iterable[str]]) -> bool:
    """Truth of ``psi`` at position 0 of the lasso assignment ``w``.

    Letters of ``w`` are tuples of state indices in ``vars`` order;
    ``labels[s]`` is the set of propositions holding in state ``s``.
    """
    vars = tuple(vars)
    pos = {v: k for k, v in enumerate(vars)}
    labels = [frozenset(l) for l in labels]
    n = len(w)
    nxt = [w.next_pos(i) for i in range(n)]
    memo: dict = {}

    def vec(f) -> tuple:
        hit = memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Top):
            out = (True,) * n
        elif isinstance(f, Bottom):
            out = (False,) * n
        elif isinstance(f, Atom):
            if f.var not in pos:
                raise OracleError(f"path variable {f.var!r} is not assigned")
            k = pos[f.var]
            out = tuple(f.ap in labels[w.letter(i)[k]] for i in range(n))
        elif isinstance(f, Nested):
            raise OracleError("nested state formulas are not supported on lasso words")
        elif isinstance(f, Not):
            out = tuple(not x for x in vec(f.operand))
        elif isinstance(f, And):
            out = tuple(x and y for x, y in zip(vec(f.left), vec(f.right)))
        elif isinstance(f, Or):
            out = tuple(x or y for x, y in zip(vec(f.left), vec(f.right)))
        elif isinstance(f, Implies):
            out = tuple((not x) or y for x, y in zip(vec(f.left), vec(f.right)))
        elif isinstance(f, Iff):
            out = tuple(x == y for x, y in zip(vec(f.left), vec(f.right)))
        elif isinstance(f, Next):
            sub = vec(f.operand)
            out = tuple(sub[nxt[i]] for i in range(n))
        elif isinstance(f, (Until, Release)):
            left, right = vec(f.left), vec(f.right)
            until = isinstance(f, Until)
            cur = [not until] * n
            changed = True
            while changed:
                changed = False
                for i in range(n - 1, -1, -1):
                    if until:
                        v = right[i] or (left[i] and cur[nxt[i]])
                    else:
                        v = right[i] and (left[i] or cur[nxt[i]])
                    if v != cur[i]:
                        cur[i] = v
                        changed = True
            out = tuple(cur)
        else:
            raise OracleError(f"unexpected node {f!r}")
        memo[f] = out
        return out

    return vec(psi)[0]


# ------------------------------------------------------- bounded strategies


def bounded_depth(psi: PathFormula) -> int:
    """Positions beyond the first that the verdict of ``psi`` may depend on.

    Raises OracleError for U and R, which need unbounded lookahead.
    """
    if isinstance(psi, (Atom, Top, Bottom, Nested, Prop, AtlQuant)):
        return 0
    if isinstance(psi, Not):
        return bounded_depth(psi.operand)
    if isinstance(psi, Next):
        return 1 + bounded_depth(psi.operand)
    if isinstance(psi, (Until, Release)):
        raise OracleError("unbounded temporal operator in an oracle body")
    if isinstance(psi, (And, Or, Implies, Iff)):
        return max(bounded_depth(psi.left), bounded_depth(psi.right))
    raise OracleError(f"unexpected node {psi!r}")


def _vectors(g: Cgs, members: list, sharing) -> list[dict]:
    """Effective action vectors of ``members`` under ``sharing``.

    Every agent picks from the global action set (all names of all agents);
    shared pairs pick equal names; a name an agent lacks becomes its
    smallest own action.  Duplicate effective vectors are dropped.
    """
    universe = sorted({x for acts in g.actions for x in acts})
    pairs = [(i, j) for i, j in sharing if i in members and j in members]
    own = {a: g.actions[g.agent_index(a)] for a in members}
    out, seen = [], set()
    for combo in itertools.product(universe, repeat=len(members)):
        pick = dict(zip(members, combo))
        if not all(pick[i] == pick[j] for i, j in pairs):
            continue
        vec = {a: x if x in own[a] else min(own[a]) for a, x in pick.items()}
        key = tuple(sorted(vec.items()))
        if key not in seen:
            seen.add(key)
            out.append(vec)
    return out


class _Counter:
    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.budget:
            raise OracleError(f"oracle enumeration exceeded its budget of {self.budget}")


def _strategic(g: Cgs, s: int, kind: QKind, coalition, sharing, horizon: int,
               pred: Callable[[tuple], bool], counter: _Counter) -> bool:
    """``exists f_A forall f_rest`` (or ``forall f_A exists f_rest``) of ``pred(play)``.

    Coalition strategies are enumerated as tables over the histories they
    can reach.  Once they are fixed, quantifying over the opponents'
    strategies amounts to quantifying over the branches of the remaining
    play tree, since their choices at distinct histories are independent.
    """
    first = [a for a in g.agents if a in coalition]
    second = [a for a in g.agents if a not in coalition]
    mine = _vectors(g, first, sharing)
    theirs = _vectors(g, second, sharing)
    order = {a: k for k, a in enumerate(g.agents)}

    def step(state: int, a: dict, b: dict) -> int:
        joint = {**a, **b}
        idx = tuple(g.action_index(ag, joint[ag]) for ag in sorted(joint, key=order.get))
        return int(g.kappa[(state,) + idx])

    exists = kind is QKind.EXISTS
    if not mine:
        return not exists

    def plays(table: dict) -> list[tuple]:
        out = []
        stack = [(s,)]
        while stack:
            h = stack.pop()
            if len(h) > horizon:
                out.append(h)
                continue
            a = table[h]
            for t in sorted({step(h[-1], a, b) for b in theirs}):
                stack.append(h + (t,))
        return out

    def verdict(table: dict) -> bool:
        counter.tick()
        results = (pred(p) for p in plays(table))
        return all(results) if exists else any(results)

    def search(pending: list, table: dict) -> bool:
        """Whether some (exists) / every (forall) completion of ``table`` wins."""
        if not pending:
            return verdict(table)
        h, rest = pending[0], pending[1:]
        if len(h) > horizon:
            return search(rest, table)
        for a in mine:
            table[h] = a
            children = [h + (t,) for t in sorted({step(h[-1], a, b) for b in theirs})]
            won = search(rest + children, table)
            del table[h]
            if won == exists:
                return exists
        return not exists

    return search([(s,)], {})


def eval_bounded_hyper(g: Cgs, s: int, phi: StateFormula, k: int | None = None,
                       budget: int = DEFAULT_ORACLE_BUDGET) -> bool:
    """Truth of the closed formula ``phi`` at state ``s`` for bodies of bounded depth.

    ``k`` defaults to the depth of the body; a smaller ``k`` is rejected.
    """
    counter = _Counter(budget)
    nested_memo: dict = {}
    return _eval_state(g, s, phi, k, counter, nested_memo)


def _eval_state(g, s, phi, k, counter, nested_memo) -> bool:
    quants, body = quantifier_prefix(phi)
    depth = bounded_depth(body)
    if k is None:
        k = depth
    elif k < depth:
        raise OracleError(f"horizon {k} is below the body depth {depth}")
    memo: dict = {}

    def path_truth(f, assignment: dict, i: int) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Atom):
            return f.ap in g.labels[assignment[f.var][i]]
        if isinstance(f, Nested):
            state = assignment[f.var][i]
            key = (f.body, state)
            if key not in nested_memo:
                nested_memo[key] = _eval_state(g, state, f.body, None, counter, nested_memo)
            return nested_memo[key]
        if isinstance(f, Not):
            return not path_truth(f.operand, assignment, i)
        if isinstance(f, And):
            return path_truth(f.left, assignment, i) and path_truth(f.right, assignment, i)
        if isinstance(f, Or):
            return path_truth(f.left, assignment, i) or path_truth(f.right, assignment, i)
        if isinstance(f, Implies):
            return (not path_truth(f.left, assignment, i)) or path_truth(f.right, assignment, i)
        if isinstance(f, Iff):
            return path_truth(f.left, assignment, i) == path_truth(f.right, assignment, i)
        if isinstance(f, Next):
            return path_truth(f.operand, assignment, i + 1)
        raise OracleError(f"unexpected node {f!r}")

    def level(j: int, assignment: dict) -> bool:
        key = (j, tuple(sorted(assignment.items())))
        hit = memo.get(key)
        if hit is not None:
            return hit
        if j == len(quants):
            out = path_truth(body, assignment, 0)
        else:
            q = quants[j]
            out = _strategic(g, s, q.kind, q.coalition, q.sharing, k,
                             lambda play: level(j + 1, {**assignment, q.var: play}), counter)
        memo[key] = out
        return out

    return level(0, {})


def bounded_solution(g: Cgs, phi: StateFormula, k: int | None = None,
                     budget: int = DEFAULT_ORACLE_BUDGET) -> frozenset:
    """All states where the bounded oracle says ``phi`` holds."""
    return frozenset(s for s in range(g.num_states) if eval_bounded_hyper(g, s, phi, k, budget))


# ------------------------------------------------------------------- ATL*


def _atl_depth(f: PathFormula) -> int:
    if isinstance(f, (Prop, Top, Bottom, AtlQuant)):
        return 0
    if isinstance(f, Not):
        return _atl_depth(f.operand)
    if isinstance(f, Next):
        return 1 + _atl_depth(f.operand)
    if isinstance(f, (Until, Release)):
        raise OracleError("unbounded temporal operator in an oracle body")
    if isinstance(f, (And, Or, Implies, Iff)):
        return max(_atl_depth(f.left), _atl_depth(f.right))
    raise OracleError(f"not an ATL* path formula: {f!r}")


def eval_bounded_atl(g: Cgs, s: int, phi: AtlQuant, budget: int = DEFAULT_ORACLE_BUDGET) -> bool:
    """Truth of the ATL* state formula ``phi`` at ``s`` (bounded path bodies only)."""
    counter = _Counter(budget)
    memo: dict = {}

    def state(f: AtlQuant, at: int) -> bool:
        key = (f, at)
        if key not in memo:
            horizon = _atl_depth(f.body)
            memo[key] = _strategic(g, at, f.kind, f.coalition, frozenset(), horizon,
                                   lambda play: path(f.body, play, 0), counter)
        return memo[key]

    def path(f, play: tuple, i: int) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Prop):
            return f.name in g.labels[play[i]]
        if isinstance(f, AtlQuant):
            return state(f, play[i])
        if isinstance(f, Not):
            return not path(f.operand, play, i)
        if isinstance(f, And):
            return path(f.left, play, i) and path(f.right, play, i)
        if isinstance(f, Or):
            return path(f.left, play, i) or path(f.right, play, i)
        if isinstance(f, Implies):
            return (not path(f.left, play, i)) or path(f.right, play, i)
        if isinstance(f, Iff):
            return path(f.left, play, i) == path(f.right, play, i)
        if isinstance(f, Next):
            return path(f.operand, play, i + 1)
        raise OracleError(f"not an ATL* path formula: {f!r}")

    if not isinstance(phi, AtlQuant):
        raise OracleError("ATL* state formulas start with a strategy quantifier")
    return state(phi, s)
