"""End-to-end model checking: nested-formula relabeling, iterated
quantifier elimination per pinned state, and the final membership test of
the empty path assignment.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .automata.base import LassoWord
from .automata.ltl import ltl_to_apa
from .automata.membership import apa_member_lasso
from .automata.transform import apa_to_dpa
from .cgs import Cgs
from .errors import HymasError
from .formula import (Leaf, Quant, StateFormula, extract_nested_state_formulas, quantifier_prefix,
                      rank, substitute_nested, to_nnf, validate)
from .product import ProductSpec, build_product

__all__ = ["CheckResult", "model_check", "check", "default_budget", "DEFAULT_BUDGET"]

DEFAULT_BUDGET = 10 ** 6
EMPTY_WORD = LassoWord((), ((),))


def default_budget() -> int:
    """State cap per automaton: ``HYMAS_STATE_BUDGET`` if set, else one million."""
    raw = os.environ.get("HYMAS_STATE_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise HymasError(f"HYMAS_STATE_BUDGET must be an integer, got {raw!r}") from None
    if value <= 0:
        raise HymasError("HYMAS_STATE_BUDGET must be positive")
    return value


@dataclass(frozen=True)
class CheckResult:
    """Solution set over the evaluated states, the top-level verdict and statistics."""

    solution: frozenset
    holds_at_init: bool
    evaluated: tuple
    stats: dict = field(default_factory=dict, compare=False)


def _replace_leaf(phi: StateFormula, body) -> StateFormula:
    if isinstance(phi, Quant):
        return Quant(phi.kind, phi.coalition, phi.sharing, phi.var, _replace_leaf(phi.body, body))
    return Leaf(body)


def _relabel(g: Cgs, phi: StateFormula, budget: int, counter: list, memo: dict, stats: dict):
    """Replace nested state formulas by fresh propositions, innermost first."""
    _, body = quantifier_prefix(phi)
    for nested in extract_nested_state_formulas(body):
        if nested in memo:
            continue
        _, inner_body = quantifier_prefix(nested)
        for done, name in memo.items():
            inner_body = substitute_nested(inner_body, done, name)
        flat = _replace_leaf(nested, inner_body)
        counter[0] += 1
        name = f"#n{counter[0]}"
        sol = _solve(g, flat, range(g.num_states), budget, 1, None, stats.setdefault("nested", []))
        g = g.with_labels(name, sol)
        memo[nested] = name
    for done, name in memo.items():
        body = substitute_nested(body, done, name)
    return g, _replace_leaf(phi, body)


def _eliminate(g: Cgs, quants: list, d0, s: int, budget: int, emit) -> tuple[bool, list]:
    """Run the quantifier-elimination chain for one pinned state."""
    sizes = []
    d = d0
    a = None
    for j in range(len(quants) - 1, -1, -1):
        q = quants[j]
        if d is None:
            st: dict = {}
            d = apa_to_dpa(a, budget, st)
            sizes[-1].update(st)
            if emit:
                emit(f"s{s}.q{j + 2}.dpa", d)
        spec = ProductSpec(g, s, q.kind, q.coalition, q.sharing, q.var)
        a = build_product(spec, d, budget)
        if emit:
            emit(f"s{s}.q{j + 1}.apa", a)
        sizes.append({"quantifier": j + 1, "product": a.num_states})
        d = None
    if emit:
        from .games import apa_word_game, solve, EVEN
        game, start = apa_word_game(a, EMPTY_WORD, budget)
        emit(f"s{s}.game", game)
        return solve(game).winner(start) == EVEN, sizes
    return apa_member_lasso(a, EMPTY_WORD, budget), sizes


def _eliminate_job(args):
    return _eliminate(*args, None)


def _solve(g: Cgs, phi: StateFormula, states: Iterable[int], budget: int, parallel: int,
           emit, log: list) -> frozenset:
    quants, body = quantifier_prefix(phi)
    vars_ = [q.var for q in quants]
    base = ltl_to_apa(to_nnf(body), vars_, g)
    entry = {"rank": len(quants), "ltl_apa": base.num_states}
    if emit:
        emit("ltl.apa", base)
    states = list(states)
    if not quants:
        holds = apa_member_lasso(base, EMPTY_WORD, budget)
        log.append(entry)
        return frozenset(states) if holds else frozenset()
    st: dict = {}
    d0 = apa_to_dpa(base, budget, st)
    entry["ltl_dpa"] = st
    if emit:
        emit(f"q{len(quants)}.dpa", d0)
    if parallel > 1 and emit is None and len(states) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_eliminate_job,
                                     [(g, quants, d0, s, budget) for s in states]))
    else:
        outcomes = [_eliminate(g, quants, d0, s, budget, emit) for s in states]
    entry["per_state"] = {s: sizes for s, (_, sizes) in zip(states, outcomes)}
    log.append(entry)
    return frozenset(s for s, (ok, _) in zip(states, outcomes) if ok)


def model_check(g: Cgs, phi: StateFormula, *, states: Iterable[int] | None = None,
                budget: int | None = None, parallel: int = 1,
                emit: Callable[[str, object], None] | None = None) -> CheckResult:
    """States of ``g`` (all, or the given subset) satisfying the closed formula ``phi``.

    Nested state formulas are always evaluated on every state.  ``budget``
    caps the size of every intermediate automaton and game; ``emit``
    receives each intermediate automaton and the final game by stage name.
    """
    validate(phi, g.agents)
    budget = default_budget() if budget is None else budget
    start = time.perf_counter()
    stats: dict = {"rank": rank(phi)}
    g2, flat = _relabel(g, phi, budget, [0], {}, stats)
    targets = tuple(range(g.num_states)) if states is None else tuple(sorted(set(states)))
    log: list = []
    sol = _solve(g2, flat, targets, budget, parallel, emit, log)
    stats["top"] = log[0]
    stats["wall_ms"] = round((time.perf_counter() - start) * 1000, 3)
    return CheckResult(sol, g.init in sol, targets, stats)


def check(g: Cgs, phi: StateFormula, *, budget: int | None = None) -> bool:
    """Whether ``phi`` holds in the initial state of ``g``."""
    return model_check(g, phi, states=(g.init,), budget=budget).holds_at_init
