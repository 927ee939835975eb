"""Lasso-word membership for deterministic, nondeterministic and alternating automata."""

from __future__ import annotations

import networkx as nx

from .base import Apa, Dpa, LassoWord, Nba

__all__ = ["dpa_member_lasso", "nba_member_lasso", "apa_member_lasso"]


def dpa_member_lasso(d: Dpa, w: LassoWord) -> bool:
    """Run ``d`` on ``w`` until a (position, state) pair repeats."""
    w.check(d.alphabet)
    seen: dict = {}
    trace = []
    i, q = 0, d.init
    while (i, q) not in seen:
        seen[(i, q)] = len(trace)
        trace.append(q)
        q = d.delta[q][d.class_of(w.letter(i))]
        i = w.next_pos(i)
    cycle = trace[seen[(i, q)]:]
    return min(d.colors[s] for s in cycle) % 2 == 0


def nba_member_lasso(n: Nba, w: LassoWord) -> bool:
    """Search the product of ``n`` with the lasso for a reachable accepting cycle."""
    w.check(n.alphabet)
    graph = nx.DiGraph()
    start = (0, n.init)
    graph.add_node(start)
    stack = [start]
    while stack:
        i, q = node = stack.pop()
        j = w.next_pos(i)
        for p in n.delta[q][n.class_of(w.letter(i))]:
            nxt = (j, p)
            if nxt not in graph:
                graph.add_node(nxt)
                stack.append(nxt)
            graph.add_edge(node, nxt)
    for comp in nx.strongly_connected_components(graph):
        if len(comp) == 1:
            (v,) = comp
            if not graph.has_edge(v, v):
                continue
        if any(q in n.accepting for _, q in comp):
            return True
    return False


def apa_member_lasso(a: Apa, w: LassoWord, budget: int | None = None) -> bool:
    """Decide ``w in L(a)`` by solving the membership parity game."""
    from ..games import EVEN, apa_word_game, solve

    game, start = apa_word_game(a, w, budget)
    return solve(game).winner(start) == EVEN
