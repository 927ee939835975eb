"""Min-even parity games: Zielonka's recursive solver, the alternating
automaton word-membership game, and strategy verification.

Player 0 (Even) is the existential / disjunctive player and player 1 (Odd)
the universal / conjunctive one.  A player who must move from a position
without successors loses.
"""

from __future__ import annotations

import itertools
import sys
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .automata.base import Apa, LassoWord
from .errors import BudgetExceeded, HymasError

__all__ = [
    "EVEN", "ODD", "ParityGame", "WinningRegions", "solve", "apa_word_game",
    "verify_strategy", "brute_force_regions", "dump_game",
]

EVEN = 0
ODD = 1


@dataclass(frozen=True, eq=False)
class ParityGame:
    """Positions ``0..n-1`` with owner, color and successor tuple each."""

    owner: tuple
    color: tuple
    succ: tuple
    labels: tuple | None = None
    _preds: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.owner)
        if len(self.color) != n or len(self.succ) != n:
            raise HymasError("owner, color and successor lists must have equal length")
        succ = tuple(tuple(dict.fromkeys(s)) for s in self.succ)
        preds = [[] for _ in range(n)]
        for v, ws in enumerate(succ):
            for w in ws:
                if not 0 <= w < n:
                    raise HymasError(f"edge {v}->{w} leaves the game")
                preds[w].append(v)
        object.__setattr__(self, "succ", succ)
        object.__setattr__(self, "_preds", tuple(tuple(p) for p in preds))

    def __len__(self) -> int:
        return len(self.owner)

    @property
    def preds(self) -> tuple:
        return self._preds


@dataclass(frozen=True)
class WinningRegions:
    even: frozenset
    odd: frozenset
    strategy: dict

    def winner(self, v: int) -> int:
        return EVEN if v in self.even else ODD


# ------------------------------------------------------------------- solver


def _attractor(game: ParityGame, V: set, target: set, player: int):
    attr = set(target)
    strategy = {}
    remaining: dict = {}
    queue = deque(attr)
    owner, succ, preds = game.owner, game.succ, game.preds
    while queue:
        v = queue.popleft()
        for u in preds[v]:
            if u in attr or u not in V:
                continue
            if owner[u] == player:
                attr.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                left = remaining.get(u)
                if left is None:
                    left = sum(1 for w in succ[u] if w in V)
                left -= 1
                remaining[u] = left
                if left == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strategy


def _zielonka(game: ParityGame, V: set):
    if not V:
        return set(), set(), {}
    color, owner, succ = game.color, game.owner, game.succ
    m = min(color[v] for v in V)
    p = m % 2
    M = {v for v in V if color[v] == m}
    A, s_attr = _attractor(game, V, M, p)
    sub = _zielonka(game, V - A)
    if not sub[1 - p]:
        strategy = dict(sub[2])
        strategy.update(s_attr)
        for v in M:
            if owner[v] == p:
                strategy[v] = next(w for w in succ[v] if w in V)
        win = [None, None]
        win[p], win[1 - p] = set(V), set()
        return win[0], win[1], strategy
    lost = sub[1 - p]
    B, s_b = _attractor(game, V, lost, 1 - p)
    rest = _zielonka(game, V - B)
    strategy = dict(rest[2])
    strategy.update(s_b)
    for v in lost:
        if owner[v] == 1 - p and v in sub[2]:
            strategy[v] = sub[2][v]
    win = [None, None]
    win[1 - p] = rest[1 - p] | B
    win[p] = rest[p]
    return win[0], win[1], strategy


def solve(game: ParityGame) -> WinningRegions:
    """Winning regions and positional winning strategies of both players."""
    n = len(game)
    everything = set(range(n))
    even_dead = {v for v in everything if not game.succ[v] and game.owner[v] == EVEN}
    odd_dead = {v for v in everything if not game.succ[v] and game.owner[v] == ODD}
    a_odd, s_odd = _attractor(game, everything, even_dead, ODD)
    rest = everything - a_odd
    a_even, s_even = _attractor(game, rest, odd_dead - a_odd, EVEN)
    rest -= a_even
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        w0, w1, strategy = _zielonka(game, rest)
    finally:
        sys.setrecursionlimit(limit)
    strategy.update(s_odd)
    strategy.update(s_even)
    even = frozenset(w0 | a_even)
    odd = frozenset(w1 | a_odd)
    strategy = {v: w for v, w in strategy.items()
                if (v in even and game.owner[v] == EVEN) or (v in odd and game.owner[v] == ODD)}
    return WinningRegions(even, odd, strategy)


# -------------------------------------------------------------- verification


def verify_strategy(game: ParityGame, regions: WinningRegions) -> bool:
    """Check that each player's strategy wins every play from its region."""
    n = len(game)
    if regions.even & regions.odd or (regions.even | regions.odd) != frozenset(range(n)):
        return False
    for player, region in ((EVEN, regions.even), (ODD, regions.odd)):
        graph = nx.DiGraph()
        graph.add_nodes_from(region)
        for v in region:
            if game.owner[v] == player:
                if not game.succ[v]:
                    return False
                w = regions.strategy.get(v)
                if w is None or w not in game.succ[v] or w not in region:
                    return False
                graph.add_edge(v, w)
            else:
                for w in game.succ[v]:
                    if w not in region:
                        return False
                    graph.add_edge(v, w)
        bad_parity = 1 - player
        for c in sorted({game.color[v] for v in region}):
            if c % 2 != bad_parity:
                continue
            sub = graph.subgraph([v for v in region if game.color[v] >= c])
            for comp in nx.strongly_connected_components(sub):
                cyclic = len(comp) > 1 or any(sub.has_edge(v, v) for v in comp)
                if cyclic and any(game.color[v] == c for v in comp):
                    return False
    return True


def _play_winner(game: ParityGame, start: int, sigma: dict, tau: dict) -> int:
    seen = {}
    path = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        if not game.succ[v]:
            return 1 - game.owner[v]
        v = sigma[v] if game.owner[v] == EVEN else tau[v]
    cycle = path[seen[v]:]
    return min(game.color[u] for u in cycle) % 2


def brute_force_regions(game: ParityGame) -> tuple[frozenset, frozenset]:
    """Winning regions by enumerating all pairs of positional strategies."""
    n = len(game)
    even_pos = [v for v in range(n) if game.owner[v] == EVEN and game.succ[v]]
    odd_pos = [v for v in range(n) if game.owner[v] == ODD and game.succ[v]]
    sigmas = [dict(zip(even_pos, c)) for c in itertools.product(*(game.succ[v] for v in even_pos))]
    taus = [dict(zip(odd_pos, c)) for c in itertools.product(*(game.succ[v] for v in odd_pos))]
    even = set()
    for v in range(n):
        if any(all(_play_winner(game, v, s, t) == EVEN for t in taus) for s in sigmas):
            even.add(v)
    return frozenset(even), frozenset(range(n)) - frozenset(even)


# ---------------------------------------------------------- membership game


def apa_word_game(a: Apa, w: LassoWord, budget: int | None = None) -> tuple[ParityGame, int]:
    """Parity game in which Even wins from the returned position iff ``w`` is in L(a).

    State positions ``(i, q)`` carry the color of ``q``; connective positions
    ``(i, subterm)`` carry the largest color, which never decides a play
    because every cycle passes through a state position.
    """
    w.check(a.alphabet)
    top = max(a.colors) if a.colors else 0
    classes = [a.class_of(w.letter(i)) for i in range(len(w))]
    index: dict = {}
    owner, color, succ, labels = [], [], [], []
    queue: deque = deque()

    def node(key, own, col, label):
        v = index.get(key)
        if v is None:
            v = index[key] = len(owner)
            owner.append(own)
            color.append(col)
            succ.append(None)
            labels.append(label)
            queue.append((v, key))
            if budget is not None and len(owner) > budget:
                raise BudgetExceeded("membership game", len(owner), budget)
        return v

    def formula_node(i, f):
        if f.op == "ref":
            return node(("s", w.next_pos(i), f.state), EVEN, a.colors[f.state],
                        f"{w.next_pos(i)}:{f.state}")
        if f.op == "true":
            return node(("t",), ODD, top, "true")
        if f.op == "false":
            return node(("f",), EVEN, top, "false")
        own = EVEN if f.op == "or" else ODD
        return node(("c", i, f.uid), own, top, f"{i}:{f.op}")

    start = node(("s", 0, a.init), EVEN, a.colors[a.init], f"0:{a.init}")
    formulas = {}
    while queue:
        v, key = queue.popleft()
        kind = key[0]
        if kind == "s":
            _, i, q = key
            f = a.delta[q][classes[i]]
            formulas.setdefault((i, f.uid), f)
            succ[v] = (formula_node(i, f),)
        elif kind == "c":
            _, i, uid = key
            f = formulas[(i, uid)]
            kids = []
            for c in f.children:
                if c.op in ("and", "or"):
                    formulas.setdefault((i, c.uid), c)
                kids.append(formula_node(i, c))
            succ[v] = tuple(kids)
        else:
            succ[v] = ()
    game = ParityGame(tuple(owner), tuple(color), tuple(succ), tuple(labels))
    return game, start


def dump_game(game: ParityGame) -> str:
    """One line per position: id, owner, color, successors and label."""
    lines = [f"positions {len(game)}"]
    for v in range(len(game)):
        own = "E" if game.owner[v] == EVEN else "O"
        succ = ",".join(str(w) for w in game.succ[v])
        label = "" if game.labels is None else f" {game.labels[v]}"
        lines.append(f"{v} {own} {game.color[v]} [{succ}]{label}")
    return "\n".join(lines) + "\n"
