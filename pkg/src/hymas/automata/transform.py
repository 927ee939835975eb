"""Automaton transformations: parity to Buchi for alternating automata,
alternation removal, Buchi determinization, and DPA post-processing.

The chain ``parity_to_buchi -> remove_alternation -> determinize`` turns
any alternating parity automaton into a deterministic parity automaton.
"""

from __future__ import annotations

import itertools
import sys
from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import AlphabetError, BudgetExceeded
from .base import Apa, Dpa, Nba, pb_or_all, ref

__all__ = [
    "normalize_colors", "parity_to_buchi", "remove_alternation", "prune_nba",
    "determinize", "minimize_dpa", "reduce_colors", "apa_to_dpa", "dual_apa",
]


def _check_budget(stage: str, size: int, budget: int | None) -> None:
    if budget is not None and size > budget:
        raise BudgetExceeded(stage, size, budget)


# ------------------------------------------------------------------ colors


def _compact_map(colors) -> dict:
    """Order- and parity-preserving map onto the smallest possible range."""
    out = {}
    nxt = None
    for c in sorted(set(colors)):
        if nxt is None:
            nxt = c % 2
        elif nxt % 2 != c % 2:
            nxt += 1
        out[c] = nxt
    return out


def normalize_colors(a):
    """Same automaton with colors compacted (parity and order preserved)."""
    m = _compact_map(a.colors)
    colors = tuple(m[c] for c in a.colors)
    return type(a)(a.alphabet, a.letter_class, a.init, a.delta, colors, a.names)


def dual_apa(a: Apa) -> Apa:
    """APA for the complement language: dual transitions, colors shifted by one."""
    cache: dict = {}
    delta = tuple(tuple(f.dual(cache) for f in row) for row in a.delta)
    return Apa(a.alphabet, a.letter_class, a.init, delta, tuple(c + 1 for c in a.colors), a.names)


# --------------------------------------------------------- parity to Buchi


def parity_to_buchi(a: Apa, budget: int | None = None) -> Apa:
    """Alternating Buchi automaton (colors {0, 1}) with the language of ``a``."""
    return _ranked_buchi(a, budget)[0]


def _ranked_buchi(a: Apa, budget: int | None):
    """Rank-based parity to Buchi translation; also returns the state keys.

    Each copy carries, for every odd color ``o`` below the largest even
    color, a rank in ``0..2*n_o`` (``n_o`` = number of states with color at
    least ``o``).  While a branch stays within colors ``>= o`` the rank may
    only decrease, and states of color exactly ``o`` need an even rank;
    dropping below ``o`` forgets the rank and re-entering picks any rank.
    A copy is accepting when its color ``e`` is even and all ranks for odd
    colors below ``e`` are odd.  Along any branch each rank eventually
    stabilizes, so an accepted branch cannot see an odd minimal color
    infinitely often; conversely a memoryless accepting run DAG admits
    such ranks, built per odd color by iteratively removing finite and
    color-free nodes from the sub-DAG of colors ``>= o``.

    Keys are ``(state, ranks)``; a copy with pointwise smaller ranks has a
    smaller language, which alternation removal exploits.
    """
    a = normalize_colors(a)
    if set(a.colors) <= {0, 1}:
        return a, None
    colors = a.colors
    evens = [c for c in set(colors) if c % 2 == 0]
    top_even = max(evens) if evens else -1
    odds = sorted(o for o in set(colors) if o % 2 == 1 and o < top_even)
    top_rank = {o: 2 * sum(1 for c in colors if c >= o) for o in odds}

    def entry_ranks(q, prev_q=None, prev_ranks=None):
        """All admissible rank vectors for a copy moving into state ``q``."""
        options = []
        for k, o in enumerate(odds):
            if colors[q] < o:
                options.append((None,))
                continue
            if prev_q is None:
                cand = (top_rank[o],)
            elif colors[prev_q] >= o:
                cand = range(prev_ranks[k] + 1)
            else:
                cand = range(top_rank[o] + 1)
            if colors[q] == o:
                cand = [r for r in cand if r % 2 == 0]
            options.append(tuple(cand))
        return itertools.product(*options)

    def accepting(q, ranks) -> bool:
        e = colors[q]
        if e % 2:
            return False
        return all(ranks[k] % 2 == 1 for k, o in enumerate(odds) if o < e)

    index: dict = {}
    order: list = []
    queue: deque = deque()

    def state(key) -> int:
        s = index.get(key)
        if s is None:
            s = index[key] = len(order)
            order.append(key)
            queue.append(key)
            _check_budget("parity-to-buchi", len(order), budget)
        return s

    state((a.init, next(iter(entry_ranks(a.init)))))
    rows = {}
    while queue:
        q, ranks = key = queue.popleft()
        lift_cache: dict = {}

        def lift(p, q=q, ranks=ranks):
            f = lift_cache.get(p)
            if f is None:
                f = lift_cache[p] = pb_or_all(ref(state((p, r))) for r in entry_ranks(p, q, ranks))
            return f

        rows[index[key]] = tuple(a.delta[q][c].substitute(lift, {}) for c in range(a.num_classes))
    delta = tuple(rows[i] for i in range(len(order)))
    new_colors = tuple(0 if accepting(q, r) else 1 for q, r in order)
    names = tuple(f"{q}:{','.join('-' if x is None else str(x) for x in r)}" for q, r in order)
    return Apa(a.alphabet, a.letter_class, 0, delta, new_colors, names), tuple(order)


# ------------------------------------------------------ alternation removal


def _below(x, y) -> bool:
    return all(r is None or r <= t for r, t in zip(x[1], y[1]))


def remove_alternation(a: Apa, budget: int | None = None, keys: tuple | None = None) -> Nba:
    """Breakpoint construction turning an alternating Buchi automaton into an NBA.

    States are pairs ``(S, O)``: the current set of copies and the copies
    still owing a visit to an accepting state since the last breakpoint.
    With ``keys`` from the rank translation, each ``S`` keeps only copies
    with minimal ranks per underlying state, and pending copies that were
    dropped are represented by a dominating copy that stays.
    """
    if not set(a.colors) <= {0, 1}:
        raise AlphabetError("remove_alternation expects colors within {0, 1}")
    final = frozenset(q for q, c in enumerate(a.colors) if c == 0)

    if keys is None:
        def prune(s):
            return s

        def redirect(o, s):
            return o
    else:
        def prune(s):
            out = set()
            for x in s:
                kx = keys[x]
                if not any(y != x and keys[y][0] == kx[0] and _below(keys[y], kx) for y in s):
                    out.add(x)
            return frozenset(out)

        def redirect(o, s):
            out = set()
            for y in o:
                if y in s:
                    out.add(y)
                    continue
                ky = keys[y]
                out.add(next(x for x in sorted(s) if keys[x][0] == ky[0] and _below(keys[x], ky)))
            return frozenset(out)

    init = (frozenset((a.init,)), frozenset((a.init,)) - final)
    index = {init: 0}
    order = [init]
    queue = deque([init])
    rows = {}
    while queue:
        S, O = key = queue.popleft()
        row = []
        for c in range(a.num_classes):
            partial = {(frozenset(), frozenset())}
            for q in sorted(S):
                models = a.delta[q][c].models()
                if not models:
                    partial = set()
                    break
                owes = q in O
                step = set()
                for s, o in partial:
                    for m in models:
                        s2 = prune(s | m)
                        step.add((s2, redirect(o | m if owes else o, s2)))
                partial = step
            targets = set()
            for s2, o2 in partial:
                nxt = (s2, (s2 if not O else o2) - final)
                t = index.get(nxt)
                if t is None:
                    t = index[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
                    _check_budget("alternation removal", len(order), budget)
                targets.add(t)
            row.append(frozenset(targets))
        rows[index[key]] = tuple(row)
    delta = tuple(rows[i] for i in range(len(order)))
    accepting = frozenset(i for i, (_, O) in enumerate(order) if not O)
    names = tuple("{" + ",".join(map(str, sorted(S))) + "|" + ",".join(map(str, sorted(O))) + "}"
                  for S, O in order)
    return prune_nba(Nba(a.alphabet, a.letter_class, 0, delta, accepting, names))


def _scc_labels(n: int, edges_from, edges_to) -> np.ndarray:
    graph = csr_matrix((np.ones(len(edges_from), dtype=np.int8), (edges_from, edges_to)),
                       shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")
    return labels


def prune_nba(n: Nba) -> Nba:
    """Drop states from which no accepting cycle is reachable."""
    src, dst = [], []
    for q, row in enumerate(n.delta):
        for targets in row:
            for p in targets:
                src.append(q)
                dst.append(p)
    size = n.num_states
    labels = _scc_labels(size, src, dst)
    comp_size = np.bincount(labels, minlength=labels.max() + 1 if size else 0)
    self_loop = {q for q, p in zip(src, dst) if q == p}
    good = set()
    for q in n.accepting:
        if comp_size[labels[q]] > 1 or q in self_loop:
            good.add(q)
    preds = [[] for _ in range(size)]
    for q, p in zip(src, dst):
        preds[p].append(q)
    live = set(good)
    queue = deque(good)
    while queue:
        p = queue.popleft()
        for q in preds[p]:
            if q not in live:
                live.add(q)
                queue.append(q)
    if len(live) == size:
        return n
    keep = sorted(live | {n.init})
    remap = {q: i for i, q in enumerate(keep)}
    delta = tuple(tuple(frozenset(remap[p] for p in t if p in live) for t in n.delta[q])
                  if q in live else tuple(frozenset() for _ in n.delta[q])
                  for q in keep)
    accepting = frozenset(remap[q] for q in n.accepting if q in live)
    names = None if n.names is None else tuple(n.names[q] for q in keep)
    return Nba(n.alphabet, n.letter_class, remap[n.init], delta, accepting, names)


# --------------------------------------------------------- determinization


def _safra_step(tree: tuple, succ, final: frozenset):
    """One step of a compact Safra tree; returns (new_tree, color_event).

    ``tree`` is a tuple of ``(parent, label, marked)`` in age order, with
    names ``index + 1``.  ``color_event`` is ``(e, f)``: the least name of
    an old node removed and the least name of a node marked (or None).
    """
    old = len(tree)
    nodes = [[p, lab, False] for p, lab, _ in tree]
    for i in range(old):
        acc = nodes[i][1] & final
        if acc:
            nodes.append([i, acc, False])
    for node in nodes:
        node[1] = succ(node[1])
    children = [[] for _ in nodes]
    for i, node in enumerate(nodes):
        if node[0] >= 0:
            children[node[0]].append(i)
    alive = [True] * len(nodes)

    if nodes:
        stack = [(0, None)]
        while stack:
            i, allowed = stack.pop()
            if allowed is not None:
                nodes[i][1] = nodes[i][1] & allowed
            used = frozenset()
            pending = []
            for j in children[i]:
                allowed_j = nodes[i][1] - used
                pending.append((j, allowed_j))
                used = used | (nodes[j][1] & allowed_j)
            stack.extend(reversed(pending))

    removed = None
    for i, node in enumerate(nodes):
        if not node[1]:
            alive[i] = False
    for i, node in enumerate(nodes):
        if node[0] >= 0 and not alive[node[0]]:
            alive[i] = False
    marked = None
    for i, node in enumerate(nodes):
        if not alive[i]:
            continue
        kids = [j for j in children[i] if alive[j]]
        if kids:
            union = frozenset().union(*(nodes[j][1] for j in kids))
            if union == node[1]:
                node[2] = True
                stack = list(kids)
                while stack:
                    j = stack.pop()
                    alive[j] = False
                    stack.extend(children[j])
                if i < old and (marked is None or i + 1 < marked):
                    marked = i + 1
    for i in range(old):
        if not alive[i]:
            removed = i + 1
            break
    remap = {}
    out = []
    for i, node in enumerate(nodes):
        if alive[i]:
            remap[i] = len(out)
            parent = -1 if node[0] < 0 else remap[node[0]]
            out.append((parent, node[1], node[2]))
    return tuple(out), (removed, marked)


def determinize(n: Nba, budget: int | None = None) -> Dpa:
    """Deterministic parity automaton with the language of ``n`` (compact Safra trees)."""
    final = frozenset(n.accepting)
    size = n.num_states
    neutral = 2 * size + 1

    def color_of(event) -> int:
        e, f = event
        options = [neutral]
        if e is not None:
            options.append(2 * e - 1)
        if f is not None:
            options.append(2 * f)
        return min(options)

    init_tree = ((-1, frozenset((n.init,)), False),)
    init = (init_tree, neutral)
    index = {init: 0}
    order = [init]
    queue = deque([init])
    rows = {}
    trans_cache: dict = {}
    while queue:
        key = queue.popleft()
        tree = key[0]
        row = []
        for c in range(n.num_classes):
            hit = trans_cache.get((tree, c))
            if hit is None:
                def succ(label, c=c):
                    out = set()
                    for q in label:
                        out |= n.delta[q][c]
                    return frozenset(out)
                new_tree, event = _safra_step(tree, succ, final)
                hit = trans_cache[(tree, c)] = (new_tree, color_of(event))
            t = index.get(hit)
            if t is None:
                t = index[hit] = len(order)
                order.append(hit)
                queue.append(hit)
                _check_budget("determinization", len(order), budget)
            row.append(t)
        rows[index[key]] = tuple(row)
    delta = tuple(rows[i] for i in range(len(order)))
    colors = tuple(c for _, c in order)
    return Dpa(n.alphabet, n.letter_class, 0, delta, colors, None)


# ------------------------------------------------------------ DPA cleanup


def minimize_dpa(d: Dpa) -> Dpa:
    """Quotient by the coarsest color-respecting bisimulation, states in BFS order."""
    block = list(d.colors)
    count = len(set(block))
    while True:
        keys = [(block[q], tuple(block[p] for p in d.delta[q])) for q in range(d.num_states)]
        ids: dict = {}
        new_block = [ids.setdefault(k, len(ids)) for k in keys]
        block = new_block
        if len(ids) == count:
            break
        count = len(ids)
    rep = {}
    for q in range(d.num_states):
        rep.setdefault(block[q], q)
    start = block[d.init]
    order = [start]
    index = {start: 0}
    i = 0
    while i < len(order):
        b = order[i]
        i += 1
        for p in d.delta[rep[b]]:
            nb = block[p]
            if nb not in index:
                index[nb] = len(order)
                order.append(nb)
    delta = tuple(tuple(index[block[p]] for p in d.delta[rep[b]]) for b in order)
    colors = tuple(d.colors[rep[b]] for b in order)
    return Dpa(d.alphabet, d.letter_class, 0, delta, colors, None)


def reduce_colors(d: Dpa) -> Dpa:
    """Recolor with as few colors as the transition structure allows.

    Recursively splits strongly connected components at their least color;
    states on no cycle receive the largest color in use.
    """
    n = d.num_states
    succ = [sorted(set(row)) for row in d.delta]
    new = [None] * n

    def recurse(nodes: list, base: int):
        if not nodes:
            return
        members = set(nodes)
        pos = {q: k for k, q in enumerate(nodes)}
        src, dst = [], []
        for q in nodes:
            for p in succ[q]:
                if p in members:
                    src.append(pos[q])
                    dst.append(pos[p])
        labels = _scc_labels(len(nodes), src, dst)
        comps: dict = {}
        for k, lab in enumerate(labels):
            comps.setdefault(lab, []).append(nodes[k])
        loops = {nodes[s] for s, t in zip(src, dst) if s == t}
        for comp in comps.values():
            if len(comp) == 1 and comp[0] not in loops:
                continue
            m = min(d.colors[q] for q in comp)
            level = base if base % 2 == m % 2 else base + 1
            low = [q for q in comp if d.colors[q] == m]
            for q in low:
                new[q] = level
            recurse([q for q in comp if d.colors[q] != m], level + 1)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        recurse(list(range(n)), 0)
    finally:
        sys.setrecursionlimit(limit)
    used = [c for c in new if c is not None]
    top = max(used) if used else 1
    colors = [top if c is None else c for c in new]
    shift = min(colors) - min(colors) % 2
    colors = tuple(c - shift for c in colors)
    return Dpa(d.alphabet, d.letter_class, d.init, d.delta, colors, d.names)


def _transient_states(d: Dpa) -> set:
    n = d.num_states
    src = [q for q in range(n) for p in d.delta[q]]
    dst = [p for q in range(n) for p in d.delta[q]]
    labels = _scc_labels(n, src, dst)
    sizes = np.bincount(labels, minlength=n)
    loops = {q for q, p in zip(src, dst) if q == p}
    return {q for q in range(n) if sizes[labels[q]] == 1 and q not in loops}


def _align_transient(d: Dpa) -> Dpa:
    """Copy colors onto transient states whose row equals another state's row.

    Colors of states on no cycle never influence acceptance, so this only
    enables further merging.  Returns ``d`` itself when nothing changes.
    """
    transient = _transient_states(d)
    by_row: dict = {}
    for q in range(d.num_states):
        if q not in transient:
            by_row.setdefault(d.delta[q], q)
    for q in sorted(transient):
        by_row.setdefault(d.delta[q], q)
    colors = list(d.colors)
    changed = False
    for q in transient:
        p = by_row[d.delta[q]]
        if p != q and colors[p] != colors[q]:
            colors[q] = colors[p]
            changed = True
    if not changed:
        return d
    return Dpa(d.alphabet, d.letter_class, d.init, d.delta, tuple(colors), d.names)


def apa_to_dpa(a: Apa, budget: int | None = None, stats: dict | None = None) -> Dpa:
    """Deterministic parity automaton equivalent to the alternating automaton ``a``."""
    b, keys = _ranked_buchi(a, budget)
    nba = remove_alternation(b, budget, keys)
    dpa = determinize(nba, budget)
    small = minimize_dpa(reduce_colors(minimize_dpa(dpa)))
    while True:
        merged = _align_transient(small)
        if merged is small:
            break
        small = minimize_dpa(merged)
    if stats is not None:
        stats.update(apa=a.num_states, buchi=b.num_states, nba=nba.num_states,
                     dpa_raw=dpa.num_states, dpa=small.num_states,
                     colors=len(set(small.colors)))
    return small
