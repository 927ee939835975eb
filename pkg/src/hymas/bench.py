"""Benchmark models, specification templates, hand-built fixtures and random
instance generators.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from .automata.base import Alphabet, Apa, Dpa, LassoWord, Nba, pb_and, pb_or, ref
from .cgs import Cgs, parse_cgs
from .errors import FormulaError, ModelError
from .formula import (And, Atom, Bottom, Iff, Implies, Leaf, Nested, Next, Not, Or, PathFormula,
                      Prop, AtlQuant, QKind, Quant, StateFormula, Top, Until, bounded_eventually,
                      bounded_globally, bounded_until, conj, eventually, globally, sharing_pairs)
from .games import EVEN, ODD, ParityGame
from .oracles import eval_ltl_lasso

__all__ = [
    "RUNNING_CGM", "RUNNING_HAF", "gen_running_example", "gen_scheduler", "scheduler_witness",
    "TemplateKind", "TemplateParams", "gen_template", "sample_templates", "ab_often_apa",
    "running_body_dpa", "random_cgs", "random_bounded_body", "random_bounded_formula", "random_apa",
    "random_nba", "random_lasso", "random_game", "random_nnf_formula", "random_atl_formula",
]

# ----------------------------------------------------------- running example

RUNNING_CGM = """\
# A scheduler grants one of two workers' requests; s2 marks that a worker runs.
agents: sched W1 W2
actions:
  sched: g ng
  W1: r nr
  W2: r nr
states: s0 s1 s2
init: s0
aps: w
labels:
  s2: w
transitions:
  s0 g r nr -> s1
  s0 g nr r -> s1
  s0 g r r -> s2
  s0 g nr nr -> s0
  s0 ng * * -> s0
  s1 * * * -> s2
  s2 * * * -> s0
"""

RUNNING_HAF = "<<sched,W1,W2>> p . [[sched,W1]] q . (!w[q]) U (!w[q] & w[p])"


def gen_running_example() -> tuple[Cgs, StateFormula]:
    """The three-state scheduler/worker CGS and its optimality formula."""
    from .formula import parse_state_formula

    g = parse_cgs(RUNNING_CGM)
    return g, parse_state_formula(RUNNING_HAF, g.agents)


# ------------------------------------------------------------------ scheduler

_IDLE, _WAIT, _WORK = 0, 1, 2


def gen_scheduler(n: int) -> tuple[Cgs, StateFormula]:
    """Scheduler ``sched`` serving clients ``y1..yn`` and the starvation-freedom formula.

    Each client is idle, waiting or working.  An idle client may request
    (becoming waiting); a waiting client starts working when the scheduler
    grants it; a working client returns to idle.  ``wt_i`` marks that
    client ``i`` waits.
    """
    if n < 1:
        raise ModelError("the scheduler needs at least one client")
    clients = [f"y{i}" for i in range(1, n + 1)]
    agents = ["sched"] + clients
    actions = [[f"g{i}" for i in range(1, n + 1)]] + [["idle", "req"]] * n
    statuses = list(itertools.product((_IDLE, _WAIT, _WORK), repeat=n))
    index = {st: k for k, st in enumerate(statuses)}
    names = ["".join("iwk"[x] for x in st) for st in statuses]
    labels = [{f"wt{i + 1}" for i, x in enumerate(st) if x == _WAIT} for st in statuses]

    def step(k: int, acts: tuple) -> int:
        granted = int(acts[0][1:]) - 1
        nxt = []
        for i, x in enumerate(statuses[k]):
            if x == _IDLE:
                nxt.append(_WAIT if acts[i + 1] == "req" else _IDLE)
            elif x == _WAIT:
                nxt.append(_WORK if granted == i else _WAIT)
            else:
                nxt.append(_IDLE)
        return index[tuple(nxt)]

    g = Cgs.from_function(names, labels, 0, agents, actions, step,
                          aps={f"wt{i}" for i in range(1, n + 1)})
    body = conj(globally(Implies(Atom(f"wt{i}", "pi"), eventually(Not(Atom(f"wt{i}", "pi")))))
                for i in range(1, n + 1))
    return g, Quant(QKind.EXISTS, frozenset({"sched"}), frozenset(), "pi", Leaf(body))


def scheduler_witness(g: Cgs, phi: StateFormula) -> bool:
    """One-sided oracle: does granting the lowest waiting client satisfy the body?

    Fixes that positional scheduler strategy, builds the graph of states
    reachable under all client choices, and evaluates the body on one lasso
    per simple cycle (prefix: a shortest path to the cycle).  The body only
    fails on a path that eventually keeps some client waiting forever, and
    any such path yields a simple cycle of waiting states, so the check is
    complete for this positional strategy.
    """
    quant, body = phi, phi.body.body
    sched = g.agent_index("sched")
    clients = [a for a in g.agents if a != "sched"]

    def grant(s: int) -> str:
        waiting = sorted(int(ap[2:]) for ap in g.labels[s] if ap.startswith("wt"))
        return f"g{waiting[0]}" if waiting else g.actions[sched][0]

    graph = nx.DiGraph()
    graph.add_node(g.init)
    stack = [g.init]
    while stack:
        s = stack.pop()
        choices = [g.actions[g.agent_index(c)] for c in clients]
        for combo in itertools.product(*choices):
            vec = {"sched": grant(s), **dict(zip(clients, combo))}
            idx = tuple(g.action_index(a, vec[a]) for a in g.agents)
            t = int(g.kappa[(s,) + idx])
            if t not in graph:
                stack.append(t)
            graph.add_edge(s, t)
    paths = nx.single_source_shortest_path(graph, g.init)
    for cycle in nx.simple_cycles(graph):
        prefix = paths[cycle[0]][:-1]
        w = LassoWord(tuple((s,) for s in prefix), tuple((s,) for s in cycle))
        if not eval_ltl_lasso(body, w, (quant.var,), g.labels):
            return False
    return True


# ------------------------------------------------------------------ templates


class TemplateKind(enum.Enum):
    OPTIMALITY1 = "opt1"
    OPTIMALITY2 = "opt2"
    OPTIMALITY3 = "opt3"
    OBSERVATIONAL_DETERMINISM = "od"
    GOOD_ENOUGH = "ge"


@dataclass(frozen=True)
class TemplateParams:
    """Coalitions and propositions filling a template.

    ``coalition`` is A, ``other`` is A' (Optimality I/III), ``controller``
    the single agent of OD.  ``tgt``, ``h`` and ``inp`` name propositions.
    """

    coalition: frozenset = frozenset()
    other: frozenset = frozenset()
    controller: str | None = None
    tgt: str = "tgt"
    h: str = "h"
    inp: str = "in"
    vars: tuple = ("p", "q")
    extra: dict = field(default_factory=dict)


def _need_agents(g: Cgs, agents) -> None:
    unknown = set(agents) - set(g.agents)
    if unknown:
        raise FormulaError(f"unknown agent(s) {sorted(unknown)}")


def _need_ap(g: Cgs, ap: str) -> None:
    if ap not in g.aps:
        raise FormulaError(f"unknown atomic proposition {ap!r}")


def gen_template(kind: TemplateKind, g: Cgs, params: TemplateParams) -> StateFormula:
    """Instantiate one of the five hyperproperty templates on ``g``."""
    p, q = params.vars
    A, A2 = frozenset(params.coalition), frozenset(params.other)
    E, F_ = QKind.EXISTS, QKind.FORALL
    none = frozenset()
    if kind in (TemplateKind.OPTIMALITY1, TemplateKind.OPTIMALITY2, TemplateKind.OPTIMALITY3,
                TemplateKind.GOOD_ENOUGH):
        _need_agents(g, A | A2)
        _need_ap(g, params.tgt)
        tp, tq = Atom(params.tgt, p), Atom(params.tgt, q)
    if kind is TemplateKind.OPTIMALITY1:
        body = Until(Not(tq), And(Not(tq), tp))
        return Quant(E, A, none, p, Quant(F_, A2, none, q, Leaf(body)))
    if kind is TemplateKind.OPTIMALITY2:
        shared = sharing_pairs((i, j) for i in A for j in A if i < j)
        return Quant(E, A, shared, p, Quant(F_, A, none, q, Leaf(Until(Not(tq), tp))))
    if kind is TemplateKind.OPTIMALITY3:
        body = And(globally(Implies(tq, tp)), eventually(And(Not(tq), tp)))
        return Quant(E, A, none, p, Quant(F_, A2, none, q, Leaf(body)))
    if kind is TemplateKind.OBSERVATIONAL_DETERMINISM:
        if params.controller is None:
            raise FormulaError("observational determinism needs a controller agent")
        _need_agents(g, {params.controller})
        _need_ap(g, params.h)
        cnt = frozenset({params.controller})
        body = globally(Iff(Atom(params.h, p), Atom(params.h, q)))
        return Quant(E, cnt, none, p, Quant(E, cnt, none, q, Leaf(body)))
    if kind is TemplateKind.GOOD_ENOUGH:
        _need_ap(g, params.inp)
        same = globally(Iff(Atom(params.inp, p), Atom(params.inp, q)))
        body = Implies(And(same, eventually(tq)), eventually(tp))
        return Quant(E, A, none, p, Quant(E, none, none, q, Leaf(body)))
    raise FormulaError(f"unknown template {kind!r}")


def sample_templates(g: Cgs, kind: TemplateKind, count: int, seed: int,
                     aps: Sequence[str] | None = None) -> list[tuple[TemplateParams, StateFormula]]:
    """``count`` random instances of a template over the agents and propositions of ``g``."""
    rng = random.Random(seed)
    aps = sorted(g.aps) if aps is None else list(aps)
    if not aps:
        raise FormulaError("the model has no atomic propositions to sample from")
    agents = list(g.agents)
    out = []
    for _ in range(count):
        def subset(nonempty=True):
            while True:
                s = frozenset(a for a in agents if rng.random() < 0.5)
                if s or not nonempty:
                    return s
        params = TemplateParams(coalition=subset(), other=subset(),
                                controller=rng.choice(agents), tgt=rng.choice(aps),
                                h=rng.choice(aps), inp=rng.choice(aps))
        out.append((params, gen_template(kind, g, params)))
    return out


# -------------------------------------------------------------- hand-built fixtures


def ab_often_apa() -> Apa:
    """Alternating automaton over {a, b, c} accepting words with infinitely many a or b.

    The initial state keeps itself alive and spawns, at every step, one copy
    that must see an ``a`` or one that must see a ``b``; waiting copies have
    color 1, so each spawned obligation must be met.
    """
    alphabet = Alphabet.plain("abc")
    q0 = pb_and(ref(0), pb_or(ref(1), ref(2)))
    delta = ((q0, q0, q0),
             (ref(3), ref(1), ref(1)),
             (ref(2), ref(3), ref(2)),
             (ref(3), ref(3), ref(3)))
    return Apa(alphabet, (0, 1, 2), 0, delta, (0, 1, 1, 0), ("q0", "q1", "q2", "q3"))


def running_body_dpa(g: Cgs) -> Dpa:
    """Hand-built DPA over (p, q) for ``(!w[q]) U (!w[q] & w[p])`` on the running example.

    q0 waits (color 1), q1 is the accepting sink, q2 the rejecting sink.
    """
    alphabet = Alphabet.assignments(("p", "q"), g.num_states)
    keys, delta_rows = [], {}
    for s_p, s_q in alphabet.letters:
        wp, wq = "w" in g.labels[s_p], "w" in g.labels[s_q]
        keys.append((wp, wq))
    classes = sorted(set(keys))
    letter_class = tuple(classes.index(k) for k in keys)
    row0 = []
    for wp, wq in classes:
        row0.append(2 if wq else (1 if wp else 0))
    delta_rows = (tuple(row0), (1,) * len(classes), (2,) * len(classes))
    return Dpa(alphabet, letter_class, 0, delta_rows, (1, 0, 1), ("q0", "q1", "q2"))


# --------------------------------------------------------- random instances


def random_cgs(rng: random.Random, max_states: int = 3, max_agents: int = 3,
               max_actions: int = 2, aps: Sequence[str] = ("a", "b")) -> Cgs:
    """A random total CGS; action ``k`` of every agent is named ``x<k>``."""
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_agents)
    agents = [f"ag{i}" for i in range(1, k + 1)]
    actions = [[f"x{j}" for j in range(rng.randint(1, max_actions))] for _ in agents]
    labels = [{ap for ap in aps if rng.random() < 0.5} for _ in range(n)]
    table = {}
    for s in range(n):
        for combo in itertools.product(*actions):
            table[(s,) + combo] = rng.randrange(n)
    return Cgs.from_function([f"s{i}" for i in range(n)], labels, 0, agents, actions,
                             lambda s, acts: table[(s,) + acts],
                             aps=set(aps))


def random_bounded_body(rng: random.Random, vars: Sequence[str], aps: Sequence[str],
                        depth: int, size: int = 4) -> PathFormula:
    """Random path formula whose X-depth is at most ``depth``."""
    vars = list(vars)

    def atom():
        r = rng.random()
        if r < 0.06:
            return Top()
        if r < 0.12:
            return Bottom()
        return Atom(rng.choice(list(aps)), rng.choice(vars))

    def build(budget: int, d: int) -> PathFormula:
        if budget <= 1:
            return atom()
        r = rng.random()
        if r < 0.15:
            return Not(build(budget - 1, d))
        if r < 0.35 and d > 0:
            return Next(build(budget - 1, d - 1))
        if r < 0.45 and d > 0:
            k = rng.randint(1, d)
            return bounded_until(build(budget // 2, d - k), build(budget // 2, d - k), k)
        if r < 0.5 and d > 0:
            k = rng.randint(1, d)
            op = bounded_eventually if rng.random() < 0.5 else bounded_globally
            return op(build(budget - 1, d - k), k)
        ctor = rng.choice((And, Or, Implies, Iff, And, Or))
        left = rng.randint(1, budget - 1)
        return ctor(build(left, d), build(budget - left, d))

    return build(size, depth)


def _random_quant(rng: random.Random, g: Cgs, var: str, sharing: bool) -> tuple:
    coalition = frozenset(a for a in g.agents if rng.random() < 0.5)
    pairs = set()
    if sharing:
        for side in (sorted(coalition), sorted(set(g.agents) - coalition)):
            for i, j in itertools.combinations(side, 2):
                if rng.random() < 0.6:
                    pairs.add((i, j))
    kind = QKind.EXISTS if rng.random() < 0.5 else QKind.FORALL
    return kind, coalition, sharing_pairs(pairs), var


def random_bounded_formula(rng: random.Random, g: Cgs, max_quants: int = 2, depth: int = 3,
                           sharing: bool = False, nested: bool = False,
                           size: int = 5) -> StateFormula:
    """Random closed formula with a bounded body over the propositions of ``g``."""
    nq = rng.randint(1, max_quants)
    vars = [f"v{i}" for i in range(1, nq + 1)]
    aps = sorted(g.aps)
    body = random_bounded_body(rng, vars, aps, depth, size)
    if nested:
        inner = random_bounded_formula(rng, g, 1, min(depth, 1), sharing, False, 3)
        body = rng.choice((And, Or))(body, Nested(inner, rng.choice(vars)))
    phi: StateFormula = Leaf(body)
    for v in reversed(vars):
        phi = Quant(*_random_quant(rng, g, v, sharing), phi)
    return phi


def random_nnf_formula(rng: random.Random, vars: Sequence[str], aps: Sequence[str],
                       size: int = 5) -> PathFormula:
    """Random path formula with unbounded operators (not necessarily in NNF)."""
    from .formula import Release

    vars = list(vars)

    def build(budget: int) -> PathFormula:
        if budget <= 1:
            r = rng.random()
            if r < 0.05:
                return Top()
            if r < 0.1:
                return Bottom()
            return Atom(rng.choice(list(aps)), rng.choice(vars))
        r = rng.random()
        if r < 0.15:
            return Not(build(budget - 1))
        if r < 0.3:
            return Next(build(budget - 1))
        if r < 0.4:
            return eventually(build(budget - 1))
        if r < 0.5:
            return globally(build(budget - 1))
        ctor = rng.choice((And, Or, Until, Release, Implies, Iff))
        left = rng.randint(1, budget - 1)
        return ctor(build(left), build(budget - left))

    return build(size)


def random_atl_formula(rng: random.Random, g: Cgs, depth: int = 2, size: int = 4,
                       max_nesting: int = 1) -> AtlQuant:
    """Random ATL* state formula with bounded path bodies."""
    aps = sorted(g.aps)

    def path(budget: int, d: int, nest: int) -> PathFormula:
        if budget <= 1:
            if nest > 0 and rng.random() < 0.25:
                return state(nest - 1)
            return Prop(rng.choice(aps))
        r = rng.random()
        if r < 0.2:
            return Not(path(budget - 1, d, nest))
        if r < 0.45 and d > 0:
            return Next(path(budget - 1, d - 1, nest))
        ctor = rng.choice((And, Or, Implies))
        left = rng.randint(1, budget - 1)
        return ctor(path(left, d, nest), path(budget - left, d, nest))

    def state(nest: int) -> AtlQuant:
        kind = QKind.EXISTS if rng.random() < 0.5 else QKind.FORALL
        coalition = frozenset(a for a in g.agents if rng.random() < 0.5)
        return AtlQuant(kind, coalition, path(size, depth, nest))

    return state(max_nesting)


def random_apa(rng: random.Random, n: int, k: int, max_color: int, depth: int = 2) -> Apa:
    """Random alternating parity automaton over the plain alphabet ``0..k-1``."""
    from .automata.base import FALSE, TRUE

    def formula(d: int):
        if d == 0 or rng.random() < 0.35:
            r = rng.random()
            if r < 0.04:
                return TRUE
            if r < 0.08:
                return FALSE
            return ref(rng.randrange(n))
        parts = [formula(d - 1), formula(d - 1)]
        return pb_and(*parts) if rng.random() < 0.5 else pb_or(*parts)

    delta = tuple(tuple(formula(depth) for _ in range(k)) for _ in range(n))
    colors = tuple(rng.randint(0, max_color) for _ in range(n))
    return Apa(Alphabet.plain(range(k)), tuple(range(k)), 0, delta, colors)


def random_nba(rng: random.Random, n: int, k: int, density: float = 0.35) -> Nba:
    """Random NBA over the plain alphabet ``0..k-1``."""
    delta = tuple(tuple(frozenset(p for p in range(n) if rng.random() < density)
                        for _ in range(k)) for _ in range(n))
    accepting = frozenset(q for q in range(n) if rng.random() < 0.4)
    return Nba(Alphabet.plain(range(k)), tuple(range(k)), 0, delta, accepting)


def random_lasso(rng: random.Random, letters: Sequence, max_prefix: int = 4,
                 max_cycle: int = 3) -> LassoWord:
    letters = list(letters)
    prefix = tuple(rng.choice(letters) for _ in range(rng.randint(0, max_prefix)))
    cycle = tuple(rng.choice(letters) for _ in range(rng.randint(1, max_cycle)))
    return LassoWord(prefix, cycle)


def random_game(rng: random.Random, n: int, max_color: int, max_out: int = 3,
                dead_ends: bool = False) -> ParityGame:
    """Random parity game; without ``dead_ends`` every position has a successor."""
    owner, color, succ = [], [], []
    for _ in range(n):
        owner.append(EVEN if rng.random() < 0.5 else ODD)
        color.append(rng.randint(0, max_color))
        lo = 0 if dead_ends else 1
        succ.append(tuple(rng.randrange(n) for _ in range(rng.randint(lo, max_out))))
    return ParityGame(tuple(owner), tuple(color), tuple(succ))
