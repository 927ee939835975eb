"""Concurrent game structures and the ``.cgm`` model format.

States, agents and actions are referenced by name externally and by dense
index internally.  The transition function is a dense integer array indexed
by ``(state, action_of_agent_0, action_of_agent_1, ...)``.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from networkx.utils import UnionFind

from .errors import ModelError

__all__ = [
    "Cgs", "parse_cgs", "load_cgs", "to_cgm", "successor", "play_prefix",
    "enumerate_vectors", "strategic_successors", "reroute",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


@dataclass(frozen=True, eq=False)
class Cgs:
    """A finite concurrent game structure with a total deterministic kappa."""

    state_names: tuple
    labels: tuple
    init: int
    agents: tuple
    actions: tuple
    kappa: np.ndarray
    aps: frozenset
    _state_index: dict = field(init=False, repr=False)
    _agent_index: dict = field(init=False, repr=False)
    _action_index: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not self.state_names:
            raise ModelError("a game structure needs at least one state")
        if not 0 <= self.init < len(self.state_names):
            raise ModelError("initial state out of range")
        if len(set(self.state_names)) != len(self.state_names):
            raise ModelError("duplicate state names")
        if len(set(self.agents)) != len(self.agents):
            raise ModelError("duplicate agent names")
        if len(self.actions) != len(self.agents):
            raise ModelError("every agent needs an action set")
        for agent, acts in zip(self.agents, self.actions):
            if not acts:
                raise ModelError(f"agent {agent!r} has no actions")
            if len(set(acts)) != len(acts):
                raise ModelError(f"agent {agent!r} has duplicate actions")
        shape = (len(self.state_names),) + tuple(len(a) for a in self.actions)
        kappa = np.asarray(self.kappa, dtype=np.int32)
        if kappa.shape != shape:
            raise ModelError(f"transition table has shape {kappa.shape}, expected {shape}")
        if kappa.size and (kappa.min() < 0 or kappa.max() >= len(self.state_names)):
            raise ModelError("transition table is not total over the state set")
        kappa.setflags(write=False)
        for i, lab in enumerate(self.labels):
            if not set(lab) <= set(self.aps):
                raise ModelError(f"state {self.state_names[i]!r} carries undeclared propositions")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "labels", tuple(frozenset(l) for l in self.labels))
        object.__setattr__(self, "aps", frozenset(self.aps))
        object.__setattr__(self, "_state_index", {n: i for i, n in enumerate(self.state_names)})
        object.__setattr__(self, "_agent_index", {n: i for i, n in enumerate(self.agents)})
        object.__setattr__(self, "_action_index",
                           tuple({a: k for k, a in enumerate(acts)} for acts in self.actions))

    # construction helpers

    @classmethod
    def from_function(cls, state_names: Sequence[str], labels: Sequence[Iterable[str]],
                      init: int | str, agents: Sequence[str],
                      actions: Sequence[Sequence[str]],
                      step: Callable[[int, tuple], int | str],
                      aps: Iterable[str] | None = None) -> "Cgs":
        """Build a CGS from ``step(state_index, action_name_tuple) -> state``."""
        state_names = tuple(state_names)
        index = {n: i for i, n in enumerate(state_names)}
        if isinstance(init, str):
            init = index[init]
        shape = (len(state_names),) + tuple(len(a) for a in actions)
        kappa = np.empty(shape, dtype=np.int32)
        for s in range(len(state_names)):
            for combo in itertools.product(*(range(len(a)) for a in actions)):
                names = tuple(actions[k][c] for k, c in enumerate(combo))
                t = step(s, names)
                kappa[(s,) + combo] = index[t] if isinstance(t, str) else t
        labels = tuple(frozenset(l) for l in labels)
        if aps is None:
            aps = frozenset().union(*labels) if labels else frozenset()
        return cls(state_names, labels, init, tuple(agents),
                   tuple(tuple(a) for a in actions), kappa, frozenset(aps))

    # queries

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    def state_index(self, name: str) -> int:
        try:
            return self._state_index[name]
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None

    def agent_index(self, name: str) -> int:
        try:
            return self._agent_index[name]
        except KeyError:
            raise ModelError(f"unknown agent {name!r}") from None

    def action_index(self, agent: str, action: str) -> int:
        try:
            return self._action_index[self.agent_index(agent)][action]
        except KeyError:
            raise ModelError(f"unknown action {action!r} for agent {agent!r}") from None

    def has_label(self, state: int, ap: str) -> bool:
        return ap in self.labels[state]

    def successors(self, state: int) -> set[int]:
        return set(np.unique(self.kappa[state]).tolist())

    def reachable(self, source: int | None = None) -> list[int]:
        """States reachable from ``source`` (default: init), sorted by index."""
        start = self.init if source is None else source
        seen = {start}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for t in self.successors(s):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return sorted(seen)

    def with_labels(self, ap: str, states: Iterable[int]) -> "Cgs":
        """Copy of this CGS where ``ap`` additionally holds exactly in ``states``."""
        states = set(states)
        labels = tuple((lab | {ap}) if i in states else (lab - {ap})
                       for i, lab in enumerate(self.labels))
        return Cgs(self.state_names, labels, self.init, self.agents, self.actions,
                   self.kappa, self.aps | {ap})

    def with_init(self, init: int) -> "Cgs":
        return Cgs(self.state_names, self.labels, init, self.agents, self.actions,
                   self.kappa, self.aps)


# ------------------------------------------------------------ action vectors


def _vector_indices(g: Cgs, v) -> tuple:
    if isinstance(v, Mapping):
        missing = [a for a in g.agents if a not in v]
        if missing:
            raise ModelError(f"partial action vector: no action for {missing}")
        return tuple(g.action_index(a, v[a]) for a in g.agents)
    v = tuple(v)
    if len(v) != len(g.agents):
        raise ModelError(f"partial action vector: expected {len(g.agents)} actions")
    return tuple(g.action_index(a, x) if isinstance(x, str) else int(x)
                 for a, x in zip(g.agents, v))


def successor(g: Cgs, s: int, v) -> int:
    """``kappa(s, v)`` for a full action vector given as a mapping or tuple."""
    return int(g.kappa[(s,) + _vector_indices(g, v)])


def play_prefix(g: Cgs, s: int, strats: Mapping[str, Callable], horizon: int) -> list[int]:
    """First ``horizon + 1`` states of the play from ``s`` under ``strats``.

    A strategy maps the history (tuple of state indices, nonempty) to an
    action name; plain dicts keyed by history are accepted as well.
    """
    path = [s]
    for _ in range(horizon):
        hist = tuple(path)
        vec = {}
        for agent in g.agents:
            f = strats[agent]
            vec[agent] = f[hist] if isinstance(f, Mapping) else f(hist)
        path.append(successor(g, path[-1], vec))
    return path


def _sharing_classes(g: Cgs, coalition: Iterable[str], xi) -> list[list[str]]:
    members = [a for a in g.agents if a in set(coalition)]
    uf = UnionFind(members)
    inside = set(members)
    for i, j in xi:
        if i in inside and j in inside:
            uf.union(i, j)
    order = {a: k for k, a in enumerate(g.agents)}
    classes = [sorted(c, key=order.get) for c in uf.to_sets()]
    classes.sort(key=lambda c: order[c[0]])
    return classes


def default_action(g: Cgs, agent: str) -> str:
    """Action an agent falls back to when asked to play a name it lacks."""
    return min(g.actions[g.agent_index(agent)])


def _class_actions(g: Cgs, cls: list[str]) -> list[str]:
    names = []
    for a in cls:
        for x in g.actions[g.agent_index(a)]:
            if x not in names:
                names.append(x)
    return names


def enumerate_vectors(g: Cgs, coalition: Iterable[str], xi=frozenset()) -> list[dict]:
    """All distinct partial action vectors over ``coalition`` that respect ``xi``.

    Agents of one sharing class pick a common name from the union of their
    action sets; an agent lacking that name plays its default action (the
    smallest name it owns), just as protocol-disallowed actions are
    rerouted.  Pairs of ``xi`` with an agent outside ``coalition`` are
    ignored.  The order is lexicographic in agent order, then declared
    action order.
    """
    classes = _sharing_classes(g, coalition, xi)
    choices = [_class_actions(g, c) for c in classes]
    order = {a: k for k, a in enumerate(g.agents)}
    out = []
    seen = set()
    for combo in itertools.product(*choices):
        vec = {}
        for cls, act in zip(classes, combo):
            for a in cls:
                own = g.actions[g.agent_index(a)]
                vec[a] = act if act in own else default_action(g, a)
        vec = dict(sorted(vec.items(), key=lambda kv: order[kv[0]]))
        key = tuple(vec.items())
        if key not in seen:
            seen.add(key)
            out.append(vec)
    return out


def strategic_successors(g: Cgs, s: int, coalition: Iterable[str], xi=frozenset()) -> list[frozenset]:
    """For each xi-respecting coalition vector, the successor set over all opponent vectors.

    The list follows the order of ``enumerate_vectors`` for the coalition.
    """
    coalition = set(coalition)
    opponents = [a for a in g.agents if a not in coalition]
    mine = enumerate_vectors(g, coalition, xi)
    theirs = enumerate_vectors(g, opponents, xi)
    out = []
    for a in mine:
        targets = set()
        for b in theirs:
            targets.add(successor(g, s, {**a, **b}))
        out.append(frozenset(targets))
    return out


def reroute(g_actions: Sequence[Sequence[str]], allowed: Sequence[set | None], combo: tuple) -> tuple:
    """Replace each disallowed action index by the lexicographically smallest allowed one."""
    out = []
    for k, c in enumerate(combo):
        ok = allowed[k]
        if ok is None or g_actions[k][c] in ok:
            out.append(c)
        else:
            best = min(ok)
            out.append(list(g_actions[k]).index(best))
    return tuple(out)


# --------------------------------------------------------------- .cgm format

_SECTIONS = ("agents", "actions", "states", "init", "aps", "labels", "transitions", "protocol")


def _check_ident(tok: str, what: str, lineno: int) -> str:
    if not _IDENT.fullmatch(tok):
        raise ModelError(f"line {lineno}: invalid {what} name {tok!r}")
    return tok


def parse_cgs(text: str) -> Cgs:
    """Parse a ``.cgm`` model description (see ``docs/cgm-format.md``)."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if not line[0].isspace():
            m = re.fullmatch(r"(\w+)\s*:\s*(.*)", line)
            if m is None or m.group(1) not in _SECTIONS:
                raise ModelError(f"line {lineno}: expected a section header, found {line.strip()!r}")
            current = m.group(1)
            if current in sections:
                raise ModelError(f"line {lineno}: duplicate section {current!r}")
            sections[current] = []
            if m.group(2).strip():
                sections[current].append((lineno, m.group(2).strip()))
        else:
            if current is None:
                raise ModelError(f"line {lineno}: entry outside of any section")
            sections[current].append((lineno, line.strip()))

    for required in ("agents", "actions", "states", "transitions"):
        if required not in sections:
            raise ModelError(f"missing section {required!r}")
    if not sections.get("init"):
        raise ModelError("no initial state declared")

    def words(name):
        return [(ln, w) for ln, line in sections.get(name, []) for w in line.replace(",", " ").split()]

    agents = [_check_ident(w, "agent", ln) for ln, w in words("agents")]
    if not agents:
        raise ModelError("agent set must be nonempty")
    if len(set(agents)) != len(agents):
        raise ModelError("duplicate agent names")
    states = [_check_ident(w, "state", ln) for ln, w in words("states")]
    if len(set(states)) != len(states):
        raise ModelError("duplicate state names")
    sidx = {n: i for i, n in enumerate(states)}

    def state_of(name, ln):
        if name not in sidx:
            raise ModelError(f"line {ln}: unknown state {name!r}")
        return sidx[name]

    actions: dict[str, list[str]] = {}
    for ln, line in sections["actions"]:
        m = re.fullmatch(r"(\S+)\s*:\s*(.*)", line)
        if m is None:
            raise ModelError(f"line {ln}: expected 'agent: action ...'")
        agent = m.group(1)
        if agent not in agents:
            raise ModelError(f"line {ln}: unknown agent {agent!r}")
        if agent in actions:
            raise ModelError(f"line {ln}: actions for {agent!r} declared twice")
        acts = [_check_ident(a, "action", ln) for a in m.group(2).replace(",", " ").split()]
        if not acts or len(set(acts)) != len(acts):
            raise ModelError(f"line {ln}: action set of {agent!r} must be nonempty and distinct")
        actions[agent] = acts
    for agent in agents:
        if agent not in actions:
            raise ModelError(f"no actions declared for agent {agent!r}")
    action_lists = [actions[a] for a in agents]

    init_words = words("init")
    if len(init_words) != 1:
        raise ModelError("exactly one initial state expected")
    init = state_of(init_words[0][1], init_words[0][0])

    declared_aps = None
    if "aps" in sections:
        declared_aps = {_check_ident(w, "proposition", ln) for ln, w in words("aps")}
    labels = [set() for _ in states]
    for ln, line in sections.get("labels", []):
        m = re.fullmatch(r"(\S+)\s*:\s*(.*)", line)
        if m is None:
            raise ModelError(f"line {ln}: expected 'state: prop ...'")
        s = state_of(m.group(1), ln)
        for ap in m.group(2).replace(",", " ").split():
            _check_ident(ap, "proposition", ln)
            if declared_aps is not None and ap not in declared_aps:
                raise ModelError(f"line {ln}: undeclared proposition {ap!r}")
            labels[s].add(ap)
    aps = declared_aps if declared_aps is not None else set().union(*labels)

    # protocol: allowed[state][agent_index] = set of allowed actions or None
    allowed = [[None] * len(agents) for _ in states]
    for ln, line in sections.get("protocol", []):
        m = re.fullmatch(r"(\S+)\s+(\S+)\s*:\s*(.*)", line)
        if m is None:
            raise ModelError(f"line {ln}: expected 'state agent: action ...'")
        src, agent = m.group(1), m.group(2)
        if agent not in agents:
            raise ModelError(f"line {ln}: unknown agent {agent!r}")
        k = agents.index(agent)
        acts = set(m.group(3).replace(",", " ").split())
        if not acts:
            raise ModelError(f"line {ln}: protocol must allow at least one action")
        bad = acts - set(action_lists[k])
        if bad:
            raise ModelError(f"line {ln}: unknown action(s) {sorted(bad)} for {agent!r}")
        targets = range(len(states)) if src == "*" else [state_of(src, ln)]
        for s in targets:
            allowed[s][k] = acts if allowed[s][k] is None else allowed[s][k] & acts
            if not allowed[s][k]:
                raise ModelError(f"line {ln}: protocol leaves {agent!r} without actions")

    shape = (len(states),) + tuple(len(a) for a in action_lists)
    kappa = np.full(shape, -1, dtype=np.int32)
    owner = np.zeros(shape, dtype=np.int32)
    for ln, line in sections["transitions"]:
        m = re.fullmatch(r"(.*?)\s*->\s*(\S+)", line)
        if m is None:
            raise ModelError(f"line {ln}: expected 'state action ... -> state'")
        parts = m.group(1).split()
        if len(parts) != len(agents) + 1:
            raise ModelError(f"line {ln}: expected a source state and {len(agents)} actions")
        target = state_of(m.group(2), ln)
        idx = [slice(None) if parts[0] == "*" else state_of(parts[0], ln)]
        for k, act in enumerate(parts[1:]):
            if act == "*":
                idx.append(slice(None))
            elif act in action_lists[k]:
                idx.append(action_lists[k].index(act))
            else:
                raise ModelError(f"line {ln}: unknown action {act!r} for agent {agents[k]!r}")
        idx = tuple(idx)
        if np.any(owner[idx]):
            other = int(np.max(owner[idx]))
            raise ModelError(f"line {ln}: transition row overlaps the row on line {other}")
        kappa[idx] = target
        owner[idx] = ln

    for s in range(len(states)):
        if all(a is None for a in allowed[s]):
            continue
        for combo in itertools.product(*(range(len(a)) for a in action_lists)):
            routed = reroute(action_lists, allowed[s], combo)
            if routed != combo:
                kappa[(s,) + combo] = kappa[(s,) + routed]

    missing = np.argwhere(kappa < 0)
    if len(missing):
        first = missing[0]
        vec = tuple(action_lists[k][c] for k, c in enumerate(first[1:]))
        raise ModelError(f"transition function is not total: no row for state "
                         f"{states[first[0]]!r} under {vec}")
    return Cgs(tuple(states), tuple(frozenset(l) for l in labels), init, tuple(agents),
               tuple(tuple(a) for a in action_lists), kappa, frozenset(aps))


def load_cgs(path) -> Cgs:
    with open(path, encoding="ascii") as fh:
        return parse_cgs(fh.read())


def to_cgm(g: Cgs) -> str:
    """Serialize ``g`` in the ``.cgm`` format; parse_cgs(to_cgm(g)) rebuilds it."""
    lines = [f"agents: {' '.join(g.agents)}", "actions:"]
    for agent, acts in zip(g.agents, g.actions):
        lines.append(f"  {agent}: {' '.join(acts)}")
    lines.append(f"states: {' '.join(g.state_names)}")
    lines.append(f"init: {g.state_names[g.init]}")
    if g.aps:
        lines.append(f"aps: {' '.join(sorted(g.aps))}")
    lines.append("labels:")
    for name, lab in zip(g.state_names, g.labels):
        if lab:
            lines.append(f"  {name}: {' '.join(sorted(lab))}")
    lines.append("transitions:")
    stars = " ".join("*" for _ in g.agents)
    for s, name in enumerate(g.state_names):
        table = g.kappa[s]
        if np.all(table == table.flat[0]):
            lines.append(f"  {name} {stars} -> {g.state_names[int(table.flat[0])]}")
            continue
        for combo in itertools.product(*(range(len(a)) for a in g.actions)):
            acts = " ".join(g.actions[k][c] for k, c in enumerate(combo))
            lines.append(f"  {name} {acts} -> {g.state_names[int(table[combo])]}")
    return "\n".join(lines) + "\n"
