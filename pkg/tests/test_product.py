import itertools
import random

import pytest

from hymas.automata import (Alphabet, Dpa, LassoWord, apa_member_lasso, apa_to_dpa,
                            dpa_member_lasso, ltl_to_apa)
from hymas.bench import running_body_dpa, random_bounded_formula, random_cgs, random_lasso
from hymas.checker import EMPTY_WORD
from hymas.errors import AlphabetError
from hymas.formula import QKind, quantifier_prefix, to_nnf
from hymas.oracles import eval_bounded_hyper
from hymas.product import ProductSpec, build_product


def inner_spec(g, phi, state=0):
    quants, _ = quantifier_prefix(phi)
    q = quants[1]
    return ProductSpec(g, state, q.kind, q.coalition, q.sharing, q.var)


def p_lassos(max_prefix=3, max_cycle=2, states=3):
    for lp in range(max_prefix + 1):
        for lc in range(1, max_cycle + 1):
            for p in itertools.product(range(states), repeat=lp):
                for c in itertools.product(range(states), repeat=lc):
                    yield LassoWord(tuple((x,) for x in p), tuple((x,) for x in c))


def test_inner_product_structure(running):
    g, phi = running
    a = build_product(inner_spec(g, phi), running_body_dpa(g))
    assert a.alphabet.vars == ("p",)
    assert a.names[a.init] == "(0,s0)"
    f = a.step(a.init, (0,))
    assert f.op == "and"
    branches = {frozenset(a.names[c.state] for c in part.children) if part.op == "or"
                else frozenset({a.names[part.state]}) for part in f.children}
    # sched grants and W1 requests: W2 picks between s1 and s2
    assert frozenset({"(0,s1)", "(0,s2)"}) in branches
    for q in range(a.num_states):
        inner_q = int(a.names[q][1:].split(",")[0])
        assert a.colors[q] == running_body_dpa(g).colors[inner_q]


def test_inner_product_language(running):
    g, phi = running
    d = apa_to_dpa(build_product(inner_spec(g, phi), running_body_dpa(g)))
    for w in p_lassos():
        expected = 2 in (w.letter(0)[0], w.letter(1)[0])
        assert dpa_member_lasso(d, w) == expected


def test_outer_product_accepts_empty_assignment(running):
    g, phi = running
    quants, _ = quantifier_prefix(phi)
    c = apa_to_dpa(build_product(inner_spec(g, phi), running_body_dpa(g)))
    q = quants[0]
    d = build_product(ProductSpec(g, 0, q.kind, q.coalition, q.sharing, q.var), c)
    assert len(d.alphabet) == 1 and d.alphabet.vars == ()
    assert apa_member_lasso(d, EMPTY_WORD)


def universal_dpa(g, vars_):
    alphabet = Alphabet.assignments(vars_, g.num_states)
    return Dpa(alphabet, (0,) * len(alphabet), 0, ((0,),), (0,))


@pytest.mark.parametrize("kind", list(QKind))
def test_universal_inner(running_cgs, kind):
    g = running_cgs
    spec = ProductSpec(g, 0, kind, frozenset({"sched"}), frozenset(), "q")
    a = build_product(spec, universal_dpa(g, ("p", "q")))
    rng = random.Random(0)
    for _ in range(20):
        assert apa_member_lasso(a, random_lasso(rng, a.alphabet.letters))


def test_alphabet_errors(running_cgs):
    g = running_cgs
    spec = ProductSpec(g, 0, QKind.EXISTS, frozenset(), frozenset(), "r")
    with pytest.raises(AlphabetError):
        build_product(spec, universal_dpa(g, ("p", "q")))
    small = Dpa(Alphabet.assignments(("q",), 2), (0, 0), 0, ((0,),), (0,))
    spec = ProductSpec(g, 0, QKind.EXISTS, frozenset(), frozenset(), "q")
    with pytest.raises(AlphabetError):
        build_product(spec, small)


def test_single_quantifier_matches_oracle():
    rng = random.Random(1)
    checked = 0
    while checked < 60:
        g = random_cgs(rng)
        phi = random_bounded_formula(rng, g, max_quants=1, depth=3, sharing=rng.random() < 0.5)
        (q,), body = quantifier_prefix(phi)
        d = apa_to_dpa(ltl_to_apa(to_nnf(body), [q.var], g))
        for s in range(g.num_states):
            a = build_product(ProductSpec(g, s, q.kind, q.coalition, q.sharing, q.var), d)
            assert apa_member_lasso(a, EMPTY_WORD) == eval_bounded_hyper(g, s, phi)
        checked += 1


def test_sharing_shrinks_existential_language():
    rng = random.Random(2)
    from hymas.bench import random_nnf_formula
    for _ in range(40):
        g = random_cgs(rng, max_states=3, max_agents=3, max_actions=2)
        if len(g.agents) < 2:
            continue
        body = to_nnf(random_nnf_formula(rng, ("p", "q"), ["a", "b"], size=4))
        inner = apa_to_dpa(ltl_to_apa(body, ["p", "q"], g))
        team = frozenset(g.agents[:2])
        free = ProductSpec(g, 0, QKind.EXISTS, team, frozenset(), "q")
        tied = ProductSpec(g, 0, QKind.EXISTS, team, frozenset({tuple(sorted(team))}), "q")
        a_free, a_tied = build_product(free, inner), build_product(tied, inner)
        for _ in range(20):
            w = random_lasso(rng, a_free.alphabet.letters, 3, 2)
            in_tied, in_free = apa_member_lasso(a_tied, w), apa_member_lasso(a_free, w)
            assert in_free or not in_tied


def test_sharing_can_strictly_shrink():
    # two agents reach the a-state only by choosing different actions
    from hymas.cgs import Cgs
    g = Cgs.from_function(["s0", "s1", "s2"], [set(), {"a"}, set()], 0, ["A", "B"],
                          [["x", "y"], ["x", "y"]],
                          lambda s, acts: 0 if s else (1 if acts[0] != acts[1] else 2),
                          aps={"a"})
    from hymas.formula import parse_path_formula
    body = parse_path_formula("X a[q]", ["p", "q"])
    inner = apa_to_dpa(ltl_to_apa(body, ["p", "q"], g))
    team = frozenset({"A", "B"})
    free = build_product(ProductSpec(g, 0, QKind.EXISTS, team, frozenset(), "q"), inner)
    tied = build_product(ProductSpec(g, 0, QKind.EXISTS, team, frozenset({("A", "B")}), "q"),
                         inner)
    w = LassoWord((), ((0,),))
    assert apa_member_lasso(free, w) and not apa_member_lasso(tied, w)
