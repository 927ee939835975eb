import itertools
import random

import pytest

from hymas.automata import (FALSE, TRUE, Alphabet, Apa, Dpa, LassoWord, Nba, apa_member_lasso,
                            apa_to_dpa, determinize, dpa_member_lasso, dump_automaton, ltl_to_apa,
                            nba_member_lasso, parity_to_buchi, ref, remove_alternation)
from hymas.bench import ab_often_apa, running_body_dpa, random_apa, random_lasso, random_nba
from hymas.cgs import Cgs
from hymas.errors import AlphabetError, HymasError
from hymas.formula import parse_path_formula, to_nnf
from hymas.bench import random_nnf_formula
from hymas.oracles import eval_ltl_lasso


def all_lassos(letters, max_prefix, max_cycle):
    letters = list(letters)
    for lp in range(max_prefix + 1):
        for lc in range(1, max_cycle + 1):
            for p in itertools.product(letters, repeat=lp):
                for c in itertools.product(letters, repeat=lc):
                    yield LassoWord(p, c)


def two_state_cgs():
    return Cgs.from_function(["u", "v"], [{"a"}, {"b"}], 0, ["A"], [["x"]],
                             lambda s, acts: s, aps={"a", "b"})


def abc_cgs():
    return Cgs.from_function(["sa", "sb", "sc"], [{"a"}, {"b"}, {"c"}], 0, ["A"], [["x"]],
                             lambda s, acts: s)


# ------------------------------------------------------------ a or b infinitely often


def ab_often_language(w):
    return any(x in "ab" for x in w.cycle)


@pytest.mark.parametrize("prefix, cycle, expected", [
    ("", "b", True), ("", "c", False), ("", "bc", True), ("a", "c", False), ("", "abc", True),
])
def test_ab_often_memberships(prefix, cycle, expected):
    assert apa_member_lasso(ab_often_apa(), LassoWord(tuple(prefix), tuple(cycle))) is expected


def test_ab_often_every_stage():
    a = ab_often_apa()
    n = remove_alternation(a)
    d = apa_to_dpa(a)
    for w in all_lassos("abc", 2, 2):
        expected = ab_often_language(w)
        assert apa_member_lasso(a, w) == expected
        assert nba_member_lasso(n, w) == expected
        assert dpa_member_lasso(d, w) == expected


def test_ltl_gf_matches_ab_often():
    g = abc_cgs()
    psi = to_nnf(parse_path_formula("G F (a[p] | b[p])", ["p"]))
    a = ltl_to_apa(psi, ["p"], g)
    sym = {"a": (0,), "b": (1,), "c": (2,)}
    for w in all_lassos("abc", 2, 2):
        lw = LassoWord(tuple(sym[x] for x in w.prefix), tuple(sym[x] for x in w.cycle))
        assert apa_member_lasso(a, lw) == ab_often_language(w)


# ----------------------------------------------------------- LTL to APA


def test_ltl_true_is_universal():
    g = two_state_cgs()
    a = ltl_to_apa(parse_path_formula("true", ["p"]), ["p"], g)
    rng = random.Random(0)
    for _ in range(20):
        assert apa_member_lasso(a, random_lasso(rng, a.alphabet.letters))


def test_ltl_colors():
    g = two_state_cgs()
    a = ltl_to_apa(to_nnf(parse_path_formula("a[p] U b[p]", ["p"])), ["p"], g)
    assert set(a.colors) <= {0, 1}
    assert a.colors[a.init] == 1


def test_ltl_rejects_non_nnf_and_free_vars():
    g = two_state_cgs()
    with pytest.raises(HymasError):
        ltl_to_apa(parse_path_formula("!(a[p] U b[p])", ["p"]), ["p"], g)
    with pytest.raises(HymasError):
        ltl_to_apa(parse_path_formula("a[q]", ["q"]), ["p"], g)


def test_ltl_random_against_oracle():
    g = two_state_cgs()
    vars_ = ("p", "q")
    rng = random.Random(1)
    for _ in range(100):
        psi = to_nnf(random_nnf_formula(rng, vars_, ["a", "b"], size=rng.randint(1, 6)))
        a = ltl_to_apa(psi, vars_, g)
        for _ in range(20):
            w = random_lasso(rng, a.alphabet.letters)
            assert apa_member_lasso(a, w) == eval_ltl_lasso(psi, w, vars_, g.labels)


def test_ltl_exhaustive_small_lassos():
    g = two_state_cgs()
    vars_ = ("p", "q")
    rng = random.Random(2)
    words = list(all_lassos(Alphabet.assignments(vars_, 2).letters, 3, 2))
    fixed = ["a[p] U b[q]", "G F a[p]", "F G (a[p] <-> b[q])", "X (a[p] R b[q])",
             "!(G (a[p] -> X b[q]))", "(a[p] U X b[q]) | G !a[q]"]
    formulas = [parse_path_formula(t, vars_) for t in fixed]
    formulas += [random_nnf_formula(rng, vars_, ["a", "b"], size=5) for _ in range(6)]
    for psi in formulas:
        nnf = to_nnf(psi)
        a = ltl_to_apa(nnf, vars_, g)
        d = apa_to_dpa(a)
        for w in words:
            expected = eval_ltl_lasso(psi, w, vars_, g.labels)
            assert dpa_member_lasso(d, w) == expected
        for w in words[::7]:
            assert apa_member_lasso(a, w) == eval_ltl_lasso(psi, w, vars_, g.labels)


# ----------------------------------------------------------- dead ends


def _single(f, color):
    return Apa(Alphabet.plain("x"), (0,), 0, ((f,),), (color,))


def test_false_leaf_rejects_and_true_leaf_accepts():
    w = LassoWord((), ("x",))
    assert not apa_member_lasso(_single(FALSE, 0), w)
    assert apa_member_lasso(_single(TRUE, 1), w)
    assert dpa_member_lasso(apa_to_dpa(_single(FALSE, 0)), w) is False
    assert dpa_member_lasso(apa_to_dpa(_single(TRUE, 1)), w) is True


# ---------------------------------------------------------- stage agreement


def test_parity_to_buchi_examples():
    rng = random.Random(3)
    buchi = random_apa(rng, 3, 2, 1)
    assert parity_to_buchi(buchi) is buchi or parity_to_buchi(buchi).colors == buchi.colors
    even = _single(ref(0), 2)
    b = parity_to_buchi(even)
    assert set(b.colors) <= {0, 1}
    for w in all_lassos("x", 1, 1):
        assert apa_member_lasso(b, w)


def test_parity_to_buchi_stage_agreement():
    rng = random.Random(4)
    for _ in range(100):
        a = random_apa(rng, rng.randint(1, 5), 2, 3)
        b = parity_to_buchi(a)
        assert set(b.colors) <= {0, 1}
        for _ in range(20):
            w = random_lasso(rng, range(2))
            assert apa_member_lasso(a, w) == apa_member_lasso(b, w)


def test_remove_alternation_stage_agreement():
    rng = random.Random(5)
    for _ in range(100):
        a = random_apa(rng, rng.randint(1, 4), 2, 1)
        n = remove_alternation(a)
        assert n.num_states <= 4 ** a.num_states
        for _ in range(20):
            w = random_lasso(rng, range(2))
            assert apa_member_lasso(a, w) == nba_member_lasso(n, w)


def test_remove_alternation_deterministic_input():
    a = Apa(Alphabet.plain("ab"), (0, 1), 0, ((ref(1), ref(0)), (ref(1), ref(0))), (1, 0))
    n = remove_alternation(a)
    for w in all_lassos("ab", 2, 2):
        assert nba_member_lasso(n, w) == apa_member_lasso(a, w) == ("a" in w.cycle)


def test_remove_alternation_rejects_parity_colors():
    with pytest.raises(HymasError):
        remove_alternation(_single(ref(0), 2))


def test_determinize_stage_agreement():
    rng = random.Random(6)
    for _ in range(100):
        n = random_nba(rng, rng.randint(1, 6), 2)
        d = determinize(n)
        for _ in range(20):
            w = random_lasso(rng, range(2))
            assert dpa_member_lasso(d, w) == nba_member_lasso(n, w)


def test_determinize_finitely_many_a():
    # q0 reads anything; guess the last a and move to q1, which only reads b
    n = Nba(Alphabet.plain("ab"), (0, 1), 0,
            ((frozenset({0, 1}), frozenset({0, 1})), (frozenset(), frozenset({1}))),
            frozenset({1}))
    d = determinize(n)
    words = [LassoWord((), "b"), LassoWord("a", "b"), LassoWord((), "ab")]
    assert [nba_member_lasso(n, w) for w in words] == [True, True, False]
    assert [dpa_member_lasso(d, w) for w in words] == [True, True, False]


def test_apa_to_dpa_random():
    rng = random.Random(7)
    for _ in range(40):
        a = random_apa(rng, rng.randint(1, 3), 2, 3)
        d = apa_to_dpa(a)
        for _ in range(20):
            w = random_lasso(rng, range(2))
            assert dpa_member_lasso(d, w) == apa_member_lasso(a, w)


def test_accepting_sink_gives_universal_dpa():
    d = apa_to_dpa(_single(ref(0), 0))
    assert d.num_states == 1 and d.colors == (0,)


def test_apa_to_dpa_stats():
    stats = {}
    apa_to_dpa(ab_often_apa(), stats=stats)
    assert {"apa", "buchi", "nba", "dpa_raw", "dpa", "colors"} <= set(stats)


# ------------------------------------------------------------ membership


def test_running_body_dpa_memberships(running_cgs):
    d = running_body_dpa(running_cgs)
    assert dpa_member_lasso(d, LassoWord((), ((2, 0),)))
    assert not dpa_member_lasso(d, LassoWord((), ((0, 2),)))


def test_dpa_and_apa_membership_agree():
    rng = random.Random(8)
    for _ in range(30):
        d = determinize(random_nba(rng, rng.randint(1, 4), 2))
        a = d.to_apa()
        for _ in range(10):
            w = random_lasso(rng, range(2))
            assert dpa_member_lasso(d, w) == apa_member_lasso(a, w)
            doubled = LassoWord(w.prefix, w.cycle * 2)
            assert dpa_member_lasso(d, doubled) == dpa_member_lasso(d, w)


def test_alphabet_mismatch():
    with pytest.raises(AlphabetError):
        apa_member_lasso(ab_often_apa(), LassoWord((), ("z",)))
    with pytest.raises(AlphabetError):
        dpa_member_lasso(apa_to_dpa(ab_often_apa()), LassoWord((), ("z",)))


def test_dump_is_stable():
    a = ab_often_apa()
    assert dump_automaton(a, "x") == dump_automaton(ab_often_apa(), "x")
    text = dump_automaton(apa_to_dpa(a))
    assert text.startswith("kind dpa")
