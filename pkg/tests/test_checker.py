import random

import pytest

from hymas.bench import (random_atl_formula, random_bounded_formula, random_cgs,
                         random_nnf_formula)
from hymas.checker import check, default_budget, model_check
from hymas.errors import BudgetExceeded, FormulaError, HymasError
from hymas.formula import (BOTTOM, TOP, Leaf, Nested, QKind, Quant, atl_to_hyper,
                           extract_nested_state_formulas, negate_path, parse_state_formula,
                           quantifier_prefix, sharing_pairs, substitute_nested)
from hymas.oracles import bounded_solution, eval_bounded_atl


def test_running_example(running):
    g, phi = running
    result = model_check(g, phi)
    assert result.holds_at_init and check(g, phi)
    assert result.solution == {0}
    assert result.stats["rank"] == 2


def test_trivial_formulas(running_cgs):
    g = running_cgs
    everyone = frozenset(g.agents)
    top = Quant(QKind.EXISTS, everyone, frozenset(), "p", Leaf(TOP))
    assert model_check(g, top).solution == frozenset(range(g.num_states))
    bottom = Quant(QKind.FORALL, frozenset(), frozenset(), "p",
                   Quant(QKind.EXISTS, everyone, frozenset(), "q", Leaf(BOTTOM)))
    assert not check(g, bottom)
    assert model_check(g, Leaf(TOP)).solution == frozenset(range(g.num_states))


def test_unknown_agent_rejected(running_cgs):
    phi = Quant(QKind.EXISTS, frozenset({"nobody"}), frozenset(), "p", Leaf(TOP))
    with pytest.raises(FormulaError):
        model_check(running_cgs, phi)


@pytest.mark.parametrize("sharing, nested, seed", [
    (False, False, 10), (True, False, 11), (False, True, 12), (True, True, 13),
])
def test_bounded_oracle_agreement(sharing, nested, seed):
    rng = random.Random(seed)
    for _ in range(40):
        g = random_cgs(rng)
        phi = random_bounded_formula(rng, g, max_quants=2, depth=3, sharing=sharing,
                                     nested=nested)
        assert model_check(g, phi).solution == bounded_solution(g, phi)


def random_single_quant(rng, g, sharing):
    coalition = frozenset(a for a in g.agents if rng.random() < 0.5)
    pairs = set()
    if sharing:
        for side in (sorted(coalition), sorted(set(g.agents) - coalition)):
            for i in range(len(side)):
                for j in range(i + 1, len(side)):
                    if rng.random() < 0.5:
                        pairs.add((side[i], side[j]))
    return coalition, sharing_pairs(pairs)


def test_duality():
    rng = random.Random(20)
    for k in range(60):
        g = random_cgs(rng)
        coalition, xi = random_single_quant(rng, g, sharing=k % 2 == 1)
        psi = random_nnf_formula(rng, ["p"], sorted(g.aps), size=rng.randint(2, 6))
        exists = Quant(QKind.EXISTS, coalition, xi, "p", Leaf(psi))
        forall = Quant(QKind.FORALL, coalition, xi, "p", Leaf(negate_path(psi)))
        S = frozenset(range(g.num_states))
        assert model_check(g, exists).solution == S - model_check(g, forall).solution


def test_atl_embedding():
    rng = random.Random(30)
    for _ in range(40):
        g = random_cgs(rng)
        phi = random_atl_formula(rng, g, depth=2, size=4, max_nesting=1)
        expected = frozenset(s for s in range(g.num_states) if eval_bounded_atl(g, s, phi))
        assert model_check(g, atl_to_hyper(phi)).solution == expected


def test_nested_relabeling_matches_manual_labels(running_cgs):
    g = running_cgs
    phi = parse_state_formula(
        "<<sched>> p . F ({[[W1]] q . X w[q]}[p] & !w[p])", g.agents)
    _, body = quantifier_prefix(phi)
    (nested,) = extract_nested_state_formulas(body)
    inner_sol = model_check(g, nested).solution
    g2 = g.with_labels("m", inner_sol)
    manual = Quant(phi.kind, phi.coalition, phi.sharing, phi.var,
                   Leaf(substitute_nested(body, nested, "m")))
    assert model_check(g, phi).solution == model_check(g2, manual).solution


def test_nested_duplicates_checked_once(running_cgs):
    g = running_cgs
    phi = parse_state_formula(
        "<<sched>> p . [[W1]] q . {<<W2>> r . X w[r]}[p] | {<<W2>> r . X w[r]}[q]", g.agents)
    result = model_check(g, phi)
    assert len(result.stats["nested"]) == 1


def test_stats_rank_equals_products(running):
    g, phi = running
    stats = model_check(g, phi).stats
    for sizes in stats["top"]["per_state"].values():
        assert len(sizes) == stats["rank"]
    assert stats["wall_ms"] >= 0


def test_states_subset_and_parallel(running):
    g, phi = running
    sub = model_check(g, phi, states=[0, 2])
    assert sub.evaluated == (0, 2) and sub.solution == {0}
    par = model_check(g, phi, parallel=2)
    assert par.solution == model_check(g, phi).solution


def test_budget(running, monkeypatch):
    g, phi = running
    with pytest.raises(BudgetExceeded):
        model_check(g, phi, budget=3)
    monkeypatch.setenv("HYMAS_STATE_BUDGET", "3")
    assert default_budget() == 3
    with pytest.raises(BudgetExceeded):
        check(g, phi)
    monkeypatch.setenv("HYMAS_STATE_BUDGET", "zero")
    with pytest.raises(HymasError):
        default_budget()


def test_emit_receives_every_stage(running):
    g, phi = running
    names = []
    model_check(g, phi, states=[0], emit=lambda name, obj: names.append(name))
    assert names[0] == "ltl.apa" and "q2.dpa" in names
    assert {"s0.q2.apa", "s0.q2.dpa", "s0.q1.apa", "s0.game"} <= set(names)


def test_nested_solution_uses_all_states():
    # the nested formula is evaluated on a state unreachable from init
    from hymas.cgs import Cgs
    g = Cgs.from_function(["a", "b"], [set(), {"x"}], 0, ["A"], [["go"]],
                          lambda s, acts: s, aps={"x"})
    phi = parse_state_formula("<<A>> p . {<<A>> q . x[q]}[p]", g.agents)
    assert model_check(g, phi, states=[0]).solution == frozenset()
    assert model_check(g, phi).solution == {1}


def test_matching_pennies():
    from hymas.cgs import Cgs
    from hymas.formula import Atom, Next
    g = Cgs.from_function(["s0", "win", "lose"], [set(), {"a"}, set()], 0, ["A", "B"],
                          [["h", "t"], ["h", "t"]],
                          lambda s, acts: 0 if s else (1 if acts[0] == acts[1] else 2),
                          aps={"a"})
    body = Leaf(Next(Atom("a", "p")))
    assert not check(g, Quant(QKind.EXISTS, frozenset({"A"}), frozenset(), "p", body))
    assert check(g, Quant(QKind.FORALL, frozenset({"B"}), frozenset(), "p", body))
