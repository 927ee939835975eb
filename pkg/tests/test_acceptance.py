"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (lines appear even with output capture on) or directly
with ``python tests/test_acceptance.py``.
"""

import itertools
import random
import sys
import time

import pytest

from hymas.automata import (LassoWord, apa_member_lasso, apa_to_dpa, determinize,
                            dpa_member_lasso, ltl_to_apa, nba_member_lasso, parity_to_buchi,
                            remove_alternation)
from hymas.bench import (TemplateKind, TemplateParams, ab_often_apa, running_body_dpa,
                         gen_running_example, gen_scheduler, gen_template, random_apa,
                         random_atl_formula, random_bounded_formula, random_cgs, random_game,
                         random_lasso, random_nba, random_nnf_formula, scheduler_witness)
from hymas.checker import check, default_budget, model_check
from hymas.formula import (Leaf, QKind, Quant, atl_to_hyper, negate_path, parse_state_formula,
                           quantifier_prefix, to_nnf, to_text)
from hymas.games import brute_force_regions, solve, verify_strategy
from hymas.oracles import bounded_solution, eval_bounded_atl
from hymas.product import ProductSpec, build_product


def criterion_1():
    g, phi = gen_running_example()
    start = time.perf_counter()
    holds = check(g, phi)
    elapsed = time.perf_counter() - start
    return holds and elapsed < 5, f"check={holds} in {elapsed:.3f}s"


def criterion_2():
    g, phi = gen_running_example()
    quants, body = quantifier_prefix(phi)
    inner = apa_to_dpa(ltl_to_apa(to_nnf(body), [q.var for q in quants], g))
    q = quants[1]
    d = apa_to_dpa(build_product(ProductSpec(g, g.init, q.kind, q.coalition, q.sharing, q.var),
                                 inner))
    total = wrong = 0
    for lp in range(4):
        for lc in range(1, 3):
            for p in itertools.product(range(3), repeat=lp):
                for c in itertools.product(range(3), repeat=lc):
                    w = LassoWord(tuple((x,) for x in p), tuple((x,) for x in c))
                    expected = 2 in (w.letter(0)[0], w.letter(1)[0])
                    total += 1
                    wrong += dpa_member_lasso(d, w) != expected
    return wrong == 0, f"{total} lassos, {wrong} disagreements, DPA with {d.num_states} states"


def criterion_3():
    a = ab_often_apa()
    cases = [("", "b", True), ("", "c", False), ("", "bc", True), ("a", "c", False)]
    got = [apa_member_lasso(a, LassoWord(tuple(p), tuple(c))) for p, c, _ in cases]
    return got == [e for *_, e in cases], f"memberships {got}"


def criterion_4():
    g, phi = gen_running_example()
    quants, body = quantifier_prefix(phi)
    built = apa_to_dpa(ltl_to_apa(to_nnf(body), [q.var for q in quants], g))
    words = [LassoWord((), ((2, 0),)), LassoWord((), ((0, 2),))]
    got = [[dpa_member_lasso(d, w) for w in words] for d in (running_body_dpa(g), built)]
    ok = got == [[True, False], [True, False]] and built.num_states == 3
    return ok, f"hand-built {got[0]}, pipeline {got[1]} ({built.num_states} states)"


def criterion_5():
    rng = random.Random(5)
    total = agree = 0
    for sharing in (False, True):
        for _ in range(60):
            g = random_cgs(rng, max_states=3, max_agents=3, max_actions=2)
            phi = random_bounded_formula(rng, g, max_quants=2, depth=3, sharing=sharing)
            total += 1
            agree += model_check(g, phi).solution == bounded_solution(g, phi, k=3)
    return agree == total, f"{agree}/{total} instances agree state by state"


def criterion_6():
    rng = random.Random(6)
    start = time.perf_counter()
    counts = {}

    def stage(name, make, before, after, gen, letters=range(2)):
        bad = 0
        for _ in range(100):
            x = gen()
            y = make(x)
            for _ in range(20):
                w = random_lasso(rng, letters)
                bad += before(x, w) != after(y, w)
        counts[name] = bad

    stage("parity_to_buchi", parity_to_buchi, apa_member_lasso, apa_member_lasso,
          lambda: random_apa(rng, rng.randint(1, 5), 2, 3))
    stage("remove_alternation", remove_alternation, apa_member_lasso, nba_member_lasso,
          lambda: random_apa(rng, rng.randint(1, 4), 2, 1))
    stage("determinize", determinize, nba_member_lasso, dpa_member_lasso,
          lambda: random_nba(rng, rng.randint(1, 6), 2))
    bad_games = 0
    for _ in range(100):
        game = random_game(rng, rng.randint(1, 8), 2)
        r = solve(game)
        bad_games += (r.even, r.odd) != brute_force_regions(game) or not verify_strategy(game, r)
    counts["zielonka"] = bad_games
    elapsed = time.perf_counter() - start
    ok = not any(counts.values()) and elapsed < 60
    return ok, f"disagreements {counts} in {elapsed:.1f}s"


def criterion_7():
    rng = random.Random(7)
    dual_ok = 0
    for k in range(60):
        g = random_cgs(rng)
        coalition = frozenset(a for a in g.agents if rng.random() < 0.5)
        xi = frozenset()
        if k % 2:
            side = sorted(coalition) if len(coalition) > 1 else sorted(set(g.agents) - coalition)
            xi = frozenset(itertools.combinations(side, 2))
        psi = random_nnf_formula(rng, ["p"], sorted(g.aps), size=rng.randint(2, 6))
        e = model_check(g, Quant(QKind.EXISTS, coalition, xi, "p", Leaf(psi))).solution
        f = model_check(g, Quant(QKind.FORALL, coalition, xi, "p",
                                 Leaf(negate_path(psi)))).solution
        dual_ok += e == frozenset(range(g.num_states)) - f
    embed_ok = 0
    for _ in range(40):
        g = random_cgs(rng)
        phi = random_atl_formula(rng, g, depth=2, size=4, max_nesting=1)
        oracle = frozenset(s for s in range(g.num_states) if eval_bounded_atl(g, s, phi))
        embed_ok += model_check(g, atl_to_hyper(phi)).solution == oracle
    return dual_ok == 60 and embed_ok == 40, f"duality {dual_ok}/60, embedding {embed_ok}/40"


def criterion_8():
    limits = {1: 600, 2: 60, 3: 600}
    sizes, details, ok = [], [], True
    for n in (1, 2, 3):
        g, phi = gen_scheduler(n)
        start = time.perf_counter()
        result = model_check(g, phi, states=g.reachable())
        elapsed = time.perf_counter() - start
        top = result.stats["top"]
        product = max(e["product"] for per in top["per_state"].values() for e in per)
        row = (g.num_states, top["ltl_apa"], top["ltl_dpa"]["dpa"], product)
        ok &= result.holds_at_init and scheduler_witness(g, phi) and elapsed < limits[n]
        sizes.append(row)
        details.append(f"n={n}: |S|={row[0]} ltl_apa={row[1]} ltl_dpa={row[2]} "
                       f"product_max={row[3]} {elapsed:.2f}s")
    monotone = all(a < b for lo, hi in zip(sizes, sizes[1:]) for a, b in zip(lo, hi))
    return ok and monotone, "; ".join(details)


def criterion_9():
    g, running_phi = gen_running_example()
    params = TemplateParams(coalition=frozenset(g.agents), other=frozenset({"sched", "W1"}),
                            controller="sched", tgt="w", h="w", inp="w")
    verdicts, ok = {}, True
    for kind in TemplateKind:
        phi = gen_template(kind, g, params)
        ok &= parse_state_formula(to_text(phi), g.agents) == phi
        verdicts[kind.value] = check(g, phi, budget=default_budget())
    ok &= gen_template(TemplateKind.OPTIMALITY1, g, params) == running_phi
    ok &= verdicts["opt1"] is True
    return ok, f"verdicts {verdicts}"


CRITERIA = {
    1: ("running example end to end", criterion_1),
    2: ("intermediate language: s2 within two steps", criterion_2),
    3: ("a-or-b-infinitely-often memberships", criterion_3),
    4: ("running body DPA memberships", criterion_4),
    5: ("bounded-oracle equivalence", criterion_5),
    6: ("pipeline stage agreement and solver", criterion_6),
    7: ("duality and ATL* embedding", criterion_7),
    8: ("scheduler scaling", criterion_8),
    9: ("specification templates", criterion_9),
}


def report(n):
    title, fn = CRITERIA[n]
    try:
        ok, detail = fn()
    except Exception as exc:  # reported as a failing line, then re-raised by the caller
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line = report(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
