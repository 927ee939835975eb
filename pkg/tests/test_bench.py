import random

import pytest

from hymas.bench import (RUNNING_CGM, RUNNING_HAF, TemplateKind, TemplateParams, gen_running_example,
                         gen_scheduler, gen_template, sample_templates, scheduler_witness)
from hymas.cgs import Cgs, parse_cgs
from hymas.checker import check, model_check
from hymas.errors import FormulaError, ModelError
from hymas.formula import parse_state_formula, rank, to_text
from pathlib import Path

EXAMPLES = Path(__file__).resolve().parent.parent / "examples"


def test_running_example(running):
    g, phi = running
    assert g.num_states == 3 and g.labels[2] == {"w"}
    assert check(g, phi)


def test_shipped_example_files_match():
    shipped, built = parse_cgs((EXAMPLES / "running.cgm").read_text()), parse_cgs(RUNNING_CGM)
    assert shipped.state_names == built.state_names and shipped.labels == built.labels
    assert shipped.actions == built.actions and (shipped.kappa == built.kappa).all()
    text = "\n".join(l for l in (EXAMPLES / "running.haf").read_text().splitlines()
                     if not l.startswith("#"))
    g = parse_cgs(RUNNING_CGM)
    assert parse_state_formula(text, g.agents) == parse_state_formula(RUNNING_HAF, g.agents)


@pytest.mark.parametrize("n", [1, 2])
def test_scheduler_holds_with_witness(n):
    g, phi = gen_scheduler(n)
    assert rank(phi) == 1
    assert scheduler_witness(g, phi)
    assert check(g, phi)


def test_scheduler_state_count_grows():
    counts = [gen_scheduler(n)[0].num_states for n in (1, 2, 3)]
    assert counts == sorted(set(counts))


def test_scheduler_rejects_zero():
    with pytest.raises(ModelError):
        gen_scheduler(0)


def test_witness_detects_starvation():
    # the same formula on a model where the scheduler can only ever grant client 1
    g, phi = gen_scheduler(2)
    kappa = g.kappa.copy()
    kappa[..., 1, :, :] = kappa[..., 0, :, :]
    starved = Cgs(g.state_names, g.labels, g.init, g.agents, g.actions, kappa, g.aps)
    assert not scheduler_witness(starved, phi)
    assert not check(starved, phi)


def params_for(g):
    agents = frozenset(g.agents)
    return TemplateParams(coalition=agents, other=frozenset({"sched", "W1"}),
                          controller="sched", tgt="w", h="w", inp="w")


def test_optimality1_is_running_formula(running):
    g, phi = running
    assert gen_template(TemplateKind.OPTIMALITY1, g, params_for(g)) == phi


@pytest.mark.parametrize("kind", list(TemplateKind))
def test_templates_round_trip_and_check(running_cgs, kind):
    g = running_cgs
    phi = gen_template(kind, g, params_for(g))
    assert parse_state_formula(to_text(phi), g.agents) == phi
    model_check(g, phi)


def test_od_on_unlabeled_model_holds():
    g = Cgs.from_function(["s0", "s1"], [set(), set()], 0, ["cnt", "env"], [["a", "b"], ["x", "y"]],
                          lambda s, acts: 1 - s if acts[1] == "x" else s, aps={"h"})
    phi = gen_template(TemplateKind.OBSERVATIONAL_DETERMINISM, g,
                       TemplateParams(controller="cnt", h="h"))
    assert check(g, phi)


def test_template_errors(running_cgs):
    g = running_cgs
    with pytest.raises(FormulaError):
        gen_template(TemplateKind.OPTIMALITY1, g, TemplateParams(coalition=frozenset({"X"}),
                                                                 tgt="w"))
    with pytest.raises(FormulaError):
        gen_template(TemplateKind.OPTIMALITY1, g, TemplateParams(tgt="nope"))
    with pytest.raises(FormulaError):
        gen_template(TemplateKind.OBSERVATIONAL_DETERMINISM, g, TemplateParams(h="w"))


def test_sampling_is_seeded(running_cgs):
    g = running_cgs
    a = sample_templates(g, TemplateKind.GOOD_ENOUGH, 5, seed=7)
    b = sample_templates(g, TemplateKind.GOOD_ENOUGH, 5, seed=7)
    assert [phi for _, phi in a] == [phi for _, phi in b]
    for _, phi in a:
        assert parse_state_formula(to_text(phi), g.agents) == phi
