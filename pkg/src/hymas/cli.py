"""Command-line front end: ``hymas check``, ``hymas states`` and ``hymas bench``.

Exit status: 0 the property holds (or the command succeeded), 1 it fails,
2 usage, parse or model error, 3 state budget exhausted.  Verdicts go to
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .automata.base import Apa, Dpa, Nba, dump_automaton
from .bench import (TemplateKind, TemplateParams, gen_running_example, gen_scheduler,
                    gen_template, sample_templates, scheduler_witness)
from .cgs import load_cgs, to_cgm
from .checker import default_budget, model_check
from .errors import BudgetExceeded, HymasError
from .formula import parse_state_formula, to_text
from .games import ParityGame, dump_game

__all__ = ["main", "build_parser", "read_formula_text"]

EXIT_HOLDS, EXIT_FAILS, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def read_formula_text(path: str) -> str:
    """Formula text of a ``.haf`` file; lines starting with ``#`` are comments."""
    lines = Path(path).read_text().splitlines()
    return "\n".join(l for l in lines if not l.lstrip().startswith("#"))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--all-states", action="store_true",
                   help="evaluate every state, not only those reachable from init")
    p.add_argument("--parallel", type=int, default=1, metavar="N",
                   help="worker processes for the per-state loop")
    p.add_argument("--state-budget", type=int, default=None, metavar="N",
                   help="cap on states per automaton or game (default: $HYMAS_STATE_BUDGET or 1e6)")
    p.add_argument("--emit-automata", metavar="DIR",
                   help="write one dump file per pipeline stage into DIR")
    p.add_argument("--emit-game", metavar="DIR", help="write the final membership games into DIR")
    p.add_argument("--machine", action="store_true", help="print key=value lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hymas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("check", "decide whether the formula holds in the initial state"),
                       ("states", "list the states satisfying the formula")):
        p = sub.add_parser(name, help=text)
        p.add_argument("model", help=".cgm model file")
        p.add_argument("formula", nargs="?", help=".haf formula file")
        p.add_argument("-f", "--formula-text", help="formula given inline")
        _common(p)
    b = sub.add_parser("bench", help="run a generated benchmark")
    b.add_argument("family", choices=["running", "scheduler", "template"])
    b.add_argument("kind", nargs="?", choices=[k.value for k in TemplateKind],
                   help="template kind (for the template family)")
    b.add_argument("--n", type=int, default=2, help="number of scheduler clients")
    b.add_argument("--model", help=".cgm model for templates (default: running example)")
    b.add_argument("--count", type=int, default=1, help="number of sampled template instances")
    b.add_argument("--seed", type=int, default=0, help="seed of the template sampler")
    b.add_argument("--write-model", metavar="PATH", help="also write the model as .cgm")
    b.add_argument("--write-formula", metavar="PATH", help="also write the formula as .haf")
    _common(b)
    return parser


class _Emitter:
    def __init__(self, automata_dir: str | None, game_dir: str | None):
        self.dirs = {"automata": automata_dir, "game": game_dir}
        self.count = 0
        for d in self.dirs.values():
            if d:
                Path(d).mkdir(parents=True, exist_ok=True)

    @property
    def active(self) -> bool:
        return any(self.dirs.values())

    def __call__(self, name: str, obj) -> None:
        if isinstance(obj, (Apa, Nba, Dpa)):
            target, text = self.dirs["automata"], dump_automaton(obj, name)
        elif isinstance(obj, ParityGame):
            target, text = self.dirs["game"], dump_game(obj)
        else:
            return
        if target:
            self.count += 1
            Path(target, f"{self.count:03d}-{name}.txt").write_text(text)


def _budget(args) -> int:
    if args.state_budget is not None:
        if args.state_budget <= 0:
            raise HymasError("--state-budget must be positive")
        return args.state_budget
    return default_budget()


def _flatten_stats(result, g) -> list[tuple[str, object]]:
    top = result.stats["top"]
    rows = [("rank", result.stats["rank"]), ("ltl_apa", top["ltl_apa"])]
    for key, value in sorted(top.get("ltl_dpa", {}).items()):
        if key != "apa":
            rows.append((f"ltl_{key}", value))
    per_state = top.get("per_state", {})
    stage_max: dict = {}
    for sizes in per_state.values():
        for entry in sizes:
            j = entry["quantifier"]
            for key, value in entry.items():
                if key not in ("quantifier", "apa"):
                    k = f"q{j}_{key}_max"
                    stage_max[k] = max(stage_max.get(k, 0), value)
    rows.extend(sorted(stage_max.items()))
    rows.append(("nested", len(result.stats.get("nested", []))))
    rows.append(("states_total", g.num_states))
    rows.append(("states_evaluated", len(result.evaluated)))
    rows.append(("solution", ",".join(g.state_names[s] for s in sorted(result.solution)) or "-"))
    rows.append(("verdict", "HOLDS" if result.holds_at_init else "FAILS"))
    rows.append(("wall_ms", result.stats["wall_ms"]))
    return rows


def _run_check(g, phi, args, mode: str, extra: list | None = None) -> int:
    states = None if args.all_states else g.reachable()
    emitter = _Emitter(args.emit_automata, args.emit_game)
    result = model_check(g, phi, states=states, budget=_budget(args), parallel=args.parallel,
                         emit=emitter if emitter.active else None)
    if args.machine:
        for key, value in (extra or []) + _flatten_stats(result, g):
            print(f"{key}={value}")
    elif mode == "states":
        for s in result.evaluated:
            mark = "+" if s in result.solution else "-"
            print(f"{mark} {g.state_names[s]}")
    else:
        print("HOLDS" if result.holds_at_init else "FAILS")
        names = " ".join(g.state_names[s] for s in sorted(result.solution))
        print(f"solution: {{{names}}}", file=sys.stderr)
    if mode == "states":
        return EXIT_HOLDS
    return EXIT_HOLDS if result.holds_at_init else EXIT_FAILS


def _formula_from(args, agents):
    if (args.formula is None) == (args.formula_text is None):
        raise HymasError("give exactly one formula: a .haf file or --formula-text")
    text = args.formula_text if args.formula is None else read_formula_text(args.formula)
    return parse_state_formula(text, agents)


def _bench(args) -> int:
    extra = [("family", args.family)]
    if args.family == "running":
        g, phi = gen_running_example()
    elif args.family == "scheduler":
        g, phi = gen_scheduler(args.n)
        extra += [("n", args.n), ("states_reachable", len(g.reachable())),
                  ("witness", "ok" if scheduler_witness(g, phi) else "none")]
    else:
        if args.kind is None:
            raise HymasError("bench template needs a template kind")
        kind = TemplateKind(args.kind)
        g = load_cgs(args.model) if args.model else gen_running_example()[0]
        extra += [("template", kind.value), ("seed", args.seed)]
        if args.count == 1 and not args.model:
            agents = frozenset(g.agents)
            params = TemplateParams(coalition=agents, other=frozenset(sorted(agents)[:2]),
                                    controller=g.agents[0], tgt="w", h="w", inp="w")
            instances = [(params, gen_template(kind, g, params))]
        else:
            instances = sample_templates(g, kind, args.count, args.seed)
        status = EXIT_HOLDS
        for k, (_, phi) in enumerate(instances):
            if args.machine:
                print(f"instance={k}")
                print(f"formula={to_text(phi)}")
            code = _run_check(g, phi, args, "check", extra)
            status = max(status, code)
        _write_outputs(args, g, instances[-1][1])
        return EXIT_HOLDS if status in (EXIT_HOLDS, EXIT_FAILS) else status
    _write_outputs(args, g, phi)
    return _run_check(g, phi, args, "check", extra)


def _write_outputs(args, g, phi) -> None:
    if args.write_model:
        Path(args.write_model).write_text(to_cgm(g))
    if args.write_formula:
        Path(args.write_formula).write_text(to_text(phi) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.parallel < 1:
            raise HymasError("--parallel must be at least 1")
        if args.command == "bench":
            return _bench(args)
        g = load_cgs(args.model)
        phi = _formula_from(args, g.agents)
        return _run_check(g, phi, args, args.command)
    except BudgetExceeded as exc:
        print(f"hymas: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (HymasError, OSError) as exc:
        print(f"hymas: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
