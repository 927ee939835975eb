"""Alternating, nondeterministic and deterministic automata over lasso words."""

from .base import (FALSE, TRUE, Alphabet, Apa, Dpa, LassoWord, Nba, PosBool, classes_from_keys,
                   dump_automaton, pb_and, pb_and_all, pb_or, pb_or_all, ref)
from .ltl import ltl_to_apa
from .membership import apa_member_lasso, dpa_member_lasso, nba_member_lasso
from .transform import (apa_to_dpa, determinize, dual_apa, minimize_dpa, normalize_colors,
                        parity_to_buchi, prune_nba, reduce_colors, remove_alternation)

__all__ = [
    "Alphabet", "LassoWord", "PosBool", "TRUE", "FALSE", "ref", "pb_and", "pb_or",
    "pb_and_all", "pb_or_all", "Apa", "Nba", "Dpa", "dump_automaton", "classes_from_keys",
    "ltl_to_apa", "apa_member_lasso", "dpa_member_lasso", "nba_member_lasso",
    "apa_to_dpa", "determinize", "dual_apa", "minimize_dpa", "normalize_colors",
    "parity_to_buchi", "prune_nba", "reduce_colors", "remove_alternation",
]
