"""Explicit-state model checking of strategic hyperproperties (HyperATL*
with strategy sharing) on finite concurrent game structures."""

from .cgs import Cgs, load_cgs, parse_cgs
from .checker import CheckResult, check, model_check
from .errors import (AlphabetError, BudgetExceeded, FormulaError, HymasError, ModelError,
                     OracleError)
from .formula import parse_path_formula, parse_state_formula, to_text

__all__ = [
    "Cgs", "load_cgs", "parse_cgs", "CheckResult", "check", "model_check", "parse_state_formula",
    "parse_path_formula", "to_text", "HymasError", "FormulaError", "ModelError", "AlphabetError",
    "BudgetExceeded", "OracleError",
]

__version__ = "0.1.0"
