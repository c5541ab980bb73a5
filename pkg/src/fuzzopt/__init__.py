"""Optimality conditions for fuzzy optimization, with a fuzzy-data SVM."""
from fuzzopt.core import (
    CutFamily, FuzzyMatrix, FuzzyNumber, Interval, NotAFuzzyNumber, OrderResult, ZERO,
    add, as_fuzzy_number, compare, contains_zero, cut, distance, dot, gh_difference,
    is_zero, scalar_mul,
)

__all__ = [
    "CutFamily", "FuzzyMatrix", "FuzzyNumber", "Interval", "NotAFuzzyNumber", "OrderResult", "ZERO",
    "add", "as_fuzzy_number", "compare", "contains_zero", "cut", "distance", "dot", "gh_difference",
    "is_zero", "scalar_mul",
]
__version__ = "0.1.0"
