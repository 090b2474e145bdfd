"""Certified generating sets for virtually abelian groups."""

from polygen.budget import DEFAULT_SEED, Budget
from polygen.errors import (
    BudgetExhausted,
    CertificateError,
    ConditionViolation,
    InputError,
    PolygenError,
    PreconditionError,
    WordSyntaxError,
)
from polygen.vagroup import VAElement, VAGroupSpec, subgroup_report
from polygen.words import Word, parse_word

__version__ = "0.1.0"

__all__ = [
    "Budget", "BudgetExhausted", "CertificateError", "ConditionViolation", "DEFAULT_SEED",
    "InputError", "PolygenError", "PreconditionError", "VAElement", "VAGroupSpec", "Word",
    "WordSyntaxError", "parse_word", "subgroup_report",
]
