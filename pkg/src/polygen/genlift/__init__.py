"""Generator counts per prime, lifting, and certified generation."""

from polygen.genlift.generate import CoprimeCertificate, GenerationResult, Verdict, certify, generate
from polygen.genlift.lifting import LiftOutcome, PrimeEntry, Stage, lift_generators, stage_tuples
from polygen.genlift.nakayama import (
    InsolubleError,
    NakayamaCert,
    WordPlan,
    build_nilpotent_word,
    is_perfect,
    nakayama,
)
from polygen.genlift.profile import DhatEstimate, DpProfile, DpValue, PrimePolicy, dhat, dp, dp_profile

__all__ = [
    "CoprimeCertificate", "DhatEstimate", "DpProfile", "DpValue", "GenerationResult",
    "InsolubleError", "LiftOutcome", "NakayamaCert", "PrimeEntry", "PrimePolicy", "Stage",
    "Verdict", "WordPlan", "build_nilpotent_word", "certify", "dhat", "dp", "dp_profile",
    "generate", "is_perfect", "lift_generators", "nakayama", "stage_tuples",
]
