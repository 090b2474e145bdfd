"""Certified generating sets of size k = max(alpha, beta + 1).

The generic route picks the smallest prime q with d_q = beta, takes a
beta-element witness of G/U^q, pads it with identities to length k and lifts
it along V = U^q with the word w = x_k.  With a coprime modulus N and
k = alpha + 1 the lattice is U^N instead, so the first alpha lifts still
generate G modulo U^N and their index is prime to N.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from polygen import exactlin as el
from polygen import fingrp
from polygen.budget import Budget
from polygen.errors import BudgetExhausted, CertificateError, PreconditionError
from polygen.genlift.lifting import LiftOutcome, Stage, lift_generators, stage_tuples
from polygen.genlift.profile import DpProfile, PrimePolicy, dp_profile, require_complete
from polygen.vagroup import SubgroupReport, VAElement, VAGroupSpec, finite_quotient, generates_mod, subgroup_report
from polygen.words import Word

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoprimeCertificate:
    N: int
    index: int  # index of the subgroup generated by the first alpha elements
    gcd: int


@dataclass(frozen=True)
class GenerationResult:
    generators: tuple[VAElement, ...]
    k: int
    alpha: int
    beta: int
    target_V: el.Lattice
    gamma: tuple[VAElement, ...]
    word: Word
    stages: tuple[Stage, ...]
    verification: SubgroupReport
    coprime_certificate: CoprimeCertificate | None
    profile: DpProfile | None
    seed: int
    route: str  # "finite", "generic" or "coprime"
    lift: LiftOutcome | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Verdict:
    status: str  # PASS or FAIL
    failures: tuple[tuple[str, str], ...] = ()

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def __str__(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL " + "; ".join(f"{clause}: {msg}" for clause, msg in self.failures)


def generate(spec: VAGroupSpec, coprime_N: int | None = None, policy: PrimePolicy | None = None,
             budget: Budget | None = None, avoid_primes: Sequence[int] = ()) -> GenerationResult:
    """A generating set of size k, certified before it is returned.

    ``avoid_primes`` requests that the first k-1 elements generate a subgroup
    of index prime to each listed prime; it needs d_p < k for each of them.
    """
    budget = budget or Budget()
    if coprime_N is not None and coprime_N < 1:
        raise PreconditionError("the coprime modulus must be a positive integer")
    if spec.rank == 0:
        result = _generate_finite(spec, coprime_N, budget)
    else:
        result = _generate_lifted(spec, coprime_N, policy, budget, avoid_primes)
    verdict = certify(result, spec)
    if not verdict.passed:
        raise CertificateError(f"generated set failed certification: {verdict}")
    return result


def _generate_finite(spec: VAGroupSpec, coprime_N: int | None, budget: Budget) -> GenerationResult:
    res = fingrp.min_generators(spec.F, budget)
    if not res.known:
        raise BudgetExhausted(f"d(F) unknown; lower bound {res.lower_bound}")
    gens = tuple(spec.element((), f) for f in res.witness)
    report = subgroup_report(spec, gens)
    cert = None if coprime_N is None else CoprimeCertificate(coprime_N, 1, 1)
    return GenerationResult(gens, res.d, res.d, res.d, el.hnf([], 0), gens, Word(), (), report,
                            cert, None, budget.seed, "finite")


def _pad(spec: VAGroupSpec, witness: Sequence[VAElement], k: int) -> tuple[VAElement, ...]:
    if len(witness) > k:
        raise PreconditionError(f"witness has {len(witness)} elements, more than k = {k}")
    return tuple(witness) + (spec.identity,) * (k - len(witness))


def _generate_lifted(spec: VAGroupSpec, coprime_N: int | None, policy: PrimePolicy | None,
                     budget: Budget, avoid_primes: Sequence[int]) -> GenerationResult:
    profile = require_complete(dp_profile(spec, policy, budget))
    alpha, beta, k = profile.alpha, profile.beta, profile.k
    for p in avoid_primes:
        value = profile.per_prime.get(p)
        if value is not None and value.d >= k:
            raise PreconditionError(f"d_{p} = {value.d} is not below k = {k}")
    w = Word.gen(k)
    route = "generic"
    if coprime_N is not None and coprime_N > 1 and k == alpha + 1:
        route = "coprime"
        q_mod, _ = finite_quotient(spec, coprime_N)
        res = fingrp.min_generators(q_mod, budget)
        if not res.known:
            raise BudgetExhausted(f"d(G/U^{coprime_N}) unknown")
        if res.d > alpha:
            raise PreconditionError(
                f"G/U^{coprime_N} needs {res.d} generators, more than alpha = {alpha} from the profile"
            )
        lattice = el.Lattice.scaled(spec.rank, coprime_N)
        gamma = _pad(spec, [q_mod.lift(x) for x in res.witness], k)
    else:
        q = min(
            (p for p, v in profile.per_prime.items() if v.d == beta),
            key=lambda p: (profile.per_prime[p].quotient_order, p),
        )
        lattice = el.Lattice.scaled(spec.rank, q)
        gamma = _pad(spec, profile.per_prime[q].witness, k)
    logger.info("lifting %d elements along V of index %s (%s route)", k, el.lattice_index(lattice), route)
    outcome = lift_generators(spec, lattice, gamma, w, budget, avoid_primes)
    cert = None
    if coprime_N is not None:
        idx = subgroup_report(spec, outcome.generators[:alpha]).index
        cert = CoprimeCertificate(coprime_N, idx, gcd(idx, coprime_N) if el.is_finite(idx) else 0)
    return GenerationResult(outcome.generators, k, alpha, beta, lattice, gamma, w, outcome.stages,
                            outcome.report, cert, profile, budget.seed, route, outcome)


def certify(result: GenerationResult, spec: VAGroupSpec, check_ledger: bool = False) -> Verdict:
    """Re-check a result from its generators alone.

    Clauses: ``index`` (the generators generate G), ``size-bound``
    (k <= max(alpha, beta + 1)), ``chain`` (alpha <= k <= alpha + 1),
    ``coprime-index`` and ``coprime-gcd`` for the coprime certificate, and
    with ``check_ledger`` the per-stage tuples (``ledger``).
    """
    failures: list[tuple[str, str]] = []
    gens = list(result.generators)
    if len(gens) != result.k:
        failures.append(("size-bound", f"{len(gens)} generators recorded for k = {result.k}"))
    idx = subgroup_report(spec, gens).index
    if idx != 1:
        failures.append(("index", f"index {idx} != 1"))
    if result.k > max(result.alpha, result.beta + 1):
        failures.append(("size-bound", f"k = {result.k} exceeds max(alpha, beta + 1)"))
    if not result.alpha <= result.k <= result.alpha + 1:
        failures.append(("chain", f"k = {result.k} is outside [alpha, alpha + 1] for alpha = {result.alpha}"))
    cert = result.coprime_certificate
    if cert is not None:
        real = subgroup_report(spec, gens[: result.alpha]).index
        if real != cert.index:
            failures.append(("coprime-index", f"recorded index {cert.index}, recomputed {real}"))
        if not el.is_finite(real) or gcd(real, cert.N) != 1 or cert.gcd != 1:
            failures.append(("coprime-gcd", f"index {real} is not prime to N = {cert.N}"))
    if check_ledger and result.lift is not None:
        for stage, p, elements in stage_tuples(spec, result.lift, result.gamma):
            if not generates_mod(spec, elements, p):
                failures.append(("ledger", f"stage {stage.i}: tuple does not generate G mod {p}"))
    return Verdict("FAIL" if failures else "PASS", tuple(failures))
