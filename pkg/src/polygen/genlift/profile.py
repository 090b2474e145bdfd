"""Per-prime generator counts d_p(G) = d(G / U^p) and their extremes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from polygen import exactlin as el
from polygen import fingrp
from polygen.budget import Budget
from polygen.errors import BudgetExhausted, PreconditionError
from polygen.vagroup import VAElement, VAGroupSpec, finite_quotient


@dataclass(frozen=True)
class DpValue:
    prime: int
    d: int | None
    witness: tuple[VAElement, ...]
    lower_bound: int
    status: str  # FOUND or UNKNOWN
    quotient_order: int

    @property
    def known(self) -> bool:
        return self.status == "FOUND"


@dataclass(frozen=True)
class PrimePolicy:
    """Which primes a profile inspects.

    By default: primes dividing |F|, primes dividing an invariant factor of
    the coinvariants Z^n / sum (I - A_f) Z^n, ``extras``, and the
    ``generic`` smallest primes outside that set.  ``override`` replaces the
    whole rule with an explicit list.
    """

    extras: tuple[int, ...] = ()
    generic: int = 1
    override: tuple[int, ...] | None = None

    def candidates(self, spec: VAGroupSpec) -> dict[int, str]:
        if self.override is not None:
            for p in self.override:
                if not el.is_prime(p):
                    raise PreconditionError(f"{p} is not prime")
            return {p: "override" for p in sorted(set(self.override))}
        reasons: dict[int, str] = {}
        for p in el.prime_factors(spec.F.order):
            reasons.setdefault(p, "divides |F|")
        factors, _ = spec.coinvariant_factors
        for f in factors:
            for p in el.prime_factors(f):
                reasons.setdefault(p, "divides a coinvariant invariant factor")
        for p in self.extras:
            if not el.is_prime(p):
                raise PreconditionError(f"{p} is not prime")
            reasons.setdefault(p, "user extra")
        p = 1
        for _ in range(self.generic):
            p = el.next_prime(p)
            while p in reasons:
                p = el.next_prime(p)
            reasons[p] = "generic witness"
        return dict(sorted(reasons.items()))


@dataclass(frozen=True)
class DpProfile:
    per_prime: Mapping[int, DpValue]
    alpha: int
    beta: int | None
    reasons: Mapping[int, str] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return all(v.known for v in self.per_prime.values())

    @property
    def k(self) -> int:
        return max(self.alpha, self.beta + 1)

    def distinct_values(self) -> bool:
        return len({v.d for v in self.per_prime.values() if v.known}) > 1

    def smallest_prime_achieving_beta(self) -> int:
        return min(p for p, v in self.per_prime.items() if v.known and v.d == self.beta)


def dp(spec: VAGroupSpec, p: int, budget: Budget | None = None) -> DpValue:
    """d(G/U^p) with a generating witness lifted back to G."""
    if not el.is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    if spec.rank == 0:
        res = fingrp.min_generators(spec.F, budget)
        witness = tuple(spec.element((), f) for f in res.witness)
        return DpValue(p, res.d, witness, res.lower_bound, res.status, spec.F.order)
    q, _ = finite_quotient(spec, p)
    res = fingrp.min_generators(q, budget)
    witness = tuple(q.lift(x) for x in res.witness)
    return DpValue(p, res.d, witness, res.lower_bound, res.status, q.order)


def dp_profile(spec: VAGroupSpec, policy: PrimePolicy | None = None,
               budget: Budget | None = None) -> DpProfile:
    """d_p over the policy's candidate primes.

    An UNKNOWN value makes the profile incomplete; alpha is then only a
    lower bound (the largest known value or proven bound).
    """
    policy = policy or PrimePolicy()
    reasons = policy.candidates(spec)
    values = {p: dp(spec, p, budget) for p in reasons}
    known = [v.d for v in values.values() if v.known]
    alpha = max([v.d if v.known else v.lower_bound for v in values.values()], default=0)
    beta = min(known) if known else None
    return DpProfile(values, alpha, beta, reasons)


@dataclass(frozen=True)
class DhatEstimate:
    value: int
    status: str
    primes: tuple[int, ...]


def dhat(spec: VAGroupSpec, policy: PrimePolicy | None = None,
         budget: Budget | None = None) -> DhatEstimate:
    """alpha = max_p d_p over the policy primes, flagged HEURISTIC.

    Only finitely many primes are inspected, so the value is the profinite
    generator count under the assumption that the maximum is attained there.
    """
    prof = dp_profile(spec, policy, budget)
    if not prof.complete:
        raise BudgetExhausted("d_p profile is incomplete; alpha is only a lower bound")
    return DhatEstimate(prof.alpha, "HEURISTIC", tuple(prof.per_prime))


def require_complete(profile: DpProfile) -> DpProfile:
    if not profile.complete:
        missing = [p for p, v in profile.per_prime.items() if not v.known]
        raise BudgetExhausted(f"d_p unknown for primes {missing}")
    return profile

