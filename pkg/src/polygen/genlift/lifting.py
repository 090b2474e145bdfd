"""Lifting generators of G/V to generators of G.

Lifts of gamma_j are written g_j = (P y_j) gamma_j, where the columns of P
are the HNF basis of V and y_j are V-coordinates.  The induction keeps, for
every stage i, the chosen coordinates S_i = (y_1, ..., y_i), a finite prime
set P_i, and for each p in P_i tail coordinates y_{i+1}^(p), ..., y_k^(p)
that complete S_i to a generating set of G mod U^p.  Every other prime is
handled by the generic tail (all zero) because the index of the generic
(k-1)-tuple is prime to it.

Stage i -> i+1:

* y_{i+1} is the CRT combination of the recorded y_{i+1}^(p), p in P_i;
* N_i is the index of <g_1, ..., g_{i+1}, gamma_{i+2}, ..., gamma_{k-1}>;
* each new prime p | N_i gets a last coordinate y with
  w(h_1, ..., h_{k-1}, (P y) gamma_k) congruent to g_{i+1}^-1 gamma_{i+1}
  mod pV, found by solving the Fox operator system mod p.  That word value
  lies in the group generated by the new tuple, which therefore contains
  gamma_{i+1} mod U^p and so generates G mod p.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from polygen import exactlin as el
from polygen import fingrp
from polygen.budget import Budget
from polygen.errors import CertificateError, ConditionViolation, PreconditionError
from polygen.vagroup import (
    SubgroupReport,
    VAElement,
    VAGroupSpec,
    VAQuotient,
    generates_mod,
    subgroup_report,
)
from polygen.words import Word, evaluate_word, fox_operator

logger = logging.getLogger(__name__)

Coords = tuple[int, ...]


@dataclass(frozen=True)
class PrimeEntry:
    """Tail coordinates y_{i+1}^(p), ..., y_k^(p) for one prime at one stage."""

    prime: int
    tail: tuple[Coords, ...]
    source: str  # gaschutz, gaschutz-avoid, key-observation
    any_last: bool = False  # True when every lift of gamma_k completes the tuple


@dataclass(frozen=True)
class Stage:
    i: int
    chosen: tuple[Coords, ...]  # S_i
    primes: tuple[int, ...]  # P_i
    entries: Mapping[int, PrimeEntry]
    generic_index: int | None  # N_{i-1} (L at the base stage)


@dataclass(frozen=True)
class LiftOutcome:
    generators: tuple[VAElement, ...]
    coords: tuple[Coords, ...]
    stages: tuple[Stage, ...]
    fox_matrix: el.IntMatrix
    fox_index: int  # M
    base_index: int  # L
    basis: el.IntMatrix  # P, columns span V
    report: SubgroupReport


class _VFrame:
    """Coordinates relative to a full-rank F-invariant lattice V."""

    def __init__(self, spec: VAGroupSpec, lattice: el.Lattice):
        n = spec.rank
        if lattice.ambient_rank != n or not lattice.is_full_rank:
            raise PreconditionError("V must be a full-rank sublattice of Z^n")
        for a in spec.action:
            for row in lattice.basis:
                if el.mat_vec(a, row) not in lattice:
                    raise PreconditionError("V is not invariant under the action of F")
        self.n = n
        self.lattice = lattice
        self.P = el.transpose(lattice.basis)
        self.Pinv = el.mat_inverse(self.P)

    def to_v(self, vec: Sequence[int]) -> Coords:
        y = el.mat_vec(self.Pinv, vec)
        if not all(getattr(c, "denominator", 1) == 1 for c in y):
            raise PreconditionError(f"{tuple(vec)} is not in V")
        return tuple(int(c) for c in y)

    def from_v(self, y: Sequence[int]) -> tuple[int, ...]:
        return el.mat_vec(self.P, y)

    def operator(self, matrix: el.IntMatrix) -> el.IntMatrix:
        """The matrix of an operator on Z^n restricted to V, in V-coordinates."""
        out = el.mat_mul(el.mat_mul(self.Pinv, matrix), self.P)
        if not el.is_integral(out):
            raise PreconditionError("operator does not preserve V")
        return el.normalize(out)

    def solve_residue(self, vec: Sequence[int], p: int) -> Coords:
        """y with P y = vec (mod p); vec must lie in V + pZ^n."""
        y = el.solve_mod_p(self.P, vec, p)
        if y is None:
            raise CertificateError(f"{tuple(vec)} is not in V + {p}Z^n")
        return y


def _symmetric(y: Sequence[int], modulus: int) -> Coords:
    return tuple(c - modulus if 2 * c > modulus else c for c in y)


def _crt(entries: Mapping[int, PrimeEntry], n: int) -> Coords:
    if not entries:
        return (0,) * n
    x, modulus = el.crt_vector([(e.tail[0], p) for p, e in sorted(entries.items())])
    return _symmetric(x, modulus)


def lift_generators(spec: VAGroupSpec, v_lattice: el.Lattice, gamma: Sequence[VAElement],
                    w: Word, budget: Budget | None = None,
                    avoid_primes: Sequence[int] = ()) -> LiftOutcome:
    """Lifts g_j in gamma_j V generating G.

    Hypotheses (each diagnosed separately as a ``ConditionViolation``):
    w(gamma) lies in V; the Fox operator of w along x_k has nonzero
    determinant M on V; the chosen lifts of gamma_1..gamma_{k-1} generate a
    subgroup of finite index; and G/U^p is k-generated for the primes the
    base case visits (witnessed by the Gaschütz search).

    ``avoid_primes``: primes p with d_p(G) < k for which the first k-1 lifts
    must generate a subgroup of index prime to p.
    """
    budget = budget or Budget()
    gamma = tuple(gamma)
    k = len(gamma)
    if k == 0:
        raise PreconditionError("need at least one element to lift")
    if w.max_index > k:
        raise PreconditionError(f"word uses x{w.max_index} but only {k} elements are given")
    frame = _VFrame(spec, v_lattice)
    n = spec.rank
    zero = (0,) * n

    if subgroup_report(spec, list(gamma) + [spec.embed(r) for r in v_lattice.basis]).index != 1:
        raise PreconditionError("gamma does not generate G/V")

    wval = evaluate_word(w, gamma, spec)
    if wval.f != 0 or wval.v not in v_lattice:
        raise ConditionViolation("word-not-in-V", f"w(gamma) = {wval} is not in V")

    pi = fox_operator(w, k, [spec.action_of(g) for g in gamma])
    if not pi.is_integral:
        raise CertificateError("Fox operator of an integral action is not integral")
    pi_v = frame.operator(pi.matrix)
    big_m = el.image_index(pi_v)
    if big_m == 0:
        raise ConditionViolation("fox-singular", "the Fox derivative along x_k has infinite-index image in V")

    base = subgroup_report(spec, gamma[: k - 1])
    if not base.index_is_finite:
        raise ConditionViolation("infinite-index", "lifts of gamma_1..gamma_{k-1} generate an infinite-index subgroup")
    big_l = base.index

    def lift(j: int, y: Coords) -> VAElement:
        return spec.mul(spec.embed(frame.from_v(y)), gamma[j])

    def tuple_for(chosen: Sequence[Coords], tail: Sequence[Coords]) -> list[VAElement]:
        coords = list(chosen) + list(tail)
        return [lift(j, y) for j, y in enumerate(coords)]

    # base case -----------------------------------------------------------
    avoid = sorted(set(avoid_primes))
    for p in avoid:
        if not el.is_prime(p):
            raise PreconditionError(f"{p} is not prime")
    p0 = sorted(set(el.prime_factors(big_l)) | set(el.prime_factors(big_m)) | set(avoid))
    entries: dict[int, PrimeEntry] = {}
    for p in p0:
        entries[p] = _base_entry(spec, frame, gamma, p, p in avoid, budget)
        if not generates_mod(spec, tuple_for((), entries[p].tail), p):
            raise CertificateError(f"base-case lifts do not generate G mod {p}")
    stages = [Stage(0, (), tuple(p0), dict(entries), big_l)]

    # induction -----------------------------------------------------------
    chosen: list[Coords] = []
    primes = list(p0)
    for i in range(k - 1):
        y_next = _crt(entries, n)
        chosen.append(y_next)
        entries = {p: PrimeEntry(p, e.tail[1:], e.source, e.any_last) for p, e in entries.items()}
        generic = [lift(j, y) for j, y in enumerate(chosen)] + list(gamma[i + 1 : k - 1])
        n_i = subgroup_report(spec, generic).index
        if not el.is_finite(n_i):
            raise ConditionViolation("infinite-index", f"stage {i + 1}: chosen lifts generate an infinite-index subgroup")
        fresh = [p for p in el.prime_factors(n_i) if p not in entries]
        if fresh:
            delta = spec.mul(spec.inv(lift(i, y_next)), gamma[i])
            w0 = evaluate_word(w, generic + [gamma[k - 1]], spec)
            if delta.f != 0 or w0.f != 0:
                raise CertificateError("key-observation elements left V")
            target = el.vec_sub(frame.to_v(delta.v), frame.to_v(w0.v))
        for p in fresh:
            y = el.solve_mod_p(pi_v, target, p)
            if y is None:
                raise CertificateError(f"Fox operator not surjective mod {p} although {p} does not divide M")
            tail = (zero,) * (k - 2 - i) + (y,)
            entries[p] = PrimeEntry(p, tail, "key-observation")
            if not generates_mod(spec, tuple_for(chosen, tail), p):
                raise CertificateError(f"key observation failed to produce generators mod {p}")
        primes = sorted(set(primes) | set(fresh))
        entries = dict(sorted(entries.items()))
        stages.append(Stage(i + 1, tuple(chosen), tuple(primes), dict(entries), n_i))

    y_last = _crt(entries, n)
    chosen.append(y_last)
    stages.append(Stage(k, tuple(chosen), tuple(primes), {}, None))
    gens = tuple(lift(j, y) for j, y in enumerate(chosen))
    report = subgroup_report(spec, gens)
    if report.index != 1:
        raise CertificateError(f"lifted tuple has index {report.index}, not 1")
    return LiftOutcome(gens, tuple(chosen), tuple(stages), pi.matrix, big_m, big_l, frame.P, report)


def _base_entry(spec: VAGroupSpec, frame: _VFrame, gamma: Sequence[VAElement], p: int,
                avoid: bool, budget: Budget) -> PrimeEntry:
    """Gaschütz lifting of the images of gamma in G/U^p, pulled back to V-coordinates."""
    k = len(gamma)
    q = VAQuotient(spec, p)
    normal = q.translation_subgroup(frame.lattice)
    used = gamma[: k - 1] if avoid else gamma
    a = [q.project(g) for g in used]
    if avoid and not fingrp.product_generates(q, a, normal):
        raise ConditionViolation("avoid-prime", f"gamma_1..gamma_{k - 1} do not generate G mod V U^{p}")
    try:
        lifted = fingrp.gaschutz_lift(q, normal, a, budget, check_normal=False)
    except PreconditionError as exc:
        raise ConditionViolation("dp-exceeds-k", f"G/U^{p} is not {len(a)}-generated: {exc}") from exc
    tail = []
    for g, x in zip(used, lifted.lifts):
        img = q.lift(x)
        delta = el.vec_sub(img.v, g.v)
        tail.append(frame.solve_residue(delta, p))
    if avoid:
        tail.append((0,) * spec.rank)
    return PrimeEntry(p, tuple(tail), "gaschutz-avoid" if avoid else "gaschutz", any_last=avoid)


def stage_tuples(spec: VAGroupSpec, outcome: LiftOutcome, gamma: Sequence[VAElement]):
    """Yield (stage, prime, elements) for every recorded first-bullet tuple."""
    p_mat = outcome.basis

    def lift(j: int, y: Coords) -> VAElement:
        return spec.mul(spec.embed(el.mat_vec(p_mat, y)), gamma[j])

    for stage in outcome.stages:
        for p, entry in stage.entries.items():
            coords = list(stage.chosen) + list(entry.tail)
            yield stage, p, [lift(j, y) for j, y in enumerate(coords)]
