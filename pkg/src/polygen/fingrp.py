"""Finite groups on the elements 0..order-1, with identity 0.

Subclasses provide vectorised multiplication (:meth:`FiniteGroup.mul_arrays`);
table-backed groups come from :func:`from_table` and :func:`from_permutations`,
and :class:`polygen.vagroup.VAQuotient` computes products arithmetically.
All searches (closure, minimal generation, Gaschütz lifting) run on that
interface, so quotients with a few thousand elements never need an
order x order table.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from polygen import exactlin as el
from polygen.budget import Budget
from polygen.errors import BudgetExhausted, CertificateError, InputError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_ORDER_CAP = 60_000
FULL_AXIOM_CHECK = 256


class FiniteGroup:
    """Abstract finite group.  Elements are ints, identity is 0."""

    order: int

    def mul_arrays(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inv_array(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # scalar conveniences -------------------------------------------------

    identity = 0

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_arrays(np.array([a]), np.array([b]))[0])

    def inv(self, a: int) -> int:
        return int(self.inv_array(np.array([a]))[0])

    def power(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 0
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def power_array(self, xs: np.ndarray, e: int) -> np.ndarray:
        result = np.zeros_like(xs)
        base = xs
        while e:
            if e & 1:
                result = self.mul_arrays(result, base)
            base = self.mul_arrays(base, base)
            e >>= 1
        return result

    @cached_property
    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    @cached_property
    def mult_table(self) -> np.ndarray:
        """Full multiplication table (materialised on first use)."""
        xs = np.repeat(self.elements, self.order)
        ys = np.tile(self.elements, self.order)
        return self.mul_arrays(xs, ys).reshape(self.order, self.order)

    @cached_property
    def inverse_table(self) -> np.ndarray:
        return self.inv_array(self.elements)

    @cached_property
    def generators(self) -> tuple[int, ...]:
        """A small generating set, built greedily."""
        gens: list[int] = []
        members = _closure_mask(self, gens)
        while not members.all():
            gens.append(int(np.flatnonzero(~members)[0]))
            members = _closure_mask(self, gens)
        return tuple(gens)

    def conjugate_array(self, s: int, xs: np.ndarray) -> np.ndarray:
        """s * x * s^-1 for each x."""
        sv = np.full_like(xs, s)
        return self.mul_arrays(self.mul_arrays(sv, xs), self.inv_array(sv))

    def element_orders(self) -> np.ndarray:
        orders = np.ones(self.order, dtype=np.int64)
        current = self.elements.copy()
        k = 1
        pending = current != 0
        while pending.any():
            k += 1
            current = self.mul_arrays(current, self.elements)
            done = pending & (current == 0)
            orders[done] = k
            pending &= ~done
        return orders

    def verify_axioms(self, samples: int = 1000, seed: int = 0) -> None:
        """Check identity, inverses and associativity.

        Exhaustive up to order 256, ``samples`` random triples above.
        """
        e = self.elements
        if not (self.mul_arrays(np.zeros_like(e), e) == e).all() or not (self.mul_arrays(e, np.zeros_like(e)) == e).all():
            raise InputError("element 0 is not a two-sided identity")
        if not (self.mul_arrays(e, self.inv_array(e)) == 0).all():
            raise InputError("inverse table is wrong")
        if self.order <= FULL_AXIOM_CHECK:
            t = self.mult_table
            lhs = t[t[:, :, None], e[None, None, :]]
            rhs = t[e[:, None, None], t[None, :, :]]
            if not (lhs == rhs).all():
                raise InputError("multiplication is not associative")
        else:
            rng = np.random.default_rng(seed)
            a, b, c = (rng.integers(0, self.order, samples) for _ in range(3))
            if not (self.mul_arrays(self.mul_arrays(a, b), c) == self.mul_arrays(a, self.mul_arrays(b, c))).all():
                raise InputError("multiplication is not associative")


class TableGroup(FiniteGroup):
    def __init__(self, table: np.ndarray, labels: Sequence | None = None):
        table = np.asarray(table, dtype=np.int64)
        self.order = table.shape[0]
        self._table = table
        inv = np.argmax(table == 0, axis=1)
        self._inv = inv
        self.labels = list(labels) if labels is not None else None

    def mul_arrays(self, xs, ys):
        return self._table[xs, ys]

    def inv_array(self, xs):
        return self._inv[xs]

    @property
    def mult_table(self) -> np.ndarray:
        return self._table


def from_table(table: Sequence[Sequence[int]], verify: bool = True) -> TableGroup:
    """Build a group from an explicit multiplication table (identity = 0)."""
    arr = np.asarray(table, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InputError("multiplication table must be a non-empty square array")
    m = arr.shape[0]
    if arr.min() < 0 or arr.max() >= m:
        raise InputError("table entries out of range")
    for row in arr:
        if len(set(row.tolist())) != m:
            raise InputError("table is not a Latin square")
    g = TableGroup(arr)
    if verify:
        g.verify_axioms()
    return g


def from_permutations(perms: Sequence[Sequence[int]], degree: int | None = None,
                      cap: int = DEFAULT_ORDER_CAP) -> TableGroup:
    """Closure of permutations (images of 0..deg-1) as a table group.

    Elements are numbered in breadth-first order from the identity, trying
    the generators in the given order; ``labels`` holds the permutations.
    """
    perms = [tuple(int(x) for x in p) for p in perms]
    if degree is None:
        degree = len(perms[0]) if perms else 1
    for p in perms:
        if sorted(p) != list(range(degree)):
            raise InputError(f"{p} is not a permutation of 0..{degree - 1}")
    ident = tuple(range(degree))
    elems = [ident]
    index = {ident: 0}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for p in perms:
                y = tuple(p[x_i] for x_i in x)  # x * p: apply x, then p
                if y not in index:
                    if len(elems) >= cap:
                        raise InputError(f"permutation group exceeds order cap {cap}")
                    index[y] = len(elems)
                    elems.append(y)
                    nxt.append(y)
        frontier = nxt
    n = len(elems)
    table = np.empty((n, n), dtype=np.int64)
    for i, x in enumerate(elems):
        for j, y in enumerate(elems):
            table[i, j] = index[tuple(y[x_i] for x_i in x)]
    g = TableGroup(table, labels=elems)
    g.perm_generators = tuple(index[p] for p in perms)
    return g


def cyclic(n: int) -> TableGroup:
    e = np.arange(n)
    return TableGroup((e[:, None] + e[None, :]) % n)


def direct_product(a: FiniteGroup, b: FiniteGroup) -> TableGroup:
    ta, tb = a.mult_table, b.mult_table
    m, n = a.order, b.order
    i = np.arange(m * n)
    xa, xb = i // n, i % n
    table = ta[xa[:, None], xa[None, :]] * n + tb[xb[:, None], xb[None, :]]
    return TableGroup(table)


# ---------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True)
class FinSubgroup:
    elements: tuple[int, ...]
    generators: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self._set

    @cached_property
    def _set(self) -> frozenset[int]:
        return frozenset(self.elements)

    def mask(self, order: int) -> np.ndarray:
        m = np.zeros(order, dtype=bool)
        m[list(self.elements)] = True
        return m


def _closure_mask(q: FiniteGroup, gens: Iterable[int], start: np.ndarray | None = None) -> np.ndarray:
    gens = [int(g) for g in gens if g != 0]
    members = np.zeros(q.order, dtype=bool)
    members[0] = True
    frontier = np.array([0], dtype=np.int64)
    if start is not None:
        members |= start
        frontier = np.flatnonzero(members)
    while frontier.size and gens:
        new = np.concatenate([q.mul_arrays(frontier, np.full_like(frontier, g)) for g in gens])
        new = new[~members[new]]
        if not new.size:
            break
        new = np.unique(new)
        members[new] = True
        frontier = new
    return members


def closure(q: FiniteGroup, gens: Sequence[int]) -> FinSubgroup:
    """Subgroup generated by ``gens`` (breadth-first saturation)."""
    for g in gens:
        if not 0 <= g < q.order:
            raise InputError(f"element {g} is not in a group of order {q.order}")
    mask = _closure_mask(q, gens)
    return FinSubgroup(tuple(int(x) for x in np.flatnonzero(mask)), tuple(int(g) for g in gens))


def generates(q: FiniteGroup, gens: Sequence[int]) -> bool:
    return bool(_closure_mask(q, gens).all())


def index(q: FiniteGroup, h: FinSubgroup) -> int:
    if q.order % h.order:
        raise CertificateError("subgroup order does not divide the group order")
    return q.order // h.order


def product_generates(q: FiniteGroup, gens: Sequence[int], normal: FinSubgroup) -> bool:
    """Whether <gens> N = Q for a normal subgroup N."""
    return bool(_closure_mask(q, gens, start=normal.mask(q.order)).all())


def is_normal(q: FiniteGroup, h: FinSubgroup) -> bool:
    mask = h.mask(q.order)
    elems = np.array(h.elements, dtype=np.int64)
    return all(mask[q.conjugate_array(s, elems)].all() for s in q.generators)


def normal_closure(q: FiniteGroup, gens: Sequence[int]) -> FinSubgroup:
    gens = [int(g) for g in gens]
    mask = _closure_mask(q, gens)
    while True:
        elems = np.flatnonzero(mask)
        conj = np.concatenate([q.conjugate_array(s, elems) for s in q.generators] or [elems])
        fresh = np.unique(conj[~mask[conj]])
        if not fresh.size:
            return FinSubgroup(tuple(int(x) for x in elems), tuple(gens))
        gens.extend(int(x) for x in fresh)
        mask = _closure_mask(q, gens, start=mask)


def derived_subgroup(q: FiniteGroup) -> FinSubgroup:
    gens = q.generators
    comms = []
    for a, b in itertools.combinations(gens, 2):
        ab = q.mul(a, b)
        comms.append(q.mul(ab, q.inv(q.mul(b, a))))
    return normal_closure(q, [c for c in comms if c != 0])


def abelianization(q: FiniteGroup) -> list[int]:
    """Invariant factors (> 1) of Q / [Q, Q].

    The elementary divisors are read off by counting, for each prime power
    p^j, the elements whose p^j-th power lies in the derived subgroup; the
    diagonal matrix of elementary divisors is then put in Smith form.
    """
    d = derived_subgroup(q)
    in_d = d.mask(q.order)
    ab_order = q.order // d.order
    elementary: list[int] = []
    for p in el.prime_factors(ab_order):
        prev_log = 0
        counts = []
        pj = p
        while True:
            killed = int(in_d[q.power_array(q.elements, pj)].sum()) // d.order
            log = _log_exact(killed, p)
            counts.append(log - prev_log)
            if p ** log == _p_part(ab_order, p):
                break
            prev_log = log
            pj *= p
        # counts[j] = number of cyclic factors of order >= p^(j+1)
        for j, c in enumerate(counts):
            nxt = counts[j + 1] if j + 1 < len(counts) else 0
            elementary.extend([p ** (j + 1)] * (c - nxt))
    if not elementary:
        return []
    diag = [[x if i == j else 0 for j in range(len(elementary))] for i, x in enumerate(elementary)]
    return [f for f in el.snf(diag) if f != 1]


def _log_exact(n: int, p: int) -> int:
    k = 0
    while n > 1:
        if n % p:
            raise CertificateError("abelianization count is not a prime power")
        n //= p
        k += 1
    return k


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def conjugacy_class_reps(q: FiniteGroup) -> list[int]:
    """Smallest element of each conjugacy class, in increasing order."""
    elems = q.elements
    cols = [q.conjugate_array(s, elems) for s in q.generators]
    if not cols:
        return [0]
    src = np.concatenate([elems for _ in cols])
    dst = np.concatenate(cols)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(q.order, q.order))
    _, labels = connected_components(graph, directed=True, connection="weak")
    seen: dict[int, int] = {}
    for x, lab in enumerate(labels.tolist()):
        seen.setdefault(lab, x)
    return sorted(seen.values())


# ---------------------------------------------------------------------------
# minimal generation


@dataclass(frozen=True)
class MinGenerators:
    """Outcome of :func:`min_generators`.

    ``d`` is exact when ``status == "FOUND"``; on ``"UNKNOWN"`` it is None and
    ``lower_bound`` is a proven lower bound for d(Q).
    """

    d: int | None
    witness: tuple[int, ...]
    lower_bound: int
    status: str
    seed: int
    checks: int = 0

    @property
    def known(self) -> bool:
        return self.status == "FOUND"


def min_generators(q: FiniteGroup, budget: Budget | None = None, lower_bound: int = 0,
                   max_d: int = 8) -> MinGenerators:
    """Exact d(Q) with a generating witness, or UNKNOWN on budget exhaustion.

    A lower bound comes from the abelianization.  For each candidate size,
    a seeded random search runs first; if it fails, an exhaustive search
    over (class representative, multiset of the remaining slots) either finds
    a witness or refutes that size.
    """
    budget = budget or Budget()
    if q.order == 1:
        return MinGenerators(0, (), 0, "FOUND", budget.seed)
    lb = max(1, lower_bound, len(abelianization(q)))
    meter = budget.meter()
    rng = random.Random(budget.seed)
    reps = None
    d = lb
    try:
        while d <= max_d:
            for _ in range(budget.random_tries):
                meter.tick("min_generators")
                cand = tuple(rng.randrange(1, q.order) for _ in range(d))
                if generates(q, cand):
                    return MinGenerators(d, _certify_gens(q, cand), lb, "FOUND", budget.seed, meter.checks)
            if reps is None:
                reps = [r for r in conjugacy_class_reps(q) if r != 0]
            nonid = range(1, q.order)
            for r in reps:
                for rest in itertools.combinations_with_replacement(nonid, d - 1):
                    meter.tick("min_generators")
                    cand = (r,) + rest
                    if generates(q, cand):
                        return MinGenerators(d, _certify_gens(q, cand), lb, "FOUND", budget.seed, meter.checks)
            d += 1
            lb = d
    except BudgetExhausted as exc:
        logger.info("min_generators gave up: %s", exc)
        return MinGenerators(None, (), lb, "UNKNOWN", budget.seed, meter.checks)
    return MinGenerators(None, (), lb, "UNKNOWN", budget.seed, meter.checks)


def _certify_gens(q: FiniteGroup, cand: Sequence[int]) -> tuple[int, ...]:
    if not generates(q, cand):
        raise CertificateError("witness does not generate")
    return tuple(int(c) for c in cand)


# ---------------------------------------------------------------------------
# Gaschütz lifting


@dataclass(frozen=True)
class GaschutzLift:
    lifts: tuple[int, ...]
    corrections: tuple[int, ...]  # g_i = a_i * n_i
    seed: int
    checks: int
    phase: str  # "identity", "random" or "exhaustive"


def gaschutz_lift(q: FiniteGroup, normal: FinSubgroup, a: Sequence[int],
                  budget: Budget | None = None, check_normal: bool = True) -> GaschutzLift:
    """Elements g_i in the cosets a_i N that generate Q.

    Preconditions: N normal, <a> N = Q, and len(a) >= d(Q).  The last one is
    tested against the abelianization bound up front; since a lift always
    exists when it holds, an exhaustive search that comes back empty proves
    len(a) < d(Q) and is reported as a precondition violation.
    """
    budget = budget or Budget()
    a = tuple(int(x) for x in a)
    if check_normal and not is_normal(q, normal):
        raise PreconditionError("N is not a normal subgroup")
    if not product_generates(q, a, normal):
        raise PreconditionError("<a> N is a proper subgroup of Q")
    if len(a) < len(abelianization(q)):
        raise PreconditionError(f"d = {len(a)} is below d(Q) (abelianization needs {len(abelianization(q))})")
    if generates(q, a):
        return GaschutzLift(a, (0,) * len(a), budget.seed, 0, "identity")
    n_elems = np.array(normal.elements, dtype=np.int64)
    meter = budget.meter()
    rng = random.Random(budget.seed)
    av = np.array(a, dtype=np.int64)

    def attempt(corr: Sequence[int]) -> tuple[int, ...] | None:
        meter.tick("gaschutz_lift")
        g = q.mul_arrays(av, np.asarray(corr, dtype=np.int64))
        return tuple(int(x) for x in g) if generates(q, g) else None

    for _ in range(budget.random_tries):
        corr = [int(n_elems[rng.randrange(n_elems.size)]) for _ in a]
        g = attempt(corr)
        if g is not None:
            return _checked_lift(q, normal, a, g, corr, budget, meter.checks, "random")
    total = n_elems.size ** len(a)
    if total > budget.max_checks - meter.checks:
        raise BudgetExhausted(f"gaschutz_lift: exhaustive space of {total} tuples exceeds budget")
    for corr in itertools.product(normal.elements, repeat=len(a)):
        g = attempt(corr)
        if g is not None:
            return _checked_lift(q, normal, a, g, corr, budget, meter.checks, "exhaustive")
    raise PreconditionError(f"no lift exists, so d = {len(a)} < d(Q)")


def _checked_lift(q, normal, a, g, corr, budget, checks, phase) -> GaschutzLift:
    inv_a = q.inv_array(np.array(a, dtype=np.int64))
    coset_part = q.mul_arrays(inv_a, np.array(g, dtype=np.int64))
    if not all(int(x) in normal for x in coset_part) or not generates(q, g):
        raise CertificateError("Gaschütz lift failed re-verification")
    return GaschutzLift(tuple(g), tuple(int(c) for c in corr), budget.seed, checks, phase)


def search_space_size(order: int, classes: int, d: int) -> int:
    """Candidates examined by the exhaustive phase of min_generators."""
    return classes * comb(order - 1 + d - 2, d - 1) if d >= 1 else 1
