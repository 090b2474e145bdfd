"""Virtually abelian groups 1 -> Z^n -> G -> F -> 1.

A group is stored as an extension datum: the finite group F, an action
f -> A_f in GL_n(Z) and a normalized 2-cocycle tau, with multiplication

    (v, f) (w, g) = (v + A_f w + tau(f, g), f g).

Translations (v, e) form the normal subgroup U = Z^n.  Subgroup indices are
computed by Schreier generators: a transversal of the F-image built from
words in the generators, whose Schreier elements span H intersected with U.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Mapping, Sequence

import numpy as np

from polygen import exactlin as el
from polygen import fingrp
from polygen.errors import InputError, PreconditionError


@dataclass(frozen=True)
class VAElement:
    v: tuple[int, ...]
    f: int

    def __str__(self) -> str:
        return f"({', '.join(map(str, self.v))}; f{self.f})"


class VAGroupSpec:
    """Extension datum (rank, F, action, cocycle), validated on construction."""

    def __init__(self, rank: int, finite: fingrp.FiniteGroup, action: Sequence[el.IntMatrix],
                 cocycle: Mapping[tuple[int, int], Sequence[int]] | None = None,
                 name: str = "", f_generators: Sequence[int] | None = None):
        self.rank = rank
        self.F = finite
        self.name = name
        self.action = tuple(el.as_matrix(a) for a in action)
        self.f_generators = tuple(f_generators) if f_generators is not None else finite.generators
        m = finite.order
        tau = np.zeros((m, m, rank), dtype=object)
        for (f, g), vec in (cocycle or {}).items():
            if not (0 <= f < m and 0 <= g < m):
                raise InputError(f"cocycle key ({f}, {g}) outside F")
            if len(vec) != rank:
                raise InputError(f"cocycle value at ({f}, {g}) has length {len(vec)}, expected {rank}")
            tau[f, g] = [int(x) for x in vec]
        self._tau = tau
        self._validate()
        self._ftable = finite.mult_table
        self._finv = finite.inverse_table

    # -- validation -------------------------------------------------------

    def _validate(self) -> None:
        n, m = self.rank, self.F.order
        if n < 0:
            raise InputError("rank must be non-negative")
        if len(self.action) != m:
            raise InputError(f"action must give {m} matrices, got {len(self.action)}")
        for f, a in enumerate(self.action):
            if len(a) != n or any(len(r) != n for r in a):
                raise InputError(f"action matrix of f{f} is not {n}x{n}")
            if n and abs(el.det(a)) != 1:
                raise InputError(f"action matrix of f{f} is not invertible over Z")
        if n and self.action[0] != el.identity(n):
            raise InputError("the identity of F must act trivially")
        table = self.F.mult_table
        for f in range(m):
            for g in range(m):
                if el.mat_mul(self.action[f], self.action[g]) != self.action[int(table[f, g])]:
                    raise InputError(f"action is not a homomorphism at (f{f}, f{g})")
        if n == 0:
            return
        for g in range(m):
            if any(self._tau[0, g]) or any(self._tau[g, 0]):
                raise InputError(f"cocycle is not normalized at f{g}")
        for f in range(m):
            for g in range(m):
                fg = int(table[f, g])
                for h in range(m):
                    gh = int(table[g, h])
                    lhs = el.vec_add(el.mat_vec(self.action[f], self.tau(g, h)), self.tau(f, gh))
                    rhs = el.vec_add(self.tau(fg, h), self.tau(f, g))
                    if lhs != rhs:
                        raise InputError(
                            f"cocycle condition fails at (f{f}, f{g}, f{h}): "
                            f"A_f tau(g,h) + tau(f,gh) = {lhs} but tau(fg,h) + tau(f,g) = {rhs}"
                        )

    # -- arithmetic -------------------------------------------------------

    def tau(self, f: int, g: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self._tau[f, g])

    @property
    def identity(self) -> VAElement:
        return VAElement((0,) * self.rank, 0)

    def element(self, v: Sequence[int], f: int = 0) -> VAElement:
        if len(v) != self.rank:
            raise InputError(f"translation {tuple(v)} has length {len(v)}, expected {self.rank}")
        if not 0 <= f < self.F.order:
            raise InputError(f"f{f} is not an element of F")
        return VAElement(tuple(int(x) for x in v), int(f))

    def mul(self, x: VAElement, y: VAElement) -> VAElement:
        if len(x.v) != self.rank or len(y.v) != self.rank:
            raise InputError("dimension mismatch")
        v = el.vec_add(el.vec_add(x.v, el.mat_vec(self.action[x.f], y.v)), self.tau(x.f, y.f))
        return VAElement(v, int(self._ftable[x.f, y.f]))

    def inv(self, x: VAElement) -> VAElement:
        fi = int(self._finv[x.f])
        w = el.mat_vec(self.action[fi], el.vec_add(x.v, self.tau(x.f, fi)))
        return VAElement(tuple(-c for c in w), fi)

    def power(self, x: VAElement, e: int) -> VAElement:
        if e < 0:
            x, e = self.inv(x), -e
        out = self.identity
        while e:
            if e & 1:
                out = self.mul(out, x)
            x = self.mul(x, x)
            e >>= 1
        return out

    def embed(self, v: Sequence[int]) -> VAElement:
        return self.element(v, 0)

    def translation(self, g: VAElement) -> tuple[int, ...] | None:
        return g.v if g.f == 0 else None

    def action_of(self, g: VAElement) -> el.IntMatrix:
        return self.action[g.f]

    def basis_elements(self, scale: int = 1) -> list[VAElement]:
        return [self.embed(tuple(scale if i == j else 0 for j in range(self.rank))) for i in range(self.rank)]

    def standard_generators(self) -> list[VAElement]:
        """Unit translations plus one lift (with zero translation) per F-generator."""
        return self.basis_elements() + [self.element((0,) * self.rank, f) for f in self.f_generators]

    @cached_property
    def coinvariant_factors(self) -> tuple[list[int], int]:
        """Invariant factors and free rank of Z^n / sum_f (I - A_f) Z^n."""
        n = self.rank
        rows = []
        for f in self.f_generators:
            d = el.mat_sub(el.identity(n), self.action[f])
            rows.extend(el.transpose(d))
        rows = [r for r in rows if any(r)]
        factors = el.snf(rows, n) if rows else []
        return factors, n - len(factors)

    def __repr__(self) -> str:
        return f"VAGroupSpec({self.name or 'unnamed'}: rank {self.rank}, |F| = {self.F.order})"


# ---------------------------------------------------------------------------
# finite quotients G / U^m


class VAQuotient(fingrp.FiniteGroup):
    """The finite group G / mZ^n with elements (v mod m, f).

    Index of (v, f) is ``f * m^n + sum v_i m^i``, so the identity is 0.
    Products are computed arithmetically rather than from a table.
    """

    def __init__(self, spec: VAGroupSpec, m: int, cap: int = fingrp.DEFAULT_ORDER_CAP):
        if m < 2:
            raise PreconditionError("quotient modulus must be at least 2")
        order = m ** spec.rank * spec.F.order
        if order > cap:
            raise PreconditionError(f"G/U^{m} has order {order}, above the cap {cap}")
        self.spec = spec
        self.m = m
        self.order = order
        self.block = m ** spec.rank
        n = spec.rank
        self._powers = np.array([m ** i for i in range(n)], dtype=np.int64)
        self._A = np.array([[list(r) for r in a] for a in spec.action], dtype=np.int64).reshape(spec.F.order, n, n)
        self._tau = spec._tau.astype(np.int64).reshape(spec.F.order, spec.F.order, n) % m
        self._ft = np.asarray(spec.F.mult_table, dtype=np.int64)
        self._finv = np.asarray(spec.F.inverse_table, dtype=np.int64)

    def _decode(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xs = np.asarray(xs, dtype=np.int64)
        code = xs % self.block
        digits = (code[..., None] // self._powers) % self.m
        return digits, xs // self.block

    def _encode(self, v: np.ndarray, f: np.ndarray) -> np.ndarray:
        return f * self.block + (v % self.m) @ self._powers

    def mul_arrays(self, xs, ys):
        xs, ys = np.broadcast_arrays(np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64))
        vx, fx = self._decode(xs)
        vy, fy = self._decode(ys)
        v = vx + np.einsum("...ij,...j->...i", self._A[fx], vy) + self._tau[fx, fy]
        return self._encode(v, self._ft[fx, fy])

    def inv_array(self, xs):
        vx, fx = self._decode(xs)
        fi = self._finv[fx]
        w = -np.einsum("...ij,...j->...i", self._A[fi], vx + self._tau[fx, fi])
        return self._encode(w, fi)

    def project(self, g: VAElement) -> int:
        return int(self._encode(np.array(g.v, dtype=np.int64), np.int64(g.f)))

    def lift(self, x: int) -> VAElement:
        v, f = self._decode(np.array(x))
        return VAElement(tuple(int(c) for c in v), int(f))

    def translation_subgroup(self, lattice: el.Lattice | None = None) -> fingrp.FinSubgroup:
        """Image of U (or of a sublattice of U) in the quotient."""
        rows = lattice.basis if lattice is not None else el.identity(self.spec.rank)
        gens = [self.project(self.spec.embed(r)) for r in rows]
        return fingrp.closure(self, gens)


def finite_quotient(spec: VAGroupSpec, m: int, cap: int = fingrp.DEFAULT_ORDER_CAP):
    """``(G/U^m, projection)``; the projection maps VAElements to indices."""
    q = VAQuotient(spec, m, cap)
    return q, q.project


# ---------------------------------------------------------------------------
# subgroup reports


@dataclass(frozen=True)
class SchreierTrace:
    f_order: tuple[int, ...]  # F-image in breadth-first discovery order
    transversal_words: Mapping[int, tuple[int, ...]]  # f -> generator positions (0-based)
    schreier_vectors: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SubgroupReport:
    f_image: fingrp.FinSubgroup
    intersection: el.Lattice
    index: int | object
    schreier_trace: SchreierTrace

    @property
    def generates(self) -> bool:
        return self.index == 1

    @property
    def index_is_finite(self) -> bool:
        return el.is_finite(self.index)


def subgroup_report(spec: VAGroupSpec, gens: Sequence[VAElement]) -> SubgroupReport:
    """Index of H = <gens> in G with its certificate.

    [G : H] = [F : image of H] * [Z^n : H meet Z^n], the second factor read
    from the HNF of the Schreier vectors.
    """
    gens = list(gens)
    n = spec.rank
    table = spec.F.mult_table
    transversal: dict[int, VAElement] = {0: spec.identity}
    words: dict[int, tuple[int, ...]] = {0: ()}
    order = [0]
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for j, g in enumerate(gens):
            fg = int(table[f, g.f])
            if fg not in transversal:
                transversal[fg] = spec.mul(transversal[f], g)
                words[fg] = words[f] + (j,)
                order.append(fg)
                queue.append(fg)
    inverses = {f: spec.inv(t) for f, t in transversal.items()}
    vectors = []
    for f in order:
        t = transversal[f]
        for g in gens:
            fg = int(table[f, g.f])
            s = spec.mul(spec.mul(t, g), inverses[fg])
            if s.f != 0:
                raise AssertionError("Schreier element left U")
            if any(s.v):
                vectors.append(s.v)
    lattice = el.hnf(vectors, n)
    f_image = fingrp.FinSubgroup(tuple(sorted(order)), tuple(g.f for g in gens))
    lat_index = el.lattice_index(lattice)
    if el.is_finite(lat_index):
        idx = (spec.F.order // len(order)) * lat_index
    else:
        idx = el.INFINITE
    trace = SchreierTrace(tuple(order), words, tuple(vectors))
    return SubgroupReport(f_image, lattice, idx, trace)


def generates_mod(spec: VAGroupSpec, gens: Sequence[VAElement], m: int) -> bool:
    """Whether <gens> U^m = G."""
    if spec.rank == 0:
        return subgroup_report(spec, gens).generates
    return subgroup_report(spec, list(gens) + spec.basis_elements(m)).generates


def quotient_index(spec: VAGroupSpec, gens: Sequence[VAElement], m: int,
                   cap: int = fingrp.DEFAULT_ORDER_CAP) -> int:
    """[G : H U^m], counted by closure in the finite quotient G/U^m."""
    q, proj = finite_quotient(spec, m, cap)
    h = fingrp.closure(q, [proj(g) for g in gens])
    return q.order // h.order


def brute_force_index(spec: VAGroupSpec, gens: Sequence[VAElement],
                      cap: int = fingrp.DEFAULT_ORDER_CAP) -> int | object:
    """Independent index check by coset counting in a finite quotient.

    When H has finite index, U^m lies inside H for m the exponent of
    Z^n / (H meet Z^n), so [G : H] = [G/U^m : H/U^m].  The lattice is only
    used to choose m.
    """
    report = subgroup_report(spec, gens)
    if not el.is_finite(report.index):
        return el.INFINITE
    if spec.rank == 0:
        q = spec.F
        return q.order // fingrp.closure(q, [g.f for g in gens]).order
    m = max(2, el.coset_exponent(report.intersection))
    return quotient_index(spec, gens, m, cap)


# ---------------------------------------------------------------------------
# p-good subgroups


@dataclass(frozen=True)
class PGoodSubgroup:
    """The designated p-good normal subgroup U^p = pZ^n."""

    prime: int
    lattice: el.Lattice

    @property
    def index_in_U(self) -> int:
        return el.lattice_index(self.lattice)

    def contains(self, other: el.Lattice) -> bool:
        return other.issubset(self.lattice)


def p_good(spec: VAGroupSpec, p: int) -> PGoodSubgroup:
    if not el.is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    return PGoodSubgroup(p, el.Lattice.scaled(spec.rank, p) if spec.rank else el.hnf([], 0))


@dataclass(frozen=True)
class PGoodVerdict:
    status: str  # PASS, FAIL or NOT_APPLICABLE
    index: int | object
    prime: int


def check_p_good_witness(spec: VAGroupSpec, p: int, h_gens: Sequence[VAElement]) -> PGoodVerdict:
    """Check that H U^p = G forces [G : H] finite and prime to p."""
    p_good(spec, p)
    if not generates_mod(spec, h_gens, p):
        return PGoodVerdict("NOT_APPLICABLE", subgroup_report(spec, h_gens).index, p)
    idx = subgroup_report(spec, h_gens).index
    ok = el.is_finite(idx) and gcd(idx, p) == 1
    return PGoodVerdict("PASS" if ok else "FAIL", idx, p)
