"""Perfect-module certificates and the iterated commutator word.

A certificate is a list of integers s_i and monomials h_i in commuting
matrices A_1..A_r with  sum s_i (I - A(h_i)) = M I.  Composed with
:func:`build_nilpotent_word` it yields a word whose Fox derivative along the
last letter acts as M^d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Sequence

from polygen import exactlin as el
from polygen.errors import CertificateError, PreconditionError
from polygen.words import Word, commutator, concat, fox_operator, substitute, word_matrix


class InsolubleError(PreconditionError):
    """No certificate exists (``reason == "not-perfect"``) or none was found
    within the degree bound (``reason == "bound-too-small"``)."""

    def __init__(self, reason: str, message: str):
        super().__init__(f"[{reason}] {message}")
        self.reason = reason


@dataclass(frozen=True)
class NakayamaCert:
    terms: tuple[tuple[int, tuple[int, ...]], ...]  # (s_i, exponent vector of h_i)
    M: int
    matrices: tuple[el.IntMatrix, ...]

    def h_matrix(self, exps: Sequence[int]) -> el.IntMatrix:
        n = len(self.matrices[0])
        out = el.identity(n)
        for a, e in zip(self.matrices, exps):
            out = el.mat_mul(out, el.mat_pow(a, e))
        return out

    def operator(self) -> el.IntMatrix:
        n = len(self.matrices[0])
        acc = el.zeros(n, n)
        for s, exps in self.terms:
            acc = el.mat_add(acc, el.mat_scale(s, el.mat_sub(el.identity(n), self.h_matrix(exps))))
        return acc

    def verify(self) -> bool:
        n = len(self.matrices[0])
        return self.M != 0 and self.operator() == el.mat_scale(self.M, el.identity(n))

    def word_terms(self) -> list[tuple[int, Word]]:
        """Terms with h_i written as words x_1^e_1 ... x_r^e_r."""
        out = []
        for s, exps in self.terms:
            w = Word()
            for j, e in enumerate(exps, start=1):
                w = concat(w, Word.gen(j, e))
            out.append((s, w))
        return out


def _monomials(r: int, bound: int):
    """Nonzero exponent vectors by total degree, lexicographically descending within a degree."""
    for deg in range(1, bound + 1):
        for exps in sorted((e for e in product(range(deg + 1), repeat=r) if sum(e) == deg), reverse=True):
            yield exps


def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def _basic_solution(columns: list[list[int]], target: list[int]) -> list[Fraction] | None:
    """A solution of sum c_j columns_j = target with free variables zero."""
    nrows = len(target)
    ncols = len(columns)
    m = [[Fraction(columns[j][i]) for j in range(ncols)] + [Fraction(target[i])] for i in range(nrows)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    if any(m[i][ncols] != 0 for i in range(r, nrows)):
        return None
    sol = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        sol[c] = m[i][ncols]
    return sol


def is_perfect(matrices: Sequence[el.IntMatrix]) -> bool:
    """Whether sum_i (I - A_i) Q^n = Q^n, i.e. the rational module is perfect."""
    n = len(matrices[0])
    blocks = [el.mat_sub(el.identity(n), a) for a in matrices]
    rows = [[Fraction(x) for b in blocks for x in b[i]] for i in range(n)]
    return _rank(rows) == n


def nakayama(matrices: Sequence[Sequence[Sequence[int]]], degree_bound: int | None = None) -> NakayamaCert:
    """Integers s_i, M and monomials h_i with sum s_i (I - A(h_i)) = M I.

    Monomials are added in graded lexicographic order until the identity lies
    in the span of the I - A(h); the basic solution of that system is scaled
    by the common denominator M of its coefficients.
    """
    mats = tuple(el.as_matrix(a) for a in matrices)
    if not mats:
        raise PreconditionError("need at least one matrix")
    n = len(mats[0])
    if any(len(a) != n or any(len(r) != n for r in a) for a in mats):
        raise PreconditionError("matrices must be square of one size")
    for a in mats:
        for b in mats:
            if el.mat_mul(a, b) != el.mat_mul(b, a):
                raise PreconditionError("matrices do not commute")
    if not is_perfect(mats):
        raise InsolubleError("not-perfect", "the module has nonzero coinvariants over Q")
    bound = 2 * n if degree_bound is None else degree_bound
    ident = el.identity(n)
    target = [x for row in ident for x in row]
    chosen: list[tuple[int, ...]] = []
    columns: list[list[int]] = []
    for exps in _monomials(len(mats), bound):
        h = ident
        for a, e in zip(mats, exps):
            h = el.mat_mul(h, el.mat_pow(a, e))
        col = [x for row in el.mat_sub(ident, h) for x in row]
        if not any(col):
            continue
        chosen.append(exps)
        columns.append(col)
        sol = _basic_solution(columns, target)
        if sol is None:
            continue
        big_m = lcm(*(c.denominator for c in sol))
        terms = tuple((int(c * big_m), e) for c, e in zip(sol, chosen) if c != 0)
        cert = NakayamaCert(terms, big_m, mats)
        if not cert.verify():
            raise CertificateError("Nakayama certificate failed exact verification")
        return cert
    raise InsolubleError("bound-too-small", f"no certificate with monomials of degree <= {bound}")


@dataclass(frozen=True)
class WordPlan:
    w: Word
    k: int
    d: int
    terms: tuple[tuple[int, Word], ...]

    def expected_operator(self, matrices: Sequence[el.IntMatrix]) -> el.IntMatrix:
        """(sum s_i (I - A(h_i)))^d for the given action of x_1..x_{k-1}."""
        n = len(matrices[0])
        acc = el.zeros(n, n)
        for s, h in self.terms:
            acc = el.mat_add(acc, el.mat_scale(s, el.mat_sub(el.identity(n), word_matrix(h, matrices))))
        return el.normalize(el.mat_pow(acc, self.d))

    def operator(self, matrices: Sequence[el.IntMatrix]) -> el.IntMatrix:
        return fox_operator(self.w, self.k, matrices).matrix


def build_nilpotent_word(k: int, terms: Sequence[tuple[int, Word]], d: int) -> WordPlan:
    """w' = prod [x_k, h_i]^{s_i}, substituted into its own last slot d-1 times."""
    if d < 1:
        raise PreconditionError("nilpotency class d must be at least 1")
    if k < 1:
        raise PreconditionError("arity must be positive")
    terms = tuple((int(s), h) for s, h in terms)
    for _, h in terms:
        if h.max_index >= k:
            raise PreconditionError(f"h = {h} uses x{h.max_index}; only x1..x{k - 1} are allowed")
    xk = Word.gen(k)
    inner = Word()
    for s, h in terms:
        inner = concat(inner, commutator(xk, h) ** s)
    images = [Word.gen(j) for j in range(1, k)]
    w = inner
    for _ in range(d - 1):
        w = substitute(inner, images + [w])
    return WordPlan(w, k, d, terms)
