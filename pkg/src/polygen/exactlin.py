"""Exact integer linear algebra.

Matrices are tuples of row tuples holding Python ints (or ``Fraction`` where a
function says so).  Vectors are tuples.  Nothing here uses floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from polygen.errors import InputError, PreconditionError

IntMatrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]


class _Infinite:
    """Marker for an infinite index.  There is exactly one instance."""

    _instance: "_Infinite | None" = None

    def __new__(cls) -> "_Infinite":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    __str__ = __repr__

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()


def is_finite(index: int | _Infinite) -> bool:
    return index is not INFINITE


# ---------------------------------------------------------------------------
# small matrix helpers


def as_matrix(rows: Iterable[Iterable]) -> IntMatrix:
    mat = tuple(tuple(_exact(x) for x in row) for row in rows)
    if mat and len({len(r) for r in mat}) != 1:
        raise InputError("matrix rows have different lengths")
    return mat


def _exact(x):
    if isinstance(x, bool):
        raise InputError("booleans are not matrix entries")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if hasattr(x, "__index__"):
        return int(x)
    raise InputError(f"non-integer matrix entry {x!r}")


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(rows: int, cols: int) -> IntMatrix:
    return tuple((0,) * cols for _ in range(rows))


def mat_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    cols = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def mat_vec(a: IntMatrix, v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_add(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def mat_sub(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a, b))


def mat_scale(c, a: IntMatrix) -> IntMatrix:
    return tuple(tuple(c * x for x in r) for r in a)


def mat_pow(a: IntMatrix, e: int) -> IntMatrix:
    if e < 0:
        return mat_pow(mat_inverse(a), -e)
    result = identity(len(a))
    base = a
    while e:
        if e & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        e >>= 1
    return result


def transpose(a: IntMatrix) -> IntMatrix:
    return tuple(zip(*a))


def vec_add(u: Sequence, v: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(u, v))


def vec_mod(u: Sequence[int], m: int) -> Vector:
    return tuple(x % m for x in u)


def normalize(a) -> IntMatrix:
    """Turn integral ``Fraction`` entries back into ints."""
    return tuple(tuple(_exact(x) for x in row) for row in a)


def is_integral(a) -> bool:
    return all(not isinstance(x, Fraction) or x.denominator == 1 for row in a for x in row)


def det(a: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by Bareiss elimination."""
    n = len(a)
    if n == 0:
        return 1
    if any(len(r) != n for r in a):
        raise InputError("determinant of a non-square matrix")
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def mat_inverse(a: Sequence[Sequence]) -> IntMatrix:
    """Exact inverse over the rationals; entries are ints where integral."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise PreconditionError("matrix is singular")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return normalize(row[n:] for row in m)


def is_unimodular(a: IntMatrix) -> bool:
    return all(isinstance(x, int) for row in a for x in row) and abs(det(a)) == 1


# ---------------------------------------------------------------------------
# Hermite and Smith normal forms


@dataclass(frozen=True)
class Lattice:
    """A sublattice of Z^n given by its canonical row-style HNF basis."""

    ambient_rank: int
    basis: IntMatrix

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.ambient_rank

    def contains(self, v: Sequence[int]) -> bool:
        return hnf(self.basis + (tuple(v),), self.ambient_rank) == self

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def __add__(self, other: "Lattice") -> "Lattice":
        return hnf(self.basis + other.basis, self.ambient_rank)

    def issubset(self, other: "Lattice") -> bool:
        return (self + other) == other

    @classmethod
    def scaled(cls, n: int, m: int) -> "Lattice":
        """The lattice m Z^n."""
        return hnf(tuple(tuple(m if i == j else 0 for j in range(n)) for i in range(n)), n)


def hnf(rows: Iterable[Sequence[int]], ncols: int | None = None) -> Lattice:
    """Row-style Hermite normal form of the row span of ``rows``.

    Pivots are positive, entries above a pivot lie in ``[0, pivot)`` and zero
    rows are dropped.  ``ncols`` must be given when ``rows`` is empty.
    """
    a = [list(r) for r in rows]
    if ncols is None:
        if not a:
            raise InputError("hnf of an empty matrix needs ncols")
        ncols = len(a[0])
    if any(len(r) != ncols for r in a):
        raise InputError("hnf: ragged matrix")
    top = 0
    for col in range(ncols):
        while True:
            live = [r for r in range(top, len(a)) if a[r][col] != 0]
            if not live:
                break
            piv = min(live, key=lambda r: abs(a[r][col]))
            a[top], a[piv] = a[piv], a[top]
            done = True
            for r in range(top + 1, len(a)):
                if a[r][col]:
                    q = a[r][col] // a[top][col]
                    a[r] = [x - q * y for x, y in zip(a[r], a[top])]
                    if a[r][col]:
                        done = False
            if done:
                break
        if top < len(a) and a[top][col] != 0:
            if a[top][col] < 0:
                a[top] = [-x for x in a[top]]
            p = a[top][col]
            for r in range(top):
                q = a[r][col] // p
                if q:
                    a[r] = [x - q * y for x, y in zip(a[r], a[top])]
            top += 1
    basis = tuple(tuple(r) for r in a[:top])
    return Lattice(ncols, basis)


def lattice_index(lattice: Lattice) -> int | _Infinite:
    """Index of the lattice in Z^n, or ``INFINITE`` when rank deficient."""
    if not lattice.is_full_rank:
        return INFINITE
    index = 1
    for i, row in enumerate(lattice.basis):
        index *= row[i]
    return index


def snf(rows: Sequence[Sequence[int]], ncols: int | None = None) -> list[int]:
    """Nonzero invariant factors d1 | d2 | ... of an integer matrix."""
    a = [list(r) for r in rows]
    if not a:
        return []
    ncols = len(a[0]) if ncols is None else ncols
    nrows = len(a)
    diag: list[int] = []
    t = 0
    while t < min(nrows, ncols):
        entries = [(abs(a[i][j]), i, j) for i in range(t, nrows) for j in range(t, ncols) if a[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        while True:
            p = a[t][t]
            clean = True
            for i in range(t + 1, nrows):
                if a[i][t]:
                    q = a[i][t] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, ncols):
                if a[t][j]:
                    q = a[t][j] // p
                    for row in a:
                        row[j] -= q * row[t]
                    if a[t][j]:
                        clean = False
            if clean:
                # remaining block must be divisible by the pivot
                bad = next(
                    ((i, j) for i in range(t + 1, nrows) for j in range(t + 1, ncols) if a[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                continue
            entries = [(abs(a[i][j]), i, j) for i in range(t, nrows) for j in range(t, ncols)
                       if a[i][j] and (i == t or j == t)]
            _, pi, pj = min(entries)
            a[t], a[pi] = a[pi], a[t]
            for row in a:
                row[t], row[pj] = row[pj], row[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def coset_exponent(lattice: Lattice) -> int:
    """Exponent of the finite group Z^n / L (L of full rank)."""
    if not lattice.is_full_rank:
        raise PreconditionError("quotient by a rank-deficient lattice is infinite")
    factors = snf(lattice.basis)
    return factors[-1] if factors else 1


def image_index(a: IntMatrix) -> int:
    """|det A|, the index of A Z^n in Z^n; 0 signals infinite index."""
    if any(len(r) != len(a) for r in a):
        raise InputError("image_index needs a square matrix")
    return abs(det(a))


# ---------------------------------------------------------------------------
# modular arithmetic


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of |n| in increasing order (empty for 0, ±1)."""
    n = abs(n)
    out = []
    f = 2
    while n > 1 and f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def next_prime(n: int) -> int:
    p = max(2, n + 1)
    while not is_prime(p):
        p += 1
    return p


def solve_mod_p(a: Sequence[Sequence[int]], b: Sequence[int], p: int) -> Vector | None:
    """A solution of ``a x = b (mod p)`` with entries in [0, p), or None.

    ``None`` is returned only when the system has no solution over GF(p).
    """
    if not is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    m = [[x % p for x in row] + [b[i] % p] for i, row in enumerate(a)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    if any(m[i][ncols] for i in range(r, nrows)):
        return None
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][ncols]
    return tuple(x)


def crt_vector(residues: Sequence[tuple[Sequence[int], int]]) -> tuple[Vector, int]:
    """Combine ``(vector, prime)`` pairs into one vector modulo the product.

    Returns ``(x, modulus)`` with ``0 <= x_i < modulus``.
    """
    primes = [p for _, p in residues]
    if len(set(primes)) != len(primes):
        raise PreconditionError(f"duplicate primes in CRT data: {primes}")
    if not residues:
        raise PreconditionError("crt_vector needs at least one residue")
    dim = len(residues[0][0])
    x = [0] * dim
    modulus = 1
    for vec, p in residues:
        if len(vec) != dim:
            raise InputError("CRT residues of different lengths")
        inv = pow(modulus, -1, p)
        for i in range(dim):
            t = ((vec[i] - x[i]) * inv) % p
            x[i] += modulus * t
        modulus *= p
    return tuple(v % modulus for v in x), modulus


def lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b) if a and b else 0, values, 1)
