"""Free-group words and Fox differential calculus.

A :class:`Word` is always freely reduced.  Fox derivatives are computed
symbolically into the integral group ring of the free group
(:class:`FreeRingElement`) and can then be evaluated in any group, or as an
operator on Z^n when each generator is assigned an action matrix.
"""

from __future__ import annotations

import re
from math import gcd as _gcd
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Protocol, Sequence

from polygen import exactlin as el
from polygen.errors import InputError, PreconditionError, WordSyntaxError


class Letter(NamedTuple):
    generator_index: int
    sign: int

    def inverse(self) -> "Letter":
        return Letter(self.generator_index, -self.sign)


def _reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for letter in letters:
        if stack and stack[-1].generator_index == letter.generator_index and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


@dataclass(frozen=True, init=False)
class Word:
    letters: tuple[Letter, ...]

    def __init__(self, letters: Iterable = ()):
        normal = []
        for item in letters:
            idx, sign = item
            if idx < 1 or sign not in (1, -1):
                raise InputError(f"bad letter {item!r}")
            normal.append(Letter(int(idx), int(sign)))
        object.__setattr__(self, "letters", _reduce(normal))

    @classmethod
    def gen(cls, i: int, power: int = 1) -> "Word":
        sign = 1 if power > 0 else -1
        return cls([(i, sign)] * abs(power))

    @classmethod
    def from_signed(cls, seq: Iterable[int]) -> "Word":
        return cls((abs(s), 1 if s > 0 else -1) for s in seq)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        return concat(self, other)

    def __pow__(self, e: int) -> "Word":
        base = self if e >= 0 else invert(self)
        return Word(base.letters * abs(e))

    def __invert__(self) -> "Word":
        return invert(self)

    def __lt__(self, other: "Word") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self) -> tuple:
        return (len(self.letters), tuple((l.generator_index, -l.sign) for l in self.letters))

    @property
    def max_index(self) -> int:
        return max((l.generator_index for l in self.letters), default=0)

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"


IDENTITY = Word()


def concat(u: Word, v: Word) -> Word:
    return Word(u.letters + v.letters)


def invert(u: Word) -> Word:
    return Word(l.inverse() for l in reversed(u.letters))


def commutator(a: Word, b: Word) -> Word:
    """[a, b] = a b a^-1 b^-1."""
    return Word(a.letters + b.letters + invert(a).letters + invert(b).letters)


def substitute(w: Word, images: Sequence[Word]) -> Word:
    """Replace every x_i in ``w`` by ``images[i-1]`` and reduce."""
    if w.max_index > len(images):
        raise PreconditionError(
            f"word uses x{w.max_index} but only {len(images)} images were given"
        )
    inverses = [invert(img) for img in images]
    out: list[Letter] = []
    for letter in w.letters:
        img = images[letter.generator_index - 1] if letter.sign > 0 else inverses[letter.generator_index - 1]
        out.extend(img.letters)
    return Word(out)


# ---------------------------------------------------------------------------
# parsing and printing

_TOKEN = re.compile(r"\s*(?:(x)(\d+)|(\^)|(-?\d+)|([\[\],()]))")


class _Parser:
    def __init__(self, text: str, alphabet_size: int):
        self.text = text
        self.alphabet_size = alphabet_size
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                at = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise WordSyntaxError("unexpected character", text, at)
            start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
            if m.group(1):
                self.tokens.append(("gen", m.group(2), start))
            elif m.group(3):
                self.tokens.append(("^", "^", start))
            elif m.group(4):
                self.tokens.append(("int", m.group(4), start))
            else:
                self.tokens.append((m.group(5), m.group(5), start))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)

    def take(self, kind: str) -> str:
        if self.peek() != kind:
            raise WordSyntaxError(f"expected {kind!r}", self.text, self.pos())
        tok = self.tokens[self.i]
        self.i += 1
        return tok[1]

    def word(self) -> Word:
        letters: list[Letter] = []
        if self.peek() not in ("gen", "[", "("):
            raise WordSyntaxError("expected a term", self.text, self.pos())
        while self.peek() in ("gen", "[", "("):
            letters.extend(self.term().letters)
        return Word(letters)

    def exponent(self, base: Word) -> Word:
        if self.peek() == "^":
            self.take("^")
            return base ** int(self.take("int"))
        return base

    def term(self) -> Word:
        kind = self.peek()
        if kind == "gen":
            at = self.pos()
            idx = int(self.take("gen"))
            if idx < 1:
                raise WordSyntaxError("generator index must be positive", self.text, at)
            if idx > self.alphabet_size:
                raise WordSyntaxError(
                    f"generator x{idx} exceeds alphabet size {self.alphabet_size}", self.text, at
                )
            return self.exponent(Word.gen(idx))
        if kind == "[":
            self.take("[")
            a = self.word()
            self.take(",")
            b = self.word()
            self.take("]")
            return self.exponent(commutator(a, b))
        self.take("(")
        inner = self.word()
        self.take(")")
        return self.exponent(inner)


def parse_word(text: str, alphabet_size: int) -> Word:
    """Parse ``text`` over generators x1..x{alphabet_size}.

    The grammar is ``term (term)*`` with terms ``xN``, ``xN^e``, ``[u,v]``,
    ``(u)`` and ``(u)^e``; the empty string and ``"1"`` / ``"e"`` denote the
    identity.
    """
    if text.strip() in ("", "1", "e"):
        return IDENTITY
    parser = _Parser(text, alphabet_size)
    w = parser.word()
    if parser.peek() is not None:
        raise WordSyntaxError("trailing input", text, parser.pos())
    return w


def format_word(w: Word) -> str:
    if not w.letters:
        return "1"
    parts = []
    run_letter, run = w.letters[0], 0
    for letter in w.letters + (None,):
        if letter == run_letter:
            run += 1
            continue
        e = run * run_letter.sign
        parts.append(f"x{run_letter.generator_index}" + ("" if e == 1 else f"^{e}"))
        run_letter, run = letter, 1
    return " ".join(parts)


# ---------------------------------------------------------------------------
# the integral group ring of the free group


@dataclass(frozen=True, init=False)
class FreeRingElement:
    terms: Mapping[Word, int]

    def __init__(self, terms: Mapping[Word, int] | Iterable[tuple[Word, int]] = ()):
        acc: dict[Word, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for word, c in items:
            acc[word] = acc.get(word, 0) + c
        object.__setattr__(self, "terms", {w: c for w, c in sorted(acc.items()) if c})

    @classmethod
    def of(cls, w: Word, c: int = 1) -> "FreeRingElement":
        return cls([(w, c)])

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, FreeRingElement):
            return self.terms == other.terms
        return NotImplemented

    def __add__(self, other: "FreeRingElement") -> "FreeRingElement":
        return FreeRingElement(list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self) -> "FreeRingElement":
        return FreeRingElement((w, -c) for w, c in self.terms.items())

    def __sub__(self, other: "FreeRingElement") -> "FreeRingElement":
        return self + (-other)

    def __mul__(self, other: "FreeRingElement | Word | int") -> "FreeRingElement":
        if isinstance(other, int):
            return FreeRingElement((w, c * other) for w, c in self.terms.items())
        if isinstance(other, Word):
            other = FreeRingElement.of(other)
        return FreeRingElement(
            (concat(u, v), a * b) for u, a in self.terms.items() for v, b in other.terms.items()
        )

    def __rmul__(self, other: "Word | int") -> "FreeRingElement":
        if isinstance(other, int):
            return self * other
        return FreeRingElement.of(other) * self

    def __bool__(self) -> bool:
        return bool(self.terms)

    def map_words(self, images: Sequence[Word]) -> "FreeRingElement":
        """Apply the ring map induced by x_i -> images[i-1]."""
        return FreeRingElement((substitute(w, images), c) for w, c in self.terms.items())

    def augmentation(self) -> int:
        return sum(self.terms.values())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for i, (w, c) in enumerate(self.terms.items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = format_word(w)
            if w.is_identity():
                piece = str(mag)
            else:
                piece = body if mag == 1 else f"{mag}*{body}"
            out.append(("-" if c < 0 else "") + piece if i == 0 else f"{sign} {piece}")
        return " ".join(out)


ZERO = FreeRingElement()
ONE = FreeRingElement.of(IDENTITY)


def fox(w: Word, i: int) -> FreeRingElement:
    """Left Fox derivative of ``w`` with respect to x_i.

    Scanning left to right, an occurrence of x_i contributes its prefix and an
    occurrence of x_i^-1 contributes minus its prefix times x_i^-1.
    """
    terms: list[tuple[Word, int]] = []
    prefix: list[Letter] = []
    for letter in w.letters:
        if letter.generator_index == i:
            if letter.sign > 0:
                terms.append((Word(prefix), 1))
            else:
                terms.append((Word(prefix + [letter]), -1))
        prefix.append(letter)
    return FreeRingElement(terms)


# ---------------------------------------------------------------------------
# evaluation


class GroupLike(Protocol):
    def mul(self, a: Any, b: Any) -> Any: ...

    def inv(self, a: Any) -> Any: ...

    @property
    def identity(self) -> Any: ...


def evaluate_word(w: Word, assignment: Sequence[Any], group: GroupLike) -> Any:
    """Image of ``w`` under x_i -> ``assignment[i-1]`` in ``group``."""
    if w.max_index > len(assignment):
        raise PreconditionError(f"word uses x{w.max_index}, assignment has {len(assignment)} elements")
    inverses: dict[int, Any] = {}
    result = group.identity
    for letter in w.letters:
        g = assignment[letter.generator_index - 1]
        if letter.sign < 0:
            if letter.generator_index not in inverses:
                inverses[letter.generator_index] = group.inv(g)
            g = inverses[letter.generator_index]
        result = group.mul(result, g)
    return result


@dataclass(frozen=True)
class FoxOperator:
    """Integer (or, for non-unimodular actions, rational) n x n matrix."""

    matrix: el.IntMatrix

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @property
    def is_integral(self) -> bool:
        return el.is_integral(self.matrix)

    def apply(self, v: Sequence[int]) -> tuple:
        return el.mat_vec(self.matrix, v)

    def image_index(self) -> int:
        if not self.is_integral:
            raise PreconditionError("image index of a non-integral operator")
        return el.image_index(self.matrix)


def _check_matrices(matrices: Sequence[el.IntMatrix]) -> int:
    if not matrices:
        raise PreconditionError("fox_operator needs at least one action matrix")
    n = len(matrices[0])
    for m in matrices:
        if len(m) != n or any(len(r) != n for r in m):
            raise PreconditionError("action matrices must all be n x n for one n")
    return n


def fox_operator(w: Word, i: int, matrices: Sequence[el.IntMatrix]) -> FoxOperator:
    """The matrix of the Fox derivative of ``w`` along x_i acting on Z^n.

    ``matrices[j-1]`` is the action of the element assigned to x_j.  The value
    is accumulated in one left-to-right scan: the prefix matrix is added at
    each x_i and the updated prefix subtracted at each x_i^-1, which is the
    evaluation of :func:`fox` term by term.  Actions only need to be
    invertible over Q; prefixes are carried as an integer matrix over one
    positive denominator, reduced by the content after each inverse step.
    """
    if w.max_index > len(matrices):
        raise PreconditionError(f"word uses x{w.max_index}, assignment has {len(matrices)} matrices")
    n = _check_matrices(matrices)
    mats = [el.as_matrix(m) for m in matrices]
    if any(isinstance(x, Fraction) for m in mats for row in m for x in row):
        raise PreconditionError("action matrices must have integer entries")
    cols = {}
    for letter in w.letters:
        j = letter.generator_index
        if (j, letter.sign) in cols:
            continue
        m = mats[j - 1]
        if letter.sign > 0:
            cols[j, 1] = (_columns(m), 1)
        else:
            d = el.det(m)
            if d == 0:
                raise PreconditionError(f"x{j} is assigned a singular matrix")
            adj = el.mat_scale(d, el.mat_inverse(m))
            if d < 0:
                adj, d = el.mat_scale(-1, adj), -d
            cols[j, -1] = (_columns(el.normalize(adj)), d)
    num = [1 if r == c else 0 for r in range(n) for c in range(n)]
    den = 1
    acc = [0] * (n * n)
    acc_den = 1
    rows = range(n)
    for letter in w.letters:
        j = letter.generator_index
        mcols, scale = cols[j, letter.sign]
        if letter.sign > 0 and j == i:
            acc, acc_den = _acc_add(acc, acc_den, num, den, 1)
        num = [sum(a * b for a, b in zip(num[r * n:(r + 1) * n], col)) for r in rows for col in mcols]
        if scale != 1:
            den *= scale
            g = den
            for x in num:
                g = _gcd(g, x)
                if g == 1:
                    break
            if g != 1:
                num = [x // g for x in num]
                den //= g
        if letter.sign < 0 and j == i:
            acc, acc_den = _acc_add(acc, acc_den, num, den, -1)
    matrix = tuple(
        tuple(Fraction(acc[r * n + c], acc_den) if acc_den != 1 else acc[r * n + c] for c in range(n))
        for r in range(n)
    )
    return FoxOperator(el.normalize(matrix))


def _columns(m: el.IntMatrix) -> list[tuple[int, ...]]:
    return [tuple(row[c] for row in m) for c in range(len(m))]


def _acc_add(acc: list[int], acc_den: int, num: list[int], den: int, sign: int) -> tuple[list[int], int]:
    if den == acc_den:
        return [a + sign * b for a, b in zip(acc, num)], acc_den
    common = acc_den * den // _gcd(acc_den, den)
    fa, fb = common // acc_den, common // den
    out = [a * fa + sign * b * fb for a, b in zip(acc, num)]
    g = common
    for x in out:
        g = _gcd(g, x)
    return [x // g for x in out], common // g


def ring_operator(element: FreeRingElement, matrices: Sequence[el.IntMatrix]) -> el.IntMatrix:
    """Evaluate a group-ring element term by term as a matrix."""
    n = _check_matrices(matrices)
    acc = el.zeros(n, n)
    for w, c in element.terms.items():
        acc = el.mat_add(acc, el.mat_scale(c, word_matrix(w, matrices)))
    return el.normalize(acc)


def word_matrix(w: Word, matrices: Sequence[el.IntMatrix]) -> el.IntMatrix:
    n = _check_matrices(matrices)
    out = el.identity(n)
    for letter in w.letters:
        m = matrices[letter.generator_index - 1]
        out = el.mat_mul(out, m if letter.sign > 0 else el.mat_inverse(m))
    return el.normalize(out)


class ExtensionGroup(Protocol):
    """A group containing a free abelian normal subgroup V = Z^n."""

    def mul(self, a: Any, b: Any) -> Any: ...

    def inv(self, a: Any) -> Any: ...

    @property
    def identity(self) -> Any: ...

    def embed(self, v: Sequence[int]) -> Any: ...

    def translation(self, g: Any) -> tuple[int, ...] | None: ...


def fox_oracle(w: Word, i: int, lifts: Sequence[Any], a: Sequence[int], group: ExtensionGroup) -> tuple[int, ...]:
    """``w(..., a*lift_i, ...) * w(lifts)^-1`` computed inside ``group``.

    The result lies in V; its coordinates are returned.
    """
    av = group.embed(a)
    if group.translation(av) is None:
        raise PreconditionError("a is not an element of V")
    moved = list(lifts)
    moved[i - 1] = group.mul(av, lifts[i - 1])
    value = group.mul(evaluate_word(w, moved, group), group.inv(evaluate_word(w, lifts, group)))
    coords = group.translation(value)
    if coords is None:
        raise PreconditionError("oracle value left V; is V normal and abelian?")
    return coords
