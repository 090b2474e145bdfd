from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polygen import exactlin as el
from polygen.errors import PreconditionError, WordSyntaxError
from polygen.words import (
    IDENTITY,
    ONE,
    FreeRingElement,
    Letter,
    Word,
    commutator,
    concat,
    evaluate_word,
    fox,
    fox_operator,
    fox_oracle,
    format_word,
    invert,
    parse_word,
    ring_operator,
    substitute,
)

from conftest import dinf

x1, x2, x3 = Word.gen(1), Word.gen(2), Word.gen(3)


def letters(w: Word) -> list[tuple[int, int]]:
    return [(l.generator_index, l.sign) for l in w.letters]


def words(alphabet: int = 4, max_len: int = 20):
    letter = st.tuples(st.integers(1, alphabet), st.sampled_from([1, -1]))
    return st.lists(letter, max_size=max_len).map(Word)


# parsing -------------------------------------------------------------------


def test_parse_examples():
    assert letters(parse_word("x1 x2^-1", 2)) == [(1, 1), (2, -1)]
    assert parse_word("x1 x1^-1", 1) == IDENTITY
    assert letters(parse_word("[x2,x1]", 2)) == [(2, 1), (1, 1), (2, -1), (1, -1)]


def test_parse_powers_and_groups():
    assert parse_word("x1^3", 1) == Word.gen(1, 3)
    assert parse_word("(x1 x2)^-2", 2) == invert(concat(x1, x2)) ** 2
    assert parse_word("[x1 x2, x3]^2", 3) == commutator(x1 * x2, x3) ** 2
    assert parse_word("", 1) == IDENTITY
    assert parse_word("1", 1) == IDENTITY


@pytest.mark.parametrize("text,pos", [("x1 x3", 3), ("[x1,x2", 6), ("x1 ^", 4), ("x1 ?", 3), ("x0", 0)])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(WordSyntaxError) as info:
        parse_word(text, 2)
    assert info.value.position == pos


@given(words())
def test_format_round_trip(w):
    assert parse_word(format_word(w), 4) == w


# word operations -------------------------------------------------------------


def test_concat_invert_examples():
    assert concat(x1, invert(x1)) == IDENTITY
    assert letters(invert(x1 * x2)) == [(2, -1), (1, -1)]
    assert concat(x1 * x2, invert(x2) * x3) == x1 * x3


def test_words_are_reduced():
    w = Word([(1, 1), (2, 1), (2, -1), (1, -1), (3, 1)])
    assert letters(w) == [(3, 1)]
    assert Letter(2, -1).inverse() == Letter(2, 1)


def test_substitute_examples():
    assert substitute(x1 * x2, [x2, x1]) == x2 * x1
    assert substitute(x1, [x1 * x2]) == x1 * x2
    assert substitute(commutator(x2, x1), [x1, x1]) == IDENTITY
    with pytest.raises(PreconditionError):
        substitute(x1 * x3, [x1, x2])


# Fox calculus --------------------------------------------------------------


def test_fox_examples():
    assert fox(x2, 1) == FreeRingElement()
    assert fox(x1, 1) == ONE
    assert fox(invert(x1), 1) == FreeRingElement.of(invert(x1), -1)
    expected = ONE - FreeRingElement.of(x2 * x1 * invert(x2))
    assert fox(commutator(x2, x1), 2) == expected
    assert str(fox(commutator(x2, x1), 2)) == "1 - x2 x1 x2^-1"


@settings(max_examples=150)
@given(words(), words(), st.integers(1, 4))
def test_product_rule(u, v, i):
    assert fox(concat(u, v), i) == fox(u, i) + u * fox(v, i)


@settings(max_examples=150)
@given(words(), st.integers(1, 4))
def test_inverse_rule(u, i):
    assert fox(invert(u), i) == -(invert(u) * fox(u, i))


@settings(max_examples=150)
@given(words())
def test_fundamental_identity(w):
    total = FreeRingElement()
    for i in range(1, 5):
        total = total + fox(w, i) * (FreeRingElement.of(Word.gen(i)) - ONE)
    assert total == FreeRingElement.of(w) - ONE


@settings(max_examples=100)
@given(words(3, 8), st.lists(words(3, 5), min_size=3, max_size=3), st.integers(1, 3))
def test_substitution_chain_rule(w, images, j):
    lhs = fox(substitute(w, images), j)
    rhs = FreeRingElement()
    for i in range(1, 4):
        rhs = rhs + fox(w, i).map_words(images) * fox(images[i - 1], j)
    assert lhs == rhs


# evaluation and operators --------------------------------------------------------


def test_evaluate_examples(spec_dinf):
    s = spec_dinf.element((0,), 1)
    t = spec_dinf.element((1,), 0)
    assert evaluate_word(IDENTITY, [s], spec_dinf) == spec_dinf.identity
    assert evaluate_word(x1 * x1, [s], spec_dinf) == spec_dinf.identity
    assert evaluate_word(commutator(x2, x1), [t, t], spec_dinf) == spec_dinf.identity
    with pytest.raises(PreconditionError):
        evaluate_word(x3, [s], spec_dinf)


def test_fox_operator_examples():
    a = ((0, -1), (1, 0))
    assert fox_operator(x3, 3, [a, a, a]).matrix == el.identity(2)
    op = fox_operator(commutator(x2, x1), 2, [a, el.identity(2)])
    assert op.matrix == el.mat_sub(el.identity(2), a)
    with pytest.raises(PreconditionError):
        fox_operator(x2, 1, [a])
    with pytest.raises(PreconditionError):
        fox_operator(x1 * x2, 1, [a, ((1,),)])


def test_fox_operator_matches_ring_evaluation():
    a = ((2, 1), (1, 1))
    b = ((1, 1), (0, 1))
    w = parse_word("[x1, x2^2] x2^-1 x1^3", 2)
    for i in (1, 2):
        assert fox_operator(w, i, [a, b]).matrix == ring_operator(fox(w, i), [a, b])


def test_fox_operator_rational_action():
    a = ((2,),)
    op = fox_operator(invert(x1), 1, [a])
    assert op.matrix == ((Fraction(-1, 2),),)
    assert not op.is_integral


def test_fox_oracle_examples(spec_dinf):
    s = spec_dinf.element((0,), 1)
    t = spec_dinf.element((5,), 0)
    assert fox_oracle(x2, 2, [s, t], (7,), spec_dinf) == (7,)
    for m in (-3, 1, 4):
        assert fox_oracle(commutator(x2, x1), 2, [s, t], (m,), spec_dinf) == (2 * m,)
    assert fox_oracle(IDENTITY, 1, [s], (4,), spec_dinf) == (0,)


def test_fox_operator_agrees_with_oracle_on_dinf():
    spec = dinf()
    w = parse_word("x1 x2 x1^-1 x2^2 [x1, x2]", 2)
    lifts = [spec.element((3,), 1), spec.element((-2,), 1)]
    mats = [spec.action_of(g) for g in lifts]
    for i in (1, 2):
        op = fox_operator(w, i, mats)
        for a in [(1,), (-4,)]:
            assert op.apply(a) == fox_oracle(w, i, lifts, a, spec)
