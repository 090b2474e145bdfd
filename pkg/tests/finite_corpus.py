"""Small finite groups used across the test suite, as table groups."""

from __future__ import annotations

import itertools

from polygen import fingrp


def c2xc2() -> fingrp.TableGroup:
    return fingrp.direct_product(fingrp.cyclic(2), fingrp.cyclic(2))


def c6() -> fingrp.TableGroup:
    return fingrp.cyclic(6)


def s3() -> fingrp.TableGroup:
    return fingrp.from_permutations([[1, 0, 2], [0, 2, 1]])


def d4() -> fingrp.TableGroup:
    return fingrp.from_permutations([[1, 2, 3, 0], [0, 3, 2, 1]])


def q8() -> fingrp.TableGroup:
    # elements (sign, unit) with units 1, i, j, k; index = 4 * (sign < 0) + unit
    mult = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
            (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
            (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
            (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}
    table = []
    for a in range(8):
        row = []
        for b in range(8):
            s, u = mult[(a % 4, b % 4)]
            if (a >= 4) != (b >= 4):
                s = -s
            row.append(u + (4 if s < 0 else 0))
        table.append(row)
    return fingrp.from_table(table)


def a4() -> fingrp.TableGroup:
    return fingrp.from_permutations([[1, 2, 0, 3], [1, 0, 3, 2]])


def s4() -> fingrp.TableGroup:
    return fingrp.from_permutations([[1, 2, 3, 0], [1, 0, 2, 3]])


def a5() -> fingrp.TableGroup:
    return fingrp.from_permutations([[1, 2, 0, 3, 4], [1, 2, 3, 4, 0]])


CORPUS = {"C2xC2": c2xc2, "C6": c6, "S3": s3, "D4": d4, "Q8": q8, "A4": a4, "S4": s4}


def normal_subgroups(q: fingrp.FiniteGroup) -> list[fingrp.FinSubgroup]:
    """Every normal subgroup, as normal closures of at most two elements.

    All groups in the corpus have normal subgroups generated as normal
    subgroups by two elements, so this enumeration is complete for them.
    """
    seen: dict[tuple[int, ...], fingrp.FinSubgroup] = {}
    for pair in itertools.combinations_with_replacement(range(q.order), 2):
        n = fingrp.normal_closure(q, list(pair))
        seen.setdefault(n.elements, n)
    return [seen[k] for k in sorted(seen, key=lambda e: (len(e), e))]
