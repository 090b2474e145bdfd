"""Group description files and machine-readable reports.

A description file is YAML (JSON is a subset) with the fields ``rank``,
``finite_part``, ``action``, an optional sparse ``cocycle`` and optional
``name``/``comment``.  See ``docs/FORMAT.md`` for the grammar.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from polygen import exactlin as el
from polygen import fingrp
from polygen.errors import InputError
from polygen.vagroup import SubgroupReport, VAElement, VAGroupSpec
from polygen.words import Word, evaluate_word, format_word, parse_word

SCHEMA = "polygen-report/1"


@dataclass(frozen=True)
class GroupDescription:
    spec: VAGroupSpec
    f_generators: tuple[int, ...]
    metadata: Mapping[str, Any]
    digest: str


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def parse_document(text: str, source: str = "<input>") -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"{source}: not valid YAML/JSON: {exc}") from exc


def digest_of(*parts: str | bytes) -> str:
    h = hashlib.sha256()
    for part in parts:
        data = part.encode("utf-8") if isinstance(part, str) else part
        h.update(len(data).to_bytes(8, "big"))
        h.update(data)
    return "sha256:" + h.hexdigest()


def _int(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InputError(f"{what} must be an integer, got {x!r}")
    return x


def _int_matrix(raw: Any, n: int, what: str) -> el.IntMatrix:
    if not isinstance(raw, list) or len(raw) != n:
        raise InputError(f"{what} must be a list of {n} rows")
    rows = []
    for r in raw:
        if not isinstance(r, list) or len(r) != n:
            raise InputError(f"{what} must be {n}x{n}")
        rows.append(tuple(_int(x, what) for x in r))
    return tuple(rows)


def load_finite_part(raw: Any) -> tuple[fingrp.TableGroup, tuple[int, ...]]:
    """A finite group and its designated generators from a ``finite_part`` mapping."""
    if not isinstance(raw, Mapping):
        raise InputError("finite_part must be a mapping with 'table' or 'permutations'")
    if "permutations" in raw:
        perms = raw["permutations"]
        if not isinstance(perms, list) or not perms:
            raise InputError("finite_part.permutations must be a non-empty list")
        group = fingrp.from_permutations([[_int(x, "permutation entry") for x in p] for p in perms])
        return group, tuple(group.perm_generators)
    if "table" in raw:
        table = raw["table"]
        if not isinstance(table, list):
            raise InputError("finite_part.table must be a list of rows")
        group = fingrp.from_table([[_int(x, "table entry") for x in row] for row in table])
        gens = raw.get("generators")
        if gens is None:
            return group, tuple(group.generators)
        gens = tuple(_int(g, "generator") for g in gens)
        if any(not 0 <= g < group.order for g in gens):
            raise InputError("finite_part.generators out of range")
        if not fingrp.generates(group, gens):
            raise InputError("finite_part.generators do not generate the table group")
        return group, gens
    if "cyclic" in raw:
        m = _int(raw["cyclic"], "finite_part.cyclic")
        if m < 1:
            raise InputError("finite_part.cyclic must be positive")
        group = fingrp.cyclic(m)
        return group, ((1,) if m > 1 else ())
    raise InputError("finite_part needs one of 'table', 'permutations' or 'cyclic'")


def extend_action(group: fingrp.FiniteGroup, gens: Sequence[int], mats: Sequence[el.IntMatrix],
                  n: int) -> list[el.IntMatrix]:
    """A_f for every f from the matrices of the generators, by breadth-first products.

    Consistency (the result is a homomorphism) is checked afterwards by
    :class:`VAGroupSpec`.
    """
    action: dict[int, el.IntMatrix] = {0: el.identity(n)}
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for g, a in zip(gens, mats):
            fg = group.mul(f, g)
            cand = el.mat_mul(action[f], a)
            if fg not in action:
                action[fg] = cand
                queue.append(fg)
            elif action[fg] != cand:
                raise InputError(
                    f"action does not extend to F: two products reach f{fg} with different matrices"
                )
    return [action[f] for f in range(group.order)]


def _f_element(raw: Any, group: fingrp.FiniteGroup, gens: Sequence[int], what: str) -> int:
    if isinstance(raw, str):
        return int(evaluate_word(parse_word(raw, max(len(gens), 1)), list(gens), group))
    f = _int(raw, what)
    if not 0 <= f < group.order:
        raise InputError(f"{what} = {f} is outside F")
    return f


def spec_from_document(doc: Any, digest: str = "") -> GroupDescription:
    if not isinstance(doc, Mapping):
        raise InputError("a group description must be a mapping")
    unknown = set(doc) - {"rank", "finite_part", "action", "cocycle", "name", "comment", "metadata"}
    if unknown:
        raise InputError(f"unknown fields: {sorted(unknown)}")
    n = _int(doc.get("rank"), "rank")
    if n < 0:
        raise InputError("rank must be non-negative")
    group, gens = load_finite_part(doc.get("finite_part"))
    raw_action = doc.get("action", [])
    if not isinstance(raw_action, list) or len(raw_action) != len(gens):
        raise InputError(f"action must list one matrix per F-generator ({len(gens)})")
    mats = [_int_matrix(a, n, f"action[{i}]") for i, a in enumerate(raw_action)]
    action = extend_action(group, gens, mats, n)
    cocycle: dict[tuple[int, int], tuple[int, ...]] = {}
    for i, item in enumerate(doc.get("cocycle") or []):
        if not isinstance(item, Mapping) or set(item) != {"f", "g", "value"}:
            raise InputError(f"cocycle[{i}] must have exactly the keys f, g, value")
        f = _f_element(item["f"], group, gens, f"cocycle[{i}].f")
        g = _f_element(item["g"], group, gens, f"cocycle[{i}].g")
        value = item["value"]
        if not isinstance(value, list) or len(value) != n:
            raise InputError(f"cocycle[{i}].value must have length {n}")
        if (f, g) in cocycle:
            raise InputError(f"cocycle[{i}] repeats the pair (f{f}, f{g})")
        cocycle[(f, g)] = tuple(_int(x, f"cocycle[{i}].value") for x in value)
    name = str(doc.get("name", ""))
    meta = {"name": name, "comment": str(doc.get("comment", ""))}
    if isinstance(doc.get("metadata"), Mapping):
        meta.update({str(k): v for k, v in doc["metadata"].items()})
    spec = VAGroupSpec(n, group, action, cocycle, name=name, f_generators=gens)
    return GroupDescription(spec, gens, meta, digest)


def load_group(path: str | Path) -> GroupDescription:
    text = read_text(path)
    return spec_from_document(parse_document(text, str(path)), digest_of(text))


def load_table_group(path: str | Path) -> tuple[fingrp.TableGroup, tuple[int, ...], str]:
    """A bare finite group file: a mapping with 'table', 'permutations' or 'cyclic'."""
    text = read_text(path)
    doc = parse_document(text, str(path))
    if isinstance(doc, Mapping) and "finite_part" in doc:
        doc = doc["finite_part"]
    group, gens = load_finite_part(doc)
    return group, gens, digest_of(text)


# ---------------------------------------------------------------------------
# serialization


def element_to_json(g: VAElement) -> dict:
    return {"v": list(g.v), "f": g.f}


def element_from_json(raw: Any, spec: VAGroupSpec) -> VAElement:
    if isinstance(raw, Mapping):
        v, f = raw.get("v"), raw.get("f")
    elif isinstance(raw, list) and len(raw) == 2:
        v, f = raw
    else:
        raise InputError(f"element {raw!r} must be {{v: [...], f: int}} or [[...], f]")
    if not isinstance(v, list):
        raise InputError(f"element {raw!r}: translation part must be a list")
    return spec.element([_int(x, "translation entry") for x in v], _int(f, "F index"))


def lattice_to_json(lattice: el.Lattice) -> list[list[int]]:
    return [list(r) for r in lattice.basis]


def matrix_to_json(m: el.IntMatrix) -> list[list]:
    return [[x if isinstance(x, int) else str(x) for x in row] for row in m]


def index_to_json(idx: Any) -> int | str:
    return idx if el.is_finite(idx) else "infinite"


def report_to_json(report: SubgroupReport) -> dict:
    return {
        "index": index_to_json(report.index),
        "f_image_order": report.f_image.order,
        "f_image": list(report.f_image.elements),
        "intersection_hnf": lattice_to_json(report.intersection),
        "transversal_words": {str(f): list(w) for f, w in sorted(report.schreier_trace.transversal_words.items())},
    }


def word_to_json(w: Word) -> str:
    return format_word(w)


def dumps(doc: Mapping) -> str:
    """Canonical JSON: sorted keys, decimal integers, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def make_report(command: str, digest: str, seed: int | None, outcome: str,
                result: Mapping, certificates: Mapping, exit_code: int,
                flags: Mapping | None = None, timings: Mapping | None = None) -> dict:
    doc = {
        "schema": SCHEMA,
        "command": command,
        "inputs": {"digest": digest, "flags": dict(flags or {})},
        "seed": seed,
        "outcome": outcome,
        "result": dict(result),
        "certificates": dict(certificates),
        "exit_code": exit_code,
    }
    if timings is not None:
        doc["timings"] = dict(timings)
    return doc


def to_plain(x: Any) -> Any:
    """Convert numpy scalars and tuples so the JSON encoder accepts them."""
    if isinstance(x, Mapping):
        return {str(k): to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_plain(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x
