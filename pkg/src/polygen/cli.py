"""Command-line interface: ``polygen <command> ...``.

Every command prints a short human-readable summary, or with ``--json`` a
canonical report (schema ``polygen-report/1``).  Exit codes: 0 success,
1 input or validation error, 2 search budget exhausted (UNKNOWN),
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Sequence


from polygen import exactlin as el
from polygen import fingrp
from polygen import io as pio
from polygen.budget import DEFAULT_SEED, Budget
from polygen.errors import BudgetExhausted, CertificateError, InputError, PolygenError, PreconditionError
from polygen.genlift import (
    InsolubleError,
    PrimePolicy,
    build_nilpotent_word,
    certify,
    dp,
    dp_profile,
    generate,
    nakayama,
)
from polygen.vagroup import finite_quotient, subgroup_report
from polygen.words import fox, fox_operator, parse_word

EXIT_OK, EXIT_INPUT, EXIT_UNKNOWN, EXIT_INTERNAL = 0, 1, 2, 3

logger = logging.getLogger("polygen")


class Outcome:
    """What a command produced: summary lines plus the report payload."""

    def __init__(self, outcome: str, result: dict, certificates: dict | None = None,
                 lines: Sequence[str] = (), exit_code: int = EXIT_OK, digest: str = ""):
        self.outcome = outcome
        self.result = result
        self.certificates = certificates or {}
        self.lines = list(lines)
        self.exit_code = exit_code
        self.digest = digest


# ---------------------------------------------------------------------------
# argument helpers


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"expected a comma-separated list of integers, got {text!r}") from exc


def _json_or_file(text: str, what: str) -> Any:
    """Inline YAML/JSON, or a path to a file holding it."""
    path = Path(text)
    if path.is_file():
        return pio.parse_document(pio.read_text(path), str(path))
    return pio.parse_document(text, what)


def _budget(args: argparse.Namespace) -> Budget:
    kwargs: dict[str, Any] = {"seed": args.seed}
    if getattr(args, "budget", None) is not None:
        if args.budget < 1:
            raise InputError("--budget must be positive")
        kwargs["max_checks"] = args.budget
    return Budget(**kwargs)


def _policy(args: argparse.Namespace) -> PrimePolicy:
    override = tuple(_int_list(args.primes)) if getattr(args, "primes", None) else None
    extras = tuple(_int_list(args.extra_primes)) if getattr(args, "extra_primes", None) else ()
    return PrimePolicy(extras=extras, override=override)


# ---------------------------------------------------------------------------
# commands


def cmd_dp(args: argparse.Namespace) -> Outcome:
    desc = pio.load_group(args.file)
    budget = _budget(args)
    value = dp(desc.spec, args.prime, budget)
    result = {
        "prime": value.prime,
        "d_p": value.d,
        "status": value.status,
        "lower_bound": value.lower_bound,
        "quotient_order": value.quotient_order,
        "witness": [pio.element_to_json(g) for g in value.witness],
    }
    if value.known:
        lines = [f"d_{value.prime} = {value.d}  (|G/U^{value.prime}| = {value.quotient_order})",
                 "witness: " + ", ".join(str(g) for g in value.witness)]
        return Outcome("FOUND", result, lines=lines, digest=desc.digest)
    lines = [f"d_{value.prime} UNKNOWN (budget exhausted); lower bound {value.lower_bound}"]
    return Outcome("UNKNOWN", result, lines=lines, exit_code=EXIT_UNKNOWN, digest=desc.digest)


def _profile_json(profile) -> dict:
    return {
        "alpha": profile.alpha,
        "beta": profile.beta,
        "complete": profile.complete,
        "primes": {
            str(p): {
                "d_p": v.d,
                "status": v.status,
                "reason": profile.reasons.get(p, ""),
                "witness": [pio.element_to_json(g) for g in v.witness],
            }
            for p, v in profile.per_prime.items()
        },
    }


def cmd_dhat(args: argparse.Namespace) -> Outcome:
    desc = pio.load_group(args.file)
    profile = dp_profile(desc.spec, _policy(args), _budget(args))
    result = _profile_json(profile)
    table = [f"  p = {p}: d_p = {v.d if v.known else 'UNKNOWN'}  ({profile.reasons.get(p, '')})"
             for p, v in profile.per_prime.items()]
    if not profile.complete:
        return Outcome("UNKNOWN", result, lines=["profile incomplete; alpha is a lower bound only"] + table,
                       exit_code=EXIT_UNKNOWN, digest=desc.digest)
    result["dhat"] = profile.alpha
    result["status"] = "HEURISTIC"
    lines = [f"d(G^) = {profile.alpha}  [HEURISTIC: maximum over the primes below]"] + table
    return Outcome("HEURISTIC", result, lines=lines, digest=desc.digest)


def _stage_json(stage) -> dict:
    return {
        "i": stage.i,
        "chosen": [list(y) for y in stage.chosen],
        "primes": list(stage.primes),
        "generic_index": stage.generic_index if stage.generic_index is None else pio.index_to_json(stage.generic_index),
        "entries": {
            str(p): {"tail": [list(y) for y in e.tail], "source": e.source, "any_last": e.any_last}
            for p, e in stage.entries.items()
        },
    }


def cmd_generate(args: argparse.Namespace) -> Outcome:
    desc = pio.load_group(args.file)
    spec = desc.spec
    avoid = _int_list(args.avoid) if args.avoid else []
    res = generate(spec, coprime_N=args.coprime, policy=_policy(args), budget=_budget(args), avoid_primes=avoid)
    verdict = certify(res, spec, check_ledger=True)
    result = {
        "k": res.k,
        "alpha": res.alpha,
        "beta": res.beta,
        "route": res.route,
        "generators": [pio.element_to_json(g) for g in res.generators],
        "gamma": [pio.element_to_json(g) for g in res.gamma],
        "word": pio.word_to_json(res.word),
        "target_V": pio.lattice_to_json(res.target_V),
        "ledger": [_stage_json(s) for s in res.stages],
        "profile": _profile_json(res.profile) if res.profile is not None else None,
    }
    certs: dict[str, Any] = {"verification": pio.report_to_json(res.verification), "certify": str(verdict)}
    if res.lift is not None:
        certs["fox_index"] = res.lift.fox_index
        certs["base_index"] = pio.index_to_json(res.lift.base_index)
    if res.coprime_certificate is not None:
        c = res.coprime_certificate
        certs["coprime"] = {"N": c.N, "index": pio.index_to_json(c.index), "gcd": c.gcd}
    if avoid:
        idx = subgroup_report(spec, res.generators[: res.k - 1]).index
        certs["avoid"] = {"primes": avoid, "index_first_k_minus_1": pio.index_to_json(idx)}
    if not verdict.passed:
        raise CertificateError(f"certify failed: {verdict}")
    lines = [f"generating set of size k = {res.k}  (alpha = {res.alpha}, beta = {res.beta}, route {res.route})"]
    lines += [f"  g{j + 1} = {g}" for j, g in enumerate(res.generators)]
    lines.append(f"index of <g> in G: {res.verification.index}   certify: {verdict}")
    if res.coprime_certificate is not None:
        c = res.coprime_certificate
        lines.append(f"first {res.alpha} generators: index {c.index}, gcd with {c.N} = {c.gcd}")
    return Outcome("PASS", result, certs, lines, digest=desc.digest)


def _elements_arg(args: argparse.Namespace, spec) -> list:
    if args.from_report:
        doc = pio.parse_document(pio.read_text(args.from_report), args.from_report)
        try:
            raw = doc["result"]["generators"]
        except (TypeError, KeyError) as exc:
            raise InputError("report has no result.generators") from exc
    elif args.elements is not None:
        raw = _json_or_file(args.elements, "--elements")
    else:
        raise InputError("give --elements or --from-report")
    if not isinstance(raw, list):
        raise InputError("elements must be a list")
    return [pio.element_from_json(x, spec) for x in raw]


def cmd_verify(args: argparse.Namespace) -> Outcome:
    desc = pio.load_group(args.file)
    gens = _elements_arg(args, desc.spec)
    report = subgroup_report(desc.spec, gens)
    result = pio.report_to_json(report)
    result["elements"] = [pio.element_to_json(g) for g in gens]
    lines = [
        f"F-image order: {report.f_image.order} of {desc.spec.F.order}",
        f"intersection with Z^{desc.spec.rank} (HNF rows): {pio.lattice_to_json(report.intersection)}",
        f"index: {pio.index_to_json(report.index)}",
    ]
    outcome = "GENERATES" if report.generates else "PROPER"
    return Outcome(outcome, result, lines=lines, digest=desc.digest)


def cmd_gaschutz(args: argparse.Namespace) -> Outcome:
    group, _, digest = pio.load_table_group(args.file)
    normal_gens = _int_list(args.normal) if args.normal else []
    a = _int_list(args.tuple)
    for x in normal_gens + a:
        if not 0 <= x < group.order:
            raise InputError(f"element {x} outside the group of order {group.order}")
    normal = fingrp.closure(group, normal_gens)
    if not fingrp.is_normal(group, normal):
        raise PreconditionError("--normal does not generate a normal subgroup")
    lift = fingrp.gaschutz_lift(group, normal, a, _budget(args), check_normal=False)
    result = {
        "tuple": a,
        "normal_order": normal.order,
        "lifts": list(lift.lifts),
        "corrections": list(lift.corrections),
        "phase": lift.phase,
        "checks": lift.checks,
    }
    lines = [f"lifts: {list(lift.lifts)}  (a_i n_i with n = {list(lift.corrections)}, found in {lift.phase} phase)"]
    return Outcome("FOUND", result, {"generates": fingrp.generates(group, lift.lifts)}, lines, digest=digest)


def cmd_fox(args: argparse.Namespace) -> Outcome:
    if args.arity < 1:
        raise InputError("--arity must be positive")
    w = parse_word(args.word, args.arity)
    indices = [args.index] if args.index is not None else list(range(1, args.arity + 1))
    for i in indices:
        if not 1 <= i <= args.arity:
            raise InputError(f"--index {i} outside 1..{args.arity}")
    result: dict[str, Any] = {"word": str(w), "arity": args.arity, "derivatives": {}}
    lines = [f"w = {w}"]
    matrices = None
    digest = pio.digest_of(args.word)
    if args.assign:
        doc = _json_or_file(args.assign, "--assign")
        if isinstance(doc, dict):
            doc = doc.get("matrices")
        if not isinstance(doc, list) or len(doc) != args.arity:
            raise InputError(f"--assign must give {args.arity} matrices")
        n = len(doc[0])
        matrices = [pio._int_matrix(m, n, f"matrix {j + 1}") for j, m in enumerate(doc)]
        digest = pio.digest_of(args.word, json.dumps(doc, sort_keys=True))
    for i in indices:
        entry: dict[str, Any] = {"symbolic": str(fox(w, i))}
        lines.append(f"d w / d x{i} = {entry['symbolic']}")
        if matrices is not None:
            op = fox_operator(w, i, matrices)
            entry["operator"] = pio.matrix_to_json(op.matrix)
            entry["image_index"] = op.image_index() if op.is_integral else None
            lines.append(f"  operator: {entry['operator']}")
        result["derivatives"][str(i)] = entry
    return Outcome("OK", result, lines=lines, digest=digest)


def cmd_nakayama(args: argparse.Namespace) -> Outcome:
    doc = _json_or_file(args.matrices, "--matrices")
    if isinstance(doc, dict):
        doc = doc.get("matrices")
    if not isinstance(doc, list) or not doc:
        raise InputError("--matrices must be a non-empty list of square matrices")
    if doc and isinstance(doc[0], list) and doc[0] and not isinstance(doc[0][0], list):
        doc = [doc]  # a single matrix
    n = len(doc[0])
    mats = [pio._int_matrix(m, n, f"matrix {j + 1}") for j, m in enumerate(doc)]
    digest = pio.digest_of(json.dumps(doc, sort_keys=True))
    cert = nakayama(mats, args.degree)
    result: dict[str, Any] = {
        "M": cert.M,
        "terms": [{"s": s, "h": list(e)} for s, e in cert.terms],
    }
    lines = [f"M = {cert.M}"] + [f"  s = {s}, h = A^{list(e)}" for s, e in cert.terms]
    certs: dict[str, Any] = {"verified": cert.verify()}
    if args.depth:
        k = len(mats) + 1
        plan = build_nilpotent_word(k, cert.word_terms(), args.depth)
        op = plan.operator(list(mats) + [el.identity(n)])
        expected = el.mat_scale(cert.M ** args.depth, el.identity(n))
        result["word_length"] = len(plan.w)
        result["word_operator"] = pio.matrix_to_json(op)
        certs["word_operator_is_M_power"] = op == expected
        lines.append(f"nilpotent word of depth {args.depth}: length {len(plan.w)}, "
                     f"Fox operator = M^{args.depth} I: {op == expected}")
        if op != expected:
            raise CertificateError("nilpotent word operator differs from M^d I")
    return Outcome("FOUND", result, certs, lines, digest=digest)


def cmd_quotient(args: argparse.Namespace) -> Outcome:
    desc = pio.load_group(args.file)
    q, _ = finite_quotient(desc.spec, args.mod)
    ab = fingrp.abelianization(q)
    res = fingrp.min_generators(q, _budget(args))
    result = {
        "modulus": args.mod,
        "order": q.order,
        "abelianization": ab,
        "d": res.d,
        "status": res.status,
        "witness": [pio.element_to_json(q.lift(x)) for x in res.witness],
    }
    lines = [f"|G/U^{args.mod}| = {q.order}", f"abelianization invariants: {ab}",
             f"d = {res.d if res.known else 'UNKNOWN'}"]
    code = EXIT_OK if res.known else EXIT_UNKNOWN
    return Outcome(res.status, result, lines=lines, exit_code=code, digest=desc.digest)


# ---------------------------------------------------------------------------
# parser and driver


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a machine-readable report")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default %(default)s)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="polygen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dp", parents=[common], help="d(G/U^p) with a witness")
    p.add_argument("file")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--budget", type=int, help="maximum candidate tuples")
    p.set_defaults(func=cmd_dp)

    p = sub.add_parser("dhat", parents=[common], help="max of d_p over the candidate primes")
    p.add_argument("file")
    p.add_argument("--primes", help="explicit prime list replacing the default policy")
    p.add_argument("--extra-primes", help="primes added to the default policy")
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_dhat)

    p = sub.add_parser("generate", parents=[common], help="certified generating set")
    p.add_argument("file")
    p.add_argument("--coprime", type=int, help="N: first alpha generators get index prime to N")
    p.add_argument("--avoid", help="primes p (with d_p < k) to keep out of the index of the first k-1")
    p.add_argument("--primes")
    p.add_argument("--extra-primes")
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", parents=[common], help="index of the subgroup generated by elements")
    p.add_argument("file")
    p.add_argument("--elements", help="JSON/YAML list of elements, inline or a file path")
    p.add_argument("--from-report", help="take result.generators from a generate report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gaschutz", parents=[common], help="lift generators of Q/N to generators of Q")
    p.add_argument("file", help="finite group file (table, permutations or cyclic)")
    p.add_argument("--normal", default="", help="generators of the normal subgroup N")
    p.add_argument("--tuple", required=True, help="elements a_1..a_d with <a> N = Q")
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_gaschutz)

    p = sub.add_parser("fox", parents=[common], help="Fox derivatives of a word")
    p.add_argument("--word", required=True)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--index", type=int, help="derivative variable (default: all)")
    p.add_argument("--assign", help="matrices for x1..xk, inline or a file path")
    p.set_defaults(func=cmd_fox)

    p = sub.add_parser("nakayama", parents=[common], help="certificate sum s_i (I - A(h_i)) = M I")
    p.add_argument("--matrices", required=True, help="commuting matrices, inline or a file path")
    p.add_argument("--degree", type=int, help="monomial degree bound (default 2n)")
    p.add_argument("--depth", type=int, default=0, help="also build and check the nilpotent word of this depth")
    p.set_defaults(func=cmd_nakayama)

    p = sub.add_parser("quotient", parents=[common], help="the finite quotient G/U^m")
    p.add_argument("file")
    p.add_argument("--mod", type=int, required=True)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_quotient)
    return parser


def _flags(args: argparse.Namespace) -> dict:
    skip = {"func", "json", "timings", "verbose", "command", "seed", "file"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=err, format="%(name)s: %(message)s")
    start = time.perf_counter()
    try:
        outcome = args.func(args)
    except BudgetExhausted as exc:
        outcome = Outcome("UNKNOWN", {"error": str(exc)}, lines=[f"UNKNOWN: {exc}"], exit_code=EXIT_UNKNOWN)
    except InsolubleError as exc:
        outcome = Outcome("INSOLUBLE", {"error": str(exc), "reason": exc.reason},
                          lines=[f"INSOLUBLE: {exc}"], exit_code=EXIT_INPUT)
    except CertificateError as exc:
        outcome = Outcome("INTERNAL_ERROR", {"error": str(exc)}, lines=[f"internal error: {exc}"],
                          exit_code=EXIT_INTERNAL)
    except (InputError, PreconditionError) as exc:
        outcome = Outcome("INPUT_ERROR", {"error": str(exc)}, lines=[f"error: {exc}"], exit_code=EXIT_INPUT)
    except PolygenError as exc:
        outcome = Outcome("INTERNAL_ERROR", {"error": str(exc)}, lines=[f"internal error: {exc}"],
                          exit_code=EXIT_INTERNAL)
    except Exception as exc:  # noqa: BLE001 - last-resort classification
        logger.exception("unexpected failure")
        outcome = Outcome("INTERNAL_ERROR", {"error": f"{type(exc).__name__}: {exc}"},
                          lines=[f"internal error: {type(exc).__name__}: {exc}"], exit_code=EXIT_INTERNAL)
    elapsed = time.perf_counter() - start
    if args.json:
        timings = {"wall_seconds": round(elapsed, 6)} if args.timings else None
        doc = pio.make_report(args.command, outcome.digest, args.seed, outcome.outcome, outcome.result,
                              outcome.certificates, outcome.exit_code, _flags(args), timings)
        out.write(pio.dumps(pio.to_plain(doc)))
    else:
        stream = out if outcome.exit_code == EXIT_OK else err
        for line in outcome.lines:
            print(line, file=stream)
        if args.timings:
            print(f"wall time: {elapsed:.3f} s", file=stream)
    return outcome.exit_code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
