"""``mts`` command line: construct, certify, search, roundtrip, bound.

Exit codes for ``certify``: 0 extremal, 1 valid but not extremal, 2 not
UCPT, 3 I/O error, 4 unparsable input, 5 the LS and PS tests disagree.
``roundtrip`` uses 0 (residual below 1e-9), 1 (residual too large),
2 (density not marginal tracial), 3 and 4 as above.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import constructions
from .channel import ContractError, choi, reduce_to_independent, validate_ucpt
from .extremality import PS_MAX_N, ls_bi_independence, ps_support_test, rank_bound
from .formats import (
    FORMAT_VERSION,
    FormatError,
    canonical_json,
    density_from_doc,
    digest,
    doc_kind,
    kraus_from_doc,
    kraus_to_doc,
    parse_document,
)
from .linalg import Tolerances
from .search import STRATEGIES, run_search
from .state import kraus_from_state, marginal_state, state_rank, validate_marginal

EXIT_OK = 0
EXIT_NOT_EXTREMAL = 1
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_DISAGREE = 5

ROUNDTRIP_TOL = 1e-9
FAMILIES = ("n3", "n4", "general", "diagonal", "mixture", "unitary")


class UsageError(Exception):
    pass


def tolerances_from(args) -> Tolerances:
    """``--tol`` wins over ``MTS_TOL``; both set ``rank_rel_tol``."""
    value = getattr(args, "tol", None)
    if value is None and os.environ.get("MTS_TOL"):
        try:
            value = float(os.environ["MTS_TOL"])
        except ValueError as exc:
            raise UsageError(f"MTS_TOL is not a number: {os.environ['MTS_TOL']!r}") from exc
    if value is None:
        return Tolerances()
    try:
        return Tolerances(rank_rel_tol=value)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _read_doc(path: str) -> dict:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_document(text)


def build_family(args):
    fam = args.family
    if fam == "n3":
        return constructions.construct_n3()
    if fam == "n4":
        return constructions.construct_n4()
    if fam == "general":
        if args.n is None or args.n < 3:
            raise UsageError("general needs --n >= 3")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return constructions.construct_general(args.n)
    if fam == "diagonal":
        if args.n is None or args.a is None:
            raise UsageError("diagonal needs --a and --n")
        if args.a < 1 or args.a * args.a > args.n:
            raise UsageError("diagonal needs 1 <= a and a^2 <= n")
        return constructions.diagonal_vandermonde(args.a, args.n)
    if fam == "mixture":
        if args.n is None or args.n < 1:
            raise UsageError("mixture needs --n >= 1")
        k = 2 if args.k is None else args.k
        if k < 1:
            raise UsageError("mixture needs --k >= 1")
        seed = 0 if args.seed is None else args.seed
        return constructions.random_mixture(args.n, k, seed)
    if fam == "unitary":
        if args.n is None or args.n < 1:
            raise UsageError("unitary needs --n >= 1")
        if args.seed is None:
            return constructions.unitary_channel(np.eye(args.n))
        u = constructions.random_unitary(args.n, constructions.make_rng(args.seed))
        return constructions.unitary_channel(u)
    raise UsageError(f"unknown family {fam!r}")


def cmd_construct(args) -> int:
    try:
        ks = build_family(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        _write(canonical_json(kraus_to_doc(ks)) + "\n", args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def certify_kraus(doc: dict, tol: Tolerances, ps: bool | None) -> tuple[dict, int]:
    """Certificate payload and exit code for a parsed Kraus document."""
    ks = kraus_from_doc(doc)
    ucpt = validate_ucpt(ks, tol)
    payload = {
        "version": FORMAT_VERSION,
        "input_digest": digest(doc),
        "n": ks.n,
        "ucpt_report": ucpt.as_dict(),
        "ls_certificate": None,
        "ps_certificate": None,
        "state_rank": None,
        "rank_bound": rank_bound(ks.n),
        "verdict": "not_ucpt",
        "tolerances": tol.as_dict(),
    }
    if not ucpt.is_ucpt:
        return payload, EXIT_INVALID
    ls = ls_bi_independence(reduce_to_independent(ks, tol), tol)
    state = marginal_state(choi(ks), ks.n, tol)
    payload["ls_certificate"] = ls.as_dict()
    payload["state_rank"] = state_rank(state, tol)
    run_ps = ks.n <= PS_MAX_N if ps is None else ps
    if run_ps:
        cert = ps_support_test(state, tol, allow_large=True)
        payload["ps_certificate"] = cert.as_dict()
        if cert.is_extremal != ls.is_extremal:
            payload["verdict"] = "oracle_disagreement"
            return payload, EXIT_DISAGREE
    if ls.is_extremal:
        payload["verdict"] = "extremal"
        return payload, EXIT_OK
    payload["verdict"] = "not_extremal"
    return payload, EXIT_NOT_EXTREMAL


def _certificate_table(payload: dict) -> str:
    lines = [f"verdict        {payload['verdict']}"]
    u = payload["ucpt_report"]
    lines.append(f"unital resid   {u['unital_residual']:.3e}")
    lines.append(f"trace resid    {u['trace_residual']:.3e}")
    lines.append(f"kraus rank     {u['kraus_count_reduced']}")
    if payload["state_rank"] is not None:
        lines.append(f"state rank     {payload['state_rank']}")
    lines.append(f"rank bound     {payload['rank_bound']}")
    for key in ("ls_certificate", "ps_certificate"):
        c = payload[key]
        if c is not None:
            lines.append(
                f"{c['method']:<3} test       {c['stacked_rows']}x{c['stacked_cols']} "
                f"rank {c['achieved_rank']}/{c['required_rank']} "
                f"-> {'extremal' if c['is_extremal'] else 'not extremal'}"
            )
    return "\n".join(lines) + "\n"


def cmd_certify(args) -> int:
    try:
        tol = tolerances_from(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        doc = _read_doc(args.input)
        if doc_kind(doc) != "kraus":
            raise FormatError("certify expects a Kraus file")
        payload, code = certify_kraus(doc, tol, args.ps)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    text = canonical_json(payload) + "\n" if args.json else _certificate_table(payload)
    try:
        _write(text, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def cmd_search(args) -> int:
    try:
        tol = tolerances_from(args)
        if args.n < 2 or args.trials < 1:
            raise UsageError("search needs --n >= 2 and --trials >= 1")
        if args.target_rank is not None and args.target_rank < 1:
            raise UsageError("--target-rank must be >= 1")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = run_search(args.n, args.target_rank, args.trials, args.seed, args.strategy, tol)
    if args.json:
        text = canonical_json(result.as_dict()) + "\n"
    else:
        d = result.as_dict()
        text = "".join(f"{k:<18} {d[k]}\n" for k in d if k != "best_certificate")
    try:
        _write(text, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def roundtrip_residual(doc: dict, tol: Tolerances) -> tuple[float, dict]:
    """Frobenius residual of one trip around the Choi correspondence."""
    if doc_kind(doc) == "kraus":
        ks = kraus_from_doc(doc)
        if not validate_ucpt(ks, tol).is_ucpt:
            raise ContractError("Kraus set is not UCPT")
        start = choi(ks)
        n = ks.n
    else:
        start, n = density_from_doc(doc)
    state = marginal_state(start, n, tol)
    if not validate_marginal(state, tol).is_marginal_tracial:
        raise ContractError("density is not a marginal tracial state")
    recovered = kraus_from_state(state, tol)
    residual = float(np.linalg.norm(choi(recovered) - start))
    info = {
        "input_digest": digest(doc),
        "kind": doc_kind(doc),
        "n": n,
        "recovered_kraus_count": len(recovered),
        "residual": residual,
        "passed": residual < ROUNDTRIP_TOL,
    }
    return residual, info


def cmd_roundtrip(args) -> int:
    try:
        tol = tolerances_from(args)
        doc = _read_doc(args.input)
        residual, info = roundtrip_residual(doc, tol)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.json:
        sys.stdout.write(canonical_json(info) + "\n")
    else:
        print(f"roundtrip residual {residual:.3e} ({'ok' if info['passed'] else 'FAILED'})")
    return EXIT_OK if info["passed"] else EXIT_NOT_EXTREMAL


def cmd_bound(args) -> int:
    if args.n < 1:
        print("error: n must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    print(rank_bound(args.n))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mts", description="Extremal marginal tracial states and UCPT maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="write a Kraus file for a known family")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--k", type=int, help="number of unitaries (mixture)")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("certify", help="certify extremality of a Kraus file")
    p.add_argument("input")
    p.add_argument("--ps", dest="ps", action="store_true", default=None, help="force the PS test")
    p.add_argument("--no-ps", dest="ps", action="store_false", help="skip the PS test")
    p.add_argument("--tol", type=float, default=None, help="relative rank tolerance")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("search", help="seeded random search for extremal maps")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--target-rank", type=int, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=STRATEGIES, default="diagonal")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("roundtrip", help="choi -> kraus -> choi residual")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("bound", help="print floor(sqrt(2n^2 - 1))")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
