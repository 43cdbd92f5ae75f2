"""Command-line front end.

Every command prints a single machine-readable JSON document on stdout
(sorted keys, all rationals as 'p/q' strings) and keeps diagnostics on
stderr, so identical inputs produce byte-identical output.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 hypothesis failure.

Generator naming convention used by the file formats: bundle-root
generators are arbitrary names of weight 1 (the bundled tooling emits
``x1``, ``x2``, ...); names matching ``p<i>`` are Pontryagin generators of
weight 2i.  Pairing and A-hat tables key on canonical monomial strings,
e.g. ``1``, ``x1^2``, ``p1*x2``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from .bundles import FormalBundle, LinearForm, PairingData
from .certificates import (
    build_library,
    certificate_to_json_dict,
    comparison_pipeline,
    decompose,
    parse_certificate,
    required_level,
    verify_certificate,
    with_verified_ranks,
)
from .errors import HypothesisError, UsageError
from .functors import (
    FUNCTOR_SCHEMA_VERSION,
    adams_expand,
    bound_constant,
    from_json_dict,
    to_json_dict,
)
from .geometry import (
    SphereLineBundle,
    acw_lower_bound,
    hopf_chern_number,
    hopf_curvature_norm,
)
from .graded import GradedClass, Partition, parse_monomial

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_HYPOTHESIS = 3

_PONTRYAGIN_RE = re.compile(r"^p(\d+)$")


def default_generator_weight(name: str) -> int:
    match = _PONTRYAGIN_RE.match(name)
    return 2 * int(match.group(1)) if match else 1


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_fraction(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse {what} {text!r} as a rational p/q") from None


def _parse_ranks(text: str) -> list[int]:
    try:
        ranks = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse rank list {text!r}") from None
    if not ranks or any(r < 1 for r in ranks):
        raise UsageError("ranks must be positive integers")
    return ranks


def _load_json_file(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path!r} is not valid JSON: {exc.msg}") from None


def load_bundle(obj) -> FormalBundle:
    """Bundle file format: {"roots": [{"x1": 1, "x2": -1}, ...]}; the empty
    object is the zero root of a trivial line factor."""
    if not isinstance(obj, dict) or "roots" not in obj or not isinstance(obj["roots"], list):
        raise UsageError("bundle file must be an object with a 'roots' list")
    roots = []
    for idx, raw in enumerate(obj["roots"]):
        if not isinstance(raw, dict):
            raise UsageError(f"root #{idx} must be an object mapping generators to integers")
        coeffs = {}
        for gen, coeff in raw.items():
            if not isinstance(coeff, int) or isinstance(coeff, bool):
                raise UsageError(f"root #{idx}: coefficient of {gen!r} must be an integer")
            if default_generator_weight(gen) != 1:
                raise UsageError(
                    f"root #{idx}: {gen!r} is reserved for Pontryagin generators"
                )
            coeffs[gen] = coeff
        roots.append(LinearForm.of(coeffs))
    if not roots:
        raise UsageError("bundle must have at least one root")
    return FormalBundle.from_roots(roots)


def load_pairing(obj) -> PairingData:
    """Pairing file format: {"n": int, "ahat": {monomial: "p/q"}, "pairing":
    {monomial: "p/q"}} with monomials in canonical rendering."""
    if not isinstance(obj, dict):
        raise UsageError("pairing file must be a JSON object")
    n = obj.get("n")
    if not isinstance(n, int) or n < 1:
        raise UsageError("pairing file needs a positive integer field 'n'")

    def read_table(field: str) -> dict:
        raw = obj.get(field)
        if not isinstance(raw, dict):
            raise UsageError(f"pairing file needs an object field {field!r}")
        table = {}
        for key, value in raw.items():
            mono = parse_monomial(key)
            table[mono] = _parse_fraction(str(value), f"{field}[{key!r}]")
        return table

    weights: dict[str, int] = {}

    def register(mono):
        for gen, _ in mono:
            weights.setdefault(gen, default_generator_weight(gen))

    ahat_terms = read_table("ahat")
    pairing = read_table("pairing")
    for mono in list(ahat_terms) + list(pairing):
        register(mono)
    ahat = GradedClass(n, ahat_terms, {g: w for g, w in weights.items()})
    return PairingData(n, ahat, pairing, weights)


def _functor_from_args(args) -> "FunctorExpr":
    if args.functor_file:
        obj = _load_json_file(args.functor_file, "functor")
    else:
        try:
            obj = json.loads(args.functor)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--functor is not valid JSON: {exc.msg}") from None
    if isinstance(obj, dict) and "functor" in obj and "op" not in obj:
        obj = obj["functor"]
    return from_json_dict(obj)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_decompose(args) -> int:
    partition = Partition.parse(args.partition)
    if partition.total > args.N:
        raise UsageError(
            f"partition weight {partition.total} exceeds the bound N = {args.N}"
        )
    library = build_library(args.N, max(1, required_level(partition, args.N)))
    cert = decompose(partition, library)
    ranks = list(range(1, args.max_rank + 1))
    report = verify_certificate(cert, ranks)
    if not report.ok:
        _diag("verification failed: " + report.describe())
        _emit(certificate_to_json_dict(cert))
        return EXIT_VERIFICATION
    _emit(certificate_to_json_dict(with_verified_ranks(cert, ranks)))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        with open(args.certificate, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read certificate file: {exc}") from None
    cert = parse_certificate(text)
    ranks = _parse_ranks(args.ranks) if args.ranks else (
        list(cert.verified_ranks) or [1, 2, 3, 4]
    )
    report = verify_certificate(cert, ranks)
    payload = {
        "ok": report.ok,
        "ranks": ranks,
        "residuals": {
            str(rank): residual.render()
            for rank, residual in sorted(report.residuals.items())
        },
    }
    _emit(payload)
    if not report.ok:
        _diag("verification failed: " + report.describe())
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_pipeline(args) -> int:
    bundle = load_bundle(_load_json_file(args.bundle, "bundle"))
    data = load_pairing(_load_json_file(args.pairing, "pairing"))
    witness = Partition.parse(args.witness)
    m0 = _parse_fraction(args.m0, "m0")
    result = comparison_pipeline(bundle, data, witness, m0)
    _emit(
        {
            "A_N": str(result.library_bound),
            "C_k0": str(result.adams_part_bound),
            "bound": str(result.curvature_bound),
            "c": str(result.constant),
            "functor": to_json_dict(result.functor),
            "k0": result.k0,
        }
    )
    return EXIT_OK


def cmd_adams(args) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    expansion = adams_expand(args.k)
    _emit(
        {
            "k": args.k,
            "terms": [
                {"c": str(coeff), "functor": to_json_dict(functor)}
                for coeff, functor in expansion
            ],
            "version": FUNCTOR_SCHEMA_VERSION,
        }
    )
    return EXIT_OK


def cmd_bounds(args) -> int:
    functor = _functor_from_args(args)
    _emit({"C": str(bound_constant(functor).constant)})
    return EXIT_OK


def cmd_hopf(args) -> int:
    radius = _parse_fraction(args.radius, "radius")
    bundle = SphereLineBundle(radius, args.orientation)
    ahat_number = _parse_fraction(args.ahat_number, "A-hat number")
    witness = acw_lower_bound(bundle, ahat_number)
    _emit(
        {
            "acw_lower_bound": str(witness.bound),
            "chern_number": str(hopf_chern_number(bundle)),
            "curvature_norm": str(hopf_curvature_norm(bundle)),
            "product_pairing": str(witness.product_pairing),
        }
    )
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all()
    checks = []
    failed = 0
    for name, ok, detail in results:
        _diag(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        checks.append({"detail": detail, "name": name, "ok": ok})
        if not ok:
            failed += 1
    _emit({"checks": checks, "failed": failed, "ok": failed == 0, "passed": len(checks) - failed})
    return EXIT_OK if failed == 0 else EXIT_VERIFICATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chcalc",
        description="Exact characteristic-class calculus with verifiable certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="emit a decomposition certificate")
    p.add_argument("--partition", required=True, help="comma-separated parts, e.g. 1,1")
    p.add_argument("--N", type=int, required=True, help="weight bound of the functor library")
    p.add_argument("--max-rank", type=int, default=4, help="verify at ranks 1..max-rank")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="check a certificate file")
    p.add_argument("--certificate", required=True, help="path to a cc-cert-v1 JSON file")
    p.add_argument("--ranks", help="comma-separated ranks (default: the file's verified ranks)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pipeline", help="run the cowaist comparison pipeline")
    p.add_argument("--bundle", required=True, help="path to a bundle JSON file")
    p.add_argument("--pairing", required=True, help="path to a pairing JSON file")
    p.add_argument("--witness", required=True, help="Chern-number witness partition, e.g. 1,1")
    p.add_argument("--m0", default="1", help="curvature threshold m0 > 0 (rational)")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("adams", help="expand an Adams operation into honest functors")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_adams)

    p = sub.add_parser("bounds", help="curvature bound constant of a functor")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--functor", help="functor JSON (cc-functor-v1)")
    group.add_argument("--functor-file", help="path to a functor JSON file")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("hopf", help="round-sphere line bundle witness numbers")
    p.add_argument("--radius", required=True, help="sphere radius (rational, > 0)")
    p.add_argument("--orientation", type=int, default=1, choices=(1, -1))
    p.add_argument("--ahat-number", default="1", help="A-hat number of the 4-manifold factor")
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("selftest", help="run the full invariant suite")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HypothesisError as exc:
        _diag(f"hypothesis failure: {exc}")
        return EXIT_HYPOTHESIS
    except UsageError as exc:
        _diag(f"usage error: {exc}")
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
