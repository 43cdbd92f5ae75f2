"""Decomposition certificates, Vandermonde solving, and the comparison pipeline.

The engine turns any product of Chern classes into an exact rational
combination of Chern-character components of honest functor images,

    prod_l c_{a_l}(E)  =  sum_i lambda_i ch_K(J_i(E)),

with every lambda_i an exact rational and every J_i drawn from a finite,
inductively built functor library.  Certificates are machine-checkable:
the splitting oracle evaluates both sides on generic root data and the
difference must vanish identically.

The same Vandermonde linear algebra powers the comparison pipeline, which
converts a bundle with a nonvanishing Chern number into a functor image
with a nonvanishing A-hat pairing and an explicit dimensional constant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .errors import (
    FunctorParseError,
    HypothesisError,
    InsufficientLevelError,
    UsageError,
)
from .functors import (
    FunctorExpr,
    adams_expand,
    bound_constant,
    canonical_key,
    from_json_dict,
    identity,
    substitute,
    to_json_dict,
    virtual_parts,
)
from .bundles import (
    FormalBundle,
    PairingData,
    chern_character,
    chern_class,
    chern_in_ch_generators,
    evaluate_functor,
    integrate,
    shared_evaluation_memo,
)
from .graded import GradedClass, Partition

CERT_SCHEMA_VERSION = "cc-cert-v1"


# ---------------------------------------------------------------------------
# Exact Vandermonde linear algebra on nodes 1..n+1
# ---------------------------------------------------------------------------

def vandermonde_det(n: int) -> Fraction:
    """Determinant of the (n+1)x(n+1) matrix with rows (j^0, .., j^n), j = 1..n+1.

    Closed form: product of (j - i) over 1 <= i < j <= n+1."""
    if n < 0:
        raise UsageError("matrix size parameter must be non-negative")
    det = Fraction(1)
    for i in range(1, n + 2):
        for j in range(i + 1, n + 2):
            det *= j - i
    return det


def gaussian_det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by Gaussian elimination over the rationals."""
    n = len(matrix)
    rows = [[Fraction(v) for v in row] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
            det = -det
        pivot = rows[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = rows[r][col] / pivot
            if factor:
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return det


def solve_exact(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> list[Fraction]:
    """Solve a square system exactly; raises on a singular matrix."""
    n = len(matrix)
    rows = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot_row is None:
            raise UsageError("singular system")
        rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
        pivot = rows[col][col]
        rows[col] = [v / pivot for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


@dataclass(frozen=True)
class VandermondeSystem:
    """The power-evaluation system at nodes 1..n+1: entry [j][i] = (j+1)^i."""

    size: int
    nodes: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def determinant(self) -> Fraction:
        return vandermonde_det(self.size - 1)

    def certify_invertible(self) -> bool:
        """Cross-check the closed-form determinant against exact elimination."""
        return gaussian_det(self.matrix) == self.determinant != 0


def adams_integral_matrix(n: int) -> VandermondeSystem:
    """The (n+1)x(n+1) system tying the scaled-character pairings at k = 1..n+1
    to the componentwise pairings; invertibility is what forces a surviving k."""
    if n < 0:
        raise UsageError("half dimension must be non-negative")
    nodes = tuple(range(1, n + 2))
    matrix = tuple(tuple(j**i for i in range(n + 1)) for j in nodes)
    return VandermondeSystem(n + 1, nodes, matrix)


@lru_cache(maxsize=None)
def _vandermonde_select_cached(r: int, a: int) -> tuple[Fraction, ...]:
    matrix = [[Fraction(l**ap) for l in range(1, r + 2)] for ap in range(r + 1)]
    rhs = [Fraction(1) if ap == a else Fraction(0) for ap in range(r + 1)]
    return tuple(solve_exact(matrix, rhs))


def vandermonde_select(r: int, a: int) -> list[Fraction]:
    """Exact weights lam_1..lam_{r+1} on nodes 1..r+1 with
    sum_l lam_l * l^a' = delta_{a',a} for all 0 <= a' <= r."""
    if r < 0 or not 0 <= a <= r:
        raise UsageError("need 0 <= a <= r")
    return list(_vandermonde_select_cached(r, a))


# ---------------------------------------------------------------------------
# Pairwise product splitting and the inductive functor library
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _split_templates(rsum: int) -> tuple[tuple[int, tuple[tuple[int, FunctorExpr], ...]], ...]:
    """For each node l = 1..rsum+1, the Adams expansion of psi_l tensored with
    a second slot: integer coefficients on honest two-slot functors."""
    out = []
    for l in range(1, rsum + 2):
        expansion = adams_expand(l)
        monomials = tuple(
            (coeff.numerator, substitute(functor, [identity(0)]))
            for coeff, functor in expansion
        )
        out.append((l, tuple(
            (coeff, FunctorExpr("tensor", None, (functor, identity(1))))
            for coeff, functor in monomials
        )))
    return tuple(out)


def product_split(i: int, j: int) -> list[tuple[Fraction, FunctorExpr]]:
    """Express ch_i(F1) * ch_j(F2) as an exact combination of ch_{i+j} of honest
    two-slot functors.

    The scaled characters ch_{i+j}(psi_l(F1) tensor F2) at nodes l = 1..i+j+1
    list every split ch_a(F1) ch_{i+j-a}(F2) with weight l^a, so the
    Vandermonde selector for exponent a = i isolates the wanted product.
    Adams expansions are folded in, leaving honest functors only."""
    if i < 1 or j < 1:
        raise UsageError("product splitting needs both weights >= 1")
    rsum = i + j
    selector = vandermonde_select(rsum, i)
    terms: list[tuple[Fraction, FunctorExpr]] = []
    for (l, monomials) in _split_templates(rsum):
        lam = selector[l - 1]
        for coeff, functor in monomials:
            terms.append((lam * coeff, functor))
    return terms


@dataclass(frozen=True)
class FunctorLibrary:
    """Nested finite functor sets, level 1 = {identity}; level v+1 adjoins the
    split functors W(E) tensor J(E) over J from level v and every pair of
    positive weights summing to at most N."""

    weight_bound: int
    levels: tuple[tuple[FunctorExpr, ...], ...]

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def level(self, v: int) -> tuple[FunctorExpr, ...]:
        if not 1 <= v <= len(self.levels):
            raise UsageError(f"library has levels 1..{len(self.levels)}, asked for {v}")
        return self.levels[v - 1]


def _one_slot_split_functors(rsum: int, inner: FunctorExpr) -> list[FunctorExpr]:
    return [
        substitute(functor, [identity(0), inner])
        for _, monomials in _split_templates(rsum)
        for _, functor in monomials
    ]


@lru_cache(maxsize=None)
def build_library(weight_bound: int, max_parts: int) -> FunctorLibrary:
    """Enumerate the inductive functor sets up to the requested level.

    Results are cached: libraries are immutable and fully determined by the
    two arguments."""
    if weight_bound < 1:
        raise UsageError("weight bound must be >= 1")
    if max_parts < 1:
        raise UsageError("need at least one level")
    current: dict[str, FunctorExpr] = {canonical_key(identity(0)): identity(0)}
    levels = [tuple(current.values())]
    previous_new = list(current.values())
    for _ in range(2, max_parts + 1):
        fresh: dict[str, FunctorExpr] = {}
        # rsum ranges over a0 + K1 with a0, K1 >= 1; the split set depends
        # only on the sum, so iterate it directly.
        for inner in previous_new:
            for rsum in range(2, weight_bound + 1):
                for functor in _one_slot_split_functors(rsum, inner):
                    key = canonical_key(functor)
                    if key not in current and key not in fresh:
                        fresh[key] = functor
        current.update(fresh)
        levels.append(tuple(sorted(current.values(), key=canonical_key)))
        previous_new = list(fresh.values())
    return FunctorLibrary(weight_bound, tuple(levels))


def sup_bound_constant(library: FunctorLibrary, level: int) -> Fraction:
    """Largest curvature bound constant across one library level."""
    return max(bound_constant(f).constant for f in library.level(level))


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionCertificate:
    weight_bound: int
    partition: Partition
    terms: tuple[tuple[Fraction, FunctorExpr], ...]
    verified_ranks: tuple[int, ...]
    generator_set_id: int

    @property
    def weight(self) -> int:
        return self.partition.total

    @property
    def rank_universe(self) -> int:
        return max(self.verified_ranks, default=0)


@lru_cache(maxsize=None)
def _decompose_ch_factors(
    factors: tuple[int, ...]
) -> tuple[tuple[Fraction, FunctorExpr], ...]:
    """Certificate terms for one character monomial ch_{b1} ... ch_{bv}(E),
    peeling the leading factor and splitting against the inductive tail."""
    if len(factors) == 1:
        return ((Fraction(1), identity(0)),)
    head, tail = factors[0], factors[1:]
    inner = _decompose_ch_factors(tail)
    k1 = sum(tail)
    acc: dict[FunctorExpr, Fraction] = {}
    for lam, inner_functor in inner:
        for mu, template in product_split(head, k1):
            functor = substitute(template, [identity(0), inner_functor])
            new = acc.get(functor, Fraction(0)) + lam * mu
            if new:
                acc[functor] = new
            else:
                acc.pop(functor, None)
    ordered = sorted(acc.items(), key=lambda kv: canonical_key(kv[0]))
    return tuple((lam, functor) for functor, lam in ordered)


def _chern_monomial_expansion(partition: Partition, weight_bound: int) -> GradedClass:
    """prod_l c_{a_l} rewritten as a polynomial in abstract ch generators."""
    product = GradedClass.constant(1, weight_bound)
    for part in partition.parts:
        product = product * chern_in_ch_generators(part, weight_bound)
    return product


def _monomial_factors(mono) -> tuple[int, ...]:
    factors: list[int] = []
    for name, exp in mono:
        factors.extend([int(name[2:])] * exp)
    return tuple(sorted(factors, reverse=True))


def required_level(partition: Partition, weight_bound: int) -> int:
    """Library depth needed: the largest factor count among the character
    monomials in the Newton expansion of the Chern-class product."""
    expansion = _chern_monomial_expansion(partition, weight_bound)
    return max(
        (len(_monomial_factors(mono)) for mono, _ in expansion.iter_terms()),
        default=1,
    )


def decompose(partition: Partition, library: FunctorLibrary) -> DecompositionCertificate:
    """Produce a certificate expressing prod c_{a_l}(E) through ch_K of library
    functors, with exact rational coefficients.

    The Chern product is first rewritten in character monomials by Newton's
    identities; each monomial is decomposed inductively via pairwise product
    splits.  Terms with the same canonical functor are merged."""
    weight = partition.total
    if weight > library.weight_bound:
        raise UsageError(
            f"partition weight {weight} exceeds the library bound {library.weight_bound}"
        )
    needed = required_level(partition, library.weight_bound)
    if needed > library.max_level:
        raise InsufficientLevelError(
            f"decomposition of [{partition}] needs library level {needed}, "
            f"but only levels 1..{library.max_level} were built",
            required_level=needed,
        )
    acc: dict[FunctorExpr, Fraction] = {}
    expansion = _chern_monomial_expansion(partition, library.weight_bound)
    for mono, coeff in expansion.iter_terms():
        for lam, functor in _decompose_ch_factors(_monomial_factors(mono)):
            new = acc.get(functor, Fraction(0)) + coeff * lam
            if new:
                acc[functor] = new
            else:
                acc.pop(functor, None)
    terms = tuple(sorted(acc.items(), key=lambda kv: canonical_key(kv[0])))
    terms = tuple((lam, functor) for functor, lam in terms)
    return DecompositionCertificate(
        weight_bound=library.weight_bound,
        partition=partition,
        terms=terms,
        verified_ranks=(),
        generator_set_id=needed,
    )


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    residuals: Mapping[int, GradedClass]

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "identity holds at all requested ranks"
        lines = [
            f"rank {rank}: residual {residual.render()}"
            for rank, residual in sorted(self.residuals.items())
            if not residual.is_zero()
        ]
        return "; ".join(lines)


def verify_certificate(
    cert: DecompositionCertificate,
    ranks: Sequence[int],
    truncation: int | None = None,
) -> VerificationReport:
    """Independent check: evaluate both sides on a generic bundle per rank.

    For each rank r the oracle builds r algebraically independent roots,
    computes the Chern-class product and every ch_K(J_i) from root data
    alone, and demands that the difference vanish exactly in weight K."""
    weight = cert.weight
    bound = weight if truncation is None else truncation
    if bound < weight:
        raise UsageError("truncation below the certificate weight")
    residuals: dict[int, GradedClass] = {}
    ok = True
    for rank in ranks:
        if rank < 1:
            raise UsageError("ranks must be positive")
        bundle = FormalBundle.generic(rank)
        lhs = GradedClass.constant(1, bound, {g: 1 for g in bundle.generators()})
        for part in cert.partition.parts:
            lhs = lhs * chern_class(bundle, part, truncation=bound)
        rhs = GradedClass.zero(bound)
        eval_memo = shared_evaluation_memo([bundle])
        for lam, functor in cert.terms:
            image = evaluate_functor(functor, [bundle], memo=eval_memo)
            rhs = rhs + chern_character(image, bound).component(weight) * lam
        residual = (lhs - rhs).component(weight)
        residuals[rank] = residual
        if not residual.is_zero():
            ok = False
    return VerificationReport(ok, residuals)


def with_verified_ranks(
    cert: DecompositionCertificate, ranks: Sequence[int]
) -> DecompositionCertificate:
    return DecompositionCertificate(
        weight_bound=cert.weight_bound,
        partition=cert.partition,
        terms=cert.terms,
        verified_ranks=tuple(ranks),
        generator_set_id=cert.generator_set_id,
    )


# ---------------------------------------------------------------------------
# Certificate JSON (schema cc-cert-v1)
# ---------------------------------------------------------------------------

def certificate_to_json_dict(cert: DecompositionCertificate) -> dict:
    return {
        "version": CERT_SCHEMA_VERSION,
        "N": cert.weight_bound,
        "partition": list(cert.partition.parts),
        "terms": [
            {"lambda": str(lam), "functor": to_json_dict(functor)}
            for lam, functor in cert.terms
        ],
        "verified_ranks": list(cert.verified_ranks),
    }


def certificate_to_json(cert: DecompositionCertificate) -> str:
    return json.dumps(certificate_to_json_dict(cert), sort_keys=True, indent=2)


def parse_certificate(text: str) -> DecompositionCertificate:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FunctorParseError(f"invalid JSON at position {exc.pos}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise FunctorParseError("certificate must be a JSON object")
    if obj.get("version") != CERT_SCHEMA_VERSION:
        raise FunctorParseError(f"unsupported certificate version {obj.get('version')!r}")
    weight_bound = obj.get("N")
    if not isinstance(weight_bound, int) or weight_bound < 1:
        raise FunctorParseError("field 'N' must be a positive integer", "$.N")
    parts = obj.get("partition")
    if not isinstance(parts, list) or not parts:
        raise FunctorParseError("field 'partition' must be a non-empty list", "$.partition")
    try:
        partition = Partition(tuple(parts))
    except UsageError as exc:
        raise FunctorParseError(str(exc), "$.partition") from None
    raw_terms = obj.get("terms")
    if not isinstance(raw_terms, list):
        raise FunctorParseError("field 'terms' must be a list", "$.terms")
    terms = []
    for idx, raw in enumerate(raw_terms):
        path = f"$.terms[{idx}]"
        if not isinstance(raw, dict) or "lambda" not in raw or "functor" not in raw:
            raise FunctorParseError("term needs 'lambda' and 'functor'", path)
        try:
            lam = Fraction(raw["lambda"])
        except (ValueError, ZeroDivisionError, TypeError):
            raise FunctorParseError(
                f"bad rational {raw['lambda']!r}", path + ".lambda"
            ) from None
        terms.append((lam, from_json_dict(raw["functor"], path + ".functor")))
    ranks = obj.get("verified_ranks", [])
    if not isinstance(ranks, list) or any(
        (not isinstance(r, int)) or r < 1 for r in ranks
    ):
        raise FunctorParseError(
            "field 'verified_ranks' must be a list of positive integers",
            "$.verified_ranks",
        )
    return DecompositionCertificate(
        weight_bound=weight_bound,
        partition=partition,
        terms=tuple(terms),
        verified_ranks=tuple(ranks),
        generator_set_id=required_level(partition, weight_bound),
    )


# ---------------------------------------------------------------------------
# The comparison pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineResult:
    functor: FunctorExpr
    constant: Fraction
    k0: int
    library_bound: Fraction
    adams_part_bound: Fraction
    witness_functor: FunctorExpr
    curvature_bound: Fraction


def _max_adams_part_bound(k: int) -> Fraction:
    pos, neg = virtual_parts(adams_expand(k))
    return max(bound_constant(pos).constant, bound_constant(neg).constant)


def comparison_pipeline(
    bundle: FormalBundle,
    data: PairingData,
    chern_witness: Partition,
    m0: Fraction,
) -> PipelineResult:
    """From a bundle with a nonvanishing Chern number to a functor image with
    a nonvanishing A-hat pairing, plus the dimensional constant.

    Stages: (1) decompose the witness Chern product and pick the first
    certificate term whose top character pairs nonzero; (2) scan k = 1..n+1
    for a scaled character with nonzero A-hat pairing, which the Vandermonde
    system guarantees; (3) split that Adams operation into its two honest
    parts and keep one with nonzero pairing; (4) report the composite functor
    and c = 1 / (max_k C_k * A_N), so the image's curvature norm is at most
    (1/c) times the input's."""
    m0 = Fraction(m0)
    if m0 <= 0:
        raise UsageError("m0 must be positive")
    n = data.half_dimension

    witness = GradedClass.constant(1, n, {g: 1 for g in bundle.generators()})
    for part in chern_witness.parts:
        witness = witness * chern_class(bundle, part, truncation=n)
    if integrate(witness, data) == 0:
        raise HypothesisError(
            "hypothesis (nonvanishing Chern number) fails: the witness "
            "Chern product pairs to zero"
        )

    library = build_library(n, n)
    a_bound = sup_bound_constant(library, library.max_level)
    cert = decompose(chern_witness, library)

    ahat = data.ahat.truncate(n)
    selected = None
    for lam, functor in cert.terms:
        image = evaluate_functor(functor, [bundle])
        if integrate(chern_character(image, n), data) != 0:
            selected = (functor, image)
            break
    if selected is None:
        raise AssertionError(
            "internal invariant violated: nonzero witness pairing but no "
            "certificate term pairs nonzero"
        )
    witness_functor, image = selected

    k0 = None
    for k in range(1, n + 2):
        scaled = chern_character(image.scale_roots(k), n)
        if integrate(ahat * scaled, data) != 0:
            k0 = k
            break
    if k0 is None:
        raise AssertionError(
            "internal invariant violated: the Vandermonde system forces some "
            "scaled character to pair nonzero"
        )

    pos, neg = virtual_parts(adams_expand(k0))
    chosen = None
    for part in (pos, neg):
        part_image = evaluate_functor(part, [image])
        if integrate(ahat * chern_character(part_image, n), data) != 0:
            chosen = part
            break
    if chosen is None:
        raise AssertionError(
            "internal invariant violated: a nonzero difference has a nonzero side"
        )

    max_adams = max(_max_adams_part_bound(k) for k in range(1, n + 2))
    constant = 1 / (max_adams * a_bound)
    functor = substitute(chosen, [witness_functor])
    return PipelineResult(
        functor=functor,
        constant=constant,
        k0=k0,
        library_bound=a_bound,
        adams_part_bound=_max_adams_part_bound(k0),
        witness_functor=witness_functor,
        curvature_bound=1 / (constant * m0),
    )
