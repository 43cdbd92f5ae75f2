"""Formal Chern roots: the splitting-principle evaluation oracle.

A formal bundle is a multiset of linear forms in weight-1 generators,
standing in for the Chern roots of a Hermitian vector bundle.  Every
characteristic-class identity in this package is checked by evaluating
both sides on such root data, which keeps the checker independent of the
Newton/Vandermonde algebra it validates.

Root multisets are stored grouped (form, multiplicity) so tensor and
exterior powers stay cheap even when ranks explode combinatorially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import UsageError
from .functors import FunctorExpr, VirtualCombination, arity
from .graded import (
    GradedClass,
    Monomial,
    elementary_from_power_sums,
    gc_exp,
    merge_weights,
    monomial_weight,
    power_sums_from_elementary,
)

# A linear form: sorted tuple of (generator, nonzero integer coefficient).
FormCoeffs = tuple[tuple[str, int], ...]


@dataclass(frozen=True, order=True)
class LinearForm:
    """Integer linear combination of weight-1 generators; () is the zero form."""

    coeffs: FormCoeffs = ()

    @classmethod
    def of(cls, mapping: Mapping[str, int]) -> "LinearForm":
        return cls(tuple(sorted((g, int(c)) for g, c in mapping.items() if c)))

    def __add__(self, other: "LinearForm") -> "LinearForm":
        a, b = self.coeffs, other.coeffs
        if not a:
            return other
        if not b:
            return self
        out = []
        i = j = 0
        len_a, len_b = len(a), len(b)
        while i < len_a and j < len_b:
            gen_a, coeff_a = a[i]
            gen_b, coeff_b = b[j]
            if gen_a == gen_b:
                coeff = coeff_a + coeff_b
                if coeff:
                    out.append((gen_a, coeff))
                i += 1
                j += 1
            elif gen_a < gen_b:
                out.append(a[i])
                i += 1
            else:
                out.append(b[j])
                j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return LinearForm(tuple(out))

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple((g, -c) for g, c in self.coeffs))

    def scale(self, factor: int) -> "LinearForm":
        if factor == 0:
            return LinearForm()
        return LinearForm(tuple((g, c * factor) for g, c in self.coeffs))

    def is_zero(self) -> bool:
        return not self.coeffs

    def generators(self) -> set[str]:
        return {g for g, _ in self.coeffs}

    def to_graded(self, truncation: int) -> GradedClass:
        weights = {g: 1 for g, _ in self.coeffs}
        return GradedClass(
            truncation, {((g, 1),): Fraction(c) for g, c in self.coeffs}, weights
        )

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        return "+".join(
            (g if c == 1 else f"{c}{g}") for g, c in self.coeffs
        ).replace("+-", "-")


class FormalBundle:
    """Multiset of formal Chern roots with the rank equal to the root count."""

    __slots__ = ("_roots", "_rank")

    def __init__(self, grouped: Iterable[tuple[LinearForm, int]]):
        merged: dict[LinearForm, int] = {}
        for form, mult in grouped:
            if mult < 0:
                raise UsageError("root multiplicities must be non-negative")
            if mult:
                merged[form] = merged.get(form, 0) + mult
        self._roots = tuple(sorted(merged.items()))
        self._rank = sum(m for _, m in self._roots)

    @classmethod
    def from_roots(cls, forms: Iterable[LinearForm]) -> "FormalBundle":
        return cls((form, 1) for form in forms)

    @classmethod
    def trivial(cls, k: int) -> "FormalBundle":
        if k < 0:
            raise UsageError("trivial bundle rank must be non-negative")
        return cls([(LinearForm(), k)] if k else [])

    @classmethod
    def line(cls, generator: str) -> "FormalBundle":
        return cls([(LinearForm(((generator, 1),)), 1)])

    @classmethod
    def generic(cls, rank: int, prefix: str = "x", start: int = 1) -> "FormalBundle":
        """Rank-r bundle with r independent roots x1..xr."""
        return cls.from_roots(
            LinearForm(((f"{prefix}{start + i}", 1),)) for i in range(rank)
        )

    @property
    def rank(self) -> int:
        return self._rank

    @property
    def roots(self) -> tuple[tuple[LinearForm, int], ...]:
        return self._roots

    def expand_roots(self) -> Iterator[LinearForm]:
        for form, mult in self._roots:
            for _ in range(mult):
                yield form

    def generators(self) -> set[str]:
        gens: set[str] = set()
        for form, _ in self._roots:
            gens |= form.generators()
        return gens

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalBundle):
            return NotImplemented
        return self._roots == other._roots

    def __hash__(self) -> int:
        return hash(self._roots)

    def __repr__(self) -> str:
        inner = ", ".join(
            form.render() if mult == 1 else f"{form.render()}:{mult}"
            for form, mult in self._roots
        )
        return f"FormalBundle{{{inner}}}"

    # -- the six bundle operations -------------------------------------

    def dual(self) -> "FormalBundle":
        return FormalBundle((-form, mult) for form, mult in self._roots)

    def direct_sum(self, other: "FormalBundle") -> "FormalBundle":
        return FormalBundle(self._roots + other._roots)

    def tensor(self, other: "FormalBundle") -> "FormalBundle":
        acc: dict[LinearForm, int] = {}
        for f1, m1 in self._roots:
            for f2, m2 in other._roots:
                form = f1 + f2
                acc[form] = acc.get(form, 0) + m1 * m2
        return FormalBundle(acc.items())

    def wedge(self, k: int) -> "FormalBundle":
        """Sums over k-element sub-multisets; k = 0 gives the trivial line,
        k above the rank gives the rank-0 bundle."""
        if k < 0:
            raise UsageError("exterior power index must be non-negative")
        if k > self._rank:
            return FormalBundle.trivial(0)
        acc: dict[LinearForm, int] = {}
        items = self._roots
        suffix_capacity = [0] * (len(items) + 1)
        for idx in range(len(items) - 1, -1, -1):
            suffix_capacity[idx] = suffix_capacity[idx + 1] + items[idx][1]

        def descend(idx: int, remaining: int, form: LinearForm, ways: int):
            if remaining == 0:
                acc[form] = acc.get(form, 0) + ways
                return
            if idx == len(items) or suffix_capacity[idx] < remaining:
                return
            root, mult = items[idx]
            for take in range(0, min(mult, remaining) + 1):
                descend(
                    idx + 1,
                    remaining - take,
                    form + root.scale(take),
                    ways * math.comb(mult, take),
                )

        descend(0, k, LinearForm(), 1)
        return FormalBundle(acc.items())

    def scale_roots(self, factor: int) -> "FormalBundle":
        """Multiply every root by an integer: the split-bundle model of the
        Adams operations (psi_k scales each root by k)."""
        acc: dict[LinearForm, int] = {}
        for form, mult in self._roots:
            scaled = form.scale(factor)
            acc[scaled] = acc.get(scaled, 0) + mult
        return FormalBundle(acc.items())


_EVAL_MEMOS: dict[tuple, dict] = {}


def shared_evaluation_memo(args: Sequence[FormalBundle]) -> dict:
    """Process-wide evaluation memo for one fixed argument tuple.

    Functor images are immutable, so sharing saves re-evaluating the deep
    subtrees that certificates have in common."""
    key = tuple(bundle.roots for bundle in args)
    return _EVAL_MEMOS.setdefault(key, {})


def evaluate_functor(
    expr: FunctorExpr,
    args: Sequence[FormalBundle],
    memo: dict[FunctorExpr, FormalBundle] | None = None,
) -> FormalBundle:
    """Apply a functor expression to concrete root data.

    Arguments beyond the functor's arity are ignored (a slotless functor is
    constant in every slot).  An optional ``memo`` dictionary (valid for one
    fixed argument tuple) shares the evaluation of repeated subtrees across
    calls."""
    needed = arity(expr)
    if len(args) < needed:
        raise UsageError(f"functor has arity {needed}, got {len(args)} arguments")
    return _evaluate(expr, args, memo)


def _evaluate(
    expr: FunctorExpr,
    args: Sequence[FormalBundle],
    memo: dict[FunctorExpr, FormalBundle] | None = None,
) -> FormalBundle:
    if memo is not None:
        hit = memo.get(expr)
        if hit is not None:
            return hit
    if expr.op == "id":
        result = args[expr.value]
    elif expr.op == "trivial":
        result = FormalBundle.trivial(expr.value)
    elif expr.op == "dual":
        result = _evaluate(expr.children[0], args, memo).dual()
    elif expr.op == "wedge":
        result = _evaluate(expr.children[0], args, memo).wedge(expr.value)
    else:
        left = _evaluate(expr.children[0], args, memo)
        right = _evaluate(expr.children[1], args, memo)
        result = left.direct_sum(right) if expr.op == "sum" else left.tensor(right)
    if memo is not None:
        memo[expr] = result
    return result


# ---------------------------------------------------------------------------
# Characteristic classes of formal bundles
# ---------------------------------------------------------------------------

# Integer fast path: exp(root) coefficients scaled by truncation!, so the
# per-root accumulation stays in machine/big integers; one Fraction per
# surviving monomial is built at the end.
_EXP_INT_CACHE: dict[tuple[FormCoeffs, int], dict] = {}
_CH_CACHE: dict[tuple, GradedClass] = {}


def _exp_of_form_scaled(coeffs: FormCoeffs, truncation: int) -> dict:
    key = (coeffs, truncation)
    hit = _EXP_INT_CACHE.get(key)
    if hit is not None:
        return hit
    scale = math.factorial(truncation)
    exp_class = gc_exp(LinearForm(coeffs).to_graded(truncation))
    scaled = {}
    for mono, coeff in exp_class._terms.items():
        value = coeff * scale
        if value.denominator != 1:
            raise AssertionError("scaled exponential must be integral")
        scaled[mono] = value.numerator
    _EXP_INT_CACHE[key] = scaled
    return scaled


def chern_character(bundle: FormalBundle, truncation: int) -> GradedClass:
    """ch = sum of exp(root) over the root multiset, truncated; the weight-0
    part is the rank.

    Results are cached by root data: the output is immutable and bundles
    with equal root multisets have equal characters."""
    if truncation < 0:
        raise UsageError("truncation must be non-negative")
    cache_key = (bundle.roots, truncation)
    hit = _CH_CACHE.get(cache_key)
    if hit is not None:
        return hit
    acc: dict = {}
    for form, mult in bundle.roots:
        for mono, value in _exp_of_form_scaled(form.coeffs, truncation).items():
            acc[mono] = acc.get(mono, 0) + value * mult
    scale = math.factorial(truncation)
    terms = {}
    for mono, value in acc.items():
        if value:
            terms[mono] = Fraction(value, scale)
    result = GradedClass._raw(truncation, terms, {g: 1 for g in bundle.generators()})
    _CH_CACHE[cache_key] = result
    return result


def chern_class(
    bundle: FormalBundle, index: int, truncation: int | None = None
) -> GradedClass:
    """The index-th elementary symmetric polynomial of the roots.

    Indices above the rank give 0 by convention.  The result is homogeneous
    of weight ``index``; pass ``truncation`` to embed it in a larger ring.
    """
    if index < 0:
        raise UsageError("Chern class index must be non-negative")
    bound = index if truncation is None else truncation
    if truncation is not None and truncation < index:
        raise UsageError("truncation too small to hold the requested class")
    weights = {g: 1 for g in bundle.generators()}
    if index > bundle.rank:
        return GradedClass.zero(bound, weights)
    # e-polynomials via (1 + x t)^mult factors, degree capped at `index`.
    elem: list[GradedClass] = [GradedClass.constant(1, bound, weights)]
    for form, mult in bundle.roots:
        root = form.to_graded(bound)
        powers = [GradedClass.constant(1, bound, weights)]
        for _ in range(min(mult, index)):
            powers.append(powers[-1] * root)
        new_len = min(len(elem) + mult, index + 1)
        new = [GradedClass.zero(bound, weights) for _ in range(new_len)]
        for deg, cls in enumerate(elem):
            for take in range(0, min(mult, index - deg) + 1):
                new[deg + take] = new[deg + take] + cls * (
                    powers[take] * math.comb(mult, take)
                )
        elem = new
    if index >= len(elem):
        return GradedClass.zero(bound, weights)
    return elem[index]


def total_chern_class(bundle: FormalBundle, truncation: int) -> GradedClass:
    """Product of (1 + root) over the multiset, truncated."""
    weights = {g: 1 for g in bundle.generators()}
    total = GradedClass.constant(1, truncation, weights)
    for form, mult in bundle.roots:
        factor = GradedClass.constant(1, truncation, weights) + form.to_graded(truncation)
        for _ in range(mult):
            total = total * factor
    return total


def ch_of_virtual(
    vc: VirtualCombination, args: Sequence[FormalBundle], truncation: int
) -> GradedClass:
    """Chern character of a virtual combination, term by term through the oracle."""
    total = GradedClass.zero(truncation)
    for coeff, functor in vc:
        total = total + chern_character(evaluate_functor(functor, args), truncation) * coeff
    return total


# ---------------------------------------------------------------------------
# Newton conversions between Chern classes and Chern-character components
# ---------------------------------------------------------------------------

def ch_from_chern(
    chern_parts: Sequence[GradedClass], rank: int, truncation: int
) -> list[GradedClass]:
    """Chern-character components from Chern classes: ch_i = p_i / i! with the
    power sums obtained from the elementary classes by Newton's identities.
    ``chern_parts[0]`` must be the unit class; ch_0 is the rank."""
    p = power_sums_from_elementary(chern_parts, truncation)
    one = chern_parts[0]
    out = [one * rank]
    for i in range(1, truncation + 1):
        out.append(p[i] * Fraction(1, math.factorial(i)))
    return out


def chern_from_ch(
    ch_parts: Sequence[GradedClass], rank: int | None, truncation: int
) -> list[GradedClass]:
    """Inverse conversion; ``ch_parts[i]`` is the weight-i component for i >= 1
    (slot 0 is ignored, it carries the rank).  When ``rank`` is given the output
    is cut after c_rank, since higher elementary classes vanish identically."""
    if not ch_parts:
        raise UsageError("need at least the weight-0 entry")
    some = ch_parts[0]
    one = GradedClass.constant(1, some.truncation, some.weights)
    p: list[GradedClass] = [one * 0]
    for i in range(1, truncation + 1):
        part = ch_parts[i] if i < len(ch_parts) else one * 0
        p.append(part * math.factorial(i))
    elem = elementary_from_power_sums(p, truncation, one)
    if rank is not None:
        elem = elem[: rank + 1]
    return elem


def chern_in_ch_generators(index: int, truncation: int, prefix: str = "ch") -> GradedClass:
    """The universal polynomial expressing c_index through ch_1, ch_2, ...

    Uses abstract weight-i generators named ``ch1``, ``ch2``, ...; the
    polynomial does not depend on the bundle (or its rank)."""
    if index == 0:
        return GradedClass.constant(1, truncation)
    ch_parts = [GradedClass.zero(truncation)]
    for i in range(1, truncation + 1):
        ch_parts.append(GradedClass.generator(f"{prefix}{i}", i, truncation))
    return chern_from_ch(ch_parts, None, truncation)[index]


# ---------------------------------------------------------------------------
# The multiplicative A-hat series in Pontryagin generators
# ---------------------------------------------------------------------------

def _series_mul(a: list[Fraction], b: list[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > order:
            continue
        for j, bj in enumerate(b):
            if i + j > order:
                break
            if bj:
                out[i + j] += ai * bj
    return out


def _series_inverse(a: list[Fraction], order: int) -> list[Fraction]:
    if a[0] == 0:
        raise UsageError("series has no inverse")
    inv = [Fraction(0)] * (order + 1)
    inv[0] = 1 / a[0]
    for k in range(1, order + 1):
        acc = Fraction(0)
        for j in range(1, k + 1):
            if j < len(a):
                acc += a[j] * inv[k - j]
        inv[k] = -acc / a[0]
    return inv


def _series_log(a: list[Fraction], order: int) -> list[Fraction]:
    # log(a) via (log a)' = a'/a, integrated term by term; needs a[0] = 1.
    if a[0] != 1:
        raise UsageError("series log needs constant term 1")
    da = [a[i + 1] * (i + 1) for i in range(order)] + [Fraction(0)]
    quotient = _series_mul(da, _series_inverse(a, order), order)
    out = [Fraction(0)] * (order + 1)
    for i in range(1, order + 1):
        out[i] = quotient[i - 1] / i
    return out


def ahat_series(
    tangent_roots: int | Sequence[str],
    truncation: int,
    pontryagin_prefix: str = "p",
) -> GradedClass:
    """The multiplicative genus prod (y/2)/sinh(y/2) over the given number of
    formal weight-1 tangent roots, expressed in the elementary symmetric
    polynomials of the squared roots (Pontryagin generators, weight 2i).

    Only even weights occur, the weight-0 part is 1, and generators beyond
    the root count are absent because the corresponding elementary classes
    vanish."""
    if truncation < 0:
        raise UsageError("truncation must be non-negative")
    num_roots = tangent_roots if isinstance(tangent_roots, int) else len(tangent_roots)
    if num_roots < 0:
        raise UsageError("root count must be non-negative")
    max_index = min(num_roots, truncation // 2)
    # Univariate factor in one root y: (y/2)/sinh(y/2) = 1 / sum (y/2)^{2m}/(2m+1)!.
    denom = [Fraction(0)] * (truncation + 1)
    for m in range(0, truncation // 2 + 1):
        denom[2 * m] = Fraction(1, 4**m * math.factorial(2 * m + 1))
    factor = _series_inverse(denom, truncation)
    log_factor = _series_log(factor, truncation)

    elem = [GradedClass.constant(1, truncation)]
    for i in range(1, max_index + 1):
        elem.append(
            GradedClass.generator(f"{pontryagin_prefix}{i}", 2 * i, truncation)
        )
    power_sums = power_sums_from_elementary(elem, truncation // 2)
    log_total = GradedClass.zero(truncation)
    for m in range(1, truncation // 2 + 1):
        coeff = log_factor[2 * m]
        if coeff:
            log_total = log_total + power_sums[m] * coeff
    return gc_exp(log_total)


# ---------------------------------------------------------------------------
# Pairing data: a formal stand-in for integration over a closed manifold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairingData:
    """Linear functional on top-weight classes plus the manifold's A-hat data.

    ``pairing`` maps weight-n monomials (over the combined bundle and
    Pontryagin generator universe given by ``weights``) to exact rationals;
    monomials absent from the table pair to zero.
    """

    half_dimension: int
    ahat: GradedClass
    pairing: Mapping[Monomial, Fraction]
    weights: Mapping[str, int]

    def __post_init__(self):
        n = self.half_dimension
        if n < 1:
            raise UsageError("half dimension must be >= 1")
        if self.ahat.truncation < n:
            raise UsageError("A-hat class must be truncated at weight >= n")
        unit = GradedClass.constant(1, self.ahat.truncation, self.ahat.weights)
        if self.ahat.component(0) != unit:
            raise UsageError("A-hat class must have weight-0 part equal to 1")
        for w in range(1, self.ahat.truncation + 1, 2):
            if not self.ahat.component(w).is_zero():
                raise UsageError("A-hat class must have no odd-weight components")
        weights = merge_weights(self.weights, self.ahat.weights)
        object.__setattr__(self, "weights", weights)
        table = {}
        for mono, value in self.pairing.items():
            if monomial_weight(mono, weights) != n:
                raise UsageError(
                    f"pairing table key {mono!r} does not have weight {n}"
                )
            value = Fraction(value)
            if value:
                table[mono] = value
        object.__setattr__(self, "pairing", table)


def integrate(x: GradedClass, data: PairingData) -> Fraction:
    """Apply the pairing table to the top-weight component of ``x``.

    Only the weight-n part contributes; monomials missing from the table are
    treated as zero.  ``x`` must be truncated at weight >= n and live in a
    universe compatible with the pairing data."""
    n = data.half_dimension
    if x.truncation < n:
        raise UsageError("class truncated below the pairing weight")
    merge_weights(data.weights, x.weights)  # conflicting weights are an error
    total = Fraction(0)
    for mono, coeff in x.component(n).iter_terms():
        total += coeff * data.pairing.get(mono, Fraction(0))
    return total
