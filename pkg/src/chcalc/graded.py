"""Truncated graded-commutative polynomial algebra over exact rationals.

A :class:`GradedClass` is a finite sum of monomials in named generators.
Each generator carries a fixed positive integer weight, and every term
whose total weight exceeds the truncation bound is dropped on the spot.
Weights are half topological degrees, so a weight-i term sits in degree 2i.

Coefficients are :class:`fractions.Fraction` throughout; the stored term
map is canonical (no zero coefficients, sorted monomials), so ``==`` on
two classes with the same truncation is exact mathematical equality.
Values are immutable after construction and safe to share across tasks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import UsageError

# A monomial is a sorted tuple of (generator name, positive exponent).
Monomial = tuple[tuple[str, int], ...]
UNIT_MONOMIAL: Monomial = ()

Scalar = Union[int, Fraction]

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_ZERO = Fraction(0)


def normalize_monomial(pairs: Iterable[tuple[str, int]]) -> Monomial:
    """Canonical form: merged duplicates, exponent-0 entries dropped, sorted by name."""
    merged: dict[str, int] = {}
    for name, exp in pairs:
        if not _NAME_RE.match(name):
            raise UsageError(f"invalid generator name {name!r}")
        if exp < 0:
            raise UsageError(f"negative exponent for generator {name!r}")
        if exp:
            merged[name] = merged.get(name, 0) + exp
    return tuple(sorted(merged.items()))


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for name, exp in b:
        merged[name] = merged.get(name, 0) + exp
    return tuple(sorted(merged.items()))


def monomial_weight(mono: Monomial, weights: Mapping[str, int]) -> int:
    total = 0
    for name, exp in mono:
        try:
            total += weights[name] * exp
        except KeyError:
            raise UsageError(f"generator {name!r} has no declared weight") from None
    return total


def monomial_str(mono: Monomial) -> str:
    """Canonical text: '1' for the empty monomial, else 'x1^2*y' style."""
    if not mono:
        return "1"
    return "*".join(name if exp == 1 else f"{name}^{exp}" for name, exp in mono)


def parse_monomial(text: str) -> Monomial:
    """Inverse of :func:`monomial_str` (accepts unsorted input, canonicalizes)."""
    text = text.strip()
    if text == "1":
        return UNIT_MONOMIAL
    pairs = []
    for token in text.split("*"):
        token = token.strip()
        if "^" in token:
            name, _, exp_str = token.partition("^")
            try:
                exp = int(exp_str)
            except ValueError:
                raise UsageError(f"bad exponent in monomial token {token!r}") from None
            if exp < 1:
                raise UsageError(f"exponent must be >= 1 in monomial token {token!r}")
        else:
            name, exp = token, 1
        if not _NAME_RE.match(name):
            raise UsageError(f"bad generator name in monomial token {token!r}")
        pairs.append((name, exp))
    return normalize_monomial(pairs)


def _coerce_scalar(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise UsageError(f"coefficients must be exact rationals, got {type(value).__name__}")


def merge_weights(a: Mapping[str, int], b: Mapping[str, int]) -> dict[str, int]:
    """Union of two generator universes; a name with two different weights is an error."""
    merged = dict(a)
    for name, weight in b.items():
        if merged.setdefault(name, weight) != weight:
            raise UsageError(
                f"generator {name!r} declared with conflicting weights "
                f"{merged[name]} and {weight}"
            )
    return merged


class GradedClass:
    """Immutable truncated polynomial with exact rational coefficients."""

    __slots__ = ("_truncation", "_weights", "_terms")

    def __init__(
        self,
        truncation: int,
        terms: Mapping[Monomial, Scalar] | Iterable[tuple[Monomial, Scalar]],
        weights: Mapping[str, int],
    ):
        if truncation < 0:
            raise UsageError("truncation weight must be non-negative")
        for name, weight in weights.items():
            if not isinstance(weight, int) or weight < 1:
                raise UsageError(f"generator {name!r} must have a positive integer weight")
        self._truncation = truncation
        self._weights = dict(weights)
        stored: dict[Monomial, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, coeff in items:
            mono = normalize_monomial(mono)
            coeff = _coerce_scalar(coeff)
            if coeff == 0:
                continue
            if monomial_weight(mono, self._weights) > truncation:
                continue
            new = stored.get(mono, Fraction(0)) + coeff
            if new:
                stored[mono] = new
            else:
                stored.pop(mono, None)
        self._terms = stored

    # -- constructors ------------------------------------------------

    @classmethod
    def _raw(
        cls,
        truncation: int,
        terms: dict[Monomial, Fraction],
        weights: dict[str, int],
    ) -> "GradedClass":
        """Internal fast path: trusts canonical, zero-free, within-bound terms."""
        self = cls.__new__(cls)
        self._truncation = truncation
        self._weights = weights
        self._terms = terms
        return self

    @classmethod
    def zero(cls, truncation: int, weights: Mapping[str, int] | None = None) -> "GradedClass":
        return cls(truncation, {}, weights or {})

    @classmethod
    def constant(cls, value: Scalar, truncation: int,
                 weights: Mapping[str, int] | None = None) -> "GradedClass":
        return cls(truncation, {UNIT_MONOMIAL: value}, weights or {})

    @classmethod
    def generator(cls, name: str, weight: int, truncation: int) -> "GradedClass":
        return cls(truncation, {((name, 1),): Fraction(1)}, {name: weight})

    # -- accessors ---------------------------------------------------

    @property
    def truncation(self) -> int:
        return self._truncation

    @property
    def weights(self) -> Mapping[str, int]:
        return self._weights

    def coefficient(self, mono) -> Fraction:
        return self._terms.get(normalize_monomial(mono), Fraction(0))

    def iter_terms(self) -> Iterator[tuple[Monomial, Fraction]]:
        """Terms in canonical order: graded lexicographic (weight, then monomial)."""
        key = lambda item: (monomial_weight(item[0], self._weights), item[0])
        return iter(sorted(self._terms.items(), key=key))

    def is_zero(self) -> bool:
        return not self._terms

    # -- ring operations ----------------------------------------------

    def _check_compatible(self, other: "GradedClass") -> dict[str, int]:
        if self._truncation != other._truncation:
            raise UsageError(
                f"truncation mismatch: {self._truncation} vs {other._truncation}"
            )
        return merge_weights(self._weights, other._weights)

    def __add__(self, other: "GradedClass") -> "GradedClass":
        if not isinstance(other, GradedClass):
            return NotImplemented
        weights = self._check_compatible(other)
        terms = dict(self._terms)
        for mono, coeff in other._terms.items():
            new = terms.get(mono, _ZERO) + coeff
            if new:
                terms[mono] = new
            else:
                terms.pop(mono, None)
        return GradedClass._raw(self._truncation, terms, weights)

    def __neg__(self) -> "GradedClass":
        return GradedClass._raw(
            self._truncation, {m: -c for m, c in self._terms.items()}, self._weights
        )

    def __sub__(self, other: "GradedClass") -> "GradedClass":
        if not isinstance(other, GradedClass):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "GradedClass":
        if isinstance(other, (int, Fraction)):
            scalar = _coerce_scalar(other)
            if scalar == 0:
                return GradedClass._raw(self._truncation, {}, self._weights)
            return GradedClass._raw(
                self._truncation,
                {m: c * scalar for m, c in self._terms.items()},
                self._weights,
            )
        if not isinstance(other, GradedClass):
            return NotImplemented
        weights = self._check_compatible(other)
        bound = self._truncation
        out: dict[Monomial, Fraction] = {}
        self_terms = [
            (m, monomial_weight(m, weights), c) for m, c in self._terms.items()
        ]
        other_terms = [
            (m, monomial_weight(m, weights), c) for m, c in other._terms.items()
        ]
        for m1, w1, c1 in self_terms:
            for m2, w2, c2 in other_terms:
                if w1 + w2 > bound:
                    continue
                mono = monomial_mul(m1, m2)
                new = out.get(mono, _ZERO) + c1 * c2
                if new:
                    out[mono] = new
                else:
                    out.pop(mono, None)
        return GradedClass._raw(bound, out, weights)

    def __rmul__(self, other) -> "GradedClass":
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, exponent: int) -> "GradedClass":
        if not isinstance(exponent, int) or exponent < 0:
            raise UsageError("exponent must be a non-negative integer")
        result = GradedClass.constant(1, self._truncation, self._weights)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedClass):
            return NotImplemented
        return self._truncation == other._truncation and self._terms == other._terms

    __hash__ = None  # mutable-looking container semantics; not hashable

    # -- truncation and projection -------------------------------------

    def component(self, weight: int) -> "GradedClass":
        """The homogeneous weight-``weight`` part (same truncation and universe)."""
        if weight < 0 or weight > self._truncation:
            raise UsageError(
                f"component weight {weight} out of range 0..{self._truncation}"
            )
        terms = {
            m: c
            for m, c in self._terms.items()
            if monomial_weight(m, self._weights) == weight
        }
        return GradedClass._raw(self._truncation, terms, self._weights)

    def truncate(self, truncation: int) -> "GradedClass":
        """Drop all terms of weight above ``truncation`` (must not exceed current)."""
        if truncation > self._truncation:
            raise UsageError("cannot raise the truncation of an already truncated class")
        terms = {
            m: c
            for m, c in self._terms.items()
            if monomial_weight(m, self._weights) <= truncation
        }
        return GradedClass._raw(truncation, terms, self._weights)

    # -- rendering -----------------------------------------------------

    def render(self) -> str:
        """Canonical text: terms sorted by (weight, monomial), coefficients 'p/q'."""
        if not self._terms:
            return "0"
        parts = []
        for mono, coeff in self.iter_terms():
            if mono == UNIT_MONOMIAL:
                parts.append(str(coeff))
            else:
                parts.append(f"{coeff}*{monomial_str(mono)}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"GradedClass[N={self._truncation}]({self.render()})"


def gc_exp(x: GradedClass) -> GradedClass:
    """Truncated exponential series of a class with zero constant term."""
    if not x.component(0).is_zero():
        raise UsageError("gc_exp requires a class with vanishing weight-0 part")
    result = GradedClass.constant(1, x.truncation, x.weights)
    power = result
    for i in range(1, x.truncation + 1):
        power = power * x
        if power.is_zero():
            break
        result = result + power * Fraction(1, math.factorial(i))
    return result


def gc_substitute(
    x: GradedClass, images: Mapping[str, GradedClass]
) -> GradedClass:
    """Substitute generators by classes; generators not mapped stay themselves."""
    trunc = x.truncation
    cache: dict[str, GradedClass] = {}

    def image(name: str) -> GradedClass:
        if name not in cache:
            img = images.get(name)
            if img is None:
                img = GradedClass.generator(name, x.weights[name], trunc)
            elif img.truncation != trunc:
                raise UsageError("substitution images must share the truncation bound")
            cache[name] = img
        return cache[name]

    total = GradedClass.zero(trunc)
    for mono, coeff in x.iter_terms():
        term = GradedClass.constant(coeff, trunc)
        for name, exp in mono:
            term = term * (image(name) ** exp)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Newton's identities between elementary symmetric classes and power sums.
# ---------------------------------------------------------------------------

def power_sums_from_elementary(
    elem: Sequence[GradedClass], upto: int
) -> list[GradedClass]:
    """Power sums p_1..p_upto from elementary symmetric classes.

    ``elem[0]`` must be the unit class; entries past the end of ``elem``
    count as zero.  Returns a list indexed 0..upto whose slot 0 is the
    zero class (p_0 is not determined by Newton's recursion).
    """
    one = elem[0]
    zero = one * 0

    def e(i: int) -> GradedClass:
        return elem[i] if i < len(elem) else zero

    p: list[GradedClass] = [zero]
    for k in range(1, upto + 1):
        sign = 1 if k % 2 == 1 else -1
        acc = e(k) * (sign * k)
        for i in range(1, k):
            term = e(i) * p[k - i]
            acc = acc + (term if i % 2 == 1 else -term)
        p.append(acc)
    return p


def elementary_from_power_sums(
    p: Sequence[GradedClass], upto: int, one: GradedClass
) -> list[GradedClass]:
    """Inverse of :func:`power_sums_from_elementary`; ``p[0]`` is ignored."""
    e: list[GradedClass] = [one]
    for k in range(1, upto + 1):
        acc = one * 0
        for i in range(1, k + 1):
            term = e[k - i] * p[i]
            acc = acc + (term if i % 2 == 1 else -term)
        e.append(acc * Fraction(1, k))
    return e


@dataclass(frozen=True)
class Partition:
    """Partition of a positive integer into positive parts, order preserved."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if not self.parts:
            raise UsageError("partition must have at least one part")
        if any((not isinstance(p, int)) or p < 1 for p in self.parts):
            raise UsageError("partition parts must be positive integers")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def total(self) -> int:
        return sum(self.parts)

    def sorted_desc(self) -> tuple[int, ...]:
        return tuple(sorted(self.parts, reverse=True))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        try:
            parts = tuple(int(tok) for tok in text.split(","))
        except ValueError:
            raise UsageError(f"cannot parse partition {text!r}") from None
        return cls(parts)

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.parts)
