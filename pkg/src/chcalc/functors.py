"""Bundle-functor expression trees, Adams expansions, curvature bound constants.

The six node kinds are the operations that exist on Hermitian vector
bundles over any base: identity slots, trivial bundles, duals, exterior
powers, direct sums and tensor products.  Trees are immutable, hashable
and round-trip losslessly through a canonical JSON encoding.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FunctorParseError, UsageError
from .graded import GradedClass, power_sums_from_elementary

FUNCTOR_SCHEMA_VERSION = "cc-functor-v1"

# Optional on-disk cache for Adams expansions; purely a performance cache,
# results are identical with or without it.
ADAMS_CACHE_ENV = "CHCALC_ADAMS_CACHE_DIR"

_OPS = ("id", "trivial", "dual", "wedge", "sum", "tensor")


@dataclass(frozen=True)
class FunctorExpr:
    op: str
    value: int | None = None
    children: tuple["FunctorExpr", ...] = ()

    def __post_init__(self):
        if self.op not in _OPS:
            raise UsageError(f"unknown functor op {self.op!r}")


def identity(slot: int = 0) -> FunctorExpr:
    if slot < 0:
        raise UsageError("slot index must be non-negative")
    return FunctorExpr("id", slot)


def trivial(k: int) -> FunctorExpr:
    if k < 0:
        raise UsageError("trivial bundle rank must be non-negative")
    return FunctorExpr("trivial", k)


def dual(child: FunctorExpr) -> FunctorExpr:
    return FunctorExpr("dual", None, (child,))


def wedge(k: int, child: FunctorExpr) -> FunctorExpr:
    if k < 0:
        raise UsageError("exterior power index must be non-negative")
    return FunctorExpr("wedge", k, (child,))


def direct_sum(left: FunctorExpr, right: FunctorExpr) -> FunctorExpr:
    return FunctorExpr("sum", None, (left, right))


def tensor(left: FunctorExpr, right: FunctorExpr) -> FunctorExpr:
    return FunctorExpr("tensor", None, (left, right))


def arity(expr: FunctorExpr) -> int:
    """Number of argument slots: one past the largest identity slot used."""
    if expr.op == "id":
        return expr.value + 1
    return max((arity(c) for c in expr.children), default=0)


def substitute(expr: FunctorExpr, replacements: Sequence[FunctorExpr]) -> FunctorExpr:
    """Compose: plug ``replacements[s]`` into every identity slot ``s``."""
    if expr.op == "id":
        if expr.value >= len(replacements):
            raise UsageError(f"no replacement supplied for slot {expr.value}")
        return replacements[expr.value]
    if not expr.children:
        return expr
    return FunctorExpr(
        expr.op, expr.value, tuple(substitute(c, replacements) for c in expr.children)
    )


def format_functor(expr: FunctorExpr) -> str:
    """Human-readable rendering; slot 0 prints as E, slot 1 as F."""
    names = "EFGH"
    if expr.op == "id":
        return names[expr.value] if expr.value < len(names) else f"E{expr.value}"
    if expr.op == "trivial":
        return f"C^{expr.value}"
    if expr.op == "dual":
        return f"dual({format_functor(expr.children[0])})"
    if expr.op == "wedge":
        return f"Λ^{expr.value}({format_functor(expr.children[0])})"
    sep = "⊕" if expr.op == "sum" else "⊗"
    return f"({format_functor(expr.children[0])}{sep}{format_functor(expr.children[1])})"


# ---------------------------------------------------------------------------
# JSON serialization (schema cc-functor-v1)
# ---------------------------------------------------------------------------

def to_json_dict(expr: FunctorExpr) -> dict:
    if expr.op == "id":
        return {"op": "id", "slot": expr.value}
    if expr.op == "trivial":
        return {"op": "trivial", "k": expr.value}
    if expr.op == "dual":
        return {"op": "dual", "arg": to_json_dict(expr.children[0])}
    if expr.op == "wedge":
        return {"op": "wedge", "k": expr.value, "arg": to_json_dict(expr.children[0])}
    return {
        "op": expr.op,
        "left": to_json_dict(expr.children[0]),
        "right": to_json_dict(expr.children[1]),
    }


def functor_to_json(expr: FunctorExpr) -> str:
    """Canonical text encoding: sorted keys, no whitespace, stable across runs."""
    return json.dumps(to_json_dict(expr), sort_keys=True, separators=(",", ":"))


@lru_cache(maxsize=None)
def canonical_key(expr: FunctorExpr) -> str:
    return functor_to_json(expr)


def _expect_int(obj: dict, field: str, path: str, minimum: int = 0) -> int:
    if field not in obj:
        raise FunctorParseError(f"missing field {field!r}", path)
    value = obj[field]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise FunctorParseError(f"field {field!r} must be an integer >= {minimum}", path)
    return value


def from_json_dict(obj, path: str = "$") -> FunctorExpr:
    if not isinstance(obj, dict):
        raise FunctorParseError("functor node must be a JSON object", path)
    op = obj.get("op")
    if op == "id":
        return identity(_expect_int(obj, "slot", path))
    if op == "trivial":
        return trivial(_expect_int(obj, "k", path))
    if op == "dual":
        if "arg" not in obj:
            raise FunctorParseError("missing field 'arg'", path)
        return dual(from_json_dict(obj["arg"], path + ".arg"))
    if op == "wedge":
        if "arg" not in obj:
            raise FunctorParseError("missing field 'arg'", path)
        return wedge(_expect_int(obj, "k", path), from_json_dict(obj["arg"], path + ".arg"))
    if op in ("sum", "tensor"):
        for field in ("left", "right"):
            if field not in obj:
                raise FunctorParseError(f"missing field {field!r}", path)
        build = direct_sum if op == "sum" else tensor
        return build(
            from_json_dict(obj["left"], path + ".left"),
            from_json_dict(obj["right"], path + ".right"),
        )
    raise FunctorParseError(f"unknown op {op!r}", path)


def parse_functor_json(text: str) -> FunctorExpr:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FunctorParseError(f"invalid JSON at position {exc.pos}: {exc.msg}") from None
    return from_json_dict(obj)


# ---------------------------------------------------------------------------
# Curvature-norm bound constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureBound:
    """Constant C with ||curvature of J(E..)|| <= C * max over slots ||curvature of E_slot||.

    Propagation rules: identity 1, trivial 0, dual unchanged, direct sum max,
    tensor sum, k-th exterior power k times the child (an exterior power is a
    parallel subbundle of the k-fold tensor power, and restriction does not
    increase the operator norm).
    """

    constant: Fraction

    def __post_init__(self):
        if self.constant < 0:
            raise UsageError("bound constant must be non-negative")


def bound_constant(expr: FunctorExpr) -> CurvatureBound:
    return CurvatureBound(_bound(expr))


def _bound(expr: FunctorExpr) -> Fraction:
    if expr.op == "id":
        return Fraction(1)
    if expr.op == "trivial":
        return Fraction(0)
    if expr.op == "dual":
        return _bound(expr.children[0])
    if expr.op == "wedge":
        return expr.value * _bound(expr.children[0])
    if expr.op == "sum":
        return max(_bound(expr.children[0]), _bound(expr.children[1]))
    return _bound(expr.children[0]) + _bound(expr.children[1])


# ---------------------------------------------------------------------------
# Adams operations as virtual combinations of exterior-power monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirtualCombination:
    """Formal rational combination of honest one-or-more-slot functors."""

    terms: tuple[tuple[Fraction, FunctorExpr], ...]

    def __iter__(self):
        return iter(self.terms)

    def scaled(self, factor: Fraction) -> "VirtualCombination":
        return VirtualCombination(tuple((c * factor, f) for c, f in self.terms))


def wedge_monomial(indices: Iterable[int], slot: int = 0) -> FunctorExpr:
    """Tensor product of exterior powers Λ^i applied to one slot.

    Indices are sorted ascending; Λ^1 is the identity.  The empty product
    is the trivial line bundle.
    """
    factors = [
        identity(slot) if i == 1 else wedge(i, identity(slot))
        for i in sorted(indices)
    ]
    if not factors:
        return trivial(1)
    result = factors[0]
    for factor in factors[1:]:
        result = tensor(result, factor)
    return result


@lru_cache(maxsize=None)
def _power_sum_monomials(k: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """The k-th power sum written in elementary symmetric generators.

    Returns (integer coefficient, multiset of e-indices) pairs; e.g. k=3
    gives e1^3 - 3 e1 e2 + 3 e3.
    """
    trunc = k
    elem = [GradedClass.constant(1, trunc)]
    for i in range(1, k + 1):
        elem.append(GradedClass.generator(f"e{i}", i, trunc))
    p_k = power_sums_from_elementary(elem, k)[k]
    out = []
    for mono, coeff in p_k.iter_terms():
        if coeff.denominator != 1:
            raise AssertionError("power-sum expansion must have integer coefficients")
        indices = []
        for name, exp in mono:
            indices.extend([int(name[1:])] * exp)
        out.append((coeff.numerator, tuple(sorted(indices))))
    return tuple(out)


def _adams_cache_load(k: int) -> VirtualCombination | None:
    directory = os.environ.get(ADAMS_CACHE_ENV)
    if not directory:
        return None
    path = Path(directory) / f"adams-{k}.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        terms = tuple(
            (Fraction(entry["c"]), from_json_dict(entry["functor"]))
            for entry in doc["terms"]
        )
        return VirtualCombination(terms)
    except (OSError, ValueError, KeyError, TypeError, FunctorParseError):
        return None  # unreadable cache entries are recomputed and rewritten


def _adams_cache_store(k: int, vc: VirtualCombination) -> None:
    directory = os.environ.get(ADAMS_CACHE_ENV)
    if not directory:
        return
    try:
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        doc = {
            "k": k,
            "terms": [
                {"c": str(coeff), "functor": to_json_dict(functor)}
                for coeff, functor in vc
            ],
            "version": FUNCTOR_SCHEMA_VERSION,
        }
        tmp = root / f".adams-{k}.json.tmp"
        tmp.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
        tmp.replace(root / f"adams-{k}.json")
    except OSError:
        pass  # the disk cache is best-effort only


@lru_cache(maxsize=None)
def adams_expand(k: int) -> VirtualCombination:
    """The k-th Adams operation as an integer combination of honest functors.

    On a bundle split into line factors the operation raises every Chern
    root to the k-th power, so its expansion is the k-th power sum written
    in exterior powers via Newton's recursion:
    psi_k = Λ^1 psi_{k-1} - Λ^2 psi_{k-2} + ... + (-1)^{k-1} k Λ^k.

    Setting the environment variable named by :data:`ADAMS_CACHE_ENV` to a
    directory persists expansions across processes.
    """
    if k < 1:
        raise UsageError("Adams operation index must be >= 1")
    cached = _adams_cache_load(k)
    if cached is not None:
        return cached
    terms = [
        (Fraction(coeff), wedge_monomial(indices))
        for coeff, indices in _power_sum_monomials(k)
    ]
    terms.sort(key=lambda t: canonical_key(t[1]))
    result = VirtualCombination(tuple(terms))
    _adams_cache_store(k, result)
    return result


def _repeat_sum(expr: FunctorExpr, copies: int) -> FunctorExpr:
    result = expr
    for _ in range(copies - 1):
        result = direct_sum(result, expr)
    return result


def virtual_parts(vc: VirtualCombination) -> tuple[FunctorExpr, FunctorExpr]:
    """Split a virtual combination with integer coefficients into a difference
    of honest bundles: (positive part, negative part), each a direct sum with
    multiplicity.  An empty part is the rank-0 trivial bundle."""
    pos: list[FunctorExpr] = []
    neg: list[FunctorExpr] = []
    for coeff, functor in vc.terms:
        if coeff.denominator != 1:
            raise UsageError("virtual parts require integer coefficients")
        copies = abs(coeff.numerator)
        if copies == 0:
            continue
        (pos if coeff > 0 else neg).append(_repeat_sum(functor, copies))

    def fold(parts: list[FunctorExpr]) -> FunctorExpr:
        if not parts:
            return trivial(0)
        result = parts[0]
        for part in parts[1:]:
            result = direct_sum(result, part)
        return result

    return fold(pos), fold(neg)
