"""Functor trees: Adams expansions, bound constants, JSON round trips."""

import json
import random
from fractions import Fraction

import pytest

from chcalc.bundles import FormalBundle, ch_of_virtual, chern_character, evaluate_functor
from chcalc.errors import FunctorParseError, UsageError
from chcalc.functors import (
    FunctorExpr,
    adams_expand,
    arity,
    bound_constant,
    canonical_key,
    direct_sum,
    dual,
    functor_to_json,
    identity,
    parse_functor_json,
    substitute,
    tensor,
    to_json_dict,
    trivial,
    virtual_parts,
    wedge,
)
from chcalc.graded import GradedClass


def random_functor(rng, depth, slots=1):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.85:
            return identity(rng.randrange(slots))
        return trivial(rng.randint(0, 3))
    op = rng.choice(["dual", "wedge", "sum", "tensor"])
    if op == "dual":
        return dual(random_functor(rng, depth - 1, slots))
    if op == "wedge":
        return wedge(rng.randint(0, 4), random_functor(rng, depth - 1, slots))
    left = random_functor(rng, depth - 1, slots)
    right = random_functor(rng, depth - 1, slots)
    return direct_sum(left, right) if op == "sum" else tensor(left, right)


# -- Adams expansions --------------------------------------------------------

def test_adams_one_is_identity():
    assert adams_expand(1).terms == ((Fraction(1), identity(0)),)


def test_adams_two():
    # p_2 = e_1^2 - 2 e_2, i.e. E (x) E minus two copies of the wedge square.
    terms = dict((f, c) for c, f in adams_expand(2))
    assert terms == {
        tensor(identity(0), identity(0)): Fraction(1),
        wedge(2, identity(0)): Fraction(-2),
    }


def test_adams_three():
    # p_3 = e_1^3 - 3 e_1 e_2 + 3 e_3.
    terms = dict((f, c) for c, f in adams_expand(3))
    cube = tensor(tensor(identity(0), identity(0)), identity(0))
    assert terms == {
        cube: Fraction(1),
        tensor(identity(0), wedge(2, identity(0))): Fraction(-3),
        wedge(3, identity(0)): Fraction(3),
    }


def test_adams_rejects_nonpositive():
    with pytest.raises(UsageError):
        adams_expand(0)


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_adams_character_identity(rank, k):
    """ch of the expansion equals sum_i k^i ch_i, exactly, via root data."""
    trunc = 6
    bundle = FormalBundle.generic(rank)
    ch = chern_character(bundle, trunc)
    expected = GradedClass.zero(trunc)
    for i in range(trunc + 1):
        expected = expected + ch.component(i) * Fraction(k**i)
    actual = ch_of_virtual(adams_expand(k), [bundle], trunc)
    assert actual == expected


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_adams_matches_root_scaling(k):
    """Cross-check against the independent 'multiply every root by k' model."""
    trunc = 5
    for rank in (1, 2, 3):
        bundle = FormalBundle.generic(rank)
        via_expansion = ch_of_virtual(adams_expand(k), [bundle], trunc)
        via_scaling = chern_character(bundle.scale_roots(k), trunc)
        assert via_expansion == via_scaling


def test_adams_coefficients_are_integers():
    for k in range(1, 8):
        for coeff, _ in adams_expand(k):
            assert coeff.denominator == 1


def test_adams_disk_cache_round_trip(tmp_path, monkeypatch):
    from chcalc.functors import ADAMS_CACHE_ENV

    monkeypatch.setenv(ADAMS_CACHE_ENV, str(tmp_path))
    adams_expand.cache_clear()
    first = adams_expand(3)
    assert (tmp_path / "adams-3.json").exists()
    adams_expand.cache_clear()
    second = adams_expand(3)  # served from disk this time
    assert first == second
    # corrupt entries are recomputed, not trusted
    (tmp_path / "adams-4.json").write_text("{broken")
    adams_expand.cache_clear()
    assert adams_expand(4) == adams_expand(4)
    adams_expand.cache_clear()
    monkeypatch.delenv(ADAMS_CACHE_ENV)
    assert adams_expand(3) == first


def test_virtual_parts_difference():
    trunc = 4
    bundle = FormalBundle.generic(3)
    for k in (1, 2, 3, 4):
        pos, neg = virtual_parts(adams_expand(k))
        lhs = chern_character(evaluate_functor(pos, [bundle]), trunc) - chern_character(
            evaluate_functor(neg, [bundle]), trunc
        )
        assert lhs == chern_character(bundle.scale_roots(k), trunc)


# -- bound constants ---------------------------------------------------------

def test_bound_identity():
    assert bound_constant(identity(0)).constant == 1


def test_bound_trivial():
    assert bound_constant(trivial(5)).constant == 0


def test_bound_tensor_is_sum():
    two_slot = tensor(identity(0), identity(1))
    assert bound_constant(two_slot).constant == 2


def test_bound_example_tree():
    tree = tensor(tensor(identity(0), identity(0)), wedge(2, identity(0)))
    assert bound_constant(tree).constant == 4


def test_bound_dual_and_sum():
    tree = direct_sum(dual(wedge(3, identity(0))), tensor(identity(0), identity(0)))
    assert bound_constant(tree).constant == 3


def test_bound_monotone_under_composition():
    rng = random.Random(90)
    for _ in range(80):
        inner = random_functor(rng, 3)
        base = bound_constant(inner).constant
        assert bound_constant(tensor(inner, identity(0))).constant >= base
        assert bound_constant(wedge(rng.randint(1, 4), inner)).constant >= base


# -- serialization -----------------------------------------------------------

def test_identity_canonical_form():
    assert to_json_dict(identity(0)) == {"op": "id", "slot": 0}


def test_wedge_canonical_form():
    assert to_json_dict(wedge(2, identity(0))) == {
        "op": "wedge",
        "k": 2,
        "arg": {"op": "id", "slot": 0},
    }


def test_round_trip_thousand_random_trees():
    rng = random.Random(91)
    for _ in range(1000):
        f = random_functor(rng, depth=8, slots=3)
        assert parse_functor_json(functor_to_json(f)) == f


def test_canonical_key_is_deterministic():
    f = tensor(wedge(2, identity(0)), identity(0))
    assert canonical_key(f) == canonical_key(
        tensor(wedge(2, identity(0)), identity(0))
    )
    assert json.loads(canonical_key(f)) == to_json_dict(f)


def test_parse_error_reports_path():
    bad = json.dumps({"op": "tensor", "left": {"op": "id", "slot": 0}, "right": {"op": "nope"}})
    with pytest.raises(FunctorParseError) as excinfo:
        parse_functor_json(bad)
    assert "$.right" in str(excinfo.value)


def test_parse_error_on_invalid_json():
    with pytest.raises(FunctorParseError) as excinfo:
        parse_functor_json("{not json")
    assert "position" in str(excinfo.value)


def test_parse_rejects_bad_slot():
    with pytest.raises(FunctorParseError):
        parse_functor_json(json.dumps({"op": "id", "slot": -1}))
    with pytest.raises(FunctorParseError):
        parse_functor_json(json.dumps({"op": "wedge", "k": "2", "arg": {"op": "id", "slot": 0}}))


# -- structure helpers -------------------------------------------------------

def test_arity():
    assert arity(trivial(2)) == 0
    assert arity(identity(0)) == 1
    assert arity(tensor(identity(0), identity(1))) == 2


def test_substitute_composition():
    template = tensor(identity(0), identity(1))
    inner = wedge(2, identity(0))
    composed = substitute(template, [identity(0), inner])
    assert composed == tensor(identity(0), wedge(2, identity(0)))
    bundle = FormalBundle.generic(3)
    assert evaluate_functor(composed, [bundle]) == bundle.tensor(bundle.wedge(2))


def test_substitute_missing_slot():
    with pytest.raises(UsageError):
        substitute(identity(1), [identity(0)])


def test_invalid_constructors():
    with pytest.raises(UsageError):
        identity(-1)
    with pytest.raises(UsageError):
        trivial(-2)
    with pytest.raises(UsageError):
        wedge(-1, identity(0))
    with pytest.raises(UsageError):
        FunctorExpr("bogus")
