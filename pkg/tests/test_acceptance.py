"""Acceptance suite: one test per criterion, each printing a PASS line.

Everything symbolic is checked by exact equality through the splitting
oracle; the two closed-form geometry numbers are exact rationals; the
only numeric tolerance in the package is the 1e-9 allowance on the
Kronecker operator-norm checks.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import random
from fractions import Fraction

from chcalc.bundles import (
    FormalBundle,
    PairingData,
    chern_character,
    chern_class,
    ch_of_virtual,
    evaluate_functor,
    integrate,
)
from chcalc.certificates import (
    DecompositionCertificate,
    adams_integral_matrix,
    build_library,
    comparison_pipeline,
    decompose,
    gaussian_det,
    product_split,
    solve_exact,
    vandermonde_det,
    vandermonde_select,
    verify_certificate,
)
from chcalc.functors import (
    FunctorExpr,
    adams_expand,
    bound_constant,
    canonical_key,
    trivial,
)
from chcalc.geometry import (
    SphereLineBundle,
    acw_lower_bound,
    hopf_curvature_norm,
    kron_norm_check,
)
from chcalc.graded import GradedClass, Partition


def partitions_of(total, largest=None):
    if total == 0:
        yield ()
        return
    largest = total if largest is None else largest
    for first in range(min(total, largest), 0, -1):
        for rest in partitions_of(total - first, first):
            yield (first,) + rest


def test_criterion_1_adams_chern_identity():
    """Ranks 1-4, k 1-6, truncation 6: ch(psi_k expansion) = sum k^i ch_i."""
    trunc = 6
    for rank in range(1, 5):
        bundle = FormalBundle.generic(rank)
        ch = chern_character(bundle, trunc)
        for k in range(1, 7):
            expected = GradedClass.zero(trunc)
            for i in range(trunc + 1):
                expected = expected + ch.component(i) * Fraction(k**i)
            actual = ch_of_virtual(adams_expand(k), [bundle], trunc)
            assert actual == expected, f"rank {rank}, k {k}"
    print("[acceptance] criterion 1 PASS: Adams-Chern identity exact "
          "(ranks 1-4, k 1-6, N = 6)")


def test_criterion_2_decomposition_certificates():
    """N = 4: every partition of every K <= 4 certifies exactly at ranks 1-4."""
    library = build_library(4, 4)
    checked = 0
    for total in range(1, 5):
        for parts in partitions_of(total):
            cert = decompose(Partition(parts), library)
            report = verify_certificate(cert, [1, 2, 3, 4])
            assert report.ok, f"partition {parts}: {report.describe()}"
            for _, residual in report.residuals.items():
                assert residual.is_zero()
            checked += 1
    assert checked == 11  # partitions of 1, 2, 3, 4
    print(f"[acceptance] criterion 2 PASS: {checked} certificates "
          "(all partitions of K <= 4, N = 4) verify with zero residual at ranks 1-4")


def test_criterion_3_vandermonde():
    """Closed-form determinants vs exact elimination; exact unit selectors."""
    for n in range(0, 9):
        product = Fraction(1)
        for i in range(1, n + 2):
            for j in range(i + 1, n + 2):
                product *= j - i
        assert vandermonde_det(n) == product
        system = adams_integral_matrix(n)
        assert gaussian_det(system.matrix) == product != 0
        for a in range(n + 1):
            lam = vandermonde_select(n, a)
            for a_prime in range(n + 1):
                value = sum(lam[l - 1] * l**a_prime for l in range(1, n + 2))
                assert value == (1 if a_prime == a else 0)
    print("[acceptance] criterion 3 PASS: Vandermonde determinants and "
          "selectors exact for n <= 8")


def test_criterion_4_pairwise_split_instance():
    """product_split(1,1): the 3x3 exact solve gives [-5/2, 4, -3/2] and the
    two-slot identity holds at ranks <= 3."""
    matrix = [[Fraction(l**a) for l in (1, 2, 3)] for a in (0, 1, 2)]
    oracle = solve_exact(matrix, [Fraction(0), Fraction(1), Fraction(0)])
    assert oracle == [Fraction(-5, 2), Fraction(4), Fraction(-3, 2)]
    assert vandermonde_select(2, 1) == oracle

    terms = product_split(1, 1)
    for r1 in (1, 2, 3):
        for r2 in (1, 2, 3):
            f1 = FormalBundle.generic(r1, prefix="x")
            f2 = FormalBundle.generic(r2, prefix="y")
            lhs = chern_character(f1, 2).component(1) * chern_character(
                f2, 2
            ).component(1)
            rhs = GradedClass.zero(2)
            for coeff, functor in terms:
                image = evaluate_functor(functor, [f1, f2])
                rhs = rhs + chern_character(image, 2).component(2) * coeff
            assert (lhs - rhs).is_zero(), f"ranks ({r1},{r2})"
    print("[acceptance] criterion 4 PASS: pairwise split coefficients "
          "[-5/2, 4, -3/2] confirmed by exact solve; identity exact at ranks <= 3")


def _weight_monomials(weight, gens):
    names = sorted(gens)

    def rec(idx, remaining):
        if remaining == 0:
            yield ()
            return
        if idx == len(names):
            return
        name = names[idx]
        w = gens[name]
        for take in range(0, remaining // w + 1):
            for rest in rec(idx + 1, remaining - take * w):
                yield ((name, take),) + rest if take else rest

    for mono in rec(0, weight):
        yield tuple(pair for pair in mono if pair[1])


def _random_pairing(rng, n, bundle_gens):
    weights = {g: 1 for g in bundle_gens}
    pont = {f"p{i}": 2 * i for i in range(1, n // 2 + 1)}
    weights.update(pont)
    ahat = GradedClass.constant(1, n, pont)
    for w in range(2, n + 1, 2):
        for mono in _weight_monomials(w, pont):
            coeff = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
            ahat = ahat + GradedClass(n, {mono: coeff}, pont)
    table = {}
    for mono in _weight_monomials(n, weights):
        value = Fraction(rng.randint(-4, 4))
        if value:
            table[mono] = value
    return PairingData(n, ahat, table, weights)


def test_criterion_5_pipeline_randomized_suite():
    """50 random pairing tables, n <= 3: nonzero output pairing, constant c
    fixed per dimension, bound constant of the output within 1/c."""
    rng = random.Random(987)
    plan = {1: ((1,), 10), 2: ((1, 1), 20), 3: ((2, 1), 20)}
    total = 0
    for n, (witness_parts, wanted) in plan.items():
        bundle = FormalBundle.generic(2)
        witness = Partition(witness_parts)
        constants = set()
        done = 0
        while done < wanted:
            data = _random_pairing(rng, n, ["x1", "x2"])
            product = GradedClass.constant(1, n, {"x1": 1, "x2": 1})
            for part in witness.parts:
                product = product * chern_class(bundle, part, truncation=n)
            if integrate(product, data) == 0:
                continue
            result = comparison_pipeline(bundle, data, witness, Fraction(1))
            image = evaluate_functor(result.functor, [bundle])
            pairing = integrate(
                data.ahat.truncate(n) * chern_character(image, n), data
            )
            assert pairing != 0, f"zero output pairing at n = {n}"
            assert bound_constant(result.functor).constant <= 1 / result.constant
            constants.add(result.constant)
            done += 1
            total += 1
        assert len(constants) == 1, f"c varied across tables at n = {n}"
    assert total == 50
    print("[acceptance] criterion 5 PASS: 50 randomized pipeline runs, "
          "n <= 3: nonzero output pairing, per-dimension constant c, bound within 1/c")


def test_criterion_6_sphere_example():
    """Curvature norm 1/(2 R^2) and witness bound 2 R^2, exactly."""
    for radius in (Fraction(1), Fraction(2), Fraction(3), Fraction(7, 2)):
        bundle = SphereLineBundle(radius)
        norm = hopf_curvature_norm(bundle)
        assert norm == Fraction(1, 2) / radius**2
        witness = acw_lower_bound(bundle, Fraction(2))
        assert witness.bound == 2 * radius**2
        assert norm * witness.bound == 1
        assert witness.product_pairing != 0
    print("[acceptance] criterion 6 PASS: curvature norm 1/(2R^2) and "
          "witness bound 2R^2 exact for R in {1, 2, 3, 7/2}")


def test_criterion_7_matrix_norm_inequality():
    """1000 seeded trials, dims <= 8: combined norm within sum + 1e-9 and
    identity embedding preserves the norm to 1e-9."""
    pairs = [(1, 1), (2, 2), (2, 8), (3, 5), (4, 4), (5, 3), (8, 2), (8, 8)]
    trials_each = 125  # 8 * 125 = 1000
    worst = 0.0
    for index, (d1, d2) in enumerate(pairs):
        sample = kron_norm_check(d1, d2, trials_each, seed=31337 + index)
        assert sample.max_ratio <= 1 + 1e-9
        assert sample.max_embed_defect <= 1e-9
        worst = max(worst, sample.max_ratio)
    print(f"[acceptance] criterion 7 PASS: 1000 trials, dims <= 8, "
          f"max ratio {worst:.12f} <= 1 + 1e-9")


def _mutate_term(rng, cert):
    """One random single-site mutation: a lambda bump or a node rewrite."""
    index = rng.randrange(len(cert.terms))
    lam, functor = cert.terms[index]
    kind = rng.choice(["lambda+1", "lambda-flip", "node"])
    if kind == "lambda+1":
        new_term = (lam + 1, functor)
    elif kind == "lambda-flip":
        new_term = (-lam, functor)
    else:
        new_term = (lam, _mutate_node(rng, functor))
    terms = list(cert.terms)
    terms[index] = new_term
    return DecompositionCertificate(
        weight_bound=cert.weight_bound,
        partition=cert.partition,
        terms=tuple(terms),
        verified_ranks=(),
        generator_set_id=cert.generator_set_id,
    )


def _mutate_node(rng, functor):
    """Rewrite one node: wedge index shift, tensor -> sum, or id -> trivial.

    Shifts keep wedge indices within 1..4 so the change stays visible at the
    tested ranks."""
    paths = []

    def walk(node, path):
        paths.append((node, path))
        for child_index, child in enumerate(node.children):
            walk(child, path + (child_index,))

    walk(functor, ())
    candidates = [(node, path) for node, path in paths if node.op in ("id", "wedge", "tensor")]
    node, path = candidates[rng.randrange(len(candidates))]
    if node.op == "wedge":
        new_k = node.value + 1 if node.value < 4 else node.value - 1
        replacement = FunctorExpr("wedge", new_k, node.children)
    elif node.op == "tensor":
        replacement = FunctorExpr("sum", None, node.children)
    else:
        replacement = trivial(1)
    return _replace_at(functor, path, replacement)


def _replace_at(node, path, replacement):
    if not path:
        return replacement
    head, *rest = path
    children = list(node.children)
    children[head] = _replace_at(children[head], tuple(rest), replacement)
    return FunctorExpr(node.op, node.value, tuple(children))


def test_criterion_8_checker_soundness():
    """100 single-site mutations of passing certificates all flip the checker."""
    rng = random.Random(4096)
    library = build_library(3, 3)
    base_certs = [
        decompose(Partition(parts), library)
        for total in range(1, 4)
        for parts in partitions_of(total)
    ]
    for cert in base_certs:
        assert verify_certificate(cert, [1, 2, 3, 4]).ok
    flipped = 0
    for trial in range(100):
        cert = base_certs[trial % len(base_certs)]
        mutated = _mutate_term(rng, cert)
        if mutated.terms == cert.terms:  # cannot happen; defensive
            continue
        report = verify_certificate(mutated, [1, 2, 3, 4])
        assert not report.ok, (
            f"mutation #{trial} left the certificate passing: "
            f"{[ (str(l), canonical_key(f)) for l, f in mutated.terms ]}"
        )
        flipped += 1
    assert flipped == 100
    print("[acceptance] criterion 8 PASS: 100/100 single-site mutations "
          "flip verification to failure")
