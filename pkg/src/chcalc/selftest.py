"""Invariant suite behind the ``selftest`` command.

Each check returns (ok, detail).  The suite covers the documented
invariants of the algebra, the oracle, the functor calculus, the
certificate engine and the geometry witnesses; any failure is a bug.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .bundles import (
    FormalBundle,
    LinearForm,
    PairingData,
    ch_from_chern,
    chern_character,
    chern_class,
    chern_from_ch,
    evaluate_functor,
    integrate,
    total_chern_class,
)
from .certificates import (
    adams_integral_matrix,
    build_library,
    comparison_pipeline,
    decompose,
    solve_exact,
    sup_bound_constant,
    vandermonde_det,
    vandermonde_select,
    verify_certificate,
)
from .functors import (
    FunctorExpr,
    adams_expand,
    bound_constant,
    canonical_key,
    identity,
    parse_functor_json,
    functor_to_json,
    tensor,
    wedge,
)
from .geometry import (
    SphereLineBundle,
    acw_lower_bound,
    hopf_curvature_norm,
    kron_norm_check,
)
from .graded import GradedClass, Partition


def _random_class(rng: random.Random, gens: dict[str, int], truncation: int) -> GradedClass:
    terms = {}
    names = list(gens)
    for _ in range(rng.randint(1, 6)):
        mono = {}
        for _ in range(rng.randint(0, 3)):
            name = rng.choice(names)
            mono[name] = mono.get(name, 0) + 1
        coeff = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        terms[tuple(sorted(mono.items()))] = coeff
    return GradedClass(truncation, terms, gens)


def check_ring_laws() -> tuple[bool, str]:
    rng = random.Random(20240)
    gens = {"x": 1, "y": 1, "q": 2}
    for _ in range(40):
        n = rng.randint(1, 5)
        a, b, c = (_random_class(rng, gens, n) for _ in range(3))
        if (a + b) + c != a + (b + c):
            return False, "addition associativity failed"
        if a * b != b * a:
            return False, "multiplication commutativity failed"
        if (a * b) * c != a * (b * c):
            return False, "multiplication associativity failed"
        if a * (b + c) != a * b + a * c:
            return False, "distributivity failed"
    return True, "ring laws hold on 40 random triples"


def check_truncation_coherence() -> tuple[bool, str]:
    rng = random.Random(20241)
    gens = {"x": 1, "y": 1}
    for _ in range(30):
        n = rng.randint(2, 6)
        a = _random_class(rng, gens, n)
        b = _random_class(rng, gens, n)
        for m in range(n + 1):
            if (a * b).truncate(m) != a.truncate(m) * b.truncate(m):
                return False, f"truncation to {m} does not commute with product"
    return True, "truncate-then-multiply equals multiply-then-truncate"


def check_component_completeness() -> tuple[bool, str]:
    rng = random.Random(20242)
    gens = {"x": 1, "q": 2}
    for _ in range(20):
        n = rng.randint(1, 6)
        a = _random_class(rng, gens, n)
        total = GradedClass.zero(n, gens)
        for w in range(n + 1):
            total = total + a.component(w)
        if total != a:
            return False, "components do not sum back to the class"
    return True, "weight components sum back to the original class"


def check_rational_reduction() -> tuple[bool, str]:
    rng = random.Random(20243)
    gens = {"x": 1}
    for _ in range(20):
        a = _random_class(rng, gens, 4)
        b = _random_class(rng, gens, 4)
        for _, coeff in (a * b + a).iter_terms():
            if math.gcd(coeff.numerator, coeff.denominator) != 1 or coeff.denominator <= 0:
                return False, "coefficient not in lowest terms"
    return True, "all coefficients stay reduced with positive denominators"


def _random_bundle(rng: random.Random, rank: int, gens: list[str]) -> FormalBundle:
    roots = []
    for _ in range(rank):
        form = {g: rng.randint(-2, 2) for g in rng.sample(gens, rng.randint(0, len(gens)))}
        roots.append(LinearForm.of(form))
    return FormalBundle.from_roots(roots)


def check_ch_additive_multiplicative() -> tuple[bool, str]:
    rng = random.Random(20244)
    gens = ["x1", "x2", "x3"]
    for _ in range(12):
        n = rng.randint(1, 6)
        e = _random_bundle(rng, rng.randint(1, 4), gens)
        f = _random_bundle(rng, rng.randint(1, 4), gens)
        che, chf = chern_character(e, n), chern_character(f, n)
        if chern_character(e.direct_sum(f), n) != che + chf:
            return False, "ch not additive on a direct sum"
        if chern_character(e.tensor(f), n) != che * chf:
            return False, "ch not multiplicative on a tensor product"
    return True, "ch additive over sums and multiplicative over tensors (rank <= 4, N <= 6)"


def check_chern_class_vs_total() -> tuple[bool, str]:
    rng = random.Random(20245)
    gens = ["x1", "x2", "x3"]
    for _ in range(12):
        rank = rng.randint(1, 5)
        e = _random_bundle(rng, rank, gens)
        total = total_chern_class(e, rank)
        for i in range(rank + 1):
            if chern_class(e, i, truncation=rank) != total.component(i):
                return False, f"c_{i} disagrees with the total-class product"
    return True, "each c_i equals the weight-i part of prod(1 + root) (rank <= 5)"


def check_newton_round_trip() -> tuple[bool, str]:
    rng = random.Random(20246)
    gens = ["x1", "x2", "x3"]
    for _ in range(10):
        rank = rng.randint(1, 5)
        n = rng.randint(1, 5)
        e = _random_bundle(rng, rank, gens)
        cs = [chern_class(e, i, truncation=n) for i in range(n + 1)]
        chs = ch_from_chern(cs, rank, n)
        ch_direct = chern_character(e, n)
        for i in range(n + 1):
            if chs[i] != ch_direct.component(i):
                return False, f"ch_{i} from Newton disagrees with the oracle"
        back = chern_from_ch(chs, None, n)
        for i in range(n + 1):
            if back[i] != cs[i]:
                return False, f"round trip broke at c_{i}"
    return True, "Newton conversions round-trip against the oracle (rank <= 5, N <= 5)"


def check_duality() -> tuple[bool, str]:
    rng = random.Random(20247)
    gens = ["x1", "x2"]
    for _ in range(10):
        n = rng.randint(1, 6)
        e = _random_bundle(rng, rng.randint(1, 4), gens)
        ch = chern_character(e, n)
        chd = chern_character(e.dual(), n)
        flipped = GradedClass.zero(n, {g: 1 for g in gens})
        for w in range(n + 1):
            part = ch.component(w)
            flipped = flipped + (part if w % 2 == 0 else -part)
        if chd != flipped:
            return False, "dual does not negate odd components"
    return True, "ch of the dual negates exactly the odd-weight components"


def check_adams_character(max_rank: int = 4, max_k: int = 6, trunc: int = 6) -> tuple[bool, str]:
    for rank in range(1, max_rank + 1):
        e = FormalBundle.generic(rank)
        ch = chern_character(e, trunc)
        for k in range(1, max_k + 1):
            expected = GradedClass.zero(trunc)
            for i in range(trunc + 1):
                expected = expected + ch.component(i) * Fraction(k**i)
            total = GradedClass.zero(trunc)
            for coeff, functor in adams_expand(k):
                image = evaluate_functor(functor, [e])
                total = total + chern_character(image, trunc) * coeff
            if total != expected:
                return False, f"Adams character identity failed at rank {rank}, k {k}"
            if total != chern_character(e.scale_roots(k), trunc):
                return False, f"Adams expansion disagrees with root scaling at rank {rank}, k {k}"
    return True, f"Adams identity exact for rank <= {max_rank}, k <= {max_k}, N = {trunc}"


def check_bound_monotonicity() -> tuple[bool, str]:
    rng = random.Random(20248)
    for _ in range(50):
        inner = _random_functor(rng, depth=3)
        c_inner = bound_constant(inner).constant
        wrapped_tensor = tensor(inner, identity(0))
        wrapped_wedge = wedge(rng.randint(1, 3), inner)
        if bound_constant(wrapped_tensor).constant < c_inner:
            return False, "tensor wrapping lowered the bound constant"
        if bound_constant(wrapped_wedge).constant < c_inner:
            return False, "wedge wrapping lowered the bound constant"
    return True, "bound constants are monotone under tensor and wedge composition"


def _random_functor(rng: random.Random, depth: int, slots: int = 1) -> FunctorExpr:
    from .functors import direct_sum, dual, trivial

    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.85:
            return identity(rng.randrange(slots))
        return trivial(rng.randint(0, 3))
    op = rng.choice(["dual", "wedge", "sum", "tensor"])
    if op == "dual":
        return dual(_random_functor(rng, depth - 1, slots))
    if op == "wedge":
        return wedge(rng.randint(0, 4), _random_functor(rng, depth - 1, slots))
    left = _random_functor(rng, depth - 1, slots)
    right = _random_functor(rng, depth - 1, slots)
    return direct_sum(left, right) if op == "sum" else tensor(left, right)


def check_functor_round_trip() -> tuple[bool, str]:
    rng = random.Random(20249)
    for _ in range(1000):
        f = _random_functor(rng, depth=8, slots=3)
        if parse_functor_json(functor_to_json(f)) != f:
            return False, f"round trip failed for {canonical_key(f)}"
    return True, "1000 random trees of depth <= 8 round-trip through JSON"


def check_vandermonde() -> tuple[bool, str]:
    for n in range(0, 9):
        system = adams_integral_matrix(n)
        if not system.certify_invertible():
            return False, f"determinant cross-check failed at n = {n}"
        for a in range(n + 1):
            lam = vandermonde_select(n, a)
            for ap in range(n + 1):
                value = sum(lam[l - 1] * l**ap for l in range(1, n + 2))
                if value != (1 if ap == a else 0):
                    return False, f"selector ({n},{a}) missed exponent {ap}"
    return True, "determinants and unit-vector selectors exact for n <= 8"


def check_vandermonde_injectivity() -> tuple[bool, str]:
    rng = random.Random(20250)
    for n in range(0, 9):
        system = adams_integral_matrix(n)
        if vandermonde_det(n) == 0:
            return False, f"determinant vanished at n = {n}"
        rhs = [Fraction(rng.randint(-5, 5)) for _ in range(n + 1)]
        sol = solve_exact(system.matrix, rhs)
        for row, want in zip(system.matrix, rhs):
            if sum(Fraction(a) * s for a, s in zip(row, sol)) != want:
                return False, f"solve failed at n = {n}"
    return True, "the power-evaluation system is invertible for n <= 8"


def check_certificates(weight_bound: int = 3) -> tuple[bool, str]:
    library = build_library(weight_bound, weight_bound)
    count = 0
    for total in range(1, weight_bound + 1):
        for parts in _partitions(total):
            cert = decompose(Partition(parts), library)
            report = verify_certificate(cert, [1, 2, 3, 4])
            if not report.ok:
                return False, f"certificate for {parts} failed: {report.describe()}"
            level = library.level(cert.generator_set_id)
            if any(functor not in level for _, functor in cert.terms):
                return False, f"certificate for {parts} used a functor outside its level"
            count += 1
    return True, f"{count} certificates (K <= {weight_bound}) verify at ranks 1..4"


def _partitions(total: int, largest: int | None = None):
    if total == 0:
        yield ()
        return
    largest = total if largest is None else largest
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def _random_pairing(rng: random.Random, n: int, bundle_gens: list[str]):
    weights = {g: 1 for g in bundle_gens}
    pont = {}
    for i in range(1, n // 2 + 1):
        pont[f"p{i}"] = 2 * i
    weights.update(pont)
    ahat = GradedClass.constant(1, n, pont)
    for w in range(2, n + 1, 2):
        for mono, _ in _weight_monomials(w, pont):
            ahat = ahat + GradedClass(n, {mono: Fraction(rng.randint(-3, 3), rng.randint(1, 4))}, pont)
    table = {}
    for mono, _ in _weight_monomials(n, weights):
        value = Fraction(rng.randint(-4, 4))
        if value:
            table[mono] = value
    return PairingData(n, ahat, table, weights)


def _weight_monomials(weight: int, gens: dict[str, int]):
    names = sorted(gens)

    def rec(idx: int, remaining: int):
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
        yield tuple(p for p in mono if p[1]), weight


def check_pipeline_soundness(max_n: int = 4, tables_per_n: int = 4) -> tuple[bool, str]:
    rng = random.Random(20251)
    witnesses = {1: (1,), 2: (1, 1), 3: (2, 1), 4: (2, 1, 1)}
    for n in range(1, max_n + 1):
        bundle = FormalBundle.generic(2)
        constants = set()
        done = 0
        while done < tables_per_n:
            data = _random_pairing(rng, n, ["x1", "x2"])
            witness = Partition(witnesses[n])
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
            if pairing == 0:
                return False, f"returned functor pairs to zero at n = {n}"
            if bound_constant(result.functor).constant > 1 / result.constant:
                return False, f"bound constant exceeds 1/c at n = {n}"
            constants.add(result.constant)
            done += 1
        if len(constants) != 1:
            return False, f"constant c varied across tables at n = {n}"
    return True, f"pipeline sound on {tables_per_n} random tables per n <= {max_n}"


def check_library_bounds() -> tuple[bool, str]:
    lib = build_library(2, 2)
    if sup_bound_constant(lib, 1) != 1:
        return False, "level-1 bound is not 1"
    if sup_bound_constant(lib, 2) != 4:
        return False, "level-2 bound for weight 2 is not 4"
    for bound in (2, 3):
        lib = build_library(bound, bound)
        values = [sup_bound_constant(lib, v) for v in range(1, lib.max_level + 1)]
        if values != sorted(values):
            return False, "library bounds are not monotone in the level"
    return True, "library bound constants match expectations and grow monotonically"


def check_hopf() -> tuple[bool, str]:
    for radius in (Fraction(1), Fraction(2), Fraction(3), Fraction(7, 2)):
        bundle = SphereLineBundle(radius)
        norm = hopf_curvature_norm(bundle)
        witness = acw_lower_bound(bundle, Fraction(2))
        if norm * witness.bound != 1:
            return False, f"bound is not the reciprocal witness at R = {radius}"
        if witness.product_pairing == 0:
            return False, "product pairing vanished"
    return True, "curvature norm and witness bound are exact reciprocals"


def check_kron(trials: int = 1000) -> tuple[bool, str]:
    rng = random.Random(20252)
    worst = 0.0
    per_pair = max(1, trials // 16)
    total = 0
    for d1 in (1, 2, 3, 5, 8):
        for d2 in (1, 4, 8):
            sample = kron_norm_check(d1, d2, per_pair, seed=7000 + 10 * d1 + d2)
            worst = max(worst, sample.max_ratio)
            total += sample.trials
            if sample.max_ratio > 1 + 1e-9:
                return False, f"norm ratio {sample.max_ratio} exceeded 1 at dims {d1}x{d2}"
    return True, f"{total} trials across dims <= 8: max ratio {worst:.12f} <= 1 + 1e-9"


ALL_CHECKS = [
    ("ring-laws", check_ring_laws),
    ("truncation-coherence", check_truncation_coherence),
    ("component-completeness", check_component_completeness),
    ("rational-reduction", check_rational_reduction),
    ("ch-additive-multiplicative", check_ch_additive_multiplicative),
    ("chern-class-total-product", check_chern_class_vs_total),
    ("newton-round-trip", check_newton_round_trip),
    ("ch-duality", check_duality),
    ("adams-character", check_adams_character),
    ("functor-json-round-trip", check_functor_round_trip),
    ("bound-monotonicity", check_bound_monotonicity),
    ("vandermonde-exactness", check_vandermonde),
    ("vandermonde-injectivity", check_vandermonde_injectivity),
    ("certificate-universality", check_certificates),
    ("library-bounds", check_library_bounds),
    ("pipeline-soundness", check_pipeline_soundness),
    ("hopf-witness", check_hopf),
    ("kron-norm", check_kron),
]


def run_all():
    """Run every named check; returns a list of (name, ok, detail)."""
    results = []
    for name, check in ALL_CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing invariant is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
