"""Closed-form round-sphere line bundle data and the Kronecker norm validator.

The line-bundle numbers are exact; the matrix checks back the tensor rule
of the curvature bound constants with seeded numerics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import HypothesisError, UsageError

EMBED_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SphereLineBundle:
    """Tautological line bundle over the radius-R round 2-sphere."""

    radius: Fraction
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius <= 0:
            raise UsageError("sphere radius must be positive")
        if self.orientation not in (1, -1):
            raise UsageError("orientation must be +1 or -1")


def hopf_curvature_norm(bundle: SphereLineBundle) -> Fraction:
    """Curvature operator norm of the bundle: exactly 1/(2 R^2)."""
    return Fraction(1, 2) / (bundle.radius**2)


def hopf_chern_number(bundle: SphereLineBundle) -> int:
    """Integral of c1 over the sphere: -1 for the tautological orientation,
    flipped with the orientation sign; never zero, independent of the radius."""
    return -bundle.orientation


@dataclass(frozen=True)
class AcwWitness:
    bound: Fraction
    product_pairing: Fraction


def acw_lower_bound(bundle: SphereLineBundle, ahat_number: Fraction) -> AcwWitness:
    """Witness lower bound 2 R^2 for the A-hat cowaist of a product with a
    4-manifold whose A-hat number is ``ahat_number``.

    The pullback line bundle pairs to ahat_number * (chern number), nonzero
    whenever the A-hat number is, and its curvature norm is 1/(2 R^2); the
    bound is the reciprocal."""
    ahat_number = Fraction(ahat_number)
    if ahat_number == 0:
        raise HypothesisError("hypothesis fails: the A-hat number must be nonzero")
    return AcwWitness(
        bound=2 * bundle.radius**2,
        product_pairing=ahat_number * hopf_chern_number(bundle),
    )


@dataclass(frozen=True)
class NormSample:
    dims: tuple[int, int]
    trials: int
    max_ratio: float
    max_embed_defect: float


def random_skew_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Curvature-shaped random matrix: anti-self-adjoint, entries from a box."""
    real = rng.uniform(-1.0, 1.0, size=(dim, dim))
    imag = rng.uniform(-1.0, 1.0, size=(dim, dim))
    m = real + 1j * imag
    return (m - m.conj().T) / 2


def kron_norm_ratio(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Ratio ||A (x) I + I (x) B|| / (||A|| + ||B||) and the defect
    | ||A (x) I|| - ||A|| |.  The ratio is reported as 1.0 when both inputs
    vanish."""
    d1 = a.shape[0]
    d2 = b.shape[0]
    norm_a = np.linalg.norm(a, 2)
    norm_b = np.linalg.norm(b, 2)
    embed = np.linalg.norm(np.kron(a, np.eye(d2)), 2)
    defect = abs(embed - norm_a)
    combined = np.kron(a, np.eye(d2)) + np.kron(np.eye(d1), b)
    denom = norm_a + norm_b
    if denom == 0:
        return 1.0, defect
    return float(np.linalg.norm(combined, 2) / denom), float(defect)


def kron_norm_check(d1: int, d2: int, trials: int, seed: int) -> NormSample:
    """Seeded random validation of the tensor-rule engine: the combined norm
    never exceeds the sum of the factor norms, and tensoring with the identity
    preserves the operator norm to 1e-9.

    Per-trial generators are derived deterministically from the master seed,
    so trials could run in any order or in parallel with identical results."""
    if not (1 <= d1 <= 16 and 1 <= d2 <= 16):
        raise UsageError("dimensions must lie in 1..16")
    if trials < 1:
        raise UsageError("need at least one trial")
    max_ratio = 0.0
    max_defect = 0.0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        a = random_skew_hermitian(d1, rng)
        b = random_skew_hermitian(d2, rng)
        ratio, defect = kron_norm_ratio(a, b)
        max_ratio = max(max_ratio, ratio)
        max_defect = max(max_defect, defect)
    if max_defect > EMBED_TOLERANCE:
        raise RuntimeError(
            f"operator-norm embedding defect {max_defect} exceeds {EMBED_TOLERANCE}"
        )
    return NormSample((d1, d2), trials, max_ratio, max_defect)
