"""Sum formulas for positive Lyapunov exponents of variations of Hodge structure.

All arithmetic is over Fractions. Bundle degrees are inputs; when a needed
degree is missing the prediction stays symbolic in that degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .exact_linalg import to_fraction


class NonHyperbolicBaseError(ValueError):
    pass


BRANCH_FULL = "full-F"
BRANCH_TRUNCATED = "truncated-H^{n,0}"
BRANCH_NONE = "not-applicable"


def kontsevich_sum(genus: int, punctures: int, degree) -> Fraction:
    """2 * degree / (2g - 2 + #S)."""
    denom = 2 * genus - 2 + punctures
    if denom <= 0:
        raise NonHyperbolicBaseError(f"2g - 2 + #S = {denom} <= 0: base curve is not hyperbolic")
    return 2 * to_fraction(degree) / denom


@dataclass(frozen=True)
class VHSProfile:
    """Hodge data of a weight-n variation over a punctured curve.

    ``hodge_numbers[i]`` is h^{n-i, i}, so the list starts with h^{n,0}.
    ``degrees`` maps bundle labels such as ``"F^1"`` or ``"H^{2,0}"`` to the
    degree of that bundle.
    """

    weight: int
    hodge_numbers: tuple[int, ...]
    genus: int
    punctures: int
    degrees: dict[str, Fraction] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.weight < 1:
            raise ValueError("weight must be >= 1")
        if len(self.hodge_numbers) != self.weight + 1:
            raise ValueError(f"weight {self.weight} needs {self.weight + 1} Hodge numbers, got {len(self.hodge_numbers)}")
        if any(h < 0 for h in self.hodge_numbers):
            raise ValueError("Hodge numbers must be nonnegative")
        if tuple(self.hodge_numbers) != tuple(reversed(self.hodge_numbers)):
            raise ValueError(f"Hodge numbers {self.hodge_numbers} violate h^(p,q) = h^(q,p)")
        if self.genus < 0 or self.punctures < 0:
            raise ValueError("genus and puncture count must be nonnegative")

    @property
    def rank(self) -> int:
        return sum(self.hodge_numbers)

    def dim_F(self, p: int) -> int:
        """dim F^p = sum of h^{k, n-k} over k >= p."""
        return sum(self.hodge_numbers[: max(self.weight - p + 1, 0)])

    @property
    def middle_index(self) -> int:
        return math.ceil(self.weight / 2)

    @property
    def top_label(self) -> str:
        return f"H^{{{self.weight},0}}"

    @property
    def middle_label(self) -> str:
        return f"F^{self.middle_index}"

    def degree(self, label: str) -> Fraction | None:
        return self.degrees.get(label)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> VHSProfile:
        unknown = set(data) - {"weight", "hodge_numbers", "genus", "punctures", "degrees"}
        if unknown:
            raise ValueError(f"unknown profile keys: {sorted(unknown)}")
        return cls(
            weight=int(data["weight"]),
            hodge_numbers=tuple(int(h) for h in data["hodge_numbers"]),
            genus=int(data["genus"]),
            punctures=int(data["punctures"]),
            degrees={k: to_fraction(str(v)) for k, v in data.get("degrees", {}).items()},
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "weight": self.weight,
            "hodge_numbers": list(self.hodge_numbers),
            "genus": self.genus,
            "punctures": self.punctures,
            "degrees": {k: str(v) for k, v in self.degrees.items()},
        }


@dataclass(frozen=True)
class FormulaPrediction:
    branch: str
    k_used: int
    coefficient: Fraction | None = None
    degree_label: str | None = None
    predicted_sum: Fraction | None = None
    denominator: int | None = None

    @property
    def symbolic(self) -> bool:
        return self.branch != BRANCH_NONE and self.predicted_sum is None

    @property
    def expression(self) -> str | None:
        """The unsimplified formula, e.g. ``2*deg(H^{2,0})/2``."""
        if self.branch == BRANCH_NONE:
            return None
        return f"2*deg({self.degree_label})/{self.denominator}"

    @property
    def simplified(self) -> str | None:
        if self.branch == BRANCH_NONE:
            return None
        if self.predicted_sum is not None:
            return str(self.predicted_sum)
        c = self.coefficient
        head = "" if c == 1 else f"{c}*"
        return f"{head}deg({self.degree_label})"

    def to_dict(self) -> dict[str, Any]:
        return {
            "branch": self.branch,
            "k_used": self.k_used,
            "coefficient": None if self.coefficient is None else str(self.coefficient),
            "degree_label": self.degree_label,
            "expression": self.expression,
            "simplified": self.simplified,
            "predicted_sum": None if self.predicted_sum is None else str(self.predicted_sum),
        }


def conjecture_prediction(profile: VHSProfile, k: int) -> FormulaPrediction:
    """Select the branch of the thin-monodromy sum formula for k positive exponents.

    * k = dim F^{ceil(n/2)}: the top k exponents sum to 2 deg F^{ceil(n/2)} / (2g-2+#S).
    * d < k < dim F^{ceil(n/2)}, d = dim H^{n,0}: the top d exponents sum to
      2 deg H^{n,0} / (2g-2+#S). The case k = d = 1 is included: it is the
      rational top exponent.
    * anything else: no formula is claimed.
    """
    if k < 1 or k > profile.rank // 2:
        raise ValueError(f"k = {k} outside 1..{profile.rank // 2} (at most half the rank can be positive)")
    f_dim = profile.dim_F(profile.middle_index)
    d = profile.hodge_numbers[0]
    if k == f_dim:
        label, k_used, branch = profile.middle_label, k, BRANCH_FULL
    elif d < k < f_dim or (k == d == 1 and k < f_dim):
        label, k_used, branch = profile.top_label, d, BRANCH_TRUNCATED
    else:
        return FormulaPrediction(BRANCH_NONE, 0)
    coeff = kontsevich_sum(profile.genus, profile.punctures, 1)
    denom = 2 * profile.genus - 2 + profile.punctures
    deg = profile.degree(label)
    total = coeff * deg if deg is not None else None
    return FormulaPrediction(branch, k_used, coeff, label, total, denom)


@dataclass(frozen=True)
class SpectrumShape:
    positive: int
    zero: int
    negative: int

    @property
    def rank(self) -> int:
        return self.positive + self.zero + self.negative

    def pattern(self) -> list[int]:
        """Signs of the spectrum slots, top to bottom."""
        return [1] * self.positive + [0] * self.zero + [-1] * self.negative

    def __str__(self) -> str:
        return f"{self.positive}/{self.zero}/{self.negative}"


def spectrum_shape(rank: int, signature: tuple[int, int] | None = None, weight_one: bool = False) -> SpectrumShape:
    """Slots forced by the polarization: min(p, q) symmetric pairs, |p - q| zeros.

    ``weight_one`` marks a symplectic local system of even rank. With neither
    a signature nor the flag, the split case (rank // 2 pairs) is assumed.
    """
    if rank < 0:
        raise ValueError("rank must be nonnegative")
    if weight_one:
        if rank % 2:
            raise ValueError("a symplectic local system has even rank")
        return SpectrumShape(rank // 2, 0, rank // 2)
    if signature is None:
        return SpectrumShape(rank // 2, rank % 2, rank // 2)
    p, q = signature
    if p < 0 or q < 0 or p + q != rank:
        raise ValueError(f"signature {signature} inconsistent with rank {rank}")
    m = min(p, q)
    return SpectrumShape(m, abs(p - q), m)


@dataclass
class ComparisonReport:
    predicted: Fraction
    k: int
    estimated_sum: float
    std_error: float
    scale: float
    defect: float
    z: float
    tol_sigma: float

    @property
    def consistent(self) -> bool:
        return self.z <= self.tol_sigma

    def to_dict(self) -> dict[str, Any]:
        return {
            "predicted": str(self.predicted),
            "k": self.k,
            "estimated_sum": self.estimated_sum,
            "std_error": self.std_error,
            "scale": self.scale,
            "defect": self.defect,
            "z": self.z,
            "tol_sigma": self.tol_sigma,
            "consistent": self.consistent,
        }


def compare_prediction(prediction: FormulaPrediction, estimate, scale: float, tol_sigma: float = 3.0) -> ComparisonReport:
    """Check scale * (sum of the top k_used estimated exponents) against the prediction.

    Walk time and flow time differ, hence the explicit ``scale``. The result
    only says whether the numbers are consistent.
    """
    if prediction.branch == BRANCH_NONE:
        raise ValueError("no formula applies to this prediction")
    if prediction.predicted_sum is None:
        raise ValueError(f"prediction is symbolic in deg({prediction.degree_label}); supply that degree")
    if not scale > 0:
        raise ValueError("scale must be positive")
    k = prediction.k_used
    block_sums = np.asarray(estimate.block_estimates)[:, :k].sum(axis=1)
    est = float(np.sum(estimate.exponents[:k]))
    nb = len(block_sums)
    se = float(block_sums.std(ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    defect = abs(scale * est - float(prediction.predicted_sum))
    if se > 0:
        z = defect / (scale * se)
    else:
        z = 0.0 if defect == 0 else math.inf
    return ComparisonReport(prediction.predicted_sum, k, est, se, scale, defect, z, tol_sigma)
