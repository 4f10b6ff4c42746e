"""G2 roots and weights in the sum-zero coordinates of R^3.

Roots and weights are integer triples (a1, a2, a3) with a1 + a2 + a3 = 0,
written in the basis e1, e2, e3. The split real form has restricted roots of
the same type, and restriction simply relabels e_i as f_i, so weights keep
their coordinates after restriction.

Lyapunov vectors live in the closed positive chamber: g1 - g2 >= 0 and g2 >= 0
(the pairings with the simple roots e1 - e2 and -e1 + 2e2 - e3, using the
sum-zero constraint).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from numbers import Real
from typing import Iterable, Sequence

FLOAT_CHAMBER_TOL = 1e-12


@dataclass(frozen=True, order=True)
class WeightVector:
    coords: tuple[int, int, int]
    basis: str = field(default="e", compare=False)

    def __post_init__(self):
        if len(self.coords) != 3:
            raise ValueError("weights are triples")
        if sum(self.coords) != 0:
            raise ValueError(f"weight {self.coords} does not have coordinate sum zero")

    def __add__(self, other: WeightVector) -> WeightVector:
        return WeightVector(tuple(a + b for a, b in zip(self.coords, other.coords)), self.basis)

    def __neg__(self) -> WeightVector:
        return WeightVector(tuple(-a for a in self.coords), self.basis)

    def pair(self, v: Sequence) -> Real:
        """Standard inner product with a real or rational triple."""
        return sum(a * g for a, g in zip(self.coords, v))

    def norm2(self) -> int:
        return sum(a * a for a in self.coords)

    def __str__(self) -> str:
        terms = []
        for i, a in enumerate(self.coords, start=1):
            if a == 0:
                continue
            coef = "" if abs(a) == 1 else str(abs(a))
            sign = "-" if a < 0 else "+"
            terms.append(f"{sign}{coef}{self.basis}{i}")
        if not terms:
            return "0"
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s


def W(a1: int, a2: int, a3: int) -> WeightVector:
    return WeightVector((a1, a2, a3))


ZERO = W(0, 0, 0)

# positive roots; negatives complete the system
_SHORT_POSITIVE = (W(1, -1, 0), W(1, 0, -1), W(0, 1, -1))
_LONG_POSITIVE = (W(-1, 2, -1), W(2, -1, -1), W(1, 1, -2))


@dataclass(frozen=True)
class RootSystemG2:
    roots: frozenset[WeightVector]
    simple: tuple[WeightVector, WeightVector]
    short: frozenset[WeightVector]
    long: frozenset[WeightVector]

    def positive_roots(self) -> list[WeightVector]:
        a1, a2 = self.simple
        out = []
        for r in self.roots:
            # r = m*a1 + n*a2, solved from coords 1 and 3
            n = -r.coords[2]
            m = r.coords[0] + n
            if m >= 0 and n >= 0:
                out.append(r)
        return sorted(out, reverse=True)

    def angle(self, a: WeightVector, b: WeightVector) -> float:
        return math.acos(a.pair(b.coords) / math.sqrt(a.norm2() * b.norm2()))


def build_root_system() -> RootSystemG2:
    short = frozenset(_SHORT_POSITIVE) | frozenset(-r for r in _SHORT_POSITIVE)
    long = frozenset(_LONG_POSITIVE) | frozenset(-r for r in _LONG_POSITIVE)
    return RootSystemG2(
        roots=short | long,
        simple=(W(1, -1, 0), W(-1, 2, -1)),
        short=short,
        long=long,
    )


def restrict(w: WeightVector) -> WeightVector:
    """Restriction to the split torus; e_i -> f_i with coordinates unchanged."""
    return WeightVector(w.coords, basis="f")


@dataclass(frozen=True)
class Representation:
    name: str
    weights: tuple[WeightVector, ...]

    @property
    def dim(self) -> int:
        return len(self.weights)

    def multiset(self) -> Counter:
        return Counter(w.coords for w in self.weights)


def representation_weights(name: str) -> Representation:
    if name in ("standard", "std"):
        ws = [ZERO]
        for r in _SHORT_POSITIVE:
            ws += [r, -r]
        return Representation("standard", tuple(ws))
    if name in ("adjoint", "adj"):
        roots = sorted(build_root_system().roots, reverse=True)
        return Representation("adjoint", tuple(roots) + (ZERO, ZERO))
    if name in ("trivial",):
        return Representation("trivial", (ZERO,))
    raise ValueError(f"unknown representation {name!r}; expected 'standard' or 'adjoint'")


@dataclass(frozen=True)
class LyapunovVector:
    coords: tuple

    def __post_init__(self):
        g1, g2, g3 = self.coords
        s = g1 + g2 + g3
        exact = all(isinstance(g, (int, Fraction)) for g in self.coords)
        if (s != 0) if exact else abs(s) > FLOAT_CHAMBER_TOL:
            raise ValueError(f"Lyapunov vector {self.coords} does not have coordinate sum zero")

    def in_chamber(self, tol: float | None = None) -> bool:
        g1, g2, _ = self.coords
        if tol is None:
            exact = all(isinstance(g, (int, Fraction)) for g in self.coords)
            tol = 0 if exact else FLOAT_CHAMBER_TOL
        return g1 - g2 >= -tol and g2 >= -tol


def predict_spectrum(rep: Representation, gamma: LyapunovVector | Sequence, tol: float | None = None) -> list:
    """Exponents <r(w), gamma> for every weight, with multiplicity, sorted descending.

    Exact inputs (ints/Fractions) are checked against the chamber with zero
    tolerance; float inputs with ``FLOAT_CHAMBER_TOL`` unless ``tol`` is given.
    """
    if not isinstance(gamma, LyapunovVector):
        gamma = LyapunovVector(tuple(gamma))
    if not gamma.in_chamber(tol):
        raise ValueError(f"Lyapunov vector {gamma.coords} lies outside the positive Weyl chamber")
    return sorted((restrict(w).pair(gamma.coords) for w in rep.weights), reverse=True)


def recover_lyapunov_vector(a, b, c, tol: float = 0.0) -> LyapunovVector:
    """Invert the standard-representation prediction.

    ``a >= b >= c >= 0`` are the positive-half exponents; the top one must
    equal the sum of the other two up to ``tol``. Returns the unique chamber
    vector with <e1-e3, G> = b + c, <e2-e3, G> = b, <e1-e2, G> = c.
    """
    if not (a >= b >= c >= 0):
        raise ValueError(f"exponents must satisfy a >= b >= c >= 0, got {(a, b, c)}")
    if abs(a - (b + c)) > tol:
        raise ValueError(f"additivity violated: |a - (b + c)| = {abs(a - (b + c))} > tol = {tol}")
    exact = all(isinstance(x, (int, Fraction)) for x in (a, b, c))
    three = Fraction(3) if exact else 3.0
    g = ((b + 2 * c) / three, (b - c) / three, -(2 * b + c) / three)
    if exact:
        g = tuple(Fraction(x) for x in g)
        g = tuple(int(x) if x.denominator == 1 else x for x in g)
    return LyapunovVector(g)


def exterior_square_weight_multiset(rep: Representation) -> Counter:
    """Multiset of w_i + w_j over unordered index pairs i < j."""
    return Counter((a + b).coords for a, b in combinations(rep.weights, 2))


def multiset_union(*reps: Representation | Iterable[WeightVector]) -> Counter:
    out: Counter = Counter()
    for r in reps:
        ws = r.weights if isinstance(r, Representation) else r
        out.update(w.coords for w in ws)
    return out
