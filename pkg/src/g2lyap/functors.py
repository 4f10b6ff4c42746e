"""Multilinear functors on matrices: dual, exterior/symmetric powers, tensor, direct sum.

Bases are fixed by lexicographic order: increasing k-tuples for exterior
powers, nondecreasing k-tuples (monomials) for symmetric powers, and
row-major Kronecker order for tensor products. Exact matrices stay exact;
numpy arrays are handled in float. Mixing the two is refused.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations

import numpy as np

from .exact_linalg import ExactMatrix

KINDS = ("identity", "dual", "exterior_power", "symmetric_power", "tensor", "direct_sum")


@dataclass(frozen=True)
class FunctorSpec:
    kind: str
    k: int | None = None
    parts: tuple[FunctorSpec, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown functor kind {self.kind!r}")
        if self.kind in ("exterior_power", "symmetric_power") and (self.k is None or self.k < 1):
            raise ValueError(f"{self.kind} needs k >= 1")
        if self.kind == "tensor" and len(self.parts) != 2:
            raise ValueError("tensor takes exactly two factors")
        if self.kind == "direct_sum" and not self.parts:
            raise ValueError("direct_sum needs at least one summand")

    def __str__(self) -> str:
        if self.kind in ("identity", "dual"):
            return self.kind
        if self.kind == "exterior_power":
            return f"ext:{self.k}"
        if self.kind == "symmetric_power":
            return f"sym:{self.k}"
        if self.kind == "tensor":
            return f"tensor({self.parts[0]},{self.parts[1]})"
        return "sum(" + ";".join(str(p) for p in self.parts) + ")"

    def dim(self, d: int) -> int:
        if self.kind in ("identity", "dual"):
            return d
        if self.kind == "exterior_power":
            return math.comb(d, self.k)
        if self.kind == "symmetric_power":
            return math.comb(d + self.k - 1, self.k)
        if self.kind == "tensor":
            return self.parts[0].dim(d) * self.parts[1].dim(d)
        return sum(p.dim(d) for p in self.parts)


IDENTITY = FunctorSpec("identity")
DUAL = FunctorSpec("dual")


def exterior_power(k: int) -> FunctorSpec:
    return FunctorSpec("exterior_power", k)


def symmetric_power(k: int) -> FunctorSpec:
    return FunctorSpec("symmetric_power", k)


def parse_functor(text: str) -> FunctorSpec:
    """Parse ``identity | dual | ext:k | sym:k | tensor(<spec>,<spec>) | sum(<spec>;...)``."""
    spec, rest = _parse(text.replace(" ", ""))
    if rest:
        raise ValueError(f"trailing characters in functor spec {text!r}: {rest!r}")
    return spec


def _parse(s: str) -> tuple[FunctorSpec, str]:
    for word, spec in (("identity", IDENTITY), ("dual", DUAL)):
        if s.startswith(word):
            return spec, s[len(word):]
    m = re.match(r"(ext|sym):(\d+)", s)
    if m:
        kind = "exterior_power" if m.group(1) == "ext" else "symmetric_power"
        return FunctorSpec(kind, int(m.group(2))), s[m.end():]
    for head, sep, kind in (("tensor(", ",", "tensor"), ("sum(", ";", "direct_sum")):
        if s.startswith(head):
            s = s[len(head):]
            parts = []
            while True:
                part, s = _parse(s)
                parts.append(part)
                if s.startswith(sep):
                    s = s[1:]
                elif s.startswith(")"):
                    return FunctorSpec(kind, parts=tuple(parts)), s[1:]
                else:
                    raise ValueError(f"expected {sep!r} or ')' in functor spec near {s!r}")
    raise ValueError(f"cannot parse functor spec near {s!r}")


def apply_functor(m, f: FunctorSpec):
    """Image of the matrix ``m`` under the functor ``f``.

    ``apply_functor(A @ B, f) == apply_functor(A, f) @ apply_functor(B, f)``.
    """
    exact = isinstance(m, ExactMatrix)
    d = m.dim if exact else _square_float(m)
    kind = f.kind
    if kind == "identity":
        return m
    if kind == "dual":
        if exact:
            return m.inverse().T
        return np.linalg.inv(m).T
    if kind == "exterior_power":
        if f.k > d:
            raise ValueError(f"exterior power {f.k} exceeds dimension {d}")
        return _exterior(m, f.k, exact)
    if kind == "symmetric_power":
        return _symmetric(m, f.k, exact)
    if kind == "tensor":
        a, b = (apply_functor(m, p) for p in f.parts)
        return _kron(a, b) if exact else np.kron(a, b)
    blocks = [apply_functor(m, p) for p in f.parts]
    return _block_diag(blocks) if exact else _block_diag_float(blocks)


def _square_float(m) -> int:
    if not isinstance(m, np.ndarray):
        raise TypeError("apply_functor takes an ExactMatrix or a float numpy array")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"need a square matrix, got shape {m.shape}")
    return m.shape[0]


def _exterior(m, k: int, exact: bool):
    d = m.dim if exact else m.shape[0]
    subsets = list(combinations(range(d), k))
    if exact:
        return ExactMatrix(tuple(tuple(m.submatrix(r, c).det() for c in subsets) for r in subsets))
    out = np.empty((len(subsets), len(subsets)))
    for i, r in enumerate(subsets):
        for j, c in enumerate(subsets):
            out[i, j] = np.linalg.det(m[np.ix_(r, c)]) if k > 1 else m[r[0], c[0]]
    return out


def _permanent(rows: list[list]):
    n = len(rows)
    total = 0
    for p in permutations(range(n)):
        term = 1
        for i in range(n):
            term = term * rows[i][p[i]]
        total = total + term
    return total


def _symmetric(m, k: int, exact: bool):
    """Action on monomials: entry (I, J) = per(M[I, J]) / prod(mult(I)!)."""
    d = m.dim if exact else m.shape[0]
    monos = list(combinations_with_replacement(range(d), k))
    norms = [math.prod(math.factorial(c) for c in Counter(mono).values()) for mono in monos]
    if exact:
        return ExactMatrix(
            tuple(
                tuple(_permanent([[m[i, j] for j in col] for i in row]) / Fraction(n) for col in monos)
                for row, n in zip(monos, norms)
            )
        )
    out = np.empty((len(monos), len(monos)))
    for a, (row, n) in enumerate(zip(monos, norms)):
        for b, col in enumerate(monos):
            out[a, b] = _permanent([[m[i, j] for j in col] for i in row]) / n
    return out


def _kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return ExactMatrix(
        tuple(
            tuple(a[i, j] * b[p, q] for j in range(a.ncols) for q in range(b.ncols))
            for i in range(a.nrows)
            for p in range(b.nrows)
        )
    )


def _block_diag(blocks: list[ExactMatrix]) -> ExactMatrix:
    n = sum(b.nrows for b in blocks)
    rows = []
    offset = 0
    for b in blocks:
        for r in b.rows:
            rows.append((Fraction(0),) * offset + tuple(r) + (Fraction(0),) * (n - offset - b.ncols))
        offset += b.ncols
    return ExactMatrix(tuple(rows))


def _block_diag_float(blocks: list[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    offset = 0
    for b in blocks:
        k = b.shape[0]
        out[offset:offset + k, offset:offset + k] = b
        offset += k
    return out
