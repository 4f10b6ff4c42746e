"""Exact rational linear algebra.

Everything here works over :class:`fractions.Fraction`, so results are exact and
reproducible bit for bit. The matrices involved are small (dimension 7, systems
with a few hundred rows), which keeps arbitrary-precision elimination cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Sequence

Rational = Fraction
Vector = tuple[Fraction, ...]


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to Fraction. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if hasattr(x, "__index__"):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} exactly to a rational")


@dataclass(frozen=True)
class ExactMatrix:
    """Immutable matrix of Fractions. Square in most uses, rectangular allowed."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.rows and len({len(r) for r in self.rows}) != 1:
            raise ValueError("ragged rows")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> ExactMatrix:
        return cls(tuple(tuple(to_fraction(x) for x in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> ExactMatrix:
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None) -> ExactMatrix:
        ncols = nrows if ncols is None else ncols
        return cls(tuple(tuple(Fraction(0) for _ in range(ncols)) for _ in range(nrows)))

    @classmethod
    def diag(cls, values: Sequence) -> ExactMatrix:
        vals = [to_fraction(v) for v in values]
        n = len(vals)
        return cls(tuple(tuple(vals[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def dim(self) -> int:
        if self.nrows != self.ncols:
            raise ValueError(f"matrix is {self.nrows}x{self.ncols}, not square")
        return self.nrows

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other: ExactMatrix) -> ExactMatrix:
        self._check_same_shape(other)
        return ExactMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: ExactMatrix) -> ExactMatrix:
        self._check_same_shape(other)
        return ExactMatrix(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> ExactMatrix:
        return ExactMatrix(tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, c) -> ExactMatrix:
        c = to_fraction(c)
        return ExactMatrix(tuple(tuple(c * a for a in r) for r in self.rows))

    def __matmul__(self, other: ExactMatrix) -> ExactMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        cols = list(zip(*other.rows))
        return ExactMatrix(
            tuple(tuple(sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols) for r in self.rows)
        )

    def __pow__(self, k: int) -> ExactMatrix:
        if k < 0:
            return self.inverse() ** (-k)
        out = ExactMatrix.identity(self.dim)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    @property
    def T(self) -> ExactMatrix:
        return ExactMatrix(tuple(zip(*self.rows))) if self.rows else self

    def transpose(self) -> ExactMatrix:
        return self.T

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def is_symmetric(self) -> bool:
        return self.nrows == self.ncols and self == self.T

    def is_antisymmetric(self) -> bool:
        return self.nrows == self.ncols and self == -self.T

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for r in self.rows for a in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> ExactMatrix:
        return ExactMatrix(tuple(tuple(self.rows[i][j] for j in cols) for i in rows))

    def det(self) -> Fraction:
        n = self.dim
        a = [list(r) for r in self.rows]
        sign = 1
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                a[c], a[p] = a[p], a[c]
                sign = -sign
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                if f:
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        out = Fraction(sign)
        for i in range(n):
            out *= a[i][i]
        return out

    def inverse(self) -> ExactMatrix:
        n = self.dim
        a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                raise ZeroDivisionError("matrix is singular")
            a[c], a[p] = a[p], a[c]
            piv = a[c][c]
            a[c] = [x / piv for x in a[c]]
            for r in range(n):
                if r != c and a[r][c] != 0:
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return ExactMatrix(tuple(tuple(r[n:]) for r in a))

    def to_numpy(self):
        import numpy as np

        return np.array([[float(x) for x in r] for r in self.rows], dtype=float)

    def to_lists(self) -> list[list[int | str]]:
        """JSON-friendly rows: ints where integral, ``"p/q"`` strings otherwise."""
        return [[int(x) if x.denominator == 1 else str(x) for x in r] for r in self.rows]

    def _check_same_shape(self, other: ExactMatrix) -> None:
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"ExactMatrix[{body}]"


def _as_exact(m) -> ExactMatrix:
    return m if isinstance(m, ExactMatrix) else ExactMatrix.from_rows(m)


@dataclass(frozen=True)
class Signature:
    positive: int
    zero: int
    negative: int

    @property
    def dim(self) -> int:
        return self.positive + self.zero + self.negative

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.positive, self.zero, self.negative)


@dataclass(frozen=True)
class SymmetricBilinearForm:
    matrix: ExactMatrix

    def __post_init__(self):
        if not self.matrix.is_symmetric():
            raise ValueError("bilinear form matrix is not symmetric")

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def __call__(self, x: Sequence, y: Sequence) -> Fraction:
        x = [to_fraction(v) for v in x]
        y = [to_fraction(v) for v in y]
        return sum((x[i] * self.matrix[i, j] * y[j] for i in range(self.dim) for j in range(self.dim)), Fraction(0))

    def pullback(self, m: ExactMatrix) -> SymmetricBilinearForm:
        return SymmetricBilinearForm(m.T @ self.matrix @ m)

    def is_invariant_under(self, m: ExactMatrix) -> bool:
        return (m.T @ self.matrix @ m - self.matrix).is_zero()


@dataclass(frozen=True)
class AlternatingTrilinearForm:
    """Alternating 3-form stored by its coefficients on strictly increasing triples."""

    dim: int
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        expected = len(triples(self.dim))
        if len(self.coefficients) != expected:
            raise ValueError(f"need {expected} coefficients for dim {self.dim}, got {len(self.coefficients)}")

    @classmethod
    def from_dict(cls, dim: int, coeffs: dict[tuple[int, int, int], object]) -> AlternatingTrilinearForm:
        index = {t: n for n, t in enumerate(triples(dim))}
        vals = [Fraction(0)] * len(index)
        for key, c in coeffs.items():
            ordered = tuple(sorted(key))
            if len(set(ordered)) < 3:
                continue
            vals[index[ordered]] += _perm_sign(key, ordered) * to_fraction(c)
        return cls(dim, tuple(vals))

    def coefficient(self, i: int, j: int, k: int) -> Fraction:
        key = (i, j, k)
        ordered = tuple(sorted(key))
        if len(set(ordered)) < 3:
            return Fraction(0)
        return _perm_sign(key, ordered) * self.coefficients[triples(self.dim).index(ordered)]

    def tensor(self) -> dict[tuple[int, int, int], Fraction]:
        """Full antisymmetrized tensor, nonzero entries only."""
        out = {}
        for (i, j, k), c in zip(triples(self.dim), self.coefficients):
            if c == 0:
                continue
            for p in ((i, j, k), (j, k, i), (k, i, j)):
                out[p] = c
            for p in ((j, i, k), (i, k, j), (k, j, i)):
                out[p] = -c
        return out

    def __call__(self, x: Sequence, y: Sequence, z: Sequence) -> Fraction:
        x, y, z = ([to_fraction(v) for v in w] for w in (x, y, z))
        return sum((c * x[i] * y[j] * z[k] for (i, j, k), c in self.tensor().items()), Fraction(0))

    def pullback(self, m: ExactMatrix) -> AlternatingTrilinearForm:
        """The form (x, y, z) -> phi(Mx, My, Mz)."""
        action = _trilinear_action(m)
        return AlternatingTrilinearForm(
            self.dim, tuple(sum((a * c for a, c in zip(row, self.coefficients)), Fraction(0)) for row in action.rows)
        )

    def is_invariant_under(self, m: ExactMatrix) -> bool:
        return self.pullback(m).coefficients == self.coefficients

    def to_dict(self) -> dict[str, str]:
        return {"".join(str(i + 1) for i in t): str(c) for t, c in zip(triples(self.dim), self.coefficients) if c}


def triples(dim: int) -> list[tuple[int, int, int]]:
    return list(combinations(range(dim), 3))


def _perm_sign(seq: Sequence[int], ordered: Sequence[int]) -> int:
    pos = [ordered.index(s) for s in seq]
    sign = 1
    for a in range(len(pos)):
        for b in range(a + 1, len(pos)):
            if pos[a] > pos[b]:
                sign = -sign
    return sign


def rank_and_nullspace(m) -> tuple[int, list[Vector]]:
    """Rank and a reduced-echelon-normalized nullspace basis.

    Each basis vector has a 1 in one free column, zeros in the other free
    columns, and is read off the reduced row echelon form.
    """
    m = _as_exact(m)
    rref, pivots = _rref(m)
    ncols = m.ncols
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in enumerate(pivots):
            v[p] = -rref[row][f]
        basis.append(tuple(v))
    return len(pivots), basis


def _rref(m: ExactMatrix) -> tuple[list[list[Fraction]], list[int]]:
    a = [list(r) for r in m.rows]
    nrows, ncols = m.nrows, m.ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        if piv != 1:
            a[r] = [x / piv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def congruence_diagonal(q: SymmetricBilinearForm | ExactMatrix) -> list[Fraction]:
    """Diagonal entries D of some invertible P with P^T Q P = D.

    Pivot rule: the first nonzero diagonal entry at or after the current
    position; failing that, a nonzero off-diagonal entry a_kj is folded into
    the diagonal by adding row/column j to row/column k.
    """
    mat = q.matrix if isinstance(q, SymmetricBilinearForm) else q
    if not mat.is_symmetric():
        raise ValueError("congruence diagonalization needs a symmetric matrix")
    n = mat.dim
    a = [list(r) for r in mat.rows]
    diag = []
    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for row in a:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is not None:
                    # a_kk becomes 2 a_kj since a_jj = 0
                    a[k] = [x + y for x, y in zip(a[k], a[j])]
                    for row in a:
                        row[k] += row[j]
        piv = a[k][k]
        diag.append(piv)
        if piv == 0:
            continue
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
        for i in range(k + 1, n):
            a[k][i] = Fraction(0)
            a[i][k] = Fraction(0)
    return diag


def signature(q: SymmetricBilinearForm | ExactMatrix) -> Signature:
    d = congruence_diagonal(q)
    return Signature(sum(1 for x in d if x > 0), sum(1 for x in d if x == 0), sum(1 for x in d if x < 0))


def _check_generators(gens: Sequence[ExactMatrix]) -> int:
    if not gens:
        raise ValueError("need at least one generator")
    dims = {g.dim for g in gens}
    if len(dims) != 1:
        raise ValueError(f"generators have mismatched dimensions {sorted(dims)}")
    return dims.pop()


def _stacked_solve(blocks: Iterable[list[list[Fraction]]], nunknowns: int) -> list[Vector]:
    rows = [row for block in blocks for row in block]
    if not rows:
        rows = [[Fraction(0)] * nunknowns]
    _, basis = rank_and_nullspace(ExactMatrix(tuple(tuple(r) for r in rows)))
    return basis


def _bilinear_system(m: ExactMatrix, alternating: bool) -> list[list[Fraction]]:
    """Rows of the linear map Q -> M^T Q M - Q on the independent entries of Q."""
    n = m.dim
    if alternating:
        pairs = list(combinations(range(n), 2))
    else:
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
    rows = []
    for a, b in pairs:
        row = []
        for i, j in pairs:
            if alternating:
                c = m[i, a] * m[j, b] - m[j, a] * m[i, b]
            elif i == j:
                c = m[i, a] * m[i, b]
            else:
                c = m[i, a] * m[j, b] + m[j, a] * m[i, b]
            if (i, j) == (a, b):
                c -= 1
            row.append(c)
        rows.append(row)
    return rows


def _bilinear_from_vector(v: Vector, n: int, alternating: bool) -> ExactMatrix:
    a = [[Fraction(0)] * n for _ in range(n)]
    if alternating:
        pairs = list(combinations(range(n), 2))
    else:
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
    for (i, j), x in zip(pairs, v):
        a[i][j] = x
        a[j][i] = -x if alternating else x
    return ExactMatrix(tuple(tuple(r) for r in a))


def invariant_bilinear_space(gens: Sequence[ExactMatrix]) -> list[SymmetricBilinearForm]:
    """Basis of symmetric Q with M^T Q M = Q for every generator M."""
    n = _check_generators(gens)
    basis = _stacked_solve((_bilinear_system(g, False) for g in gens), n * (n + 1) // 2)
    return [SymmetricBilinearForm(_bilinear_from_vector(v, n, False)) for v in basis]


def invariant_alternating_bilinear_space(gens: Sequence[ExactMatrix]) -> list[ExactMatrix]:
    """Basis of antisymmetric Q with M^T Q M = Q for every generator M."""
    n = _check_generators(gens)
    basis = _stacked_solve((_bilinear_system(g, True) for g in gens), n * (n - 1) // 2)
    return [_bilinear_from_vector(v, n, True) for v in basis]


def _trilinear_action(m: ExactMatrix) -> ExactMatrix:
    """Matrix of phi -> phi(M., M., M.) on the increasing-triple coordinates.

    New coefficient at (a, b, c) is sum over (i, j, k) of phi_ijk times the
    3x3 minor of M on rows (i, j, k) and columns (a, b, c).
    """
    ts = triples(m.dim)
    return ExactMatrix(tuple(tuple(m.submatrix(t, s).det() for t in ts) for s in ts))


def invariant_trilinear_space(gens: Sequence[ExactMatrix]) -> list[AlternatingTrilinearForm]:
    n = _check_generators(gens)
    nt = len(triples(n))
    if nt == 0:
        return []
    eye = ExactMatrix.identity(nt)
    blocks = ([list(r) for r in (_trilinear_action(g) - eye).rows] for g in gens)
    return [AlternatingTrilinearForm(n, v) for v in _stacked_solve(blocks, nt)]


def primitive_integer_vector(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale a rational vector to coprime integers, first nonzero entry positive."""
    v = [to_fraction(x) for x in v]
    nz = [x for x in v if x != 0]
    if not nz:
        return tuple(v)
    den = lcm(*(x.denominator for x in nz))
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    sign = 1 if next(x for x in ints if x != 0) > 0 else -1
    return tuple(Fraction(sign * x // g) for x in ints)


def primitive_integer_matrix(m: ExactMatrix) -> ExactMatrix:
    flat = primitive_integer_vector([x for r in m.rows for x in r])
    n = m.ncols
    return ExactMatrix(tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(m.nrows)))
