from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2lyap.exact_linalg import (
    AlternatingTrilinearForm,
    ExactMatrix,
    SymmetricBilinearForm,
    congruence_diagonal,
    invariant_alternating_bilinear_space,
    invariant_bilinear_space,
    invariant_trilinear_space,
    rank_and_nullspace,
    signature,
)
from g2lyap.monodromy import load_builtin

G2 = load_builtin("g2-elliptic-surface")

small = st.integers(min_value=-3, max_value=3)


def square(n):
    return st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n).map(ExactMatrix.from_rows)


def unimodular_upper(n):
    """Random integer matrices with unit diagonal, hence invertible."""

    def build(vals):
        it = iter(vals)
        rows = [[1 if i == j else (next(it) if j > i else 0) for j in range(n)] for i in range(n)]
        return ExactMatrix.from_rows(rows)

    return st.lists(small, min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2).map(build)


def invertible(n):
    return st.tuples(unimodular_upper(n), unimodular_upper(n)).map(lambda ab: ab[0].T @ ab[1])


def symmetric(n):
    return square(n).map(lambda m: m + m.T)


# -- ExactMatrix ---------------------------------------------------------------


def test_entries_in_lowest_terms():
    m = ExactMatrix.from_rows([[Fraction(2, 4), Fraction(3, -6)], [4, "10/5"]])
    assert m[0, 0] == Fraction(1, 2) and m[0, 0].denominator == 2
    assert m[0, 1] == Fraction(-1, 2) and m[0, 1].denominator > 0
    assert m[1, 1].denominator == 1


def test_floats_are_refused():
    with pytest.raises(TypeError):
        ExactMatrix.from_rows([[0.5]])


def test_inverse_is_exact():
    m = ExactMatrix.from_rows([[2, 1], [7, 4]])
    assert m @ m.inverse() == ExactMatrix.identity(2)
    h = ExactMatrix.from_rows([[Fraction(1, i + j + 1) for j in range(4)] for i in range(4)])
    assert h @ h.inverse() == ExactMatrix.identity(4)
    assert h.inverse()[0, 0] == 16


def test_singular_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        ExactMatrix.from_rows([[1, 2], [2, 4]]).inverse()


@given(square(4))
def test_det_matches_leibniz(m):
    def leibniz(a):
        n = a.dim
        total = Fraction(0)
        for p in permutations(range(n)):
            inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
            term = Fraction((-1) ** inv)
            for i in range(n):
                term *= a[i, p[i]]
            total += term
        return total

    assert m.det() == leibniz(m)


# -- rank and nullspace ----------------------------------------------------------


def test_rank_identity():
    assert rank_and_nullspace(ExactMatrix.identity(7)) == (7, [])


def test_rank_zero_matrix():
    rank, basis = rank_and_nullspace(ExactMatrix.zeros(3))
    assert rank == 0
    assert basis == [tuple(Fraction(int(i == j)) for j in range(3)) for i in range(3)]


def test_rank_empty_matrix():
    assert rank_and_nullspace(ExactMatrix(())) == (0, [])


def test_nullspace_is_echelon_normalized():
    m = ExactMatrix.from_rows([[1, 2, 3, 4], [2, 4, 7, 9]])
    rank, basis = rank_and_nullspace(m)
    assert rank == 2
    # free columns are 1 and 3
    assert [tuple(v[i] for i in (1, 3)) for v in basis] == [(1, 0), (0, 1)]
    for v in basis:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in m.rows)


@given(st.integers(1, 5), st.integers(1, 6), st.data())
def test_rank_plus_nullity(nrows, ncols, data):
    rows = data.draw(st.lists(st.lists(small, min_size=ncols, max_size=ncols), min_size=nrows, max_size=nrows))
    m = ExactMatrix.from_rows(rows)
    rank, basis = rank_and_nullspace(m)
    assert rank + len(basis) == ncols
    assert rank == np.linalg.matrix_rank(np.array(rows, dtype=float))
    for v in basis:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in m.rows)


# -- signature -------------------------------------------------------------------


def test_signature_identity():
    assert signature(ExactMatrix.identity(7)).as_tuple() == (7, 0, 0)


def test_signature_diag():
    assert signature(ExactMatrix.diag([1, -1])).as_tuple() == (1, 0, 1)


def test_signature_needs_off_diagonal_pivot():
    hyperbolic = ExactMatrix.from_rows([[0, 1], [1, 0]])
    assert signature(hyperbolic).as_tuple() == (1, 0, 1)
    degenerate = ExactMatrix.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    assert signature(degenerate).as_tuple() == (1, 1, 1)


def test_signature_rejects_asymmetric():
    with pytest.raises(ValueError):
        signature(ExactMatrix.from_rows([[0, 1], [0, 0]]))


def _eig_signature(m: ExactMatrix):
    ev = np.linalg.eigvalsh(m.to_numpy())
    tol = 1e-9 * max(1.0, np.abs(ev).max())
    return (int((ev > tol).sum()), int((np.abs(ev) <= tol).sum()), int((ev < -tol).sum()))


@given(symmetric(5))
def test_signature_matches_eigenvalues(m):
    assert signature(m).as_tuple() == _eig_signature(m)


@settings(max_examples=50)
@given(symmetric(4), invertible(4))
def test_signature_congruence_invariant(q, a):
    assert signature(a.T @ q @ a) == signature(q)


def test_congruence_diagonal_preserves_determinant_sign():
    q = ExactMatrix.from_rows([[0, 2, 1], [2, 0, 3], [1, 3, 0]])
    d = congruence_diagonal(q)
    prod = Fraction(1)
    for x in d:
        prod *= x
    assert (prod > 0) == (q.det() > 0)


# -- invariant forms -------------------------------------------------------------


def test_bilinear_identity_constrains_nothing():
    assert len(invariant_bilinear_space([ExactMatrix.identity(2)])) == 3


def test_bilinear_diag_two_half():
    (q,) = invariant_bilinear_space([ExactMatrix.diag([2, Fraction(1, 2)])])
    assert q.matrix == ExactMatrix.from_rows([[0, 1], [1, 0]])


def test_bilinear_dimension_mismatch():
    with pytest.raises(ValueError):
        invariant_bilinear_space([ExactMatrix.identity(2), ExactMatrix.identity(3)])


def test_symmetric_form_checks_symmetry():
    with pytest.raises(ValueError):
        SymmetricBilinearForm(ExactMatrix.from_rows([[0, 1], [2, 0]]))


def test_g2_bilinear_space_is_a_line_with_signature_4_3():
    (q,) = invariant_bilinear_space(G2.matrices)
    sig = signature(q).as_tuple()
    assert sig in ((4, 0, 3), (3, 0, 4))
    if sig == (3, 0, 4):
        sig = signature(-q.matrix).as_tuple()
    assert sig == (4, 0, 3)
    for m in G2.matrices:
        assert (m.T @ q.matrix @ m - q.matrix).is_zero()


def test_g2_stacked_system_nullity_one():
    # the 28-unknown system assembled by hand from the congruence action on symmetric matrices
    n = 7
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    rows = []
    for m in G2.matrices:
        cols = []
        for i, j in pairs:
            e = [[Fraction(0)] * n for _ in range(n)]
            e[i][j] = e[j][i] = Fraction(1)
            e = ExactMatrix(tuple(tuple(r) for r in e))
            cols.append(m.T @ e @ m - e)
        for a, b in pairs:
            rows.append([c[a, b] for c in cols])
    rank, basis = rank_and_nullspace(rows)
    assert (rank, len(basis)) == (27, 1)


def test_alternating_bilinear_sl2():
    gens = [ExactMatrix.from_rows([[1, 2], [0, 1]]), ExactMatrix.from_rows([[1, 0], [2, 1]])]
    (w,) = invariant_alternating_bilinear_space(gens)
    assert w == ExactMatrix.from_rows([[0, 1], [-1, 0]])
    assert invariant_bilinear_space(gens) == []


def test_trilinear_identity():
    assert len(invariant_trilinear_space([ExactMatrix.identity(7)])) == 35


def test_trilinear_minus_identity():
    assert invariant_trilinear_space([-ExactMatrix.identity(7)]) == []


def test_g2_trilinear_space_is_a_line():
    (phi,) = invariant_trilinear_space(G2.matrices)
    assert all(phi.is_invariant_under(m) for m in G2.matrices)


def test_g2_three_form_invariance_by_direct_evaluation():
    # independent check: evaluate phi(Mx, My, Mz) on basis vectors straight from the full tensor
    (phi,) = invariant_trilinear_space(G2.matrices)
    m = G2["M_0"]
    cols = [[m[i, j] for i in range(7)] for j in range(7)]
    basis = [[Fraction(int(i == j)) for i in range(7)] for j in range(7)]
    for a, b, c in [(0, 2, 4), (1, 3, 6), (4, 5, 6), (0, 1, 2)]:
        assert phi(cols[a], cols[b], cols[c]) == phi(basis[a], basis[b], basis[c])


def test_trilinear_storage_and_antisymmetry():
    phi = AlternatingTrilinearForm.from_dict(4, {(2, 1, 0): 5, (0, 1, 3): 2})
    assert phi.coefficient(0, 1, 2) == -5
    assert phi.coefficient(1, 0, 3) == -2
    assert phi.coefficient(0, 0, 3) == 0
    assert len(phi.coefficients) == 4
    x, y, z = [1, 2, 0, 1], [0, 1, 1, 3], [2, 0, 1, 1]
    assert phi(x, y, z) == -phi(y, x, z) == phi(y, z, x)


@settings(max_examples=25, deadline=None)
@given(st.permutations(range(4)))
def test_invariant_spaces_independent_of_generator_order(order):
    gens = [G2.matrices[i] for i in order]
    assert [q.matrix for q in invariant_bilinear_space(gens)] == [q.matrix for q in invariant_bilinear_space(G2.matrices)]


@settings(max_examples=30)
@given(st.lists(invertible(3), min_size=1, max_size=3))
def test_returned_forms_are_exactly_invariant(gens):
    for q in invariant_bilinear_space(gens):
        for m in gens:
            assert (m.T @ q.matrix @ m - q.matrix).is_zero()
