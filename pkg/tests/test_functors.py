from fractions import Fraction
from itertools import combinations, combinations_with_replacement

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2lyap.exact_linalg import ExactMatrix
from g2lyap.functors import (
    DUAL,
    IDENTITY,
    FunctorSpec,
    apply_functor,
    exterior_power,
    parse_functor,
    symmetric_power,
)

small = st.integers(min_value=-3, max_value=3)


def square(n):
    return st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n).map(ExactMatrix.from_rows)


SPECS = [
    IDENTITY,
    exterior_power(2),
    exterior_power(3),
    symmetric_power(2),
    symmetric_power(3),
    FunctorSpec("tensor", parts=(IDENTITY, exterior_power(2))),
    FunctorSpec("direct_sum", parts=(IDENTITY, exterior_power(2), symmetric_power(2))),
]


def test_exterior_square_of_diagonal():
    m = ExactMatrix.diag([2, 1, Fraction(1, 2)])
    assert apply_functor(m, exterior_power(2)) == ExactMatrix.diag([2, 1, Fraction(1, 2)])


def test_exterior_square_of_identity():
    assert apply_functor(ExactMatrix.identity(7), exterior_power(2)) == ExactMatrix.identity(21)


def test_top_exterior_power_is_determinant():
    m = ExactMatrix.from_rows([[2, 1, 0], [1, 3, 1], [0, 1, 4]])
    assert apply_functor(m, exterior_power(3)) == ExactMatrix.from_rows([[m.det()]])


def test_dual_involution():
    m = ExactMatrix.from_rows([[2, 1], [5, 3]])
    assert apply_functor(apply_functor(m, DUAL), DUAL) == m
    assert apply_functor(m, DUAL).T @ m == ExactMatrix.identity(2)


def test_dual_of_singular_raises():
    with pytest.raises(ZeroDivisionError):
        apply_functor(ExactMatrix.from_rows([[1, 1], [1, 1]]), DUAL)


def test_exterior_power_too_large():
    with pytest.raises(ValueError):
        apply_functor(ExactMatrix.identity(2), exterior_power(3))


def _ext_oracle(m: np.ndarray, k: int) -> np.ndarray:
    """Lambda^k via the antisymmetrized k-fold Kronecker product."""
    d = m.shape[0]
    big = m
    for _ in range(k - 1):
        big = np.kron(big, m)
    subsets = list(combinations(range(d), k))

    def wedge(s):
        from itertools import permutations

        v = np.zeros(d**k)
        for p in permutations(range(k)):
            sign = np.linalg.det(np.eye(k)[list(p)])
            idx = 0
            for j in p:
                idx = idx * d + s[j]
            v[idx] += sign
        return v

    basis = np.array([wedge(s) for s in subsets]).T
    image = big @ basis
    coords, *_ = np.linalg.lstsq(basis, image, rcond=None)
    return coords


def _sym_oracle(m: np.ndarray, k: int) -> np.ndarray:
    """Sym^k on monomials x^a: coefficients of prod (M x)_i^{a_i} expanded as polynomials."""
    d = m.shape[0]
    monos = list(combinations_with_replacement(range(d), k))
    index = {mono: i for i, mono in enumerate(monos)}
    out = np.zeros((len(monos), len(monos)))
    for col, mono in enumerate(monos):
        # image of e_{i1} ... e_{ik} is prod_j (sum_r M[r, i_j] e_r)
        poly = {(): 1.0}
        for i in mono:
            nxt = {}
            for key, c in poly.items():
                for r in range(d):
                    if m[r, i]:
                        nk = tuple(sorted(key + (r,)))
                        nxt[nk] = nxt.get(nk, 0.0) + c * m[r, i]
            poly = nxt
        for key, c in poly.items():
            out[index[key], col] += c
    return out


@settings(max_examples=30)
@given(square(4), st.integers(1, 4))
def test_exterior_matches_kronecker_oracle(m, k):
    got = apply_functor(m, exterior_power(k)).to_numpy()
    assert np.allclose(got, _ext_oracle(m.to_numpy(), k), atol=1e-9)


@settings(max_examples=30)
@given(square(3), st.integers(1, 3))
def test_symmetric_matches_polynomial_oracle(m, k):
    got = apply_functor(m, symmetric_power(k)).to_numpy()
    assert np.allclose(got, _sym_oracle(m.to_numpy(), k), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(square(3), square(3), st.sampled_from(SPECS))
def test_functoriality_exact(a, b, spec):
    assert apply_functor(a @ b, spec) == apply_functor(a, spec) @ apply_functor(b, spec)


@settings(max_examples=20, deadline=None)
@given(square(3), st.sampled_from(SPECS + [DUAL]))
def test_float_path_matches_exact(m, spec):
    if spec == DUAL and m.det() == 0:
        return
    exact = apply_functor(m, spec).to_numpy()
    flt = apply_functor(m.to_numpy(), spec)
    assert np.allclose(exact, flt, atol=1e-9)


@pytest.mark.parametrize("spec", SPECS + [DUAL])
def test_dims(spec):
    m = ExactMatrix.identity(4)
    assert apply_functor(m, spec).dim == spec.dim(4)


def test_ext2_dim_seven():
    assert exterior_power(2).dim(7) == 21


@pytest.mark.parametrize(
    "text",
    ["identity", "dual", "ext:2", "sym:3", "tensor(dual,ext:2)", "sum(identity;ext:2;sym:2)", "tensor(sum(dual;identity),ext:3)"],
)
def test_parse_round_trip(text):
    assert str(parse_functor(text)) == text
    assert parse_functor(str(parse_functor(text))) == parse_functor(text)


@pytest.mark.parametrize("text", ["", "ext", "ext:0", "frob", "tensor(dual)", "sum(dual", "dual)"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_functor(text)


def test_mixing_exact_and_float_refused():
    with pytest.raises((TypeError, ValueError)):
        apply_functor([[1, 0], [0, 1]], IDENTITY.__class__("exterior_power", 1))
