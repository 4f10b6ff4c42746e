from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from g2lyap.engine import EstimationResult, WalkConfig, estimate_exponents
from g2lyap.hodge import (
    BRANCH_FULL,
    BRANCH_NONE,
    BRANCH_TRUNCATED,
    NonHyperbolicBaseError,
    VHSProfile,
    compare_prediction,
    conjecture_prediction,
    kontsevich_sum,
    spectrum_shape,
)
from g2lyap.monodromy import load_builtin

G2_PROFILE = VHSProfile(weight=2, hodge_numbers=(2, 3, 2), genus=0, punctures=4)


def test_kontsevich_examples():
    assert kontsevich_sum(0, 4, 1) == 1
    assert kontsevich_sum(1, 1, 3) == 6
    assert kontsevich_sum(2, 0, Fraction(1, 3)) == Fraction(1, 3)
    with pytest.raises(NonHyperbolicBaseError):
        kontsevich_sum(0, 2, 5)
    with pytest.raises(NonHyperbolicBaseError):
        kontsevich_sum(1, 0, 1)


@given(st.integers(0, 5), st.integers(0, 8), st.fractions(max_denominator=50))
def test_kontsevich_homogeneous(g, s, deg):
    if 2 * g - 2 + s <= 0:
        return
    assert kontsevich_sum(g, s, 2 * deg) == 2 * kontsevich_sum(g, s, deg)


def test_g2_profile_branch():
    pred = conjecture_prediction(G2_PROFILE, 3)
    assert G2_PROFILE.dim_F(1) == 5 and G2_PROFILE.rank == 7
    assert pred.branch == BRANCH_TRUNCATED
    assert pred.k_used == 2
    assert pred.symbolic
    assert pred.expression == "2*deg(H^{2,0})/2"
    assert pred.simplified == "deg(H^{2,0})"


def test_g2_profile_with_degree():
    prof = VHSProfile(2, (2, 3, 2), 0, 4, {"H^{2,0}": Fraction(3, 5)})
    pred = conjecture_prediction(prof, 3)
    assert pred.predicted_sum == Fraction(3, 5)
    assert not pred.symbolic


@pytest.mark.parametrize("gh", [1, 2, 3, 5])
def test_weight_one_reproduces_kontsevich(gh):
    prof = VHSProfile(1, (gh, gh), 2, 3, {"F^1": Fraction(7)})
    pred = conjecture_prediction(prof, gh)
    assert pred.branch == BRANCH_FULL
    assert pred.degree_label == "F^1"
    assert pred.predicted_sum == kontsevich_sum(2, 3, 7)


def test_weight_three_top_exponent_rational():
    prof = VHSProfile(3, (1, 4, 4, 1), 0, 3, {"H^{3,0}": Fraction(1, 6)})
    pred = conjecture_prediction(prof, 1)
    assert pred.branch == BRANCH_TRUNCATED and pred.k_used == 1
    assert pred.predicted_sum == Fraction(1, 3)
    assert pred.expression == "2*deg(H^{3,0})/1"


def test_not_applicable_cases():
    # k <= d with d > 1: no claim
    assert conjecture_prediction(G2_PROFILE, 2).branch == BRANCH_NONE
    assert conjecture_prediction(G2_PROFILE, 1).branch == BRANCH_NONE
    with pytest.raises(ValueError):
        conjecture_prediction(G2_PROFILE, 4)
    with pytest.raises(ValueError):
        conjecture_prediction(G2_PROFILE, 0)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=4), st.booleans(), st.data())
def test_branch_matches_inequalities(half, odd, data):
    hodge = half + (list(reversed(half)) if odd else list(reversed(half[:-1])))
    weight = len(hodge) - 1
    if weight < 1 or hodge[0] == 0:
        return
    prof = VHSProfile(weight, tuple(hodge), 0, 3)
    k = data.draw(st.integers(1, max(1, prof.rank // 2)))
    if k > prof.rank // 2:
        return
    f = prof.dim_F(-(-weight // 2))
    d = hodge[0]
    pred = conjecture_prediction(prof, k)
    if k == f:
        assert pred.branch == BRANCH_FULL and pred.k_used == k
    elif d < k < f or k == d == 1 < f:
        assert pred.branch == BRANCH_TRUNCATED and pred.k_used == d
    else:
        assert pred.branch == BRANCH_NONE


def test_profile_validation():
    with pytest.raises(ValueError):
        VHSProfile(2, (2, 3), 0, 4)
    with pytest.raises(ValueError):
        VHSProfile(2, (1, 3, 2), 0, 4)
    with pytest.raises(ValueError):
        VHSProfile.from_dict({"weight": 1, "hodge_numbers": [1, 1], "genus": 0, "punctures": 3, "extra": 1})


def test_profile_round_trip():
    data = {"weight": 2, "hodge_numbers": [2, 3, 2], "genus": 0, "punctures": 4, "degrees": {"H^{2,0}": "3/4"}}
    prof = VHSProfile.from_dict(data)
    assert prof.degree("H^{2,0}") == Fraction(3, 4)
    assert prof.to_dict() == data


def test_spectrum_shapes():
    assert str(spectrum_shape(7, (4, 3))) == "3/1/3"
    assert str(spectrum_shape(6, weight_one=True)) == "3/0/3"
    assert str(spectrum_shape(1)) == "0/1/0"
    with pytest.raises(ValueError):
        spectrum_shape(7, (4, 4))
    with pytest.raises(ValueError):
        spectrum_shape(3, weight_one=True)


@given(st.integers(0, 10), st.integers(0, 10))
def test_shape_totals_and_palindrome(p, q):
    shape = spectrum_shape(p + q, (p, q))
    assert shape.rank == p + q
    pat = shape.pattern()
    assert pat == [-x for x in reversed(pat)]


def test_compare_zero_prediction():
    prof = VHSProfile(1, (2, 2), 0, 4, {"F^1": Fraction(0)})
    pred = conjecture_prediction(prof, 2)
    est = EstimationResult.from_values([0, 0, 0, 0])
    rep = compare_prediction(pred, est, scale=1.0)
    assert rep.consistent and rep.defect == 0


def test_compare_symbolic_errors():
    with pytest.raises(ValueError, match="symbolic"):
        compare_prediction(conjecture_prediction(G2_PROFILE, 3), EstimationResult.from_values([1] * 7), 1.0)
    with pytest.raises(ValueError):
        compare_prediction(conjecture_prediction(G2_PROFILE, 1), EstimationResult.from_values([1] * 7), 1.0)
    prof = VHSProfile(1, (1, 1), 0, 3, {"F^1": Fraction(1)})
    with pytest.raises(ValueError):
        compare_prediction(conjecture_prediction(prof, 1), EstimationResult.from_values([1, -1]), 0.0)


def test_compare_on_sl2_sanity_run():
    sl2 = load_builtin("sl2-sanity")
    meta = sl2.metadata
    res = estimate_exponents(sl2, WalkConfig(steps=200_000, blocks=20, master_seed=5))
    assert res.exponents[0] > 0
    prof = VHSProfile(meta["weight"], tuple(meta["hodge_numbers"]), meta["genus"], meta["punctures"], {"F^1": Fraction(1, 2)})
    pred = conjecture_prediction(prof, 1)
    assert pred.branch == BRANCH_FULL and pred.predicted_sum == 1
    # calibrate the time scale so that the prediction matches the point estimate
    scale = 1.0 / res.exponents[0]
    rep = compare_prediction(pred, res, scale)
    assert rep.consistent
    assert rep.std_error == pytest.approx(res.std_errors[0])
    # a prediction off by 50 percent is flagged
    off = compare_prediction(pred, res, 1.5 * scale)
    assert not off.consistent
    assert np.isfinite(off.z)
