from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import games
from partgame import (
    GameSpec,
    InfeasibleTarget,
    NumericMode,
    Variant,
    expenditure_compare,
    is_equilibrium,
    profile_from_counts,
    r_min_all_in,
    r_min_mixed,
    retraction_lambda_scan,
)
from partgame.prob import binomial_tail, f_term
from partgame.structure import lambda_lower_bound

BASIC4 = GameSpec(n=4, k=2, q="1/2", alpha=1)
Q = Fraction(3, 10)


def bisect_threshold(holds, lo: Fraction, hi: Fraction, steps: int = 60) -> tuple:
    """Bracket the smallest r with holds(r) by exact bisection."""
    assert not holds(lo) and holds(hi)
    for _ in range(steps):
        mid = (lo + hi) / 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def test_basic_all_in_16_7():
    rep = r_min_all_in(BASIC4)
    assert rep.r_min == Fraction(16, 7)
    assert rep.binding_constraint == "contributor_vs_abstain"
    assert rep.expenditure == Fraction(32, 7)
    lo, hi = bisect_threshold(lambda r: bool(is_equilibrium(BASIC4.with_(r=r), (1,) * 4)), Fraction(0), Fraction(10))
    assert lo < Fraction(16, 7) <= hi


def test_universal_all_in_16_11():
    spec = BASIC4.with_(variant=Variant.UNIVERSAL_BASIC)
    assert binomial_tail(4, 2, Fraction(1, 2)) == Fraction(11, 16)
    rep = r_min_all_in(spec)
    assert rep.r_min == Fraction(16, 11) < Fraction(16, 7)
    assert rep.expenditure == Fraction(64, 11)


def test_expenditure_basic_pair():
    cmp_ = expenditure_compare(BASIC4, BASIC4.with_(variant=Variant.UNIVERSAL_BASIC))
    assert (cmp_.tracked_total, cmp_.universal_total) == (Fraction(32, 7), Fraction(64, 11))
    assert cmp_.universal_higher and cmp_.strictly_higher


def test_expenditure_q_one_allows_equality():
    spec = GameSpec(n=4, k=2, q=1, alpha=1)
    cmp_ = expenditure_compare(spec, spec.with_(variant=Variant.UNIVERSAL_BASIC))
    assert cmp_.universal_higher and not cmp_.strictly_higher


def test_expenditure_rejects_mismatch():
    with pytest.raises(ValueError):
        expenditure_compare(BASIC4, BASIC4.with_(variant=Variant.UNIVERSAL_BASIC, alpha=2))
    with pytest.raises(ValueError):
        expenditure_compare(BASIC4, BASIC4)


def test_positive_v_reduces_requirement():
    rep0 = r_min_all_in(BASIC4)
    rep = r_min_all_in(BASIC4.with_(v=Fraction(1, 2)))
    assert rep.r_min < rep0.r_min
    assert is_equilibrium(BASIC4.with_(v=Fraction(1, 2), r=rep.r_min), (1,) * 4)
    assert r_min_all_in(BASIC4.with_(v=100)).r_min == 0


def test_heterogeneous_all_in():
    ex1 = GameSpec(n=4, k=2, q=("1/2", "1/2", "1/4", "1/4"), alpha=1)
    rep = r_min_all_in(ex1)
    # the weakest players need 1/4 * 13/16 * r >= 1
    assert rep.r_min == Fraction(64, 13)
    assert is_equilibrium(ex1.with_(r=rep.r_min), (1,) * 4)
    assert not is_equilibrium(ex1.with_(r=rep.r_min - Fraction(1, 10**9)), (1,) * 4)


# ---------------------------------------------------------------------------
# Retraction targets


def n60(alpha=Fraction(1, 5), beta=Fraction(1, 10), variant="retraction"):
    return GameSpec(n=60, k=13, q=Q, alpha=alpha, beta=beta, variant=variant)


def test_retraction_all_in():
    spec = GameSpec(n=6, k=2, q="1/2", alpha="1/4", beta="1/20", variant="retraction")
    rep = r_min_all_in(spec)
    assert set(rep.candidates) == {"contributor_vs_free_ride", "contributor_vs_abstain"}
    assert is_equilibrium(spec.with_(r=rep.r_min), (1,) * 6)
    assert not is_equilibrium(spec.with_(r=rep.r_min - Fraction(1, 10**9)), (1,) * 6)


def test_mixed_target_n60():
    spec = n60()
    rep = r_min_mixed(spec, 48)
    assert rep.binding_constraint == "r2"
    assert rep.candidates["r1"] == Fraction(1, 10) / f_term(48, 13, Q)
    assert rep.r_max == Fraction(1, 10) / f_term(49, 13, Q)
    prof = profile_from_counts(48, 12)
    assert is_equilibrium(spec.with_(r=rep.r_min), prof)
    assert not is_equilibrium(spec.with_(r=rep.r_min * (1 - Fraction(1, 10**6))), prof)


def test_mixed_target_at_alpha_bound():
    # choose alpha so that r = 1 sits exactly on the alpha/r bound at beta/r = 0.1
    bound = retraction_lambda_scan(n60().with_(r=1)).window.alpha_ratio_upper[48]
    rep = r_min_mixed(n60(alpha=bound), 48)
    assert rep.r_min == 1
    assert round(float(bound), 4) == 0.2082


def test_mixed_target_infeasible():
    with pytest.raises(InfeasibleTarget) as exc:
        r_min_mixed(n60(), 30)
    assert exc.value.constraint == "lambda_range"
    with pytest.raises(InfeasibleTarget) as exc:
        r_min_mixed(n60(alpha=Fraction(1, 2)), 48)
    assert exc.value.constraint == "free_rider_vs_contribute"


def test_matched_retraction_relations():
    tracked, universal = n60(), n60(variant="universal_retraction")
    a, b = r_min_mixed(tracked, 48), r_min_mixed(universal, 48)
    assert a.candidates["r1"] == b.candidates["r1"]
    assert b.candidates["r3"] == Q * a.candidates["r3"]
    cmp_ = expenditure_compare(tracked, universal, 48)
    assert cmp_.universal_higher
    assert cmp_.r_min_universal <= cmp_.r_min


def _fixed_point_r2(spec: GameSpec, lam: int, universal: bool) -> float:
    """Iterate r <- alpha / (gain(beta / r)) from the self-referential form."""
    q, k, alpha, beta = (float(x) for x in (spec.q, spec.k, spec.alpha, spec.beta))
    k = int(k)
    f_lam = float(f_term(lam, k, spec.q))
    if universal:
        rest = float(binomial_tail(lam - 1, k, spec.q))
        gain = lambda r: q * (f_lam - beta / r) + rest
    else:
        tail = float(binomial_tail(lam - 1, k - 1, spec.q))
        gain = lambda r: q * (tail - beta / r)
    r = 10.0 * (alpha + beta)
    for _ in range(2000):
        nxt = alpha / gain(r)
        if abs(nxt - r) < 1e-15 * max(1.0, r):
            break
        r = nxt
    return r


@pytest.mark.parametrize("variant", ["retraction", "universal_retraction"])
@settings(max_examples=100, deadline=None)
@given(data=st.data())
def test_closed_form_r2_matches_fixed_point(variant, data):
    n = data.draw(st.integers(3, 30))
    k = data.draw(st.integers(1, n - 1))
    q = Fraction(data.draw(st.integers(1, 9)), 10)
    alpha = Fraction(data.draw(st.integers(1, 20)), 10)
    beta = alpha * Fraction(data.draw(st.integers(0, 9)), 10)  # q*beta < alpha: the iteration contracts
    spec = GameSpec(n=n, k=k, q=q, alpha=alpha, beta=beta, variant=variant)
    lam = data.draw(st.integers(lambda_lower_bound(spec), n - 1)) if lambda_lower_bound(spec) <= n - 1 else None
    assume(lam is not None)
    try:
        rep = r_min_mixed(spec, lam)
    except InfeasibleTarget:
        rep = None
    if rep is None or rep.candidates["r2"] == 0:
        return
    closed = float(rep.candidates["r2"])
    assume(closed < 1e9)
    iterated = _fixed_point_r2(spec, lam, variant == "universal_retraction")
    assert abs(closed - iterated) <= 1e-12 * max(1.0, closed)


# ---------------------------------------------------------------------------
# Boundary correctness against the deviation check


@pytest.mark.parametrize("variant", list(Variant))
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_all_in_boundary(variant, data):
    spec = data.draw(games(variant, n_max=8, v_zero=variant is not Variant.BASIC))
    rep = r_min_all_in(spec)
    assume(rep.r_min > 0)
    prof = (1,) * spec.n
    assert is_equilibrium(spec.with_(r=rep.r_min), prof)
    assert not is_equilibrium(spec.with_(r=rep.r_min * (1 - Fraction(1, 10**6))), prof)
    fl = spec.with_(r=rep.r_min * (1 - Fraction(1, 10**6)), numeric=NumericMode.float_(1e-15))
    assert not is_equilibrium(fl, prof)


@pytest.mark.parametrize("variant", ["retraction", "universal_retraction"])
@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_mixed_boundary(variant, data):
    spec = data.draw(games(Variant(variant), n_max=8))
    lo = lambda_lower_bound(spec)
    assume(lo <= spec.n - 1)
    lam = data.draw(st.integers(lo, spec.n - 1))
    try:
        rep = r_min_mixed(spec, lam)
    except InfeasibleTarget:
        # confirm no reward in the search box sustains the profile
        prof = profile_from_counts(lam, spec.n - lam)
        for r in (Fraction(j, 4) for j in range(1, 200)):
            assert not is_equilibrium(spec.with_(r=r), prof)
        return
    prof = profile_from_counts(lam, spec.n - lam)
    assert is_equilibrium(spec.with_(r=rep.r_min), prof)
    if rep.r_min > 0:
        assert not is_equilibrium(spec.with_(r=rep.r_min * (1 - Fraction(1, 10**6))), prof)


@settings(max_examples=200, deadline=None)
@given(games(Variant.BASIC, n_max=10))
def test_universal_cheaper_per_user_dearer_in_total(spec):
    cmp_ = expenditure_compare(spec, spec.with_(variant=Variant.UNIVERSAL_BASIC))
    assert cmp_.r_min_universal <= cmp_.r_min
    assert cmp_.strictly_higher
