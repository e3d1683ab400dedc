import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iwalab.arith import ResidueInt
from iwalab.padic import (
    INF,
    UNDETERMINED,
    LambdaSeries,
    binomial_power,
    decompose,
    discrete_log_exhaustive,
    discrete_log_gamma,
    evaluate_at_character,
    gamma,
    invariants,
    multiply,
    multiply_mod_omega,
    one_unit_part,
    padic_log,
    reduce_mod_omega,
    teichmuller,
    theta_precision,
)

primes = st.sampled_from([3, 5, 7, 11, 13])


def test_teichmuller_is_a_root_of_unity():
    for p in (5, 7, 11):
        for x in range(1, p):
            t = teichmuller(x, p, 4)
            assert pow(t, p - 1, p**4) == 1
            assert (t - x) % p == 0


def test_padic_log_of_gamma_has_valuation_one():
    for p in (3, 5, 11):
        assert padic_log(gamma(p), p, 5) % p == 0
        assert padic_log(gamma(p), p, 5) % p**2 != 0


@given(primes, st.integers(min_value=0, max_value=10**6))
def test_discrete_log_routes_agree(p, e):
    M = 3
    u = pow(gamma(p), e, p**M)
    assert discrete_log_gamma(u, p, M) == discrete_log_exhaustive(u, p, M) == e % p ** (M - 1)


@given(primes, st.integers(min_value=1, max_value=10**9), st.integers(min_value=2, max_value=6))
def test_decompose_round_trip(p, x, M):
    if x % p == 0:
        x += 1
    dec = decompose(x, p, M)
    assert dec.reconstruct() == ResidueInt(x, p, M)
    assert dec.teich_component == teichmuller(x, p, M)
    assert one_unit_part(x, p, M) % p == 1


@pytest.mark.parametrize(
    "x, p, M, n",
    [
        (7, 5, 5, 1),  # 7 = ω(7) γ^e with v_5(e) = 1
        (1321, 11, 4, 0),
        (12, 11, 4, 0),  # 12 = γ
        (1, 5, 4, INF),
    ],
)
def test_decompose_wild_valuation(x, p, M, n):
    assert decompose(x, p, M).wild_valuation == n


@given(primes, st.integers(min_value=-300, max_value=300), st.integers(min_value=-300, max_value=300))
def test_binomial_power_is_a_homomorphism(p, a, b):
    D, M = 12, 3
    lhs = multiply(binomial_power(a, D, p, M), binomial_power(b, D, p, M))
    assert lhs.coeffs == binomial_power(a + b, D, p, M).coeffs


def test_binomial_power_small_cases():
    assert binomial_power(5, 8, 5, 1).coeffs == (1, 0, 0, 0, 0, 1, 0, 0)
    inv = binomial_power(-1, 6, 7, 2).coeffs
    assert inv == tuple((-1) ** j % 49 for j in range(6))


def test_binomial_power_residue_exponent_tracks_precision():
    s = binomial_power(ResidueInt(3, 5, 2), 10)
    assert s.precision[0] == 2
    assert s.precision[5] == 1  # 5! has valuation 1


@pytest.mark.parametrize(
    "coeffs, mu, lam",
    [
        ([0, 1, 3], 0, 1),
        ([5, 10, 1], 0, 2),
        ([25, 5, 10], 1, 1),
        ([3], 0, 0),
    ],
)
def test_invariants(coeffs, mu, lam):
    rep = invariants(LambdaSeries(5, 3, coeffs))
    assert (rep.mu, rep.lam, rep.certified) == (mu, lam, True)


def test_invariants_undetermined_when_everything_vanishes():
    rep = invariants(LambdaSeries(5, 3, [0, 0, 0]))
    assert rep.mu == UNDETERMINED and not rep.certified


def test_invariants_refuse_to_read_through_lost_precision():
    # coefficient 1 carries no information, so it may hide a unit
    s = LambdaSeries(5, 3, [5, 0, 1], precision=(3, 0, 3))
    rep = invariants(s)
    assert rep.mu == 0 and rep.lam == UNDETERMINED and not rep.certified
    # known mod 5 and zero there: valuation >= 1 > mu, so lambda = 2 is certain
    rep = invariants(LambdaSeries(5, 3, [5, 0, 1], precision=(3, 1, 3)))
    assert (rep.lam, rep.certified) == (2, True)


@given(
    primes,
    st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=10),
    st.integers(min_value=1, max_value=10**6),
    st.integers(min_value=-50, max_value=50),
)
def test_unit_multiplication_preserves_invariants(p, coeffs, unit, shift):
    if unit % p == 0:
        unit += 1
    M, D = 4, len(coeffs)
    s = LambdaSeries(p, M, coeffs)
    u = binomial_power(shift, D, p, M).scale(unit)  # a unit of Λ
    assert invariants(multiply(s, u)) == invariants(s)


def test_theta_precision_profile():
    assert theta_precision(5, 3, 3, 25)[:6] == (3, 2, 2, 2, 2, 1)
    assert theta_precision(11, 2, 3, 11)[1:] == (1,) * 10


def test_reduce_mod_omega_kills_omega():
    p, n, M = 5, 2, 3
    # (1+T)^5 - 1 reduces to 0
    w = [0] + [math.comb(5, j) for j in range(1, 6)]
    assert reduce_mod_omega(w, p, n, M) == [0] * 5


def test_multiply_mod_omega_is_the_group_ring_product():
    p, n, M = 5, 2, 3
    # (1+T) generates a cyclic group of order p^(n-1) = 5 modulo omega
    g = LambdaSeries(p, M, [1, 1, 0, 0, 0], n)
    acc = LambdaSeries(p, M, [1, 0, 0, 0, 0], n)
    for _ in range(5):
        acc = multiply_mod_omega(acc, g, n)
    assert acc.coeffs == (1, 0, 0, 0, 0)


def test_evaluate_at_character():
    s = LambdaSeries(11, 3, [0, 1])
    val = evaluate_at_character(s, 11)
    assert val.value == 11
    with pytest.raises(ValueError):
        evaluate_at_character(s, 1)
    # a level-2 series only pins the value to n - 1 + v(t0) digits
    lvl = LambdaSeries(11, 3, [0, 1] + [0] * 9, source_level=2)
    assert evaluate_at_character(lvl, 11).M == 2


def test_series_dict_round_trip():
    s = LambdaSeries(5, 3, [1, 2, 3], source_level=2)
    assert LambdaSeries.from_dict(s.to_dict()).coeffs == s.coeffs
