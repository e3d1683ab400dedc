import random

import pytest

from conftest import SEED
from iwalab.experiments import builtin_form
from iwalab.forms import branch_data, is_prime, primes_up_to
from iwalab.iwasawa import (
    EulerFactor,
    delta_identity_check,
    e_ell,
    e_ell_oracle,
    euler_factor,
    euler_series,
    first_case_prime,
    lambda_transfer_check,
    level_raising_cases,
    level_raising_scan,
    mu_transfer_check,
    nonprimitive_comparison,
    predicted_lambda,
    primes_above,
)
from iwalab.padic import content, invariants, UNDETERMINED
from iwalab.plfun import pl_function


@pytest.fixture(scope="module")
def forms():
    return {name: builtin_form(name) for name in ("x0_11", "delta_11", "e1_52", "e2_364")}


@pytest.fixture(scope="module")
def gv_pair(forms):
    return pl_function(forms["e1_52"], 5, 0, 3, 3), pl_function(forms["e2_364"], 5, 0, 3, 3)


@pytest.mark.parametrize("ell, p, count, n", [(7, 5, 5, 1), (1321, 11, 1, 0), (2, 5, 1, 0)])
def test_primes_above(ell, p, count, n):
    pl = primes_above(ell, p)
    assert (pl.count, pl.n) == (count, n)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_primes_above_matches_closed_form(p):
    """The decomposition group of ell in Γ has index p^(v_p(ell^(p-1) - 1) - 1)."""
    for ell in primes_up_to(400):
        if ell == p:
            continue
        v = 0
        x = pow(ell, p - 1) - 1
        while x % p == 0:
            x //= p
            v += 1
        assert primes_above(ell, p).count == p ** (v - 1)


def _random_config(rng):
    p = rng.choice([3, 5, 7, 11])
    ell = rng.choice([q for q in primes_up_to(200) if q != p])
    i = rng.randrange(p - 1)
    good = rng.random() < 0.75
    if good:
        bound = int(2 * ell**0.5)
        a = rng.randint(-bound, bound)
        ef = EulerFactor(ell, 2, a, ell, True)
    else:
        ef = EulerFactor(ell, 1, rng.choice([-1, 0, 1]), 0, False)
    return p, i, ef


def test_euler_factors_have_unit_content():
    """200 seeded configurations: the substituted Euler factor is never divisible by p."""
    rng = random.Random(SEED)
    for _ in range(200):
        p, i, ef = _random_config(rng)
        D = 2 * p ** (primes_above(ef.ell, p).n + 1)
        for variant in ("analytic", "literal"):
            s = euler_series(ef, p, i, D, 1, variant)
            assert content(s) == 0
            rep = invariants(s)
            assert rep.certified
            assert rep.lam == e_ell_oracle(ef, p, i, variant), (p, i, ef, variant)


def test_euler_factor_shapes(forms):
    e1, e2 = forms["e1_52"], forms["e2_364"]
    b1, b2 = branch_data(e1, 5), branch_data(e2, 5)
    assert euler_factor(b1, 7).coefficients() == (1, 2, 7)
    assert euler_factor(b2, 7).coefficients() == (1, -1)
    with pytest.raises(ValueError):
        euler_factor(b1, 5)
    assert e_ell(b1, 7, 0) == 5
    assert e_ell(b2, 7, 0) == 0
    assert e_ell(b2, 7, 0, variant="literal") == 5


@pytest.mark.parametrize(
    "a, c, ell, p, cases",
    [
        (-2, 7, 7, 5, (1,)),  # E1 at 7: a ≡ 3 ≡ 1 + 7 mod 5
        (47, 1321, 1321, 11, ()),  # 1321 ≡ 1 mod 11 but a ≡ 3
        (2, 1123, 1123, 11, (1, 2, 3)),
        (0, 10, 10, 11, (1, 4)),  # ell ≡ -1: a ≡ 0 also fits case 1 with i odd
    ],
)
def test_level_raising_cases(a, c, ell, p, cases):
    got, _ = level_raising_cases(a, c, ell, p)
    assert got == cases


def test_scan_x0_11(forms):
    hits = level_raising_scan(forms["x0_11"], 11, 2200)
    case3 = [h.ell for h in hits if 3 in h.cases]
    assert case3 == [1123, 2113]
    assert first_case_prime(hits, 3) == 1123
    assert all(is_prime(h.ell) for h in hits)
    assert level_raising_scan(forms["x0_11"], 11, 50) == []


def test_scan_e1(forms):
    (hit,) = level_raising_scan(forms["e1_52"], 5, 10)
    assert (hit.ell, hit.cases, hit.i_values, hit.places) == (7, (1,), (0,), 5)
    assert predicted_lambda(0, hit, 1) == 5


def test_mu_transfer(gv_pair):
    L1, L2 = gv_pair
    assert mu_transfer_check(L1, L2).consistent is True


def test_transfer_e1_e2(forms, gv_pair):
    rep = lambda_transfer_check(forms["e1_52"], forms["e2_364"], 5, 0, 3, 3, *gv_pair)
    assert rep.balanced is True and rep.lhs == rep.rhs == -5
    assert rep.table()[7] == (5, 0)
    assert all(v == (0, 0) for ell, v in rep.table().items() if ell != 7)


def test_transfer_same_form(forms, gv_pair):
    f = forms["e1_52"]
    rep = lambda_transfer_check(f, f, 5, 0, 3, 3, gv_pair[0], gv_pair[0])
    assert rep.balanced is True and rep.lhs == 0 and rep.rhs == 0


def test_transfer_needs_congruence(forms):
    rep = lambda_transfer_check(forms["x0_11"], forms["e1_52"], 5, 0, 3, 3)
    assert rep.balanced == "inapplicable"


def test_delta_identity(forms):
    rep = delta_identity_check(forms["e1_52"], forms["e2_364"], 5, 0, 7)
    assert rep.holds is True and rep.delta_side == rep.e_side == -5
    hyp = delta_identity_check(forms["x0_11"], None, 11, 0, 2113, raised_case=3)
    assert hyp.holds is True
    miss = delta_identity_check(forms["x0_11"], None, 11, 0, 1321, raised_case=3)
    assert miss.holds == UNDETERMINED and "does not hold" in miss.note


def test_nonprimitive_factorization(forms):
    rep = nonprimitive_comparison(forms["x0_11"], 11, 0, [3], 2, 3)
    assert rep.identity_in_group_ring and rep.identity_in_series
    assert rep.scalar % 11
    assert rep.lambda_sigma == rep.lambda_f + rep.e_sum
    empty = nonprimitive_comparison(forms["x0_11"], 11, 0, [], 2, 3)
    assert empty.scalar == 1
