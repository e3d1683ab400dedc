import random
from fractions import Fraction

import pytest

from conftest import SEED
from iwalab.experiments import builtin_form
from iwalab.forms import NotOrdinaryError, curve_form, table_form, X0_11
from iwalab.padic import gamma, evaluate_at_character, invariants
from iwalab.plfun import (
    SignMismatchError,
    group_ring_to_series,
    interpolation_check,
    mazur_tate,
    mod_p_l_function,
    pl_function,
    symbol_for,
    to_series,
    trivial_zero,
)


@pytest.fixture(scope="module")
def x0():
    return builtin_form("x0_11")


@pytest.fixture(scope="module")
def e1():
    return builtin_form("e1_52")


def _levels(f, p, route, top=4, M=3):
    sym, alpha, stab = symbol_for(f, p, M, 1, route)
    return {n: mazur_tate(sym, alpha, n, stab, f.k) for n in range(1, top + 1)}


@pytest.mark.parametrize("name, p, route", [("x0_11", 11, "native"), ("e1_52", 5, "stabilize"),
                                            ("e1_52", 5, "level_np"), ("x0_11", 7, "stabilize")])
def test_measure_is_additive(name, p, route):
    """mu(a + p^r) = Σ_{b ≡ a mod p^r} mu(b + p^(r+1)) at 50 random (a, r)."""
    f = builtin_form(name)
    top = 3 if p > 7 else 4
    thetas = _levels(f, p, route, top)
    rng = random.Random(SEED)
    mod = p**3
    for _ in range(50):
        r = rng.randint(1, top - 1)
        a = rng.choice([x for x in range(p**r) if x % p])
        fibre = sum(thetas[r + 1].values[b] for b in range(a, p ** (r + 1), p**r))
        assert (thetas[r].values[a] - fibre) % mod == 0
        assert thetas[r + 1].push(r).values[a] == thetas[r].values[a]


def test_x0_11_invariants(x0):
    L = pl_function(x0, 11, 0, 2, 3)
    assert (L.invariants.mu, L.invariants.lam, L.invariants.certified) == (0, 1, True)
    assert L.series.coeffs[0] == 0 and L.series.coeffs[1] % 11
    assert L.trivial_zero_flag and trivial_zero(x0, 11)


def test_e1_invariants_and_level_stability(e1):
    for n in (3, 4):
        L = pl_function(e1, 5, 0, n, 3)
        assert (L.invariants.mu, L.invariants.lam) == (0, 0)


def test_other_branches_are_certified_and_stable(e1):
    reps = [pl_function(e1, 5, 2, n, 3).invariants for n in (3, 4)]
    assert reps[0].certified and reps[0] == reps[1]


def test_routes_agree_up_to_unit(e1):
    a = pl_function(e1, 5, 0, 3, 3, route="stabilize").series
    b = pl_function(e1, 5, 0, 3, 3, route="level_np").series
    from iwalab.experiments import units_agree

    assert units_agree(a, b, 5, 3)


def test_interpolation_identity_is_exact(e1):
    lhs, rhs = interpolation_check(e1, 5)
    assert lhs == rhs
    lhs, rhs = interpolation_check(curve_form(X0_11, "x0"), 7)
    assert lhs == rhs


def test_sign_mismatch(x0):
    sym, alpha, stab = symbol_for(x0, 11, 3, 1, "native")
    mt = mazur_tate(sym, alpha, 2, stab, 2)
    with pytest.raises(SignMismatchError):
        to_series(mt, 1)


def test_group_ring_to_series_on_a_point_mass():
    # [1] maps to ω^i(1) (1+T)^0 = 1
    s = group_ring_to_series({1: 1}, 5, 2, 3, 0)
    assert s.coeffs == (1, 0, 0, 0, 0)
    # [γ] maps to (1 + T)
    s = group_ring_to_series({gamma(5) % 25: 1}, 5, 2, 3, 0)
    assert s.coeffs == (1, 1, 0, 0, 0)


def test_mod_p_series_is_the_reduction(e1):
    full = pl_function(e1, 5, 0, 3, 3).series
    red = mod_p_l_function(e1, 5, 0, 3)
    assert all((a - b) % 5 == 0 for a, b in zip(full.coeffs, red.coeffs))
    assert invariants(red).lam == invariants(full).lam


def test_non_ordinary_is_rejected():
    f = table_form(11, 2, {2: -2, 3: -1, 5: 0, 7: -2}, "fake")
    with pytest.raises(NotOrdinaryError):
        pl_function(f, 5, 0, 2, 3)


def test_bad_parameters(x0):
    with pytest.raises(ValueError):
        pl_function(x0, 11, 10, 2, 3)
    with pytest.raises(ValueError):
        pl_function(x0, 11, 0, 0, 3)
    with pytest.raises(ValueError):
        pl_function(x0, 11, 0, 2, 3, sigma=[11])


def test_evaluation_precision_is_reported(x0):
    L = pl_function(x0, 11, 0, 2, 3)
    v = evaluate_at_character(L.series, gamma(11) - 1)
    assert v.M == 2


def test_normalization_scale_is_recorded(x0):
    L = pl_function(x0, 11, 0, 2, 3)
    assert isinstance(L.normalization_scale, Fraction) and L.to_dict()["normalization_scale"]
