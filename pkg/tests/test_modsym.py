import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iwalab.arith import RationalMatrix, charpoly
from iwalab.forms import factor, tau
from iwalab.modsym import (
    CacheCorruptError,
    DimensionBudgetError,
    EigenAmbiguityError,
    ModSymConfig,
    P1List,
    build_space,
    cache_file,
    convergents,
    eigen_symbol,
    hecke,
    load_or_build,
    load_space,
    monomial,
    ordinary_projection,
    save_space,
    special_value_ratio,
    star_split,
    substitute,
    unit_root_factor,
)
from iwalab.plfun import cached_space

SMALL_SPACES = [(11, 2), (14, 2), (23, 2), (37, 2), (52, 2), (1, 12), (11, 4), (7, 6), (5, 8), (13, 4)]


def _legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def dim_cusp_forms(N, k):
    """dim S_k(Γ0(N)) from the classical genus-type formula (independent oracle)."""
    fac = factor(N)
    mu = N
    for p in fac:
        mu = mu * (p + 1) // p
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = math.prod(1 + _legendre(-1, p) if p != 2 else 1 for p in fac)
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = math.prod(1 + _kronecker_m3(p) for p in fac)
    cusps = sum(_phi(math.gcd(d, N // d)) for d in range(1, N + 1) if N % d == 0)
    if k == 2:
        g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
        return int(g), cusps
    d = Fraction((k - 1) * mu, 12) + (k // 4 - Fraction(k - 1, 4)) * nu2 + (k // 3 - Fraction(k - 1, 3)) * nu3
    d -= Fraction(cusps, 2)
    return int(d), cusps


def _kronecker_m3(p):
    if p == 2:
        return -1
    return _legendre(-3, p)


def _phi(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


@pytest.mark.parametrize("N, k", SMALL_SPACES + [(99, 2), (64, 2), (27, 2), (36, 4)])
def test_dimensions_match_formula(N, k):
    space = cached_space(N, k)
    s, c = dim_cusp_forms(N, k)
    assert space.cuspidal_dimension() == 2 * s
    eis = c - 1 if k == 2 else c
    assert space.dimension == 2 * s + eis


def test_p1_list_sizes():
    for N in (1, 11, 12, 52, 99):
        psi = N
        for p in factor(N):
            psi = psi * (p + 1) // p
        assert len(P1List(N)) == psi


def test_lift_to_sl2():
    P = P1List(52)
    for c, d in P.reps:
        a, b, c2, d2 = P.lift_to_sl2(c, d)
        assert a * d2 - b * c2 == 1
        assert P.index(c2, d2) == P.index(c, d)


def test_convergents():
    assert convergents(3, 7)[-1] == (3, 7)
    for (p0, q0), (p1, q1) in zip(convergents(355, 113), convergents(355, 113)[1:]):
        assert abs(p1 * q0 - p0 * q1) == 1


@pytest.mark.parametrize("N, k", [(11, 2), (11, 4), (1, 12), (7, 6), (14, 2)])
def test_manin_relations_hold_in_the_quotient(N, k):
    space = cached_space(N, k)
    w = space.w
    for x in range(space.ngens):
        g = space.generator(x)
        c, d, j = g.c, g.d, g.monomial_index
        two = {x: 1}
        y = space.gid(w - j, d, -c)
        two[y] = two.get(y, 0) + (-1) ** j
        assert not any(space.gens_to_vector(two))
        three = {x: 1}
        for sub, (cc, dd) in (((0, -1, 1, -1), (d, -c - d)), ((-1, 1, -1, 0), (-c - d, c))):
            for t, v in enumerate(substitute(monomial(j, w), *sub)):
                if v:
                    key = space.gid(t, cc, dd)
                    three[key] = three.get(key, 0) + v
        assert not any(space.gens_to_vector(three))


@given(
    st.sampled_from(SMALL_SPACES),
    st.integers(min_value=-40, max_value=40),
    st.integers(min_value=1, max_value=40),
    st.integers(min_value=-40, max_value=40),
    st.integers(min_value=1, max_value=40),
)
def test_paths_are_additive(Nk, a, b, c, d):
    space = cached_space(*Nk)
    P = monomial(0, space.w)
    x, y = (a, b), (c, d)
    lhs = [u + v for u, v in zip(space.path_vector(P, x, y), space.path_vector(P, y, "inf"))]
    assert tuple(lhs) == space.path_vector(P, x, "inf")


@given(st.sampled_from(SMALL_SPACES), st.sampled_from([2, 3, 5, 7, 11, 13]), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_hecke_operators_commute(Nk, q1, q2):
    space = cached_space(*Nk)
    A, B = hecke(space, q1), hecke(space, q2)
    assert A @ B == B @ A


@pytest.mark.parametrize("N, k", SMALL_SPACES)
def test_star_decomposition_is_exact(N, k):
    space = cached_space(N, k)
    S = space.star_matrix()
    assert S @ S == RationalMatrix.identity(space.dimension)
    plus, minus = star_split(space)
    assert len(plus) + len(minus) == space.dimension
    for q in (2, 3):
        assert S @ hecke(space, q) == hecke(space, q) @ S
    cusp = space.cuspidal_basis()
    cp, cm = star_split(space, cusp)
    assert len(cp) == len(cm) == len(cusp) // 2


def test_hecke_on_x0_11():
    space = cached_space(11, 2)
    # full space: cusp form with a_2 = -2 (twice) and Eisenstein 1 + 2 = 3
    x = charpoly(hecke(space, 2))
    assert x == [Fraction(c) for c in (-12, -8, 1, 1)]  # (X + 2)^2 (X - 3)
    U = hecke(space, 11)
    assert all(c == 0 for c in (U - RationalMatrix.identity(3)).rows for c in c)


def test_hecke_on_level_one_weight_twelve():
    space = cached_space(1, 12)
    cp = charpoly(hecke(space, 2))
    # roots: tau(2) twice and the Eisenstein eigenvalue 1 + 2^11
    for root in (tau(2), 1 + 2**11):
        assert sum(c * root**i for i, c in enumerate(cp)) == 0


def test_eigen_symbol_and_special_value():
    space = cached_space(11, 2)
    plus = eigen_symbol(space, {2: -2, 3: -1}, 1)
    assert abs(special_value_ratio(plus)) == Fraction(1, 5)
    with pytest.raises(EigenAmbiguityError):
        eigen_symbol(space, {}, 1)


def test_ordinary_projection_of_u_p():
    space = cached_space(11, 2)
    assert ordinary_projection(space, 11).dimension == 3
    space33 = cached_space(33, 2)
    o = ordinary_projection(space33, 3)
    # U_3 has 3 eigenvalues divisible by 3 on M_2(Γ0(33)) (charpoly constant term -27)
    assert o.dimension == space33.dimension - 3
    assert o.rational_basis is None or len(o.rational_basis) == o.dimension


def _poly_product(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


@given(
    st.sampled_from([3, 5, 7]),
    st.lists(st.integers(min_value=-4, max_value=4), min_size=1, max_size=3),
    st.lists(st.integers(min_value=1, max_value=30), min_size=1, max_size=3),
)
def test_unit_root_factor_hensel(p, small, units):
    roots = [p * r for r in small] + [u if u % p else u + 1 for u in units]
    chi = [1]
    for r in roots:
        chi = _poly_product(chi, [-r, 1])
    M = 5
    g, h = unit_root_factor(chi, p, M)
    assert len(g) - 1 == len(units) and len(h) - 1 == len(small)
    assert g[0] % p and all(c % p == 0 for c in h[:-1])
    prod = _poly_product(g, h)
    assert all((a - b) % p**M == 0 for a, b in zip(prod, chi))


def test_budget_error():
    with pytest.raises(DimensionBudgetError):
        build_space(1001, 2, ModSymConfig(max_generators=100))


def test_cache_round_trip_and_corruption(tmp_path):
    space, status = load_or_build(11, 2, tmp_path)
    assert status == "built"
    hecke(space, 2)
    save_space(space, cache_file(tmp_path, 11, 2))
    again, status = load_or_build(11, 2, tmp_path)
    assert status == "loaded"
    assert again.basis == space.basis and hecke(again, 2) == hecke(space, 2)
    path = cache_file(tmp_path, 11, 2)
    path.write_text(path.read_text().replace('"k": 2', '"k": 4'))
    with pytest.raises(CacheCorruptError):
        load_space(path)
    _, status = load_or_build(11, 2, tmp_path)
    assert status == "rebuilt"
    assert load_space(path).dimension == 3
