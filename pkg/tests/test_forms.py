import pytest

from iwalab.forms import (
    E1_52,
    E2_364,
    X0_11,
    DescriptorError,
    NotOrdinaryError,
    ap_curve,
    branch_data,
    congruent_mod_p,
    curve_form,
    delta_form,
    descriptor_from_dict,
    factor,
    frobenius_fingerprint,
    is_prime,
    load_descriptor,
    local_type,
    p_stabilize,
    primes_up_to,
    sturm_bound,
    table_form,
    tau,
    unit_root,
)


def eta_product_coeffs(bound):
    """q-expansion of η(z)^2 η(11z)^2 = q Π (1 - q^n)^2 (1 - q^(11n))^2."""
    c = [0] * (bound + 1)
    c[1] = 1
    for n in range(1, bound + 1):
        for step, power in ((n, 2), (11 * n, 2)):
            if step > bound:
                continue
            for _ in range(power):
                for m in range(bound, step - 1, -1):
                    c[m] -= c[m - step]
    return c


def naive_point_count(E, q):
    count = 1
    for x in range(q):
        for y in range(q):
            if (y * y + E.a1 * x * y + E.a3 * y - x**3 - E.a2 * x * x - E.a4 * x - E.a6) % q == 0:
                count += 1
    return q + 1 - count


def test_curve_traces_match_eta_product():
    coeffs = eta_product_coeffs(200)
    f = curve_form(X0_11, "x0_11")
    for n in range(1, 201):
        assert f.a_n(n) == coeffs[n], n


@pytest.mark.parametrize("E", [E1_52, E2_364])
def test_curve_traces_match_naive_count(E):
    for q in primes_up_to(60):
        if E.conductor % q == 0 and q != 7:
            continue
        assert ap_curve(E, q) == naive_point_count(E, q)


def test_a_1321_of_x0_11():
    # two independent routes: Legendre-sum point count and the eta-product expansion
    assert ap_curve(X0_11, 1321) == 47
    assert eta_product_coeffs(1321)[1321] == 47


@pytest.mark.parametrize("n, value", [(1, 1), (2, -24), (3, 252), (5, 4830), (7, -16744), (11, 534612), (4, -1472)])
def test_tau(n, value):
    assert tau(n) == value


def test_hasse_bound():
    f = curve_form(E1_52, "e1")
    for q in primes_up_to(500):
        if 52 % q:
            assert f.a(q) ** 2 <= 4 * q


def test_reduction_types_of_e2():
    # 364 = 2^2 7 13: additive at 2, multiplicative at 7 and 13
    assert E2_364.reduction_type(2) == "additive"
    assert E2_364.reduction_type(7) == "split"
    assert E2_364.reduction_type(13) == "nonsplit"
    f = curve_form(E2_364, "e2")
    assert (f.a(2), f.a(7), f.a(13)) == (0, 1, -1)
    assert local_type(f, 7) == "special" and local_type(f, 2) == "supercuspidal-proxy"


def test_congruences_of_the_examples():
    assert congruent_mod_p(curve_form(X0_11), delta_form(), 11)
    assert congruent_mod_p(curve_form(E1_52), curve_form(E2_364), 5)
    res = congruent_mod_p(curve_form(X0_11), curve_form(E1_52), 5)
    assert not res and res.witness is not None


def test_sturm_bound_values():
    assert sturm_bound([11, 1], 12, 11) == 1452
    assert sturm_bound([52, 364], 2, 5) == 3360


def test_unit_root():
    for ap, p, k in ((2, 5, 2), (-24, 11, 12), (1, 7, 2)):
        a = unit_root(ap, p, k, 6)
        assert (a * a - ap * a + p ** (k - 1)) % p**6 == 0 and a % p
    with pytest.raises(NotOrdinaryError):
        unit_root(10, 5, 2, 3)


def test_p_stabilize():
    d = p_stabilize(delta_form(), 11, 3)
    assert d.is_p_stabilized and d.level == 11 and d.alpha == 881
    x = p_stabilize(curve_form(X0_11), 11, 3)
    assert not x.is_p_stabilized and x.alpha == 1
    with pytest.raises(NotOrdinaryError):
        p_stabilize(table_form(11, 2, {2: 0, 3: 0, 5: 0}), 5, 3)


def test_fingerprint_and_branch():
    f = curve_form(E1_52)
    assert frobenius_fingerprint(f, 5, 7) == (3, 2)
    b = branch_data(f, 5)
    assert b.tame_level == 52 and 7 in b.frobenius_table and 2 in b.bad_primes
    with pytest.raises(ValueError):
        frobenius_fingerprint(f, 5, 13)


def test_factor_and_primes():
    assert factor(364) == {2: 2, 7: 1, 13: 1}
    assert primes_up_to(20) == (2, 3, 5, 7, 11, 13, 17, 19)
    assert is_prime(1321) and not is_prime(1323)


def test_bundled_descriptors(tmp_path):
    from iwalab.experiments import data_path

    for name, N, k in (("x0_11", 11, 2), ("delta_11", 1, 12), ("e1_52", 52, 2), ("e2_364", 364, 2)):
        f = load_descriptor(data_path(name + ".toml"))
        assert (f.name, f.N, f.k) == (name, N, k)


@pytest.mark.parametrize(
    "d",
    [
        {"kind": "curve", "ainvs": ["0", "-1", "1", "-10"], "conductor": "11"},
        {"kind": "curve", "ainvs": ["0", "-1", "1", "-10", "-20"], "conductor": "13"},
        {"kind": "curve", "ainvs": ["0", "x", "1", "-10", "-20"], "conductor": "11"},
        {"kind": "curve", "ainvs": ["0", "0", "0", "0", "0"], "conductor": "1"},
        {"kind": "table", "level": "11"},
        {"kind": "modular"},
    ],
)
def test_malformed_descriptors(d):
    with pytest.raises(DescriptorError):
        descriptor_from_dict(d)


def test_malformed_toml(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("kind = curve\n")
    with pytest.raises(DescriptorError):
        load_descriptor(bad)


def test_table_descriptor():
    f = descriptor_from_dict({"kind": "table", "level": "11", "weight": "2",
                              "eigenvalues": [["2", "-2"], ["3", "-1"]]})
    assert f.a(2) == -2 and f.a_n(4) == 2
    with pytest.raises(KeyError):
        f.a(5)
