"""Invariant transfer between congruent ordinary eigenforms.

Reciprocal Euler factors E_ell(X) = 1 - a_ell X + ell^(k-1) X^2 (good ell) or
1 - a_ell X (bad ell) are evaluated at X = kappa * (1+T)^(-e(ell)), where
<ell> = gamma^e(ell).  The default ("analytic") normalization takes
kappa = ell^-1 ω^-i(ell): it is the one for which removing the Euler factor
from the measure is an exact identity of Mazur-Tate elements.  The "literal"
variant drops the ell^-1 and is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .arith import ResidueInt, valuation
from .forms import (
    BranchData,
    EigenformDescriptor,
    branch_data,
    congruent_mod_p,
    factor,
    ord_p,
    primes_up_to,
)
from .padic import (
    UNDETERMINED,
    LambdaSeries,
    binomial_power,
    decompose,
    invariants,
    multiply,
    teichmuller,
)
from .plfun import PadicLFunction, pl_function

VARIANTS = ("analytic", "literal")
Undetermined = str
MaybeInt = Union[int, Undetermined]


@dataclass(frozen=True)
class EulerFactor:
    ell: int
    degree: int
    a: int
    c: int
    includes_quadratic_term: bool

    def coefficients(self) -> tuple[int, ...]:
        if self.includes_quadratic_term:
            return (1, -self.a, self.c)
        return (1, -self.a)


def euler_factor(branch: BranchData, ell: int) -> EulerFactor:
    p = branch.p
    if ell == p:
        raise ValueError("E_p is 1 - U_p X and does not enter the transfer sums")
    f = branch.member
    a = f.a(ell)
    if branch.tame_level % ell == 0:
        return EulerFactor(ell, 1, a, 0, False)
    return EulerFactor(ell, 2, a, ell ** (f.k - 1), True)


@dataclass(frozen=True)
class Places:
    count: int
    u: ResidueInt
    n: int


def primes_above(ell: int, p: int, M: int = 4) -> Places:
    """Number of primes of the cyclotomic Z_p-extension over ell, with
    ell^-1 ω(ell) = gamma^(u p^n)."""
    if ell % p == 0:
        raise ValueError("ell must differ from p")
    while True:
        dec = decompose(ell, p, M)
        e = (-dec.exponent.value) % p ** (M - 1)
        if e:
            n = dec.wild_valuation
            u = ResidueInt(e // p**n, p, M - 1 - n)
            return Places(p**n, u, n)
        M += 2


def _kappa(ell: int, p: int, i: int, M: int, variant: str) -> int:
    mod = p**M
    tw = pow(teichmuller(ell, p, M), -i % (p - 1), mod)
    if variant == "analytic":
        return tw * pow(ell, -1, mod) % mod
    if variant == "literal":
        return tw
    raise ValueError(f"unknown variant {variant!r}")


def euler_series(ef: EulerFactor, p: int, i: int, D: int, M: int = 1, variant: str = "analytic") -> LambdaSeries:
    """E_ell(kappa (1+T)^(-e)) as a truncated series mod p^M."""
    # enough digits of e that every binomial coefficient below D is exact mod p^M
    fact_val = int(valuation(math.factorial(max(D - 1, 1)), p))
    P = M + fact_val + 1
    dec = decompose(ef.ell, p, P + 1)
    e = dec.exponent.value
    kappa = _kappa(ef.ell, p, i, M, variant)
    mod = p**M
    X = binomial_power(ResidueInt(-e, p, P), D, M=M).scale(kappa)
    coeffs = [0] * D
    coeffs[0] = 1
    out = LambdaSeries(p, M, coeffs)
    terms = [(-ef.a, X)]
    if ef.includes_quadratic_term:
        terms.append((ef.c, multiply(X, X)))
    acc = list(out.coeffs)
    for c, s in terms:
        for t, v in enumerate(s.coeffs):
            acc[t] = (acc[t] + c * v) % mod
    return LambdaSeries(p, M, acc)


def e_ell(branch: BranchData, ell: int, i: int, D: int | None = None, variant: str = "analytic") -> MaybeInt:
    """lambda of the Euler factor at ell after substitution, read mod p."""
    p = branch.p
    ef = euler_factor(branch, ell)
    if D is None:
        D = 2 * p ** (primes_above(ell, p).n + 1)
    rep = invariants(euler_series(ef, p, i, D, 1, variant))
    if not rep.certified:
        return UNDETERMINED
    return rep.lam


def e_ell_oracle(ef: EulerFactor, p: int, i: int, variant: str = "analytic") -> int:
    """Independent count: each residual root r of the Euler factor with
    r kappa ≡ 1 mod p contributes p^n."""
    kappa = _kappa(ef.ell, p, i, 1, variant)
    n = primes_above(ef.ell, p).n
    a, c = ef.a % p, ef.c % p
    total = 0
    if ef.includes_quadratic_term:
        # roots of X^2 - a X + c over F_p, with multiplicity
        roots = [r for r in range(p) for _ in range(_root_multiplicity(r, a, c, p))]
    else:
        roots = [a] if a else []
    for r in roots:
        if r * kappa % p == 1:
            total += p**n
    return total


def _root_multiplicity(r: int, a: int, c: int, p: int) -> int:
    if (r * r - a * r + c) % p:
        return 0
    return 2 if (2 * r - a) % p == 0 else 1


# -- level raising -------------------------------------------------------------------------

DELTA_BY_CASE = {1: 1, 2: 1, 3: 2, 4: 1}


@dataclass(frozen=True)
class LevelRaisingHit:
    ell: int
    cases: tuple[int, ...]
    i_values: tuple[int, ...]
    predicted_levels: dict
    predicted_delta: dict
    places: int

    def to_dict(self) -> dict:
        return {
            "l": self.ell,
            "cases": list(self.cases),
            "i_values": list(self.i_values),
            "predicted_levels": {str(c): v for c, v in self.predicted_levels.items()},
            "predicted_delta": {str(c): v for c, v in self.predicted_delta.items()},
            "places": self.places,
        }


def level_raising_cases(a: int, c: int, ell: int, p: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Which of the four mod-p conditions hold for residual data (a, c) at ell."""
    a, c, l = a % p, c % p, ell % p
    cases = []
    i_vals = tuple(
        i for i in range(p - 1)
        if (a - pow(l, -i % (p - 1), p) - pow(l, (1 - i) % (p - 1), p)) % p == 0
        and (c - pow(l, (1 - 2 * i) % (p - 1), p)) % p == 0
    )
    if i_vals:
        cases.append(1)
    if l == 1 and a == (c + 1) % p:
        cases.append(2)
    if l == 1 and a == 2 % p and c == 1:
        cases.append(3)
    if l == p - 1 and a == 0 and c == p - 1:
        cases.append(4)
    return tuple(cases), i_vals


def level_raising_scan(f: EigenformDescriptor, p: int, lmax: int) -> list[LevelRaisingHit]:
    """Primes ell <= lmax, ell ∤ N p, where the residual data allow a raised branch."""
    hits = []
    tame = f.N // p ** ord_p(f.N, p)
    for ell in primes_up_to(lmax):
        if (f.N * p) % ell == 0:
            continue
        a, c = f.a(ell), pow(ell, f.k - 1, p)
        cases, i_vals = level_raising_cases(a, c, ell, p)
        if not cases:
            continue
        levels = {cs: tame * ell ** (1 if cs in (1, 2) else 2) for cs in cases}
        deltas = {cs: DELTA_BY_CASE[cs] for cs in cases}
        hits.append(LevelRaisingHit(ell, cases, i_vals, levels, deltas, primes_above(ell, p).count))
    return hits


def first_case_prime(hits: Sequence[LevelRaisingHit], case: int) -> int | None:
    return next((h.ell for h in hits if case in h.cases), None)


# -- transfer checks ---------------------------------------------------------------------------

@dataclass
class MuReport:
    mu1: MaybeInt
    mu2: MaybeInt
    consistent: Union[bool, str]

    def to_dict(self) -> dict:
        return {"mu1": self.mu1, "mu2": self.mu2, "consistent": self.consistent}


def mu_transfer_check(L1: PadicLFunction, L2: PadicLFunction) -> MuReport:
    """mu(f1) = 0 iff mu(f2) = 0 for congruent forms; False would be a bug."""
    m1, m2 = L1.invariants.mu, L2.invariants.mu
    if UNDETERMINED in (m1, m2):
        return MuReport(m1, m2, UNDETERMINED)
    return MuReport(m1, m2, (m1 == 0) == (m2 == 0))


@dataclass
class PrimeContribution:
    ell: int
    e1: MaybeInt
    e2: MaybeInt
    places: int
    case: tuple
    e1_literal: MaybeInt = None
    e2_literal: MaybeInt = None

    def to_dict(self) -> dict:
        return {"l": self.ell, "e1": self.e1, "e2": self.e2, "places": self.places,
                "case": list(self.case), "e1_literal": self.e1_literal, "e2_literal": self.e2_literal}


@dataclass
class TransferReport:
    f1: str
    f2: str
    p: int
    i: int
    lambda1: MaybeInt
    lambda2: MaybeInt
    mu1: MaybeInt
    mu2: MaybeInt
    primes: list
    lhs: MaybeInt
    rhs: MaybeInt
    balanced: Union[bool, str]
    certification: dict

    def to_dict(self) -> dict:
        return {
            "f1": self.f1, "f2": self.f2, "p": self.p, "i": self.i,
            "lambda1": self.lambda1, "lambda2": self.lambda2, "mu1": self.mu1, "mu2": self.mu2,
            "primes": [c.to_dict() for c in self.primes],
            "lhs": self.lhs, "rhs": self.rhs, "balanced": self.balanced,
            "certification": self.certification,
        }

    def table(self) -> dict:
        return {c.ell: (c.e1, c.e2) for c in self.primes}


def _case_at(f1: EigenformDescriptor, f2: EigenformDescriptor, ell: int, p: int) -> tuple:
    for f in (f1, f2):
        if f.N % ell:
            cases, _ = level_raising_cases(f.a(ell), pow(ell, f.k - 1, p), ell, p)
            return cases
    return ()


def lambda_transfer_check(f1: EigenformDescriptor, f2: EigenformDescriptor, p: int, i: int = 0,
                          n: int = 3, M: int = 3, L1: PadicLFunction | None = None,
                          L2: PadicLFunction | None = None, check_congruence: bool = True) -> TransferReport:
    """Compare lambda1 - lambda2 with Σ_{ell | N1 N2, ell != p} e_ell(f2) - e_ell(f1)."""
    cert: dict = {"assumes": "irreducible residual representation; congruence tested up to the Sturm bound",
                  "normalization": "periods fixed up to p-adic unit"}
    if check_congruence:
        cong = congruent_mod_p(f1, f2, p)
        cert["congruence"] = {"congruent": cong.congruent, "cap": cong.cap, "witness": cong.witness}
        if not cong.congruent:
            return TransferReport(f1.name, f2.name, p, i, UNDETERMINED, UNDETERMINED, UNDETERMINED,
                                  UNDETERMINED, [], UNDETERMINED, UNDETERMINED, "inapplicable", cert)
    L1 = L1 or pl_function(f1, p, i, n, M)
    L2 = L2 or pl_function(f2, p, i, n, M)
    b1, b2 = branch_data(f1, p), branch_data(f2, p)
    ells = sorted((set(factor(f1.N)) | set(factor(f2.N))) - {p})
    contributions = []
    for ell in ells:
        e1 = e_ell(b1, ell, i)
        e2 = e_ell(b2, ell, i)
        contributions.append(PrimeContribution(
            ell, e1, e2, primes_above(ell, p).count, _case_at(f1, f2, ell, p),
            e_ell(b1, ell, i, variant="literal"), e_ell(b2, ell, i, variant="literal")))
    lam1, lam2 = L1.invariants.lam, L2.invariants.lam
    mu1, mu2 = L1.invariants.mu, L2.invariants.mu
    cert["lambda1_certified"] = L1.invariants.certified
    cert["lambda2_certified"] = L2.invariants.certified
    lhs = UNDETERMINED if UNDETERMINED in (lam1, lam2) else lam1 - lam2
    es = [x for c in contributions for x in (c.e1, c.e2)]
    rhs = UNDETERMINED if UNDETERMINED in es else sum(c.e2 - c.e1 for c in contributions)
    if UNDETERMINED in (mu1, mu2):
        balanced: Union[bool, str] = UNDETERMINED
    elif mu1 != 0 or mu2 != 0:
        balanced = "inapplicable"
    elif UNDETERMINED in (lhs, rhs):
        balanced = UNDETERMINED
    else:
        balanced = lhs == rhs
    return TransferReport(f1.name, f2.name, p, i, lam1, lam2, mu1, mu2, contributions, lhs, rhs, balanced, cert)


@dataclass
class DeltaIdentityReport:
    ell: int
    places: int
    delta1: MaybeInt
    delta2: MaybeInt
    delta_side: MaybeInt
    e_side: MaybeInt
    holds: Union[bool, str]
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _raised_delta(minimal: EigenformDescriptor, raised_ord: int, ell: int, p: int, i: int) -> MaybeInt:
    cases, i_vals = level_raising_cases(minimal.a(ell), pow(ell, minimal.k - 1, p), ell, p)
    if raised_ord == 1:
        if 1 in cases and i in i_vals:
            return 1
        if 2 in cases:
            return 1
    if raised_ord == 2:
        if 3 in cases:
            return 2
        if 4 in cases:
            return 1
    return UNDETERMINED


def delta_identity_check(f1: EigenformDescriptor, f2: EigenformDescriptor | None, p: int, i: int, ell: int,
                         raised_case: int | None = None, deltas: tuple | None = None) -> DeltaIdentityReport:
    """Check Σ_v δ_v(f1) - δ_v(f2) = e_ell(f2) - e_ell(f1).

    δ of a form unramified at ell is taken as 0; δ of a raised form comes from
    the matching level-raising case (or explicit ``deltas``).  With f2 = None a
    hypothetical case-(3)/(4) raised branch (tame level N ell^2, trivial Euler
    factor at ell) stands in for f2.
    """
    places = primes_above(ell, p).count
    b1 = branch_data(f1, p)
    e1 = e_ell(b1, ell, i)
    if f2 is None:
        if raised_case not in (3, 4):
            raise ValueError("hypothetical raised branches are supported for cases 3 and 4 only")
        cases, _ = level_raising_cases(f1.a(ell), pow(ell, f1.k - 1, p), ell, p)
        if raised_case not in cases:
            return DeltaIdentityReport(ell, places, 0, UNDETERMINED, UNDETERMINED, UNDETERMINED, UNDETERMINED,
                                       f"case {raised_case} does not hold at {ell}")
        e2: MaybeInt = 0  # a_ell = 0 at level N ell^2
        d1, d2 = 0, DELTA_BY_CASE[raised_case]
    else:
        e2 = e_ell(branch_data(f2, p), ell, i)
        if deltas is not None:
            d1, d2 = deltas
        else:
            o1, o2 = ord_p(f1.N, ell), ord_p(f2.N, ell)
            if o1 == o2:
                d1 = d2 = 0 if o1 == 0 else UNDETERMINED
                if o1 and f1.a(ell) % p == f2.a(ell) % p:
                    d1 = d2 = 0  # identical local data contribute nothing
            elif o1 == 0:
                d1, d2 = 0, _raised_delta(f1, o2, ell, p, i)
            elif o2 == 0:
                d1, d2 = _raised_delta(f2, o1, ell, p, i), 0
            else:
                d1 = d2 = UNDETERMINED
    if UNDETERMINED in (d1, d2):
        return DeltaIdentityReport(ell, places, d1, d2, UNDETERMINED, _diff(e2, e1), UNDETERMINED, "analytic-only")
    delta_side = places * (d1 - d2)
    e_side = _diff(e2, e1)
    holds = UNDETERMINED if e_side == UNDETERMINED else delta_side == e_side
    return DeltaIdentityReport(ell, places, d1, d2, delta_side, e_side, holds)


def _diff(a: MaybeInt, b: MaybeInt) -> MaybeInt:
    if UNDETERMINED in (a, b):
        return UNDETERMINED
    return a - b


def predicted_lambda(base_lambda: int, hit: LevelRaisingHit, case: int) -> int:
    """lambda of the raised branch, assuming the base branch has δ = 0 at ell."""
    return base_lambda + hit.places * hit.predicted_delta[case]


# -- non-primitive comparison ---------------------------------------------------------------

def euler_group_ring_factor(f: EigenformDescriptor, ell: int, p: int, n: int, M: int,
                            variant: str = "analytic") -> dict:
    """E_ell(kappa [ell]^-1) in Z/p^M[(Z/p^n)^x]; the ω^-i twist comes from [ell]^-1."""
    mod, base = p**M, p**n
    kappa = pow(ell, -1, mod) if variant == "analytic" else 1
    linv = pow(ell, -1, base)
    a = f.a(ell)
    out = {1: 1}
    out[linv] = (out.get(linv, 0) - a * kappa) % mod
    if f.N % ell:
        g = linv * linv % base
        out[g] = (out.get(g, 0) + ell ** (f.k - 1) * kappa * kappa) % mod
    return out


def group_ring_multiply(x: dict, y: dict, p: int, n: int, M: int) -> dict:
    mod, base = p**M, p**n
    out: dict[int, int] = {}
    for a, u in x.items():
        for b, v in y.items():
            key = a * b % base
            out[key] = (out.get(key, 0) + u * v) % mod
    return {k: v for k, v in out.items() if v}


@dataclass
class NonPrimitiveReport:
    form: str
    p: int
    i: int
    sigma: tuple
    n: int
    M: int
    scalar: MaybeInt
    identity_in_group_ring: bool
    identity_in_series: bool
    lambda_f: MaybeInt
    lambda_sigma: MaybeInt
    e_sum: MaybeInt
    lambda_additive: Union[bool, str]
    literal_identity_in_group_ring: bool

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["sigma"] = list(self.sigma)
        return d


def nonprimitive_comparison(f: EigenformDescriptor, p: int, i: int, sigma: Sequence[int], n: int = 2,
                            M: int = 3) -> NonPrimitiveReport:
    """Check L^Sigma = c * L_p(f) * Π E_ell for one scalar unit c, in the group ring and as series."""
    from .plfun import group_ring_to_series, nonprimitive_pl

    sigma = tuple(sorted(set(sigma)))
    Lf = pl_function(f, p, i, n, M)
    Lg = nonprimitive_pl(f, p, i, sigma, n, M)
    mod = p**M

    def product(variant):
        gr = dict(Lf.theta.values)
        for ell in sigma:
            gr = group_ring_multiply(gr, euler_group_ring_factor(f, ell, p, n, M, variant), p, n, M)
        return gr

    def solve_scalar(gr):
        s = group_ring_to_series(gr, p, n, M, i)
        j = next((j for j, c in enumerate(s.coeffs) if c % p), None)
        if j is None:
            return None, s
        return Lg.series.coeffs[j] * pow(s.coeffs[j], -1, mod) % mod, s

    def holds(gr, c):
        keys = set(gr) | set(Lg.theta.values)
        return all((c * gr.get(a, 0) - Lg.theta.values.get(a, 0)) % mod == 0 for a in keys)

    gr = product("analytic")
    c, s = solve_scalar(gr)
    in_series = c is not None and all((c * u - v) % mod == 0 for u, v in zip(s.coeffs, Lg.series.coeffs))
    in_ring = c is not None and holds(gr, c)
    gr_lit = product("literal")
    c_lit, _ = solve_scalar(gr_lit)
    lit_ring = c_lit is not None and holds(gr_lit, c_lit)
    branch = branch_data(f, p)
    es = [e_ell(branch, ell, i) for ell in sigma]
    e_sum = UNDETERMINED if UNDETERMINED in es else sum(es)
    lf, lg = Lf.invariants.lam, Lg.invariants.lam
    if UNDETERMINED in (lf, lg, e_sum):
        additive: Union[bool, str] = UNDETERMINED
    else:
        additive = lg == lf + e_sum
    return NonPrimitiveReport(f.name, p, i, sigma, n, M, UNDETERMINED if c is None else c, in_ring, in_series,
                              lf, lg, e_sum, additive, lit_ring)
