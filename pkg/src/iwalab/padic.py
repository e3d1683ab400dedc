"""Capped-precision p-adic units and truncated power series in Λ = Z_p[[T]].

The topological generator of 1 + pZ_p is fixed to ``gamma = 1 + p`` and
``T = <gamma> - 1``.  A :class:`LambdaSeries` read off from a Mazur-Tate
element of level n is only faithful modulo ((1+T)^{p^{n-1}} - 1, p^M); its
``precision`` tuple records, per coefficient, how many p-adic digits agree
with the limiting power series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .arith import ResidueInt, to_residue, valuation

INF = float("inf")
UNDETERMINED = "undetermined"


class NonUnitError(ValueError):
    pass


def gamma(p: int) -> int:
    return 1 + p


def teichmuller(x, p: int, M: int) -> int:
    """Teichmuller lift of x mod p, as an integer mod p^M (x^(p^(M-1)))."""
    mod = p**M
    t = to_residue(x, mod)
    if t % p == 0:
        raise NonUnitError(f"{x} is not a {p}-adic unit")
    for _ in range(M - 1):
        t = pow(t, p, mod)
    return t


def padic_log(u, p: int, M: int) -> int:
    """log_p(u) mod p^M for u ≡ 1 mod p (u given mod p^M)."""
    mod = p**M
    y = (to_residue(u, mod) - 1) % mod
    if y % p:
        raise ValueError("padic_log needs a 1-unit")
    if y == 0:
        return 0
    # terms y^k/k have valuation >= k - v_p(k); stop once that exceeds M for good
    total = Fraction(0)
    k = 1
    while True:
        if k - math.log(k, p) >= M + 1 and k > M:
            break
        total += Fraction((-1) ** (k + 1) * y**k, k)
        k += 1
    return to_residue(total, mod)


def discrete_log_gamma(u, p: int, M: int) -> int:
    """e mod p^(M-1) with (1+p)^e ≡ u mod p^M, via the p-adic logarithm."""
    if M <= 1:
        return 0
    lu = padic_log(u, p, M)
    lg = padic_log(gamma(p), p, M)
    mod = p ** (M - 1)
    return (lu // p) * pow(lg // p, -1, mod) % mod


def discrete_log_exhaustive(u, p: int, M: int) -> int:
    """Same as :func:`discrete_log_gamma` by exhaustive search (small M only)."""
    if M <= 1:
        return 0
    mod = p**M
    target = to_residue(u, mod)
    g = gamma(p)
    acc = 1
    for e in range(p ** (M - 1)):
        if acc == target:
            return e
        acc = acc * g % mod
    raise ValueError(f"{u} is not in 1 + {p}Z_{p}")


@dataclass(frozen=True)
class CycloDecomposition:
    """x = teich_component * gamma^exponent in Z_p^x, to precision p^M."""

    p: int
    M: int
    teich_component: ResidueInt
    exponent: ResidueInt
    wild_valuation: Union[int, float]

    def reconstruct(self) -> ResidueInt:
        g = ResidueInt(gamma(self.p), self.p, self.M)
        return self.teich_component * g ** self.exponent.value


def decompose(x, p: int, M: int) -> CycloDecomposition:
    if p == 2:
        raise ValueError("p must be odd")
    t = teichmuller(x, p, M)
    mod = p**M
    one_unit = to_residue(x, mod) * pow(t, -1, mod) % mod
    e = discrete_log_gamma(one_unit, p, M)
    if M - 1 > 0 and e % p ** (M - 1):
        n = int(valuation(e, p))
    else:
        n = INF
    return CycloDecomposition(p, M, ResidueInt(t, p, M), ResidueInt(e, p, max(M - 1, 0)), n)


def one_unit_part(x, p: int, M: int) -> int:
    """<x> = x / omega(x) mod p^M."""
    mod = p**M
    return to_residue(x, mod) * pow(teichmuller(x, p, M), -1, mod) % mod


# -- Λ-series ------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaSeries:
    """Truncated power series sum_{j<D} c_j T^j with coefficients in Z/p^M."""

    p: int
    M: int
    coeffs: tuple
    source_level: int = 0
    precision: tuple = field(default=None)

    def __post_init__(self):
        mod = self.p**self.M
        object.__setattr__(self, "coeffs", tuple(int(c) % mod for c in self.coeffs))
        prec = self.precision
        if prec is None:
            prec = (self.M,) * len(self.coeffs)
        prec = tuple(min(int(q), self.M) for q in prec)
        if len(prec) != len(self.coeffs):
            raise ValueError("precision length must match coefficients")
        object.__setattr__(self, "precision", prec)
        n = self.source_level
        if n >= 1 and len(self.coeffs) > self.p ** (n - 1):
            raise ValueError(f"D={len(self.coeffs)} exceeds p^(n-1) for source level {n}")

    @property
    def D(self) -> int:
        return len(self.coeffs)

    @property
    def modulus(self) -> int:
        return self.p**self.M

    def residues(self) -> list[ResidueInt]:
        return [ResidueInt(c, self.p, self.M) for c in self.coeffs]

    def valuations(self) -> list[int]:
        """Coefficient valuations, each capped at its precision."""
        out = []
        for c, q in zip(self.coeffs, self.precision):
            v = valuation(c, self.p)
            out.append(q if v == INF else min(int(v), q))
        return out

    def truncate(self, D: int) -> "LambdaSeries":
        return LambdaSeries(self.p, self.M, self.coeffs[:D], self.source_level, self.precision[:D])

    def reduce(self, M: int) -> "LambdaSeries":
        M = min(M, self.M)
        return LambdaSeries(self.p, M, self.coeffs, self.source_level, self.precision)

    def scale(self, c) -> "LambdaSeries":
        c = to_residue(c, self.modulus)
        return LambdaSeries(self.p, self.M, [c * a for a in self.coeffs], self.source_level, self.precision)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "M": self.M,
            "D": self.D,
            "source_level": self.source_level,
            "coefficients": [str(c) for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LambdaSeries":
        return cls(int(d["p"]), int(d["M"]), [int(c) for c in d["coefficients"]], int(d["source_level"]))

    @classmethod
    def constant(cls, c, p: int, M: int, D: int) -> "LambdaSeries":
        return cls(p, M, [to_residue(c, p**M)] + [0] * (D - 1))


def theta_precision(p: int, n: int, M: int, D: int) -> tuple:
    """Digits of agreement between a level-n Mazur-Tate series and its limit.

    The difference is a multiple of (1+T)^{p^{n-1}} - 1, whose T^j coefficient
    has valuation n - 1 - v_p(j) >= n - 1 - floor(log_p j).
    """
    out = [M]
    for j in range(1, D):
        out.append(max(0, min(M, n - 1 - int(math.floor(math.log(j, p) + 1e-12)))))
    return tuple(out)


def content(s: LambdaSeries) -> int:
    """Min p-valuation of the known coefficients, capped at M (M means undetermined)."""
    vals = [valuation(c, s.p) for c in s.coeffs]
    finite = [int(v) for v in vals if v != INF]
    return min(finite + [s.M])


@dataclass(frozen=True)
class InvariantReport:
    mu: Union[int, str]
    lam: Union[int, str]
    certified: bool
    witness_degree: Union[int, None]

    def to_dict(self) -> dict:
        return {"mu": self.mu, "lambda": self.lam, "certified": self.certified,
                "witness_degree": self.witness_degree}


def invariants(s: LambdaSeries) -> InvariantReport:
    """mu and lambda with certification; never guesses.

    mu is the least visible valuation, certified when no coefficient of lower
    precision could hide a smaller one; lambda is the first degree carrying
    that valuation, certified when every earlier coefficient is known to have
    strictly larger valuation.
    """
    vals = s.valuations()
    prec = s.precision
    visible = [v for v, q in zip(vals, prec) if v < q]
    if not visible:
        return InvariantReport(UNDETERMINED, UNDETERMINED, False, None)
    mu = min(visible)
    mu_ok = all(q >= mu for v, q in zip(vals, prec) if v >= q)
    lam = next(j for j, (v, q) in enumerate(zip(vals, prec)) if v == mu and v < q)
    lam_ok = all(v > mu or q > mu for v, q in zip(vals[:lam], prec[:lam]))
    if not mu_ok:
        return InvariantReport(UNDETERMINED, UNDETERMINED, False, None)
    if not lam_ok:
        return InvariantReport(mu, UNDETERMINED, False, None)
    return InvariantReport(mu, lam, True, lam)


def _check_compatible(a: LambdaSeries, b: LambdaSeries):
    if a.p != b.p:
        raise ValueError(f"mismatched primes {a.p} and {b.p}")


def multiply(a: LambdaSeries, b: LambdaSeries) -> LambdaSeries:
    """Product truncated at min(D); precision is the min of the inputs'."""
    _check_compatible(a, b)
    M = min(a.M, b.M)
    D = min(a.D, b.D)
    mod = a.p**M
    out = [0] * D
    for i, x in enumerate(a.coeffs[:D]):
        if x:
            for j, y in enumerate(b.coeffs[: D - i]):
                out[i + j] += x * y
    pa, pb = a.precision, b.precision
    prec = []
    lo_a = lo_b = M
    for j in range(D):
        lo_a, lo_b = min(lo_a, pa[j]), min(lo_b, pb[j])
        prec.append(min(lo_a, lo_b))
    return LambdaSeries(a.p, M, [c % mod for c in out], max(a.source_level, b.source_level), prec)


def omega_poly(p: int, n: int) -> list[int]:
    """Coefficients of (1+T)^{p^{n-1}} - 1."""
    P = p ** (n - 1)
    return [0] + [math.comb(P, j) for j in range(1, P + 1)]


def reduce_mod_omega(coeffs: Sequence[int], p: int, n: int, M: int) -> list[int]:
    """Remainder of a polynomial modulo ((1+T)^{p^{n-1}} - 1, p^M)."""
    mod = p**M
    w = omega_poly(p, n)
    P = len(w) - 1
    c = [int(x) % mod for x in coeffs]
    for top in range(len(c) - 1, P - 1, -1):
        q = c[top]
        if q:
            for j in range(P + 1):
                c[top - P + j] = (c[top - P + j] - q * w[j]) % mod
    return (c + [0] * P)[:P]


def multiply_mod_omega(a: LambdaSeries, b: LambdaSeries, n: int) -> LambdaSeries:
    """Product in Z/p^M[T]/((1+T)^{p^{n-1}} - 1); exact for finite-level data."""
    _check_compatible(a, b)
    M = min(a.M, b.M)
    prod = [0] * (a.D + b.D)
    for i, x in enumerate(a.coeffs):
        if x:
            for j, y in enumerate(b.coeffs):
                prod[i + j] += x * y
    coeffs = reduce_mod_omega(prod, a.p, n, M)
    return LambdaSeries(a.p, M, coeffs, n, theta_precision(a.p, n, M, len(coeffs)))


def binom_int(e: int, j: int) -> int:
    """Binomial coefficient C(e, j) for any integer e."""
    if j < 0:
        return 0
    if e >= 0:
        return math.comb(e, j)
    return (-1) ** j * math.comb(j - e - 1, j)


def binomial_power(exponent, D: int, p: int | None = None, M: int | None = None) -> LambdaSeries:
    """(1+T)^exponent truncated at degree D.

    ``exponent`` is an int (exact) or a ResidueInt known mod p^P; in the
    latter case coefficient j is only good to P - v_p(j!) digits.
    """
    if isinstance(exponent, ResidueInt):
        p, P = exponent.p, exponent.M
        M = P if M is None else M
        e = exponent.value
    else:
        if p is None or M is None:
            raise ValueError("p and M are required for an integer exponent")
        P = None
        e = int(exponent)
    mod = p**M
    coeffs = [binom_int(e, j) % mod for j in range(D)]
    if P is None:
        prec = None
    else:
        prec = [max(0, min(M, P - int(valuation(math.factorial(j), p)))) for j in range(D)]
    return LambdaSeries(p, M, coeffs, 0, prec)


def evaluate_at_character(s: LambdaSeries, t0) -> ResidueInt:
    """Horner evaluation at T = t0 (v_p(t0) >= 1).

    For a level-n series the value agrees with the limit modulo
    p^{n-1+v(t0)}, the valuation of (1+t0)^{p^{n-1}} - 1.
    """
    p = s.p
    if isinstance(t0, ResidueInt):
        t0 = t0.value
    vt = valuation(t0, p)
    if vt < 1:
        raise ValueError("evaluation point must be topologically nilpotent")
    mod = s.modulus
    acc = 0
    for c in reversed(s.coeffs):
        acc = (acc * t0 + c) % mod
    vt = s.M if vt == INF else int(vt)
    if s.source_level >= 1:
        good = min(s.M, s.source_level - 1 + vt)
    else:
        good = min([s.M] + [q + j * vt for j, q in enumerate(s.precision)])
        good = min(good, s.D * vt)
    return ResidueInt(acc, p, good)
