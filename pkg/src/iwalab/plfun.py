"""Mazur-Tate elements and one-variable p-adic L-functions of ordinary eigenforms.

The measure attached to an eigen-symbol Phi and unit root alpha is

    mu(a + p^n Z_p) = alpha^-n Phi(Y^(k-2){∞, a/p^n})
                      - [p ∤ level] alpha^-(n+1) p^(k-2) Phi(Y^(k-2){∞, a/p^(n-1)}),

and the ω^i-branch is Σ_a mu(a + p^n) ω^i(a) (1+T)^{e(a)}, where <a> = γ^{e(a)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .arith import ResidueInt, RationalMatrix, to_residue, valuation
from .forms import EigenformDescriptor, NotOrdinaryError, ord_p, primes_up_to, unit_root
from .modsym import (
    EigenAmbiguityError,
    ModSymSpace,
    eigen_functionals,
    hecke,
    load_or_build,
    monomial,
)
from .padic import (
    InvariantReport,
    LambdaSeries,
    decompose,
    invariants,
    teichmuller,
    theta_precision,
)


class SignMismatchError(ValueError):
    pass


# -- symbol providers ------------------------------------------------------------------

_CACHE = {"dir": None}


def set_cache_dir(path) -> None:
    """Persist modular-symbol presentations under ``path`` (None disables)."""
    _CACHE["dir"] = path
    cached_space.cache_clear()


@lru_cache(maxsize=32)
def cached_space(N: int, k: int) -> ModSymSpace:
    return load_or_build(N, k, _CACHE["dir"])[0]


@dataclass
class SymbolValues:
    """A p-adic combination of rational functionals: x -> Σ c_i phi_i(x) mod p^M.

    ``scale`` is the power of p divided out so the values are p-saturated.
    """

    space: ModSymSpace = field(repr=False)
    p: int
    M: int
    gen_values: list = field(repr=False)
    sign: int
    normalization_scale: Fraction = Fraction(1)

    def value(self, poly: Sequence, alpha, beta) -> int:
        combo = self.space.path_combo(poly, alpha, beta)
        mod = self.p**self.M
        return sum(int(v) % mod * self.gen_values[g] for g, v in combo.items() if v) % mod

    def inf_to(self, a: int, m: int) -> int:
        """Value on Y^(k-2){∞, a/m}."""
        return self.value(monomial(0, self.space.w), "inf", (a, m))


def _rational_gen_values(space: ModSymSpace, vec: Sequence[Fraction]) -> list[Fraction]:
    return [sum((vec[b] * x for b, x in d.items()), Fraction(0)) for d in space.gen_to_basis]


def saturate_values(space: ModSymSpace, p: int, M: int, rational_parts, sign: int) -> SymbolValues:
    """Combine rational functionals with p-adic coefficients and p-saturate.

    ``rational_parts`` is a list of (coefficient mod p^M, functional vector).
    Rational generator values are first scaled jointly to be p-integral.
    """
    per_part = [_rational_gen_values(space, vec) for _, vec in rational_parts]
    vmin = min(valuation(v, p) for vals in per_part for v in vals if v)
    shift = -int(vmin)
    scale = Fraction(p) ** shift
    # extra headroom: the combination may cancel some units, so work with extra digits
    extra = M + 4
    mod = p ** (M + extra)
    combined = [0] * space.ngens
    for (c, _), vals in zip(rational_parts, per_part):
        for g, v in enumerate(vals):
            if v:
                combined[g] = (combined[g] + c * to_residue(v * scale, mod)) % mod
    vals_nz = [x for x in combined if x]
    if not vals_nz:
        raise ArithmeticError("functional vanishes on all generators")
    v2 = min(int(valuation(x, p)) for x in vals_nz)
    if v2 >= extra:
        raise ArithmeticError("insufficient precision to saturate the combined functional")
    out = [(x // p**v2) % p**M for x in combined]
    return SymbolValues(space, p, M, out, sign, scale / Fraction(p) ** v2)


def _eigen_map(f: EigenformDescriptor, level: int, p: int, bound: int, extra: Mapping[int, int] | None = None,
               skip: Sequence[int] = ()) -> dict[int, int]:
    out = {}
    for q in primes_up_to(bound):
        if q in skip:
            continue
        if level % q == 0 and f.N % q:
            continue  # U_q at a raised prime: supplied separately
        out[q] = f.a(q)
    if extra:
        out.update(extra)
    return out


def _unique_functional(space: ModSymSpace, emap: Mapping[int, int], sign: int, want_dim: int = 1) -> list[tuple]:
    B = eigen_functionals(space, emap, sign)
    if len(B) != want_dim:
        raise EigenAmbiguityError(f"eigenspace has dimension {len(B)}, expected {want_dim}")
    return B


def symbol_for(f: EigenformDescriptor, p: int, M: int, sign: int, route: str = "auto",
               sigma: Sequence[int] = (), bound: int = 30) -> tuple[SymbolValues, int, bool]:
    """Saturated symbol values, unit root alpha (mod p^M), and whether the
    measure needs the stabilization correction term.

    Routes: "native" (p | N, alpha = a_p), "stabilize" (level N, correction
    term), "level_np" (level N p, alpha-eigenvector cut out by U_p).
    """
    sigma = tuple(sorted(set(sigma)))
    if p in sigma:
        raise ValueError("p may not lie in Sigma")
    level = f.N
    for ell in sigma:
        level *= ell ** (1 if f.N % ell == 0 else 2)
    extra = {ell: 0 for ell in sigma}
    if route == "auto":
        route = "native" if f.N % p == 0 else "stabilize"
    ap = f.a(p)
    if ap % p == 0:
        raise NotOrdinaryError(f"a_{p}({f.name}) ≡ 0 mod {p}: not {p}-ordinary")
    if route == "native":
        if f.N % p:
            raise ValueError("native route needs p | N")
        space = cached_space(level, f.k)
        emap = _eigen_map(f, level, p, bound, extra)
        (vec,) = _unique_functional(space, emap, sign)
        return saturate_values(space, p, M, [(1, vec)], sign), ap % p**M, False
    if route == "stabilize":
        space = cached_space(level, f.k)
        emap = _eigen_map(f, level, p, bound, extra)
        (vec,) = _unique_functional(space, emap, sign)
        alpha = unit_root(ap, p, f.k, M)
        return saturate_values(space, p, M, [(1, vec)], sign), alpha, True
    if route == "level_np":
        if f.N % p == 0:
            raise ValueError("level_np route needs p ∤ N")
        level *= p
        space = cached_space(level, f.k)
        emap = _eigen_map(f, level, p, bound, extra, skip=(p,))
        W = _unique_functional(space, emap, sign, want_dim=2)
        U = hecke(space, p)
        alpha = unit_root(ap, p, f.k, M + 4)
        beta = p ** (f.k - 1) * pow(alpha, -1, p ** (M + 4)) % p ** (M + 4)
        w = W[0]
        uw = U.T @ w
        # (U^T - beta) w lies in the alpha-line
        vals = saturate_values(space, p, M, [(1, uw), (-beta, w)], sign)
        return vals, alpha % p**M, False
    raise ValueError(f"unknown route {route!r}")


# -- Mazur-Tate elements ----------------------------------------------------------------

@dataclass(frozen=True)
class MazurTateElement:
    p: int
    n: int
    M: int
    values: Mapping[int, int] = field(repr=False)
    sign: int

    def push(self, m: int) -> "MazurTateElement":
        """Image at level m <= n (sum over fibres)."""
        if m > self.n or m < 1:
            raise ValueError("can only push to 1 <= m <= n")
        mod, base = self.p**self.M, self.p**m
        out: dict[int, int] = {}
        for a, v in self.values.items():
            out[a % base] = (out.get(a % base, 0) + v) % mod
        return MazurTateElement(self.p, m, self.M, out, self.sign)

    def total(self) -> int:
        return sum(self.values.values()) % self.p**self.M

    def times_group_element(self, g: int, coeff: int = 1) -> dict:
        """coeff * [g] * self as a group-ring dictionary."""
        mod, base = self.p**self.M, self.p**self.n
        return {(a * g) % base: v * coeff % mod for a, v in self.values.items()}


def mazur_tate(sym: SymbolValues, alpha: int, n: int, stabilize: bool = False, k: int | None = None) -> MazurTateElement:
    """alpha^-n-scaled symbol values on {∞, a/p^n}, a in (Z/p^n)^x."""
    p, M = sym.p, sym.M
    mod = p**M
    if alpha % p == 0:
        raise NotOrdinaryError("alpha must be a p-unit")
    k = sym.space.k if k is None else k
    ainv = pow(alpha, -1, mod)
    c0 = pow(ainv, n, mod)
    c1 = pow(ainv, n + 1, mod) * pow(p, k - 2, mod) % mod
    values = {}
    cache_lower: dict[int, int] = {}
    for a in range(p**n):
        if a % p == 0:
            continue
        v = c0 * sym.inf_to(a, p**n)
        if stabilize and c1:
            b = a % p ** (n - 1) if n > 1 else 0
            if b not in cache_lower:
                cache_lower[b] = sym.inf_to(b, p ** (n - 1))
            v -= c1 * cache_lower[b]
        values[a] = v % mod
    return MazurTateElement(p, n, M, values, sym.sign)


@lru_cache(maxsize=64)
def _exponent_table(p: int, n: int, M: int, i: int) -> tuple:
    """For each a in (Z/p^n)^x: (a, ω^i(a) mod p^M, e(a) mod p^(n-1))."""
    out = []
    for a in range(1, p**n):
        if a % p:
            e = decompose(a, p, n).exponent.value if n > 1 else 0
            out.append((a, pow(teichmuller(a, p, M), i, p**M), e))
    return tuple(out)


def group_ring_to_series(values: Mapping[int, int], p: int, n: int, M: int, i: int) -> LambdaSeries:
    """Σ_a v_a ω^i(a) (1+T)^{e(a)} in Z/p^M[T]/((1+T)^{p^(n-1)} - 1)."""
    mod = p**M
    D = p ** (n - 1)
    by_e = [0] * D
    for a, w, e in _exponent_table(p, n, M, i % (p - 1)):
        v = values.get(a, 0)
        if v:
            by_e[e] = (by_e[e] + v * w) % mod
    coeffs = [0] * D
    for e, s in enumerate(by_e):
        if s:
            for j in range(e + 1):
                coeffs[j] = (coeffs[j] + s * math.comb(e, j)) % mod
    return LambdaSeries(p, M, coeffs, n, theta_precision(p, n, M, D))


def to_series(mt: MazurTateElement, i: int) -> LambdaSeries:
    if mt.sign != (-1) ** i:
        raise SignMismatchError(f"sign {mt.sign} does not match (-1)^{i}")
    return group_ring_to_series(mt.values, mt.p, mt.n, mt.M, i)


# -- p-adic L-functions ------------------------------------------------------------------

@dataclass
class PadicLFunction:
    form: EigenformDescriptor = field(repr=False)
    p: int
    i: int
    n: int
    M: int
    series: LambdaSeries
    invariants: InvariantReport
    trivial_zero_flag: bool
    normalization_scale: Fraction
    alpha: int
    route: str
    sigma: tuple = ()
    theta: MazurTateElement | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        inv = self.invariants
        return {
            "form_id": self.form.name,
            "p": self.p,
            "i": self.i,
            "n": self.n,
            "M": self.M,
            "sigma": list(self.sigma),
            "coefficients": [str(c) for c in self.series.coeffs],
            "mu": inv.mu,
            "lambda": inv.lam,
            "certified": inv.certified,
            "trivial_zero": self.trivial_zero_flag,
            "normalization_scale": str(self.normalization_scale),
            "alpha": str(self.alpha),
            "route": self.route,
        }


def trivial_zero(f: EigenformDescriptor, p: int) -> bool:
    return ord_p(f.N, p) == 1 and f.a(p) == 1


def pl_function(f: EigenformDescriptor, p: int, i: int = 0, n: int = 2, M: int = 3, route: str = "auto",
                sigma: Sequence[int] = ()) -> PadicLFunction:
    """L_p(f, ω^i) from the (-1)^i eigen-symbol, to precision (p^M, (1+T)^{p^(n-1)} - 1)."""
    if p == 2 or not 0 <= i <= p - 2:
        raise ValueError("need odd p and 0 <= i <= p-2")
    if n < 1 or M < 1:
        raise ValueError("need n >= 1 and M >= 1")
    sign = (-1) ** i
    sym, alpha, stab = symbol_for(f, p, M, sign, route, sigma)
    mt = mazur_tate(sym, alpha, n, stab, f.k)
    series = to_series(mt, i)
    used = route if route != "auto" else ("native" if f.N % p == 0 else "stabilize")
    return PadicLFunction(f, p, i, n, M, series, invariants(series), trivial_zero(f, p) and not sigma,
                          sym.normalization_scale, alpha, used, tuple(sorted(sigma)), mt)


def mod_p_l_function(f: EigenformDescriptor, p: int, i: int = 0, n: int = 2, route: str = "auto") -> LambdaSeries:
    """Residual series: the L-function reduced mod p."""
    L = pl_function(f, p, i, n, 1, route)
    return L.series


def nonprimitive_pl(f: EigenformDescriptor, p: int, i: int, sigma: Sequence[int], n: int = 2, M: int = 3,
                    route: str = "auto") -> PadicLFunction:
    """L-function of the eigen-system with U_ell = 0 at ell in Sigma (raised level)."""
    return pl_function(f, p, i, n, M, route, sigma)


# -- checks ---------------------------------------------------------------------------------

class QuadraticElement:
    """a + b*alpha in Q(alpha), alpha^2 = t alpha - d."""

    __slots__ = ("a", "b", "t", "d")

    def __init__(self, a, b, t, d):
        self.a, self.b, self.t, self.d = Fraction(a), Fraction(b), t, d

    def __add__(self, o):
        return QuadraticElement(self.a + o.a, self.b + o.b, self.t, self.d)

    def __sub__(self, o):
        return QuadraticElement(self.a - o.a, self.b - o.b, self.t, self.d)

    def __mul__(self, o):
        if not isinstance(o, QuadraticElement):
            return QuadraticElement(self.a * o, self.b * o, self.t, self.d)
        # (a + b x)(c + e x) = ac + (ae + bc) x + be x^2, x^2 = t x - d
        a, b, c, e = self.a, self.b, o.a, o.b
        return QuadraticElement(a * c - b * e * self.d, a * e + b * c + b * e * self.t, self.t, self.d)

    def inverse(self):
        # norm = (a + b x)(a + b x') with x + x' = t, x x' = d
        a, b, t, d = self.a, self.b, self.t, self.d
        norm = a * a + a * b * t + b * b * d
        return QuadraticElement((a + b * t) / norm, -b / norm, t, d)

    def __eq__(self, o):
        return self.a == o.a and self.b == o.b

    def __repr__(self):
        return f"{self.a} + {self.b}*alpha"


def interpolation_check(f: EigenformDescriptor, p: int, sign: int = 1, bound: int = 30) -> tuple:
    """Compare Σ_{a=1}^{p-1} mu(a + pZ_p) with (1 - 1/alpha)^2 Phi({∞, 0}) exactly in Q(alpha).

    Weight 2, p ∤ N.  Returns (lhs, rhs) as QuadraticElement.
    """
    if f.k != 2 or f.N % p == 0:
        raise ValueError("interpolation check is for weight 2 and p ∤ N")
    space = cached_space(f.N, 2)
    emap = _eigen_map(f, f.N, p, bound)
    (vec,) = _unique_functional(space, emap, sign)
    gv = _rational_gen_values(space, vec)

    def phi(a, m):
        combo = space.path_combo([1], "inf", (a, m))
        return sum((Fraction(v) * gv[g] for g, v in combo.items()), Fraction(0))

    t, d = f.a(p), p
    one = QuadraticElement(1, 0, t, d)
    alpha = QuadraticElement(0, 1, t, d)
    ainv = alpha.inverse()
    lhs = QuadraticElement(0, 0, t, d)
    for a in range(1, p):
        lhs = lhs + ainv * phi(a, p) - ainv * ainv * phi(a, 1)
    rhs = (one - ainv) * (one - ainv) * phi(0, 1)
    return lhs, rhs
