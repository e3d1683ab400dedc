"""Modular symbols for Γ0(N) of even weight k via Manin symbols.

A Manin symbol [P, (c:d)] with P = X^j Y^(k-2-j) stands for g(P{0, ∞}) where
g in SL2(Z) has bottom row (c, d).  Matrices act on polynomials on the left by
(gP)(X, Y) = P(dX - bY, -cX + aY), on cusps by Möbius transformations.  The
star involution is induced by diag(-1, 1).

Hecke matrices use the column convention: column i holds the coordinates of
T(b_i).  Eigen-symbols are functionals phi with phi∘T_q = a_q phi, i.e.
vectors in ker(H^T - a_q).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence

from .arith import (
    RationalMatrix,
    charpoly,
    eigenspace,
    integer_kernel,
    kernel,
    poly_eval_matrix,
    rref_rows,
    solve,
    span_basis,
    valuation,
)


class DimensionBudgetError(RuntimeError):
    pass


class EigenAmbiguityError(ValueError):
    """The requested simultaneous eigenspace is not a single line."""


@dataclass(frozen=True)
class ManinGenerator:
    c: int
    d: int
    monomial_index: int


# -- P^1(Z/N) ----------------------------------------------------------------

class P1List:
    """Representatives of P^1(Z/N) = Γ0(N)-cosets of SL2(Z)."""

    def __init__(self, N: int):
        self.N = N
        units = [u for u in range(N) if math.gcd(u, N) == 1]
        self._index: dict[tuple[int, int], int] = {}
        self.reps: list[tuple[int, int]] = []
        for c in range(N):
            for d in range(N):
                if (c, d) in self._index or math.gcd(math.gcd(c, d), N) != 1:
                    continue
                idx = len(self.reps)
                self.reps.append((c, d))
                for u in units:
                    self._index[(u * c % N, u * d % N)] = idx

    def __len__(self) -> int:
        return len(self.reps)

    def index(self, c: int, d: int) -> int:
        return self._index[(c % self.N, d % self.N)]

    def lift_to_sl2(self, c: int, d: int) -> tuple[int, int, int, int]:
        """(a, b, c', d') in SL2(Z) with (c', d') ≡ (c, d) mod N."""
        N = self.N
        c, d = c % N, d % N
        if c == 0:
            c = N
        while math.gcd(c, d) != 1:
            d += N
        g, x, y = _xgcd(d, c)  # x d + y c = 1
        return x, -y, c, d


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# -- polynomial coefficient module ---------------------------------------------

@lru_cache(maxsize=200_000)
def _sub_matrix(a: int, b: int, c: int, d: int, w: int) -> tuple:
    """Images of the monomials X^j Y^(w-j) under P(X, Y) -> P(aX + bY, cX + dY)."""
    out = []
    for j in range(w + 1):
        left = [math.comb(j, i) * a**i * b ** (j - i) for i in range(j + 1)]  # X^i Y^(j-i)
        right = [math.comb(w - j, i) * c**i * d ** (w - j - i) for i in range(w - j + 1)]
        img = [0] * (w + 1)
        for i1, x in enumerate(left):
            if x:
                for i2, y in enumerate(right):
                    if y:
                        img[i1 + i2] += x * y
        out.append(tuple(img))
    return tuple(out)


def substitute(poly: Sequence, a: int, b: int, c: int, d: int) -> list:
    """P(aX + bY, cX + dY) for P given by its X^j Y^(w-j) coefficients."""
    w = len(poly) - 1
    mat = _sub_matrix(a, b, c, d, w)
    out = [0] * (w + 1)
    for j, coef in enumerate(poly):
        if coef:
            for i, v in enumerate(mat[j]):
                if v:
                    out[i] += coef * v
    return out


def act(g: Sequence[int], poly: Sequence) -> list:
    """Left action (gP)(X, Y) = P(dX - bY, -cX + aY)."""
    a, b, c, d = g
    return substitute(poly, d, -b, -c, a)


def monomial(j: int, w: int) -> list[int]:
    v = [0] * (w + 1)
    v[j] = 1
    return v


def convergents(num: int, den: int) -> list[tuple[int, int]]:
    """Convergents p_j/q_j of num/den (den > 0), starting with p_0/q_0."""
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    a, b = num, den
    while b:
        t = a // b
        a, b = b, a - t * b
        p0, q0, p1, q1 = p1, q1, t * p1 + p0, t * q1 + q0
        out.append((p1, q1))
    return out


def _cusp(x) -> tuple[int, int]:
    """Normalize a cusp to (num, den) with den >= 0; (1, 0) is ∞."""
    if isinstance(x, tuple):
        n, d = x
    elif x == "inf" or x is None:
        return (1, 0)
    else:
        x = Fraction(x)
        n, d = x.numerator, x.denominator
    g = math.gcd(n, d)
    n, d = n // g, d // g
    if d < 0 or (d == 0 and n < 0):
        n, d = -n, -d
    return (n, d)


# -- the space -------------------------------------------------------------------

@dataclass(frozen=True)
class ModSymConfig:
    max_generators: int = 20_000


class ModSymSpace:
    """Manin-symbol presentation of M_k(Γ0(N); Q)."""

    def __init__(self, N: int, k: int, config: ModSymConfig = ModSymConfig()):
        if N < 1 or k < 2 or k % 2:
            raise ValueError("need N >= 1 and even k >= 2")
        self.N, self.k, self.w = N, k, k - 2
        self.p1 = P1List(N)
        self.ngens = len(self.p1) * (self.w + 1)
        if self.ngens > config.max_generators:
            raise DimensionBudgetError(f"{self.ngens} Manin generators exceed budget {config.max_generators}")
        self._build()
        self._hecke: dict[int, RationalMatrix] = {}
        self._star: RationalMatrix | None = None
        self._boundary: RationalMatrix | None = None

    # generator ids: i * (w+1) + j for P1 index i and monomial j
    def gid(self, j: int, c: int, d: int) -> int:
        return self.p1.index(c, d) * (self.w + 1) + j

    def generator(self, g: int) -> ManinGenerator:
        i, j = divmod(g, self.w + 1)
        c, d = self.p1.reps[i]
        return ManinGenerator(c, d, j)

    def _build(self):
        w = self.w
        p1 = self.p1
        rep: list = [None] * self.ngens  # (representative gid, sign) or None for zero
        for x in range(self.ngens):
            if rep[x] is not None:
                continue
            i, j = divmod(x, w + 1)
            c, d = p1.reps[i]
            y = self.gid(w - j, d, -c)
            s = (-1) ** j
            if y == x:
                rep[x] = (x, 1) if s == -1 else (x, 0)
            else:
                rep[x] = (x, 1)
                rep[y] = (x, -s)
        free = sorted({r for r, s in rep if s})
        col = {r: n for n, r in enumerate(free)}
        seen = set()
        rows = []
        for x in range(self.ngens):
            i, j = divmod(x, w + 1)
            c, d = p1.reps[i]
            row: dict[int, Fraction] = {}
            terms = [(x, 1)]
            for sub, (cc, dd) in (((0, -1, 1, -1), (d, -c - d)), ((-1, 1, -1, 0), (-c - d, c))):
                img = substitute(monomial(j, w), *sub)
                base = self.gid(0, cc, dd)
                terms.extend((base + t, v) for t, v in enumerate(img) if v)
            for g, v in terms:
                r, s = rep[g]
                if s:
                    row[col[r]] = row.get(col[r], 0) + s * v
            row = {a: Fraction(b) for a, b in row.items() if b}
            key = tuple(sorted(row.items()))
            if row and key not in seen:
                seen.add(key)
                rows.append(row)
        reduced, pivots = rref_rows(rows, len(free))
        pivot_row = dict(zip(pivots, reduced))
        basis_cols = [n for n in range(len(free)) if n not in pivot_row]
        bidx = {n: t for t, n in enumerate(basis_cols)}
        col_vec: list[dict] = []
        for n in range(len(free)):
            if n in bidx:
                col_vec.append({bidx[n]: Fraction(1)})
            else:
                col_vec.append({bidx[m]: -v for m, v in pivot_row[n].items() if m != n})
        self.basis = [free[n] for n in basis_cols]
        self.dimension = len(self.basis)
        self.gen_to_basis: list[dict] = []
        for x in range(self.ngens):
            r, s = rep[x]
            if not s:
                self.gen_to_basis.append({})
            else:
                self.gen_to_basis.append({b: s * v for b, v in col_vec[col[r]].items()})
        self.relation_rows = reduced

    # -- symbols -----------------------------------------------------------
    def gens_to_vector(self, combo: Mapping[int, Fraction]) -> tuple:
        out = [Fraction(0)] * self.dimension
        for g, v in combo.items():
            if v:
                for b, x in self.gen_to_basis[g].items():
                    out[b] += v * x
        return tuple(out)

    def _accumulate_inf_to(self, acc: dict, poly: Sequence, cusp, sign: int = 1):
        """Add sign * P{∞, cusp} to a generator combination."""
        num, den = _cusp(cusp)
        if den == 0:
            return
        prev = (1, 0)
        for j, (p, q) in enumerate(convergents(num, den)):
            # g = [[p, p_prev], [q, q_prev]] maps 0 -> p_prev/q_prev, ∞ -> p/q
            a, b, c, d = p, prev[0], q, prev[1]
            if a * d - b * c == -1:
                a, c = -a, -c
            img = substitute(poly, a, b, c, d)
            base = self.gid(0, c, d)
            for t, v in enumerate(img):
                if v:
                    acc[base + t] = acc.get(base + t, 0) + sign * v
            prev = (p, q)

    def path_combo(self, poly: Sequence, alpha, beta) -> dict:
        """P{alpha, beta} as a combination of Manin generators."""
        acc: dict[int, Fraction] = {}
        self._accumulate_inf_to(acc, poly, beta, 1)
        self._accumulate_inf_to(acc, poly, alpha, -1)
        return acc

    def path_vector(self, poly: Sequence, alpha, beta) -> tuple:
        return self.gens_to_vector(self.path_combo(poly, alpha, beta))

    def basis_symbol(self, i: int) -> ManinGenerator:
        return self.generator(self.basis[i])

    # -- operators ---------------------------------------------------------------
    def _image_matrix(self, image_of_generator) -> RationalMatrix:
        cols = [self.gens_to_vector(image_of_generator(g)) for g in self.basis]
        return RationalMatrix.from_columns(cols, self.dimension)

    def star_matrix(self) -> RationalMatrix:
        if self._star is None:
            def img(g):
                m = self.generator(g)
                return {self.gid(m.monomial_index, -m.c, m.d): (-1) ** m.monomial_index}
            self._star = self._image_matrix(img)
        return self._star

    def hecke_matrix(self, q: int) -> RationalMatrix:
        if q not in self._hecke:
            deltas = [(1, r, 0, q) for r in range(q)]
            if self.N % q:
                deltas.append((q, 0, 0, 1))

            def img(gen):
                m = self.generator(gen)
                a, b, c, d = self.p1.lift_to_sl2(m.c, m.d)
                P = monomial(m.monomial_index, self.w)
                acc: dict[int, Fraction] = {}
                for (x, y, z, t) in deltas:
                    A, B, C, D = x * a + y * c, x * b + y * d, z * a + t * c, z * b + t * d
                    Q = act((A, B, C, D), P)
                    self._accumulate_inf_to(acc, Q, (A, C), 1)
                    self._accumulate_inf_to(acc, Q, (B, D), -1)
                return acc

            self._hecke[q] = self._image_matrix(img)
        return self._hecke[q]

    # -- boundary ------------------------------------------------------------------
    def cusp_classes(self) -> list[int]:
        """Class label of the cusp g∞ for each P^1 index (orbits of (c:d) -> (c:d+c))."""
        n = len(self.p1)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, (c, d) in enumerate(self.p1.reps):
            j = self.p1.index(c, d + c)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        roots = sorted({find(i) for i in range(n)})
        label = {r: t for t, r in enumerate(roots)}
        return [label[find(i)] for i in range(n)]

    def boundary_matrix(self) -> RationalMatrix:
        """Boundary map to formal cusp classes (one coordinate per Γ0(N)-cusp)."""
        if self._boundary is None:
            cls = self.cusp_classes()
            ncusps = max(cls) + 1
            cols = []
            for g in self.basis:
                m = self.generator(g)
                v = [Fraction(0)] * ncusps
                if m.monomial_index == self.w:
                    v[cls[self.p1.index(m.c, m.d)]] += 1
                if m.monomial_index == 0:
                    v[cls[self.p1.index(m.d, -m.c)]] -= 1
                cols.append(v)
            self._boundary = RationalMatrix.from_columns(cols, ncusps)
        return self._boundary

    def generator_boundary(self, g: int) -> tuple:
        cls = self.cusp_classes()
        v = [Fraction(0)] * (max(cls) + 1)
        m = self.generator(g)
        if m.monomial_index == self.w:
            v[cls[self.p1.index(m.c, m.d)]] += 1
        if m.monomial_index == 0:
            v[cls[self.p1.index(m.d, -m.c)]] -= 1
        return tuple(v)

    def cuspidal_basis(self) -> list[tuple]:
        return kernel(self.boundary_matrix())

    def cuspidal_dimension(self) -> int:
        return len(self.cuspidal_basis())

    def boundary_rank(self) -> int:
        return self.boundary_matrix().rank()

    # -- serialization -------------------------------------------------------------
    def to_dict(self) -> dict:
        body = {
            "N": self.N,
            "k": self.k,
            "basis": self.basis,
            "gen_to_basis": [{str(b): str(v) for b, v in d.items()} for d in self.gen_to_basis],
            "hecke": {str(q): [[str(x) for x in r] for r in m.rows] for q, m in sorted(self._hecke.items())},
        }
        body["checksum"] = _checksum(body)
        return body


def build_space(N: int, k: int, config: ModSymConfig = ModSymConfig()) -> ModSymSpace:
    return ModSymSpace(N, k, config)


def hecke(space: ModSymSpace, q: int) -> RationalMatrix:
    """T_q (q ∤ N) or U_q (q | N) on the full space."""
    return space.hecke_matrix(q)


def star_split(space: ModSymSpace, subspace: Sequence[Sequence] | None = None) -> tuple[list, list]:
    """Plus and minus parts of a star-stable subspace (default: everything)."""
    S = space.star_matrix()
    n = space.dimension
    plus = eigenspace(S, 1)
    minus = eigenspace(S, -1)
    if subspace is None:
        return plus, minus
    from .arith import intersect

    return intersect(subspace, plus, n), intersect(subspace, minus, n)


# -- ordinary projection ---------------------------------------------------------

def _poly_mod(a: list[int], m: int) -> list[int]:
    out = [x % m for x in a]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _poly_mul(a, b, m):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_mod(out, m)


def _poly_sub(a, b, m):
    n = max(len(a), len(b))
    return _poly_mod([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)], m)


def _poly_divmod(a, b, m):
    """Division by a polynomial with unit leading coefficient mod m."""
    a = _poly_mod(a, m)
    inv = pow(b[-1], -1, m)
    q = [0] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        t = a[-1] * inv % m
        s = len(a) - len(b)
        q[s] = t
        a = _poly_sub(a, [0] * s + [t * x for x in b], m)
        if len(a) == len(b) + s and a[-1] == 0:
            a.pop()
    return _poly_mod(q, m), a


def _xgcd_mod_p(a, b, p):
    """s, t with s a + t b = 1 mod p (a, b coprime mod p)."""
    r0, r1 = _poly_mod(a, p), _poly_mod(b, p)
    s0, s1, t0, t1 = [1], [0], [0], [1]
    while any(r1):
        q, r = _poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1, p), p)
        t0, t1 = t1, _poly_sub(t0, _poly_mul(q, t1, p), p)
    if len(r0) != 1 or r0[0] == 0:
        raise ValueError("factors are not coprime mod p")
    inv = pow(r0[0], -1, p)
    return [x * inv % p for x in s0], [x * inv % p for x in t0]


def unit_root_factor(chi: Sequence[int], p: int, M: int) -> tuple[list[int], list[int]]:
    """Hensel-split a monic integer polynomial as g*h mod p^M, g(0) unit, h ≡ X^r mod p.

    Coefficients are low-to-high; g is the factor carrying the unit roots.
    """
    chi = [int(x) for x in chi]
    r = 0
    while r < len(chi) - 1 and chi[r] % p == 0:
        r += 1
    h = [0] * r + [1]
    g, rem = _poly_divmod(chi, h, p)
    if any(rem):
        raise ArithmeticError("unexpected remainder in mod-p split")
    if r == 0:
        return _poly_mod(chi, p**M), [1]
    if r == len(chi) - 1:
        return [1], _poly_mod(chi, p**M)
    s, t = _xgcd_mod_p(g, h, p)
    mod = p
    for _ in range(M - 1):
        mod *= p
        e = _poly_sub(chi, _poly_mul(g, h, mod), mod)
        # s e = q h + dh, dg = t e + q g: then g dh + h dg = e (s g + t h) ≡ e, and h stays monic
        q, dh = _poly_divmod(_poly_mul(s, e, mod), h, mod)
        dg = _poly_sub(_poly_mul(t, e, mod), [-x for x in _poly_mul(q, g, mod)], mod)
        g = _poly_sub(g, [-x for x in dg], mod)
        h = _poly_sub(h, [-x for x in dh], mod)
        g = [x % mod for x in g]
    return _poly_mod(g, p**M), _poly_mod(h, p**M)


def _newton_slopes_unit_count(poly: Sequence[Fraction], p: int) -> tuple[int, int]:
    """(# roots of valuation 0, # roots of positive valuation) for a rational polynomial."""
    coeffs = [Fraction(x) for x in poly]
    n = len(coeffs) - 1
    vals = [valuation(c, p) for c in coeffs]
    lead = vals[n]
    # number of roots with positive valuation = largest i with v_i - v_n minimal over [0..n] lower hull
    vmin = min(v for v in vals)
    i_max = max(i for i, v in enumerate(vals) if v == vmin)
    i_min = min(i for i, v in enumerate(vals) if v == vmin)
    # roots of valuation 0 are the segment of slope 0 at the right of the hull
    unit = (n - i_min) if lead == vmin else 0
    return unit, n - unit


@dataclass
class OrdinarySubspace:
    p: int
    dimension: int
    unit_factor: list[int]
    rational_basis: list[tuple] | None
    operator: RationalMatrix = field(repr=False)
    M: int = 6

    def contains(self, v: Sequence) -> bool:
        if self.rational_basis is not None:
            if not self.rational_basis:
                return all(x == 0 for x in v)
            B = RationalMatrix.from_columns(self.rational_basis, len(v))
            return solve(B, v) is not None
        mod = self.p**self.M
        gU = poly_eval_matrix(self.unit_factor, self.operator)
        img = gU @ v
        return all(valuation(x, self.p) >= self.M for x in img)


def ordinary_projection(space: ModSymSpace, p: int, subspace: Sequence[Sequence] | None = None,
                        M: int = 6) -> OrdinarySubspace:
    """Span of the generalized U_p-eigenspaces with unit eigenvalue."""
    if space.N % p:
        raise ValueError("U_p needs p | N")
    U = hecke(space, p)
    if subspace is not None:
        basis = [tuple(v) for v in subspace]
        U_sub = U.restrict(basis)
    else:
        basis = None
        U_sub = U
    chi = charpoly(U_sub)
    if any(c.denominator != 1 for c in chi):
        raise ArithmeticError("U_p charpoly is not integral")
    chi_int = [int(c) for c in chi]
    g, h = unit_root_factor(chi_int, p, M)
    dim = len(g) - 1
    rational = _rational_unit_part(U_sub, chi, p)
    if rational is not None and basis is not None:
        rational = [tuple(sum((c * b[i] for c, b in zip(v, basis)), Fraction(0)) for i in range(space.dimension))
                    for v in rational]
    return OrdinarySubspace(p, dim, g, rational, U, M)


def _rational_unit_part(U: RationalMatrix, chi, p: int):
    """Kernel of the product of the Q-irreducible factors whose roots are all units."""
    try:
        import sympy
    except ImportError:  # pragma: no cover
        return None
    X = sympy.Symbol("X")
    poly = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in chi])), X)
    _, factors = sympy.factor_list(poly)
    keep = []
    for f, mult in factors:
        coeffs = [Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in reversed(f.all_coeffs())]
        unit, nonunit = _newton_slopes_unit_count(coeffs, p)
        if unit and nonunit:
            return None
        if unit:
            keep.append((coeffs, mult))
    n = U.nrows
    if not keep:
        return []
    G = RationalMatrix.identity(n)
    for coeffs, mult in keep:
        G = G @ poly_eval_matrix(coeffs, U) ** mult
    return span_basis(kernel(G), n)


# -- eigen-symbols -----------------------------------------------------------------

@dataclass
class EigenSymbol:
    space: ModSymSpace = field(repr=False)
    sign: int
    eigenvalue_map: dict
    vector: tuple
    normalization_scale: Fraction
    p: int | None
    gen_values: list = field(repr=False, default_factory=list)

    def __post_init__(self):
        if not self.gen_values:
            vals = []
            for d in self.space.gen_to_basis:
                vals.append(sum((self.vector[b] * x for b, x in d.items()), Fraction(0)))
            self.gen_values = vals

    def value(self, combo: Mapping[int, Fraction]) -> Fraction:
        return sum((v * self.gen_values[g] for g, v in combo.items() if v), Fraction(0))

    def evaluate(self, poly: Sequence, alpha, beta) -> Fraction:
        return self.value(self.space.path_combo(poly, alpha, beta))

    def pair(self, a, m: int = 1) -> tuple:
        """Values on X^j Y^(k-2-j){∞, a/m} for j = 0..k-2."""
        w = self.space.w
        return tuple(self.evaluate(monomial(j, w), "inf", (a, m) if m else (1, 0)) for j in range(w + 1))

    def scaled(self, c) -> "EigenSymbol":
        c = Fraction(c)
        return EigenSymbol(self.space, self.sign, self.eigenvalue_map, tuple(c * x for x in self.vector),
                           self.normalization_scale * c, self.p, [c * v for v in self.gen_values])


def eigen_functionals(space: ModSymSpace, eigenvalue_map: Mapping[int, int], sign: int | None) -> list[tuple]:
    """Basis of functionals phi with phi∘T_q = a_q phi for all q and phi∘star = sign phi."""
    n = space.dimension
    if sign is None:
        B = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    else:
        B = eigenspace(space.star_matrix().T, sign)
    for q in sorted(eigenvalue_map):
        if not B:
            break
        H = hecke(space, q).T - RationalMatrix.identity(n).scale(eigenvalue_map[q])
        HB = H @ RationalMatrix.from_columns(B, n)
        coeffs = kernel(HB)
        B = [tuple(sum((c[i] * B[i][t] for i in range(len(B))), Fraction(0)) for t in range(n)) for c in coeffs]
    return B


def eigen_symbol(space: ModSymSpace, eigenvalue_map: Mapping[int, int], sign: int, p: int | None = None) -> EigenSymbol:
    """The ±-eigen functional, scaled so its values on all Manin generators are
    p-integral with some p-unit (Z-primitive if p is None)."""
    B = eigen_functionals(space, eigenvalue_map, sign)
    if len(B) != 1:
        raise EigenAmbiguityError(f"simultaneous eigenspace has dimension {len(B)}, expected 1")
    sym = EigenSymbol(space, sign, dict(eigenvalue_map), B[0], Fraction(1), p)
    values = [v for v in sym.gen_values if v]
    if p is None:
        scale = 1 / _content_q(values)
    else:
        vmin = min(valuation(v, p) for v in values)
        scale = Fraction(p) ** (-int(vmin))
    out = sym.scaled(scale)
    return out


def _content_q(values: Sequence[Fraction]) -> Fraction:
    """Positive generator of the Z-module spanned by rationals."""
    num = 0
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    for v in values:
        num = math.gcd(num, int(v * den))
    return Fraction(num, den)


def pair(symbol: EigenSymbol, a, m: int = 1) -> tuple:
    return symbol.pair(a, m)


# -- integral lattices -----------------------------------------------------------

def integral_lattice(space: ModSymSpace) -> list[tuple]:
    """Z-basis (as rational coordinate vectors) of the image of Z[Manin generators]."""
    vecs = [space.gens_to_vector({g: 1}) for g in range(space.ngens)]
    vecs = [v for v in vecs if any(v)]
    den = 1
    for v in vecs:
        for x in v:
            den = den * x.denominator // math.gcd(den, x.denominator)
    rows = [[int(x * den) for x in v] for v in vecs]
    return [tuple(Fraction(x, den) for x in r) for r in _integer_row_basis(rows, space.dimension)]


def _integer_row_basis(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Echelon Z-basis of the row lattice."""
    work = [r[:] for r in rows if any(r)]
    out = []
    for c in range(ncols):
        while True:
            nz = [i for i, r in enumerate(work) if r[c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(work[i][c]))
            pr = work[piv]
            for i in nz:
                if i != piv:
                    q = work[i][c] // pr[c]
                    work[i] = [a - q * b for a, b in zip(work[i], pr)]
            if all(work[i][c] == 0 for i in nz if i != piv):
                out.append(work.pop(piv))
                work = [r for r in work if any(r)]
                break
    return out


def cuspidal_sign_lattice(space: ModSymSpace, sign: int) -> list[tuple]:
    """Z-basis of H_1(X0(N), Z)^sign inside the integral modular symbols."""
    L = integral_lattice(space)
    n = space.dimension
    Bd = space.boundary_matrix()
    S = space.star_matrix()
    conds = []
    for lam in L:
        col = list(Bd @ lam) + [a - sign * b for a, b in zip(S @ lam, lam)]
        conds.append(col)
    # conditions as an integer matrix acting on lattice coordinates
    ncond = len(conds[0])
    den = 1
    for col in conds:
        for x in col:
            den = den * x.denominator // math.gcd(den, x.denominator)
    rows = [[int(conds[i][r] * den) for i in range(len(L))] for r in range(ncond)]
    ker = integer_kernel(rows, len(L))
    return [tuple(sum((c * L[i][t] for i, c in enumerate(v)), Fraction(0)) for t in range(n)) for v in ker]


def period_normalized(symbol: EigenSymbol) -> EigenSymbol:
    """Rescale so the values on H_1(X0(N), Z)^sign generate Z."""
    lattice = cuspidal_sign_lattice(symbol.space, symbol.sign)
    vals = [sum((a * b for a, b in zip(symbol.vector, v)), Fraction(0)) for v in lattice]
    vals = [v for v in vals if v]
    if not vals:
        raise ArithmeticError("symbol vanishes on the integral cuspidal lattice")
    return symbol.scaled(1 / _content_q(vals))


def special_value_ratio(symbol: EigenSymbol) -> Fraction:
    """L(f, 1)/Omega up to sign for weight 2, read from the symbol {0, ∞}."""
    s = period_normalized(symbol)
    return s.evaluate(monomial(0, s.space.w), 0, "inf")


# -- cache files -------------------------------------------------------------------------

class CacheCorruptError(ValueError):
    pass


def _checksum(body: dict) -> str:
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def save_space(space: ModSymSpace, path) -> None:
    body = space.to_dict()
    Path(path).write_text(json.dumps(body, sort_keys=True))


def load_space(path) -> ModSymSpace:
    """Reload a saved presentation; raises CacheCorruptError if the checksum fails."""
    try:
        body = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheCorruptError(f"{path}: unreadable cache file") from exc
    if not isinstance(body, dict) or "checksum" not in body:
        raise CacheCorruptError(f"{path}: missing checksum")
    stored = body.pop("checksum")
    if _checksum(body) != stored:
        raise CacheCorruptError(f"{path}: checksum mismatch")
    space = ModSymSpace.__new__(ModSymSpace)
    space.N, space.k = int(body["N"]), int(body["k"])
    space.w = space.k - 2
    space.p1 = P1List(space.N)
    space.ngens = len(space.p1) * (space.w + 1)
    space.basis = [int(b) for b in body["basis"]]
    space.dimension = len(space.basis)
    space.gen_to_basis = [{int(b): Fraction(v) for b, v in d.items()} for d in body["gen_to_basis"]]
    if len(space.gen_to_basis) != space.ngens:
        raise CacheCorruptError(f"{path}: generator count mismatch")
    space.relation_rows = []
    space._hecke = {int(q): RationalMatrix([[Fraction(x) for x in r] for r in rows], space.dimension)
                    for q, rows in body["hecke"].items()}
    space._star = None
    space._boundary = None
    return space


def cache_file(cache_dir, N: int, k: int) -> Path:
    return Path(cache_dir) / f"modsym_N{N}_k{k}.json"


def load_or_build(N: int, k: int, cache_dir=None) -> tuple[ModSymSpace, str]:
    """Space from the cache if intact, else rebuilt (and rewritten). Returns (space, status)."""
    if cache_dir is None:
        return build_space(N, k), "built"
    path = cache_file(cache_dir, N, k)
    status = "built"
    if path.exists():
        try:
            return load_space(path), "loaded"
        except CacheCorruptError:
            status = "rebuilt"
    space = build_space(N, k)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    save_space(space, path)
    return space, status
