"""Eigenform data: elliptic-curve traces, Ramanujan tau, p-stabilization,
congruences mod p and residual Frobenius fingerprints."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping

from .arith import ResidueInt

try:
    import tomllib as _toml
except ImportError:  # Python < 3.11
    import tomli as _toml


class NotOrdinaryError(ValueError):
    pass


class DescriptorError(ValueError):
    pass


# -- primes ------------------------------------------------------------------------

@lru_cache(maxsize=None)
def primes_up_to(n: int) -> tuple[int, ...]:
    if n < 2:
        return ()
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return tuple(i for i, v in enumerate(sieve) if v)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, int(n**0.5) + 1))


def factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def ord_p(n: int, p: int) -> int:
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


# -- elliptic curves -----------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCurveW:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int | None = None

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation")

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = a1 * a3 + 2 * a4
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> int:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> int:
        b2, b4, b6, _ = self.b_invariants
        return -(b2**3) + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def count_points(self, q: int) -> int:
        """#E(F_q) including the point at infinity (singular points counted too)."""
        a1, a2, a3, a4, a6 = (x % q for x in (self.a1, self.a2, self.a3, self.a4, self.a6))
        if q == 2:
            return 1 + sum(
                1 for x in range(2) for y in range(2)
                if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0
            )
        # y^2 + (a1 x + a3) y = f(x)  <=>  (2y + a1 x + a3)^2 = 4 f(x) + (a1 x + a3)^2
        chi = _legendre_table(q)
        total = 1
        for x in range(q):
            disc = (4 * (x**3 + a2 * x * x + a4 * x + a6) + (a1 * x + a3) ** 2) % q
            total += 1 + chi[disc]
        return total

    def reduction_type(self, q: int) -> str:
        """good | split | nonsplit | additive, from the (assumed q-minimal) model."""
        if self.discriminant % q:
            return "good"
        if self.c4 % q == 0:
            return "additive"
        if q == 2:
            return "split" if q + 1 - self.count_points(q) == 1 else "nonsplit"
        return "split" if _legendre_table(q)[(-self.c6) % q] == 1 else "nonsplit"

    def check_conductor(self, primes_bound: int = 13) -> list[str]:
        """Spot-check the declared conductor against reduction types at small primes."""
        problems = []
        if self.conductor is None:
            return problems
        for q in primes_up_to(primes_bound):
            v = ord_p(self.conductor, q)
            t = self.reduction_type(q)
            if v == 0 and t != "good":
                problems.append(f"model has bad reduction at {q} but {q} does not divide the conductor")
            if v == 1 and t not in ("split", "nonsplit"):
                problems.append(f"{q} exactly divides the conductor but reduction is {t}")
            if v >= 2 and t != "additive":
                problems.append(f"{q}^2 divides the conductor but reduction is {t}")
        return problems


@lru_cache(maxsize=4096)
def _legendre_table(q: int) -> tuple[int, ...]:
    chi = [-1] * q
    chi[0] = 0
    for y in range(1, q):
        chi[y * y % q] = 1
    return tuple(chi)


def ap_curve(E: EllipticCurveW, q: int) -> int:
    """Trace of Frobenius with the usual conventions at bad primes."""
    if E.conductor is not None:
        v = ord_p(E.conductor, q)
        if v >= 2:
            return 0
        if v == 1:
            return 1 if E.reduction_type(q) == "split" else -1
    t = E.reduction_type(q)
    if t == "additive":
        return 0
    if t in ("split", "nonsplit"):
        return 1 if t == "split" else -1
    return q + 1 - E.count_points(q)


# -- Ramanujan tau ---------------------------------------------------------------------

@lru_cache(maxsize=8)
def _delta_series(bound: int) -> tuple[int, ...]:
    """Coefficients of Delta = q * prod (1 - q^n)^24 up to q^bound, via (eta^3)^8."""
    L = bound  # need prod up to q^(bound - 1)
    eta3 = [0] * L
    k = 0
    while True:
        e = k * (k + 1) // 2  # (2k+1)^2 = 8e + 1
        if e >= L:
            break
        eta3[e] = (-1) ** k * (2 * k + 1)
        k += 1

    def mul(a, b):
        out = [0] * L
        nz = [(i, x) for i, x in enumerate(a) if x]
        for i, x in nz:
            for j in range(L - i):
                if b[j]:
                    out[i + j] += x * b[j]
        return out

    sq = mul(eta3, eta3)
    f4 = mul(sq, sq)
    f8 = mul(f4, f4)
    return tuple([0] + f8[: bound])


def _tau_prime(q: int) -> int:
    bound = 64
    while bound <= q:
        bound *= 2
    return _delta_series(bound)[q]


def tau(n: int) -> int:
    """Ramanujan's tau function."""
    if n < 1:
        raise ValueError("n >= 1")
    out = 1
    for q, e in factor(n).items():
        t1 = _tau_prime(q)
        prev, cur = 1, t1
        for _ in range(e - 1):
            prev, cur = cur, t1 * cur - q**11 * prev
        out *= cur
    return out


# -- eigenform descriptors ---------------------------------------------------------------

@dataclass(frozen=True)
class EigenformDescriptor:
    """A classical eigenform with rational Hecke eigenvalues and trivial character."""

    name: str
    N: int
    k: int
    kind: str
    provider: Callable[[int], int] = field(repr=False, compare=False)
    p: int | None = None
    alpha: ResidueInt | None = None
    is_p_stabilized: bool = False
    M: int | None = None

    @property
    def level(self) -> int:
        """Level carrying the U_p-eigenvalue alpha."""
        if self.is_p_stabilized:
            return self.N * self.p
        return self.N

    def a(self, q: int) -> int:
        """T_q (q ∤ N) or U_q (q | N) eigenvalue of the unstabilized form."""
        return self.provider(q)

    def a_n(self, n: int) -> int:
        out = 1
        for q, e in factor(n).items():
            aq = self.a(q)
            chi = 0 if self.N % q == 0 else q ** (self.k - 1)
            prev, cur = 1, aq
            for _ in range(e - 1):
                prev, cur = cur, aq * cur - chi * prev
            out *= cur
        return out

    def hecke_data(self, primes) -> dict[int, int]:
        return {q: self.a(q) for q in primes}


def curve_form(E: EllipticCurveW, name: str = "curve") -> EigenformDescriptor:
    if E.conductor is None:
        raise DescriptorError("curve descriptors must declare a conductor")
    return EigenformDescriptor(name, E.conductor, 2, "curve", lambda q, E=E: ap_curve(E, q))


def delta_form(name: str = "delta") -> EigenformDescriptor:
    return EigenformDescriptor(name, 1, 12, "delta", tau)


def table_form(N: int, k: int, table: Mapping[int, int], name: str = "table") -> EigenformDescriptor:
    table = {int(q): int(a) for q, a in table.items()}

    def provider(q: int) -> int:
        if q not in table:
            raise KeyError(f"no eigenvalue for q = {q} in table {name}")
        return table[q]

    return EigenformDescriptor(name, N, k, "table", provider)


def unit_root(ap: int, p: int, k: int, M: int) -> int:
    """Unit root of X^2 - ap X + p^(k-1) mod p^M (Newton iteration from ap)."""
    if ap % p == 0:
        raise NotOrdinaryError(f"a_{p} = {ap} is divisible by {p}: not {p}-ordinary")
    mod = p**M
    x = ap % mod
    c = p ** (k - 1)
    for _ in range(M + 1):
        fx = (x * x - ap * x + c) % mod
        dfx = (2 * x - ap) % mod
        x = (x - fx * pow(dfx, -1, mod)) % mod
    return x


def p_stabilize(f: EigenformDescriptor, p: int, M: int) -> EigenformDescriptor:
    """Attach the unit U_p-eigenvalue; stabilizes when p ∤ N."""
    ap = f.a(p)
    if ap % p == 0:
        raise NotOrdinaryError(f"a_{p}({f.name}) = {ap} ≡ 0 mod {p}: not {p}-ordinary")
    if f.N % p == 0:
        return EigenformDescriptor(f.name, f.N, f.k, f.kind, f.provider, p, ResidueInt(ap, p, M), False, M)
    alpha = unit_root(ap, p, f.k, M)
    return EigenformDescriptor(f.name, f.N, f.k, f.kind, f.provider, p, ResidueInt(alpha, p, M), True, M)


# -- congruences -------------------------------------------------------------------------

def gamma0_index(N: int) -> int:
    out = N
    for q in factor(N):
        out = out // q * (q + 1)
    return out


def sturm_bound(levels, k: int, p: int) -> int:
    L = 1
    for n in levels:
        L = L * n // math.gcd(L, n)
    return -(-k * gamma0_index(L * p * p) // 12)


@dataclass(frozen=True)
class CongruenceResult:
    congruent: bool
    witness: int | None
    cap: int
    primes_checked: int

    def __bool__(self):
        return self.congruent


def congruent_mod_p(f: EigenformDescriptor, g: EigenformDescriptor, p: int, cap: int | None = None) -> CongruenceResult:
    """Compare a_q mod p for primes q <= cap away from N_f N_g p."""
    if cap is None:
        cap = sturm_bound([f.N, g.N], max(f.k, g.k), p)
    bad = f.N * g.N * p
    checked = 0
    for q in primes_up_to(cap):
        if bad % q == 0:
            continue
        checked += 1
        if (f.a(q) - g.a(q)) % p:
            return CongruenceResult(False, q, cap, checked)
    return CongruenceResult(True, None, cap, checked)


def frobenius_fingerprint(f: EigenformDescriptor, p: int, ell: int) -> tuple[int, int]:
    """(a_ell mod p, ell^(k-1) mod p) for a good prime ell."""
    if (f.N * p) % ell == 0:
        raise ValueError(f"{ell} divides N p")
    return f.a(ell) % p, pow(ell, f.k - 1, p)


# -- branches ----------------------------------------------------------------------------

def local_type(f: EigenformDescriptor, ell: int) -> str:
    """Annotation only: good | special | ramified-principal-series | supercuspidal-proxy."""
    v = ord_p(f.N, ell)
    if v == 0:
        return "good"
    a = f.a(ell)
    if a == 0:
        return "supercuspidal-proxy"
    if v == 1 and a * a == ell ** (f.k - 2):
        return "special"
    return "ramified-principal-series"


@dataclass(frozen=True)
class BranchData:
    p: int
    tame_level: int
    member: EigenformDescriptor
    frobenius_table: dict = field(compare=False)
    bad_primes: dict = field(compare=False)

    def residual(self, ell: int) -> tuple[int, int]:
        if ell not in self.frobenius_table:
            return frobenius_fingerprint(self.member, self.p, ell)
        return self.frobenius_table[ell]


def branch_data(f: EigenformDescriptor, p: int, lmax: int = 50) -> BranchData:
    """Residual data (a_ell, c_ell) mod p for good ell <= lmax and local tags at ell | N."""
    N = f.N
    tame = N // p ** ord_p(N, p)
    table = {}
    for ell in primes_up_to(lmax):
        if (N * p) % ell:
            table[ell] = frobenius_fingerprint(f, p, ell)
    bad = {ell: (f.a(ell), local_type(f, ell)) for ell in factor(N) if ell != p}
    return BranchData(p, tame, f, table, bad)


# -- descriptor files --------------------------------------------------------------------

def _int(x) -> int:
    if isinstance(x, bool):
        raise DescriptorError("booleans are not integers")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x.strip())
        except ValueError as exc:
            raise DescriptorError(f"not a decimal integer: {x!r}") from exc
    raise DescriptorError(f"expected an integer, got {x!r}")


def descriptor_from_dict(d: Mapping, name: str = "form") -> EigenformDescriptor:
    kind = d.get("kind")
    name = d.get("name", name)
    if kind == "curve":
        try:
            ainvs = [_int(x) for x in d["ainvs"]]
            N = _int(d["conductor"])
        except KeyError as exc:
            raise DescriptorError(f"curve descriptor is missing {exc}") from exc
        if len(ainvs) != 5:
            raise DescriptorError("ainvs must have five entries a1, a2, a3, a4, a6")
        try:
            E = EllipticCurveW(*ainvs, conductor=N)
        except ValueError as exc:
            raise DescriptorError(str(exc)) from exc
        problems = E.check_conductor()
        if problems:
            raise DescriptorError("; ".join(problems))
        return curve_form(E, name)
    if kind == "delta":
        return delta_form(name)
    if kind == "table":
        try:
            N, k = _int(d["level"]), _int(d["weight"])
            table = {_int(q): _int(a) for q, a in d["eigenvalues"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise DescriptorError(f"malformed table descriptor: {exc}") from exc
        return table_form(N, k, table, name)
    raise DescriptorError(f"unknown descriptor kind {kind!r}")


def load_descriptor(path) -> EigenformDescriptor:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            d = _toml.load(fh)
    except FileNotFoundError:
        raise
    except _toml.TOMLDecodeError as exc:
        raise DescriptorError(f"{path}: {exc}") from exc
    return descriptor_from_dict(d, path.stem)


# The curves of the worked examples.
X0_11 = EllipticCurveW(0, -1, 1, -10, -20, conductor=11)
E1_52 = EllipticCurveW(0, 0, 0, 1, -10, conductor=52)
E2_364 = EllipticCurveW(0, 0, 0, -584, 5444, conductor=364)
