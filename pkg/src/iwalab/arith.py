"""Exact arithmetic: rationals, residues mod p^M, dense rational linear algebra.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator).  Matrices are immutable row tuples; elimination is exact and
pivots on the entry of smallest height to keep coefficient growth down.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

BigRational = Fraction


def valuation(x, p: int) -> float:
    """p-adic valuation of an integer or Fraction; ``inf`` for zero."""
    if x == 0:
        return float("inf")
    x = Fraction(x)
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def to_residue(x, modulus: int) -> int:
    """Image of a p-integral rational in Z/modulus."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


@dataclass(frozen=True)
class ResidueInt:
    """An element of Z/p^M."""

    value: int
    p: int
    M: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p**self.M)

    @property
    def modulus(self) -> int:
        return self.p**self.M

    @classmethod
    def of(cls, x, p: int, M: int) -> "ResidueInt":
        return cls(to_residue(x, p**M), p, M)

    def _coerce(self, other) -> int:
        if isinstance(other, ResidueInt):
            if other.p != self.p:
                raise ValueError("residues for different primes")
            return other.value
        return to_residue(other, self.modulus)

    def _prec(self, other) -> int:
        return min(self.M, other.M) if isinstance(other, ResidueInt) else self.M

    def __add__(self, other):
        return ResidueInt(self.value + self._coerce(other), self.p, self._prec(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ResidueInt(self.value - self._coerce(other), self.p, self._prec(other))

    def __rsub__(self, other):
        return ResidueInt(self._coerce(other) - self.value, self.p, self._prec(other))

    def __mul__(self, other):
        return ResidueInt(self.value * self._coerce(other), self.p, self._prec(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ResidueInt(-self.value, self.p, self.M)

    def __pow__(self, e: int):
        return ResidueInt(pow(self.value, e, self.modulus), self.p, self.M)

    def inverse(self) -> "ResidueInt":
        if self.value % self.p == 0:
            raise ZeroDivisionError(f"{self.value} is not a unit mod {self.p}")
        return ResidueInt(pow(self.value, -1, self.modulus), self.p, self.M)

    def valuation(self) -> int:
        """Valuation, capped at M."""
        v = valuation(self.value, self.p)
        return self.M if v == float("inf") else min(int(v), self.M)

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def __eq__(self, other):
        if isinstance(other, ResidueInt):
            m = min(self.M, other.M)
            return self.p == other.p and (self.value - other.value) % self.p**m == 0
        if isinstance(other, (int, Fraction)):
            try:
                return self.value == to_residue(other, self.modulus)
            except ValueError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p, self.M))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} mod {self.p}^{self.M}"


# -- sparse row elimination --------------------------------------------------

def _height(x: Fraction) -> int:
    return abs(x.numerator) + x.denominator


def rref_rows(rows: Iterable[dict], ncols: int) -> tuple[list[dict], list[int]]:
    """Reduced row echelon form of sparse rows ``{col: Fraction}``.

    Returns ``(reduced_rows, pivots)`` with ``reduced_rows[i][pivots[i]] == 1``
    and every pivot column zero in the other rows.
    """
    work = [dict((c, Fraction(v)) for c, v in r.items() if v) for r in rows]
    work = [r for r in work if r]
    done: list[dict] = []
    pivots: list[int] = []
    for col in range(ncols):
        cands = [i for i, r in enumerate(work) if col in r]
        if not cands:
            continue
        best = min(cands, key=lambda i: (_height(work[i][col]), len(work[i])))
        prow = work.pop(best)
        inv = 1 / prow[col]
        prow = {c: v * inv for c, v in prow.items()}
        for target in (work, done):
            for r in target:
                f = r.get(col)
                if f:
                    for c, v in prow.items():
                        nv = r.get(c, 0) - f * v
                        if nv:
                            r[c] = nv
                        else:
                            r.pop(c, None)
        work = [r for r in work if r]
        done.append(prow)
        pivots.append(col)
    return done, pivots


class RationalMatrix:
    """Immutable dense matrix over Q."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence], ncols: int | None = None):
        self.rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        self.nrows = len(self.rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != ncols for r in self.rows):
            raise ValueError("ragged matrix")
        self.ncols = ncols

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zero(cls, r: int, c: int) -> "RationalMatrix":
        return cls([[0] * c for _ in range(r)], c)

    @classmethod
    def diagonal(cls, entries: Sequence) -> "RationalMatrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int | None = None) -> "RationalMatrix":
        if not cols:
            return cls([[] for _ in range(nrows or 0)], 0)
        return cls([list(r) for r in zip(*cols)], len(cols))

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix([list(c) for c in zip(*self.rows)] if self.nrows else [], self.nrows)

    T = property(transpose)

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RationalMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RationalMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix([[c * a for a in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.ncols != other.nrows:
                raise ValueError("shape mismatch")
            cols = other.columns()
            out = []
            for r in self.rows:
                nz = [(k, a) for k, a in enumerate(r) if a]
                out.append([sum((a * c[k] for k, a in nz), Fraction(0)) for c in cols])
            return RationalMatrix(out, other.ncols)
        vec = list(other)
        if len(vec) != self.ncols:
            raise ValueError("shape mismatch")
        return tuple(sum((a * Fraction(v) for a, v in zip(r, vec) if a and v), Fraction(0)) for r in self.rows)

    __mul__ = __matmul__

    def __pow__(self, e: int) -> "RationalMatrix":
        result = RationalMatrix.identity(self.nrows)
        base = self
        while e:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def _sparse_rows(self) -> list[dict]:
        return [{j: a for j, a in enumerate(r) if a} for r in self.rows]

    def rref(self) -> tuple["RationalMatrix", list[int]]:
        rows, pivots = rref_rows(self._sparse_rows(), self.ncols)
        order = sorted(range(len(pivots)), key=lambda i: pivots[i])
        dense = [[rows[i].get(j, 0) for j in range(self.ncols)] for i in order]
        return RationalMatrix(dense, self.ncols), sorted(pivots)

    def rank(self) -> int:
        return len(rref_rows(self._sparse_rows(), self.ncols)[1])

    def restrict(self, basis: Sequence[Sequence]) -> "RationalMatrix":
        """Matrix of ``self`` on the invariant subspace spanned by column vectors ``basis``.

        Returns A with ``self @ B == B @ A`` where B has the given columns.
        Raises ValueError if the span is not invariant.
        """
        B = RationalMatrix.from_columns(basis, self.nrows)
        images = [self @ b for b in basis]
        coords = [solve(B, img) for img in images]
        if any(c is None for c in coords):
            raise ValueError("subspace is not invariant")
        return RationalMatrix.from_columns(coords, len(basis))

    def __repr__(self):
        body = "; ".join(" ".join(str(a) for a in r) for r in self.rows)
        return f"RationalMatrix([{body}])"


def kernel(m: RationalMatrix) -> list[tuple]:
    """Basis of the right null space {v : m v = 0}."""
    rows, pivots = rref_rows(m._sparse_rows(), m.ncols)
    pivset = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * m.ncols
        v[free] = Fraction(1)
        for r, pc in zip(rows, pivots):
            c = r.get(free)
            if c:
                v[pc] = -c
        basis.append(tuple(v))
    return basis


def eigenspace(m: RationalMatrix, lam) -> list[tuple]:
    """Basis of ker(m - lam I)."""
    if not m.is_square():
        raise ValueError("eigenspace of a non-square matrix")
    return kernel(m - RationalMatrix.identity(m.nrows).scale(lam))


def solve(m: RationalMatrix, b: Sequence) -> tuple | None:
    """One solution x of m x = b, or None if inconsistent."""
    aug = [dict(r) for r in m._sparse_rows()]
    for r, bi in zip(aug, b):
        if bi:
            r[m.ncols] = Fraction(bi)
    rows, pivots = rref_rows(aug, m.ncols + 1)
    if m.ncols in pivots:
        return None
    x = [Fraction(0)] * m.ncols
    for r, pc in zip(rows, pivots):
        x[pc] = r.get(m.ncols, Fraction(0))
    return tuple(x)


def span_basis(vectors: Sequence[Sequence], dim: int) -> list[tuple]:
    """Echelon basis of the span of the given vectors."""
    rows, pivots = rref_rows([{j: a for j, a in enumerate(v) if a} for v in vectors], dim)
    return [tuple(r.get(j, Fraction(0)) for j in range(dim)) for r in rows]


def intersect(a: Sequence[Sequence], b: Sequence[Sequence], dim: int) -> list[tuple]:
    """Basis of span(a) ∩ span(b)."""
    if not a or not b:
        return []
    # x = sum s_i a_i = sum t_j b_j
    cols = [list(v) for v in a] + [[-x for x in v] for v in b]
    sol = kernel(RationalMatrix.from_columns(cols, dim))
    out = []
    for s in sol:
        out.append(tuple(sum((s[i] * a[i][k] for i in range(len(a))), Fraction(0)) for k in range(dim)))
    return span_basis(out, dim)


def charpoly(m: RationalMatrix) -> list[Fraction]:
    """Characteristic polynomial det(X I - m), coefficients from X^0 up to X^n.

    Hessenberg reduction followed by the standard recurrence.
    """
    if not m.is_square():
        raise ValueError("charpoly of a non-square matrix")
    n = m.nrows
    H = [list(r) for r in m.rows]
    for j in range(n - 2):
        piv = next((i for i in range(j + 1, n) if H[i][j] != 0), None)
        if piv is None:
            continue
        if piv != j + 1:
            H[piv], H[j + 1] = H[j + 1], H[piv]
            for r in H:
                r[piv], r[j + 1] = r[j + 1], r[piv]
        for i in range(j + 2, n):
            if H[i][j] == 0:
                continue
            u = H[i][j] / H[j + 1][j]
            for c in range(n):
                H[i][c] -= u * H[j + 1][c]
            for r in H:
                r[j + 1] += u * r[i]
    # p_k = det(X I - H[:k,:k]) via the Hessenberg recurrence
    polys = [[Fraction(1)]]
    for k in range(1, n + 1):
        prev = polys[k - 1]
        cur = [Fraction(0)] + prev  # X * p_{k-1}
        for i, c in enumerate(prev):
            cur[i] -= H[k - 1][k - 1] * c
        t = Fraction(1)
        for i in range(1, k):
            t *= H[k - i][k - i - 1]
            h = H[k - i - 1][k - 1]
            if t == 0:
                break
            if h:
                for d, c in enumerate(polys[k - i - 1]):
                    cur[d] -= t * h * c
        polys.append(cur)
    return polys[n]


def poly_eval_matrix(coeffs: Sequence, m: RationalMatrix) -> RationalMatrix:
    """Evaluate a polynomial (low-to-high coefficients) at a square matrix."""
    n = m.nrows
    acc = RationalMatrix.zero(n, n)
    for c in reversed(list(coeffs)):
        acc = acc @ m + RationalMatrix.identity(n).scale(c)
    return acc


# -- integer lattices --------------------------------------------------------

def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Z-basis of {x in Z^ncols : A x = 0} for an integer matrix A (given by rows)."""
    m = len(rows)
    # Work on [A^T | I]: unimodular row operations on A^T are column operations on A.
    work = [[int(rows[i][j]) for i in range(m)] + [int(j == t) for t in range(ncols)] for j in range(ncols)]
    r = 0
    for c in range(m):
        while True:
            nz = [i for i in range(r, ncols) if work[i][c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(work[i][c]))
            work[r], work[piv] = work[piv], work[r]
            done = True
            for i in range(r + 1, ncols):
                if work[i][c]:
                    q = work[i][c] // work[r][c]
                    work[i] = [a - q * b for a, b in zip(work[i], work[r])]
                    if work[i][c]:
                        done = False
            if done:
                r += 1
                break
        if r == ncols:
            break
    return [row[m:] for row in work[r:] if all(a == 0 for a in row[:m])]


def saturate(vectors: Sequence[Sequence], dim: int) -> list[list[int]]:
    """Z-basis of span_Q(vectors) ∩ Z^dim."""
    basis = span_basis(vectors, dim)
    if not basis:
        return []
    perp = kernel(RationalMatrix(basis, dim))
    if not perp:
        return [[int(i == j) for j in range(dim)] for i in range(dim)]
    int_perp = []
    for v in perp:
        den = 1
        for x in v:
            den = den * x.denominator // _gcd(den, x.denominator)
        int_perp.append([int(x * den) for x in v])
    return integer_kernel(int_perp, dim)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


# -- prime fields ------------------------------------------------------------

def kernel_mod_p(rows: Sequence[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of the right null space over F_p."""
    work = [[x % p for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = pow(work[r][c], -1, p)
        work[r] = [x * inv % p for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [(a - f * b) % p for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in range(ncols):
        if free in pivots:
            continue
        v = [0] * ncols
        v[free] = 1
        for row, pc in zip(work, pivots):
            v[pc] = -row[free] % p
        basis.append(v)
    return basis


def rank_mod_p(rows: Sequence[Sequence[int]], ncols: int, p: int) -> int:
    return ncols - len(kernel_mod_p(rows, ncols, p))
