"""Exact matrix arithmetic over prime fields and over the integers.

A :class:`Matrix` carries its ring in ``p``: a prime for F_p, or ``0`` for
arbitrary-precision integers. Python ints never overflow, so the same code
path serves both rings; only the reduction step differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from sympy import isprime


class AlgebraError(ArithmeticError):
    pass


class ZeroInverse(AlgebraError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class Singular(AlgebraError):
    pass


@lru_cache(maxsize=256)
def check_prime(p: int) -> int:
    if p < 2 or not isprime(p):
        raise ValueError(f"{p} is not prime")
    return p


class PrimeField:
    """The field F_p. Primality is checked once, here."""

    def __init__(self, p: int):
        self.p = check_prime(p)

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.p, self)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise TypeError("elements of different fields")
            return other.value
        return other % self.field.p

    def __add__(self, other):
        return self.field(self.value + self._coerce(other))

    def __sub__(self, other):
        return self.field(self.value - self._coerce(other))

    def __mul__(self, other):
        return self.field(self.value * self._coerce(other))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self.field(-self.value)

    def inverse(self) -> "FieldElement":
        return self.field(fp_inv(self.value, self.field.p))

    def __truediv__(self, other):
        return self * self.field(self._coerce(other)).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** -e
        return self.field(pow(self.value, e, self.field.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"


def fp_inv(x: int, p: int) -> int:
    """Inverse of ``x`` modulo the prime ``p``."""
    x %= p
    if x == 0:
        raise ZeroInverse(f"0 has no inverse mod {p}")
    return pow(x, -1, p)


@dataclass(frozen=True)
class Matrix:
    """Square matrix; ``p == 0`` means entries are unbounded integers."""

    n: int
    p: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.rows) != self.n or any(len(r) != self.n for r in self.rows):
            raise DimensionMismatch(f"expected {self.n}x{self.n} entries")
        if self.p and any(not 0 <= v < self.p for r in self.rows for v in r):
            raise ValueError(f"entries must be reduced mod {self.p}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], p: int = 0) -> "Matrix":
        rows = tuple(tuple(int(v) % p if p else int(v) for v in r) for r in rows)
        return cls(len(rows), p, rows)

    @classmethod
    def from_flat(cls, flat: Sequence[int], n: int, p: int = 0) -> "Matrix":
        return cls.from_rows((flat[i * n:(i + 1) * n] for i in range(n)), p)

    @classmethod
    def identity(cls, n: int, p: int = 0) -> "Matrix":
        return cls(n, p, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, n: int, p: int = 0) -> "Matrix":
        return cls(n, p, tuple((0,) * n for _ in range(n)))

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(v for r in self.rows for v in r)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def reduce(self, p: int) -> "Matrix":
        """Canonical projection to F_p (for integer matrices)."""
        return Matrix.from_rows(self.rows, p)

    def transpose(self) -> "Matrix":
        return Matrix(self.n, self.p, tuple(zip(*self.rows)))

    def is_identity(self) -> bool:
        return self == Matrix.identity(self.n, self.p)

    def is_symmetric(self) -> bool:
        return self.rows == tuple(zip(*self.rows))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_compatible(self, other)
        return Matrix.from_rows(
            (tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.p,
        )

    def __pow__(self, e: int) -> "Matrix":
        return mat_pow(self, e)

    def __str__(self):
        return to_text(self)


def _check_compatible(x: Matrix, y: Matrix) -> None:
    if x.n != y.n:
        raise DimensionMismatch(f"dimensions {x.n} and {y.n}")
    if x.p != y.p:
        raise DimensionMismatch(f"rings differ (p={x.p} vs p={y.p})")


def mat_mul(x: Matrix, y: Matrix) -> Matrix:
    _check_compatible(x, y)
    cols = tuple(zip(*y.rows))
    p = x.p
    if p:
        rows = tuple(
            tuple(sum(a * b for a, b in zip(r, c)) % p for c in cols) for r in x.rows
        )
    else:
        rows = tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in x.rows)
    return Matrix(x.n, p, rows)


def mat_pow(m: Matrix, e: int) -> Matrix:
    if e < 0:
        raise ValueError("negative exponent; invert first")
    result = Matrix.identity(m.n, m.p)
    base = m
    while e:
        if e & 1:
            result = mat_mul(result, base)
        e >>= 1
        if e:
            base = mat_mul(base, base)
    return result


def mat_det(m: Matrix) -> int:
    """Determinant: Gaussian elimination over F_p, fraction-free Bareiss over Z."""
    n, p = m.n, m.p
    a = [list(r) for r in m.rows]
    if p:
        det = 1
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col]), None)
            if piv is None:
                return 0
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det = det * a[col][col] % p
            inv = fp_inv(a[col][col], p)
            for r in range(col + 1, n):
                f = a[r][col] * inv % p
                if f:
                    a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
        return det % p

    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if a[r][k]), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def mat_inv(m: Matrix) -> Matrix:
    """Inverse over F_p by Gauss-Jordan elimination."""
    if not m.p:
        return mat_inv_z(m)
    n, p = m.n, m.p
    a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(m.rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise Singular("matrix is singular mod %d" % p)
        a[col], a[piv] = a[piv], a[col]
        inv = fp_inv(a[col][col], p)
        a[col] = [v * inv % p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
    return Matrix(n, p, tuple(tuple(r[n:]) for r in a))


def mat_inv_z(m: Matrix) -> Matrix:
    """Exact integer inverse of a matrix with determinant +-1 (adjugate / det)."""
    if m.p:
        raise ValueError("mat_inv_z expects an integer matrix (p=0)")
    det = mat_det(m)
    if det not in (1, -1):
        raise Singular(f"determinant {det} is not a unit in Z")
    n = m.n
    cof = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = Matrix(
                n - 1,
                0,
                tuple(
                    tuple(m.rows[r][c] for c in range(n) if c != j)
                    for r in range(n)
                    if r != i
                ),
            ) if n > 1 else None
            sub = mat_det(minor) if minor is not None else 1
            cof[i][j] = (-1) ** (i + j) * sub
    # inverse = adj / det, adj = cof^T
    return Matrix(n, 0, tuple(tuple(cof[j][i] * det for j in range(n)) for i in range(n)))


def max_abs_entry(m: Matrix) -> int:
    return max((abs(v) for r in m.rows for v in r), default=0)


def to_text(m: Matrix) -> str:
    lines = [f"{m.n} {m.p}"]
    lines += [" ".join(str(v) for v in r) for r in m.rows]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> Matrix:
    """Parse the ``n p`` header + ``n`` rows text format (``p = 0``: integers)."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValueError("matrix text must start with a 'n p' header line")
    n, p = int(lines[0][0]), int(lines[0][1])
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise DimensionMismatch(f"expected {n} rows of {n} entries")
    vals = [[int(v) for v in r] for r in rows]
    if p:
        check_prime(p)
        if any(v < 0 for r in vals for v in r):
            raise ValueError("negative entries are only allowed when p = 0")
    return Matrix.from_rows(vals, p)


# -- flat kernels for hot loops (hashing, BFS) -------------------------------

def mul_flat(x: tuple, y: tuple, n: int, p: int) -> tuple:
    """Row-major flat product, reduced mod p (p > 0)."""
    if n == 3:
        x0, x1, x2, x3, x4, x5, x6, x7, x8 = x
        y0, y1, y2, y3, y4, y5, y6, y7, y8 = y
        return (
            (x0 * y0 + x1 * y3 + x2 * y6) % p,
            (x0 * y1 + x1 * y4 + x2 * y7) % p,
            (x0 * y2 + x1 * y5 + x2 * y8) % p,
            (x3 * y0 + x4 * y3 + x5 * y6) % p,
            (x3 * y1 + x4 * y4 + x5 * y7) % p,
            (x3 * y2 + x4 * y5 + x5 * y8) % p,
            (x6 * y0 + x7 * y3 + x8 * y6) % p,
            (x6 * y1 + x7 * y4 + x8 * y7) % p,
            (x6 * y2 + x7 * y5 + x8 * y8) % p,
        )
    cols = [y[j::n] for j in range(n)]
    out = []
    for i in range(n):
        r = x[i * n:(i + 1) * n]
        out.extend(sum(a * b for a, b in zip(r, c)) % p for c in cols)
    return tuple(out)


def mul_flat_z(x: tuple, y: tuple, n: int) -> tuple:
    cols = [y[j::n] for j in range(n)]
    out = []
    for i in range(n):
        r = x[i * n:(i + 1) * n]
        out.extend(sum(a * b for a, b in zip(r, c)) for c in cols)
    return tuple(out)


def identity_flat(n: int) -> tuple:
    return tuple(int(i == j) for i in range(n) for j in range(n))


def nullspace_mod_p(rows: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of the right nullspace of a matrix over F_p (reduced row echelon)."""
    a = [[v % p for v in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = fp_inv(a[r][c], p)
        a[r] = [v * inv % p for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = -a[i][f] % p
        basis.append(v)
    return basis
