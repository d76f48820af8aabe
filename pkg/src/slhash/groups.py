"""Enumeration of finite matrix groups over F_p by vectorized closure.

Elements are stored as integer codes: the row-major entries read as base-p
digits, first entry most significant. Code order is therefore lexicographic
order on matrices, and a sorted code array doubles as the element index.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .algebra import Matrix

DEFAULT_BUDGET = 10_000_000
_CHUNK = 1 << 18


class BudgetExceeded(RuntimeError):
    pass


def env_budget(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("SLHASH_BUDGET")
    return int(raw) if raw else default


def codes_fit(n: int, p: int) -> bool:
    return p ** (n * n) < 2**62


def encode(mats: np.ndarray, p: int) -> np.ndarray:
    """(k, n*n) array of entries in [0, p) -> (k,) int64 codes."""
    codes = np.zeros(mats.shape[0], dtype=np.int64)
    for j in range(mats.shape[1]):
        codes = codes * p + mats[:, j]
    return codes


def decode(codes: np.ndarray, n: int, p: int) -> np.ndarray:
    out = np.empty((codes.shape[0], n * n), dtype=np.int64)
    c = codes.copy()
    for j in range(n * n - 1, -1, -1):
        out[:, j] = c % p
        c //= p
    return out


def encode_matrix(m: Matrix) -> int:
    code = 0
    for v in m.flat:
        code = code * m.p + v
    return code


def right_mul(mats: np.ndarray, g: np.ndarray, n: int, p: int) -> np.ndarray:
    """Batch product X @ g mod p on flat (k, n*n) rows."""
    x = mats.reshape(-1, n, n)
    return (x @ g.reshape(n, n) % p).reshape(-1, n * n)


@dataclass
class FiniteGroup:
    """A finite subgroup of GL_n(F_p), enumerated and indexed by code."""

    n: int
    p: int
    codes: np.ndarray  # sorted, int64
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return int(self.codes.shape[0])

    def __len__(self):
        return self.order

    def index_of(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.codes, codes)
        idx[idx == self.order] = 0
        if not np.array_equal(self.codes[idx], codes):
            raise KeyError("element not in group")
        return idx

    def index(self, m: Matrix) -> int:
        return int(self.index_of(np.array([encode_matrix(m)], dtype=np.int64))[0])

    def element(self, i: int) -> Matrix:
        flat = decode(self.codes[i:i + 1], self.n, self.p)[0]
        return Matrix.from_flat([int(v) for v in flat], self.n, self.p)

    def identity_index(self) -> int:
        return self.index(Matrix.identity(self.n, self.p))

    def right_mult_table(self, g: Matrix) -> np.ndarray:
        """perm[i] = index of (element i) * g."""
        key = g.flat
        if key not in self._tables:
            gg = np.array(g.flat, dtype=np.int64)
            perm = np.empty(self.order, dtype=np.int64)
            for lo in range(0, self.order, _CHUNK):
                chunk = decode(self.codes[lo:lo + _CHUNK], self.n, self.p)
                perm[lo:lo + _CHUNK] = self.index_of(
                    encode(right_mul(chunk, gg, self.n, self.p), self.p)
                )
            self._tables[key] = perm
        return self._tables[key]


def closure(generators: list[Matrix], budget: int | None = None) -> FiniteGroup:
    """Breadth-first closure of the identity under right multiplication.

    Raises BudgetExceeded once more than ``budget`` elements have been found.
    """
    budget = env_budget() if budget is None else budget
    n, p = generators[0].n, generators[0].p
    if not codes_fit(n, p):
        raise BudgetExceeded(f"p^(n^2) = {p}^{n * n} too large to index")
    gens = [np.array(g.flat, dtype=np.int64) for g in generators]
    seen = np.array([encode_matrix(Matrix.identity(n, p))], dtype=np.int64)
    frontier = seen
    while frontier.size:
        found = []
        for lo in range(0, frontier.size, _CHUNK):
            mats = decode(frontier[lo:lo + _CHUNK], n, p)
            for g in gens:
                found.append(encode(right_mul(mats, g, n, p), p))
        new = np.setdiff1d(np.unique(np.concatenate(found)), seen, assume_unique=True)
        seen = np.union1d(seen, new)
        if seen.size > budget:
            raise BudgetExceeded(f"closure exceeded budget of {budget} elements")
        frontier = new
    return FiniteGroup(n, p, seen)


def all_matrices(n: int, p: int, start: int = 0, stop: int | None = None):
    """Yield (codes, flat entries) chunks of all n x n matrices in code order."""
    total = p ** (n * n)
    stop = total if stop is None else min(stop, total)
    for lo in range(start, stop, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, stop), dtype=np.int64)
        yield codes, decode(codes, n, p)


def det_mod_p(mats: np.ndarray, n: int, p: int) -> np.ndarray:
    """Exact batch determinants mod p via elimination on (k, n*n) rows."""
    a = mats.reshape(-1, n, n).astype(np.int64) % p
    k = a.shape[0]
    det = np.ones(k, dtype=np.int64)
    alive = np.ones(k, dtype=bool)
    rows = np.arange(k)
    inv = np.array([pow(v, -1, p) if v else 0 for v in range(p)], dtype=np.int64)
    for col in range(n):
        nz = a[:, col:, col] != 0
        has = nz.any(axis=1)
        alive &= has
        piv = col + np.argmax(nz, axis=1)
        swap = piv != col
        det[swap] = -det[swap]
        prow = a[rows, piv].copy()
        a[rows, piv] = a[:, col]
        a[:, col] = prow
        d = a[:, col, col]
        det = det * d % p
        for r in range(col + 1, n):
            f = a[:, r, col] * inv[d] % p
            a[:, r] = (a[:, r] - f[:, None] * a[:, col]) % p
    det[~alive] = 0
    return det % p


def special_linear_codes(n: int, p: int, budget: int | None = None) -> np.ndarray:
    """Codes of every element of SL_n(F_p), by direct determinant filtering."""
    budget = env_budget() if budget is None else budget
    if p ** (n * n) > 50 * budget:
        raise BudgetExceeded(f"scanning {p}^{n * n} matrices exceeds budget")
    out = [codes[det_mod_p(mats, n, p) == 1] for codes, mats in all_matrices(n, p)]
    return np.concatenate(out)
