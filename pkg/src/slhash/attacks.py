"""Factorization certificates, E_m polynomial systems and the palindromic attack."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .algebra import Matrix, fp_inv, mat_inv, mat_mul, mat_pow, nullspace_mod_p
from .analysis import free_reduce
from .groups import BudgetExceeded, all_matrices, det_mod_p, env_budget
from .hasher import AttributionTable, Step, as_trits, trits_to_str, walk_steps, hash_trits
from .params import GeneratorSet


class NotACollision(ValueError):
    pass


class NotFound(LookupError):
    pass


# -- factorization words -------------------------------------------------------

@dataclass(frozen=True)
class FactorizationWord:
    """Exponent pairs (k_i, l_i) standing for A^k1 B^l1 ... A^km B^lm."""

    pairs: tuple[tuple[int, int], ...]

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def weight(self) -> int:
        return sum(k + l for k, l in self.pairs)

    def to_text(self) -> str:
        return "".join(f"{k} {l}\n" for k, l in self.pairs)

    @classmethod
    def parse(cls, text: str) -> "FactorizationWord":
        pairs = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].split()
            if line:
                k, l = (int(v) for v in line)
                pairs.append((k, l))
        return cls(tuple(pairs))


@dataclass(frozen=True)
class NontrivialityWindow:
    C1: float
    C2: float

    def __post_init__(self):
        if not 0 < self.C1 <= self.C2:
            raise ValueError("need 0 < C1 <= C2")

    @classmethod
    def default(cls, gens: GeneratorSet) -> "NontrivialityWindow":
        c1 = 1.0 / math.log(gens.n * gens.c)
        return cls(c1, 10 * c1)


def evaluate_factorization(w: FactorizationWord, gens: GeneratorSet) -> Matrix:
    A, B = gens.A, gens.B
    acc = Matrix.identity(gens.n, gens.p)
    for k, l in w.pairs:
        acc = acc @ mat_pow(A, k) @ mat_pow(B, l)
    return acc


def verify_factorization(w: FactorizationWord, target: Matrix, gens: GeneratorSet) -> bool:
    return evaluate_factorization(w, gens) == target


def is_nontrivial(w: FactorizationWord, p: int, window: NontrivialityWindow) -> bool:
    return window.C1 * math.log(p) <= w.weight <= window.C2 * math.log(p)


def steps_to_factorization(word: Iterable[Step], p: int) -> FactorizationWord:
    """Regroup a step word into alternating A / B blocks with exponents in [0, p).

    Blocks whose exponent vanishes mod p are full cycles; they are dropped
    and their neighbours merged, so the result is the normal form of the
    word once A^p = B^p = I is imposed. Trivial relators come out empty.
    """
    blocks: list[list] = []  # [is_a, exponent]
    for s in word:
        is_a = s in (Step.A, Step.Ainv)
        e = 1 if s in (Step.A, Step.B) else -1
        if blocks and blocks[-1][0] == is_a:
            blocks[-1][1] = (blocks[-1][1] + e) % p
        else:
            blocks.append([is_a, e % p])
        while blocks and blocks[-1][1] == 0:
            blocks.pop()
    pairs: list[list[int]] = []
    for is_a, e in blocks:
        if is_a:
            pairs.append([e, 0])
        elif pairs and pairs[-1][1] == 0:
            pairs[-1][1] = e
        else:
            pairs.append([0, e])
    return FactorizationWord(tuple((k, l) for k, l in pairs))


def collision_to_relator(x, y, table: AttributionTable, gens: GeneratorSet) -> FactorizationWord:
    """steps(x) * steps(y)^-1, freely reduced and regrouped into A/B blocks."""
    x, y = as_trits(x), as_trits(y)
    if x == y:
        raise NotACollision("inputs must differ")
    if hash_trits(x, table, gens) != hash_trits(y, table, gens):
        raise NotACollision("inputs hash to different digests")
    sx, sy = walk_steps(x, table), walk_steps(y, table)
    word = free_reduce(sx + [s.inverse for s in reversed(sy)])
    return steps_to_factorization(word, gens.p)


def relator_word(x, y, table: AttributionTable) -> list[Step]:
    sx, sy = walk_steps(x, table), walk_steps(y, table)
    return free_reduce(sx + [s.inverse for s in reversed(sy)])


def birthday_search(table: AttributionTable, gens: GeneratorSet, max_length: int = 16,
                    budget: int | None = None, nontrivial: bool = True) -> tuple[str, str] | None:
    """Hash trit strings in length-then-lexicographic order until two digests repeat.

    With ``nontrivial`` set, collisions that only come from A^p = B^p = I
    (empty normal form) are skipped.
    """
    budget = env_budget() if budget is None else budget
    seen: dict[tuple, list[str]] = {}
    count = 0
    for length in range(max_length + 1):
        for t in itertools.product((1, 2, 3), repeat=length):
            key = hash_trits(t, table, gens).matrix.flat
            s = trits_to_str(t)
            for other in seen.get(key, ()):
                if not nontrivial or collision_to_relator(other, s, table, gens).m:
                    return other, s
            seen.setdefault(key, []).append(s)
            count += 1
            if count > budget:
                raise BudgetExceeded("birthday search exceeded budget")
    return None


# -- E_m polynomial systems ----------------------------------------------------

Poly = dict  # exponent tuple -> coefficient mod p


def _poly_mul(f: Poly, g: Poly, p: int) -> Poly:
    out: Poly = {}
    for ef, cf in f.items():
        for eg, cg in g.items():
            e = tuple(a + b for a, b in zip(ef, eg))
            out[e] = (out.get(e, 0) + cf * cg) % p
    return {e: c for e, c in out.items() if c}


def _poly_add(f: Poly, g: Poly, p: int) -> Poly:
    out = dict(f)
    for e, c in g.items():
        out[e] = (out.get(e, 0) + c) % p
    return {e: c for e, c in out.items() if c}


def binomial_poly(j: int, p: int) -> list[int]:
    """Coefficients (low degree first) of C(k, j) = k(k-1)...(k-j+1)/j! over F_p."""
    coeffs = [1]
    for r in range(j):
        # multiply by (k - r)
        nxt = [0] * (len(coeffs) + 1)
        for d, c in enumerate(coeffs):
            nxt[d + 1] += c
            nxt[d] -= r * c
        coeffs = nxt
    inv = fp_inv(math.factorial(j), p)
    return [c * inv % p for c in coeffs]


def power_polynomials(M: Matrix, var: int, nvars: int) -> list[list[Poly]]:
    """Entries of M^k as polynomials in variable ``var`` for unipotent M (M - I nilpotent).

    M^k = sum_{j<n} C(k, j) (M - I)^j, valid for every integer k >= 0.
    """
    n, p = M.n, M.p
    N = Matrix.from_rows(((M[i, j] - (i == j)) for j in range(n)) for i in range(n)).reduce(p)
    if not mat_pow(N, n).flat == (0,) * (n * n):
        raise ValueError("matrix is not unipotent")
    out = [[{} for _ in range(n)] for _ in range(n)]
    Nj = Matrix.identity(n, p)
    for j in range(n):
        bp = binomial_poly(j, p)
        for i in range(n):
            for l in range(n):
                if Nj[i, l]:
                    for d, c in enumerate(bp):
                        if c:
                            e = tuple(d if v == var else 0 for v in range(nvars))
                            out[i][l][e] = (out[i][l].get(e, 0) + c * Nj[i, l]) % p
        Nj = mat_mul(Nj, N)
    return [[{e: c for e, c in entry.items() if c} for entry in row] for row in out]


def _polymat_mul(X, Y, p):
    n = len(X)
    return [[
        _sum_polys((_poly_mul(X[i][r], Y[r][j], p) for r in range(n)), p)
        for j in range(n)] for i in range(n)]


def _sum_polys(polys, p):
    acc: Poly = {}
    for f in polys:
        acc = _poly_add(acc, f, p)
    return acc


@dataclass
class EmSystem:
    """n^2 equations entry(i, j) - target(i, j) = 0 in unknowns k1, l1, ..., km, lm."""

    n: int
    p: int
    m: int
    equations: dict[tuple[int, int], Poly] = field(default_factory=dict)


def emit_em_system(m: int, target: Matrix, gens: GeneratorSet) -> EmSystem:
    if m < 1:
        raise ValueError("m must be >= 1")
    n, p = gens.n, gens.p
    nv = 2 * m
    acc = None
    for i in range(m):
        for var, G in ((2 * i, gens.A), (2 * i + 1, gens.B)):
            P = power_polynomials(G, var, nv)
            acc = P if acc is None else _polymat_mul(acc, P, p)
    zero = (0,) * nv
    eqs = {}
    for i in range(n):
        for j in range(n):
            eqs[(i, j)] = _poly_add(acc[i][j], {zero: -target[i, j] % p}, p)
    return EmSystem(n, p, m, eqs)


def evaluate_poly(f: Poly, point, p: int) -> int:
    total = 0
    for e, c in f.items():
        term = c
        for x, d in zip(point, e):
            if d:
                term = term * pow(x, d, p) % p
        total += term
    return total % p


def evaluate_em_system(system: EmSystem, point) -> dict[tuple[int, int], int]:
    """Residuals of each equation at ``point`` = (k1, l1, ..., km, lm)."""
    return {ij: evaluate_poly(f, point, system.p) for ij, f in system.equations.items()}


def em_system_to_text(system: EmSystem) -> str:
    """One equation per line: ``i j`` then ``e1,...,e2m:coeff`` monomials."""
    vars_ = " ".join(f"k{i} l{i}" for i in range(1, system.m + 1))
    lines = [f"# n={system.n} p={system.p} m={system.m}", f"# variables: {vars_}"]
    for (i, j), f in sorted(system.equations.items()):
        monos = " ".join(f"{','.join(map(str, e))}:{c}" for e, c in sorted(f.items()))
        lines.append(f"{i} {j} {monos}".rstrip())
    return "\n".join(lines) + "\n"


def parse_em_system(text: str) -> EmSystem:
    header: dict[str, int] = {}
    eqs = {}
    for line in text.splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                key, sep, val = tok.partition("=")
                if sep and key in ("n", "p", "m"):
                    header[key] = int(val)
            continue
        parts = line.split()
        if not parts:
            continue
        f = {}
        for mono in parts[2:]:
            e, _, c = mono.partition(":")
            f[tuple(int(v) for v in e.split(","))] = int(c)
        eqs[(int(parts[0]), int(parts[1]))] = f
    return EmSystem(header["n"], header["p"], header["m"], eqs)


# -- palindromic attack ----------------------------------------------------------

@dataclass(frozen=True)
class SymmetrizerResult:
    C: Matrix
    A_hat: Matrix
    B_hat: Matrix
    candidates_tried: int
    matches_found: int
    mode: str


def conjugate(C: Matrix, M: Matrix) -> Matrix:
    return C @ M @ mat_inv(C)


def symmetrizes(C: Matrix, A: Matrix, B: Matrix) -> bool:
    return conjugate(C, A).is_symmetric() and conjugate(C, B).is_symmetric()


def _batch_symmetrizes(mats: np.ndarray, A: np.ndarray, B: np.ndarray, n: int, p: int) -> np.ndarray:
    """C A C^-1 symmetric  <=>  (C^T C) A = A^T (C^T C)."""
    C = mats.reshape(-1, n, n)
    S = np.einsum("kji,kjl->kil", C, C) % p
    ok = ((S @ A - A.T @ S) % p == 0).all(axis=(1, 2))
    ok &= ((S @ B - B.T @ S) % p == 0).all(axis=(1, 2))
    return ok


def find_symmetrizer(gens: GeneratorSet, mode: str = "exhaustive",
                     budget: int | None = None) -> SymmetrizerResult:
    """Find invertible C making C A C^-1 and C B C^-1 symmetric.

    ``exhaustive`` scans all n x n matrices in lexicographic order (after
    trying I) and returns the first hit. ``bilinear`` solves the linear
    conditions on S = C^T C and then factors S.
    """
    A, B = gens.A, gens.B
    n, p = gens.n, gens.p
    I = Matrix.identity(n, p)
    if A.is_symmetric() and B.is_symmetric():
        return SymmetrizerResult(I, A, B, 1, 1, mode)
    if mode == "bilinear":
        return _bilinear_symmetrizer(gens)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    budget = env_budget() if budget is None else budget
    Ai, Bi = np.array(A.rows, dtype=np.int64), np.array(B.rows, dtype=np.int64)
    tried = 0
    for codes, mats in all_matrices(n, p):
        if tried > budget:
            raise BudgetExceeded(f"symmetrizer scan exceeded budget of {budget} candidates")
        tried += len(codes)
        ok = _batch_symmetrizes(mats, Ai, Bi, n, p) & (det_mod_p(mats, n, p) != 0)
        hits = np.flatnonzero(ok)
        if hits.size:
            C = Matrix.from_flat([int(v) for v in mats[hits[0]]], n, p)
            return SymmetrizerResult(C, conjugate(C, A), conjugate(C, B), tried, int(hits.size), mode)
    raise NotFound("no symmetrizer exists")


def _sym_index(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def symmetric_solutions(gens: GeneratorSet) -> list[Matrix]:
    """Basis of symmetric S with S A = A^T S and S B = B^T S."""
    n, p = gens.n, gens.p
    idx = _sym_index(n)
    pos = {}
    for t, (i, j) in enumerate(idx):
        pos[(i, j)] = pos[(j, i)] = t
    rows = []
    for G in (gens.A, gens.B):
        # (S G - G^T S)[i][l] = sum_r S[i][r] G[r][l] - G[r][i] S[r][l]
        for i in range(n):
            for l in range(n):
                row = [0] * len(idx)
                for r in range(n):
                    row[pos[(i, r)]] += G[r, l]
                    row[pos[(r, l)]] -= G[r, i]
                rows.append(row)
    basis = nullspace_mod_p(rows, len(idx), p)
    out = []
    for v in basis:
        S = [[0] * n for _ in range(n)]
        for t, (i, j) in enumerate(idx):
            S[i][j] = S[j][i] = v[t]
        out.append(Matrix.from_rows(S, p))
    return out


def _sqrt_mod(a: int, p: int) -> int | None:
    a %= p
    for x in range(p):
        if x * x % p == a:
            return x
    return None


def congruence_diagonalize(S: Matrix) -> tuple[Matrix, list[int]]:
    """P invertible and diagonal D with S = P^T D P (p odd, S symmetric invertible)."""
    n, p = S.n, S.p
    a = [list(r) for r in S.rows]
    # track E with E S E^T = D; then P = E^-1
    E = [[int(i == j) for j in range(n)] for i in range(n)]

    def add_row_col(dst, src, f):
        a[dst] = [(x + f * y) % p for x, y in zip(a[dst], a[src])]
        for r in range(n):
            a[r][dst] = (a[r][dst] + f * a[r][src]) % p
        E[dst] = [(x + f * y) % p for x, y in zip(E[dst], E[src])]

    def swap(i, j):
        a[i], a[j] = a[j], a[i]
        for r in range(n):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        E[i], E[j] = E[j], E[i]

    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j]), None)
            if j is not None:
                swap(k, j)
            else:
                j = next((j for j in range(k + 1, n) if a[k][j]), None)
                if j is None:
                    raise ValueError("singular form")
                add_row_col(k, j, 1)  # a[k][k] becomes 2 a[k][j] != 0 for odd p
        inv = fp_inv(a[k][k], p)
        for r in range(k + 1, n):
            if a[r][k]:
                add_row_col(r, k, -a[r][k] * inv % p)
    D = [a[i][i] for i in range(n)]
    P = mat_inv(Matrix.from_rows(E, p)).transpose()
    return P, D


def sqrt_form(S: Matrix) -> Matrix | None:
    """Some C with C^T C = S, or None when S is not congruent to I."""
    n, p = S.n, S.p
    P, D = congruence_diagonalize(S)
    R = [[0] * n for _ in range(n)]
    nonsq = []
    for i, d in enumerate(D):
        r = _sqrt_mod(d, p)
        if r is None:
            nonsq.append(i)
        else:
            R[i][i] = r
    if len(nonsq) % 2:
        return None
    for i, j in zip(nonsq[::2], nonsq[1::2]):
        u, v = D[i], D[j]
        # x^2 + y^2 = u, and v = u t^2
        x, y = next((x, y) for x in range(p) for y in range(p) if (x * x + y * y - u) % p == 0)
        t = _sqrt_mod(v * fp_inv(u, p), p)
        # block [[x, y t], [-y, x t]]: columns scaled so R^T R = diag(u, u t^2)
        R[i][i], R[i][j] = x, y * t % p
        R[j][i], R[j][j] = -y % p, x * t % p
    C = Matrix.from_rows(R, p) @ P
    return C


def _bilinear_symmetrizer(gens: GeneratorSet) -> SymmetrizerResult:
    from .algebra import mat_det

    n, p = gens.n, gens.p
    basis = symmetric_solutions(gens)
    tried = 0
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        if not any(coeffs):
            continue
        S = Matrix.zero(n, p)
        for c, Bm in zip(coeffs, basis):
            if c:
                S = S + Matrix.from_rows(((c * v) for v in r) for r in Bm.rows).reduce(p)
        tried += 1
        if mat_det(S) == 0:
            continue
        C = sqrt_form(S)
        if C is not None and symmetrizes(C, gens.A, gens.B):
            return SymmetrizerResult(C, conjugate(C, gens.A), conjugate(C, gens.B), tried, 1, "bilinear")
    raise NotFound("no invertible symmetric solution is congruent to the identity")


@dataclass(frozen=True)
class SymmetrizerDensity:
    ambient: str
    total: int
    matches: int

    @property
    def fraction(self) -> float:
        return self.matches / self.total


def symmetrizer_density(gens: GeneratorSet, budget: int | None = None) -> list[SymmetrizerDensity]:
    """Fraction of SL_n(F_p), of GL_n(F_p) and of GL_n(F_p)/scalars symmetrizing both generators.

    Scalar classes are represented by matrices whose first nonzero entry is 1.
    """
    n, p = gens.n, gens.p
    budget = env_budget() if budget is None else budget
    if p ** (n * n) > 50 * budget:
        raise BudgetExceeded(f"scanning {p}^{n * n} matrices exceeds budget")
    Ai, Bi = np.array(gens.A.rows, dtype=np.int64), np.array(gens.B.rows, dtype=np.int64)
    tot = {"SL": 0, "GL": 0, "PGL": 0}
    hit = dict.fromkeys(tot, 0)
    for _, mats in all_matrices(n, p):
        det = det_mod_p(mats, n, p)
        ok = _batch_symmetrizes(mats, Ai, Bi, n, p)
        first_nz = mats[np.arange(len(mats)), np.argmax(mats != 0, axis=1)]
        for key, sel in (("SL", det == 1), ("GL", det != 0), ("PGL", (det != 0) & (first_nz == 1))):
            tot[key] += int(sel.sum())
            hit[key] += int((sel & ok).sum())
    return [SymmetrizerDensity(k, tot[k], hit[k]) for k in ("SL", "GL", "PGL")]


def rho(M: Matrix, A_hat: Matrix, B_hat: Matrix) -> Matrix:
    """M -> A M A + B M B."""
    return A_hat @ M @ A_hat + B_hat @ M @ B_hat


@dataclass(frozen=True)
class PowerWitness:
    exponent: int
    powers: frozenset
    witness: int | None

    @property
    def ok(self) -> bool:
        return self.witness is not None


def power_entry_witness(M: Matrix, rhoM: Matrix, p: int) -> list[PowerWitness]:
    """For each i in 1..p-1, an entry of rho(M) that is no i-th power of an entry of M."""
    out = []
    for i in range(1, p):
        powers = frozenset(pow(e, i, p) for e in M.flat)
        witness = next((v for v in rhoM.flat if v not in powers), None)
        out.append(PowerWitness(i, powers, witness))
    return out


def palindromic_product(word: str, A_hat: Matrix, B_hat: Matrix) -> Matrix:
    """Product over a word in the letters 'A', 'B', 'a' (A^-1), 'b' (B^-1)."""
    mats = {"A": A_hat, "B": B_hat}
    if "a" in word:
        mats["a"] = mat_inv(A_hat)
    if "b" in word:
        mats["b"] = mat_inv(B_hat)
    acc = Matrix.identity(A_hat.n, A_hat.p)
    for ch in word:
        acc = acc @ mats[ch]
    return acc


REFERENCE_C11 = ((2, 6, 10), (5, 3, 10), (2, 3, 3))
