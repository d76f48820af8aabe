"""Parameter validation and generator construction.

For ``n = 3`` the exponent ``ell`` must be a power of 4 and ``a = 1, b = -1``
mod 3. For ``n >= 4`` a witness prime ``q`` must divide ``n-1``, ``a-1`` and
``b-1``, with ``ell = q**(k+1) + 1 >= 3(n-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Literal

from sympy import isprime, primefactors

from .algebra import Matrix, mat_inv_z, mat_pow, max_abs_entry
from .groups import BudgetExceeded, closure, env_budget


class ParamError(ValueError):
    """Invalid parameter set; ``constraint`` names the violated rule."""

    constraint = "parameters"

    def __init__(self, message: str, constraint: str | None = None):
        super().__init__(message)
        if constraint is not None:
            self.constraint = constraint


class NotPrime(ParamError):
    constraint = "p prime"


class CongruenceViolated(ParamError):
    pass


class EllFormViolated(ParamError):
    pass


class EllTooSmall(ParamError):
    constraint = "ell >= 3(n-1)"


class PTooSmall(ParamError):
    constraint = "p >= n"


class DegenerateGenerators(ParamError):
    constraint = "A, B != I mod p"


@dataclass(frozen=True)
class ParamSet:
    n: int
    p: int
    a: int
    b: int
    ell: int
    q: int | None
    k: int

    def fingerprint(self) -> str:
        return f"n={self.n},p={self.p},a={self.a},b={self.b},ell={self.ell}"


def _ell_exponent(ell: int, base: int, offset: int) -> int | None:
    """Return k >= 0 with ell - offset == base**k, or None."""
    v = ell - offset
    if v < 1:
        return None
    k = 0
    while v % base == 0:
        v //= base
        k += 1
    return k if v == 1 else None


def _superdiag(n: int, a: int) -> Matrix:
    return Matrix.from_rows([[1 if i == j else (a if j == i + 1 else 0) for j in range(n)]
                             for i in range(n)])


def _subdiag(n: int, b: int) -> Matrix:
    return Matrix.from_rows([[1 if i == j else (b if j == i - 1 else 0) for j in range(n)]
                             for i in range(n)])


def base_matrices(n: int, a: int, b: int) -> tuple[Matrix, Matrix]:
    """The unipotent integer matrices with ``a`` on the superdiagonal and ``b`` below."""
    return _superdiag(n, a), _subdiag(n, b)


def validate_params(n: int, p: int, a: int, b: int, ell: int) -> ParamSet:
    if n < 3:
        raise ParamError(f"n = {n}: dimension must be at least 3", "n >= 3")
    if a < 2 or b < 2 or ell < 2:
        raise ParamError("a, b, ell must all be >= 2", "a, b, ell >= 2")
    if p < 2 or not isprime(p):
        raise NotPrime(f"p = {p} is not prime")
    if p < n:
        raise PTooSmall(f"p = {p} < n = {n}: generators would not have order p")

    if n == 3:
        if a % 3 != 1:
            raise CongruenceViolated(f"a = {a} violates a ≡ 1 (mod 3)", "a ≡ 1 (mod 3)")
        if b % 3 != 2:
            raise CongruenceViolated(f"b = {b} violates b ≡ -1 (mod 3)", "b ≡ -1 (mod 3)")
        k = _ell_exponent(ell, 4, 0)
        if not k:
            raise EllFormViolated(f"ell = {ell} is not 4^k with k >= 1", "ell = 4^k, k >= 1")
        q = None
    else:
        candidates = primefactors(gcd(n - 1, a - 1, b - 1)) if gcd(n - 1, a - 1, b - 1) > 1 else []
        if not candidates:
            raise CongruenceViolated(
                f"no prime q with n ≡ a ≡ b ≡ 1 (mod q) for n={n}, a={a}, b={b}",
                "n ≡ a ≡ b ≡ 1 (mod q)",
            )
        if ell < 3 * (n - 1):
            raise EllTooSmall(f"ell = {ell} < 3(n-1) = {3 * (n - 1)}")
        for q in candidates:
            k1 = _ell_exponent(ell, q, 1)
            if k1 is not None and k1 >= 1:
                k = k1 - 1
                break
        else:
            raise EllFormViolated(
                f"ell = {ell} is not q^(k+1) + 1 for any q in {candidates}",
                "ell = q^(k+1) + 1",
            )

    ps = ParamSet(n, p, a, b, ell, q, k)
    A, B = base_matrices(n, a, b)
    if mat_pow(A.reduce(p), ell).is_identity() or mat_pow(B.reduce(p), ell).is_identity():
        raise DegenerateGenerators(f"A or B reduces to the identity mod {p}")
    return ps


@dataclass(frozen=True)
class GeneratorSet:
    """Step matrices A, B, A^-1, B^-1 over Z and over F_p, plus the entry bound c."""

    params: ParamSet
    over_z: tuple[Matrix, Matrix, Matrix, Matrix]
    over_fp: tuple[Matrix, Matrix, Matrix, Matrix]
    c: int

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def A(self) -> Matrix:
        return self.over_fp[0]

    @property
    def B(self) -> Matrix:
        return self.over_fp[1]


def build_generators(ps: ParamSet) -> GeneratorSet:
    At, Bt = base_matrices(ps.n, ps.a, ps.b)
    A, B = mat_pow(At, ps.ell), mat_pow(Bt, ps.ell)
    over_z = (A, B, mat_inv_z(A), mat_inv_z(B))
    over_fp = tuple(m.reduce(ps.p) for m in over_z)
    if over_fp[0].is_identity() or over_fp[1].is_identity():
        raise DegenerateGenerators(f"A or B reduces to the identity mod {ps.p}")
    return GeneratorSet(ps, over_z, over_fp, max(max_abs_entry(m) for m in over_z))


def default_params(p: int) -> ParamSet:
    return validate_params(3, p, 4, 2, 4)


def with_generators(gens: GeneratorSet, A: Matrix, B: Matrix) -> GeneratorSet:
    """A GeneratorSet with replaced mod-p matrices (used for conjugated or synthetic pairs)."""
    from .algebra import mat_inv

    return GeneratorSet(gens.params, gens.over_z, (A, B, mat_inv(A), mat_inv(B)), gens.c)


@dataclass(frozen=True)
class GenerationCheck:
    status: Literal["generates", "subgroup", "budget_exceeded"]
    order: int | None
    group_order: int


def check_generation(gens: GeneratorSet, max_elements: int | None = None) -> GenerationCheck:
    """Close {A, B, A^-1, B^-1} from I and compare with |SL_n(F_p)|."""
    from .analysis import group_order

    n, p = gens.n, gens.p
    target = group_order(n, p)
    budget = env_budget() if max_elements is None else max_elements
    try:
        G = closure(list(gens.over_fp), budget)
    except BudgetExceeded:
        return GenerationCheck("budget_exceeded", None, target)
    status = "generates" if G.order == target else "subgroup"
    return GenerationCheck(status, G.order, target)


def read_config(path: str) -> dict[str, int]:
    """Read ``key = value`` lines (keys n, p, a, b, ell); ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"bad config line: {line!r}")
            key = key.strip()
            if key not in ("n", "p", "a", "b", "ell"):
                raise ValueError(f"unknown config key {key!r}")
            out[key] = int(value.strip())
    return out
