"""The non-backtracking Cayley-graph hash.

Input is a string over {1, 2, 3}. The first trit is read through the row
``first_row`` of the attribution table; every later trit is read through the
row indexed by ``s^-1(inverse(last step))``, so a step is never followed by
its own inverse. The digest is the ordered product of the step matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

from .algebra import Matrix, identity_flat, mul_flat
from .params import GeneratorSet, ParamSet


class InvalidTrit(ValueError):
    pass


class Step(IntEnum):
    A = 0
    B = 1
    Ainv = 2
    Binv = 3

    @property
    def inverse(self) -> "Step":
        return Step(self ^ 2)

    @property
    def label(self) -> str:
        return ("A", "B", "A^-1", "B^-1")[self]

    @classmethod
    def parse(cls, token: str) -> "Step":
        key = token.strip().replace("⁻¹", "^-1")
        aliases = {
            "A": cls.A, "B": cls.B,
            "A^-1": cls.Ainv, "Ainv": cls.Ainv, "a": cls.Ainv, "A-": cls.Ainv,
            "B^-1": cls.Binv, "Binv": cls.Binv, "b": cls.Binv, "B-": cls.Binv,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown step {token!r}") from None


@dataclass(frozen=True)
class AttributionTable:
    """Maps ``s: [4] -> steps`` and ``s_rows[lambda]: [3] -> steps \\ {s(lambda)}``.

    ``s`` and each row are stored 0-based: ``s[lam - 1]`` is s(lam) and
    ``s_rows[lam - 1][t - 1]`` is s_lam(t).
    """

    s: tuple[Step, Step, Step, Step]
    s_rows: tuple[tuple[Step, Step, Step], ...]
    first_row: int = 1
    _next: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if sorted(self.s) != list(Step):
            raise ValueError("s must be a bijection onto the four steps")
        if len(self.s_rows) != 4 or not 1 <= self.first_row <= 4:
            raise ValueError("need four rows and first_row in 1..4")
        for lam, row in enumerate(self.s_rows):
            if sorted(row) != sorted(set(Step) - {self.s[lam]}):
                raise ValueError(f"row {lam + 1} must be a bijection onto steps other than s({lam + 1})")
        # _next[last][t-1]: step chosen after `last`
        nxt = tuple(self.s_rows[self.row_after(last) - 1] for last in Step)
        object.__setattr__(self, "_next", nxt)

    def row_after(self, last: Step) -> int:
        """lambda = s^-1(last^-1), 1-based."""
        return self.s.index(last.inverse) + 1

    def context_of_row(self, lam: int) -> Step:
        """The (virtual) previous step whose successor row is ``lam``."""
        return self.s[lam - 1].inverse

    def next_step(self, last: Step | None, trit: int) -> Step:
        if last is None:
            return self.s_rows[self.first_row - 1][trit - 1]
        return self._next[last][trit - 1]

    def row_for_last(self, last: Step) -> tuple[Step, Step, Step]:
        return self._next[last]

    def with_first_row(self, lam: int) -> "AttributionTable":
        return AttributionTable(self.s, self.s_rows, lam)

    def to_grid(self) -> str:
        lines = [f"# first_row = {self.first_row}"]
        for last in (Step.Ainv, Step.Binv, Step.A, Step.B):
            lines.append(last.label + ": " + " ".join(st.label for st in self._next[last]))
        return "\n".join(lines) + "\n"


def default_table() -> AttributionTable:
    S = Step
    return AttributionTable(
        s=(S.A, S.B, S.Ainv, S.Binv),
        s_rows=(
            (S.B, S.Ainv, S.Binv),
            (S.A, S.Ainv, S.Binv),
            (S.A, S.Binv, S.B),
            (S.A, S.Ainv, S.B),
        ),
        first_row=1,
    )


def table_from_grid(text: str, s: Sequence[Step] | None = None) -> AttributionTable:
    """Parse a 4x3 grid keyed by last step (``LAST: X Y Z`` per line).

    A ``first_row = k`` line (optionally behind ``#``) sets the first row.
    """
    s = tuple(s) if s is not None else default_table().s
    rows: dict[Step, tuple[Step, ...]] = {}
    first_row = 1
    for raw in text.splitlines():
        line = raw.strip().lstrip("#").strip()
        if not line:
            continue
        if line.startswith("first_row"):
            first_row = int(line.split("=", 1)[1])
            continue
        if raw.strip().startswith("#"):
            continue
        label, sep, rest = line.partition(":")
        if not sep:
            raise ValueError(f"bad grid line {raw!r}")
        cells = tuple(Step.parse(t) for t in rest.split())
        if len(cells) != 3:
            raise ValueError(f"row {label!r} needs 3 cells")
        rows[Step.parse(label)] = cells
    if set(rows) != set(Step):
        raise ValueError("grid needs one row per step")
    s_rows = tuple(rows[s[lam].inverse] for lam in range(4))
    return AttributionTable(s, s_rows, first_row)


def as_trits(trits: Iterable[int] | str) -> tuple[int, ...]:
    if isinstance(trits, str):
        out = tuple(ord(ch) - 48 for ch in trits)
    else:
        out = tuple(trits)
    for t in out:
        if t not in (1, 2, 3):
            raise InvalidTrit(f"trit {t!r} not in {{1, 2, 3}}")
    return out


def trits_to_str(trits: Iterable[int]) -> str:
    return "".join(map(str, trits))


def walk_steps(trits, table: AttributionTable, start_row: int | None = None) -> list[Step]:
    """The step-matrix word encoded by ``trits`` (the map from [3]* to reduced words)."""
    trits = as_trits(trits)
    out = []
    if not trits:
        return out
    row = table.s_rows[(start_row or table.first_row) - 1]
    last = row[trits[0] - 1]
    out.append(last)
    nxt = table._next
    for t in trits[1:]:
        last = nxt[last][t - 1]
        out.append(last)
    return out


@dataclass(frozen=True)
class WalkState:
    acc: Matrix
    last: Step | None = None
    length: int = 0


def initial_state(gens: GeneratorSet) -> WalkState:
    return WalkState(Matrix.identity(gens.n, gens.p))


def step(state: WalkState, trit: int, table: AttributionTable, gens: GeneratorSet) -> WalkState:
    if trit not in (1, 2, 3):
        raise InvalidTrit(f"trit {trit!r} not in {{1, 2, 3}}")
    nxt = table.next_step(state.last, trit)
    return WalkState(state.acc @ gens.over_fp[nxt], nxt, state.length + 1)


@dataclass(frozen=True)
class Digest:
    matrix: Matrix
    params: ParamSet | None = field(default=None, compare=False)

    def serialize(self) -> bytes:
        return serialize_digest(self)

    def hexdigest(self) -> str:
        return serialize_digest(self).hex()


def product_of_steps(steps: Sequence[Step], gens: GeneratorSet) -> Matrix:
    n, p = gens.n, gens.p
    flats = [m.flat for m in gens.over_fp]
    acc = identity_flat(n)
    for s in steps:
        acc = mul_flat(acc, flats[s], n, p)
    return Matrix.from_flat(acc, n, p)


def hash_trits(trits, table: AttributionTable, gens: GeneratorSet,
               start_row: int | None = None) -> Digest:
    """phi(x) = B_1 ... B_k; ``start_row`` overrides the table's first row."""
    return Digest(product_of_steps(walk_steps(trits, table, start_row), gens), gens.params)


def encode_bytes(data: bytes) -> tuple[int, ...]:
    """Each byte -> 6 big-endian base-3 digits, shifted into {1, 2, 3}."""
    return tuple(t for byte in data for t in _BYTE_TRITS[byte])


def _byte_trits(v: int) -> tuple[int, ...]:
    digits = []
    for _ in range(6):
        v, d = divmod(v, 3)
        digits.append(d + 1)
    return tuple(reversed(digits))


_BYTE_TRITS = tuple(_byte_trits(v) for v in range(256))


def hash_bytes(data: bytes, table: AttributionTable, gens: GeneratorSet) -> Digest:
    h = Hasher(gens, table)
    h.update(data)
    return h.digest()


class Hasher:
    """Streaming hasher with a hashlib-like interface.

    Whole bytes go through a per-(last step, byte) table of precomputed
    6-step products, so each byte costs one matrix product.
    """

    def __init__(self, gens: GeneratorSet, table: AttributionTable | None = None,
                 start_row: int | None = None):
        self.gens = gens
        self.table = table or default_table()
        self._n, self._p = gens.n, gens.p
        self._flats = [m.flat for m in gens.over_fp]
        self._acc = identity_flat(self._n)
        # virtual predecessor encodes the starting row
        self._last = self.table.context_of_row(start_row or self.table.first_row)
        self._length = 0
        self._byte_cache: dict[tuple[Step, int], tuple[tuple, Step]] = {}

    @property
    def length(self) -> int:
        return self._length

    def _byte_block(self, last: Step, byte: int) -> tuple[tuple, Step]:
        key = (last, byte)
        hit = self._byte_cache.get(key)
        if hit is None:
            acc = identity_flat(self._n)
            nxt = self.table._next
            for t in _BYTE_TRITS[byte]:
                last = nxt[last][t - 1]
                acc = mul_flat(acc, self._flats[last], self._n, self._p)
            hit = self._byte_cache[key] = (acc, last)
        return hit

    def update(self, data: bytes) -> "Hasher":
        acc, last, n, p = self._acc, self._last, self._n, self._p
        for byte in data:
            block, last = self._byte_block(last, byte)
            acc = mul_flat(acc, block, n, p)
        self._acc, self._last = acc, last
        self._length += 6 * len(data)
        return self

    def update_trits(self, trits) -> "Hasher":
        trits = as_trits(trits)
        acc, last, n, p = self._acc, self._last, self._n, self._p
        nxt, flats = self.table._next, self._flats
        for t in trits:
            last = nxt[last][t - 1]
            acc = mul_flat(acc, flats[last], n, p)
        self._acc, self._last = acc, last
        self._length += len(trits)
        return self

    def digest(self) -> Digest:
        return Digest(Matrix.from_flat(self._acc, self._n, self._p), self.gens.params)

    def hexdigest(self) -> str:
        return self.digest().hexdigest()


# -- wire format -------------------------------------------------------------

def _int_bytes(v: int) -> bytes:
    return v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")


def serialize_digest(d: Digest) -> bytes:
    """``len(n) n len(p) p`` (2-byte big-endian lengths), then n^2 fixed-width entries."""
    m = d.matrix
    out = bytearray()
    for v in (m.n, m.p):
        raw = _int_bytes(v)
        out += len(raw).to_bytes(2, "big") + raw
    width = (m.p.bit_length() + 7) // 8
    for v in m.flat:
        out += v.to_bytes(width, "big")
    return bytes(out)


def parse_digest(data: bytes | str) -> Digest:
    if isinstance(data, str):
        data = bytes.fromhex(data)
    pos = 0
    header = []
    for _ in range(2):
        ln = int.from_bytes(data[pos:pos + 2], "big")
        header.append(int.from_bytes(data[pos + 2:pos + 2 + ln], "big"))
        pos += 2 + ln
    n, p = header
    width = (p.bit_length() + 7) // 8
    if len(data) - pos != n * n * width:
        raise ValueError("digest length does not match header")
    flat = [int.from_bytes(data[pos + i * width:pos + (i + 1) * width], "big") for i in range(n * n)]
    return Digest(Matrix.from_flat(flat, n, p))
