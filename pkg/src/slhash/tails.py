"""Good and bad tails, and segment-parallel hashing.

A tail is good when it forces the final step matrix whatever precedes it.
Cutting the input right after a good tail makes the hash multiplicative
across the cut, provided the next segment starts from the row that the
forced step selects.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Iterator

from .algebra import Matrix, mat_mul
from .hasher import (
    AttributionTable,
    Digest,
    Step,
    as_trits,
    hash_trits,
    trits_to_str,
)
from .params import GeneratorSet

DEFAULT_MIN_SEGMENT = 64


class EmptyTail(ValueError):
    pass


@dataclass(frozen=True)
class GoodTail:
    final_step: Step

    good = True


@dataclass(frozen=True)
class BadTail:
    """``witness`` holds two (previous step, final step) pairs that disagree."""

    witness: tuple[tuple[Step, Step], tuple[Step, Step]]

    good = False


def final_steps(table: AttributionTable, tail) -> dict[Step, Step]:
    """Final step of ``tail`` for each possible previous step."""
    tail = as_trits(tail)
    out = {}
    for prev in Step:
        last = prev
        for t in tail:
            last = table.next_step(last, t)
        out[prev] = last
    return out


def classify_tail(table: AttributionTable, tail) -> GoodTail | BadTail:
    tail = as_trits(tail)
    if not tail:
        raise EmptyTail("tail must be nonempty")
    finals = final_steps(table, tail)
    if len(set(finals.values())) == 1:
        return GoodTail(finals[Step.A])
    first = next(iter(finals.items()))
    other = next(kv for kv in finals.items() if kv[1] != first[1])
    return BadTail((first, other))


def enumerate_good_tails(table: AttributionTable, length: int = 2) -> set[str]:
    return {
        trits_to_str(t)
        for t in itertools.product((1, 2, 3), repeat=length)
        if classify_tail(table, t).good
    }


def good_tail_map(table: AttributionTable) -> dict[tuple[int, int], Step]:
    """Length-2 good tails -> the step they force."""
    out = {}
    for t in itertools.product((1, 2, 3), repeat=2):
        c = classify_tail(table, t)
        if c.good:
            out[t] = c.final_step
    return out


def all_attribution_tables(s=None) -> Iterator[AttributionTable]:
    """Every admissible table for a fixed ``s``: 6^4 row choices x 4 first rows."""
    s = tuple(s) if s is not None else (Step.A, Step.B, Step.Ainv, Step.Binv)
    row_choices = [list(itertools.permutations(sorted(set(Step) - {s[lam]}))) for lam in range(4)]
    for rows in itertools.product(*row_choices):
        for first in (1, 2, 3, 4):
            yield AttributionTable(s, rows, first)


@dataclass(frozen=True)
class Segment:
    trits: str
    start_row: int


@dataclass(frozen=True)
class Segmentation:
    segments: tuple[Segment, ...]

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def joined(self) -> str:
        return "".join(s.trits for s in self.segments)


def segment(trits, table: AttributionTable, min_segment: int = DEFAULT_MIN_SEGMENT) -> Segmentation:
    """Greedy earliest cuts after good tails, each segment at least ``min_segment`` long.

    A cut at the very end of the input is never made.
    """
    trits = as_trits(trits)
    if not trits:
        return Segmentation(())
    forced = good_tail_map(table)
    min_segment = max(1, min_segment)
    segs = []
    start, row = 0, table.first_row
    for end in range(max(2, min_segment), len(trits)):
        if end - start < min_segment:
            continue
        hit = forced.get((trits[end - 2], trits[end - 1]))
        if hit is None:
            continue
        segs.append(Segment(trits_to_str(trits[start:end]), row))
        start, row = end, table.row_after(hit)
    segs.append(Segment(trits_to_str(trits[start:]), row))
    return Segmentation(tuple(segs))


def _hash_segment(args) -> tuple:
    seg, table, gens = args
    return hash_trits(seg.trits, table, gens, start_row=seg.start_row).matrix.flat


def parallel_hash(trits, table: AttributionTable, gens: GeneratorSet, worker_count: int = 1,
                  min_segment: int = DEFAULT_MIN_SEGMENT) -> Digest:
    """Hash segments independently and multiply the partial digests in order."""
    segs = segment(trits, table, min_segment)
    n, p = gens.n, gens.p
    jobs = [(s, table, gens) for s in segs]
    if worker_count > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            partial = list(pool.map(_hash_segment, jobs, chunksize=max(1, len(jobs) // (4 * worker_count))))
    else:
        partial = [_hash_segment(j) for j in jobs]
    mats = [Matrix.from_flat(f, n, p) for f in partial]
    return Digest(reduce(mat_mul, mats, Matrix.identity(n, p)), gens.params)
