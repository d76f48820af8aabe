"""Girth, group order, exact walk distributions and the distinguishing game."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import Matrix, identity_flat, mul_flat, mul_flat_z
from .groups import BudgetExceeded, FiniteGroup, closure, env_budget
from .hasher import AttributionTable, Step
from .params import GeneratorSet


class GroupTooLarge(BudgetExceeded):
    pass


def group_order(n: int, p: int) -> int:
    """|SL_n(F_p)| = p^(n(n-1)/2) * prod_{k=2..n} (p^k - 1)."""
    order = p ** (n * (n - 1) // 2)
    for k in range(2, n + 1):
        order *= p**k - 1
    return order


def girth_lower_bound(n: int, c: int, p: int) -> int:
    """Largest g with (n c)^g <= p - 1, i.e. floor(log(p-1) / log(nc)), in integers."""
    base, limit = n * c, p - 1
    if base < 2:
        raise ValueError("n*c must be at least 2")
    if limit < 1:
        raise ValueError("p must be at least 2")
    g, power = 0, base
    while power <= limit:
        power *= base
        g += 1
    return g


# -- girth ---------------------------------------------------------------------

@dataclass(frozen=True)
class NotFoundWithin:
    radius: int


@dataclass(frozen=True)
class GirthReport:
    theoretical_lower: int
    measured: int | NotFoundWithin
    shortest_relator: tuple[Step, ...] | None = None

    @property
    def found(self) -> bool:
        return not isinstance(self.measured, NotFoundWithin)


def _path(parent: dict, v) -> list[Step]:
    out = []
    while parent[v] is not None:
        v, s = parent[v]
        out.append(s)
    return out[::-1]


def measure_girth(gens: GeneratorSet, radius_budget: int = 64,
                  max_states: int | None = None) -> GirthReport:
    """Shortest nontrivial reduced word in {A^+-1, B^+-1} equal to I over F_p.

    BFS from I in the Cayley graph; a non-tree edge (u, v) closes a cycle of
    length d(u) + d(v) + 1. The Cayley graph is vertex-transitive, so the
    minimum over non-tree edges seen from I is the girth.
    """
    n, p = gens.n, gens.p
    max_states = env_budget() if max_states is None else max_states
    lower = girth_lower_bound(n, gens.c, p)
    flats = [m.flat for m in gens.over_fp]
    root = identity_flat(n)
    dist = {root: 0}
    parent: dict = {root: None}
    frontier = [root]
    best = None
    depth = 0
    while frontier and depth < radius_budget:
        if best is not None and 2 * depth + 1 >= best[0]:
            break
        nxt = []
        for u in frontier:
            pu = parent[u]
            for s in Step:
                if pu is not None and pu[1] == s.inverse:
                    continue  # the tree edge back to the parent
                v = mul_flat(u, flats[s], n, p)
                if v not in dist:
                    dist[v] = depth + 1
                    parent[v] = (u, s)
                    nxt.append(v)
                elif parent.get(v) != (u, s):
                    length = depth + dist[v] + 1
                    if best is None or length < best[0]:
                        best = (length, u, s, v)
        if len(dist) > max_states:
            break
        frontier = nxt
        depth += 1
    if best is None:
        return GirthReport(lower, NotFoundWithin(depth))
    _, u, s, v = best
    word = _path(parent, u) + [s] + [t.inverse for t in reversed(_path(parent, v))]
    relator = cyclic_reduce(word)
    return GirthReport(lower, len(relator), tuple(relator))


def free_reduce(word) -> list[Step]:
    out: list[Step] = []
    for s in word:
        if out and out[-1] == s.inverse:
            out.pop()
        else:
            out.append(s)
    return out


def cyclic_reduce(word) -> list[Step]:
    """Free reduction followed by stripping conjugating letters from both ends."""
    w = free_reduce(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1].inverse:
        i += 1
        j -= 1
    return w[i:j]


def evaluate_word(word, gens: GeneratorSet, over_z: bool = False) -> Matrix:
    n = gens.n
    acc = identity_flat(n)
    if over_z:
        flats = [m.flat for m in gens.over_z]
        for s in word:
            acc = mul_flat_z(acc, flats[s], n)
        return Matrix.from_flat(acc, n, 0)
    flats = [m.flat for m in gens.over_fp]
    for s in word:
        acc = mul_flat(acc, flats[s], n, gens.p)
    return Matrix.from_flat(acc, n, gens.p)


def freeness_smoke_test(gens: GeneratorSet, max_length: int = 10) -> tuple[int, list]:
    """Evaluate every nonempty reduced word up to ``max_length`` over Z.

    Returns (words checked, words equal to I). Depth-first with shared prefixes.
    """
    n = gens.n
    flats = [m.flat for m in gens.over_z]
    ident = identity_flat(n)
    checked = 0
    hits = []
    stack = [(ident, None, ())]
    while stack:
        acc, last, word = stack.pop()
        for s in Step:
            if last is not None and s == last.inverse:
                continue
            m = mul_flat_z(acc, flats[s], n)
            w = word + (s,)
            checked += 1
            if m == ident:
                hits.append(w)
            if len(w) < max_length:
                stack.append((m, s, w))
    return checked, hits


def eccentricity(gens: GeneratorSet, budget: int | None = None) -> int:
    """Eccentricity of I in the Cayley graph (its diameter, by transitivity)."""
    n, p = gens.n, gens.p
    flats = [m.flat for m in gens.over_fp]
    budget = env_budget() if budget is None else budget
    seen = {identity_flat(n)}
    frontier = list(seen)
    depth = 0
    while True:
        nxt = []
        for u in frontier:
            for f in flats:
                v = mul_flat(u, f, n, p)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if len(seen) > budget:
            raise BudgetExceeded("eccentricity search exceeded budget")
        if not nxt:
            return depth
        frontier = nxt
        depth += 1


# -- distributions ---------------------------------------------------------------

@lru_cache(maxsize=8)
def _cached_group(fp: tuple, n: int, p: int, budget: int) -> FiniteGroup:
    mats = [Matrix.from_flat(f, n, p) for f in fp]
    return closure(mats, budget)


def generated_group(gens: GeneratorSet, budget: int | None = None) -> FiniteGroup:
    """The enumerated group generated by the step matrices (cached)."""
    budget = env_budget() if budget is None else budget
    return _cached_group(tuple(m.flat for m in gens.over_fp), gens.n, gens.p, budget)


@dataclass
class Distribution:
    """Probability vector over the elements of ``group`` in index order."""

    probs: np.ndarray
    group: FiniteGroup | None = None

    @property
    def size(self) -> int:
        return int(self.probs.shape[0])

    def prob(self, m: Matrix) -> float:
        return float(self.probs[self.group.index(m)])


def uniform(N: int, group: FiniteGroup | None = None) -> Distribution:
    return Distribution(np.full(N, 1.0 / N), group)


def point_mass(N: int, i: int, group: FiniteGroup | None = None) -> Distribution:
    probs = np.zeros(N)
    probs[i] = 1.0
    return Distribution(probs, group)


class WalkDP:
    """Exact distribution of phi(X) for X uniform on [3]^k, advanced one trit at a time.

    State is a (group element, last step) probability array. The first trit
    reads the table's first row; that row is encoded as a virtual previous
    step so every trit uses the same transition.
    """

    def __init__(self, gens: GeneratorSet, table: AttributionTable,
                 group: FiniteGroup | None = None, state_budget: int | None = None):
        budget = env_budget() if state_budget is None else state_budget
        try:
            self.group = group if group is not None else generated_group(gens, budget)
        except BudgetExceeded as exc:
            raise GroupTooLarge(str(exc)) from exc
        self.table = table
        N = self.group.order
        self.perms = [self.group.right_mult_table(m) for m in gens.over_fp]
        self.state = np.zeros((4, N))
        self.state[table.context_of_row(table.first_row), self.group.identity_index()] = 1.0
        self.k = 0
        # sources[S] = list of (previous step, multiplicity) feeding step S
        self._sources = {S: [] for S in Step}
        for last in Step:
            for S in table.row_for_last(last):
                self._sources[S].append(last)

    def advance(self) -> None:
        new = np.empty_like(self.state)
        for S in Step:
            inflow = sum(self.state[L] for L in self._sources[S]) / 3.0
            new[S, self.perms[S]] = inflow
        self.state = new
        self.k += 1

    def distribution(self) -> Distribution:
        return Distribution(self.state.sum(axis=0), self.group)


def walk_distribution(gens: GeneratorSet, table: AttributionTable, k: int,
                      state_budget: int | None = None) -> Distribution:
    dp = WalkDP(gens, table, state_budget=state_budget)
    for _ in range(k):
        dp.advance()
    return dp.distribution()


def linf_distance(d: Distribution, N: int | None = None) -> float:
    """max over all N elements of |P(h) - 1/N|; elements outside d count as 0."""
    N = d.size if N is None else N
    gap = float(np.max(np.abs(d.probs - 1.0 / N))) if d.size else 0.0
    if d.size < N:
        gap = max(gap, 1.0 / N)
    return gap


def linf_pair(dX: Distribution, dY: Distribution) -> float:
    return float(np.max(np.abs(dX.probs - dY.probs)))


def mixing_profile(gens: GeneratorSet, table: AttributionTable, kmax: int,
                   state_budget: int | None = None) -> list[tuple[int, float]]:
    dp = WalkDP(gens, table, state_budget=state_budget)
    N = group_order(gens.n, gens.p)
    out = [(0, linf_distance(dp.distribution(), N))]
    for k in range(1, kmax + 1):
        dp.advance()
        out.append((k, linf_distance(dp.distribution(), N)))
    return out


def mixing_threshold(gens: GeneratorSet, table: AttributionTable, kmax: int = 200) -> int | None:
    """Smallest k with linf distance to uniform below 1/N^2, or None within kmax."""
    dp = WalkDP(gens, table)
    N = group_order(gens.n, gens.p)
    for k in range(kmax + 1):
        if k:
            dp.advance()
        if linf_distance(dp.distribution(), N) < 1.0 / N**2:
            return k
    return None


# -- distinguishing game ---------------------------------------------------------

def attack_success_exact(dX: Distribution, dY: Distribution) -> float:
    """P_A = 1/2 * sum_h max(P(X=h), P(Y=h))."""
    if dX.size != dY.size:
        raise ValueError("distributions must share a universe")
    return 0.5 * float(np.maximum(dX.probs, dY.probs).sum())


@dataclass(frozen=True)
class ChallengeOutcome:
    exact_success: float
    empirical_success: float
    ci_low: float
    ci_high: float
    epsilon: float
    bound: float
    trials: int
    wins: int


def wilson_interval(wins: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    phat = wins / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return centre - half, centre + half


def play_challenge(dX: Distribution, dY: Distribution, trials: int, seed: int = 0) -> ChallengeOutcome:
    """Simulate the challenger and the likelihood-comparing adversary.

    The adversary answers P=1 when P(Y=z) > P(X=z), P=0 when smaller, and
    flips a fair coin on ties.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    N = dX.size
    coin = rng.integers(0, 2, size=trials)
    zx = rng.choice(N, size=trials, p=dX.probs / dX.probs.sum())
    zy = rng.choice(N, size=trials, p=dY.probs / dY.probs.sum())
    z = np.where(coin == 1, zy, zx)
    py, px = dY.probs[z], dX.probs[z]
    ties = rng.integers(0, 2, size=trials)
    guess = np.where(py > px, 1, np.where(py < px, 0, ties))
    wins = int(np.count_nonzero(guess == coin))
    lo, hi = wilson_interval(wins, trials)
    eps = linf_pair(dX, dY)
    return ChallengeOutcome(
        exact_success=attack_success_exact(dX, dY),
        empirical_success=wins / trials,
        ci_low=lo,
        ci_high=hi,
        epsilon=eps,
        bound=0.5 + eps * N / 4,
        trials=trials,
        wins=wins,
    )
