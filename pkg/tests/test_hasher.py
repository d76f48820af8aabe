import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from slhash.algebra import Matrix, mat_det
from slhash.hasher import (
    Digest,
    Hasher,
    InvalidTrit,
    Step,
    default_table,
    encode_bytes,
    hash_bytes,
    hash_trits,
    initial_state,
    parse_digest,
    serialize_digest,
    step,
    table_from_grid,
    walk_steps,
)

S = Step


def naive_product(mats, n, p):
    acc = [[int(i == j) for j in range(n)] for i in range(n)]
    for M in mats:
        acc = [[sum(acc[i][k] * M[k, j] for k in range(n)) % p for j in range(n)] for i in range(n)]
    return tuple(tuple(r) for r in acc)


def test_table_cells(table):
    assert table.next_step(S.A, 3) == S.B
    assert table.next_step(S.Binv, 1) == S.A
    for last in Step:
        assert last.inverse not in table.row_for_last(last)
        assert len(set(table.row_for_last(last))) == 3


def test_default_table_rows(table):
    assert table.row_for_last(S.Ainv) == (S.B, S.Ainv, S.Binv)
    assert table.row_for_last(S.Binv) == (S.A, S.Ainv, S.Binv)
    assert table.row_for_last(S.A) == (S.A, S.Binv, S.B)
    assert table.row_for_last(S.B) == (S.A, S.Ainv, S.B)
    assert table.first_row == 1


def test_grid_round_trip(table):
    assert table_from_grid(table.to_grid()) == table
    other = table.with_first_row(3)
    assert table_from_grid(other.to_grid()) == other


def test_step_first_trit(table, gens11):
    st1 = step(initial_state(gens11), 1, table, gens11)
    assert st1.last == S.B and st1.length == 1 and st1.acc == gens11.B
    assert step(initial_state(gens11), 2, table, gens11).last == S.Ainv
    with pytest.raises(InvalidTrit):
        step(initial_state(gens11), 4, table, gens11)


def test_empty_is_identity(table, gens11):
    assert hash_trits("", table, gens11).matrix == Matrix.identity(3, 11)
    assert hash_bytes(b"", table, gens11).matrix == Matrix.identity(3, 11)


def test_13213(table, gens11):
    assert walk_steps("13213", table) == [S.B, S.B, S.Ainv, S.B, S.B]
    steps = [gens11.over_z[s] for s in (S.B, S.B, S.Ainv, S.B, S.B)]
    expected = naive_product(steps, 3, 11)
    assert hash_trits("13213", table, gens11).matrix.rows == expected


def test_all_one_then_threes(table):
    assert walk_steps("1" + "3" * 20, table) == [S.B] * 21
    assert walk_steps("3" * 21, table) == [S.Binv] * 21


def base3_oracle(v):
    digits = []
    while v:
        digits.append(v % 3)
        v //= 3
    digits += [0] * (6 - len(digits))
    return tuple(d + 1 for d in reversed(digits))


def test_encode_bytes():
    assert encode_bytes(b"") == ()
    assert encode_bytes(b"\x00") == (1,) * 6
    assert encode_bytes(b"\xff") == (2, 1, 1, 2, 2, 1)
    for v in range(256):
        assert encode_bytes(bytes([v])) == base3_oracle(v)
    assert len({encode_bytes(bytes([v])) for v in range(256)}) == 256


def test_hash_bytes_composition(table, gens11):
    assert hash_bytes(b"\x00", table, gens11) == hash_trits("111111", table, gens11)
    data = bytes(range(256))
    d = hash_bytes(data, table, gens11)
    assert d == hash_trits(encode_bytes(data), table, gens11)
    assert mat_det(d.matrix) == 1


def test_serialize_identity():
    raw = serialize_digest(Digest(Matrix.identity(3, 11)))
    assert raw[-9:] == bytes([1, 0, 0, 0, 1, 0, 0, 0, 1])
    assert raw.hex() == "00010300010b010000000100000001"


def test_serialize_headers_differ(table, gens5, gens11):
    a = serialize_digest(hash_trits("123", table, gens5))
    b = serialize_digest(hash_trits("123", table, gens11))
    assert a[:6] != b[:6]


def test_serialize_wide_prime():
    from slhash.params import build_generators, validate_params

    g = build_generators(validate_params(3, 65537, 4, 2, 4))
    d = hash_trits("3213", default_table(), g)
    raw = d.serialize()
    assert len(raw) == 2 + 1 + 2 + 3 + 9 * 3
    assert parse_digest(raw) == d


@given(st.text(alphabet="123", max_size=60))
@settings(max_examples=200, deadline=None)
def test_serialize_round_trip(trits):
    from slhash.params import build_generators, default_params

    g = build_generators(default_params(11))
    d = hash_trits(trits, default_table(), g)
    assert parse_digest(d.serialize()) == d
    assert parse_digest(d.hexdigest()) == d


def test_non_backtracking(table):
    rng = random.Random(7)
    for _ in range(20):
        word = walk_steps([rng.randint(1, 3) for _ in range(10_000)], table)
        assert all(b != a.inverse for a, b in zip(word, word[1:]))


@pytest.mark.slow
def test_injective_to_length_12(table):
    for k in range(1, 13):
        seen = {tuple(walk_steps(t, table)) for t in itertools.product((1, 2, 3), repeat=k)}
        assert len(seen) == 3**k


def test_injective_short(table):
    for k in range(1, 8):
        seen = {tuple(walk_steps(t, table)) for t in itertools.product((1, 2, 3), repeat=k)}
        assert len(seen) == 3**k


def test_no_collisions_below_girth(table, gens5):
    from slhash.analysis import measure_girth

    g = measure_girth(gens5).measured
    # two distinct inputs of length < g/2 cannot share a digest
    k = (g - 1) // 2
    digests = set()
    count = 0
    for length in range(k + 1):
        for t in itertools.product((1, 2, 3), repeat=length):
            digests.add(hash_trits(t, table, gens5).matrix)
            count += 1
    assert len(digests) == count


@given(st.lists(st.integers(1, 3), max_size=80), st.integers(0, 80))
@settings(max_examples=200, deadline=None)
def test_streaming_equals_batch(trits, cut):
    from slhash.params import build_generators, default_params

    g = build_generators(default_params(13))
    t = default_table()
    state = initial_state(g)
    for x in trits:
        state = step(state, x, t, g)
    assert state.acc == hash_trits(trits, t, g).matrix
    h = Hasher(g, t)
    h.update_trits(trits[:cut]).update_trits(trits[cut:])
    assert h.digest() == hash_trits(trits, t, g)


@given(st.binary(max_size=64), st.integers(0, 64))
@settings(max_examples=200, deadline=None)
def test_hasher_bytes_chunked(data, cut):
    from slhash.params import build_generators, default_params

    g = build_generators(default_params(11))
    t = default_table()
    h = Hasher(g, t)
    h.update(data[:cut])
    h.update(data[cut:])
    assert h.digest() == hash_trits(encode_bytes(data), t, g)
    assert h.length == 6 * len(data)


def test_start_row_override(table, gens11):
    # starting from row 4 is the same as being preceded by s(4)^-1 = B
    d = hash_trits("21323", table, gens11, start_row=4)
    assert walk_steps("21323", table, start_row=4)[0] == table.s_rows[3][1]
    h = Hasher(gens11, table, start_row=4).update_trits("21323")
    assert h.digest() == d
