import itertools

import pytest

from slhash.algebra import Matrix, mat_det
from slhash.analysis import group_order
from slhash.params import (
    CongruenceViolated,
    DegenerateGenerators,
    EllFormViolated,
    EllTooSmall,
    NotPrime,
    PTooSmall,
    ParamSet,
    base_matrices,
    build_generators,
    check_generation,
    read_config,
    validate_params,
    with_generators,
)


def definition_predicate(n, a, b, ell):
    """Direct reading of the admissibility rule, searching witnesses by brute force."""
    if n == 3:
        return a % 3 == 1 and b % 3 == 2 and any(4**k == ell for k in range(1, 40))
    for q in range(2, n):
        if all(q % d for d in range(2, q)) and (n - 1) % q == (a - 1) % q == (b - 1) % q == 0:
            if ell >= 3 * (n - 1) and any(q ** (k + 1) + 1 == ell for k in range(0, 40)):
                return True
    return False


def test_concrete_example_valid():
    ps = validate_params(3, 11, 4, 2, 4)
    assert (ps.q, ps.k) == (None, 1)


def test_congruence_violation_named():
    with pytest.raises(CongruenceViolated) as exc:
        validate_params(3, 11, 5, 2, 4)
    assert exc.value.constraint == "a ≡ 1 (mod 3)"


def test_n4_example():
    assert definition_predicate(4, 4, 4, 10)
    ps = validate_params(4, 11, 4, 4, 10)
    assert (ps.q, ps.k) == (3, 1)


@pytest.mark.parametrize(
    "args, err",
    [
        ((3, 12, 4, 2, 4), NotPrime),
        ((5, 3, 6, 6, 17), PTooSmall),
        ((3, 11, 4, 4, 4), CongruenceViolated),
        ((3, 11, 4, 2, 8), EllFormViolated),
        ((4, 11, 4, 4, 4), EllTooSmall),
        ((4, 11, 4, 4, 11), EllFormViolated),
        ((4, 11, 3, 4, 10), CongruenceViolated),
        ((3, 2, 4, 2, 4), PTooSmall),
    ],
)
def test_validation_errors(args, err):
    with pytest.raises(err):
        validate_params(*args)


def test_degenerate_generators():
    # 4 = 0 mod 2 kills the superdiagonal; n = 2 is below the dimension floor,
    # so exercise the check directly at a prime dividing a
    with pytest.raises(DegenerateGenerators):
        validate_params(3, 7, 7, 2, 4)
    with pytest.raises(DegenerateGenerators):
        build_generators(ParamSet(3, 2, 4, 2, 4, None, 1))


@pytest.mark.parametrize(
    "n, a, b, ell",
    [(n, a, b, ell) for n in (3, 4, 5, 7) for a in range(2, 9) for b in range(2, 9)
     for ell in (4, 5, 9, 10, 16, 17, 28, 64)],
)
def test_validation_matches_predicate(n, a, b, ell):
    p = 101
    expected = definition_predicate(n, a, b, ell)
    try:
        validate_params(n, p, a, b, ell)
        got = True
    except (CongruenceViolated, EllFormViolated, EllTooSmall):
        got = False
    assert got == expected


def test_generators_concrete(gens11):
    A, B, Ai, Bi = gens11.over_z
    assert A.rows == ((1, 16, 96), (0, 1, 16), (0, 0, 1))
    assert B.rows == ((1, 0, 0), (8, 1, 0), (24, 8, 1))
    assert gens11.c == 160
    for Mz, Mp in zip(gens11.over_z, gens11.over_fp):
        assert Mz.reduce(11) == Mp
        assert mat_det(Mz) == 1 and mat_det(Mp) == 1
    assert A @ Ai == Matrix.identity(3) and B @ Bi == Matrix.identity(3)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 101])
def test_generators_pairwise_distinct(p):
    from slhash.params import default_params

    g = build_generators(default_params(p))
    mats = g.over_fp
    assert len(set(mats)) == 4
    assert not any(m.is_identity() for m in mats)


def test_check_generation_sl3_f3(gens3):
    assert group_order(3, 3) == 5616
    res = check_generation(gens3)
    assert res.status == "generates" and res.order == 5616


def test_check_generation_trivial_subgroup(gens3):
    I = Matrix.identity(3, 3)
    fake = with_generators(gens3, I, I)
    res = check_generation(fake)
    assert res.status == "subgroup" and res.order == 1


def test_check_generation_budget():
    from slhash.params import default_params

    g = build_generators(default_params(101))
    assert check_generation(g, max_elements=1000).status == "budget_exceeded"


def test_freeness_prefix_words(gens11):
    # short words over Z never collapse to I; the exhaustive length-10 sweep is an acceptance criterion
    from slhash.analysis import freeness_smoke_test

    checked, hits = freeness_smoke_test(gens11, 6)
    assert checked == sum(4 * 3 ** (k - 1) for k in range(1, 7))
    assert hits == []


def test_read_config(tmp_path):
    path = tmp_path / "params.cfg"
    path.write_text("# concrete\nn = 3\np=11\n a = 4\nb = 2 # comment\nell = 4\n")
    assert read_config(str(path)) == {"n": 3, "p": 11, "a": 4, "b": 2, "ell": 4}
    path.write_text("q = 3\n")
    with pytest.raises(ValueError):
        read_config(str(path))


def test_base_matrices_shape():
    At, Bt = base_matrices(5, 2, 3)
    for i, j in itertools.product(range(5), repeat=2):
        assert At[i, j] == (1 if i == j else 2 if j == i + 1 else 0)
        assert Bt[i, j] == (1 if i == j else 3 if j == i - 1 else 0)
