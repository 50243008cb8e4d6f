"""Prime-field construction, arithmetic, and the batched helpers."""

import random

import pytest

from isogenix import (
    ContextMismatch,
    DivisionByZero,
    FieldElement,
    NotAUnit,
    NotPrime,
    TooSmall,
    arith,
    batch_inverse,
    field_sqrt,
    inv_small,
    make_field,
)


def test_make_field_accepts_documented_primes():
    assert make_field(101).p == 101
    assert make_field(1009).p == 1009


def test_make_field_rejects_composites_and_tiny_primes():
    with pytest.raises(NotPrime):
        make_field(4)
    with pytest.raises(NotPrime):
        make_field(561)  # Carmichael number
    with pytest.raises(TooSmall):
        make_field(2)
    with pytest.raises(TooSmall):
        make_field(3)


def test_make_field_large_prime():
    p = (1 << 62) - 57  # prime
    assert make_field(p).p == p
    with pytest.raises(NotPrime):
        make_field((1 << 62) - 111)


def test_arith_examples_mod_101():
    ctx = make_field(101)
    a, b = ctx.element(66), ctx.element(70)
    assert arith(a, b, "add") == 35
    assert arith(ctx.element(1), ctx.element(2), "div") == 51
    with pytest.raises(DivisionByZero):
        arith(ctx.element(5), ctx.element(0), "div")


def test_operator_arithmetic():
    ctx = make_field(101)
    a = ctx.element(66)
    assert (a + 70).value == 35
    assert (a - 70).value == 97
    assert (a * 2).value == 31
    assert (1 / ctx.element(2)).value == 51
    assert (-a).value == 35
    assert (a ** 2).value == 66 * 66 % 101
    assert (a ** -1) * a == 1
    assert int(a) == 66 and bool(a) and not bool(ctx.element(0))
    assert a.serialize() == "66"


def test_context_mismatch_rejected():
    a = make_field(101).element(5)
    b = make_field(1009).element(5)
    with pytest.raises(ContextMismatch):
        _ = a + b


def test_contexts_interchangeable_iff_same_p():
    assert make_field(101) == make_field(101)
    assert make_field(101) != make_field(1009)
    assert make_field(101).element(7) == make_field(101).element(7)


def test_inv_small_values():
    ctx = make_field(101)
    assert inv_small(3, ctx) == 34
    with pytest.raises(NotAUnit):
        inv_small(101, ctx)
    with pytest.raises(NotAUnit):
        inv_small(202, ctx)
    ctx9 = make_field(1009)
    # brute-force oracle for 1/7 mod 1009
    want = next(x for x in range(1, 1009) if 7 * x % 1009 == 1)
    assert inv_small(7, ctx9) == want


def test_inverse_range_matches_inv_small():
    ctx = make_field(1009)
    table = ctx.inverse_range(60)
    for k in range(1, 61):
        assert table[k] == ctx.inv_small(k)
        assert table[k] * k % 1009 == 1
    with pytest.raises(NotAUnit):
        make_field(13).inverse_range(13)


def test_field_sqrt_examples():
    ctx = make_field(101)
    assert field_sqrt(ctx.element(0)) == (ctx.element(0),)
    roots = field_sqrt(ctx.element(4))
    assert tuple(r.value for r in roots) == (2, 99)
    ctx7 = make_field(7)
    # enumeration oracle: squares mod 7 are {0, 1, 2, 4}
    squares = {x * x % 7 for x in range(7)}
    assert 3 not in squares
    assert field_sqrt(ctx7.element(3)) is None


def test_field_sqrt_both_branches_of_tonelli():
    for p in (101, 1009, 65537, (1 << 62) - 57):  # p = 1 mod 4 cases included
        ctx = make_field(p)
        rng = random.Random(p)
        for _ in range(20):
            r = rng.randrange(1, p)
            got = ctx.sqrt(r * r % p)
            assert got is not None and r % p in got
            assert got[0] <= got[1] and (got[0] + got[1]) % p == 0


def test_batch_inverse_examples():
    ctx7 = make_field(7)
    assert [v.value for v in batch_inverse([ctx7.element(1)])] == [1]
    got = batch_inverse([ctx7.element(2), ctx7.element(3)])
    assert [v.value for v in got] == [4, 5]


def test_batch_inverse_random_matches_elementwise():
    ctx = make_field(99991)
    rng = random.Random(17)
    vec = [ctx.element(rng.randrange(1, ctx.p)) for _ in range(100)]
    got = batch_inverse(vec)
    assert [v.value for v in got] == [ctx.inv(v.value) for v in vec]


def test_batch_inverse_reports_offending_index():
    ctx = make_field(101)
    with pytest.raises(DivisionByZero) as err:
        ctx.batch_inv([5, 3, 0, 9])
    assert err.value.index == 2


def test_randomized_field_axioms():
    ctx = make_field((1 << 62) - 57)
    rng = random.Random(23)
    for _ in range(200):
        a, b, c = (ctx.element(rng.randrange(ctx.p)) for _ in range(3))
        assert (a + b) - b == a
        assert (a * b) * c == a * (b * c)
        if a.value:
            assert a * a.inverse() == 1


def test_legendre_symbol():
    ctx = make_field(101)
    assert ctx.legendre(0) == 0
    assert ctx.legendre(4) == 1
    non_residues = [v for v in range(1, 101) if ctx.sqrt(v) is None]
    assert all(ctx.legendre(v) == -1 for v in non_residues)


def test_element_hash_and_repr():
    ctx = make_field(101)
    assert hash(ctx.element(5)) == hash(ctx.element(5))
    assert "mod 101" in repr(ctx.element(5))
    assert ctx.element(5) in {ctx.element(5)}
