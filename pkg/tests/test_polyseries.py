"""Polynomials, truncated series, and the Newton-iteration operations."""

import random

import pytest

from isogenix import (
    CharacteristicTooSmall,
    InconsistentInitialConditions,
    NoSolution,
    NonzeroConstantTermInner,
    NotMonic,
    Polynomial,
    PrecisionError,
    Series,
    ZeroConstantTerm,
    ZeroInitialDerivative,
    antiderivative,
    compose,
    derivative,
    make_field,
    pade_reconstruct,
    poly_to_power_sums,
    power_sums_to_poly,
    series_exp,
    series_log,
    series_reciprocal,
    solve_linear_ode,
    solve_nonlinear_ode_sq,
)
from isogenix.polyseries import (
    _mul_karatsuba,
    _mul_kronecker,
    _mul_schoolbook,
    mul_coeffs,
)

CTX = make_field(101)
BIG = make_field((1 << 62) - 57)


# -- multiplication strategies ------------------------------------------------

def test_poly_mul_examples():
    one_plus = Polynomial(CTX, [1, 1])
    one_minus = Polynomial(CTX, [1, 100])
    assert (one_plus * one_minus).to_ints() == [1, 0, 100]
    assert (one_plus * Polynomial.zero(CTX)).is_zero()


def test_mul_strategies_agree_on_degree_1000():
    rng = random.Random(5)
    p = BIG.p
    a = [rng.randrange(p) for _ in range(1001)]
    b = [rng.randrange(p) for _ in range(1001)]
    school = _mul_schoolbook(a[:64], b[:64], p)
    kara = _mul_karatsuba(a[:64], b[:64], p)
    kron = _mul_kronecker(a[:64], b[:64], p, BIG.p_bits)
    assert [int(v) for v in school] == [int(v) for v in kara]
    assert [int(v) for v in school] == [int(v) for v in kron]
    full_kron = _mul_kronecker(a, b, p, BIG.p_bits)
    full_school = _mul_schoolbook(a, b, p)
    assert [int(v) for v in full_kron] == [int(v) for v in full_school]


def test_mul_dispatch_unbalanced_and_edges():
    p = CTX.p
    assert mul_coeffs([], [1, 2], p, CTX.p_bits) == []
    assert [int(v) for v in mul_coeffs([3], [1, 2, 3], p, CTX.p_bits)] == [3, 6, 9]
    rng = random.Random(6)
    a = [rng.randrange(p) for _ in range(3)]
    b = [rng.randrange(p) for _ in range(400)]
    assert [int(v) for v in mul_coeffs(a, b, p, CTX.p_bits)] == \
        [int(v) for v in _mul_schoolbook(a, b, p)]


# -- polynomial structure -----------------------------------------------------

def test_polynomial_trims_and_divides():
    f = Polynomial(CTX, [1, 2, 0, 0])
    assert f.degree == 1
    g = Polynomial(CTX, [3, 1])        # x + 3
    h = f * g
    q, r = h.divmod(g)
    assert q == f and r.is_zero()
    assert h.exact_div(f) == g
    with pytest.raises(ValueError):
        (h + Polynomial.one(CTX)).exact_div(g)


def test_polynomial_divmod_large_newton_path():
    rng = random.Random(7)
    p = BIG.p
    a = Polynomial(BIG, [rng.randrange(p) for _ in range(500)] + [1])
    b = Polynomial(BIG, [rng.randrange(p) for _ in range(230)] + [1])
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.degree < b.degree


def test_polynomial_eval_and_from_roots():
    roots = [3, 5, 5, 40]
    f = Polynomial.from_roots(CTX, roots)
    assert f.is_monic() and f.degree == 4
    for r in roots:
        assert f.evaluate(r) == 0
    assert f.evaluate(1) != 0


def test_monic_and_reverse():
    f = Polynomial(CTX, [2, 4, 6])
    m = f.monic()
    assert m.coeffs[-1] == 1
    assert f.reversed_coeffs() == [6, 4, 2]
    assert f.reversed_coeffs(5) == [0, 0, 6, 4, 2]
    with pytest.raises(NotMonic):
        Polynomial.zero(CTX).monic()


# -- series structure and precision bookkeeping --------------------------------

def test_series_precision_is_explicit():
    s = Series(CTX, [1, 2, 3], 5)
    assert s.prec == 5 and s.coeffs == [1, 2, 3, 0, 0]
    assert s.coeff(4) == 0
    with pytest.raises(PrecisionError):
        s.coeff(5)
    with pytest.raises(PrecisionError):
        s.truncated(6)


def test_series_valuation_bookkeeping():
    # w-like Laurent object: z^-2 + 3 z^2 known mod z^3
    s = Series(CTX, [1, 0, 0, 0, 3], 5, val=-2)
    assert s.abs_prec == 3
    assert s.coeff(-2) == 1 and s.coeff(-3) == 0 and s.coeff(2) == 3
    shifted = s.shifted(2)
    assert shifted.val == 0 and shifted.abs_prec == 5
    lifted = Series(CTX, [0, 0, 7, 1], 4, val=1).lifted_valuation()
    assert lifted.val == 3 and lifted.coeffs == [7, 1]


def test_series_add_mul_precision_rules():
    a = Series(CTX, [1, 2, 3, 4], 4)          # known mod z^4
    b = Series(CTX, [5, 6], 2)                # known mod z^2
    assert (a + b).prec == 2
    assert (a * b).prec == 2
    c = Series(CTX, [1, 1], 2, val=1)
    d = a * c
    assert d.val == 1 and d.prec == 2


def test_series_equality_aligns_valuations():
    a = Series(CTX, [0, 1, 2], 3, val=0)
    b = Series(CTX, [1, 2], 2, val=1)
    assert a == b
    assert a != Series(CTX, [0, 1, 2], 3, val=1)


def test_derivative_antiderivative_examples():
    f = Series(CTX, [1, 1, 1], 3)
    assert derivative(f).coeffs == [1, 2]
    g = Series(CTX, [1, 2], 2)
    assert antiderivative(g).coeffs == [0, 1, 1]
    rng = random.Random(8)
    h = Series(CTX, [rng.randrange(101) for _ in range(20)], 20)
    assert derivative(antiderivative(h)) == h


def test_antiderivative_needs_units():
    ctx = make_field(7)
    f = Series(ctx, [1] * 8, 8)
    with pytest.raises(CharacteristicTooSmall):
        antiderivative(f)


# -- reciprocal ---------------------------------------------------------------

def test_reciprocal_geometric_series():
    f = Series(CTX, [1, 100], 5)  # 1 - z
    assert series_reciprocal(f, 5).coeffs == [1, 1, 1, 1, 1]


def test_reciprocal_printed_value():
    f = Series(CTX, [1, 0, 35, 31, 98, 54], 6)
    assert series_reciprocal(f, 6).to_ints() == [1, 0, 66, 70, 16, 96]


def test_reciprocal_rejects_zero_constant():
    with pytest.raises(ZeroConstantTerm):
        series_reciprocal(Series(CTX, [0, 1, 1], 3), 3)


def test_reciprocal_requires_precision():
    with pytest.raises(PrecisionError):
        series_reciprocal(Series(CTX, [1, 1], 2), 3)


def test_reciprocal_of_laurent_flips_valuation():
    # 1/(z^-1 (1 + z)) = z (1 - z + z^2 - ...)
    f = Series(CTX, [1, 1, 0, 0], 4, val=-1)
    r = series_reciprocal(f, 4)
    assert r.val == 1 and r.to_ints() == [1, 100, 1, 100]


# -- log / exp ----------------------------------------------------------------

def test_log_examples():
    assert series_log(Series(CTX, [1], 8), 8).is_zero()
    inv2, inv3 = CTX.inv(2), CTX.inv(3)
    got = series_log(Series(CTX, [1, 100], 4), 4)
    assert got.to_ints() == [0, 100, -inv2 % 101, -inv3 % 101]


def test_exp_examples():
    assert series_exp(Series(CTX, [0], 6), 6).to_ints() == [1, 0, 0, 0, 0, 0]
    got = series_exp(Series(CTX, [0, 76, 29, 37, 29, 48], 6), 6)
    assert got.to_ints() == [1, 76, 89, 24, 97, 5]


def test_exp_log_round_trips():
    rng = random.Random(11)
    for ctx in (CTX, BIG):
        f = Series(ctx, [0] + [rng.randrange(ctx.p) for _ in range(63)], 64)
        assert series_log(series_exp(f, 64), 64) == f
        g = Series(ctx, [1] + [rng.randrange(ctx.p) for _ in range(63)], 64)
        assert series_exp(series_log(g, 64), 64) == g


def test_exp_guards():
    from isogenix import ConstantTermNotOne, NonzeroConstantTerm
    with pytest.raises(NonzeroConstantTerm):
        series_exp(Series(CTX, [1, 1], 2), 2)
    with pytest.raises(ConstantTermNotOne):
        series_log(Series(CTX, [2, 1], 2), 2)
    small = make_field(11)
    with pytest.raises(CharacteristicTooSmall):
        series_exp(Series(small, [0] + [1] * 30, 31), 31)


# -- power sums ----------------------------------------------------------------

def test_power_sums_to_poly_example():
    f = power_sums_to_poly([3, 5], CTX)
    assert f.to_ints() == [2, 98, 1]  # x^2 - 3x + 2


def test_power_sums_printed_quintic():
    # power sums (25, 43, 91, 86, 63) over GF(101) give the printed quintic
    g = power_sums_to_poly([25, 43, 91, 86, 63], CTX)
    assert g.to_ints() == [5, 97, 24, 89, 76, 1]


def test_poly_to_power_sums_examples():
    f = Polynomial(CTX, [2, 98, 1])
    assert poly_to_power_sums(f, 2) == [3, 5]
    cube = Polynomial(CTX, [0, 0, 0, 1])
    assert poly_to_power_sums(cube, 3) == [0, 0, 0]
    with pytest.raises(NotMonic):
        poly_to_power_sums(Polynomial(CTX, [1, 2]), 2)


def test_power_sum_round_trip_random_monic():
    rng = random.Random(13)
    for ctx in (CTX, BIG):
        for _ in range(10):
            deg = rng.randrange(1, 21)
            f = Polynomial(ctx, [rng.randrange(ctx.p) for _ in range(deg)] + [1])
            ps = poly_to_power_sums(f, deg)
            assert power_sums_to_poly(ps, ctx) == f


# -- linear ODE ----------------------------------------------------------------

def test_linear_ode_exponential_solution():
    # f' = f, f(0) = 1 -> coefficients 1/i!
    n = 10
    one = Series(BIG, [1], n - 1)
    minus = Series(BIG, [BIG.p - 1], n - 1)
    zero = Series(BIG, [0], n - 1)
    f = solve_linear_ode(one, minus, zero, 1, n)
    fact = 1
    for i in range(n):
        if i:
            fact = fact * i % BIG.p
        assert f.coeffs[i] == BIG.inv(fact)


def test_linear_ode_simple_integral():
    one = Series(CTX, [1], 4)
    zero = Series(CTX, [0], 4)
    f = solve_linear_ode(one, zero, one, 0, 5)
    assert f.to_ints() == [0, 1, 0, 0, 0]


def test_linear_ode_residual_on_random_inputs():
    rng = random.Random(15)
    for _ in range(25):
        n = rng.randrange(3, 40)
        m = n - 1
        a = Series(BIG, [1] + [rng.randrange(BIG.p) for _ in range(m - 1)], m)
        b = Series(BIG, [rng.randrange(BIG.p) for _ in range(m)], m)
        c = Series(BIG, [rng.randrange(BIG.p) for _ in range(m)], m)
        alpha = rng.randrange(BIG.p)
        f = solve_linear_ode(a, b, c, alpha, n)
        assert f.coeffs[0] == alpha
        res = a * derivative(f) + b * f.truncated(m) - c
        assert not any(res.coeffs[:m])


def test_linear_ode_singular_at_origin():
    from isogenix import SingularAtOrigin
    z = Series(CTX, [0, 1], 3)
    one = Series(CTX, [1], 3)
    with pytest.raises(SingularAtOrigin):
        solve_linear_ode(z, one, one, 0, 4)


# -- nonlinear ODE ---------------------------------------------------------------

def test_nonlinear_ode_trivial_square():
    f = solve_nonlinear_ode_sq([1], 0, 1, 9, CTX)
    assert f.to_ints() == [0, 1, 0, 0, 0, 0, 0, 0, 0]


def test_nonlinear_ode_printed_solution():
    C = series_reciprocal(Series(CTX, [1, 0, 0, 0, 1, 0, 1], 11), 11)
    G = [C, 0, 0, 0, C.scale(75), 0, C.scale(16)]
    f = solve_nonlinear_ode_sq(G, 0, 1, 12)
    assert f.to_ints() == [0, 1, 0, 0, 0, 68, 0, 66, 0, 60, 0, 84]


def test_nonlinear_ode_guards():
    with pytest.raises(InconsistentInitialConditions):
        solve_nonlinear_ode_sq([1], 0, 2, 5, CTX)
    with pytest.raises(ZeroInitialDerivative):
        solve_nonlinear_ode_sq([Series(CTX, [0, 1], 5)], 0, 0, 5, CTX)


def test_nonlinear_ode_residual_random():
    rng = random.Random(19)
    for _ in range(15):
        n = rng.randrange(3, 48)
        m = max(n - 1, 1)
        coeffs = []
        for j in range(rng.randrange(1, 5)):
            coeffs.append(Series(BIG, [rng.randrange(BIG.p) for _ in range(m)], m))
        alpha = rng.randrange(BIG.p)
        g0 = 0
        for gj in reversed(coeffs):
            g0 = (g0 * alpha + gj.coeffs[0]) % BIG.p
        beta_sq = g0
        roots = BIG.sqrt(beta_sq)
        if not roots or roots == (0,):
            continue
        beta = roots[0]
        f = solve_nonlinear_ode_sq(coeffs, alpha, beta, n)
        fp = derivative(f)
        lhs = fp * fp
        acc = Series(BIG, list(coeffs[-1].coeffs), m)
        for gj in reversed(coeffs[:-1]):
            acc = acc * f.truncated(m) + gj
        res = lhs - acc
        assert not any(res.coeffs[:n - 1])


# -- composition -----------------------------------------------------------------

def test_compose_identity_inner():
    rng = random.Random(21)
    f = Series(CTX, [rng.randrange(101) for _ in range(12)], 12)
    z = Series(CTX, [0, 1], 12)
    assert compose(f, z, 12) == f


def test_compose_square_example():
    f = Series(CTX, [0, 0, 1], 4)          # z^2
    g = Series(CTX, [0, 1, 1], 4)          # z + z^2
    assert compose(f, g, 4).to_ints() == [0, 0, 1, 2]


def test_compose_matches_horner_oracle():
    rng = random.Random(22)
    for ctx in (CTX, BIG):
        n = 64
        f = Series(ctx, [rng.randrange(ctx.p) for _ in range(n)], n)
        g = Series(ctx, [0] + [rng.randrange(ctx.p) for _ in range(n - 1)], n)
        want = Series(ctx, [0], n)
        for c in reversed(f.coeffs):
            want = want * g + Series(ctx, [c], n)
        assert compose(f, g, n) == want


def test_compose_rejects_nonzero_inner_constant():
    f = Series(CTX, [1, 1], 2)
    with pytest.raises(NonzeroConstantTermInner):
        compose(f, Series(CTX, [1, 1], 2), 2)


# -- rational reconstruction -----------------------------------------------------

def test_pade_geometric():
    geo = Series(CTX, [1] * 6, 6)
    r = pade_reconstruct(geo, 0, 1)
    # canonical monic denominator: 1/(1-z) = (-1)/(z-1)
    assert r.den.to_ints() == [100, 1]
    assert r.num.to_ints() == [100]


def test_pade_recovers_random_rationals():
    rng = random.Random(25)
    for ctx in (CTX, BIG):
        for _ in range(8):
            num = Polynomial(ctx, [rng.randrange(ctx.p) for _ in range(9)])
            den = Polynomial(ctx, [1] + [rng.randrange(ctx.p) for _ in range(6)]
                             + [1])
            inv_den = series_reciprocal(Series.from_polynomial(den, 16), 16)
            f = Series.from_polynomial(num, 16) * inv_den
            got = pade_reconstruct(f, 8, 7)
            lc = den.coeffs[-1]
            assert got.den == den.monic()
            assert got.num == num.scale(ctx.inv(lc))


def test_pade_degree_bound_failure():
    # true denominator vanishing at the origin
    with pytest.raises(NoSolution):
        pade_reconstruct(Series(CTX, [0, 1], 2), 0, 1)
    # 1/(1 - z^2) needs denominator degree 2; bounds (1, 1) cannot match
    f = Series(CTX, [1, 0, 1, 0], 4)
    with pytest.raises(NoSolution):
        pade_reconstruct(f, 1, 1)


def test_pade_requires_precision():
    with pytest.raises(PrecisionError):
        pade_reconstruct(Series(CTX, [1, 1], 2), 1, 1)


def test_pade_zero_series():
    r = pade_reconstruct(Series(CTX, [0] * 5, 5), 2, 2)
    assert r.num.is_zero() and r.den.to_ints() == [1]
