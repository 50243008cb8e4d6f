"""Curves, the group law, expansion of the elliptic function, and Velu."""

import random

import pytest

from isogenix import (
    Curve,
    FieldTooLarge,
    Isogeny,
    KernelNotRational,
    NotASubgroup,
    NotFound,
    PointAffine,
    PointNotOnCurve,
    Polynomial,
    SingularCurve,
    CharacteristicTooSmall,
    enumerate_group,
    find_rational_kernel_instance,
    isogeny_apply,
    isogeny_verify,
    kernel_poly_sqrt,
    known_order_instance,
    known_order_prime,
    make_field,
    numerator_from_kernel_poly,
    on_curve,
    point_add,
    point_neg,
    random_point,
    scalar_mul,
    velu_from_kernel,
    wp_expand_fast,
    wp_expand_quadratic,
    wp_series,
)

CTX = make_field(101)
C1009 = make_field(1009)


def lift_points(E, x):
    roots = E.ctx.sqrt(E.rhs(x))
    assert roots is not None
    return [PointAffine(x, y) for y in (roots if roots != (0,) else (0,))]


# -- group law -------------------------------------------------------------------

def test_identity_and_inverse():
    E = Curve(C1009, 1, 3)
    P = random_point(E, random.Random(1))
    O = PointAffine.identity()
    assert point_add(O, P, E) == P
    assert point_add(P, point_neg(P, E), E) == O
    assert scalar_mul(0, P, E) == O


def test_scalar_mul_matches_repeated_addition():
    E = Curve(C1009, 1, 3)
    rng = random.Random(2)
    for _ in range(10):
        P = random_point(E, rng)
        acc = PointAffine.identity()
        for _ in range(5):
            acc = point_add(acc, P, E)
        assert scalar_mul(5, P, E) == acc
        assert scalar_mul(-3, P, E) == point_neg(scalar_mul(3, P, E), E)


def test_point_validation():
    E = Curve(C1009, 1, 3)
    bogus = PointAffine(2, 3)
    assert not on_curve(bogus, E)
    with pytest.raises(PointNotOnCurve):
        point_add(bogus, bogus, E)


def test_singular_curve_rejected():
    with pytest.raises(SingularCurve):
        Curve(CTX, 0, 0)


def test_group_law_associativity_random():
    E = Curve(C1009, 1, 3)
    rng = random.Random(3)
    for _ in range(25):
        P, Q, R = (random_point(E, rng) for _ in range(3))
        left = point_add(point_add(P, Q, E), R, E)
        right = point_add(P, point_add(Q, R, E), E)
        assert left == right


# -- enumeration ------------------------------------------------------------------

def test_enumerate_f5_example():
    ctx5 = make_field(5)
    pts = enumerate_group(Curve(ctx5, 1, 0))
    assert pts[0].is_identity
    assert [(P.x, P.y) for P in pts[1:]] == [(0, 0), (2, 0), (3, 0)]


def test_enumeration_hasse_bound_and_pairing():
    from math import isqrt
    rng = random.Random(4)
    for _ in range(8):
        p = [211, 1009, 4999][rng.randrange(3)]
        ctx = make_field(p)
        try:
            E = Curve(ctx, rng.randrange(p), rng.randrange(p))
        except SingularCurve:
            continue
        pts = enumerate_group(E)
        n = len(pts)
        assert abs(n - (p + 1)) <= 2 * isqrt(p) + 1
        ys = {}
        for P in pts[1:]:
            ys.setdefault(P.x, []).append(P.y)
        for x, yy in ys.items():
            if len(yy) == 2:
                assert (yy[0] + yy[1]) % p == 0
            else:
                assert yy == [0]


def test_enumeration_bound_enforced():
    big = make_field((1 << 62) - 57)
    with pytest.raises(FieldTooLarge):
        enumerate_group(Curve(big, 1, 1))


# -- elliptic function expansion -----------------------------------------------

def test_wp_zero_curve_is_pure_pole():
    # A = B = 0 is singular; use A = 0 with B != 0 and A != 0 with B = 0.
    E = Curve(CTX, 0, 1)
    exp = wp_expand_quadratic(E, 6)
    assert exp.c[0] == 0  # c_1 = -A/5 = 0
    E2 = Curve(CTX, 1, 0)
    assert wp_expand_quadratic(E2, 6).c[1] == 0  # c_2 = -B/7 = 0


def test_wp_leading_coefficients():
    E = Curve(CTX, 1, 1)
    exp = wp_expand_quadratic(E, 3)
    assert exp.c[0] == -CTX.inv(5) % 101
    assert exp.c[1] == -CTX.inv(7) % 101
    # c_3 = 3/(1*9) c_1^2 = A^2/75
    assert exp.c[2] == CTX.inv(75)
    assert wp_expand_fast(E, 3).c == exp.c


def test_wp_fast_equals_quadratic_on_random_curves():
    big = make_field((1 << 62) - 57)
    rng = random.Random(5)
    for _ in range(4):
        E = Curve(big, rng.randrange(big.p), rng.randrange(big.p))
        assert wp_expand_fast(E, 200) == wp_expand_quadratic(E, 200)


def test_wp_characteristic_guard():
    ctx7 = make_field(7)
    E = Curve(ctx7, 1, 1)
    with pytest.raises(CharacteristicTooSmall):
        wp_expand_quadratic(E, 5)  # needs p > 13
    with pytest.raises(CharacteristicTooSmall):
        wp_expand_fast(E, 5)


def test_wp_series_shape():
    E = Curve(CTX, 1, 1)
    s = wp_series(E, 4)
    assert s.val == -1 and s.coeff(-1) == 1 and s.coeff(0) == 0
    assert s.coeff(1) == wp_expand_fast(E, 4).c[0]


# -- Velu's construction -----------------------------------------------------------

def test_velu_two_torsion_example():
    E = Curve(C1009, 1, 3)
    pts = [PointAffine(x, 0) for x in range(1009) if E.rhs(x) == 0]
    assert len(pts) == 3
    target, iso = velu_from_kernel(E, pts)
    assert (target.A, target.B) == (16, 192)
    assert iso.D.to_ints() == [3, 1, 0, 1]
    assert iso.N.to_ints() == [1, 985, 1007, 0, 1]
    assert isogeny_verify(iso).ok


def test_velu_trivial_kernel():
    E = Curve(C1009, 1, 3)
    target, iso = velu_from_kernel(E, [])
    assert target == E
    assert iso.N.to_ints() == [0, 1] and iso.D.to_ints() == [1]
    assert iso.ell == 1 and iso.sigma == 0


def test_velu_random_cyclic_kernels():
    rng = random.Random(6)
    for ell in (3, 5, 7, 8, 12):
        inst = find_rational_kernel_instance(10007, ell, seed=ell)
        iso = inst.isogeny
        report = isogeny_verify(iso)
        assert report.ok, report.failures
        # sigma equals the negated second-highest coefficient of D
        assert (-iso.D.coeff(ell - 2)) % 10007 == iso.sigma
        for x in inst.kernel_xs:
            assert iso.D.evaluate(x) == 0


def test_velu_rejects_non_subgroups():
    E = Curve(C1009, 1, 3)
    rng = random.Random(7)
    P = random_point(E, rng)
    while P.y == 0:
        P = random_point(E, rng)
    with pytest.raises(KernelNotRational):
        velu_from_kernel(E, [P])  # negative missing
    pts2 = [P, point_neg(P, E)]
    if scalar_mul(3, P, E) != PointAffine.identity():
        with pytest.raises(NotASubgroup):
            velu_from_kernel(E, pts2)
    bogus = PointAffine(2, 3)
    with pytest.raises(PointNotOnCurve):
        velu_from_kernel(E, [bogus])
    with pytest.raises(NotASubgroup):
        velu_from_kernel(E, [PointAffine.identity()])


# -- the rational map --------------------------------------------------------------

def _sample_instance(ell=5, seed=8):
    return find_rational_kernel_instance(10007, ell, seed=seed)


def test_apply_identity_and_kernel():
    inst = _sample_instance()
    iso = inst.isogeny
    assert isogeny_apply(iso, PointAffine.identity()).is_identity
    x0 = inst.kernel_xs[0]
    roots = inst.curve.ctx.sqrt(inst.curve.rhs(x0))
    P = PointAffine(x0, roots[0])
    assert isogeny_apply(iso, P).is_identity


def test_apply_lands_on_target():
    inst = _sample_instance()
    iso = inst.isogeny
    rng = random.Random(9)
    for _ in range(20):
        P = random_point(inst.curve, rng)
        Q = isogeny_apply(iso, P)
        assert on_curve(Q, inst.target)


def test_apply_is_a_morphism():
    inst = _sample_instance(7, 10)
    iso = inst.isogeny
    E = inst.curve
    rng = random.Random(11)
    for _ in range(20):
        P, Q = random_point(E, rng), random_point(E, rng)
        lhs = isogeny_apply(iso, point_add(P, Q, E))
        rhs = point_add(isogeny_apply(iso, P), isogeny_apply(iso, Q), inst.target)
        assert lhs == rhs


def test_verify_flags_tampering():
    inst = _sample_instance(9, 12)
    iso = inst.isogeny
    bad_n = list(iso.N.to_ints())
    bad_n[2] = (bad_n[2] + 1) % inst.curve.ctx.p
    tampered = Isogeny(iso.source, iso.target, iso.ell,
                       Polynomial(inst.curve.ctx, bad_n), iso.D, iso.sigma)
    report = isogeny_verify(tampered)
    assert not report.nd_identity and not report.ok


def test_verify_flags_wrong_sigma():
    inst = _sample_instance(5, 13)
    iso = inst.isogeny
    wrong = Isogeny(iso.source, iso.target, iso.ell, iso.N, iso.D,
                    (iso.sigma + 1) % inst.curve.ctx.p)
    assert not isogeny_verify(wrong).shape_ok


def test_kernel_poly_sqrt():
    roots = [5, 9, 70, 0]
    g = Polynomial.from_roots(CTX, roots)
    D = g * g
    assert kernel_poly_sqrt(D) == g
    with pytest.raises(ValueError):
        kernel_poly_sqrt(D * Polynomial(CTX, [3, 1]))
    with pytest.raises(ValueError):
        kernel_poly_sqrt(Polynomial(CTX, [1, 1]).scale(2))


def test_lazy_g_extraction():
    inst = _sample_instance(7, 14)
    iso = inst.isogeny
    direct = Isogeny(iso.source, iso.target, iso.ell, iso.N, iso.D, iso.sigma)
    assert direct.g is not None and direct.g * direct.g == iso.D


def test_numerator_requires_kernel_polynomial():
    E = Curve(C1009, 1, 3)
    with pytest.raises(ValueError):
        numerator_from_kernel_poly(E, 4, 5, Polynomial(C1009, [7, 9, 1, 1]))


# -- instance generation -------------------------------------------------------------

def test_generation_is_deterministic():
    a = find_rational_kernel_instance(1009, 2, seed=1)
    b = find_rational_kernel_instance(1009, 2, seed=1)
    assert (a.curve, a.target) == (b.curve, b.target)
    assert a.isogeny.N == b.isogeny.N and a.kernel_xs == b.kernel_xs
    assert a.isogeny.D.degree == 1
    c = find_rational_kernel_instance(1009, 2, seed=2)
    assert (a.curve, a.kernel_xs) != (c.curve, c.kernel_xs) or a.seed != c.seed


def test_generation_hasse_impossible():
    with pytest.raises(NotFound):
        find_rational_kernel_instance(101, 127, seed=0)


def test_generation_budget_exhaustion():
    with pytest.raises(NotFound):
        find_rational_kernel_instance(101, 97, seed=0, budget=2)


def test_generation_enumeration_bound():
    with pytest.raises(FieldTooLarge):
        find_rational_kernel_instance((1 << 62) - 57, 5, seed=0)


def test_known_order_family():
    p = known_order_prime([15], 34, seed=3)
    assert p % 3 == 2 and (p + 1) % 15 == 0 and p.bit_length() == 34
    inst = known_order_instance(15, 34, seed=3, p=p)
    assert inst.curve.A == 0
    assert inst.isogeny.ell == 15
    assert isogeny_verify(inst.isogeny).ok
    # shared prime across degrees
    p2 = known_order_prime([5, 7, 9], 34, seed=4)
    for ell in (5, 7, 9):
        got = known_order_instance(ell, 34, seed=4, p=p2)
        assert got.curve.ctx.p == p2
        assert got.isogeny.D.degree == ell - 1
