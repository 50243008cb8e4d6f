"""Weierstrass curves over GF(p): group law, Laurent expansion of the
associated elliptic function, Velu's construction, and instance generation.

Curves are y^2 = x^3 + A x + B with 4A^3 + 27B^2 != 0.  The parameterizing
elliptic function w(z) = z^-2 + sum c_i z^(2i) satisfies w'^2 = 4(w^3+Aw+B);
its coefficients c_i drive several of the isogeny algorithms.  Expansions are
computed either by the classical quadratic recurrence or by a quasi-linear
route through the nonlinear-ODE Newton solver, and the two agree coefficient
for coefficient whenever both preconditions hold.

Everything here is exact arithmetic on canonical residues; no operation
mutates shared state, so all functions are safe to call concurrently.
"""

from __future__ import annotations

import random
from array import array
from dataclasses import dataclass
from math import isqrt
from typing import Optional

from .errors import (
    CharacteristicTooSmall,
    FieldTooLarge,
    KernelNotRational,
    NotASubgroup,
    NotFound,
    PointNotOnCurve,
    SingularCurve,
    VerificationFailed,
)
from .fieldcore import FieldContext, is_probable_prime
from .polyseries import (
    Polynomial,
    Series,
    _recip_raw,
    mul_trunc,
    series_exp,
    series_log,
    series_reciprocal,
    solve_nonlinear_ode_sq,
)

#: Exhaustive group enumeration (and the small-instance generator) only run
#: below this modulus.
ENUMERATION_BOUND = 1 << 17

#: Full pairwise closure validation of kernel point sets up to this size;
#: larger sets get the cyclic reconstruction plus sampled checks.
_CLOSURE_EXHAUSTIVE_MAX = 64


class Curve:
    """y^2 = x^3 + A x + B over GF(p), nonsingular."""

    __slots__ = ("ctx", "A", "B")

    def __init__(self, ctx: FieldContext, A, B):
        p = ctx.p
        A = int(A) % p
        B = int(B) % p
        if (4 * A * A % p * A + 27 * B * B) % p == 0:
            raise SingularCurve(f"4A^3 + 27B^2 = 0 for (A, B) = ({A}, {B}) mod {p}")
        self.ctx = ctx
        self.A = A
        self.B = B

    def rhs(self, x):
        p = self.ctx.p
        x = int(x) % p
        return (x * x % p * x + self.A * x + self.B) % p

    def j_invariant(self):
        p = self.ctx.p
        a3 = 4 * self.A * self.A % p * self.A % p
        return 1728 * a3 % p * self.ctx.inv((a3 + 27 * self.B * self.B) % p) % p

    def __eq__(self, other):
        return (isinstance(other, Curve) and self.ctx.p == other.ctx.p
                and self.A == other.A and self.B == other.B)

    def __hash__(self):
        return hash((self.ctx.p, self.A, self.B))

    def __repr__(self):
        return f"Curve(y^2 = x^3 + {self.A}x + {self.B} over GF({self.ctx.p}))"


class PointAffine:
    """A point of E(GF(p)): the identity, or affine coordinates (x, y)."""

    __slots__ = ("x", "y", "is_identity")

    def __init__(self, x=None, y=None, *, identity=False):
        if identity:
            self.x = None
            self.y = None
            self.is_identity = True
        else:
            self.x = int(x)
            self.y = int(y)
            self.is_identity = False

    @classmethod
    def identity(cls):
        return cls(identity=True)

    def __eq__(self, other):
        if not isinstance(other, PointAffine):
            return NotImplemented
        if self.is_identity or other.is_identity:
            return self.is_identity and other.is_identity
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y, self.is_identity))

    def __repr__(self):
        return "O" if self.is_identity else f"({self.x}, {self.y})"


def on_curve(P: PointAffine, E: Curve) -> bool:
    if P.is_identity:
        return True
    p = E.ctx.p
    return P.y * P.y % p == E.rhs(P.x)


def _require_on_curve(P, E):
    if not on_curve(P, E):
        raise PointNotOnCurve(f"{P!r} does not satisfy {E!r}")


def point_neg(P: PointAffine, E: Curve) -> PointAffine:
    if P.is_identity:
        return P
    return PointAffine(P.x, -P.y % E.ctx.p)


def _add_unchecked(P: PointAffine, Q: PointAffine, E: Curve) -> PointAffine:
    if P.is_identity:
        return Q
    if Q.is_identity:
        return P
    p = E.ctx.p
    if P.x == Q.x:
        if (P.y + Q.y) % p == 0:
            return PointAffine.identity()
        lam = (3 * P.x * P.x + E.A) % p * E.ctx.inv(2 * P.y % p) % p
    else:
        lam = (Q.y - P.y) % p * E.ctx.inv((Q.x - P.x) % p) % p
    x3 = (lam * lam - P.x - Q.x) % p
    y3 = (lam * (P.x - x3) - P.y) % p
    return PointAffine(x3, y3)


def point_add(P: PointAffine, Q: PointAffine, E: Curve) -> PointAffine:
    """Chord-tangent group law."""
    _require_on_curve(P, E)
    _require_on_curve(Q, E)
    return _add_unchecked(P, Q, E)


def scalar_mul(k: int, P: PointAffine, E: Curve) -> PointAffine:
    """[k]P by double-and-add."""
    _require_on_curve(P, E)
    if k < 0:
        k, P = -k, point_neg(P, E)
    R = PointAffine.identity()
    Q = P
    while k:
        if k & 1:
            R = _add_unchecked(R, Q, E)
        k >>= 1
        if k:
            Q = _add_unchecked(Q, Q, E)
    return R


def random_point(E: Curve, rng: random.Random) -> PointAffine:
    """A uniformly-ish random affine point, by lifting random abscissas."""
    ctx = E.ctx
    while True:
        x = rng.randrange(ctx.p)
        roots = ctx.sqrt(E.rhs(x))
        if roots is None:
            continue
        y = roots[rng.randrange(len(roots))]
        return PointAffine(x, y)


# ---------------------------------------------------------------------------
# exhaustive small-field machinery
# ---------------------------------------------------------------------------

class _SmallFieldScanner:
    """Square-root table for one small prime; shared across candidate curves."""

    def __init__(self, p: int):
        if p > ENUMERATION_BOUND:
            raise FieldTooLarge(
                f"p = {p} exceeds the enumeration bound {ENUMERATION_BOUND}")
        self.p = p
        table = array("i", [-1] * p)
        v = 0
        table[0] = 0
        for y in range(1, p // 2 + 1):
            v = (v + 2 * y - 1) % p
            if table[v] < 0:
                table[v] = y
        self.root = table

    def sqrt_min(self, v: int) -> int:
        """Smallest square root of v, or -1."""
        return self.root[v % self.p]

    def curve_points(self, A: int, B: int):
        """All points ordered O first, then ascending (x, y)."""
        p = self.p
        root = self.root
        pts = [PointAffine.identity()]
        for x in range(p):
            v = (x * x % p * x + A * x + B) % p
            r = root[v]
            if r < 0:
                continue
            if r == 0:
                pts.append(PointAffine(x, 0))
            else:
                pts.append(PointAffine(x, r))
                pts.append(PointAffine(x, p - r))
        return pts

    def curve_order(self, A: int, B: int) -> int:
        p = self.p
        root = self.root
        n = 1
        for x in range(p):
            v = (x * x % p * x + A * x + B) % p
            r = root[v]
            if r < 0:
                continue
            n += 1 if r == 0 else 2
        return n


def enumerate_group(E: Curve):
    """Every point of E(GF(p)) for small p; deterministic ordering.

    The identity comes first, affine points follow in ascending (x, y).
    """
    scanner = _SmallFieldScanner(E.ctx.p)
    return scanner.curve_points(E.A, E.B)


# ---------------------------------------------------------------------------
# Laurent expansion of the parameterizing elliptic function
# ---------------------------------------------------------------------------

class WpExpansion:
    """Coefficients c_1..c_n of w(z) = z^-2 + sum c_i z^(2i)."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx: FieldContext, c):
        self.ctx = ctx
        self.c = [int(v) for v in c]

    @property
    def n(self) -> int:
        return len(self.c)

    def coefficient(self, i: int) -> int:
        """c_i (1-indexed)."""
        return self.c[i - 1]

    def __eq__(self, other):
        return (isinstance(other, WpExpansion) and self.ctx.p == other.ctx.p
                and self.c == other.c)

    def __repr__(self):
        return f"WpExpansion(n={self.n}, c={self.c[:4]}...)"


def _wp_guard(ctx, n, what):
    if ctx.p <= 2 * n + 3:
        raise CharacteristicTooSmall(
            f"{what} needs p > {2 * n + 3}, got p = {ctx.p}")


def wp_expand_quadratic(E: Curve, n: int) -> WpExpansion:
    """c_1..c_n by the quadratic convolution recurrence
    c_k = 3/((k-2)(2k+3)) sum_{i=1}^{k-2} c_i c_{k-1-i},  c_1 = -A/5, c_2 = -B/7.
    """
    ctx = E.ctx
    if n < 1:
        return WpExpansion(ctx, [])
    _wp_guard(ctx, n, "wp_expand_quadratic")
    p = ctx.p
    invs = ctx.inverse_range(2 * n + 3)
    c = [0] * (n + 1)
    c[1] = -E.A * invs[5] % p
    if n >= 2:
        c[2] = -E.B * invs[7] % p
    for k in range(3, n + 1):
        conv = sum(a * b for a, b in zip(c[1:k - 1], c[k - 2:0:-1])) % p
        c[k] = 3 * conv % p * invs[k - 2] % p * invs[2 * k + 3] % p
    return WpExpansion(ctx, c[1:])


def wp_expand_fast(E: Curve, n: int) -> WpExpansion:
    """c_1..c_n in softly linear time.

    Solves r'^2 = B r^6 + A r^4 + 1 for the inverse square root r(z) of w
    (r = z + (A/10) z^5 + ...), squares, and takes the series reciprocal.
    Output is identical to wp_expand_quadratic.
    """
    ctx = E.ctx
    if n < 1:
        return WpExpansion(ctx, [])
    _wp_guard(ctx, n, "wp_expand_fast")
    p, pb = ctx.p, ctx.p_bits
    r = solve_nonlinear_ode_sq([1, 0, 0, 0, E.A, 0, E.B], 0, 1, 2 * n + 4, ctx)
    t = r.coeffs[1:]                       # r/z, known mod z^(2n+3)
    t2 = mul_trunc(t, t, 2 * n + 3, p, pb)
    v = series_reciprocal(Series(ctx, t2, 2 * n + 3, 0, _trusted=True), 2 * n + 3)
    vc = v.coeffs
    # w = z^-2 (1/t^2): sanity of the even/odd structure of the solution.
    if vc[2] or any(vc[i] for i in range(1, 2 * n + 3, 2)):
        raise AssertionError("inverse-square expansion lost its even structure")
    return WpExpansion(ctx, [int(vc[2 * i + 2]) for i in range(1, n + 1)])


def wp_series(E: Curve, n: int, algorithm: str = "fast") -> Series:
    """w as a Laurent series in Z = z^2: valuation -1, coefficients
    [1, 0, c_1, ..., c_n], known mod Z^(n+1)."""
    if algorithm == "fast":
        exp = wp_expand_fast(E, n)
    elif algorithm == "quadratic":
        exp = wp_expand_quadratic(E, n)
    else:
        raise ValueError(f"unknown wp algorithm {algorithm!r}")
    return Series(E.ctx, [1, 0] + exp.c, n + 2, -1, _trusted=True)


# ---------------------------------------------------------------------------
# isogenies as rational maps
# ---------------------------------------------------------------------------

@dataclass
class KernelData:
    """Distinct kernel abscissas plus the first elementary symmetric values
    of the full multiset (pairs counted twice, matching deg D = l - 1)."""

    xs: list
    sigma: int
    sigma2: int
    sigma3: int


class Isogeny:
    """A normalized degree-l isogeny (x, y) -> (N/D, y (N/D)')."""

    __slots__ = ("source", "target", "ell", "N", "D", "sigma", "_g", "_g_known")

    def __init__(self, source: Curve, target: Curve, ell: int, N: Polynomial,
                 D: Polynomial, sigma, g: Optional[Polynomial] = None):
        self.source = source
        self.target = target
        self.ell = ell
        self.N = N
        self.D = D
        self.sigma = int(sigma) % source.ctx.p
        self._g = g
        self._g_known = g is not None

    @property
    def g(self) -> Optional[Polynomial]:
        """For odd degree, the monic square root of D; extracted on demand
        when the producing algorithm worked with D directly."""
        if not self._g_known:
            self._g_known = True
            if self.ell % 2:
                try:
                    self._g = kernel_poly_sqrt(self.D)
                except ValueError:
                    self._g = None
        return self._g

    @property
    def ctx(self) -> FieldContext:
        return self.source.ctx

    def __repr__(self):
        return (f"Isogeny(l={self.ell}, {self.source!r} -> {self.target!r}, "
                f"sigma={self.sigma})")


def numerator_from_kernel_poly(E: Curve, ell: int, sigma, D: Polynomial) -> Polynomial:
    """N from (D, sigma) through the exact polynomial form of
      N/D = l x - sigma - (3x^2+A) D'/D - 2(x^3+Ax+B) (D'/D)',
    cleared of denominators:
      N * D = (l x - sigma) D^2 - (3x^2+A) D' D - 2(x^3+Ax+B)(D'' D - D'^2).
    The final division by D is exact; a nonzero remainder would mean (D, sigma)
    is not a kernel polynomial and raises.
    """
    ctx = E.ctx
    p = ctx.p
    sigma = int(sigma) % p
    lin = Polynomial(ctx, [-sigma, ell])
    quad = Polynomial(ctx, [E.A, 0, 3])
    cubic = Polynomial(ctx, [E.B, E.A, 0, 1])
    Dp = D.derivative()
    DpD = Dp * D
    # D'' D - D'^2 = (D' D)' - 2 D'^2 saves one large product.
    wron = DpD.derivative() - (Dp * Dp).scale(2)
    rhs = lin * (D * D) - quad * DpD - (cubic * wron).scale(2)
    if D.degree == 0:
        return rhs
    if rhs.degree < D.degree:
        raise ValueError("(D, sigma) is not a kernel polynomial: degenerate "
                         "numerator identity")
    # Exact division by D through the reversal trick; the remainder check
    # only needs the low deg(D) coefficients of the back-multiplication.
    k = rhs.degree - D.degree + 1
    ra = rhs.reversed_coeffs()
    rb = D.reversed_coeffs()
    inv_rb = _recip_raw(rb, k, p, ctx.p_bits, ctx)
    q = list(reversed(mul_trunc(ra, inv_rb, k, p, ctx.p_bits)))
    m = D.degree
    low = mul_trunc(q, list(D.coeffs), m, p, ctx.p_bits)
    if any((rhs.coeff(i) - low[i]) % p for i in range(m)):
        raise ValueError("(D, sigma) is not a kernel polynomial: numerator "
                         "division is inexact")
    return Polynomial(ctx, q)


def kernel_poly_sqrt(D: Polynomial) -> Polynomial:
    """Monic g with g^2 = D, for D monic of even degree; ValueError otherwise.

    Splits off the even-order root at zero, then extracts the square root of
    the reversed polynomial as a power series exp(log/2).
    """
    ctx = D.ctx
    if D.is_zero() or not D.is_monic() or D.degree % 2:
        raise ValueError("not a monic even-degree polynomial")
    if D.degree == 0:
        return Polynomial.one(ctx)
    v = 0
    while not D.coeffs[v]:
        v += 1
    if v % 2:
        raise ValueError("odd-order root at zero: not a square")
    core = Polynomial(ctx, D.coeffs[v:], _trusted=True)
    half = core.degree // 2
    rev = Series(ctx, core.reversed_coeffs(), core.degree + 1, 0)
    s = series_exp(series_log(rev, half + 1).scale(ctx.inv_small(2)), half + 1)
    g_core = Polynomial(ctx, list(reversed(s.coeffs)))
    if not (g_core * g_core == core):
        raise ValueError("polynomial is not a perfect square")
    return g_core.shift(v // 2)


def _kernel_data(E: Curve, points) -> KernelData:
    p = E.ctx.p
    xs_mult = []
    seen = set()
    for P in points:
        xs_mult.append(P.x)
        seen.add(P.x)
    e1 = sum(xs_mult) % p
    e2 = e3 = 0
    if len(xs_mult) >= 2:
        sq = sum(x * x for x in xs_mult) % p
        e2 = (e1 * e1 - sq) % p * E.ctx.inv_small(2) % p
    if len(xs_mult) >= 3:
        cb = sum(x * x % p * x for x in xs_mult) % p
        p2 = sum(x * x for x in xs_mult) % p
        # Newton: p3 - e1 p2 + e2 p1 - 3 e3 = 0
        e3 = (cb - e1 * p2 + e2 * e1) % p * E.ctx.inv_small(3) % p
    return KernelData(xs=sorted(seen), sigma=int(e1), sigma2=int(e2), sigma3=int(e3))


def _validate_kernel(E: Curve, points, ell: int):
    seen = set()
    for P in points:
        if P.is_identity:
            raise NotASubgroup("kernel point list must not contain the identity")
        _require_on_curve(P, E)
        key = (P.x, P.y)
        if key in seen:
            raise NotASubgroup("kernel point listed twice")
        seen.add(key)
    for P in points:
        if P.y and (P.x, -P.y % E.ctx.p) not in seen:
            raise KernelNotRational(f"negative of {P!r} missing from the kernel")
    full = frozenset(seen) | {None}

    def contains(P):
        return None in full if P.is_identity else (P.x, P.y) in full

    if ell - 1 <= _CLOSURE_EXHAUSTIVE_MAX:
        for P in points:
            for Q in points:
                if not contains(_add_unchecked(P, Q, E)):
                    raise NotASubgroup(f"{P!r} + {Q!r} escapes the kernel")
        return
    # Large kernels: try exact cyclic reconstruction from some element of
    # maximal order, falling back to sampled pairwise checks.
    g0 = points[0]
    acc = g0
    walked = {(g0.x, g0.y)}
    for _ in range(ell - 2):
        acc = _add_unchecked(acc, g0, E)
        if acc.is_identity:
            break
        walked.add((acc.x, acc.y))
    if _add_unchecked(acc, g0, E).is_identity and walked == seen:
        return
    rng = random.Random(0x5EED)
    pts = list(points)
    for _ in range(128):
        P = pts[rng.randrange(len(pts))]
        Q = pts[rng.randrange(len(pts))]
        if not contains(_add_unchecked(P, Q, E)):
            raise NotASubgroup(f"{P!r} + {Q!r} escapes the kernel")


def velu_from_kernel(E: Curve, kernel_points):
    """Velu's construction: the isogenous curve and the normalized isogeny
    with kernel {O} + kernel_points.

    kernel_points lists every nonzero point of a subgroup of E(GF(p)); the
    set is validated for rationality and closure.  Returns (target, Isogeny).
    """
    ctx = E.ctx
    p = ctx.p
    points = list(kernel_points)
    ell = len(points) + 1
    _validate_kernel(E, points, ell)
    data = _kernel_data(E, points)
    s1, s2, s3 = data.sigma, data.sigma2, data.sigma3
    t = (E.A * (ell - 1) + 3 * (s1 * s1 - 2 * s2)) % p
    w = (3 * E.A * s1 + 2 * E.B * (ell - 1)
         + 5 * (s1 * s1 % p * s1 - 3 * s1 * s2 + 3 * s3)) % p
    target = Curve(ctx, (E.A - 5 * t) % p, (E.B - 7 * w) % p)
    D = Polynomial.from_roots(ctx, [P.x for P in points])
    if ell >= 2 and (-D.coeff(ell - 2)) % p != s1:
        raise NotASubgroup("kernel abscissa sum disagrees with the product")
    N = numerator_from_kernel_poly(E, ell, s1, D)
    g = None
    if ell % 2:
        # Odd order: no 2-torsion, every abscissa belongs to a +/- pair.
        g = Polynomial.from_roots(ctx, sorted({P.x for P in points}))
    iso = Isogeny(E, target, ell, N, D, s1, g)
    return target, iso


def isogeny_apply(I: Isogeny, P: PointAffine) -> PointAffine:
    """Evaluate the rational map; kernel points (and O) go to O."""
    _require_on_curve(P, I.source)
    if P.is_identity:
        return PointAffine.identity()
    ctx = I.ctx
    p = ctx.p
    d = I.D.evaluate(P.x)
    if d == 0:
        return PointAffine.identity()
    n = I.N.evaluate(P.x)
    dinv = ctx.inv(d)
    x2 = n * dinv % p
    np_ = I.N.derivative().evaluate(P.x)
    dp_ = I.D.derivative().evaluate(P.x)
    y2 = P.y * ((np_ * d - n * dp_) % p) % p * (dinv * dinv % p) % p
    image = PointAffine(x2, y2)
    if not on_curve(image, I.target):
        raise VerificationFailed("image point escapes the target curve")
    return image


@dataclass
class VerificationReport:
    """Outcome of the isogeny checks; all True means the isogeny is accepted."""

    nd_identity: bool
    shape_ok: bool
    morphism_ok: bool
    target_nonsingular: bool
    g_square_ok: bool
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def isogeny_verify(I: Isogeny, samples: int = 8, seed: int = 0xC0FFEE) -> VerificationReport:
    """Exact and randomized checks of a claimed normalized isogeny.

    (a) the cross-multiplied differential identity
        (x^3+Ax+B)(N'D - ND')^2 = N^3 D + At N D^3 + Bt D^4,
    (b) degree / monicity / abscissa-sum shape of (N, D) and g^2 = D,
    (c) the group morphism property on random point pairs,
    (d) nonsingularity of the target.
    """
    ctx = I.ctx
    p = ctx.p
    failures = []

    E, Et = I.source, I.target
    N, D = I.N, I.D
    Np, Dp = N.derivative(), D.derivative()
    cubic = Polynomial(ctx, [E.B, E.A, 0, 1])
    wron = Np * D - N * Dp
    lhs = cubic * (wron * wron)
    D2 = D * D
    D3 = D2 * D
    rhs = (N * N * N) * D + (N * D3).scale(Et.A) + (D2 * D2).scale(Et.B)
    nd_identity = lhs == rhs
    if not nd_identity:
        failures.append("differential identity")

    shape_ok = (N.is_monic() and D.is_monic()
                and N.degree == I.ell and D.degree == I.ell - 1)
    if I.ell >= 2:
        shape_ok = shape_ok and (-D.coeff(I.ell - 2)) % p == I.sigma
    else:
        shape_ok = shape_ok and I.sigma == 0
    if not shape_ok:
        failures.append("shape (degrees / monicity / sigma coefficient)")

    g_square_ok = True
    if I.g is not None:
        g_square_ok = (I.g * I.g == D)
        if not g_square_ok:
            failures.append("g^2 != D")

    target_nonsingular = (4 * Et.A * Et.A % p * Et.A + 27 * Et.B * Et.B) % p != 0
    if not target_nonsingular:
        failures.append("singular target")

    morphism_ok = False
    if nd_identity and target_nonsingular:
        rng = random.Random(seed)
        morphism_ok = True
        for _ in range(samples):
            P = random_point(E, rng)
            Q = random_point(E, rng)
            try:
                left = isogeny_apply(I, _add_unchecked(P, Q, E))
                right = _add_unchecked(isogeny_apply(I, P), isogeny_apply(I, Q), Et)
            except VerificationFailed:
                morphism_ok = False
                break
            if left != right:
                morphism_ok = False
                break
        if not morphism_ok:
            failures.append("morphism property")

    return VerificationReport(
        nd_identity=nd_identity,
        shape_ok=shape_ok,
        morphism_ok=morphism_ok,
        target_nonsingular=target_nonsingular,
        g_square_ok=g_square_ok,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# instance generation
# ---------------------------------------------------------------------------

@dataclass
class GeneratedInstance:
    """A ground-truth isogeny instance produced by Velu's construction."""

    curve: Curve
    target: Curve
    isogeny: Isogeny
    kernel_xs: list
    seed: int


def _prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _point_of_order(E: Curve, ell: int, cofactor: int, rng: random.Random,
                    tries: int = 64):
    factors = _prime_factors(ell)
    for _ in range(tries):
        P = random_point(E, rng)
        Q = scalar_mul(cofactor, P, E)
        if Q.is_identity:
            continue
        if not scalar_mul(ell, Q, E).is_identity:
            return None  # group order not actually divisible as promised
        if all(not scalar_mul(ell // q, Q, E).is_identity for q in factors):
            return Q
    return None


def _kernel_from_generator(E: Curve, Q: PointAffine, ell: int):
    pts = [Q]
    acc = Q
    for _ in range(ell - 2):
        acc = _add_unchecked(acc, Q, E)
        pts.append(acc)
    return pts


def find_rational_kernel_instance(p: int, ell: int, seed: int,
                                  budget: int = 512) -> GeneratedInstance:
    """Search small random curves over GF(p) for a rational cyclic kernel of
    order ell and return the Velu ground truth.  Deterministic per (p, ell,
    seed); NotFound after the search budget (or immediately when the Hasse
    interval rules the order out)."""
    if ell < 2:
        raise NotFound("kernel search needs ell >= 2")
    ctx = FieldContext(p)
    if p > ENUMERATION_BOUND:
        raise FieldTooLarge(
            f"p = {p} exceeds the enumeration bound {ENUMERATION_BOUND}")
    if ell > p + 1 + 2 * isqrt(p) + 1:
        raise NotFound(f"no curve over GF({p}) has a point of order {ell} "
                       "(Hasse bound)")
    scanner = _SmallFieldScanner(p)
    rng = random.Random(f"isogenix-gen:{p}:{ell}:{seed}")
    for _ in range(budget):
        A = rng.randrange(p)
        B = rng.randrange(p)
        if (4 * A * A % p * A + 27 * B * B) % p == 0:
            continue
        order = scanner.curve_order(A, B)
        if order % ell:
            continue
        E = Curve(ctx, A, B)
        Q = _point_of_order(E, ell, order // ell, rng, tries=16)
        if Q is None:
            continue
        points = _kernel_from_generator(E, Q, ell)
        target, iso = velu_from_kernel(E, points)
        return GeneratedInstance(E, target, iso, sorted({P.x for P in points}),
                                 seed)
    raise NotFound(f"no rational order-{ell} kernel found over GF({p}) "
                   f"within {budget} curve trials")


def known_order_prime(ells, p_bits: int, seed: int = 0) -> int:
    """A prime p of p_bits bits with p = -1 mod lcm(3, ells).

    Curves y^2 = x^3 + b over such p have exactly p + 1 points and cyclic
    group, so every requested ell divides the group exponent by construction.
    """
    m = 3
    for ell in ells:
        g = _gcd(m, ell)
        m = m // g * ell
    lo = 1 << (p_bits - 1)
    hi = (1 << p_bits) - 1
    k_lo = lo // m + 1
    k_hi = hi // m
    if k_hi <= k_lo:
        raise NotFound(f"no {p_bits}-bit prime = -1 mod {m}")
    rng = random.Random(f"isogenix-prime:{m}:{p_bits}:{seed}")
    k = rng.randrange(k_lo, k_hi + 1)
    for _ in range(k_hi - k_lo + 1):
        p = k * m - 1
        if is_probable_prime(p):
            return p
        k += 1
        if k > k_hi:
            k = k_lo
    raise NotFound(f"no {p_bits}-bit prime = -1 mod {m}")


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def known_order_instance(ell: int, p_bits: int = 62, seed: int = 0,
                         p: Optional[int] = None) -> GeneratedInstance:
    """A Velu ground-truth instance at large p without point counting.

    Uses the known-order family y^2 = x^3 + b with #E = p + 1 and cyclic
    group (p = 2 mod 3), so a point of exact order ell is found by cofactor
    multiplication.  Supply p (from known_order_prime) to share one field
    across several degrees.
    """
    if ell < 2:
        raise NotFound("instance generation needs ell >= 2")
    if p is None:
        p = known_order_prime([ell], p_bits, seed)
    if (p + 1) % ell or p % 3 != 2:
        raise NotFound(f"p = {p} is not a known-order prime for ell = {ell}")
    ctx = FieldContext(p)
    rng = random.Random(f"isogenix-known-order:{p}:{ell}:{seed}")
    for _ in range(64):
        b = rng.randrange(1, p)
        E = Curve(ctx, 0, b)
        Q = _point_of_order(E, ell, (p + 1) // ell, rng, tries=32)
        if Q is None:
            continue
        points = _kernel_from_generator(E, Q, ell)
        target, iso = velu_from_kernel(E, points)
        return GeneratedInstance(E, target, iso, sorted({P.x for P in points}),
                                 seed)
    raise NotFound(f"no order-{ell} point found in the known-order family at "
                   f"p = {p}")
