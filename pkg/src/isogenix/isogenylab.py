"""Seven algorithms computing the normalized degree-l isogeny between two
given Weierstrass curves, sharing one truncated-power-series engine.

Every algorithm consumes (E, Et, ell) plus, where Table-style inputs demand
it, the kernel abscissa sum sigma, and produces the same Isogeny object: the
pair (N, D) with N monic of degree l, D monic of degree l - 1, and for odd l
the square root g of D.  The normalized isogeny with a given kernel is
unique, so all seven agree coefficient for coefficient whenever their
preconditions hold; the cross-agreement is part of the test suite.

The numerator is always recomputed from (D, sigma) through the exact cleared
form of the rational differential identity; see
curvelab.numerator_from_kernel_poly.

Complexities (base-field operations): fast_elkies O(M(l)), fast_elkies_prime
O(M(l) log l), elkies1998 and elkies1992 O(l^2), stark1972 and atkin1992
O(l M(l)), atkin_modcomp O(M(l) sqrt(l) + l^((w+1)/2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .curvelab import (
    Curve,
    Isogeny,
    isogeny_verify,
    kernel_poly_sqrt,
    numerator_from_kernel_poly,
    wp_series,
)
from .errors import (
    CharacteristicTooSmall,
    EvenDegree,
    InvalidDegree,
    LoopStall,
    NoSolution,
    NotAUnit,
    ReconstructionFailed,
    SigmaRequired,
    VerificationFailed,
)
from .polyseries import (
    Polynomial,
    Series,
    compose,
    mul_trunc,
    pade_reconstruct,
    power_sums_to_poly,
    series_exp,
    series_log,
    series_reciprocal,
    solve_nonlinear_ode_sq,
)


class AlgorithmId(str, Enum):
    """Closed enumeration of the isogeny algorithms."""

    Elkies1992 = "elkies1992"
    Elkies1998 = "elkies1998"
    FastElkies = "fast-elkies"
    FastElkiesPrime = "fast-elkies-prime"
    Stark1972 = "stark1972"
    Atkin1992 = "atkin1992"
    AtkinModComp = "atkin-modcomp"


#: Which algorithms require sigma as an input.
NEEDS_SIGMA = {
    AlgorithmId.Elkies1992: True,
    AlgorithmId.Elkies1998: True,
    AlgorithmId.FastElkies: True,
    AlgorithmId.FastElkiesPrime: False,
    AlgorithmId.Stark1972: False,
    AlgorithmId.Atkin1992: True,
    AlgorithmId.AtkinModComp: True,
}


@dataclass
class IsogenyWorkspace:
    """Per-algorithm intermediates, captured when the caller passes one in.

    h        coefficients h_1.. of the expansion N/D = x + sum h_i x^-i
    psums    power sums with their seed: [p_0, p_1, ...] (or q_i in g-mode)
    S,T,U,C  series intermediates of the ODE-based route
    F, G     the exponent series and its exponential (series in Z = z^2)
    mu       triangular derivative-coefficient table, one row per order
    inv_wp   functional inverse of the elliptic function at 1/x (odd series
             in u = sqrt(x)); J = inv_wp / u as a series in x
    sigma    the abscissa sum, recovered for the algorithms not taking it
    """

    h: Optional[list] = None
    psums: Optional[list] = None
    S: Optional[Series] = None
    T: Optional[Series] = None
    U: Optional[Series] = None
    C: Optional[Series] = None
    F: Optional[Series] = None
    G: Optional[Series] = None
    mu: Optional[list] = None
    inv_wp: Optional[Series] = None
    J: Optional[Series] = None
    sigma: Optional[int] = None
    gmode: Optional[bool] = None


def _unit_range(ctx, m, what):
    try:
        return ctx.inverse_range(max(m, 1))
    except NotAUnit as exc:
        raise CharacteristicTooSmall(
            f"{what} needs 1..{m} invertible modulo {ctx.p}") from exc


def _resolve_gmode(ell: int, gmode):
    if gmode is None:
        return ell % 2 == 1
    if gmode and ell % 2 == 0:
        raise EvenDegree("g-mode needs an odd degree (D = g^2)")
    return bool(gmode)


def _check_ell(ell):
    if not isinstance(ell, int) or ell < 1:
        raise InvalidDegree(f"degree must be a positive integer, got {ell!r}")


def _assemble(E: Curve, Et: Curve, ell: int, sigma, D=None, g=None,
              ws: Optional[IsogenyWorkspace] = None) -> Isogeny:
    ctx = E.ctx
    sigma = int(sigma) % ctx.p
    if D is None:
        D = g * g
    try:
        N = numerator_from_kernel_poly(E, ell, sigma, D)
    except ValueError as exc:
        raise VerificationFailed(
            "candidate kernel polynomial rejected (numerator division "
            "inexact)") from exc
    if ws is not None:
        ws.sigma = int(sigma)
    return Isogeny(E, Et, ell, N, D, sigma, g)


def _identity_isogeny(E, Et, sigma, ws):
    return _assemble(E, Et, 1, 0 if sigma is None else sigma,
                     D=Polynomial.one(E.ctx), ws=ws)


# ---------------------------------------------------------------------------
# the h_i coefficients and the power-sum transfer
# ---------------------------------------------------------------------------

def _h_sequence(ctx, A, B, At, Bt, count):
    """h_1..h_count of the expansion of N/D at infinity, by the quadratic
    recurrence driven by the second-order differential equation:
      h_k = 3/((k-2)(2k+3)) sum_{i=1}^{k-2} h_i h_{k-1-i}
            - (2k-3)/(2k+3) A h_{k-2} - 2(k-3)/(2k+3) B h_{k-3},
    seeded by h_1 = (A - At)/5, h_2 = (B - Bt)/7.  Returns a 1-indexed list.
    """
    p = ctx.p
    invs = _unit_range(ctx, max(2 * count + 3, 7), "h recurrence")
    h = [0] * (count + 1)
    if count >= 1:
        h[1] = -(At - A) * invs[5] % p
    if count >= 2:
        h[2] = -(Bt - B) * invs[7] % p
    for k in range(3, count + 1):
        conv = sum(a * b for a, b in zip(h[1:k - 1], h[k - 2:0:-1])) % p
        acc = 3 * conv * invs[k - 2] - (2 * k - 3) * A * h[k - 2] \
            - 2 * (k - 3) * B * h[k - 3]
        h[k] = acc % p * invs[2 * k + 3] % p
    return h


def _psums_from_h(ctx, h, ell, sigma, A, B, gmode):
    """Power sums of D (or of g in g-mode) from the h_i, by the linear
    recurrence obtained from the numerator identity:
      h_i = (2i+1) p_{i+1} + (2i-1) A p_{i-1} + (2i-2) B p_{i-2}
    (halved coefficients for the q_i).  Seeds: p_0 = l - 1, p_1 = sigma,
    q_0 = (l-1)/2, q_1 = sigma/2.  Returns [s_0, s_1, ...].
    """
    p = ctx.p
    sigma = int(sigma) % p
    if gmode:
        d = (ell - 1) // 2
        invs = _unit_range(ctx, max(4 * d - 2, 2), "power-sum recurrence")
        s = [0] * (d + 1)
        s[0] = d % p
        if d >= 1:
            s[1] = sigma * invs[2] % p
        for i in range(1, d):
            acc = h[i] - (4 * i - 2) * A * s[i - 1]
            if i >= 2:
                acc -= (4 * i - 4) * B * s[i - 2]
            s[i + 1] = acc % p * invs[4 * i + 2] % p
        return s
    invs = _unit_range(ctx, max(2 * ell - 3, 3), "power-sum recurrence")
    s = [0] * ell
    s[0] = (ell - 1) % p
    if ell >= 2:
        s[1] = sigma
    for i in range(1, ell - 1):
        acc = h[i] - (2 * i - 1) * A * s[i - 1]
        if i >= 2:
            acc -= (2 * i - 2) * B * s[i - 2]
        s[i + 1] = acc % p * invs[2 * i + 1] % p
    return s


def _kernel_poly_from_psums(ctx, psums, gmode):
    poly = power_sums_to_poly(psums[1:], ctx)
    return (None, poly) if gmode else (poly, None)


# ---------------------------------------------------------------------------
# Elkies' quadratic algorithm
# ---------------------------------------------------------------------------

def elkies1998(E: Curve, Et: Curve, ell: int, sigma, *, gmode=None,
               workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Quadratic-time isogeny computation from (E, Et, ell, sigma).

    Runs the O(l^2) convolution recurrence for the h_i, transfers to power
    sums, and recovers the kernel polynomial by the exponential-of-power-sums
    reconstruction.
    """
    _check_ell(ell)
    if ell == 1:
        return _identity_isogeny(E, Et, sigma, workspace)
    gmode = _resolve_gmode(ell, gmode)
    ctx = E.ctx
    count = ((ell - 1) // 2 - 1) if gmode else (ell - 2)
    h = _h_sequence(ctx, E.A, E.B, Et.A, Et.B, count)
    psums = _psums_from_h(ctx, h, ell, sigma, E.A, E.B, gmode)
    D, g = _kernel_poly_from_psums(ctx, psums, gmode)
    if workspace is not None:
        workspace.h = [int(v) for v in h[1:]]
        workspace.psums = [int(v) for v in psums]
        workspace.gmode = gmode
    return _assemble(E, Et, ell, sigma, D=D, g=g, ws=workspace)


# ---------------------------------------------------------------------------
# the quasi-linear algorithms
# ---------------------------------------------------------------------------

def _ode_pipeline(E, Et, ell, n_S, n_TU, ws):
    """Shared front end of the fast algorithms: the odd solution S of
      (B x^6 + A x^4 + 1) S'^2 = 1 + At S^4 + Bt S^6
    computed mod x^n_S, its even-part contraction T (S = x T(x^2)), and
    U = 1/T^2 mod x^n_TU."""
    ctx = E.ctx
    p, pb = ctx.p, ctx.p_bits
    n_C = n_S - 1
    base = Series(ctx, [1, 0, 0, 0, E.A, 0, E.B], n_C, 0)
    C = series_reciprocal(base, n_C)
    G = [C, 0, 0, 0, C.scale(Et.A), 0, C.scale(Et.B)]
    S = solve_nonlinear_ode_sq(G, 0, 1, n_S, ctx)
    sc = S.coeffs
    if any(sc[i] for i in range(0, n_S, 2)):
        raise AssertionError("odd solution series grew even terms")
    t = [sc[2 * j + 1] for j in range(n_TU)]
    u = _recip_sq(t, n_TU, ctx)
    T = Series(ctx, t, n_TU, 0, _trusted=True)
    U = Series(ctx, u, n_TU, 0, _trusted=True)
    if ws is not None:
        ws.C = C
        ws.S = S
        ws.T = T
        ws.U = U
    return U


def _recip_sq(t, n, ctx):
    t2 = mul_trunc(t, t, n, ctx.p, ctx.p_bits)
    return series_reciprocal(Series(ctx, t2, n, 0, _trusted=True), n).coeffs


def fast_elkies(E: Curve, Et: Curve, ell: int, sigma, *, gmode=None,
                workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Quasi-linear isogeny computation, sigma known: O(M(l)).

    The h_i are read off U = 1/T^2 (x U(1/x) is the expansion of N/D at
    infinity); the tail is shared with elkies1998.
    """
    _check_ell(ell)
    if ell == 1:
        return _identity_isogeny(E, Et, sigma, workspace)
    gmode = _resolve_gmode(ell, gmode)
    ctx = E.ctx
    if gmode:
        n_S, n_TU = ell + 1, (ell + 1) // 2
    else:
        n_S, n_TU = 2 * ell, ell
    U = _ode_pipeline(E, Et, ell, n_S, n_TU, workspace)
    h = [0] * max(n_TU - 1, 1)
    uc = U.coeffs
    for i in range(1, n_TU - 1):
        h[i] = uc[i + 1]
    psums = _psums_from_h(ctx, h, ell, sigma, E.A, E.B, gmode)
    D, g = _kernel_poly_from_psums(ctx, psums, gmode)
    if workspace is not None:
        workspace.h = [int(v) for v in h[1:]]
        workspace.psums = [int(v) for v in psums]
        workspace.gmode = gmode
    return _assemble(E, Et, ell, sigma, D=D, g=g, ws=workspace)


def fast_elkies_prime(E: Curve, Et: Curve, ell: int, *, gmode=None,
                      workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Quasi-linear isogeny computation without sigma: O(M(l) log l).

    Same series pipeline at blown-up precision, then rational reconstruction
    of U with degree bounds (l, l-1); sigma is read off the denominator.
    ReconstructionFailed signals that the curves admit no normalized
    degree-l isogeny.
    """
    _check_ell(ell)
    if ell == 1:
        return _identity_isogeny(E, Et, None, workspace)
    gmode = _resolve_gmode(ell, gmode)
    ctx = E.ctx
    p = ctx.p
    if gmode:
        n_S, n_TU = 4 * ell, 2 * ell
    else:
        n_S, n_TU = 8 * ell - 4, 4 * ell - 2
    U = _ode_pipeline(E, Et, ell, n_S, n_TU, workspace)
    try:
        rat = pade_reconstruct(U.truncated(2 * ell), ell, ell - 1)
    except NoSolution as exc:
        raise ReconstructionFailed(
            f"no degree-({ell}, {ell - 1}) rational function matches the "
            "expansion") from exc
    num, den = rat.num, rat.den
    # The reconstruction used 2l terms; the remaining slack must agree.
    lhs = mul_trunc(den.coeffs, U.coeffs, n_TU, p, ctx.p_bits)
    rhs = list(num.coeffs) + [0] * (n_TU - len(num.coeffs))
    if lhs != [v % p for v in rhs[:n_TU]]:
        raise ReconstructionFailed(
            "rational reconstruction does not extend to the full expansion")
    dc = list(den.coeffs) + [0] * (ell - len(den.coeffs))
    D = Polynomial(ctx, list(reversed(dc)))
    if D.is_zero() or D.degree != ell - 1:
        raise ReconstructionFailed("denominator has the wrong degree")
    D = D.monic()
    sigma = (-D.coeff(ell - 2)) % p if ell >= 2 else 0
    g = None
    if gmode:
        try:
            g = kernel_poly_sqrt(D)
        except ValueError as exc:
            raise ReconstructionFailed(
                "kernel polynomial of an odd-degree isogeny must be a "
                "square") from exc
    if workspace is not None:
        workspace.gmode = gmode
        workspace.sigma = int(sigma)
    return _assemble(E, Et, ell, sigma, D=D, g=g, ws=workspace)


# ---------------------------------------------------------------------------
# Stark's continued-fraction method
# ---------------------------------------------------------------------------

def stark1972(E: Curve, Et: Curve, ell: int, *,
              workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Continued-fraction expansion of the target elliptic function in terms
    of the source one; the convergent denominators climb to D.  O(l M(l)),
    sigma not required.

    LoopStall signals that the convergent degree never reaches l - 1 within
    the iteration budget: the curves are not l-isogenous.
    """
    _check_ell(ell)
    if ell == 1:
        return _identity_isogeny(E, Et, None, workspace)
    ctx = E.ctx
    p = ctx.p
    n_c = 2 * ell + 6
    wp = wp_series(E, n_c)     # series in Z = z^2, valuation -1
    wpt = wp_series(Et, n_c)
    powers = [None, wp]

    def wp_power(r):
        while len(powers) <= r:
            powers.append(powers[-1] * wp)
        return powers[r]

    T = wpt
    q_prevprev = Polynomial.one(ctx)
    q_prev = Polynomial.zero(ctx)
    x = Polynomial.x(ctx)
    for _ in range(2 * ell):
        T = T.lifted_valuation()
        if T.is_zero():
            raise LoopStall("expansion vanished before reaching degree "
                            f"{ell - 1}")
        if T.val > 0:
            raise LoopStall("no principal part left to expand")
        a = Polynomial.zero(ctx)
        while T.val <= 0:
            r = -T.val
            t = T.coeffs[0]
            a = a + Polynomial.monomial(ctx, r, t)
            if r == 0:
                T = T.add_scalar(-t)
            else:
                T = T - wp_power(r).scale(t)
            T = T.lifted_valuation()
            if T.is_zero():
                break
        q_new = a * q_prev + q_prevprev
        if q_new.degree >= ell - 1:
            if q_new.degree > ell - 1:
                raise LoopStall("convergent degree overshot the target")
            D = q_new.monic()
            sigma = (-D.coeff(ell - 2)) % p
            if workspace is not None:
                workspace.sigma = int(sigma)
            return _assemble(E, Et, ell, sigma, D=D, ws=workspace)
        q_prevprev, q_prev = q_prev, q_new
        if T.is_zero():
            raise LoopStall("expansion terminated early")
        T = series_reciprocal(T, T.prec)
    raise LoopStall(f"no degree-{ell - 1} convergent within {2 * ell} steps")


# ---------------------------------------------------------------------------
# Atkin's methods
# ---------------------------------------------------------------------------

def _atkin_exponent(E, Et, ell, sigma, n_wp):
    """F and exp(F) as series in Z = z^2, where
    D(w(z)) = z^(2-2l) exp(F(z)),
    F = -sigma Z + 2 sum_k (l c_k - ct_k) Z^(k+1) / ((2k+1)(2k+2))."""
    ctx = E.ctx
    p = ctx.p
    invs = _unit_range(ctx, 2 * ell, "exponent series")
    c = wp_series(E, n_wp)
    ct = wp_series(Et, n_wp)
    f = [0] * ell
    if ell >= 2:
        f[1] = -int(sigma) % p
    for k in range(1, ell - 1):
        diff = (ell * c.coeffs[k + 1] - ct.coeffs[k + 1]) % p
        f[k + 1] = 2 * diff * invs[2 * k + 1] % p * invs[2 * k + 2] % p
    F = Series(ctx, f, ell, 0, _trusted=True)
    return c, F, series_exp(F, ell)


def _series_pow(s: Series, e: int) -> Series:
    out = Series(s.ctx, [1] + [0] * (s.prec - 1), s.prec, 0, _trusted=True)
    base = s
    while e:
        if e & 1:
            out = out * base
        e >>= 1
        if e:
            base = base * base
    return out


def atkin1992(E: Curve, Et: Curve, ell: int, sigma, *,
              workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Atkin's direct method: peel the coefficients of D one at a time from
    z^(2-2l) exp(F) against precomputed powers of the elliptic function.
    O(l M(l)); sigma required."""
    _check_ell(ell)
    if ell == 1:
        return _identity_isogeny(E, Et, sigma, workspace)
    ctx = E.ctx
    wp, F, G = _atkin_exponent(E, Et, ell, sigma, ell)
    if workspace is not None:
        workspace.F = F
        workspace.G = G
    T = Series(ctx, list(G.coeffs), ell, 1 - ell, _trusted=True)
    wp_inv = series_reciprocal(wp, wp.prec)
    P = _series_pow(wp, ell - 1)
    d = [0] * ell
    for i in range(ell - 1, -1, -1):
        t = T.coeff(-i)
        d[i] = int(t)
        if t:
            if i == 0:
                T = T.add_scalar(-t)
            else:
                T = T - P.scale(t)
        if i:
            P = P * wp_inv
    if any(d) and d[ell - 1] != 1:
        raise AssertionError("peeled kernel polynomial lost monicity")
    D = Polynomial(ctx, d)
    return _assemble(E, Et, ell, sigma, D=D, ws=workspace)


def inverse_abscissa_series(ctx, A, B, n: int) -> Series:
    """The normalized functional inverse of the elliptic function.

    If w(z) = z^-2 + ... is the expansion attached to (A, B), the inverse
    z = w^-1(1/x) is sqrt(x) J(x) where J = sum a_i x^i satisfies the linear
    recurrence
      a_{i+1} = -(2i-1)/(2(i+1)(2i+3)) ((2i-3) B a_{i-2} + 2 A i a_{i-1}),
    a_0 = 1, a_1 = 0, a_2 = -A/10.  For A = B = 0 the inverse is sqrt(x)
    exactly and every a_i with i >= 1 vanishes.
    """
    p = ctx.p
    A = int(A) % p
    B = int(B) % p
    invs = _unit_range(ctx, 2 * n + 1, "functional inverse recurrence")
    a = [0] * n
    a[0] = 1
    if n >= 3:
        a[2] = -A * invs[2] % p * invs[5] % p
    for i in range(2, n - 1):
        acc = 2 * A * i * a[i - 1] + (2 * i - 3) * B * a[i - 2]
        a[i + 1] = (-(2 * i - 1)) * acc % p * invs[2] % p * invs[i + 1] % p \
            * invs[2 * i + 3] % p
    return Series(ctx, a, n, 0, _trusted=True)


def atkin_modcomp(E: Curve, Et: Curve, ell: int, sigma, *,
                  workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Atkin's method accelerated by modular composition.

    rev(D)(x) = J(x)^(2-2l) * G(x J(x)^2) with G = exp(F) regarded as a
    series in Z and J the normalized functional inverse of the elliptic
    function (inverse_abscissa_series).  Cost is dominated by one Brent-Kung
    composition."""
    _check_ell(ell)
    if ell == 1:
        return _identity_isogeny(E, Et, sigma, workspace)
    ctx = E.ctx
    p = ctx.p
    _, F, G = _atkin_exponent(E, Et, ell, sigma, max(ell - 2, 1))
    J = inverse_abscissa_series(ctx, E.A, E.B, ell)
    a = J.coeffs
    j2 = mul_trunc(a, a, max(ell - 1, 1), p, ctx.p_bits)
    inner = Series(ctx, j2, max(ell - 1, 1), 1, _trusted=True)
    comp = compose(G, inner, ell)
    e = (2 - 2 * ell) % p
    W = series_exp(series_log(J, ell).scale(e), ell)
    rev_d = (W * comp).coeffs
    D = Polynomial(ctx, list(reversed(list(rev_d))))
    if workspace is not None:
        workspace.F = F
        workspace.G = G
        workspace.J = J
        iw = [0] * (2 * len(a))
        for i, v in enumerate(a):
            iw[2 * i] = v
        workspace.inv_wp = Series(ctx, iw, len(iw), 1, _trusted=True)
    return _assemble(E, Et, ell, sigma, D=D, ws=workspace)


# ---------------------------------------------------------------------------
# Elkies' 1992 method
# ---------------------------------------------------------------------------

def elkies1992(E: Curve, Et: Curve, ell: int, sigma, *,
               workspace: Optional[IsogenyWorkspace] = None) -> Isogeny:
    """Odd-degree isogeny computation through the even-derivative table.

    The 2k-th derivative of the elliptic function is a polynomial
    mu_{k,k+1} w^(k+1) + ... + mu_{k,0} whose coefficients satisfy
      mu_{k+1,j} = (2j-2)(2j-1) mu_{k,j-1} + (2j+1)(2j+2) A mu_{k,j+1}
                   + (2j+2)(2j+4) B mu_{k,j+2},   mu_{k,k+1} = (2k+1)!.
    Matching Laurent coefficients of the two curves gives the triangular
    system (2k)! (ct_k - c_k) = 2 sum_j mu_{k,j} q_j for the power sums of
    g, seeded by q_0 = (l-1)/2 and q_1 = sigma/2.  O(l^2)."""
    _check_ell(ell)
    if ell % 2 == 0:
        raise EvenDegree("this method computes g and needs odd degree")
    if ell == 1:
        return _identity_isogeny(E, Et, sigma, workspace)
    ctx = E.ctx
    p = ctx.p
    d = (ell - 1) // 2
    sigma = int(sigma) % p
    invs = _unit_range(ctx, max(2 * d + 1, 2), "derivative table")
    q = [0] * (d + 1)
    q[0] = d % p
    q[1] = sigma * invs[2] % p
    mu_rows = [] if workspace is not None else None
    if d >= 2:
        A, B = E.A, E.B
        c = wp_series(E, d - 1).coeffs
        ct = wp_series(Et, d - 1).coeffs
        row = [2 * A % p, 0, 6 % p]          # second derivative: 6 w^2 + 2A
        fact = 2                              # (2k)! at k = 1
        inv_top = invs[2] * invs[3] % p       # 1/(2k+1)! at k = 1
        for k in range(1, d):
            if mu_rows is not None:
                mu_rows.append([int(v) for v in row])
            lhs = fact % p * ((ct[k + 1] - c[k + 1]) % p) % p
            acc = sum(row[j] * q[j] for j in range(k + 1)) % p
            q[k + 1] = (lhs * invs[2] - acc) % p * inv_top % p
            if k == d - 1:
                break
            nxt = [0] * (k + 3)
            for j in range(k + 3):
                v = 0
                if j >= 1:
                    v += (2 * j - 2) * (2 * j - 1) * row[j - 1]
                if j + 1 <= k + 1:
                    v += (2 * j + 1) * (2 * j + 2) * A * row[j + 1]
                if j + 2 <= k + 1:
                    v += (2 * j + 2) * (2 * j + 4) * B * row[j + 2]
                nxt[j] = v % p
            row = nxt
            fact = fact * (2 * k + 1) % p * (2 * k + 2) % p
            inv_top = inv_top * invs[2 * k + 2] % p * invs[2 * k + 3] % p
    g = power_sums_to_poly(q[1:], ctx)
    if workspace is not None:
        workspace.mu = mu_rows
        workspace.psums = [int(v) for v in q]
        workspace.gmode = True
    return _assemble(E, Et, ell, sigma, g=g, ws=workspace)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_DISPATCH = {
    AlgorithmId.Elkies1992: elkies1992,
    AlgorithmId.Elkies1998: elkies1998,
    AlgorithmId.FastElkies: fast_elkies,
    AlgorithmId.FastElkiesPrime: fast_elkies_prime,
    AlgorithmId.Stark1972: stark1972,
    AlgorithmId.Atkin1992: atkin1992,
    AlgorithmId.AtkinModComp: atkin_modcomp,
}

_TAKES_GMODE = {AlgorithmId.Elkies1998, AlgorithmId.FastElkies,
                AlgorithmId.FastElkiesPrime}


def compute_isogeny(algo, E: Curve, Et: Curve, ell: int, sigma=None, *,
                    gmode=None, workspace: Optional[IsogenyWorkspace] = None,
                    verify_samples: int = 8) -> Isogeny:
    """Front door: dispatch to the selected algorithm and verify the result.

    sigma must be supplied for the algorithms that need it (SigmaRequired
    otherwise); for the sigma-free algorithms a supplied sigma is checked
    against the recovered one.  Every returned isogeny has passed
    isogeny_verify; failure raises VerificationFailed instead of returning.
    """
    algo = AlgorithmId(algo)
    _check_ell(ell)
    if NEEDS_SIGMA[algo] and sigma is None and ell > 1:
        raise SigmaRequired(f"{algo.value} needs sigma as input")
    fn = _DISPATCH[algo]
    kwargs = {"workspace": workspace}
    if algo in _TAKES_GMODE:
        kwargs["gmode"] = gmode
    if NEEDS_SIGMA[algo]:
        iso = fn(E, Et, ell, 0 if sigma is None else sigma, **kwargs)
    else:
        iso = fn(E, Et, ell, **kwargs)
        if sigma is not None and iso.sigma != int(sigma) % E.ctx.p:
            raise VerificationFailed(
                f"recovered sigma {iso.sigma} disagrees with the supplied "
                f"{int(sigma) % E.ctx.p}")
    report = isogeny_verify(iso, samples=verify_samples)
    if not report.ok:
        raise VerificationFailed(
            "post-computation verification failed: " + "; ".join(report.failures),
            report=report)
    return iso
