"""Dense polynomials, truncated power series, and the Newton-iteration calculus.

Coefficients are canonical residues (int or gmpy2.mpz, interchangeable) owned
by a FieldContext.  Three multiplication strategies share one dispatch:
schoolbook for tiny operands, Karatsuba for a (currently empty, see the tuned
thresholds below) middle band, and Kronecker substitution through gmpy2 above
that.  GMP's integer multiplication is quasi-linear, which gives the packed
strategy the super-linear cost profile every Newton loop here relies on:
doubling the precision costs at most a constant factor near 2.

Precision bookkeeping is explicit and checked.  A Series knows exactly how
many coefficients it carries; any operation that would need more raises
PrecisionError instead of silently truncating.  Reinterpreting a truncated
series as an exact polynomial (legitimate inside Newton lifts) is spelled
``extended``.
"""

from __future__ import annotations

from math import isqrt

import gmpy2

from .errors import (
    CharacteristicTooSmall,
    ConstantTermNotOne,
    ContextMismatch,
    InconsistentInitialConditions,
    NoSolution,
    NonzeroConstantTerm,
    NonzeroConstantTermInner,
    NotAUnit,
    NotMonic,
    PrecisionError,
    SingularAtOrigin,
    ZeroConstantTerm,
    ZeroInitialDerivative,
)
from .fieldcore import FieldContext, FieldElement

_mpz = gmpy2.mpz

# Multiplication strategy thresholds (operand length = degree + 1).  Tuned on
# the build host: the packed strategy overtakes schoolbook around length 12-16
# and pure-Python Karatsuba never beats it, so the Karatsuba band is empty by
# default.  Both alternative strategies remain available for cross-checks.
SCHOOLBOOK_MAX = 14
KARATSUBA_MAX = 14


# ---------------------------------------------------------------------------
# raw multiplication kernels (lists of residues, ascending degree)
# ---------------------------------------------------------------------------

def _mul_schoolbook(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return [v % p for v in out]


def _mul_karatsuba(a, b, p):
    n = max(len(a), len(b))
    if min(len(a), len(b)) <= SCHOOLBOOK_MAX or n <= 2 * SCHOOLBOOK_MAX:
        return _mul_schoolbook(a, b, p)
    h = n // 2
    a0, a1 = a[:h], a[h:]
    b0, b1 = b[:h], b[h:]
    z0 = _mul_karatsuba(a0, b0, p) if a0 and b0 else []
    z2 = _mul_karatsuba(a1, b1, p) if a1 and b1 else []
    sa = [(x + y) % p for x, y in _zip_pad(a0, a1)]
    sb = [(x + y) % p for x, y in _zip_pad(b0, b1)]
    z1 = _mul_karatsuba(sa, sb, p) if sa and sb else []
    out = [0] * (len(a) + len(b) - 1)
    for i, v in enumerate(z0):
        out[i] += v
    for i, v in enumerate(z1):
        out[h + i] += v
    for i, v in enumerate(z0):
        out[h + i] -= v
    for i, v in enumerate(z2):
        out[h + i] -= v
        out[2 * h + i] += v
    return [v % p for v in out]


def _zip_pad(a, b):
    if len(a) < len(b):
        a = a + [0] * (len(b) - len(a))
    elif len(b) < len(a):
        b = b + [0] * (len(a) - len(b))
    return zip(a, b)


def _mul_kronecker(a, b, p, p_bits):
    # Residues are nonnegative, so packing needs no sign handling.  Slot width
    # covers coeff products plus the carry from at most min(len) additions.
    w = 2 * p_bits + min(len(a), len(b)).bit_length() + 1
    prod = gmpy2.pack(list(a), w) * gmpy2.pack(list(b), w)
    out = gmpy2.unpack(prod, w)
    want = len(a) + len(b) - 1
    if len(out) < want:
        out.extend([0] * (want - len(out)))
    else:
        del out[want:]
    return [v % p for v in out]


def mul_coeffs(a, b, p, p_bits):
    """Exact product of two coefficient vectors, strategy chosen by size."""
    if not a or not b:
        return []
    if len(a) == 1:
        s = a[0]
        return [s * v % p for v in b] if s else [0] * len(b)
    if len(b) == 1:
        s = b[0]
        return [s * v % p for v in a] if s else [0] * len(a)
    shorter = min(len(a), len(b))
    if shorter <= SCHOOLBOOK_MAX:
        return _mul_schoolbook(a, b, p)
    if shorter <= KARATSUBA_MAX:
        return _mul_karatsuba(a, b, p)
    return _mul_kronecker(a, b, p, p_bits)


def mul_trunc(a, b, n, p, p_bits):
    """First n coefficients of a*b."""
    if n <= 0:
        return []
    out = mul_coeffs(a[:n], b[:n], p, p_bits)
    if len(out) > n:
        del out[n:]
    elif len(out) < n:
        out.extend([0] * (n - len(out)))
    return out


def _trim(coeffs):
    n = len(coeffs)
    while n and not coeffs[n - 1]:
        n -= 1
    return coeffs[:n]


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class Polynomial:
    """Dense polynomial, ascending coefficients, no trailing zeros."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldContext, coeffs, *, _trusted=False):
        self.ctx = ctx
        if _trusted:
            self.coeffs = coeffs
        else:
            p = ctx.p
            self.coeffs = _trim([int(c) % p for c in coeffs])

    # -- constructors --

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, [], _trusted=True)

    @classmethod
    def one(cls, ctx):
        return cls(ctx, [1], _trusted=True)

    @classmethod
    def x(cls, ctx):
        return cls(ctx, [0, 1], _trusted=True)

    @classmethod
    def monomial(cls, ctx, degree, coeff=1):
        c = int(coeff) % ctx.p
        if c == 0:
            return cls.zero(ctx)
        return cls(ctx, [0] * degree + [c], _trusted=True)

    @classmethod
    def from_roots(cls, ctx, roots):
        """Monic product of (x - r) over a multiset of roots, by product tree."""
        p, pb = ctx.p, ctx.p_bits
        leaves = [[-r % p, 1] for r in roots]
        if not leaves:
            return cls.one(ctx)
        while len(leaves) > 1:
            nxt = []
            for i in range(0, len(leaves) - 1, 2):
                nxt.append(mul_coeffs(leaves[i], leaves[i + 1], p, pb))
            if len(leaves) % 2:
                nxt.append(leaves[-1])
            leaves = nxt
        return cls(ctx, leaves[0], _trusted=True)

    # -- structure --

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def to_ints(self):
        return [int(c) for c in self.coeffs]

    # -- arithmetic --

    def _check(self, other):
        if self.ctx.p != other.ctx.p:
            raise ContextMismatch("polynomials over different fields")

    def __add__(self, other):
        self._check(other)
        p = self.ctx.p
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] = (out[i] + v) % p
        return Polynomial(self.ctx, _trim(out), _trusted=True)

    def __sub__(self, other):
        self._check(other)
        p = self.ctx.p
        a, b = self.coeffs, other.coeffs
        out = [0] * max(len(a), len(b))
        for i, v in enumerate(a):
            out[i] = v
        for i, v in enumerate(b):
            out[i] = (out[i] - v) % p
        return Polynomial(self.ctx, _trim(out), _trusted=True)

    def __neg__(self):
        p = self.ctx.p
        return Polynomial(self.ctx, [-v % p for v in self.coeffs], _trusted=True)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return Polynomial(
                self.ctx,
                _trim(mul_coeffs(self.coeffs, other.coeffs, self.ctx.p, self.ctx.p_bits)),
                _trusted=True)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, scalar):
        s = int(scalar) % self.ctx.p
        if s == 0:
            return Polynomial.zero(self.ctx)
        p = self.ctx.p
        return Polynomial(self.ctx, [s * v % p for v in self.coeffs], _trusted=True)

    def shift(self, k: int):
        """Multiply by x^k."""
        if self.is_zero() or k == 0:
            return self if k == 0 else Polynomial(self.ctx, self.coeffs, _trusted=True)
        return Polynomial(self.ctx, [0] * k + self.coeffs, _trusted=True)

    def derivative(self):
        p = self.ctx.p
        return Polynomial(
            self.ctx,
            _trim([i * v % p for i, v in enumerate(self.coeffs)][1:]),
            _trusted=True)

    def evaluate(self, x):
        p = self.ctx.p
        x = int(x) % p
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return int(acc)

    def monic(self):
        if self.is_zero():
            raise NotMonic("the zero polynomial cannot be made monic")
        lc = self.coeffs[-1]
        if lc == 1:
            return self
        return self.scale(self.ctx.inv(lc))

    def reversed_coeffs(self, length=None):
        """Coefficient reversal rev(f)(x) = x^(length-1) f(1/x), default length deg+1."""
        n = length if length is not None else len(self.coeffs)
        if n < len(self.coeffs):
            raise ValueError("reversal length shorter than the polynomial")
        padded = list(self.coeffs) + [0] * (n - len(self.coeffs))
        padded.reverse()
        return padded

    def divmod(self, other):
        """Quotient and remainder; Newton division for large balanced sizes."""
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        n, m = self.degree, other.degree
        if n < m:
            return Polynomial.zero(self.ctx), self
        k = n - m + 1
        p, pb = self.ctx.p, self.ctx.p_bits
        if m <= SCHOOLBOOK_MAX or k <= SCHOOLBOOK_MAX:
            q, r = _divmod_school(list(self.coeffs), other.coeffs, p)
            return (Polynomial(self.ctx, _trim(q), _trusted=True),
                    Polynomial(self.ctx, _trim(r), _trusted=True))
        ra = self.reversed_coeffs()
        rb = other.reversed_coeffs()
        inv_rb = _recip_raw(rb, k, p, pb, self.ctx)
        rq = mul_trunc(ra, inv_rb, k, p, pb)
        q = list(reversed(rq))
        qb = mul_coeffs(q, list(other.coeffs), p, pb)
        r = [(self.coeff(i) - (qb[i] if i < len(qb) else 0)) % p for i in range(m)]
        return (Polynomial(self.ctx, _trim(q), _trusted=True),
                Polynomial(self.ctx, _trim(r), _trusted=True))

    def exact_div(self, other):
        """Quotient asserting zero remainder."""
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ValueError("exact_div: nonzero remainder")
        return q

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ctx.p == other.ctx.p and list(self.coeffs) == list(other.coeffs)

    def __hash__(self):
        return hash((self.ctx.p, tuple(int(c) for c in self.coeffs)))

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{int(c)}*x^{i}" if i else f"{int(c)}")
        return "Poly(" + " + ".join(parts) + f" mod {self.ctx.p})"


def _divmod_school(a, b, p):
    m = len(b) - 1
    inv_lead = gmpy2.invert(b[-1], p)
    q = [0] * (len(a) - m)
    for i in range(len(a) - 1, m - 1, -1):
        c = a[i] % p
        if c:
            c = c * inv_lead % p
            q[i - m] = c
            for j, bj in enumerate(b):
                a[i - m + j] = (a[i - m + j] - c * bj) % p
    return q, [v % p for v in a[:m]]


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact polynomial product (size-dispatched strategy)."""
    return a * b


# ---------------------------------------------------------------------------
# truncated power series (with a signed valuation offset for Laurent objects)
# ---------------------------------------------------------------------------

class Series:
    """A truncated power series sum(coeffs[i] * z^(val+i)), known mod z^(val+prec).

    len(coeffs) == prec >= 1 always.  Coefficients below z^val are exactly
    zero by representation; coefficients at or above z^(val+prec) are unknown
    and asking for them raises PrecisionError.
    """

    __slots__ = ("ctx", "coeffs", "prec", "val")

    def __init__(self, ctx: FieldContext, coeffs, prec=None, val=0, *, _trusted=False):
        self.ctx = ctx
        if prec is None:
            prec = len(coeffs)
        if prec < 1:
            raise ValueError("series precision must be >= 1")
        if _trusted:
            cs = coeffs
        else:
            p = ctx.p
            cs = [int(c) % p for c in coeffs[:prec]]
            if len(cs) < prec:
                cs.extend([0] * (prec - len(cs)))
        if len(cs) != prec:
            raise ValueError("coefficient count must equal the precision")
        self.coeffs = cs
        self.prec = prec
        self.val = val

    # -- constructors --

    @classmethod
    def from_polynomial(cls, poly: Polynomial, prec: int, val: int = 0):
        """A polynomial regarded as an exactly-known series mod z^(val+prec)."""
        if prec < len(poly.coeffs):
            return cls(poly.ctx, list(poly.coeffs[:prec]), prec, val)
        return cls(poly.ctx, list(poly.coeffs), prec, val)

    @classmethod
    def constant(cls, ctx, value, prec: int):
        return cls(ctx, [value], prec, 0)

    @classmethod
    def zero(cls, ctx, prec: int, val: int = 0):
        return cls(ctx, [0] * prec, prec, val, _trusted=True)

    # -- structure --

    @property
    def abs_prec(self) -> int:
        """The series is known modulo z^abs_prec."""
        return self.val + self.prec

    def coeff(self, k: int):
        """Coefficient of z^k (absolute exponent)."""
        if k >= self.abs_prec:
            raise PrecisionError(
                f"coefficient of z^{k} unknown: series known mod z^{self.abs_prec}")
        if k < self.val:
            return 0
        return self.coeffs[k - self.val]

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def to_ints(self):
        return [int(c) for c in self.coeffs]

    def require_prec(self, n: int, what: str = "operation"):
        if self.prec < n:
            raise PrecisionError(
                f"{what} needs {n} known coefficients, series carries {self.prec}")

    # -- reshaping --

    def truncated(self, n: int) -> "Series":
        """Keep the first n coefficients (n <= prec)."""
        self.require_prec(n, "truncation")
        return Series(self.ctx, self.coeffs[:n], n, self.val, _trusted=True)

    def extended(self, n: int) -> "Series":
        """Zero-pad up to relative precision n.

        This *asserts* the padded coefficients are exactly zero: it is the
        explicit way to reinterpret a truncation as an exact polynomial, as
        the Newton lifts do.  It is not a precision-preserving operation.
        """
        if n <= self.prec:
            return self
        return Series(self.ctx, self.coeffs + [0] * (n - self.prec), n,
                      self.val, _trusted=True)

    def shifted(self, k: int) -> "Series":
        """Multiply by z^k (valuation bookkeeping only)."""
        return Series(self.ctx, self.coeffs, self.prec, self.val + k, _trusted=True)

    def lifted_valuation(self) -> "Series":
        """Fold leading zero coefficients into the valuation offset."""
        k = 0
        while k < self.prec - 1 and not self.coeffs[k]:
            k += 1
        if k == 0:
            return self
        return Series(self.ctx, self.coeffs[k:], self.prec - k, self.val + k,
                      _trusted=True)

    def as_polynomial(self) -> Polynomial:
        if self.val < 0:
            raise ValueError("cannot view a Laurent series as a polynomial")
        return Polynomial(self.ctx, [0] * self.val + list(self.coeffs))

    # -- arithmetic --

    def _check(self, other):
        if self.ctx.p != other.ctx.p:
            raise ContextMismatch("series over different fields")

    def __add__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        self._check(other)
        v = min(self.val, other.val)
        ap = min(self.abs_prec, other.abs_prec)
        if ap <= v:
            raise PrecisionError("sum carries no known coefficients")
        p = self.ctx.p
        out = [0] * (ap - v)
        for i, c in enumerate(self.coeffs):
            k = self.val + i - v
            if k < len(out):
                out[k] = c
        for i, c in enumerate(other.coeffs):
            k = other.val + i - v
            if k < len(out):
                out[k] = (out[k] + c) % p
        return Series(self.ctx, out, len(out), v, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        p = self.ctx.p
        return Series(self.ctx, [-c % p for c in self.coeffs], self.prec,
                      self.val, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, Series):
            self._check(other)
            n = min(self.prec, other.prec)
            out = mul_trunc(self.coeffs, other.coeffs, n, self.ctx.p, self.ctx.p_bits)
            return Series(self.ctx, out, n, self.val + other.val, _trusted=True)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, scalar) -> "Series":
        s = int(scalar) % self.ctx.p
        p = self.ctx.p
        return Series(self.ctx, [s * c % p for c in self.coeffs], self.prec,
                      self.val, _trusted=True)

    def add_scalar(self, scalar) -> "Series":
        """Add a constant (valuation must allow a z^0 term)."""
        if self.val > 0:
            raise ValueError("cannot add a constant to a series with positive valuation"
                             " without explicit reshaping")
        out = list(self.coeffs)
        k = -self.val
        if k >= self.prec:
            raise PrecisionError("constant term outside the known window")
        out[k] = (out[k] + int(scalar)) % self.ctx.p
        return Series(self.ctx, out, self.prec, self.val, _trusted=True)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        if self.ctx.p != other.ctx.p or self.abs_prec != other.abs_prec:
            return False
        v = min(self.val, other.val)
        n = self.abs_prec - v
        a = [0] * n
        b = [0] * n
        for i, c in enumerate(self.coeffs):
            a[self.val + i - v] = int(c)
        for i, c in enumerate(other.coeffs):
            b[other.val + i - v] = int(c)
        return a == b

    def __repr__(self):
        shown = ", ".join(str(int(c)) for c in self.coeffs[:8])
        if self.prec > 8:
            shown += ", ..."
        return f"Series([{shown}], val={self.val}, mod z^{self.abs_prec})"


# ---------------------------------------------------------------------------
# Newton-iteration operations
# ---------------------------------------------------------------------------

def _newton_steps(n: int):
    """Top-down precision ladder for the s -> 2s iterations, ascending."""
    steps = []
    while n > 1:
        steps.append(n)
        n = (n + 1) // 2
    steps.reverse()
    return steps


def _ode_steps(n: int):
    """Top-down precision ladder for the s -> 2s - 1 iterations, ascending."""
    steps = []
    while n > 2:
        steps.append(n)
        n = (n + 2) // 2
    steps.reverse()
    return steps


def _inverse_table(ctx, m, what):
    try:
        return ctx.inverse_range(m) if m >= 1 else ctx.inverse_range(1)
    except NotAUnit as exc:
        raise CharacteristicTooSmall(
            f"{what} needs 1..{m} invertible modulo {ctx.p}") from exc


def _recip_raw(f, n, p, p_bits, ctx):
    if not f[0]:
        raise ZeroConstantTerm("series reciprocal needs a unit constant term")
    g = [int(gmpy2.invert(f[0], p))]
    s = 1
    for t in _newton_steps(n):
        # e = f g - 1 vanishes mod z^s, so the Newton correction
        # g <- g (2 - f g) only touches coefficients s..t-1 and its nonzero
        # part is a half-size product.
        e = mul_trunc(f[:t], g, t, p, p_bits)
        tail = e[s:]
        if any(tail):
            corr = mul_trunc(g, tail, t - s, p, p_bits)
            g = g[:s] + [-v % p for v in corr]
        else:
            g = g[:s] + [0] * (t - s)
        s = t
    return g[:n]


def _deriv_raw(f, p):
    return [i * c % p for i, c in enumerate(f)][1:]


def _antider_raw(f, p, invs):
    out = [0] * (len(f) + 1)
    for i, c in enumerate(f):
        out[i + 1] = c * invs[i + 1] % p
    return out


def _log_raw(g, n, p, p_bits, ctx):
    if g[0] != 1:
        raise ConstantTermNotOne("series log needs constant term 1")
    invs = _inverse_table(ctx, max(n - 1, 1), "series log")
    if n == 1:
        return [0]
    num = _deriv_raw(g[:n], p)
    den = _recip_raw(g, n - 1, p, p_bits, ctx)
    q = mul_trunc(num, den, n - 1, p, p_bits)
    return _antider_raw(q, p, invs)[:n]


def _refine_inverse(g, h, t, p, p_bits):
    """Newton-refine h toward 1/g mod z^t from any valid starting segment.

    The first index where g h deviates from 1 reveals h's current validity;
    each corrective pass doubles it, so the loop runs once in the common
    half-to-full schedule and never more than a logarithmic number of times.
    """
    h = (h + [0] * t)[:t]
    while True:
        e = mul_trunc(g, h, t, p, p_bits)
        e[0] = (e[0] - 1) % p
        k = 0
        while k < t and not e[k]:
            k += 1
        if k >= t:
            return h
        corr = mul_trunc(h, e[k:], t - k, p, p_bits)
        h = h[:k] + [(x - v) % p for x, v in zip(h[k:], corr)]
        if 2 * k >= t:
            return h


def _exp_with_inverse_raw(f, n, p, p_bits, ctx, inv_prec=0):
    """g = exp(f) mod z^n together with h = 1/g mod z^inv_prec.

    One Newton loop maintains the reciprocal iterate alongside the
    exponential, so the logarithm needed at each level costs one
    multiplication against h instead of a fresh reciprocal ladder, and the
    exp correction itself is a half-size product.
    """
    if f and f[0]:
        raise NonzeroConstantTerm("series exp needs constant term 0")
    if inv_prec > n:
        raise ValueError("inverse precision cannot exceed the exp precision")
    invs = _inverse_table(ctx, max(n - 1, 1), "series exp")
    g = [1]
    h = [1]
    s = 1   # g correct mod z^s, always stored as exactly s coefficients
    for t in _newton_steps(n):
        if t > 2:
            h = _refine_inverse(g, h, t - 1, p, p_bits)
            dg = [i * c % p for i, c in enumerate(g)][1:]
            lg = _antider_raw(mul_trunc(dg, h, t - 1, p, p_bits), p, invs)
        else:
            lg = [0] * t
        ft = f[:t]
        if len(ft) < t:
            ft = ft + [0] * (t - len(ft))
        delta_tail = [(x - y) % p for x, y in zip(ft[s:], lg[s:])]
        if any(delta_tail):
            corr = mul_trunc(g, delta_tail, t - s, p, p_bits)
            g = g[:s] + [v % p for v in corr]
        else:
            g = g[:s] + [0] * (t - s)
        s = t
    if inv_prec:
        h = _refine_inverse(g, h, inv_prec, p, p_bits)
    return g[:n], h


def _exp_raw(f, n, p, p_bits, ctx):
    return _exp_with_inverse_raw(f, n, p, p_bits, ctx)[0]


def series_reciprocal(f: Series, n: int) -> Series:
    """g with f*g = 1 mod z^n (relative precision), Newton doubling."""
    f.require_prec(n, "series_reciprocal")
    ctx = f.ctx
    out = _recip_raw(f.coeffs, n, ctx.p, ctx.p_bits, ctx)
    return Series(ctx, out, n, -f.val, _trusted=True)


def series_log(g: Series, n: int) -> Series:
    """log(g) mod z^n for g with g(0) = 1, via antiderivative of g'/g."""
    if g.val != 0:
        raise ConstantTermNotOne("series log needs an ordinary series with g(0) = 1")
    g.require_prec(n, "series_log")
    ctx = g.ctx
    return Series(ctx, _log_raw(g.coeffs, n, ctx.p, ctx.p_bits, ctx), n, 0,
                  _trusted=True)


def series_exp(f: Series, n: int) -> Series:
    """exp(f) mod z^n for f with f(0) = 0, by Newton iteration on log."""
    if f.val > 0:
        f = Series(f.ctx, [0] * f.val + list(f.coeffs), f.val + f.prec, 0,
                   _trusted=True)
    elif f.val < 0:
        raise NonzeroConstantTerm("series exp needs a series with f(0) = 0")
    f.require_prec(n, "series_exp")
    ctx = f.ctx
    return Series(ctx, _exp_raw(f.coeffs, n, ctx.p, ctx.p_bits, ctx), n, 0,
                  _trusted=True)


def derivative(f: Series) -> Series:
    """Term-wise d/dz; one coefficient of precision is lost."""
    p = f.ctx.p
    v = f.val
    out = [(v + i) * c % p for i, c in enumerate(f.coeffs)]
    if v == 0:
        out = out[1:]
        if not out:
            raise PrecisionError("derivative of a single-term series carries nothing")
        return Series(f.ctx, out, f.prec - 1, 0, _trusted=True)
    return Series(f.ctx, out, f.prec, v - 1, _trusted=True)


def antiderivative(f: Series) -> Series:
    """Term-wise integral with constant 0; one coefficient of precision gained."""
    ctx = f.ctx
    p = ctx.p
    v = f.val
    if v < 0 and v + f.prec > -1 and f.coeffs[-1 - v]:
        raise CharacteristicTooSmall("antiderivative of a z^-1 term does not exist")
    top = v + f.prec
    invs = _inverse_table(ctx, max(abs(v) + f.prec + 1, abs(top) + 1),
                          "antiderivative")
    out = [0] * f.prec
    for i, c in enumerate(f.coeffs):
        e = v + i
        if e == -1:
            continue
        sign_inv = invs[e + 1] if e >= 0 else -invs[-(e + 1)] % p
        out[i] = c * sign_inv % p
    return Series(ctx, [0] + out if v == 0 else out,
                  f.prec + 1 if v == 0 else f.prec,
                  v if v == 0 else v + 1, _trusted=True)


def solve_linear_ode(a: Series, b: Series, c: Series, alpha, n: int) -> Series:
    """The unique f mod z^n with a f' + b f = c and f(0) = alpha.

    Uses f = (alpha + int(C J)) / J with B = b/a, C = c/a, J = exp(int B).
    Requires a(0) != 0 and 1..n-1 invertible.
    """
    for s in (a, b, c):
        if s.val != 0:
            raise SingularAtOrigin("linear ODE inputs must be ordinary series")
    if not a.coeffs[0]:
        raise SingularAtOrigin("leading coefficient vanishes at the origin")
    m = max(n - 1, 1)
    a.require_prec(m, "solve_linear_ode")
    b.require_prec(m, "solve_linear_ode")
    c.require_prec(m, "solve_linear_ode")
    ctx = a.ctx
    out = _linear_ode_raw(a.coeffs, b.coeffs, c.coeffs, int(alpha) % ctx.p, n, ctx)
    return Series(ctx, out, n, 0, _trusted=True)


def _linear_ode_raw(a, b, c, alpha, n, ctx):
    p, pb = ctx.p, ctx.p_bits
    alpha = int(alpha) % p
    if n == 1:
        return [alpha]
    m = n - 1
    invs = _inverse_table(ctx, m, "solve_linear_ode")
    cfront = c[:m]
    v0 = 0
    while v0 < len(cfront) and not cfront[v0]:
        v0 += 1
    if alpha == 0 and v0 >= m:
        return [0] * n
    if alpha == 0 and v0 >= 2:
        # c = z^v0 chat and f(0) = 0 force f into z^(v0+1) K[[z]]; every
        # product in f = J^-1 int(c J / a) then lives in a window of length
        # L = n - 1 - v0, roughly halving each Newton lift that lands here.
        L = m - v0
        ainv = _recip_raw(a, L, p, pb, ctx)
        chat = mul_trunc(cfront[v0:], ainv, L, p, pb)
        bb = mul_trunc(b, ainv, L, p, pb)
        intb = _antider_raw(bb[:L - 1], p, invs) if L > 1 else [0]
        jj, jinv = _exp_with_inverse_raw(intb, L, p, pb, ctx, inv_prec=L)
        cj = mul_trunc(chat, jj, L, p, pb)
        w = [cj[i] * invs[v0 + i + 1] % p for i in range(L)]
        out = mul_trunc(w, jinv, L, p, pb)
        return [0] * (v0 + 1) + out
    ainv = _recip_raw(a, m, p, pb, ctx)
    bb = mul_trunc(b, ainv, m, p, pb)
    cc = mul_trunc(cfront, ainv, m, p, pb)
    int_b = _antider_raw(bb, p, invs)  # length m + 1 = n
    jj, jinv = _exp_with_inverse_raw(int_b, n, p, pb, ctx, inv_prec=n)
    cj = mul_trunc(cc, jj, m, p, pb)
    acc = _antider_raw(cj, p, invs)
    acc[0] = alpha
    return mul_trunc(acc, jinv, n, p, pb)


def _coerce_series_coeff(ctx, g, prec):
    """Normalize a G-coefficient (Series, FieldElement or int) to a raw list."""
    if isinstance(g, Series):
        if g.val != 0:
            raise ValueError("G coefficients must be ordinary series")
        g.require_prec(prec, "solve_nonlinear_ode_sq")
        return g.coeffs[:prec]
    if isinstance(g, FieldElement):
        g = g.value
    return [int(g) % ctx.p] + [0] * (prec - 1)


def solve_nonlinear_ode_sq(G, alpha, beta, n: int, ctx=None) -> Series:
    """f mod z^n with f'^2 = G(z, f), f(0) = alpha, f'(0) = beta.

    G is given as a sequence of coefficients of powers of f (Series or
    constants).  Each doubling step s -> 2s-1 solves the linearized equation
      2 f1' f2' - G_t(z, f1) f2 = G(z, f1) - f1'^2
    for the correction f2 through the linear ODE solver.  Requires
    beta^2 = G(0, alpha) != 0 and 1..n-1 invertible.
    """
    if ctx is None:
        ctx = next(g.ctx for g in G if isinstance(g, Series))
    p, pb = ctx.p, ctx.p_bits
    alpha = int(alpha) % p
    beta = int(beta) % p
    m = max(n - 1, 1)
    graw = [_coerce_series_coeff(ctx, g, m) for g in G]
    g0_at_alpha = 0
    for gj in reversed(graw):
        g0_at_alpha = (g0_at_alpha * alpha + gj[0]) % p
    if beta == 0:
        raise ZeroInitialDerivative("needs f'(0) = beta != 0")
    if beta * beta % p != g0_at_alpha:
        raise InconsistentInitialConditions("beta^2 != G(0, alpha)")
    _inverse_table(ctx, max(n - 1, 1), "solve_nonlinear_ode_sq")

    f = [alpha, beta]
    if n == 1:
        return Series(ctx, [alpha], 1, 0, _trusted=True)
    even_only = all(j % 2 == 0 or _is_zero_raw(gj) for j, gj in enumerate(graw))
    for t in _ode_steps(n):
        mt = t - 1
        f1 = f + [0] * (t - len(f))
        fp = _deriv_raw(f1, p) + [0]              # length t - 1
        fp = fp[:mt]
        gf, gtf = _eval_G_and_Gt(graw, f1, mt, p, pb, even_only)
        fp2 = mul_trunc(fp, fp, mt, p, pb)
        rhs = [(x - y) % p for x, y in zip(gf, fp2)]
        a = [2 * v % p for v in fp]
        b = [-v % p for v in gtf]
        f2 = _linear_ode_raw(a, b, rhs, 0, t, ctx)
        f = [(x + y) % p for x, y in zip(f1, f2)]
    return Series(ctx, f[:n], n, 0, _trusted=True)


def _is_zero_raw(cs):
    return all(not c for c in cs)


def _eval_G_and_Gt(graw, f1, m, p, pb, even_only):
    """G(z, f1) and G_t(z, f1) mod z^m by Horner in the second variable."""
    f1 = f1[:m] if len(f1) > m else f1 + [0] * (m - len(f1))
    if even_only and len(graw) >= 3:
        # G = H(f^2): Horner in u = f^2 halves the multiplication count, and
        # G_t = f * H'(u) * 2 reuses u.
        u = mul_trunc(f1, f1, m, p, pb)
        hcoeffs = graw[0::2]
        acc = list(hcoeffs[-1])
        dacc = [(len(hcoeffs) - 1) * c % p for c in hcoeffs[-1]]
        for j in range(len(hcoeffs) - 2, -1, -1):
            acc = mul_trunc(acc, u, m, p, pb)
            acc = [(x + y) % p for x, y in _zip_pad(acc, list(hcoeffs[j]))]
            if j >= 1:
                dacc = mul_trunc(dacc, u, m, p, pb)
                dacc = [(x + j * y) % p for x, y in _zip_pad(dacc, list(hcoeffs[j]))]
        gt = [2 * v % p for v in mul_trunc(dacc, f1, m, p, pb)]
        return acc[:m], gt[:m]
    acc = list(graw[-1])
    for j in range(len(graw) - 2, -1, -1):
        acc = mul_trunc(acc, f1, m, p, pb)
        acc = [(x + y) % p for x, y in _zip_pad(acc, list(graw[j]))]
    dacc = [(len(graw) - 1) * c % p for c in graw[-1]]
    for j in range(len(graw) - 2, 0, -1):
        dacc = mul_trunc(dacc, f1, m, p, pb)
        dacc = [(x + j * y) % p for x, y in _zip_pad(dacc, list(graw[j]))]
    return acc[:m], dacc[:m]


# ---------------------------------------------------------------------------
# power sums <-> monic polynomials
# ---------------------------------------------------------------------------

def power_sums_to_poly(psums, ctx) -> Polynomial:
    """The monic degree-n polynomial whose root power sums are psums[0..n-1].

    Inverts the generating-series identity
      z^n f(1/z) = exp(-sum_i p_i z^i / i)
    in O(M(n)); requires 1..n invertible.
    """
    n = len(psums)
    if n == 0:
        return Polynomial.one(ctx)
    p, pb = ctx.p, ctx.p_bits
    invs = _inverse_table(ctx, n, "power_sums_to_poly")
    arg = [0] * (n + 1)
    for i, s in enumerate(psums, start=1):
        arg[i] = -int(s) * invs[i] % p
    e = _exp_raw(arg, n + 1, p, pb, ctx)
    e.reverse()
    return Polynomial(ctx, e, _trusted=True)


def poly_to_power_sums(f: Polynomial, n: int):
    """First n power sums of the roots of monic f (with multiplicity).

    Expands -rev(f)'/rev(f); exact coefficient extraction, no small divisions.
    """
    if not f.is_monic():
        raise NotMonic("poly_to_power_sums needs a monic polynomial")
    ctx = f.ctx
    p, pb = ctx.p, ctx.p_bits
    if f.degree == 0 or n == 0:
        return [0] * n
    rev = f.reversed_coeffs()
    num = [-c % p for c in _deriv_raw(rev, p)]
    num += [0] * (n - len(num))
    den = _recip_raw(rev + [0] * max(0, n - len(rev)), n, p, pb, ctx)
    q = mul_trunc(num, den, n, p, pb)
    return [int(v) for v in q]


# ---------------------------------------------------------------------------
# composition (Brent-Kung baby-step/giant-step)
# ---------------------------------------------------------------------------

def compose(f: Series, g: Series, n: int) -> Series:
    """f(g) mod z^n; requires g(0) = 0.

    Baby steps build g^0..g^m for m ~ sqrt(n); the scalar combinations run on
    Kronecker-packed rows so the n^1.5 coefficient work happens inside GMP.
    """
    if g.val < 0 or (g.val == 0 and g.coeffs[0]):
        raise NonzeroConstantTermInner("composition needs g(0) = 0")
    f.require_prec(n, "compose")
    if f.val != 0:
        raise ValueError("compose expects an ordinary outer series")
    if g.abs_prec < n:
        raise PrecisionError(
            f"compose needs the inner series mod z^{n}, known mod z^{g.abs_prec}")
    ctx = f.ctx
    p, pb = ctx.p, ctx.p_bits
    gz = [0] * g.val + list(g.coeffs) if g.val > 0 else list(g.coeffs)
    gz = gz[:n] + [0] * max(0, n - len(gz))
    fl = list(f.coeffs[:n])
    if all(not c for c in gz):
        return Series(ctx, [fl[0]] + [0] * (n - 1), n, 0, _trusted=True)
    m = isqrt(n - 1) + 1
    powers = [[1] + [0] * (n - 1), gz]
    for _ in range(2, m + 1):
        powers.append(mul_trunc(powers[-1], gz, n, p, pb))
    w = 2 * pb + m.bit_length() + 2
    packed = [gmpy2.pack(pw, w) for pw in powers[:m]]
    rows = []
    for base in range(0, len(fl), m):
        acc = _mpz(0)
        for j, c in enumerate(fl[base:base + m]):
            if c:
                acc += c * packed[j]
        row = gmpy2.unpack(acc, w)
        row = row[:n] + [_mpz(0)] * max(0, n - len(row))
        rows.append([v % p for v in row])
    gm = powers[m]
    out = rows[-1]
    for i in range(len(rows) - 2, -1, -1):
        out = mul_trunc(out, gm, n, p, pb)
        out = [(x + y) % p for x, y in zip(out, rows[i])]
    return Series(ctx, out, n, 0, _trusted=True)


# ---------------------------------------------------------------------------
# rational function reconstruction
# ---------------------------------------------------------------------------

class RationalFunction:
    """num/den with den monic and gcd(num, den) = 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial, *, _normalized=False):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _normalized:
            lc = den.coeffs[-1]
            if lc != 1:
                inv = den.ctx.inv(lc)
                num = num.scale(inv)
                den = den.scale(inv)
        self.num = num
        self.den = den

    def evaluate(self, x):
        d = self.den.evaluate(x)
        return self.num.ctx.div(self.num.evaluate(x), d)

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __repr__(self):
        return f"({self.num!r}) / ({self.den!r})"


def _poly_divmod_raw(a, b, p, pb, ctx):
    """divmod on raw trimmed lists; Newton division above the tiny range."""
    if len(a) < len(b):
        return [], list(a)
    m = len(b) - 1
    k = len(a) - len(b) + 1
    if m <= SCHOOLBOOK_MAX or k <= SCHOOLBOOK_MAX:
        q, r = _divmod_school(list(a), b, p)
        return _trim(q), _trim(r)
    ra = list(reversed(a))
    rb = list(reversed(b))
    inv_rb = _recip_raw(rb, k, p, pb, ctx)
    rq = mul_trunc(ra, inv_rb, k, p, pb)
    q = list(reversed(rq))
    qb = mul_coeffs(q, list(b), p, pb)
    r = [(a[i] - qb[i]) % p for i in range(m)]
    return _trim(q), _trim(r)


def _mat_apply(M, a, b, p, pb):
    (m00, m01), (m10, m11) = M
    ra = _trim([(x + y) % p for x, y in _zip_pad(mul_coeffs(m00, a, p, pb),
                                                 mul_coeffs(m01, b, p, pb))])
    rb = _trim([(x + y) % p for x, y in _zip_pad(mul_coeffs(m10, a, p, pb),
                                                 mul_coeffs(m11, b, p, pb))])
    return ra, rb


def _mat_mul(A, B, p, pb):
    (a00, a01), (a10, a11) = A
    (b00, b01), (b10, b11) = B

    def comb(x, y, z, w):
        return _trim([(u + v) % p for u, v in _zip_pad(mul_coeffs(x, y, p, pb),
                                                       mul_coeffs(z, w, p, pb))])

    return ((comb(a00, b00, a01, b10), comb(a00, b01, a01, b11)),
            (comb(a10, b00, a11, b10), comb(a10, b01, a11, b11)))


_MAT_ID = (([1], []), ([], [1]))


def _deg(a):
    return len(a) - 1  # -1 for the zero polynomial (empty list)


def _shift_down(a, k):
    """Quotient of a by z^k (drop the low k coefficients)."""
    return a[k:] if k < len(a) else []


_HGCD_CUTOFF = 48


def _hgcd(a, b, p, pb, ctx):
    """Matrix M with M (a, b)^T = (c, d)^T consecutive remainders of the
    Euclidean scheme on (a, b), deg c >= ceil(deg a / 2) > deg d."""
    n = _deg(a)
    m = (n + 1) // 2
    if _deg(b) < m:
        return _MAT_ID
    if n <= _HGCD_CUTOFF:
        return _hgcd_iter(a, b, m, p, pb, ctx)
    a1 = _shift_down(a, m)
    b1 = _shift_down(b, m)
    R = _hgcd(a1, b1, p, pb, ctx)
    if R is not _MAT_ID:
        a, b = _mat_apply(R, a, b, p, pb)
    if _deg(b) < m:
        return R
    q, r = _poly_divmod_raw(a, b, p, pb, ctx)
    Q = (([], [1]), ([1], [-v % p for v in q]))
    a, b = b, r
    if _deg(b) < m:
        return _mat_mul(Q, R, p, pb)
    k = 2 * m - _deg(a)
    a2 = _shift_down(a, k)
    b2 = _shift_down(b, k)
    S = _hgcd(a2, b2, p, pb, ctx)
    return _mat_mul(S, _mat_mul(Q, R, p, pb), p, pb)


def _hgcd_iter(a, b, m, p, pb, ctx):
    """Iterative base case: plain Euclidean steps until deg b < m."""
    M = _MAT_ID
    while _deg(b) >= m:
        q, r = _poly_divmod_raw(a, b, p, pb, ctx)
        nq = [-v % p for v in q]
        (m00, m01), (m10, m11) = M
        M = ((m10, m11),
             (_trim([(x + y) % p for x, y in _zip_pad(m00, mul_coeffs(nq, m10, p, pb))]),
              _trim([(x + y) % p for x, y in _zip_pad(m01, mul_coeffs(nq, m11, p, pb))])))
        a, b = b, r
    return M


def _eea_threshold_fast(a, b, k, p, pb, ctx):
    """First Euclidean remainder of (a, b) with degree <= k, with its
    b-cofactor: returns (r, v) where r = u a + v b.

    Half-gcd jumps reduce the pair in O(M(n) log n).  When the threshold sits
    above the half point, the jump runs on the pair shifted down by
    t = 2k + 2 - n: the half point of the shifted pair is the absolute
    degree k + 1, so the jump lands exactly on the straddle of the threshold
    without skipping the first crossing remainder.
    """
    v_prev, v_cur = [], [1]
    while b and _deg(b) > k:
        n = _deg(a)
        if n > _HGCD_CUTOFF:
            t = max(0, 2 * k + 2 - n)
            at = _shift_down(a, t)
            bt = _shift_down(b, t)
            M = _MAT_ID
            if _deg(bt) >= (_deg(at) + 1) // 2 > 0:
                M = _hgcd(at, bt, p, pb, ctx)
            if M is not _MAT_ID:
                a, b = _mat_apply(M, a, b, p, pb)
                (m00, m01), (m10, m11) = M
                nv = _trim([(x + y) % p for x, y in
                            _zip_pad(mul_coeffs(m00, v_prev, p, pb),
                                     mul_coeffs(m01, v_cur, p, pb))])
                nv2 = _trim([(x + y) % p for x, y in
                             _zip_pad(mul_coeffs(m10, v_prev, p, pb),
                                      mul_coeffs(m11, v_cur, p, pb))])
                v_prev, v_cur = nv, nv2
                continue
        q, r = _poly_divmod_raw(a, b, p, pb, ctx)
        nq = [-x % p for x in q]
        v_next = _trim([(x + y) % p for x, y in
                        _zip_pad(v_prev, mul_coeffs(nq, v_cur, p, pb))])
        a, b = b, r
        v_prev, v_cur = v_cur, v_next
    return b, v_cur


def _eea_threshold_slow(a, b, k, p, pb, ctx):
    """Reference quadratic Euclidean scheme; oracle for the fast path."""
    v_prev, v_cur = [], [1]
    while b and _deg(b) > k:
        q, r = _poly_divmod_raw(a, b, p, pb, ctx)
        nq = [-x % p for x in q]
        v_next = _trim([(x + y) % p for x, y in
                        _zip_pad(v_prev, mul_coeffs(nq, v_cur, p, pb))])
        a, b = b, r
        v_prev, v_cur = v_cur, v_next
    return b, v_cur


def pade_reconstruct(f: Series, max_num_deg: int, max_den_deg: int,
                     *, strategy: str = "fast") -> RationalFunction:
    """Rational function of degrees <= (max_num_deg, max_den_deg) matching f
    mod z^(num+den+1); canonical form (monic denominator, coprime).

    Raises NoSolution when no such function exists, PrecisionError when f
    carries fewer than num+den+1 coefficients.
    """
    if f.val != 0:
        raise ValueError("pade_reconstruct expects an ordinary series")
    need = max_num_deg + max_den_deg + 1
    f.require_prec(need, "pade_reconstruct")
    ctx = f.ctx
    p, pb = ctx.p, ctx.p_bits
    fc = _trim(list(f.coeffs[:need]))
    if not fc:
        return RationalFunction(Polynomial.zero(ctx), Polynomial.one(ctx),
                                _normalized=True)
    zN = [0] * need + [1]
    if strategy == "fast":
        r, v = _eea_threshold_fast(zN, fc, max_num_deg, p, pb, ctx)
    elif strategy == "reference":
        r, v = _eea_threshold_slow(zN, fc, max_num_deg, p, pb, ctx)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not v or not v[0]:
        raise NoSolution("denominator would vanish at the origin")
    if _deg(v) > max_den_deg:
        raise NoSolution("no rational function matches the degree bounds")
    check = mul_trunc(v, list(f.coeffs[:need]), need, p, pb)
    rr = list(r) + [0] * (need - len(r))
    if check != [x % p for x in rr[:need]]:
        raise NoSolution("expansion mismatch after reconstruction")
    inv = ctx.inv(v[-1])
    num = Polynomial(ctx, [c * inv % p for c in r], _trusted=False)
    den = Polynomial(ctx, [c * inv % p for c in v], _trusted=False)
    return RationalFunction(num, den, _normalized=True)
