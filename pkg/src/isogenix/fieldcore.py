"""Exact arithmetic in GF(p) for a runtime-chosen multiprecision prime p.

A FieldContext owns the modulus and the derived constants; FieldElement is a
thin wrapper over a canonical residue in [0, p).  All scalars flowing through
the curve and series layers are such residues (plain Python ints or gmpy2
mpz --- the two are interchangeable everywhere and are normalized to int at
serialization boundaries).

The context also hosts the small-integer inverse chokepoint ``inv_small``:
every "2..m must be units in K" precondition in the series and isogeny layers
funnels through it, so a too-small characteristic always fails there with
NotAUnit and is re-raised as CharacteristicTooSmall by the caller.
"""

from __future__ import annotations

import random

import gmpy2

from .errors import (
    ContextMismatch,
    DivisionByZero,
    NotAUnit,
    NotPrime,
    TooSmall,
)

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
    151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
)

# 64 Miller-Rabin rounds with pseudo-random bases: error probability below
# 4^-64 = 2^-128, comfortably under the 2^-100 construction contract.
_MR_ROUNDS = 64


def is_probable_prime(n: int, rounds: int = _MR_ROUNDS) -> bool:
    """Miller-Rabin primality test with bases drawn deterministically from n."""
    n = int(n)
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n ^ 0x9E3779B97F4A7C15)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_probable_prime(n: int) -> int:
    """Smallest probable prime >= n."""
    n = int(n)
    if n <= 2:
        return 2
    if n % 2 == 0:
        n += 1
    while not is_probable_prime(n):
        n += 2
    return n


class FieldContext:
    """The field GF(p).  Immutable after construction, freely shareable.

    The lazily grown inverse table for 1..m is an internal cache invisible at
    the type boundary; writes to it are idempotent, so unsynchronized access
    from several threads is safe under the GIL.
    """

    __slots__ = ("p", "p_bits", "_inv_table")

    def __init__(self, p):
        p = int(p)
        if p < 5:
            if p in (2, 3):
                raise TooSmall(f"p = {p}: the short Weierstrass model needs p >= 5")
            raise NotPrime(f"p = {p} is not an odd prime >= 5")
        if not is_probable_prime(p):
            raise NotPrime(f"p = {p} failed the primality test")
        self.p = p
        self.p_bits = p.bit_length()
        self._inv_table = [0, 1]  # inverse of k at index k

    # -- basic residue arithmetic (plain int in, plain int out) --

    def reduce(self, a) -> int:
        return int(a) % self.p

    def element(self, a) -> "FieldElement":
        return FieldElement(self, int(a) % self.p)

    def neg(self, a):
        return -a % self.p

    def inv(self, a):
        """Multiplicative inverse of the residue a."""
        a %= self.p
        if a == 0:
            raise DivisionByZero("inverse of zero residue")
        return int(gmpy2.invert(a, self.p))

    def div(self, a, b):
        return a * self.inv(b) % self.p

    def inv_small(self, k: int):
        """Inverse of the small natural number k mod p.

        Raises NotAUnit when p | k; this is how every characteristic guard in
        the series layer trips.  Results are cached.
        """
        if k < 0:
            raise ValueError("inv_small expects a natural number")
        table = self._inv_table
        if k < len(table):
            r = table[k]
            if r == 0:
                raise NotAUnit(f"{k} is not a unit modulo {self.p}")
            return r
        if k % self.p == 0:
            raise NotAUnit(f"{k} is not a unit modulo {self.p}")
        return int(gmpy2.invert(k, self.p))

    def inverse_range(self, m: int) -> list:
        """Inverses of 1..m as a table indexed by k (index 0 unused).

        One amortized pass: inv(k) = -(p // k) * inv(p mod k) mod p.  Entries
        divisible by p would be non-units; building the table past p - 1 is
        therefore rejected.
        """
        if m >= self.p:
            raise NotAUnit(f"cannot invert 1..{m} modulo {self.p}")
        table = self._inv_table
        if m >= len(table):
            p = self.p
            for k in range(len(table), m + 1):
                table.append(-(p // k) * table[p % k] % p)
        return table

    def sqrt(self, a):
        """Square roots of the residue a, smallest first.

        Returns (0,) for a = 0, (r, p - r) when a is a nonzero square, and
        None when a is a non-residue.
        """
        p = self.p
        a %= p
        if a == 0:
            return (0,)
        if pow(a, (p - 1) // 2, p) != 1:
            return None
        if p % 4 == 3:
            r = pow(a, (p + 1) // 4, p)
        else:
            r = self._tonelli_shanks(a)
        r = int(r)
        return (r, p - r) if r <= p - r else (p - r, r)

    def _tonelli_shanks(self, a):
        p = self.p
        q = p - 1
        s = 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t = t * c % p
            r = r * b % p
        return r

    def legendre(self, a) -> int:
        """Quadratic character: 1 for nonzero squares, -1 for non-residues, 0 for 0."""
        a %= self.p
        if a == 0:
            return 0
        return 1 if pow(a, (self.p - 1) // 2, self.p) == 1 else -1

    def batch_inv(self, values) -> list:
        """Element-wise inverses with one field inversion (Montgomery trick)."""
        p = self.p
        n = len(values)
        prefix = [0] * (n + 1)
        acc = 1
        prefix[0] = 1
        for i, v in enumerate(values):
            v %= p
            if v == 0:
                raise DivisionByZero(f"zero residue at index {i}", index=i)
            acc = acc * v % p
            prefix[i + 1] = acc
        acc = self.inv(acc)
        out = [0] * n
        for i in range(n - 1, -1, -1):
            out[i] = prefix[i] * acc % p
            acc = acc * (values[i] % p) % p
        return out

    # -- misc --

    def __eq__(self, other):
        return isinstance(other, FieldContext) and self.p == other.p

    def __hash__(self):
        return hash(("FieldContext", self.p))

    def __repr__(self):
        return f"FieldContext(p={self.p})"


class FieldElement:
    """A canonical residue in [0, p) with operator arithmetic."""

    __slots__ = ("ctx", "value")

    def __init__(self, ctx: FieldContext, value):
        self.ctx = ctx
        self.value = int(value) % ctx.p

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.ctx.p != self.ctx.p:
                raise ContextMismatch(
                    f"mixing GF({self.ctx.p}) and GF({other.ctx.p}) elements")
            return other.value
        if isinstance(other, (int, type(gmpy2.mpz(0)))):
            return int(other) % self.ctx.p
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, self.value - v)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, v - self.value)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, self.value * v)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, self.value * self.ctx.inv(v))

    def __rtruediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, v * self.ctx.inv(self.value))

    def __neg__(self):
        return FieldElement(self.ctx, -self.value)

    def __pow__(self, e):
        if e < 0:
            return FieldElement(self.ctx, pow(self.ctx.inv(self.value), -e, self.ctx.p))
        return FieldElement(self.ctx, pow(self.value, e, self.ctx.p))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.ctx.p == other.ctx.p and self.value == other.value
        if isinstance(other, (int, type(gmpy2.mpz(0)))):
            return self.value == int(other) % self.ctx.p
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.p, self.value))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.ctx.p})"

    def serialize(self) -> str:
        """Decimal string, no leading zeros; the wire format for JSON instances."""
        return str(self.value)


def make_field(p) -> FieldContext:
    """Build GF(p), rejecting composite p (NotPrime) and p < 5 (TooSmall)."""
    return FieldContext(p)


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Named four-function arithmetic; thin wrapper over the operators."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def inv_small(k: int, ctx: FieldContext) -> FieldElement:
    """Inverse of the natural number k in GF(p); NotAUnit when p | k."""
    return FieldElement(ctx, ctx.inv_small(k))


def field_sqrt(a: FieldElement):
    """Both square roots of a as FieldElements (smaller first), or None."""
    roots = a.ctx.sqrt(a.value)
    if roots is None:
        return None
    return tuple(FieldElement(a.ctx, r) for r in roots)


def batch_inverse(values):
    """Element-wise inverses of a list of FieldElements via one inversion."""
    if not values:
        return []
    ctx = values[0].ctx
    for v in values:
        if v.ctx.p != ctx.p:
            raise ContextMismatch("batch_inverse across different fields")
    out = ctx.batch_inv([v.value for v in values])
    return [FieldElement(ctx, r) for r in out]
