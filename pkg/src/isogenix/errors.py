"""Exception hierarchy shared by all isogenix modules.

Every error raised by the library derives from IsogenixError, so callers can
catch the whole family at once.  The leaf classes mirror the failure modes of
the public operations; most carry a short human-readable message and nothing
else.
"""


class IsogenixError(Exception):
    """Base class for all isogenix errors."""


# --- prime field construction and arithmetic ---------------------------------

class NotPrime(IsogenixError):
    """The requested modulus failed the primality test."""


class TooSmall(IsogenixError):
    """The requested modulus is below 5 (p = 2, 3 never support the model)."""


class DivisionByZero(IsogenixError, ZeroDivisionError):
    """Division by the zero residue.

    May carry ``index`` when raised by a batched operation.
    """

    def __init__(self, message="division by zero", index=None):
        super().__init__(message)
        self.index = index


class NotAUnit(IsogenixError):
    """A small integer is divisible by the characteristic.

    This is the single chokepoint through which every "2..m must be units"
    precondition fails; higher layers translate it to CharacteristicTooSmall.
    """


class ContextMismatch(IsogenixError):
    """Operands belong to fields with different moduli."""


# --- polynomials and truncated power series -----------------------------------

class PrecisionError(IsogenixError):
    """An operation asked for more precision than its input carries."""


class ZeroConstantTerm(IsogenixError):
    """Series reciprocal of a series vanishing at the origin."""


class ConstantTermNotOne(IsogenixError):
    """Series logarithm requires constant term exactly 1."""


class NonzeroConstantTerm(IsogenixError):
    """Series exponential requires constant term exactly 0."""


class NonzeroConstantTermInner(IsogenixError):
    """Series composition f(g) requires g(0) = 0."""


class CharacteristicTooSmall(IsogenixError):
    """A required small-integer division hit a multiple of p."""


class SingularAtOrigin(IsogenixError):
    """Linear ODE solver requires the leading coefficient a(0) != 0."""


class InconsistentInitialConditions(IsogenixError):
    """Nonlinear ODE solver requires beta^2 = G(0, alpha) != 0."""


class ZeroInitialDerivative(IsogenixError):
    """Nonlinear ODE solver requires f'(0) = beta != 0."""


class NoSolution(IsogenixError):
    """No rational function with the requested degree bounds matches."""


class NotMonic(IsogenixError):
    """A monic polynomial was required."""


# --- curves, points, kernels ---------------------------------------------------

class SingularCurve(IsogenixError):
    """4A^3 + 27B^2 = 0: not an elliptic curve."""


class PointNotOnCurve(IsogenixError):
    """Affine coordinates do not satisfy the curve equation."""


class FieldTooLarge(IsogenixError):
    """Exhaustive group enumeration is only supported for small p."""


class NotASubgroup(IsogenixError):
    """The supplied kernel points are not closed under the group law."""


class KernelNotRational(IsogenixError):
    """The supplied kernel points do not form a Galois-stable set."""


# --- isogeny algorithms --------------------------------------------------------

class InvalidDegree(IsogenixError):
    """The isogeny degree is outside the algorithm's domain."""


class EvenDegree(IsogenixError):
    """This algorithm only handles odd degrees."""


class SigmaRequired(IsogenixError):
    """The selected algorithm needs the kernel abscissa sum as input."""


class VerificationFailed(IsogenixError):
    """A computed isogeny failed its post-computation verification."""

    def __init__(self, message="isogeny verification failed", report=None):
        super().__init__(message)
        self.report = report


class LoopStall(IsogenixError):
    """Continued-fraction expansion failed to reach the target degree."""


class ReconstructionFailed(IsogenixError):
    """Rational reconstruction found no isogeny; curves are likely not
    isogenous via a normalized degree-l map."""


# --- instance generation -------------------------------------------------------

class NotFound(IsogenixError):
    """Instance search exhausted its budget (or the target is impossible)."""
