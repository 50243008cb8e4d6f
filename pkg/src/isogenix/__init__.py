"""isogenix: normalized degree-l isogenies between elliptic curves over
large prime fields, on a quasi-linear truncated power-series engine.

The public surface re-exported here covers the four layers:

- fieldcore: GF(p) contexts and elements;
- polyseries: polynomials, truncated series, the Newton-iteration calculus,
  composition and rational reconstruction;
- curvelab: curves, the group law, the elliptic-function expansion, Velu's
  construction, verification, and instance generation;
- isogenylab: the seven isogeny algorithms behind one dispatch.
"""

from .errors import *  # noqa: F401,F403 -- the exception family is public
from .fieldcore import (
    FieldContext,
    FieldElement,
    arith,
    batch_inverse,
    field_sqrt,
    inv_small,
    is_probable_prime,
    make_field,
)
from .polyseries import (
    Polynomial,
    RationalFunction,
    Series,
    antiderivative,
    compose,
    derivative,
    pade_reconstruct,
    poly_mul,
    poly_to_power_sums,
    power_sums_to_poly,
    series_exp,
    series_log,
    series_reciprocal,
    solve_linear_ode,
    solve_nonlinear_ode_sq,
)
from .curvelab import (
    Curve,
    GeneratedInstance,
    Isogeny,
    KernelData,
    PointAffine,
    VerificationReport,
    WpExpansion,
    enumerate_group,
    find_rational_kernel_instance,
    isogeny_apply,
    isogeny_verify,
    kernel_poly_sqrt,
    known_order_instance,
    known_order_prime,
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
from .isogenylab import (
    NEEDS_SIGMA,
    AlgorithmId,
    IsogenyWorkspace,
    atkin1992,
    atkin_modcomp,
    compute_isogeny,
    elkies1992,
    elkies1998,
    fast_elkies,
    fast_elkies_prime,
    inverse_abscissa_series,
    stark1972,
)
from .benchcli import BenchRecord, InstanceFile, run_bench

__version__ = "0.1.0"
