"""
Integrand families and input laws.

This module names the integrand families and per-coordinate input laws that
meandim understands, together with lookup tables used when specs are read
from or written to the JSON experiment configuration.

Supported families:
- multiquadric: generalized multiquadric (a + sum (x_j - c_j)^2)^p
- multiquadric_z: the same family written in terms of z_j >= 0
- gaussian_product: product of squared-exponential factors
- keister: cos(||x|| / 2) under Gaussian inputs
- synthetic_additive / synthetic_product: test functions with known answers
- log_sum_z: log of the normalized z sum
"""

from enum import Enum


class Family(Enum):
    """
    Enumeration of supported integrand families.

    The value is the tag written to, and read from, the ``"family"`` key of a
    function description in the JSON configuration.
    """

    MULTIQUADRIC = "multiquadric"
    MULTIQUADRIC_Z = "multiquadric_z"
    GAUSSIAN_PRODUCT = "gaussian_product"
    KEISTER = "keister"
    SYNTHETIC_ADDITIVE = "synthetic_additive"
    SYNTHETIC_PRODUCT = "synthetic_product"
    LOG_SUM_Z = "log_sum_z"


class LawKind(Enum):
    """Enumeration of the per-coordinate input distributions."""

    STANDARD_NORMAL = "standard_normal"
    NORMAL_SHIFT = "normal_shift"
    CHI_SQUARE = "chi_square"
    FINITE_DISCRETE = "finite_discrete"


# Exponents of the named generalized multiquadrics
NAMED_EXPONENTS = {
    "inverse_quadratic": -1.0,
    "inverse_multiquadric": -0.5,
    "multiquadric": 0.5,
}

# Families whose inputs are the nonnegative z_j rather than native x_j
Z_INPUT_FAMILIES = frozenset({Family.MULTIQUADRIC_Z, Family.LOG_SUM_Z})

# Fields that must be present when reading a function description
FUNCTION_FIELD_LOOKUP = {
    Family.MULTIQUADRIC: ("p", "centers"),
    Family.MULTIQUADRIC_Z: ("p", "d"),
    Family.GAUSSIAN_PRODUCT: ("theta", "centers"),
    Family.KEISTER: ("d",),
    Family.SYNTHETIC_ADDITIVE: ("d",),
    Family.SYNTHETIC_PRODUCT: ("d",),
    Family.LOG_SUM_Z: ("d",),
}

# Fields that must be present when reading a law description
LAW_FIELD_LOOKUP = {
    LawKind.STANDARD_NORMAL: (),
    LawKind.NORMAL_SHIFT: (),
    LawKind.CHI_SQUARE: ("df",),
    LawKind.FINITE_DISCRETE: ("values", "probs"),
}
