"""Numerical laboratory for the trilinear pyramid averaging operator.

The multiplier of the pyramid measure can be evaluated by direct Monte Carlo
over SO(d), by a hybrid route and by a reduced Bessel-kernel quadrature.  The
package also provides decay bounds, a dyadic decomposition with its support
geometry, exact exponent-region computations and the operator itself.
"""

__version__ = "0.1.0"

from .multiplier import (
    FrequencyTriple,
    MultiplierEstimate,
    decay_bound,
    decay_scan,
    multiplier_hybrid,
    multiplier_mc,
    multiplier_reduced,
)
from .quadrature import QuadratureSpec
from .rotations import DegenerateFrame, RngStream

__all__ = [
    "__version__",
    "FrequencyTriple",
    "MultiplierEstimate",
    "QuadratureSpec",
    "RngStream",
    "DegenerateFrame",
    "multiplier_mc",
    "multiplier_hybrid",
    "multiplier_reduced",
    "decay_bound",
    "decay_scan",
]
