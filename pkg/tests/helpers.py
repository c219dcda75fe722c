"""Shared constructors for the test suite."""

import math

import numpy as np

from pyramidlab.multiplier import FrequencyTriple


def build(radius, xi_norm, log_ratio, sin_t, b1, d=5):
    """Frequency triple with prescribed cutoff variables.

    ``radius = |(eta, delta)|``, ``log_ratio = log2|eta| - log2|delta|``,
    ``sin_t`` the sine of the angle between delta and eta and ``b1`` the
    normalized component of xi orthogonal to span(delta, eta).
    """
    e = np.eye(d)
    nd = radius / math.sqrt(1.0 + 4.0**log_ratio)
    ne = nd * 2.0**log_ratio
    cos_t = math.sqrt(1.0 - sin_t**2)
    eta = ne * e[1]
    delta = nd * (cos_t * e[1] + sin_t * e[2])
    xi = xi_norm * (b1 * e[0] + math.sqrt(1.0 - b1**2) * e[1])
    return FrequencyTriple(xi, delta, eta)
