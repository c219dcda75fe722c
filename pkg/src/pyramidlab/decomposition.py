"""Dyadic decomposition of the multiplier.

Five partitions of frequency space are built from one smooth step:

* ``phi_i`` in the size ``|(eta, delta)|`` and ``zeta_i`` in ``|xi|``;
* ``psi_j`` in the ratio ``min(|eta|,|delta|) / max(|eta|,|delta|)``;
* ``rho_k`` in ``|sin theta|``, theta the angle between delta and eta;
* ``rho1_k`` in ``|b1|``, the normalized component of xi orthogonal to
  span(delta, eta).

The pieces ``m_{i,j,k}`` multiply ``m`` by one cutoff from each family.  The
two angular families are combined through the joint "max-level" partition
``A_k = sum_{max(k1,k2)=k} rho_k1 rho1_k2`` so that, at fixed ``i``, the pieces
over all valid ``(j, k)`` add up to ``m phi_i zeta_i``.  The diagonal product
``rho_k rho1_k`` is available as ``angular="diagonal"``; it does not have that
property.

Support volumes and the summability bookkeeping for the L^2 estimate live at
the end of the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from scipy.special import betainc, gammaln

from .rotations import RngStream

__all__ = [
    "EPSILON",
    "smooth_step",
    "CutoffFamily",
    "FrequencyAngles",
    "frequency_angles",
    "PieceIndex",
    "valid_indices",
    "SupportBox",
    "support_box",
    "piece_multiplier",
    "pieces_at_level",
    "VolumeEstimate",
    "support_volume_mc",
    "support_volume_exact",
    "support_volume_bound",
    "L2Report",
    "l2_exponent_report",
]

EPSILON = 0.01


def _f(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C^infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``, monotone between."""
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    a, b = _f(t), _f(1.0 - t)
    out = a / (a + b)
    return float(out) if scalar else out


@dataclass(frozen=True)
class CutoffFamily:
    """The one-dimensional profiles behind the partitions.

    ``Phi0`` (and ``Z0``) equal 1 on ``[0, 1]`` and vanish from 2 on; ``Psi``
    equals 1 on ``[0, 1]`` with support ``[-eps, 1 + eps]``; ``P`` equals 1 on
    ``[-1, 1]`` with support ``[-2, 2]``.
    """

    epsilon: float = EPSILON

    def __post_init__(self):
        if not 0 < self.epsilon < 0.1:
            raise ValueError("epsilon must lie in (0, 1/10)")

    # --- profiles -------------------------------------------------------
    def Phi0(self, rho):
        return 1.0 - smooth_step(np.asarray(rho, dtype=float) - 1.0)

    Z0 = Phi0

    def Psi(self, t):
        e = self.epsilon
        t = np.asarray(t, dtype=float)
        return smooth_step((t + e) / e) * smooth_step((1.0 + e - t) / e)

    def P(self, t):
        return 1.0 - smooth_step(np.abs(np.asarray(t, dtype=float)) - 1.0)

    # --- size partitions --------------------------------------------------
    def radial_piece(self, i: int, rho):
        """``Phi0(rho)`` for ``i = 0``, else ``Phi0(2^-i rho) - Phi0(2^(1-i) rho)``."""
        if i < 0:
            raise ValueError("level must be >= 0")
        if i == 0:
            return self.Phi0(rho)
        return self.Phi0(rho * 2.0**-i) - self.Phi0(rho * 2.0 ** (1 - i))

    # --- ratio partition ----------------------------------------------------
    def Psi_i(self, i: int, t):
        """``Psi(t - i) / sum_k Psi(t - k)``."""
        t = np.asarray(t, dtype=float)
        lo = int(np.floor(np.min(t))) - 2
        hi = int(np.ceil(np.max(t))) + 2
        total = sum(self.Psi(t - k) for k in range(lo, hi + 1))
        return self.Psi(t - i) / total

    def ratio_piece(self, j: int, log_ratio):
        """``psi_j`` as a function of ``L = log2|eta| - log2|delta|``."""
        return self.Psi_i(j, log_ratio) + self.Psi_i(-j - 1, log_ratio)

    def ratio_upper(self, i: int, log_ratio):
        """``psi^i = sum_{k >= i} psi_k``; equals 1 once ``|L| >= i + eps``."""
        L = np.abs(np.asarray(log_ratio, dtype=float))
        top = int(np.ceil(np.max(L))) + 2
        return sum(self.ratio_piece(k, L) for k in range(i, max(i, top) + 1))

    # --- angular partitions -------------------------------------------------
    def angle_piece(self, k: int, c):
        """``rho_k`` as a function of ``c = |sin theta|`` (or ``|b1|``)."""
        x = np.asarray(c, dtype=float) ** 2
        if k < 0:
            raise ValueError("angular level must be >= 0")
        if k == 0:
            return 1.0 - self.P(4.0 * x)
        return self.P(4.0**k * x) - self.P(4.0 ** (k + 1) * x)

    def angle_upper(self, k: int, c):
        """``rho^k = P(4^k c^2)``; the tail ``sum_{k' >= k} rho_k'``."""
        x = np.asarray(c, dtype=float) ** 2
        if k == 0:
            return np.ones_like(x) if np.ndim(x) else 1.0
        return self.P(4.0**k * x)

    def joint_angle_piece(self, k: int, c1, c2):
        """``sum_{max(k1,k2)=k} rho_k1(c1) rho_k2(c2)``."""
        lo1 = 1.0 - self.angle_upper(k + 1, c1)  # sum_{k1 <= k}
        lo2 = 1.0 - self.angle_upper(k + 1, c2)
        below1 = 1.0 - self.angle_upper(k, c1)  # sum_{k1 < k}
        below2 = 1.0 - self.angle_upper(k, c2)
        return lo1 * lo2 - below1 * below2

    def joint_angle_upper(self, k: int, c1, c2):
        """``1 - (1 - rho^k(c1))(1 - rho^k(c2))``; the joint tail at level ``k``."""
        return 1.0 - (1.0 - self.angle_upper(k, c1)) * (1.0 - self.angle_upper(k, c2))


@dataclass(frozen=True)
class FrequencyAngles:
    """Scalar data the cutoffs depend on."""

    radius: float  # |(eta, delta)|
    xi_norm: float
    log_ratio: float  # log2|eta| - log2|delta|
    sin_theta: float
    b1: float

    @property
    def ratio(self) -> float:
        return 2.0 ** -abs(self.log_ratio)


def frequency_angles(point) -> FrequencyAngles:
    """Compute the cutoff variables of a frequency triple.

    Raises
    ------
    ValueError
        If delta or eta vanishes, delta is parallel to eta, or xi vanishes;
        the ratio or an angle is then undefined.
    """
    from .multiplier import _as_triple

    p = _as_triple(point)
    nd = float(np.linalg.norm(p.delta))
    ne = float(np.linalg.norm(p.eta))
    nx = float(np.linalg.norm(p.xi))
    if nd == 0 or ne == 0:
        raise ValueError("ratio and angle undefined: delta or eta is zero")
    if nx == 0:
        raise ValueError("angle of xi undefined: xi is zero")
    f2 = p.eta / ne
    perp = p.delta - (p.delta @ f2) * f2
    sin_t = float(np.linalg.norm(perp)) / nd
    if sin_t <= 1e-12:
        raise ValueError("span(delta, eta) is one-dimensional")
    f3 = perp / np.linalg.norm(perp)
    rest = p.xi - (p.xi @ f2) * f2 - (p.xi @ f3) * f3
    b1 = float(np.linalg.norm(rest)) / nx
    return FrequencyAngles(
        math.hypot(nd, ne), nx, math.log2(ne) - math.log2(nd), min(sin_t, 1.0), min(b1, 1.0)
    )


@dataclass(frozen=True, order=True)
class PieceIndex:
    """Index ``(i, j, k)`` of a piece; see :func:`valid_indices`."""

    i: int
    j: int
    k: int

    def __post_init__(self):
        if (self.i, self.j, self.k) == (0, 0, 0):
            return
        if self.i < 1 or not 0 <= self.j <= self.i or not 0 <= self.k <= self.k_max:
            raise ValueError(f"invalid piece index {(self.i, self.j, self.k)}")

    @property
    def k_max(self) -> int:
        return (self.i - self.j) // 2

    @property
    def ratio_border(self) -> bool:
        return self.j == self.i

    @property
    def angle_border(self) -> bool:
        return self.k == self.k_max

    @property
    def typical(self) -> bool:
        return not (self.ratio_border or self.angle_border)


def valid_indices(i: int) -> Iterator[PieceIndex]:
    """All ``(i, j, k)`` at level ``i``."""
    if i == 0:
        yield PieceIndex(0, 0, 0)
        return
    for j in range(i + 1):
        for k in range((i - j) // 2 + 1):
            yield PieceIndex(i, j, k)


def _cutoff_product(idx: PieceIndex, a: FrequencyAngles, fam: CutoffFamily, angular: str) -> float:
    size = fam.radial_piece(idx.i, a.radius) * fam.radial_piece(idx.i, a.xi_norm)
    if size == 0:
        return 0.0
    if idx.ratio_border:
        ratio = fam.ratio_upper(idx.i, a.log_ratio)
    else:
        ratio = fam.ratio_piece(idx.j, a.log_ratio)
    if idx.j == idx.i:
        ang = 1.0
    elif angular == "joint":
        f = fam.joint_angle_upper if idx.angle_border else fam.joint_angle_piece
        ang = f(idx.k, a.sin_theta, a.b1)
    elif angular == "diagonal":
        f = fam.angle_upper if idx.angle_border else fam.angle_piece
        ang = f(idx.k, a.sin_theta) * f(idx.k, a.b1)
    else:
        raise ValueError(f"unknown angular partition {angular!r}")
    return float(size * ratio * ang)


def piece_multiplier(
    idx: PieceIndex,
    point,
    m_eval: Callable | complex | float | None = None,
    family: CutoffFamily = CutoffFamily(),
    angular: str = "joint",
) -> complex:
    """``m_{i,j,k}`` at ``point``: ``m`` times the five cutoffs.

    ``m_eval`` is a callable returning the multiplier at ``point`` or an
    already computed value; by default the reduced quadrature is used.  The
    multiplier is only evaluated when the cutoff product is nonzero.
    """
    a = frequency_angles(point)
    c = _cutoff_product(idx, a, family, angular)
    if c == 0.0:
        return 0.0
    if m_eval is None:
        from .multiplier import multiplier_reduced

        m = multiplier_reduced(point).value
    elif callable(m_eval):
        m = m_eval(point)
        m = getattr(m, "value", m)
    else:
        m = m_eval
    return c * m


def pieces_at_level(i: int, point, m_value: complex = 1.0,
                    family: CutoffFamily = CutoffFamily(), angular: str = "joint") -> dict:
    """All pieces at level ``i`` for a known multiplier value."""
    a = frequency_angles(point)
    return {idx: m_value * _cutoff_product(idx, a, family, angular) for idx in valid_indices(i)}


@dataclass(frozen=True)
class SupportBox:
    """Closed bounds containing the support of a piece.

    Angular constraints: each of ``|sin theta|`` and ``|b1|`` lies in
    ``[each_min, each_max]`` and their minimum is at most ``min_max``.
    """

    radius: tuple[float, float]
    xi_norm: tuple[float, float]
    ratio: tuple[float, float]
    each_min: float = 0.0
    each_max: float = 1.0
    min_max: float = 1.0

    def contains(self, a: FrequencyAngles) -> bool:
        inside = lambda v, lohi: lohi[0] <= v <= lohi[1]
        s, b = a.sin_theta, a.b1
        return (
            inside(a.radius, self.radius)
            and inside(a.xi_norm, self.xi_norm)
            and inside(a.ratio, self.ratio)
            and self.each_min <= min(s, b)
            and max(s, b) <= self.each_max
            and min(s, b) <= self.min_max
        )


def support_box(idx: PieceIndex, epsilon: float = EPSILON, angular: str = "joint") -> SupportBox:
    """Support bounds of ``m_{i,j,k}`` implied by the cutoff definitions.

    The ratio band of ``psi_j`` is ``[2^(-j-1-eps), 2^(-j+eps)]``.
    """
    i, j, k = idx.i, idx.j, idx.k
    size = (0.0, 2.0) if i == 0 else (2.0 ** (i - 1), 2.0 ** (i + 1))
    if idx.ratio_border:
        ratio = (0.0, min(1.0, 2.0 ** (-i + epsilon)))
    else:
        ratio = (2.0 ** (-j - 1 - epsilon), min(1.0, 2.0 ** (-j + epsilon)))
    box = dict(radius=size, xi_norm=size, ratio=ratio)
    if j == i:
        return SupportBox(**box)
    cap = 2.0 ** (0.5 - k)
    if idx.angle_border:
        if k == 0:
            return SupportBox(**box)
        if angular == "joint":
            return SupportBox(**box, min_max=cap)
        return SupportBox(**box, each_max=cap)
    if k == 0:
        return SupportBox(**box, each_min=0.5)
    if angular == "joint":
        # the smaller of the two angles sits at level k, the other at level <= k
        return SupportBox(**box, each_min=2.0 ** (-k - 1), min_max=cap)
    return SupportBox(**box, each_min=2.0 ** (-k - 1), each_max=cap)


# --------------------------------------------------------------------------
# support volumes


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    n: int

    @property
    def relative_error(self) -> float:
        return self.stderr / self.value if self.value else math.inf

    @property
    def underpowered(self) -> bool:
        return self.relative_error > 0.2


def _ball_volume(d: int, r: float) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)) * r**d


def _region(idx: PieceIndex) -> tuple[float, float, float]:
    """``(outer radius, min-norm radius, angular cap)`` of the volume region."""
    return 2.0 ** (idx.i + 1), 2.0 ** (idx.i - idx.j + 2), min(1.0, 2.0 ** (1 - idx.k))


def support_volume_mc(idx: PieceIndex, d: int, n: int, rng: RngStream) -> VolumeEstimate:
    """Monte Carlo volume in R^(3d) of the region

    ``{min(|eta|,|delta|) <= 2^(i-j+2); |xi|, max(|eta|,|delta|) <= 2^(i+1);
    |sin theta|, |b1| <= 2^(1-k)}``.

    Norms are drawn uniformly from the ball of radius ``2^(i+1)`` (the
    bounding domain).  Directions are importance sampled: the polar angle of
    delta about eta is drawn uniformly inside the cap ``|sin| <= c`` and the
    angle of xi out of span(delta, eta) uniformly in ``[0, arcsin c]``, each
    reweighted by the ratio of the surface density to the proposal density.
    """
    if not 4 <= d <= 8:
        raise ValueError("support_volume_mc is meant for 4 <= d <= 8")
    gen = rng.generator()
    big, small, cap = _region(idx)
    # radial parts: |.| = big * U^(1/d) is uniform in the ball
    r = big * gen.random((n, 3)) ** (1.0 / d)
    radial = np.minimum(r[:, 1], r[:, 2]) <= small
    # delta about eta: polar angle density sin^(d-2) / C on [0, pi]
    c_sphere = math.sqrt(math.pi) * math.exp(gammaln((d - 1) / 2) - gammaln(d / 2))
    th_c = math.asin(cap)
    if cap >= 1.0:
        w_theta = np.ones(n)
    else:
        th = gen.random(n) * th_c
        # both caps around +eta and -eta, total proposal length 2 th_c
        w_theta = np.sin(th) ** (d - 2) / c_sphere * (2.0 * th_c)
    # xi out of the plane: angle phi with density (d-2) cos phi sin^(d-3) phi on [0, pi/2]
    if cap >= 1.0:
        w_phi = np.ones(n)
    else:
        ph = gen.random(n) * th_c
        w_phi = (d - 2) * np.cos(ph) * np.sin(ph) ** (d - 3) * th_c
    x = radial * w_theta * w_phi
    scale = _ball_volume(d, big) ** 3
    return VolumeEstimate(
        float(scale * x.mean()), float(scale * x.std(ddof=1) / math.sqrt(n)), n
    )


def support_volume_exact(idx: PieceIndex, d: int) -> float:
    """Closed form of the same volume.

    ``sin^2 theta`` is Beta((d-1)/2, 1/2) distributed and ``b1^2`` is
    Beta((d-2)/2, 1) for uniform directions.
    """
    big, small, cap = _region(idx)
    q = min(1.0, small / big) ** d
    radial = 1.0 - (1.0 - q) ** 2
    ang = float(betainc((d - 1) / 2, 0.5, cap**2) * betainc((d - 2) / 2, 1.0, cap**2))
    return _ball_volume(d, big) ** 3 * radial * ang


def support_volume_bound(idx: PieceIndex, d: int) -> float:
    """The model bound ``2^(2di) 2^(d(i-j)) 2^(-2k(d-3))`` without its constant."""
    return 2.0 ** (2 * d * idx.i + d * (idx.i - idx.j) - 2 * idx.k * (d - 3))


# --------------------------------------------------------------------------
# L^2 summability bookkeeping


@dataclass(frozen=True)
class L2Report:
    """Exponent bookkeeping for the L^2 x L^2 x L^2 -> L^(2/3) sum.

    A piece is bounded by ``2^(c i + a j + b k)``.  ``exponent`` is the
    per-level rate obtained by bounding the ``j`` and ``k`` sums separately
    (``c + a + b/2``); ``tight_exponent`` is the exact rate of the double
    sum, ``c + max(0, a, b/2)``.  The coefficient ``c`` uses the factor
    ``3/2`` on ``i (d-3)`` that makes the stated rate come out;
    ``printed_i_coefficient`` is the rate from the factor ``2/3``.
    """

    d: int
    c: Fraction
    a: Fraction
    b: Fraction
    exponent: Fraction
    tight_exponent: Fraction
    printed_i_coefficient: Fraction
    summable: bool
    tight_summable: bool
    threshold: int
    tight_threshold: int

    def as_dict(self) -> dict:
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.__dict__.items()}


def _coefficients(d: int):
    d = Fraction(d)
    decay = -(d - 3) / 2  # exponent of the multiplier decay
    c = Fraction(3, 2) * 2 * decay + (2 * d + d) / 3
    a = (d - 3) / 2 - d / 3
    b = (d - 3) - Fraction(2, 3) * (d - 3)
    printed = Fraction(2, 3) * 2 * decay + (2 * d + d) / 3
    return c, a, b, printed


def _paper_rate(d: int) -> Fraction:
    c, a, b, _ = _coefficients(d)
    return c + a + b / 2


def _tight_rate(d: int) -> Fraction:
    c, a, b, _ = _coefficients(d)
    return c + max(Fraction(0), a, b / 2)


def _threshold(rate, limit: int = 1000) -> int:
    for d in range(4, limit):
        if rate(d) < 0:
            return d
    raise RuntimeError("no threshold below limit")


def l2_exponent_report(d: int) -> L2Report:
    """Per-level exponent of the summed piece bounds, in exact arithmetic.

    Examples
    --------
    >>> r = l2_exponent_report(16)
    >>> r.exponent, r.summable, r.threshold
    (Fraction(-1, 6), True, 16)
    """
    if d < 4:
        raise ValueError("d must be >= 4")
    c, a, b, printed = _coefficients(d)
    e = c + a + b / 2
    t = _tight_rate(d)
    return L2Report(
        d, c, a, b, e, t, printed, e < 0, t < 0, _threshold(_paper_rate), _threshold(_tight_rate)
    )
