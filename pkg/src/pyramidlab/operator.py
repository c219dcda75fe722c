"""The pyramid operator and the triangle operator on concrete test functions.

    T(f, g, h)(x) = E_R f(x - Ru) g(x - Rv) h(x - Rw)
    Delta(f, g)(x) = E_R f(x - Re1) g(x - R(e1/2 + (sqrt3/2) e2))

with ``R`` Haar on SO(d) and ``(u, v, w)`` the canonical tetrahedron.  Both
are Monte Carlo averages.  Passing ``rotations=`` evaluates against a fixed,
shared batch (common random numbers), which turns linearity and translation
identities into exact statements about one finite average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .manifold import CANONICAL_COEFFS
from .region import ExponentPoint, r_exponent
from .rotations import RngStream, mean_stderr, sample_haar

__all__ = [
    "TestFunction",
    "Combination",
    "NormEstimate",
    "shared_rotations",
    "apply_pyramid",
    "apply_triangle",
    "pyramid_gaussian_reference",
    "sphere_average_gaussian",
    "GridSpec",
    "NormRatio",
    "norm_ratio",
    "norm_ratio_scan",
]

KINDS = ("gaussian", "ball_indicator", "product_decay")


@dataclass(frozen=True)
class NormEstimate:
    p: Fraction | float
    value: float
    method: str


def _ball_volume(d: int, r: float) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)) * r**d


@dataclass(frozen=True)
class TestFunction:
    """Bounded test function on R^d with closed-form L^p norms.

    ``gaussian``
        ``exp(-|x - c|^2 / scale^2)``.
    ``ball_indicator``
        indicator of the closed ball of radius ``scale`` about ``c``.
    ``product_decay``
        ``prod_i (1 + (x_i - c_i)^2)^(-exponent)``.

    All three have sup norm 1.
    """

    __test__ = False  # keep pytest from collecting it by name

    kind: str
    dim: int
    scale: float = 1.0
    center: tuple = field(default=None)
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; choose from {KINDS}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        c = np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)
        if c.shape != (self.dim,):
            raise ValueError("center has the wrong dimension")
        object.__setattr__(self, "center", tuple(float(v) for v in c))

    @classmethod
    def gaussian(cls, dim, width=1.0, center=None):
        return cls("gaussian", dim, width, center)

    @classmethod
    def ball(cls, dim, radius=1.0, center=None):
        return cls("ball_indicator", dim, radius, center)

    @classmethod
    def product_decay(cls, dim, exponent=1.0, center=None):
        return cls("product_decay", dim, 1.0, center, exponent)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float) - np.asarray(self.center)
        if self.kind == "gaussian":
            return np.exp(-np.sum(y * y, axis=-1) / self.scale**2)
        if self.kind == "ball_indicator":
            return (np.sum(y * y, axis=-1) <= self.scale**2).astype(float)
        return np.prod(1.0 + y * y, axis=-1) ** (-self.exponent)

    @property
    def is_radial(self) -> bool:
        return self.kind != "product_decay" and not any(self.center)

    def sup_norm(self) -> float:
        return 1.0

    def lp_norm(self, p) -> NormEstimate:
        """Closed-form ``||f||_p``; ``p = inf`` (or ``1/p = 0``) gives the sup norm."""
        p = float(p)
        if math.isinf(p):
            return NormEstimate(p, 1.0, "closed_form")
        if p <= 0:
            raise ValueError("p must be positive")
        d = self.dim
        if self.kind == "gaussian":
            val = (math.pi * self.scale**2 / p) ** (d / (2 * p))
        elif self.kind == "ball_indicator":
            val = _ball_volume(d, self.scale) ** (1 / p)
        else:
            ap = self.exponent * p
            if ap <= 0.5:
                raise ValueError("product_decay is not in L^p for exponent * p <= 1/2")
            one_dim = math.exp(0.5 * math.log(math.pi) + gammaln(ap - 0.5) - gammaln(ap))
            val = one_dim ** (d / p)
        return NormEstimate(p, val, "closed_form")

    def translated(self, y) -> "TestFunction":
        """``x -> f(x - y)``."""
        return replace(self, center=tuple(np.asarray(self.center) + np.asarray(y, dtype=float)))

    def rescaled(self, lam: float) -> "TestFunction":
        """``x -> f(lam x)`` (gaussians and balls only)."""
        if self.kind == "product_decay":
            raise ValueError("product_decay is not closed under rescaling")
        return replace(self, scale=self.scale / lam, center=tuple(np.asarray(self.center) / lam))


@dataclass(frozen=True)
class Combination:
    """Finite linear combination ``sum_k a_k f_k`` of callables."""

    terms: tuple[tuple[float, Callable], ...]

    def __call__(self, x):
        return sum(a * f(x) for a, f in self.terms)

    def sup_norm(self) -> float:
        return sum(abs(a) * f.sup_norm() for a, f in self.terms)


def shared_rotations(d: int, n: int, rng: RngStream) -> np.ndarray:
    """One batch of Haar rotations for common-random-numbers evaluation."""
    rot = sample_haar(d, rng, size=n)
    rot.setflags(write=False)
    return rot


def _verts(rotations: np.ndarray) -> np.ndarray:
    """``(n, 3, d)``: rows ``Ru, Rv, Rw``."""
    return np.einsum("ndk,jk->njd", rotations[:, :, :3], CANONICAL_COEFFS)


def _batch(d, n, rng, rotations):
    if rotations is not None:
        if rotations.ndim != 3 or rotations.shape[1:] != (d, d):
            raise ValueError("rotations must have shape (n, d, d)")
        return rotations
    if rng is None:
        raise ValueError("pass either rng or rotations")
    return sample_haar(d, rng, size=n)


def _evaluate(fs, offsets, x):
    x = np.asarray(x, dtype=float)
    vals = 1.0
    for f, off in zip(fs, offsets):
        vals = vals * f(x[..., None, :] - off)
    return vals


def apply_pyramid(f, g, h, x, n: int = 100_000, rng: RngStream | None = None,
                  rotations: np.ndarray | None = None):
    """Monte Carlo ``T(f, g, h)(x)``; returns ``(value, stderr)``.

    ``x`` may be one point ``(d,)`` or several ``(m, d)``; in the latter case
    both outputs are arrays of length ``m``.  All points share one rotation
    batch.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if d < 4:
        raise ValueError("the pyramid operator needs d >= 4")
    vt = _verts(_batch(d, n, rng, rotations))
    return _mean(lambda pt: _evaluate((f, g, h), (vt[:, 0], vt[:, 1], vt[:, 2]), pt), x)


def apply_triangle(f, g, x, n: int = 100_000, rng: RngStream | None = None,
                   rotations: np.ndarray | None = None):
    """Monte Carlo ``Delta(f, g)(x)``; same conventions as :func:`apply_pyramid`."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if d < 3:
        raise ValueError("the triangle operator needs d >= 3")
    vt = _verts(_batch(d, n, rng, rotations))
    return _mean(lambda pt: _evaluate((f, g), (vt[:, 0], vt[:, 1]), pt), x)


def _mean(fn, x):
    if x.ndim == 1:
        return mean_stderr(fn(x))
    out = [mean_stderr(fn(pt)) for pt in x]
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def _sphere_exp_average(a, d: int, nodes: int = 64) -> np.ndarray:
    """``E exp(a omega_1)`` for ``omega`` uniform on S^(d-1), by Gauss-Jacobi."""
    alpha = 0.5 * (d - 3)
    t, w = roots_jacobi(nodes, alpha, alpha)
    w = w / w.sum()
    a = np.asarray(a, dtype=float)
    return np.exp(np.multiply.outer(a, t)) @ w


def pyramid_gaussian_reference(x, width: float, d: int) -> float:
    """``T(g, g, g)(x)`` for the centred gaussian ``g`` of the given width.

    Expanding the squares, the exponent depends on ``R`` only through
    ``x . R(u + v + w)`` and ``|u + v + w| = sqrt 6``; the remaining spherical
    average is one-dimensional.
    """
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    a = 2.0 * math.sqrt(6.0) * math.sqrt(r2) / width**2
    return float(math.exp(-3.0 * (r2 + 1.0) / width**2) * _sphere_exp_average(a, d))


def sphere_average_gaussian(x, width: float, d: int) -> float:
    """Average of the centred gaussian over the unit sphere about ``x``."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    a = 2.0 * math.sqrt(r2) / width**2
    return float(math.exp(-(r2 + 1.0) / width**2) * _sphere_exp_average(a, d))


# --------------------------------------------------------------------------
# norm ratios


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid for ``||T(f,g,h)||_r``.

    ``radial`` samples ``|x|`` in ``[0, radius]`` along one axis (valid when
    ``T(f,g,h)`` is radial); ``cartesian`` uses a cube ``[-radius, radius]^d``
    with ``points`` nodes per axis (midpoint rule).
    """

    radius: float = 6.0
    points: int = 48
    mode: str = "radial"

    def refined(self) -> "GridSpec":
        return replace(self, points=2 * self.points)


@dataclass(frozen=True)
class NormRatio:
    inv_r: Fraction
    t_norm: float
    denominator: float
    grid: GridSpec

    @property
    def ratio(self) -> float:
        return self.t_norm / self.denominator


def _inv(x) -> float:
    return float(x)


def _p_norm(f, inv_p) -> float:
    if inv_p == 0:
        return f.sup_norm()
    return f.lp_norm(1 / _inv(inv_p)).value


def norm_ratio(f, g, h, point: ExponentPoint, grid: GridSpec, rotations: np.ndarray) -> NormRatio:
    """``||T(f,g,h)||_r / (||f||_p ||g||_q ||h||_s)`` on one grid.

    For ``r < 1`` the L^r "norm" is the quasi-norm ``(int |T|^r)^(1/r)``.
    """
    d = rotations.shape[1]
    inv_r = r_exponent(point)
    if inv_r == 0:
        raise ValueError("r = infinity is not supported by the grid estimate")
    r = 1.0 / float(inv_r)
    if grid.mode == "radial":
        if not all(getattr(fn, "is_radial", False) for fn in (f, g, h)):
            raise ValueError("radial grid needs centred radial test functions")
        # Gauss-Legendre in |x| on [0, radius]
        t, w = np.polynomial.legendre.leggauss(grid.points)
        rho = 0.5 * grid.radius * (t + 1.0)
        wt = 0.5 * grid.radius * w
        pts = np.zeros((grid.points, d))
        pts[:, 0] = rho
        vals, _ = apply_pyramid(f, g, h, pts, rotations=rotations)
        area = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
        integral = area * float(np.sum(np.abs(vals) ** r * rho ** (d - 1) * wt))
    elif grid.mode == "cartesian":
        h_ = 2.0 * grid.radius / grid.points
        axis = -grid.radius + h_ * (np.arange(grid.points) + 0.5)
        mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        vals, _ = apply_pyramid(f, g, h, mesh, rotations=rotations)
        integral = float(np.sum(np.abs(vals) ** r)) * h_**d
    else:
        raise ValueError(f"unknown grid mode {grid.mode!r}")
    t_norm = integral ** (1.0 / r)
    denom = _p_norm(f, point.inv_p) * _p_norm(g, point.inv_q) * _p_norm(h, point.inv_s)
    return NormRatio(inv_r, t_norm, denom, grid)


def norm_ratio_scan(
    f,
    g,
    h,
    point: ExponentPoint,
    grid: GridSpec = GridSpec(),
    n: int = 20_000,
    rng: RngStream = RngStream(0),
    scales: Sequence[float] = (0.5, 1.0, 2.0),
) -> dict:
    """Stability probe of the norm ratio under grid refinement and rescaling.

    Each rescaling ``f(.) -> f(lam .)`` is applied to all three functions, and
    the grid radius is divided by ``lam`` with it.  Returns a dict with the base
    ratio, the refined-grid ratio, the ratio per scale and the verdict
    ``stable`` (every value within a factor 2 of the base).
    """
    d = f.dim
    rot = shared_rotations(d, n, rng)
    base = norm_ratio(f, g, h, point, grid, rot)
    fine = norm_ratio(f, g, h, point, grid.refined(), rot)
    per_scale = {}
    for lam in scales:
        fs = [fn.rescaled(lam) if isinstance(fn, TestFunction) else fn for fn in (f, g, h)]
        gr = replace(grid, radius=grid.radius / lam)
        per_scale[float(lam)] = norm_ratio(*fs, point, gr, rot).ratio
    values = [fine.ratio] + list(per_scale.values())
    finite = all(math.isfinite(v) and v > 0 for v in [base.ratio] + values)
    stable = finite and all(0.5 <= v / base.ratio <= 2.0 for v in values)
    return {
        "point": str(point),
        "inv_r": str(base.inv_r),
        "ratio": base.ratio,
        "t_norm": base.t_norm,
        "denominator": base.denominator,
        "refined_ratio": fine.ratio,
        "refinement_change": abs(fine.ratio / base.ratio - 1.0),
        "scale_ratios": per_scale,
        "stable": stable,
        "refinement_unstable": not (0.5 <= fine.ratio / base.ratio <= 2.0),
    }
