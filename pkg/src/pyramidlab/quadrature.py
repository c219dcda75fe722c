"""Quadrature for the radial weights r^k / sqrt(1 - r^2) on [0, 1] and on the cube.

With ``endpoint_substitution`` the variable ``r = sin(phi)`` turns the weight
into ``sin(phi)^k dphi`` on ``[0, pi/2]``, which is smooth, so Gauss-Legendre
converges spectrally.  The tanh-sinh rule is offered as an alternative that
copes with the endpoint singularity directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .rotations import RngStream, mean_stderr

__all__ = [
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "weighted_rule",
    "integrate_weighted_01",
    "integrate_cube3",
    "nodes_for_frequency",
    "slicing_check",
    "sample_sphere",
    "MAX_FREQUENCY",
]

# beyond this |(xi, delta, eta)| the reduced path refuses
MAX_FREQUENCY = 1e3


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_axis: int = 64
    rule: str = "gauss_legendre"
    endpoint_substitution: bool = True

    def __post_init__(self):
        if self.nodes_per_axis < 8:
            raise ValueError("nodes_per_axis must be >= 8")
        if self.rule not in ("gauss_legendre", "tanh_sinh"):
            raise ValueError(f"unknown rule {self.rule!r}")

    def with_nodes(self, n: int) -> "QuadratureSpec":
        return QuadratureSpec(n, self.rule, self.endpoint_substitution)


DEFAULT_SPEC = QuadratureSpec()


def nodes_for_frequency(norm: float, spec: QuadratureSpec = DEFAULT_SPEC) -> int:
    """Per-axis node count for an integrand oscillating at frequency ``norm``.

    Grows linearly once ``norm`` exceeds 10; raises past ``MAX_FREQUENCY``.
    """
    if not math.isfinite(norm) or norm > MAX_FREQUENCY:
        raise ValueError(
            f"|(xi, delta, eta)| = {norm:g} exceeds the quadrature budget "
            f"{MAX_FREQUENCY:g}; use the Monte Carlo path"
        )
    if norm <= 10:
        return spec.nodes_per_axis
    return max(spec.nodes_per_axis, int(math.ceil(4.0 * norm + 32)))


@lru_cache(maxsize=64)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=64)
def _tanh_sinh_01(n: int, reach: float = 3.2):
    """Nodes r, complements 1 - r and weights for int_0^1 g(r) dr.

    ``reach`` is the half-width of the step grid; integrands with an endpoint
    singularity need a wider reach so the neglected tail stays negligible.
    """
    half = max(n // 2, 4)
    h = reach / half
    k = np.arange(-half, half + 1) * h
    u = 0.5 * math.pi * np.sinh(k)
    # r = (1 + tanh u)/2 and 1 - r = 1/(1 + e^{2u}) computed without cancellation
    with np.errstate(over="ignore"):
        one_minus = 1.0 / (1.0 + np.exp(2.0 * u))
        r = 1.0 / (1.0 + np.exp(-2.0 * u))
        w = h * 0.5 * math.pi * np.cosh(k) / (2.0 * np.cosh(u) ** 2)
    keep = (r > 0) & (one_minus > 0) & (w > 0)
    return r[keep], one_minus[keep], w[keep]


@lru_cache(maxsize=256)
def weighted_rule(power: int, spec: QuadratureSpec = DEFAULT_SPEC):
    """Nodes and weights for ``int_0^1 g(r) r^power / sqrt(1 - r^2) dr``.

    Returns ``(r, sqrt(1 - r^2), weights)``; the middle array is computed
    accurately near ``r = 1`` and is exposed because the integrands need it.
    """
    n = spec.nodes_per_axis
    if spec.rule == "gauss_legendre" and spec.endpoint_substitution:
        x, w = _gauss_legendre(n)
        phi = (x + 1.0) * (math.pi / 4.0)
        r = np.sin(phi)
        c = np.cos(phi)
        wt = w * (math.pi / 4.0) * r**power
    elif spec.rule == "gauss_legendre":
        x, w = _gauss_legendre(n)
        r = 0.5 * (x + 1.0)
        c = np.sqrt((1.0 - r) * (1.0 + r))
        wt = 0.5 * w * r**power / c
    else:
        t, one_minus, w = _tanh_sinh_01(n, 3.2 if spec.endpoint_substitution else 6.5)
        if spec.endpoint_substitution:
            phi = t * (math.pi / 2.0)
            r = np.sin(phi)
            c = np.sin(one_minus * (math.pi / 2.0))
            wt = w * (math.pi / 2.0) * r**power
        else:
            r = t
            c = np.sqrt(one_minus * (1.0 + r))
            wt = w * r**power / c
    for a in (r, c, wt):
        a.setflags(write=False)
    return r, c, wt


def _check_d(d):
    if d < 4:
        raise ValueError(f"radial weights are used with d >= 4, got {d}")


def integrate_weighted_01(f: Callable, d: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``int_0^1 f(r) r^(d-3) (1 - r^2)^(-1/2) dr``; ``f`` is vectorized over r."""
    _check_d(d)
    r, _, w = weighted_rule(d - 3, spec)
    vals = np.broadcast_to(np.asarray(f(r), dtype=float), r.shape)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand not finite at a quadrature node")
    return float(vals @ w)


def integrate_cube3(f: Callable, d: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Tensor rule for the weighted cube.

    Integrates ``f(r, s, t)`` against ``r^(d-3) s^(d-3) t^(d-2)`` divided by
    ``sqrt((1-r^2)(1-s^2)(1-t^2))``.  ``f`` receives broadcastable arrays of
    shapes ``(n,1,1)``, ``(1,n,1)``, ``(1,1,n)`` for ``r, s, t``.
    """
    _check_d(d)
    r, _, wr = weighted_rule(d - 3, spec)
    s, _, ws = weighted_rule(d - 3, spec)
    t, _, wt = weighted_rule(d - 2, spec)
    vals = np.asarray(f(r[:, None, None], s[None, :, None], t[None, None, :]), dtype=float)
    vals = np.broadcast_to(vals, (len(r), len(s), len(t)))
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand not finite at a quadrature node")
    return float(np.einsum("ijk,i,j,k->", vals, wr, ws, wt))


def sample_sphere(dim: int, n: int, rng) -> np.ndarray:
    """Uniform points on the unit sphere of R^dim, shape ``(n, dim)``."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    x = gen.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _sample_weight(power: int, n: int, gen) -> np.ndarray:
    """Draw r in [0,1] with density proportional to r^power / sqrt(1 - r^2).

    That is the law of |y| for y the last ``power + 1`` coordinates of a
    uniform point on S^(power+1).
    """
    x = gen.standard_normal((n, power + 2))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return np.linalg.norm(x[:, 1:], axis=1)


def slicing_check(
    d: int,
    f: Callable[[np.ndarray], np.ndarray],
    n_mc: int,
    rng: RngStream,
) -> dict:
    """Spherical average of ``f`` over S^(d-1): direct MC versus twice-sliced form.

    The sliced estimate draws ``t`` and ``s`` from their radial weights
    ``t^(d-2)/sqrt(1-t^2)`` and ``s^(d-3)/sqrt(1-s^2)``, both signs with equal
    probability, and ``z`` uniform on S^(d-3), then evaluates ``f`` at
    ``(+-sqrt(1-t^2), +-t sqrt(1-s^2), t s z)``.
    """
    _check_d(d)
    gen_direct = rng.substream(0).generator()
    gen_sliced = rng.substream(1).generator()
    direct = np.asarray(f(sample_sphere(d, n_mc, gen_direct)))

    t = _sample_weight(d - 2, n_mc, gen_sliced)
    s = _sample_weight(d - 3, n_mc, gen_sliced)
    sg = gen_sliced.choice([-1.0, 1.0], size=(n_mc, 2))
    z = sample_sphere(d - 2, n_mc, gen_sliced)
    pts = np.empty((n_mc, d))
    pts[:, 0] = sg[:, 0] * np.sqrt(1.0 - t * t)
    pts[:, 1] = sg[:, 1] * t * np.sqrt(1.0 - s * s)
    pts[:, 2:] = (t * s)[:, None] * z
    sliced = np.asarray(f(pts))
    (v1, s1), (v2, s2) = mean_stderr(direct), mean_stderr(sliced)
    return {"direct": v1, "direct_stderr": s1, "sliced": v2, "sliced_stderr": s2}
