"""The Fourier multiplier of the pyramid measure.

For frequencies ``(xi, delta, eta)`` in ``(R^d)^3``

    m(xi, delta, eta) = E_R exp(-2 pi i [xi.Ru + delta.Rv + eta.Rw])

with ``R`` Haar on SO(d) and ``(u, v, w)`` the canonical unit tetrahedron.
Three evaluation routes are provided:

* :func:`multiplier_mc` samples ``R`` directly (the unbiased reference);
* :func:`multiplier_hybrid` samples only the outer unit vector and integrates
  the inner variable by quadrature;
* :func:`multiplier_reduced` is fully deterministic: a tensor quadrature in
  ``(t, s, r)`` after reducing the frequencies to their :class:`ReducedFrame`.

Reduced form
------------
Write ``A1 = -|xi| b3 - |delta| a3 / 2``, ``A2 = |xi| b2 + |delta| a2 / 2 +
|eta| / 2`` and ``A3 = |xi| b1``.  For a unit vector ``x`` put
``M = sqrt(1 - x2^2)``, ``Nc = x1 x2 / M`` and ``Ns = sqrt(1 - x1^2 - x2^2) / M``
and define the inner average

    I(x) = E_r[ cos(2 pi beta1 sqrt(1 - r^2)) S(beta2 r) S(gamma r) ]

with ``beta1 = (sqrt3/2)|delta|(a2 M + a3 Nc) + |eta| M / (2 sqrt3)``,
``beta2 = (sqrt3/2)|delta| a3 Ns``, ``gamma = sqrt(2/3)|eta| M``, ``S`` the
normalized Fourier transform of S^(d-3), and ``r`` distributed with density
proportional to ``r^(d-3)/sqrt(1-r^2)``.  Then

    m = E_x[ exp(-2 pi i (A1 x1 + A2 x2 + A3 x3)) I(x) ]

over ``x`` uniform on S^(d-1).  ``I`` depends on the sign of ``x1 x2``
through ``Nc``; the two sign classes must be kept apart when the outer
exponential is folded into a cosine, which is what the ``"cosine"`` form of
:func:`multiplier_reduced` does.  The multiplier is real.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quadrature import DEFAULT_SPEC, QuadratureSpec, nodes_for_frequency, weighted_rule
from .rotations import (
    DegenerateFrame,
    ReducedFrame,
    RngStream,
    map_haar_blocks,
    reduce_frequencies,
)
from .manifold import CANONICAL_COEFFS
from .special import normalized_sphere_ft

__all__ = [
    "FrequencyTriple",
    "MultiplierEstimate",
    "InnerGeometry",
    "outer_coefficients",
    "inner_reduced",
    "multiplier_mc",
    "multiplier_hybrid",
    "multiplier_reduced",
    "multiplier",
    "agreement",
    "decay_bound",
    "DecayRow",
    "DecayScan",
    "decay_scan",
]

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi
# cap on (geometry points) x (radial nodes) per vectorized chunk
_CHUNK = 1 << 21


@dataclass(frozen=True)
class FrequencyTriple:
    """Frequencies ``(xi, delta, eta)``, each a vector in R^d."""

    xi: np.ndarray
    delta: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        vecs = [np.array(v, dtype=float).reshape(-1) for v in (self.xi, self.delta, self.eta)]
        if len({v.shape for v in vecs}) != 1:
            raise ValueError("xi, delta and eta must have the same length")
        for name, v in zip(("xi", "delta", "eta"), vecs):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} is not finite")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_flat(cls, values: Sequence[float], d: int) -> "FrequencyTriple":
        a = np.asarray(values, dtype=float).reshape(-1)
        if a.size != 3 * d:
            raise ValueError(f"expected {3 * d} numbers for d = {d}, got {a.size}")
        return cls(a[:d], a[d : 2 * d], a[2 * d :])

    @property
    def d(self) -> int:
        return int(self.xi.shape[0])

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.xi @ self.xi + self.delta @ self.delta + self.eta @ self.eta))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.xi, self.delta, self.eta])

    def scaled(self, lam: float) -> "FrequencyTriple":
        return FrequencyTriple(lam * self.xi, lam * self.delta, lam * self.eta)

    def rotated(self, q: np.ndarray) -> "FrequencyTriple":
        return FrequencyTriple(q @ self.xi, q @ self.delta, q @ self.eta)

    def negated(self) -> "FrequencyTriple":
        return self.scaled(-1.0)

    def is_origin(self) -> bool:
        return not (np.any(self.xi) or np.any(self.delta) or np.any(self.eta))


def _as_triple(point) -> FrequencyTriple:
    if isinstance(point, FrequencyTriple):
        return point
    xi, delta, eta = point
    return FrequencyTriple(xi, delta, eta)


@dataclass(frozen=True)
class MultiplierEstimate:
    """A value of the multiplier with its uncertainty.

    ``stderr`` is the combined Monte Carlo standard error (zero for the
    deterministic reduced route); ``stderr_re`` and ``stderr_im`` are the
    per-component errors.  ``quad_error`` holds a node-refinement error
    estimate when one was computed.
    """

    value: complex
    stderr: float
    method: str
    stderr_re: float = 0.0
    stderr_im: float = 0.0
    quad_error: float | None = None
    info: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class InnerGeometry:
    """Geometry of the inner integral at an outer unit vector ``x``.

    ``M_R = sqrt(1 - x2^2)``, ``N_R = sqrt(1 - x1^2)`` and ``cos_theta_prime``
    is the cosine of the angle between the two projected directions, taken as
    zero when ``M_R N_R`` vanishes.
    """

    M_R: float
    N_R: float
    cos_theta_prime: float

    @classmethod
    def from_unit_vector(cls, x) -> "InnerGeometry":
        x = np.asarray(x, dtype=float)
        m = math.sqrt(max(0.0, 1.0 - x[1] ** 2))
        n = math.sqrt(max(0.0, 1.0 - x[0] ** 2))
        c = 0.0 if m * n == 0.0 else float(np.clip(x[0] * x[1] / (m * n), -1.0, 1.0))
        return cls(m, n, c)


def outer_coefficients(frame: ReducedFrame) -> tuple[float, float, float]:
    """``(A1, A2, A3)`` pairing the outer unit vector with the frequencies."""
    a1 = -frame.xi_norm * frame.b3 - 0.5 * frame.delta_norm * frame.a3
    a2 = frame.xi_norm * frame.b2 + 0.5 * frame.delta_norm * frame.a2 + 0.5 * frame.eta_norm
    a3 = frame.xi_norm * frame.b1
    return a1, a2, a3


def _inner_arrays(m_r, nc, ns, frame: ReducedFrame, d: int, spec: QuadratureSpec):
    """Vectorized inner average over arrays of ``(M, Nc, Ns)`` of equal shape."""
    r, c, w = weighted_rule(d - 3, spec)
    w = w / w.sum()
    nd, ne = frame.delta_norm, frame.eta_norm
    beta1 = (0.5 * SQRT3 * nd) * (frame.a2 * m_r + frame.a3 * nc) + ne * m_r / (2.0 * SQRT3)
    beta2 = (0.5 * SQRT3 * nd * frame.a3) * ns
    gamma = math.sqrt(2.0 / 3.0) * ne * m_r
    flat = [np.ravel(a) for a in np.broadcast_arrays(beta1, beta2, gamma)]
    out = np.empty(flat[0].shape)
    step = max(1, _CHUNK // len(r))
    for lo in range(0, out.size, step):
        b1, b2, g = (a[lo : lo + step, None] for a in flat)
        vals = (
            np.cos(TWO_PI * b1 * c)
            * normalized_sphere_ft(d - 3, b2 * r)
            * normalized_sphere_ft(d - 3, g * r)
        )
        out[lo : lo + step] = vals @ w
    return out.reshape(np.broadcast(beta1, beta2, gamma).shape)


def inner_reduced(
    geometry: InnerGeometry,
    frame: ReducedFrame,
    d: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Inner radial average ``I`` at one geometry (see the module docstring)."""
    if d < 4:
        raise ValueError(f"the reduced form needs d >= 4, got {d}")
    g = geometry
    s = math.sqrt(max(0.0, 1.0 - g.cos_theta_prime**2))
    val = _inner_arrays(
        np.array(g.M_R), np.array(g.N_R * g.cos_theta_prime), np.array(g.N_R * s), frame, d, spec
    )
    return float(val)


def _component_stderr(x: np.ndarray) -> tuple[complex, float, float]:
    n = x.shape[0]
    return (
        complex(x.mean()),
        float(x.real.std(ddof=1) / math.sqrt(n)),
        float(x.imag.std(ddof=1) / math.sqrt(n)),
    )


def _mc_estimate(samples: np.ndarray, method: str, **info) -> MultiplierEstimate:
    if not np.all(np.isfinite(samples)):
        raise FloatingPointError("non-finite Monte Carlo sample")
    mean, se_re, se_im = _component_stderr(samples)
    return MultiplierEstimate(mean, math.hypot(se_re, se_im), method, se_re, se_im, info=info)


def multiplier_mc(
    point,
    n: int = 100_000,
    rng: RngStream = RngStream(0),
    workers: int = 1,
) -> MultiplierEstimate:
    """Direct Monte Carlo over Haar rotations.

    Valid for every frequency, including degenerate frames.  The result is a
    deterministic function of ``(point, n, rng)``; ``workers`` only changes the
    wall time.
    """
    p = _as_triple(point)
    if p.d < 3:
        raise ValueError(f"need d >= 3, got {p.d}")
    if n < 2:
        raise ValueError("need at least two samples")
    freq = np.stack([p.xi, p.delta, p.eta])  # (3, d)

    def block(rot):
        # phase = sum_j F_j . R c_j, with c_j the canonical vertices
        verts = rot[:, :, :3] @ CANONICAL_COEFFS.T  # (b, d, 3)
        phase = np.einsum("jd,bdj->b", freq, verts)
        return np.exp(-1j * TWO_PI * phase)

    samples = np.concatenate(map_haar_blocks(p.d, n, rng, block, workers=workers))
    return _mc_estimate(samples, "mc", n=n)


def multiplier_hybrid(
    point,
    n: int = 100_000,
    spec: QuadratureSpec = DEFAULT_SPEC,
    rng: RngStream = RngStream(0),
    workers: int = 1,
) -> MultiplierEstimate:
    """Monte Carlo over the outer unit vector with the inner average by quadrature.

    The outer vector is ``R e1`` for Haar ``R``, i.e. uniform on S^(d-1).

    Raises
    ------
    DegenerateFrame
        When the frequencies have no reduced frame (the origin excepted).
    ValueError
        When ``|(xi, delta, eta)|`` exceeds the quadrature budget.
    """
    p = _as_triple(point)
    d = p.d
    if d < 4:
        raise ValueError(f"the hybrid route needs d >= 4, got {d}")
    frame = _ORIGIN_FRAME if p.is_origin() else reduce_frequencies(p.xi, p.delta, p.eta)
    spec = spec.with_nodes(nodes_for_frequency(p.norm, spec))
    a1, a2, a3 = outer_coefficients(frame)

    def block(rot):
        x = rot[:, :3, 0]
        x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
        m_r = np.sqrt(np.maximum(0.0, 1.0 - x2 * x2))
        rest = np.sqrt(np.maximum(0.0, 1.0 - x1 * x1 - x2 * x2))
        safe = np.where(m_r > 0, m_r, 1.0)
        nc = np.where(m_r > 0, x1 * x2 / safe, 0.0)
        ns = np.where(m_r > 0, rest / safe, 0.0)
        inner = _inner_arrays(m_r, nc, ns, frame, d, spec)
        return np.exp(-1j * TWO_PI * (a1 * x1 + a2 * x2 + a3 * x3)) * inner

    samples = np.concatenate(map_haar_blocks(d, n, rng, block, workers=workers))
    return _mc_estimate(samples, "hybrid", n=n, nodes=spec.nodes_per_axis)


def _outer_grid(d: int, spec: QuadratureSpec):
    """Outer nodes: ``x1 = sqrt(1-t^2)``, ``|x2| = t sqrt(1-s^2)``, ``rho = t s``."""
    t, ct, wt = weighted_rule(d - 2, spec)
    s, cs, ws = weighted_rule(d - 3, spec)
    t, ct = t[:, None], ct[:, None]
    s, cs = s[None, :], cs[None, :]
    x1 = np.broadcast_to(ct, (t.size, s.size))
    x2 = t * cs
    rho = t * s
    # 1 - x2^2 = (1 - t^2) + t^2 s^2, written without cancellation
    m_r = np.sqrt(ct * ct + rho * rho)
    weight = np.outer(wt, ws) / (wt.sum() * ws.sum())
    return x1, x2, rho, m_r, weight


def _reduced_value(frame: ReducedFrame, d: int, spec: QuadratureSpec, form: str) -> complex:
    a1, a2, a3 = outer_coefficients(frame)
    x1, x2, rho, m_r, weight = _outer_grid(d, spec)
    transverse = normalized_sphere_ft(d - 3, a3 * rho)
    ns = rho / m_r
    inner = {
        sg: _inner_arrays(m_r, sg * x1 * x2 / m_r, ns, frame, d, spec) for sg in (1.0, -1.0)
    }
    if form == "cosine":
        total = 0.0
        for sg in (1.0, -1.0):
            outer = np.cos(TWO_PI * (a1 * x1 + sg * a2 * x2)) * transverse
            total += float(np.sum(outer * inner[sg] * weight))
        return complex(0.5 * total)
    if form == "exponential":
        total = 0.0 + 0.0j
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                phase = np.exp(-1j * TWO_PI * (a1 * s1 * x1 + a2 * s2 * x2))
                total += complex(np.sum(phase * transverse * inner[s1 * s2] * weight))
        return 0.25 * total
    raise ValueError(f"unknown form {form!r}; use 'cosine' or 'exponential'")


# frame used for the exact origin, where every frequency vanishes
_ORIGIN_FRAME = ReducedFrame(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0)


def multiplier_reduced(
    point,
    spec: QuadratureSpec = DEFAULT_SPEC,
    form: str = "cosine",
    tol: float | None = None,
) -> MultiplierEstimate:
    """Deterministic tensor quadrature of the reduced form.

    Parameters
    ----------
    point : FrequencyTriple or (xi, delta, eta)
    spec : QuadratureSpec
        Base rule; the per-axis node count is raised with the frequency size
        (see :func:`~pyramidlab.quadrature.nodes_for_frequency`).
    form : {"cosine", "exponential"}
        Two-branch cosine form or the four-sign exponential form.
    tol : float, optional
        If given, the node count is doubled until two successive values agree
        to ``tol`` (at most three doublings); the last difference is reported
        as ``quad_error``.

    Raises
    ------
    DegenerateFrame
        For a degenerate frame other than the exact origin.
    ValueError
        When ``|(xi, delta, eta)|`` exceeds the quadrature budget.
    """
    p = _as_triple(point)
    d = p.d
    if d < 4:
        raise ValueError(f"the reduced form needs d >= 4, got {d}")
    frame = _ORIGIN_FRAME if p.is_origin() else reduce_frequencies(p.xi, p.delta, p.eta)
    n = nodes_for_frequency(p.norm, spec)
    cur = spec.with_nodes(n)
    value = _reduced_value(frame, d, cur, form)
    err = None
    if tol is not None:
        for _ in range(3):
            cur = cur.with_nodes(2 * cur.nodes_per_axis)
            nxt = _reduced_value(frame, d, cur, form)
            err = abs(nxt - value)
            value = nxt
            if err <= tol:
                break
    return MultiplierEstimate(
        value, 0.0, "reduced", quad_error=err, info={"nodes": cur.nodes_per_axis, "form": form}
    )


def multiplier(point, method: str = "reduced", **kwargs) -> MultiplierEstimate:
    """Dispatch to ``"mc"``, ``"hybrid"`` or ``"reduced"``."""
    funcs = {"mc": multiplier_mc, "hybrid": multiplier_hybrid, "reduced": multiplier_reduced}
    if method not in funcs:
        raise ValueError(f"unknown method {method!r}")
    return funcs[method](point, **kwargs)


def agreement(a: MultiplierEstimate, b: MultiplierEstimate, n_sigma: float = 3.0) -> bool:
    """True when real and imaginary parts each agree within ``n_sigma`` combined errors.

    For two deterministic values the combined error is zero and exact
    equality is required, so compare those with a tolerance instead.
    """
    se_re = math.hypot(a.stderr_re, b.stderr_re)
    se_im = math.hypot(a.stderr_im, b.stderr_im)
    d = a.value - b.value
    return abs(d.real) <= n_sigma * se_re and abs(d.imag) <= n_sigma * se_im


def _angle_factors(p: FrequencyTriple) -> tuple[float, float]:
    """``(min(|delta|,|eta|) |sin theta|, |xi| |b1|)`` with ``nan`` where undefined."""
    nd, ne = float(np.linalg.norm(p.delta)), float(np.linalg.norm(p.eta))
    try:
        f = reduce_frequencies(p.xi, p.delta, p.eta)
    except DegenerateFrame:
        if nd > 0 and ne > 0:
            cos = float(p.delta @ p.eta) / (nd * ne)
            sin = math.sqrt(max(0.0, 1.0 - cos * cos))
            return min(nd, ne) * sin, math.nan
        return math.nan, math.nan
    return min(nd, ne) * f.a3, f.xi_norm * f.b1


def decay_bound(point) -> float:
    """Model decay bound ``(1 + min(|delta|,|eta|) |sin theta|)^(-(d-3)/2)
    (1 + |xi| |b1|)^(-(d-3)/2)``.

    ``theta`` is the angle between delta and eta and ``b1`` the normalized
    component of xi orthogonal to span(delta, eta).  A factor whose angle is
    undefined (degenerate frame) is replaced by 1.
    """
    p = _as_triple(point)
    e = -(p.d - 3) / 2.0
    f1, f2 = _angle_factors(p)
    out = 1.0
    for f in (f1, f2):
        if not math.isnan(f):
            out *= (1.0 + f) ** e
    return out


@dataclass(frozen=True)
class DecayRow:
    scale: float
    value: float
    error: float
    bound: float
    usable: bool

    @property
    def ratio(self) -> float:
        return self.value / self.bound


@dataclass(frozen=True)
class DecayScan:
    """Result of :func:`decay_scan`.

    ``constant`` is the largest ``|m| / bound`` over usable rows, ``slope``
    the least-squares slope of ``log|m|`` against ``log(scale)`` over usable
    rows, and ``truncated`` is set when some rows fell below the noise floor.
    """

    d: int
    rows: tuple[DecayRow, ...]
    constant: float
    slope: float
    truncated: bool
    method: str
    wall_time: float

    @property
    def slope_limit(self) -> float:
        return -(self.d - 3) / 2.0 + 0.5


def decay_scan(
    direction,
    scales: Sequence[float] = (1, 2, 4, 8, 16, 32, 64),
    method: str = "reduced",
    spec: QuadratureSpec = DEFAULT_SPEC,
    n: int = 100_000,
    rng: RngStream = RngStream(0),
    workers: int = 1,
) -> DecayScan:
    """Evaluate ``|m(lambda F)|`` along a ray and compare with :func:`decay_bound`.

    For the reduced method the error of each row is the change against a
    quadrature with three quarters of the nodes; for Monte Carlo it is the
    combined standard error.  Rows with ``|m| <= 3 * error`` are not usable.

    Raises
    ------
    DegenerateFrame
        If the direction is not generic.
    """
    t0 = time.perf_counter()
    p = _as_triple(direction)
    reduce_frequencies(p.xi, p.delta, p.eta)
    rows = []
    for i, lam in enumerate(scales):
        q = p.scaled(float(lam))
        if method == "reduced":
            base = nodes_for_frequency(q.norm, spec)
            hi = _reduced_value(reduce_frequencies(q.xi, q.delta, q.eta), q.d, spec.with_nodes(base), "cosine")
            lo = _reduced_value(
                reduce_frequencies(q.xi, q.delta, q.eta), q.d,
                spec.with_nodes(max(8, (3 * base) // 4)), "cosine",
            )
            val, err = abs(hi), abs(hi - lo) + 1e-15
        elif method in ("mc", "hybrid"):
            sub = rng.substream(i)
            est = (
                multiplier_mc(q, n=n, rng=sub, workers=workers)
                if method == "mc"
                else multiplier_hybrid(q, n=n, spec=spec, rng=sub, workers=workers)
            )
            val, err = abs(est.value), est.stderr
        else:
            raise ValueError(f"unknown method {method!r}")
        rows.append(DecayRow(float(lam), val, err, decay_bound(q), val > 3.0 * err))
    good = [r for r in rows if r.usable]
    constant = max((r.ratio for r in good), default=math.nan)
    if len(good) >= 2:
        slope = float(np.polyfit(np.log([r.scale for r in good]), np.log([r.value for r in good]), 1)[0])
    else:
        slope = math.nan
    return DecayScan(
        p.d, tuple(rows), constant, slope, len(good) < len(rows), method, time.perf_counter() - t0
    )
