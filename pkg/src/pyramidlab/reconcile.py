"""Reconciliation of the printed reduced formulas against Monte Carlo.

The reduced formula as typeset differs from the correct one in four places.
Each is exposed as a named correction so their effect can be measured one at
a time; applying all four reproduces :func:`multiplier_reduced`.

``outer_2pi``
    the outer cosine is missing the factor 2 pi in its argument.
``b2_slot``
    the ``|xi| b2`` term is paired with ``sqrt(1-t^2)`` instead of
    ``t sqrt(1-s^2)``.
``inner_2pi``
    in the inner cosine 2 pi multiplies only the first of the three terms
    instead of the whole bracket.
``sign_branches``
    the inner average depends on the sign of ``x1 x2``; the printed single
    cosine-times-cosine product keeps only the positive branch.

Normalizing constants are not reconciled separately: every variant here is
normalized by the total weight, which makes the value at the origin 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .multiplier import (
    FrequencyTriple,
    MultiplierEstimate,
    _outer_grid,
    agreement,
    multiplier_hybrid,
    multiplier_mc,
    multiplier_reduced,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, nodes_for_frequency, weighted_rule
from .rotations import RngStream, reduce_frequencies
from .special import normalized_sphere_ft

__all__ = [
    "CORRECTIONS",
    "reduced_variant",
    "ReconciliationRow",
    "reconcile_points",
    "random_points",
]

CORRECTIONS = ("outer_2pi", "b2_slot", "inner_2pi", "sign_branches")
SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi


def _variant_inner(m_r, nc, ns, frame, d, spec, inner_2pi):
    r, c, w = weighted_rule(d - 3, spec)
    w = w / w.sum()
    nd, ne = frame.delta_norm, frame.eta_norm
    t1 = 0.5 * SQRT3 * nd * frame.a2 * m_r
    t2 = 0.5 * SQRT3 * nd * frame.a3 * nc
    t3 = ne * m_r / (2.0 * SQRT3)
    arg = TWO_PI * (t1 + t2 + t3) if inner_2pi else TWO_PI * t1 + t2 + t3
    beta2 = 0.5 * SQRT3 * nd * frame.a3 * ns
    gamma = math.sqrt(2.0 / 3.0) * ne * m_r
    vals = (
        np.cos(arg[..., None] * c)
        * normalized_sphere_ft(d - 3, beta2[..., None] * r)
        * normalized_sphere_ft(d - 3, gamma[..., None] * r)
    )
    return vals @ w


def reduced_variant(point, corrections=(), spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Reduced quadrature with only the named corrections applied.

    ``corrections=()`` is the formula as printed; ``corrections=CORRECTIONS``
    equals :func:`multiplier_reduced`.
    """
    unknown = set(corrections) - set(CORRECTIONS)
    if unknown:
        raise ValueError(f"unknown corrections {sorted(unknown)}")
    p = point if isinstance(point, FrequencyTriple) else FrequencyTriple(*point)
    d = p.d
    frame = reduce_frequencies(p.xi, p.delta, p.eta)
    spec = spec.with_nodes(nodes_for_frequency(p.norm, spec))
    x1, x2, rho, m_r, weight = _outer_grid(d, spec)
    nx = frame.xi_norm
    c1 = -nx * frame.b3 - 0.5 * frame.delta_norm * frame.a3
    c2 = 0.5 * frame.delta_norm * frame.a2 + 0.5 * frame.eta_norm
    transverse = normalized_sphere_ft(d - 3, nx * frame.b1 * rho)
    ns = rho / m_r
    signs = (1.0, -1.0) if "sign_branches" in corrections else (1.0,)
    total = 0.0
    for sg in signs:
        y2 = sg * x2
        b2_coord = y2 if "b2_slot" in corrections else x1
        arg = c1 * x1 + c2 * y2 + nx * frame.b2 * b2_coord
        if "outer_2pi" in corrections:
            arg = TWO_PI * arg
        inner = _variant_inner(
            m_r, sg * x1 * x2 / m_r, ns, frame, d, spec, "inner_2pi" in corrections
        )
        total += float(np.sum(np.cos(arg) * transverse * inner * weight))
    return total / len(signs)


@dataclass(frozen=True)
class ReconciliationRow:
    """One frequency point: the reference value and every variant."""

    point: tuple
    mc: MultiplierEstimate
    hybrid: MultiplierEstimate
    reduced: float
    variants: dict

    def reduced_agrees(self, n_sigma: float = 3.0) -> bool:
        est = MultiplierEstimate(self.reduced, 0.0, "reduced")
        return agreement(est, self.mc, n_sigma)

    def hybrid_agrees(self, n_sigma: float = 3.0) -> bool:
        return agreement(self.hybrid, self.mc, n_sigma)

    def variant_agrees(self, name: str, n_sigma: float = 3.0) -> bool:
        est = MultiplierEstimate(self.variants[name], 0.0, "variant")
        return agreement(est, self.mc, n_sigma)


def random_points(d: int, count: int, rng: RngStream, max_norm: float = 5.0, min_norm: float = 0.0):
    """``count`` frequency triples with Gaussian direction and norm uniform in range."""
    gen = rng.generator()
    out = []
    for _ in range(count):
        f = gen.standard_normal(3 * d)
        f *= gen.uniform(min_norm, max_norm) / np.linalg.norm(f)
        out.append(FrequencyTriple.from_flat(f, d))
    return out


def reconcile_points(
    points,
    n_mc: int = 100_000,
    n_hybrid: int = 100_000,
    spec: QuadratureSpec = DEFAULT_SPEC,
    rng: RngStream = RngStream(0),
    cumulative: bool = True,
    workers: int = 1,
) -> list[ReconciliationRow]:
    """Compare reduced, hybrid and printed variants with Monte Carlo at each point.

    Variants are keyed ``"printed"`` and, when ``cumulative``, by the last
    correction added in the order of :data:`CORRECTIONS`; otherwise each
    correction is applied alone.
    """
    rows = []
    for i, p in enumerate(points):
        mc = multiplier_mc(p, n=n_mc, rng=rng.substream(2 * i), workers=workers)
        hy = multiplier_hybrid(p, n=n_hybrid, spec=spec, rng=rng.substream(2 * i + 1), workers=workers)
        red = multiplier_reduced(p, spec=spec).value.real
        variants = {"printed": reduced_variant(p, (), spec)}
        for k, name in enumerate(CORRECTIONS):
            fixes = CORRECTIONS[: k + 1] if cumulative else (name,)
            variants[name] = reduced_variant(p, fixes, spec)
        rows.append(ReconciliationRow(tuple(p.flat()), mc, hy, red, variants))
    return rows
