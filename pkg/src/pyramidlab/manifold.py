"""The manifold of unit regular tetrahedra with one vertex at the origin.

A point of the manifold is a triple ``(u, v, w)`` of unit vectors with
pairwise distances 1.  Every such triple is ``R`` applied to the canonical
triple for some rotation ``R``, and the surface measure is the pushforward of
Haar measure, normalized here to total mass 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rotations import RngStream, haar_batches, mean_stderr, sample_haar

__all__ = [
    "PyramidVertices",
    "CANONICAL_COEFFS",
    "canonical_vertices",
    "sample_manifold",
    "vertices_from_rotations",
    "surface_integral_mc",
    "NonFiniteSample",
]

SQRT3 = np.sqrt(3.0)

# rows: coordinates of u, v, w in (e1, e2, e3)
CANONICAL_COEFFS = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.5, SQRT3 / 2.0, 0.0],
        [0.5, 1.0 / (2.0 * SQRT3), np.sqrt(2.0 / 3.0)],
    ]
)


@dataclass(frozen=True)
class PyramidVertices:
    """Vertices ``u, v, w``; arrays of shape ``(d,)`` or ``(n, d)``."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def max_defect(self) -> float:
        """Largest violation of the six unit-length / unit-distance constraints."""
        u, v, w = self.u, self.v, self.w
        terms = [
            np.linalg.norm(u, axis=-1),
            np.linalg.norm(v, axis=-1),
            np.linalg.norm(w, axis=-1),
            np.linalg.norm(u - v, axis=-1),
            np.linalg.norm(v - w, axis=-1),
            np.linalg.norm(w - u, axis=-1),
        ]
        return float(max(np.max(np.abs(t - 1.0)) for t in terms))


def canonical_vertices(d: int) -> PyramidVertices:
    """The triple ``(e1, e1/2 + (sqrt3/2) e2, e1/2 + e2/(2 sqrt3) + sqrt(2/3) e3)``."""
    if d < 3:
        raise ValueError(f"a regular tetrahedron needs d >= 3, got {d}")
    x = np.zeros((3, d))
    x[:, :3] = CANONICAL_COEFFS
    return PyramidVertices(x[0], x[1], x[2])


def vertices_from_rotations(rot: np.ndarray) -> PyramidVertices:
    """Images of the canonical triple under a stack of rotations ``(n, d, d)``."""
    pts = rot[..., :, :3] @ CANONICAL_COEFFS.T
    return PyramidVertices(pts[..., 0], pts[..., 1], pts[..., 2])


def sample_manifold(d: int, rng, size: int | None = None) -> PyramidVertices:
    """Sample the normalized surface measure (Haar pushforward); needs d >= 4."""
    if d < 4:
        raise ValueError(f"manifold sampling uses d >= 4, got {d}")
    return vertices_from_rotations(sample_haar(d, rng, size=size))


class NonFiniteSample(FloatingPointError):
    def __init__(self, index: int, vertices):
        self.index = index
        self.vertices = vertices
        super().__init__(f"integrand not finite at sample {index}: {vertices}")


def surface_integral_mc(
    F: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    d: int,
    n: int,
    rng: RngStream,
) -> tuple[complex | float, float]:
    """Monte Carlo mean of ``F(u, v, w)`` over the normalized manifold measure.

    ``F`` is called on stacked vertices of shape ``(block, d)`` and must return
    ``(block,)`` values.  Returns ``(estimate, stderr)``.
    """
    if d < 4:
        raise ValueError(f"manifold sampling uses d >= 4, got {d}")
    if n < 100:
        raise ValueError("surface_integral_mc needs n >= 100")
    chunks = []
    offset = 0
    for rot in haar_batches(d, n, rng):
        p = vertices_from_rotations(rot)
        vals = np.asarray(F(p.u, p.v, p.w))
        vals = np.broadcast_to(vals, (rot.shape[0],))
        bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.argmax(bad))
            raise NonFiniteSample(offset + i, (p.u[i], p.v[i], p.w[i]))
        chunks.append(vals)
        offset += rot.shape[0]
    x = np.concatenate(chunks)
    return mean_stderr(x)

