"""Haar sampling on SO(d), frame-mapping rotations and frequency-frame reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "RngStream",
    "DegenerateFrame",
    "ReducedFrame",
    "sample_haar",
    "haar_batches",
    "map_haar_blocks",
    "frame_rotation",
    "reduce_frequencies",
    "quotient_check",
    "mean_stderr",
]

HAAR_BLOCK = 8192


@dataclass(frozen=True)
class RngStream:
    """Seeded random stream; identical ``(seed, stream_id)`` replays identically.

    Distinct ``stream_id`` values give statistically independent streams, so
    Monte Carlo work can be split into blocks and run in any order.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    def substream(self, index: int) -> "RngStream":
        # stream ids nest: (stream_id, index) is folded into a fresh 64-bit id
        mixed = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, index)
        ).generate_state(2, dtype=np.uint32)
        return RngStream(self.seed, int(mixed[0]) << 32 | int(mixed[1]))


class DegenerateFrame(ValueError):
    """Frequency triple for which the reduced frame is not defined.

    ``kind`` is one of ``"zero_vector"``, ``"parallel"``, ``"in_span"``.
    """

    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        super().__init__(message or f"degenerate frame: {kind}")


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def _haar_from_gaussian(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    diag = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    diag[diag == 0] = 1.0
    q = q * diag[..., None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 0] *= -1.0
    return q


def sample_haar(d: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-distributed rotation(s) in SO(d).

    QR of a standard Gaussian matrix with the triangular factor's diagonal made
    positive gives Haar measure on O(d); negating the first column of the
    matrices with determinant -1 pushes that forward to Haar measure on SO(d).

    Returns a ``(d, d)`` array, or ``(size, d, d)`` when ``size`` is given.
    """
    if d < 2:
        raise ValueError(f"need d >= 2 for SO(d), got {d}")
    gen = _as_generator(rng)
    shape = (1 if size is None else size, d, d)
    q = _haar_from_gaussian(gen.standard_normal(shape))
    return q[0] if size is None else q


def haar_batches(d: int, n: int, rng: RngStream, block: int = HAAR_BLOCK):
    """Yield Haar samples in fixed-size blocks, one substream per block.

    The block layout depends only on ``n`` and ``block``, so results built from
    these batches do not depend on how the blocks are scheduled.
    """
    for b, start in enumerate(range(0, n, block)):
        size = min(block, n - start)
        yield sample_haar(d, rng.substream(b), size=size)


def map_haar_blocks(d: int, n: int, rng: RngStream, fn, workers: int = 1,
                    block: int = HAAR_BLOCK) -> list:
    """Apply ``fn`` to each Haar block; results come back in block order.

    With ``workers > 1`` blocks are processed by a thread pool.  Each block has
    its own substream, so the output is independent of ``workers``.
    """
    starts = list(range(0, n, block))

    def run(b):
        size = min(block, n - starts[b])
        return fn(sample_haar(d, rng.substream(b), size=size))

    if workers <= 1 or len(starts) == 1:
        return [run(b) for b in range(len(starts))]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(starts))))


def _orthonormal(vectors: np.ndarray, tol: float = 1e-10) -> bool:
    gram = vectors @ vectors.T
    return np.max(np.abs(gram - np.eye(len(vectors)))) <= tol


def _complete_basis(vectors: np.ndarray, d: int) -> np.ndarray:
    """Extend orthonormal rows to an orthonormal basis of R^d, deterministically.

    Canonical basis vectors are added in order of the largest residual after
    projecting out the current span (ties broken by index).
    """
    basis = list(vectors)
    while len(basis) < d:
        b = np.array(basis).reshape(-1, d)
        residual = np.eye(d) - b.T @ b
        norms = np.linalg.norm(residual, axis=1)
        v = residual[int(np.argmax(norms))]
        v = v - b.T @ (b @ v)  # re-orthogonalise once
        basis.append(v / np.linalg.norm(v))
    return np.array(basis)


def frame_rotation(source: Sequence, target: Sequence, d: int) -> np.ndarray:
    """Rotation Q in SO(d) with ``Q @ source[i] == target[i]`` for every i.

    Both lists must be orthonormal and of equal length ``m <= d``.  The
    orthogonal complements are completed deterministically; when ``m <= d - 1``
    the orientation is fixed by flipping the last completing vector.
    """
    src = np.atleast_2d(np.asarray(source, dtype=float)).reshape(-1, d)
    tgt = np.atleast_2d(np.asarray(target, dtype=float)).reshape(-1, d)
    if src.shape != tgt.shape:
        raise ValueError("source and target must have equal length")
    m = src.shape[0]
    if m > d:
        raise ValueError("more vectors than dimensions")
    if not (_orthonormal(src) and _orthonormal(tgt)):
        raise ValueError("source and target must be orthonormal")
    full_src = _complete_basis(src, d)
    full_tgt = _complete_basis(tgt, d)
    q = full_tgt.T @ full_src
    if np.linalg.det(q) < 0:
        if m == d:
            raise ValueError("source and target frames have opposite orientation")
        full_tgt[-1] *= -1.0
        q = full_tgt.T @ full_src
    return q


@dataclass(frozen=True)
class ReducedFrame:
    """Rotation-invariant data of a frequency triple.

    In the orthonormal frame ``(f1, f2, f3)`` with ``f2 = eta/|eta|`` and
    ``f3`` the normalized part of delta orthogonal to eta:
    ``delta = |delta| (a2 f2 + a3 f3)`` and ``xi = |xi| (b1 f1 + b2 f2 + b3 f3)``.
    """

    xi_norm: float
    delta_norm: float
    eta_norm: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.xi_norm**2 + self.delta_norm**2 + self.eta_norm**2))


_TINY = 1e-13


def reduce_frequencies(xi, delta, eta) -> ReducedFrame:
    """Reduce ``(xi, delta, eta)`` to its :class:`ReducedFrame`.

    Raises
    ------
    DegenerateFrame
        ``zero_vector`` if any input vanishes, ``parallel`` if delta is parallel
        to eta, ``in_span`` if xi lies in span(delta, eta).
    """
    xi, delta, eta = (np.asarray(v, dtype=float) for v in (xi, delta, eta))
    d = xi.shape[-1]
    if d < 4:
        raise ValueError(f"frame reduction needs d >= 4, got {d}")
    nx, nd, ne = (float(np.linalg.norm(v)) for v in (xi, delta, eta))
    scale = max(nx, nd, ne)
    if min(nx, nd, ne) <= _TINY * max(scale, 1.0):
        raise DegenerateFrame("zero_vector", "xi, delta and eta must all be nonzero")
    f2 = eta / ne
    a2 = float(delta @ f2) / nd
    perp = delta - (delta @ f2) * f2
    pn = float(np.linalg.norm(perp))
    if pn <= 1e-12 * nd:
        raise DegenerateFrame("parallel", "delta is parallel to eta")
    f3 = perp / pn
    a3 = pn / nd
    b2 = float(xi @ f2) / nx
    b3 = float(xi @ f3) / nx
    rest = xi - (xi @ f2) * f2 - (xi @ f3) * f3
    rn = float(np.linalg.norm(rest))
    if rn <= 1e-12 * nx:
        raise DegenerateFrame("in_span", "xi lies in span(delta, eta)")
    # f1 = rest/rn, so b1 = rn/|xi| is nonnegative
    b1 = rn / nx
    return ReducedFrame(nx, nd, ne, a2, a3, b1, b2, b3)


def quotient_check(
    d: int,
    f: Callable[[np.ndarray], np.ndarray],
    n: int,
    rng: RngStream,
) -> dict:
    """Estimate a group average two ways: directly and through the stabilizer.

    ``f`` maps a stack of rotations ``(N, d, d)`` to values ``(N,)``.  The
    second estimate averages ``f(R R')`` with ``R`` Haar on SO(d) and ``R'``
    Haar on the copy of SO(d-1) fixing ``e1``.
    """
    if n < 1000:
        raise ValueError("quotient_check needs n >= 1000")
    g1 = rng.substream(0)
    g2 = rng.substream(1)
    g3 = rng.substream(2)
    direct = np.asarray(f(sample_haar(d, g1, size=n)))
    r = sample_haar(d, g2, size=n)
    inner = sample_haar(d - 1, g3, size=n)
    rp = np.zeros((n, d, d))
    rp[:, 0, 0] = 1.0
    rp[:, 1:, 1:] = inner
    nested = np.asarray(f(r @ rp))

    (v1, s1), (v2, s2) = mean_stderr(direct), mean_stderr(nested)
    return {"direct": v1, "direct_stderr": s1, "quotient": v2, "quotient_stderr": s2}


def mean_stderr(x: np.ndarray) -> tuple[complex | float, float]:
    """Sample mean and its standard error (complex: combined over both parts)."""
    n = x.shape[0]
    if np.iscomplexobj(x):
        var = x.real.var(ddof=1) + x.imag.var(ddof=1)
        mean = complex(x.mean())
    else:
        var = x.var(ddof=1)
        mean = float(x.mean())
    return mean, float(np.sqrt(var / n))
