"""Exact-rational geometry of exponent regions.

Points are triples ``(1/p, 1/q, 1/s)`` of :class:`fractions.Fraction`.  Hull
membership is decided by an exact phase-one simplex on

    sum_v t_v v = point,  sum_v t_v = 1,  t_v >= 0,

which returns either the convex coefficients or a separating functional
``(w, w0)`` with ``w.v + w0 >= 0`` on every vertex and ``w.point + w0 < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = [
    "ExponentPoint",
    "HullSpec",
    "HULL_LABELS",
    "Membership",
    "ExclusionReport",
    "p0",
    "hull",
    "contains",
    "hull_subset",
    "exclusion_check",
    "r_exponent",
    "region_report",
]

HULL_LABELS = ("banach", "thm1_S", "sec10_S", "sec10_Sprime")
HALF = Fraction(1, 2)


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("use exact rationals (Fraction, int or 'a/b' strings), not floats")
    return Fraction(x)


@dataclass(frozen=True)
class ExponentPoint:
    inv_p: Fraction
    inv_q: Fraction
    inv_s: Fraction

    def __post_init__(self):
        for name in ("inv_p", "inv_q", "inv_s"):
            v = _frac(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"{name} = {v} is outside [0, 1]")
            object.__setattr__(self, name, v)

    @classmethod
    def parse(cls, text: str) -> "ExponentPoint":
        """Parse ``"1/2,1/2,1/2"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated rationals, got {text!r}")
        return cls(*(Fraction(p) for p in parts))

    def coords(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.inv_p, self.inv_q, self.inv_s)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords())


def p0(d: int) -> Fraction:
    """``5d / (3d - 2)``; for instance ``p0(16) == Fraction(40, 23)``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return Fraction(5 * d, 3 * d - 2)


@dataclass(frozen=True)
class HullSpec:
    label: str
    d: int
    vertices: tuple[ExponentPoint, ...]


def _pt(*c) -> ExponentPoint:
    return ExponentPoint(*c)


def hull(label: str, d: int) -> HullSpec:
    """Vertex list of a named region.

    ``banach``
        the three unit vectors.
    ``thm1_S``
        ``(1/2,1/2,1/2)``, the three ``1/p0`` pairs and the unit vectors.
    ``sec10_S``
        the unit vectors, the origin and the three ``1/p0`` pairs.
    ``sec10_Sprime``
        ``sec10_S`` together with ``(1/2,1/2,1/2)``.
    """
    if d < 4:
        raise ValueError("d must be >= 4")
    a = 1 / p0(d)
    o, l = Fraction(0), Fraction(1)
    units = [_pt(l, o, o), _pt(o, l, o), _pt(o, o, l)]
    pairs = [_pt(a, a, o), _pt(a, o, a), _pt(o, a, a)]
    centre = _pt(HALF, HALF, HALF)
    if label == "banach":
        verts = units
    elif label == "thm1_S":
        verts = [centre] + pairs + units
    elif label == "sec10_S":
        verts = units + [_pt(o, o, o)] + pairs
    elif label == "sec10_Sprime":
        verts = units + [_pt(o, o, o)] + pairs + [centre]
    else:
        raise ValueError(f"unknown hull label {label!r}; choose from {HULL_LABELS}")
    return HullSpec(label, d, tuple(verts))


@dataclass(frozen=True)
class Membership:
    """Result of :func:`contains`.

    Exactly one of ``coefficients`` (convex weights, one per vertex) and
    ``certificate`` (``(w, w0)`` separating the point) is set.
    """

    inside: bool
    coefficients: tuple[Fraction, ...] | None
    certificate: tuple[tuple[Fraction, Fraction, Fraction], Fraction] | None


def _phase_one(cols: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Minimize the sum of artificials for ``A t = rhs, t >= 0``.

    Returns ``(value, t, y)`` where ``y`` are the simplex multipliers of the
    final basis.  Uses Bland's rule, so it terminates.
    """
    m, n = len(rhs), len(cols)
    sign = [Fraction(-1) if b < 0 else Fraction(1) for b in rhs]
    # tableau rows: [A | I | b], with rows flipped so b >= 0
    rows = [
        [sign[i] * cols[j][i] for j in range(n)]
        + [Fraction(int(i == k)) for k in range(m)]
        + [sign[i] * rhs[i]]
        for i in range(m)
    ]
    basis = [n + i for i in range(m)]
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    while True:
        # reduced costs r_j = c_j - c_B B^-1 A_j
        red = [
            cost[j] - sum(cost[basis[i]] * rows[i][j] for i in range(m)) for j in range(n + m)
        ]
        enter = next((j for j in range(n + m) if red[j] < 0), None)
        if enter is None:
            break
        ratios = [
            (rows[i][-1] / rows[i][enter], basis[i], i) for i in range(m) if rows[i][enter] > 0
        ]
        if not ratios:  # cannot happen: the phase-one objective is bounded below
            raise RuntimeError("unbounded phase-one problem")
        _, _, leave = min(ratios)
        piv = rows[leave][enter]
        rows[leave] = [v / piv for v in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[leave])]
        basis[leave] = enter
    value = sum(cost[basis[i]] * rows[i][-1] for i in range(m))
    t = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            t[b] = rows[i][-1]
    # artificial column k has cost 1 and started as e_k: red_k = 1 - y_k (flipped rows)
    y = [(1 - red[n + k]) * sign[k] for k in range(m)]
    return value, t, y


def contains(h: HullSpec, point: ExponentPoint) -> Membership:
    """Exact membership of ``point`` in the closed convex hull of ``h``."""
    cols = [list(v.coords()) + [Fraction(1)] for v in h.vertices]
    rhs = list(point.coords()) + [Fraction(1)]
    value, t, y = _phase_one(cols, rhs)
    if value == 0:
        assert all(sum(c[i] * tj for c, tj in zip(cols, t)) == rhs[i] for i in range(4))
        return Membership(True, tuple(t), None)
    # Farkas: y.A_j <= 0 for all columns and y.rhs > 0, so z = -y separates
    z = [-v for v in y]
    w, w0 = tuple(z[:3]), z[3]
    assert all(sum(wi * ci for wi, ci in zip(w, v.coords())) + w0 >= 0 for v in h.vertices)
    assert sum(wi * ci for wi, ci in zip(w, point.coords())) + w0 < 0
    return Membership(False, None, (w, w0))


def hull_subset(inner: HullSpec, outer: HullSpec) -> bool:
    """True when every vertex of ``inner`` lies in the hull of ``outer``."""
    return all(contains(outer, v).inside for v in inner.vertices)


@dataclass(frozen=True)
class ExclusionReport:
    """Exclusion of ``(1/2,1/2,1/2)`` from the ``sec10_S`` hull.

    With the symmetric ansatz (weight ``T/3`` on each unit vector, ``U/3``
    on each ``1/p0`` pair) the coordinate equations all read
    ``T + (2/p0) U = 3/2``.  Dropping the origin, ``T + U = 1`` forces
    ``U = witness = 5d/(2d-8)``, which exceeds 1.
    """

    d: int
    p0: Fraction
    witness: Fraction
    witness_exceeds_one: bool
    lp_excluded: bool
    certificate: tuple | None
    agree: bool

    def as_dict(self) -> dict:
        cert = None
        if self.certificate is not None:
            w, w0 = self.certificate
            cert = {"w": [str(x) for x in w], "w0": str(w0)}
        return {
            "d": self.d,
            "p0": str(self.p0),
            "witness": str(self.witness),
            "witness_exceeds_one": self.witness_exceeds_one,
            "lp_excluded": self.lp_excluded,
            "certificate": cert,
            "agree": self.agree,
        }


def _symmetric_witness(d: int) -> Fraction:
    # solve T + 2aU = 3/2, T + U = 1 exactly
    a = 1 / p0(d)
    det = 2 * a - 1
    if det == 0:
        raise ZeroDivisionError("singular symmetric system")
    return (Fraction(3, 2) - 1) / det


def exclusion_check(d: int) -> ExclusionReport:
    """Reproduce the symmetric witness and compare it with the general LP."""
    if d <= 4:
        raise ValueError("the witness 5d/(2d-8) needs d >= 5")
    w = _symmetric_witness(d)
    assert w == Fraction(5 * d, 2 * d - 8)
    mem = contains(hull("sec10_S", d), ExponentPoint(HALF, HALF, HALF))
    excluded = not mem.inside
    return ExclusionReport(d, p0(d), w, w > 1, excluded, mem.certificate, excluded == (w > 1))


def r_exponent(point: ExponentPoint) -> Fraction:
    """``1/r = 1/p + 1/q + 1/s``."""
    return point.inv_p + point.inv_q + point.inv_s


def region_report(label: str, d: int, point: ExponentPoint) -> dict:
    """JSON-ready summary: hull, query point, verdict and certificate."""
    h = hull(label, d)
    mem = contains(h, point)
    out = {
        "hull": label,
        "d": d,
        "p0": str(p0(d)),
        "vertices": [str(v) for v in h.vertices],
        "point": str(point),
        "inv_r": str(r_exponent(point)),
        "verdict": "inside" if mem.inside else "excluded",
    }
    if mem.inside:
        out["coefficients"] = [str(c) for c in mem.coefficients]
    else:
        w, w0 = mem.certificate
        out["certificate"] = {"w": [str(x) for x in w], "w0": str(w0)}
    if label == "sec10_S" and point == ExponentPoint(HALF, HALF, HALF) and d >= 5:
        out["witness"] = str(_symmetric_witness(d))
    return out
