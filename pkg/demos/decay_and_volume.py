"""Decay of the multiplier along a ray, and the dyadic support volumes.

Part 1 follows one unit direction in d = 5 out to 64 times its length and
prints ``|m|`` next to the model bound.  The model allows a log-log slope of
-(d-3)/2; the observed slope is much steeper because the direction is generic.

Part 2 compares the closed-form volume of the dyadic support regions with the
model bound.  The ratio across consecutive ``i`` is exactly ``2^(3d)``; the
ratio across consecutive ``k`` approaches ``2^-(2d-3)``, steeper than the
model's ``2^-2(d-3)``.

Run with ``python3 demos/decay_and_volume.py`` (about 20 s).
"""

import math

from pyramidlab.decomposition import PieceIndex, support_volume_bound, support_volume_exact
from pyramidlab.multiplier import decay_scan
from pyramidlab.reconcile import random_points
from pyramidlab.rotations import RngStream

d = 5
(ray,) = random_points(d, 1, RngStream(2024), min_norm=1.0, max_norm=1.0)
scan = decay_scan(ray)
print(f"decay along one ray, d = {d}")
print(f"{'lambda':>7} {'|m|':>11} {'bound':>11} {'ratio':>9}")
for row in scan.rows:
    print(f"{row.scale:7.0f} {abs(row.value):11.3e} {row.bound:11.3e} {abs(row.ratio):9.3e}")
print(f"C = {scan.constant:.3g}, slope = {scan.slope:.2f} (allowed: <= {scan.slope_limit})\n")

print("support volumes, log2 of the ratio between consecutive levels")
for dd in (5, 6, 8):
    exact_k = [
        math.log2(support_volume_exact(PieceIndex(8, 0, k + 1), dd) / support_volume_exact(PieceIndex(8, 0, k), dd))
        for k in range(1, 4)
    ]
    model_k = math.log2(support_volume_bound(PieceIndex(8, 0, 2), dd) / support_volume_bound(PieceIndex(8, 0, 1), dd))
    exact_i = math.log2(support_volume_exact(PieceIndex(6, 1, 1), dd) / support_volume_exact(PieceIndex(5, 1, 1), dd))
    print(
        f"d = {dd}: across k {', '.join(f'{x:.2f}' for x in exact_k)} (model {model_k:.0f}); "
        f"across i {exact_i:.2f} (model {3 * dd})"
    )
