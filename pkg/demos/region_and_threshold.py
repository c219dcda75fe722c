"""Exact-arithmetic geometry of the exponent region and the L^2 threshold.

For each dimension the script prints the per-level L^2 exponent (negative
means the dyadic sum converges), the rational exclusion witness for the
point (1/2, 1/2, 1/2), the separating certificate found by the rational
simplex, and the critical exponent ``p0``.

Run with ``python3 demos/region_and_threshold.py``.
"""

from pyramidlab.decomposition import l2_exponent_report
from pyramidlab.region import ExponentPoint, contains, exclusion_check, hull, p0

centre = ExponentPoint.parse("1/2,1/2,1/2")
print(f"{'d':>3} {'L2 rate':>8} {'tight':>6} {'witness':>8} {'certificate (w; w0)':>24} {'p0':>6}  in S'")
for d in (5, 8, 12, 15, 16, 17, 20, 40):
    l2 = l2_exponent_report(d)
    ex = exclusion_check(d)
    w, w0 = ex.certificate
    cert = ",".join(str(c) for c in w) + f"; {w0}"
    inside = contains(hull("sec10_Sprime", d), centre).inside
    print(f"{d:3d} {str(l2.exponent):>8} {str(l2.tight_exponent):>6} {str(ex.witness):>8} {cert:>24} {str(p0(d)):>6}  {inside}")
r = l2_exponent_report(16)
print(f"\nfirst dimension with a negative rate: {r.threshold} (tight bookkeeping: {r.tight_threshold})")
