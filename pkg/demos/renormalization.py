"""
Rescaling limits at the punctures
=================================

At every period-5 puncture the reduced first-return map is fitted by a
member of the parabolic family R_v(z) = v + z^2/(z+1).  Where the critical
orbit has a non-central return, a further rescaling gives a quadratic
polynomial whose parameter is a center of the Mandelbrot set.
"""

from periodic_curves.curves import compute_branches
from periodic_curves.verify import verify_branch

p = 5
for b in compute_branches(p)["kept"]:
    chk = verify_branch(b, p)
    para = chk.parabolic
    line = f"{b.line.value} theta={chk.entry.theta:4s} v={para.v:.4f} fit={para.fit_residual:.1e}"
    if chk.renorm.satellite:
        line += "  satellite"
    else:
        qr = chk.quadratic
        line += f"  renormalizes: c={qr.c:.3g}, distance to Gleason root {qr.gleason_distance:.1e}"
    print(line)
