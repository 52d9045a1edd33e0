"""Small-ball ratios inf_y G_t(B_eps(x) - y) / t^a on t = s eps^b for several kernels."""

from intermittency import kernels as kn
from intermittency import smallball as sb

cases = [(kn.Heat(1), 0, 2), (kn.Heat(2), 0, 2), (kn.Wave(1), 1, 1), (kn.Wave(3), 1, 1),
         (kn.AlphaHeat(1, 1.5), 0, 1.5), (kn.FracDiff(1, 1.5, 1.2), 0.2, 1.25)]
for spec, a, b in cases:
    rep = sb.verify_small_ball(spec, a, b, (0.05, 0.2, 1.0))
    print(f"{str(spec):38s} a={a:<4} b={b:<5} worst={rep.worst_ratio:.4f} trend={rep.trend:.3f}")
