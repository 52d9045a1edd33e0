"""E[u(t,0)^2] of the 1-d heat equation with space-time white noise, three ways.

Chaos expansion truncated at N = 4 (Monte Carlo over diagrams), the exact
series in closed form, and the finite-difference oracle (exact discrete
value plus a small simulated sample).
"""

from intermittency import kernels as kn
from intermittency import moments as mo
from intermittency import noise as nz

t = 0.25
spec = mo.ChaosKernelSpec(kn.Heat(1), 0, t)
est = mo.pth_moment_truncated(2, spec, nz.white_white(), 4, 100_000, seed=1)
print(f"chaos, N=4      {est.value:.5f} +- {est.std_error:.5f}  (tail bound {est.extra['tail_bound']:.2e})")
print(f"closed form     {mo.second_moment_white_heat(t):.5f}")
print(f"FD exact dx=1/128 {mo.fd_exact_second_moment(t, 1 / 128):.5f}")
fd = mo.fd_oracle_she(t, 1 / 64, n_paths=1000, seed=2)
m2 = fd.moments[2]
print(f"FD sampled dx=1/64 {m2.value:.4f} +- {m2.std_error:.4f}")
