"""Print the moment exponents of the four kernel families for a few noises."""

from intermittency import exponents as ex

for lam, H in (("1/2", "3/4"), ("1/4", "1/2"), ("3/4", "7/8")):
    print(f"lambda={lam}  H={H}")
    for row in ex.table(lam, H):
        print(f"  {row.kernel:10s} hbar={str(row.hbar):6s} t^{row.t_exp_lower}  p^{row.p_exp_lower}"
              f"  matched={row.matched}")
