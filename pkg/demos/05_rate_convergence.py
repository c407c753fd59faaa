"""How fast does the rate approach the entropy as the state budget grows?

The interval layout ranks states by the mass their forward sets carry
under the telescoping target weights lg((N+i)/(N+i-1)).  With state
counts proportional to the probabilities, the measured excess over the
entropy falls off at least as fast as 1/N -- on this source it decays
like 1/N^2.
"""

from aeds import (
    build_large_n,
    check_bound,
    entropy,
    stationary_distribution,
    validate_distribution,
)
from aeds.analysis import smallest_dominating_gamma

p = validate_distribution([("a", 3), ("b", 3), ("c", 2)])
h = entropy(p)
print(f"entropy: {h:.6f} bits/symbol")
print(f"{'N':>5}  {'rate':>10}  {'excess':>11}  {'excess*N':>9}  gamma")
n = 8
while n <= 4096:
    table, layout = build_large_n(p, [3 * n // 8, 3 * n // 8, n // 4])
    rep = stationary_distribution(table, p)
    gamma = smallest_dominating_gamma(rep.probs, n)
    print(f"{n:>5}  {rep.mean_bits:>10.6f}  {rep.mean_bits - h:>11.3e}  "
          f"{(rep.mean_bits - h) * n:>9.5f}  {gamma}")
    n *= 2

table, layout = build_large_n(p, [96, 96, 64])
rep = stationary_distribution(table, p)
ident = check_bound(table, p, "target-identity", report=rep, layout=layout)
print(f"\ntarget-identity check at N=256: |deviation| = {ident.left:.2e} "
      f"(the layout meets H + D exactly under the target weights)")
