"""Random binning and the CB2 pipeline as the block length grows."""

import math

from cbcast import binning
from cbcast.binning import BinningConfig

print(" L     bits/sym  chebyshev   empirical | CB2 bits/L  decode errors")
for L in (4, 25, 100, 400, 1600):
    res = binning.simulate_binning(BinningConfig(4, 3, L, trials=2000, seed=1))
    run = binning.run_cb2_scheme(L, 100, seed=1)
    print(f"{L:5d}  {res.bits_per_symbol:.4f}    {res.chebyshev_bound:9.2e}  {res.empirical_error:.4f}    | "
          f"{run.bits_per_symbol_mean:.4f}      {run.decode_errors}")
print(f"asymptotes: binning {2 - math.log2(3):.4f}, CB2 {4 - math.log2(3):.4f}")
