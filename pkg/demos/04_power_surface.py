"""Single-day power of four tests as price and volatility jumps grow.

A small version of the full power-surface experiment: forced jumps of
deterministic size, rejection rates per grid cell.  Watch two effects:
the ASJ column stays near zero even for huge price jumps, and the PZ2
row at zero price jump grows with the volatility jump (size distortion).
"""

import numpy as np

from jumplab import DgpConfig
from jumplab.evaluate import power_surface

cfg = DgpConfig()          # sqrt-day units: the zp grid is in daily sigmas
zp = np.array([0.0, 2.0, 5.0, 10.0]) * np.sqrt(cfg.theta)
zv = np.array([0.0, 10.0, 20.0]) * cfg.theta
surf = power_surface(cfg, zp, zv, reps=150, methods=("bns", "asj", "pz2", "lm"), seed=4)

for m in ("bns", "asj", "pz2", "lm"):
    print(f"\n{m.upper()} rejection rate (rows: price jump in daily sigmas; "
          f"cols: variance jump / theta = 0, 10, 20)")
    for i, p in enumerate((0, 2, 5, 10)):
        row = " ".join(f"{surf.rates[m][i, j]:6.3f}" for j in range(zv.size))
        print(f"  zp={p:2d} sigma:  {row}")
