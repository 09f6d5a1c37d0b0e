"""Tour of the daily realized measures on a simulated trading day.

Simulates one pure-diffusion day and the same day with a 6-sigma price
jump spliced into a single five-minute interval, then prints every
measure side by side.  The jump inflates realized variance while the
jump-robust measures barely move: that gap is what every
squared-variation jump test is built on.
"""

import numpy as np

from jumplab import DgpConfig, initial_state, measure_set, simulate_day
from jumplab.jumptests import TuningConfig, cpr_threshold_spec
from jumplab.rng import PATH, stream

cfg = DgpConfig()
state = initial_state(cfg)
day, _ = simulate_day(cfg, state, stream(123, 0, PATH), forced_jumps=(0.0, 0.0))
r = day.returns

sigma_day = np.sqrt(cfg.theta / 252)
jumped = r.copy()
jumped[30] += 6 * sigma_day

tuning = TuningConfig()
clean = measure_set(r, cpr_threshold_spec(r, tuning))
dirty = measure_set(jumped, cpr_threshold_spec(jumped, tuning))

print(f"one day, M = {r.size} five-minute returns, daily sd ~ {sigma_day:.4%}")
print(f"{'measure':8s} {'no jump':>12s} {'with 6-sigma jump':>18s} {'ratio':>7s}")
for name in ("rv", "bv", "tp", "ctbv", "ctripv", "minrv", "medrv", "swv"):
    a, b = getattr(clean, name), getattr(dirty, name)
    print(f"{name:8s} {a:12.3e} {b:18.3e} {b / a:7.2f}")

print("\nnotes:")
print(" - rv and swv absorb the jump (ratio >> 1)")
print(" - bv is partially contaminated through its two cross products")
print(" - the truncated and min/med measures stay close to the clean day")
