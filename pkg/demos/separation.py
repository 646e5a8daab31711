"""
Separation from the pure phases and a recursive decay iteration
==============================================================

"""

import numpy as np

from helfrich_ch.config import parse_config
from helfrich_ch.diagnostics import SeparationTracker, degiorgi_decay, degiorgi_threshold, level_set_measures
from helfrich_ch.dynamics import integrate
from helfrich_ch.run import initial_state

# a larger initial perturbation on a coarse grid
cfg = parse_config("[discretization]\nlmax = 12\ndt = 1e-3\n[init]\namplitude = 0.3\n")
state, _ = initial_state(cfg)

# track the smallest composition every step
tracker = SeparationTracker(t_start=0.1)
final, _ = integrate(state, cfg.params, 1000, track_energy=False,
                     callback=lambda s, info: tracker.record(s.t, s.phi))
floor = tracker.floor()
print("floor of min phi over [0.1, 1]:", floor)

# level sets below half the floor are empty at the end
lv = level_set_measures(final.phi.values, floor / 2, 5, final.phi.disc.grid)
print("z_n,i at delta = floor/2:\n", lv.z)

# extremal sequence started at the threshold decays geometrically
C, b, gamma = 2.0, 4.0, 0.5
print("theta =", degiorgi_threshold(C, b, gamma))
r = degiorgi_decay("theta", C, b, gamma, n_max=10)
print("y_n / bound:", np.round(r.y / r.bound, 12))
