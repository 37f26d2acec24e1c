"""
Waves travelling through a platoon
==================================

A leader oscillates its speed by 15 m/s around 15 m/s.  We follow the
oscillation through five followers and measure how fast the resulting
traffic wave moves upstream.
"""

# %%
import math

import numpy as np

from avwave import (ControllerSpec, OscComponent, PlatoonSpec, SimConfig, pair_wave_speed,
                    platoon_aggregate_wave, propagate_spectrum, simulate_platoon)
from avwave.sim import analytic_reference, empirical_wave_estimate

w = 0.16 * math.pi
platoon = PlatoonSpec.homogeneous(ControllerSpec(), 5)
leader = [OscComponent.from_speed_amplitude(15.0, w)]
spectra = propagate_spectrum(platoon, leader)

for s in spectra:
    print(f"vehicle {s.index}: position amplitude {s.amplitude[0]:7.3f} m, phase {s.phase[0]:+.4f} rad")

# %%
# The wave speed of a pair is not constant: it swings with the leader's
# oscillation because every stage damps the amplitude a little.
t = np.linspace(0, 2 * math.pi / w, 9)
for i in (1, 5):
    print(f"pair {i}:", np.round(pair_wave_speed(platoon, spectra, i, t), 3))

# %%
# Across the whole platoon the travel times add up and the oscillation
# terms telescope.
tw, h, speed = platoon_aggregate_wave(platoon, spectra, (0, 5), 0.0)
print(f"whole platoon: travel time {tw:.3f} s, distance {h:.3f} m, speed {speed:.3f} m/s")

# %%
# The time-domain simulation agrees with the closed form once the start-up
# transient has died out.
traj = simulate_platoon(platoon, leader, SimConfig(), record_every=10)
ref = analytic_reference(platoon, leader, traj)
m = traj.steady()
print("max position error after warm-up: %.2e m" % np.abs(traj.position[:, m] - ref.position[:, m]).max())

# %%
# Measuring waves from the simulated trajectories at the instants of extreme
# acceleration reproduces the analytic speed.
sample = empirical_wave_estimate(simulate_platoon(platoon, leader), 1)[0]
print(f"measured {sample.speed:.5f} m/s, analytic "
      f"{pair_wave_speed(platoon, spectra, 1, sample.emission_time):.5f} m/s")
