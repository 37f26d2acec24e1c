"""
Two oscillations at once
========================

A large slow oscillation and a small faster one.  If the faster one is
damped less by every follower, it eventually dominates.
"""

# %%
from avwave import (ControllerSpec, OscComponent, PlatoonSpec, crossover_index, linearize,
                    predominant_component, propagate_spectrum, transfer_at)

spec = ControllerSpec()
slow, fast = 1.5, 0.6
g_slow = transfer_at(linearize(spec), slow).magnitude
g_fast = transfer_at(linearize(spec), fast).magnitude
print(f"|G| at {slow} rad/s = {g_slow:.4f}, at {fast} rad/s = {g_fast:.4f}")

# %%
a_big, a_small = 5.0, 1.0
n = crossover_index(a_big, a_small, g_slow, g_fast)
print("the smaller component takes over at vehicle", n)

pl = PlatoonSpec.homogeneous(spec, n + 2)
spectra = propagate_spectrum(pl, [OscComponent(a_big, slow), OscComponent(a_small, fast)])
for s in spectra:
    print(s.index, predominant_component(s), s.amplitude.round(4))
