"""
Speed saturation and the describing function
============================================

Vehicles cannot drive backwards or above the free-flow speed.  When the
oscillation is large enough to hit those limits, the follower's response
is no longer linear.  A describing function keeps the frequency-domain
picture by looking at the first harmonic of the clipped response.
"""

# %%
from avwave import (ControllerSpec, Equilibrium, OscComponent, PlatoonSpec, SimConfig, SpeedBounds,
                    classify_boundary_case, describing_transfer, fit_first_harmonic, linearize,
                    simulate_platoon, transfer_at)

eq = Equilibrium(v_e=10.0, v_free=20.0)
spec = ControllerSpec(tau=0.5)
bounds = SpeedBounds.from_equilibrium(eq)
w = 1.0
g = transfer_at(linearize(spec), w)
print(f"linear stage: |G| = {g.magnitude:.5f}, phase = {g.phase:.5f} rad")

# %%
# The linear stage slightly amplifies, so a leader amplitude of 10 m/s makes
# the follower touch both limits while 8 and 9 m/s stay inside.
for amp in (8.0, 9.0, 10.0):
    case = classify_boundary_case(g, amp, bounds)
    d = describing_transfer(g, amp, bounds)
    pl = PlatoonSpec((spec,), eq, bounds_enabled=True)
    tr = simulate_platoon(pl, [OscComponent.from_speed_amplitude(amp, w)], SimConfig())
    a0, _ = fit_first_harmonic(tr.t, tr.speed[0], w, 4, warmup_end=tr.warmup_end)
    a1, _ = fit_first_harmonic(tr.t, tr.speed[1], w, 4, warmup_end=tr.warmup_end)
    print(f"A = {amp:4.1f}: {case.value:11s} DF |G| = {d.magnitude:.5f}  "
          f"simulated {a1 / a0:.5f}  phase {d.phase:.5f}")

# %%
# Clipping cuts the peaks symmetrically around each crest, so it lowers the
# gain without moving the phase.
