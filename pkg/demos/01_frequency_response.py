"""
Frequency response of one follower
==================================

How a single automated follower passes a leader's speed oscillation on,
as a function of the oscillation frequency.
"""

# %%
# The default controller and its linearized gains.
import math

import numpy as np

from avwave import ControllerSpec, linearize, string_stability_margin, transfer_at, transfer_sweep

spec = ControllerSpec()
gains = linearize(spec)
print(spec)
print(gains)

# %%
# At very low frequency the follower copies its leader with a delay equal
# to the time gap: ``|G| -> 1`` and the response time approaches ``tau``.
slow = transfer_at(gains, 1e-3)
print(f"|G| = {slow.magnitude:.7f}, response time = {slow.response_time:.4f} s")

# %%
# At 0.08 Hz the oscillation is damped and arrives about one second late.
w = 0.16 * math.pi
g = transfer_at(gains, w)
print(f"omega = {w:.4f} rad/s: |G| = {g.magnitude:.4f}, phase = {g.phase:.4f} rad")

# %%
# Sweep the band and look for amplification anywhere.
omega = np.logspace(-3, 1, 400)
sweep = transfer_sweep(gains, omega)
sup, where = string_stability_margin(gains, omega)
print(f"sup |G| = {sup:.8f} at omega = {where:.3g} rad/s")

weak = linearize(spec.replace(k_v=0.2))
print("k_v = 0.2 gives sup |G| = %.5f" % string_stability_margin(weak, omega)[0])

# %%
# Optional plot.
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)
    ax1.semilogx(omega, sweep.magnitude)
    ax1.set_ylabel("|G|")
    ax2.semilogx(omega, sweep.phase)
    ax2.set_ylabel("phase (rad)")
    ax2.set_xlabel("omega (rad/s)")
    fig.savefig("frequency_response.png", dpi=120)
