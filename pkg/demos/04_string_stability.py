"""
String stability and the wave-speed swing
=========================================

With a weak speed-difference gain the platoon amplifies slow oscillations.
The swing of the wave speed then grows along the platoon; with a stronger
gain it shrinks.
"""

# %%
import math

from avwave import ControllerSpec, OscComponent, PlatoonSpec, propagate_spectrum
from avwave.experiments import wave_speed_amplitudes

w = 2 * math.pi * 0.05
leader = [OscComponent.from_speed_amplitude(15.0, w)]

for k_v in (0.2, 1.0):
    pl = PlatoonSpec.homogeneous(ControllerSpec(k_v=k_v), 4)
    spectra = propagate_spectrum(pl, leader)
    amps = wave_speed_amplitudes(pl, spectra)
    print(f"k_v = {k_v}: |G| = {spectra[1].stage_magnitude[0]:.5f}, wave-speed swing per pair",
          ", ".join(f"{a:.5f}" for a in amps))
