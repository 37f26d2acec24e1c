"""Frequency-domain traffic wave analysis for automated-vehicle platoons."""

from .dfa import (BoundaryCase, FirstHarmonic, SpeedBounds, classify_boundary_case,
                  clipped_output, describing_transfer, first_harmonic)
from .errors import (AcausalStageError, AvwaveError, BoundsActiveError, ConfigError,
                     NoCrossoverError, NoExtremaError, QuadratureError, SimulationError,
                     SingularityError, StepSizeError)
from .freq import (FrequencyResponse, FrequencySweep, newell_transfer, string_stability_margin,
                   transfer_at, transfer_sweep)
from .model import (ControllerSpec, Equilibrium, LinearGains, NewellSpec, desired_accel,
                    equilibrium_spacing, linearize)
from .platoon import (OscComponent, PlatoonSpec, VehicleSpectrum, analytic_position,
                      analytic_speed, crossover_index, predominant_component, propagate_spectrum)
from .sim import SimConfig, Trajectory, empirical_wave_estimate, fit_first_harmonic, simulate_platoon
from .wave import (WaveSample, pair_shifted_distance, pair_wave_speed, pair_wave_travel_time,
                   platoon_aggregate_wave, wave_speed_series)

__version__ = "0.1.0"
