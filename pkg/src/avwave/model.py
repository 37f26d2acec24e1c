"""Car-following controller, equilibrium, and linearized feedback gains.

The concrete controller is the lagged linear spacing policy

    u = k_s * (spacing - tau * v_self - s_0) + k_v * (v_lead - v_self)
    phi * da/dt = u - a

All gains are stored as positive magnitudes, so the characteristic
polynomial of one stage reads ``phi*s**3 + s**2 + f_self*s + f_p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ControllerSpec",
    "NewellSpec",
    "LinearGains",
    "Equilibrium",
    "DEFAULT_CONTROLLER",
    "DEFAULT_EQUILIBRIUM",
    "equilibrium_spacing",
    "desired_accel",
    "linearize",
]


@dataclass(frozen=True)
class ControllerSpec:
    """Gains of the linear spacing-policy controller.

    Parameters
    ----------
    k_s : float
        Spacing gain (1/s^2).
    k_v : float
        Speed-difference gain (1/s).
    tau : float
        Desired time gap (s).
    phi : float
        First-order actuation lag (s).
    s_0 : float
        Standstill spacing (m).
    """

    k_s: float = 1.0
    k_v: float = 1.0
    tau: float = 1.2
    phi: float = 0.1
    s_0: float = 2.0

    def __post_init__(self):
        if not self.k_s > 0:
            raise ValueError(f"k_s must be positive, got {self.k_s}")
        if not self.k_v >= 0:
            raise ValueError(f"k_v must be non-negative, got {self.k_v}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.phi > 0:
            raise ValueError(f"phi must be positive, got {self.phi}")
        if not self.s_0 >= 0:
            raise ValueError(f"s_0 must be non-negative, got {self.s_0}")

    def replace(self, **changes) -> ControllerSpec:
        fields = dict(k_s=self.k_s, k_v=self.k_v, tau=self.tau, phi=self.phi, s_0=self.s_0)
        fields.update(changes)
        return ControllerSpec(**fields)


@dataclass(frozen=True)
class NewellSpec:
    """Idealized follower that copies its leader shifted by ``tau`` and ``s_0``.

    Its transfer is a pure delay, ``exp(-j*omega*tau)``.  It has no ODE
    form and is therefore only usable in the analytic modules.
    """

    tau: float = 1.2
    s_0: float = 2.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.s_0 >= 0:
            raise ValueError(f"s_0 must be non-negative, got {self.s_0}")


@dataclass(frozen=True)
class LinearGains:
    """Linearized feedback gains of one follower.

    ``f_p`` multiplies the spacing deviation, ``f_self`` the follower's own
    speed deviation (entering with a minus sign) and ``f_lead`` the leader's
    speed deviation.
    """

    f_p: float
    f_self: float
    f_lead: float
    phi: float

    def __post_init__(self):
        if not self.f_p > 0:
            raise ValueError(f"f_p must be positive, got {self.f_p}")
        if not self.phi > 0:
            raise ValueError(f"phi must be positive, got {self.phi}")


@dataclass(frozen=True)
class Equilibrium:
    """Shared steady state of a platoon.

    ``v_free`` is the free-flow speed limit; together with zero it bounds
    every vehicle's speed when saturation is enabled.
    """

    v_e: float = 15.0
    v_free: float = 30.0

    def __post_init__(self):
        if not 0 < self.v_e < self.v_free:
            raise ValueError(
                f"need 0 < v_e < v_free, got v_e={self.v_e}, v_free={self.v_free}")

    def spacing(self, spec: ControllerSpec | NewellSpec) -> float:
        """Equilibrium spacing ``s_e`` of ``spec`` at this speed."""
        return equilibrium_spacing(spec, self.v_e)


DEFAULT_CONTROLLER = ControllerSpec()
DEFAULT_EQUILIBRIUM = Equilibrium()


def equilibrium_spacing(spec: ControllerSpec | NewellSpec, v_e: float) -> float:
    """Return ``v_e * tau + s_0``, the spacing at which ``spec`` holds ``v_e``."""
    if v_e < 0:
        raise ValueError(f"equilibrium speed must be non-negative, got {v_e}")
    return v_e * spec.tau + spec.s_0


def desired_accel(spec: ControllerSpec, spacing, v_self, v_lead):
    """Commanded acceleration of the follower.

    Works element-wise on numpy arrays as well as on scalars.
    """
    if np.any(np.asarray(spacing) <= 0):
        raise ValueError("spacing must be positive")
    return (spec.k_s * (spacing - spec.tau * v_self - spec.s_0)
            + spec.k_v * (v_lead - v_self))


def linearize(spec: ControllerSpec) -> LinearGains:
    # exact for the linear controller, at any equilibrium speed
    return LinearGains(
        f_p=spec.k_s,
        f_self=spec.k_v + spec.k_s * spec.tau,
        f_lead=spec.k_v,
        phi=spec.phi,
    )
