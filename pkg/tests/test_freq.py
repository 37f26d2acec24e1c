import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

import transfer_oracle as oracle
from avwave.errors import SingularityError
from avwave.freq import (DEFAULT_OMEGA_GRID, FrequencyResponse, evaluate_rational, newell_transfer,
                         string_stability_margin, transfer_at, transfer_sweep)
from avwave.model import ControllerSpec, LinearGains, linearize

W0 = 0.16 * math.pi
DEFAULT = linearize(ControllerSpec())

specs = st.builds(ControllerSpec, k_s=st.floats(0.1, 2.0), k_v=st.floats(0.0, 2.0),
                  tau=st.floats(0.3, 2.0), phi=st.floats(0.05, 1.0))


def test_default_point_matches_oracle():
    g = transfer_at(DEFAULT, W0)
    ref = oracle.third_order_transfer(1.0, 1.0, 1.2, 0.1, W0)
    mag, ph = abs(ref), cmath.phase(ref)
    assert g.magnitude == pytest.approx(mag, abs=1e-12)
    assert g.phase == pytest.approx(ph, abs=1e-12)
    assert g.magnitude == pytest.approx(0.8452160234615028, abs=1e-12)
    assert g.response_time == pytest.approx(1.0053636686871437, abs=1e-12)


def test_two_stage_values():
    g = transfer_at(DEFAULT, W0)
    assert g.magnitude**2 == pytest.approx(0.7143901263160757, abs=1e-12)
    assert 2 * g.phase == pytest.approx(-1.0107017970347563, abs=1e-12)


def test_low_frequency_limit():
    g = transfer_at(DEFAULT, 1e-3)
    assert g.magnitude == pytest.approx(0.9999990800019096, abs=1e-12)
    assert g.response_time == pytest.approx(1.1999988840020432, abs=1e-12)


def test_quarter_turn_case():
    g = transfer_at(linearize(ControllerSpec(tau=0.5)), 1.0)
    assert g.phase == pytest.approx(-math.pi / 4, abs=1e-12)
    assert g.magnitude == pytest.approx(1.0101525445522108, abs=1e-12)


def test_rejects_nonpositive_omega():
    with pytest.raises(ValueError):
        transfer_at(DEFAULT, 0.0)
    with pytest.raises(ValueError):
        transfer_sweep(DEFAULT, [1.0, -1.0])


def test_singularity():
    # f_p = 1 and f_self = phi put a denominator root at s = j
    g = LinearGains(f_p=1.0, f_self=0.1, f_lead=0.0, phi=0.1)
    with pytest.raises(SingularityError):
        transfer_at(g, 1.0)


@given(specs, st.floats(0.01, 50.0))
def test_conjugate_symmetry(spec, w):
    g = linearize(spec)
    a = complex(evaluate_rational(g, 1j * w))
    b = complex(evaluate_rational(g, -1j * w))
    assert a == pytest.approx(b.conjugate(), rel=1e-12, abs=1e-14)
    assert transfer_at(g, w).value == pytest.approx(a, rel=1e-12, abs=1e-14)


@given(specs, st.floats(1e-4, 1e-2))
def test_low_frequency_order(spec, w):
    fr = transfer_at(linearize(spec), w)
    # |G| = 1 + O(w^2) and response time -> tau + O(w^2)
    assert abs(fr.magnitude - 1) < 50 * w * w * (1 + spec.tau**2 + spec.k_v**2 + 1 / spec.k_s**2)
    assert fr.response_time == pytest.approx(spec.tau, abs=1e3 * w * w + 1e-12)


@given(specs, st.floats(0.01, 20.0))
def test_magnitude_closed_form(spec, w):
    # |G|^2 with the real part (k_s - w^2) and imaginary part w (k_v + k_s tau) - phi w^3
    k_s, k_v, tau, phi = spec.k_s, spec.k_v, spec.tau, spec.phi
    num = k_s**2 + (w * k_v) ** 2
    den = (k_s - w * w) ** 2 + (w * (k_v + k_s * tau) - phi * w**3) ** 2
    assert transfer_at(linearize(spec), w).magnitude == pytest.approx(math.sqrt(num / den),
                                                                      rel=1e-12)


@given(specs)
def test_phase_continuous_and_consistent(spec):
    g = linearize(spec)
    # a root on the imaginary axis makes a genuine pi jump
    roots = np.roots([g.phi, 1.0, g.f_self, g.f_p])
    assume(np.min(np.abs(roots.real)) > 1e-2)
    grid = np.logspace(-3, 1.5, 3000)
    sw = transfer_sweep(g, grid)
    assert np.max(np.abs(np.diff(sw.phase))) < 0.5
    # continuous phase agrees with the principal value modulo 2 pi
    d = np.angle(sw.value) - sw.phase
    assert np.allclose(np.mod(d + math.pi, 2 * math.pi) - math.pi, 0.0, atol=1e-9)
    assert abs(sw.phase[0]) < 1e-2


def test_high_frequency_phase_limit():
    # relative degree two: phase tends to -pi
    sw = transfer_sweep(DEFAULT, [1.0, 10.0, 1e4])
    assert np.all(np.diff(sw.phase) < 0)
    assert sw.phase[-1] == pytest.approx(-math.pi, abs=1e-2)
    assert sw[2].principal_phase == pytest.approx(np.angle(sw.value[2]))


def test_newell_transfer():
    fr = newell_transfer(1.2, 3.0)
    assert fr.magnitude == pytest.approx(1.0, abs=1e-15)
    assert fr.phase == pytest.approx(-3.6)
    assert fr.response_time == pytest.approx(1.2)
    with pytest.raises(ValueError):
        newell_transfer(0.0, 1.0)


def test_from_polar_roundtrip():
    fr = FrequencyResponse.from_polar(2.0, 0.5, -4.0)
    assert fr.value == pytest.approx(cmath.rect(0.5, -4.0))
    assert fr.phase == -4.0


def test_margin_values():
    sup, arg = string_stability_margin(DEFAULT, np.logspace(-3, 1, 4000))
    assert sup == pytest.approx(0.99999908, abs=1e-8)
    assert arg == pytest.approx(1e-3)
    sup, _ = string_stability_margin(linearize(ControllerSpec(k_v=0.2)), np.logspace(-3, 1, 4000))
    assert sup == pytest.approx(1.00111, abs=1e-5)
    sup, _ = string_stability_margin(lambda w: np.exp(-1j * w * 1.2))
    assert sup == pytest.approx(1.0, abs=1e-15)
    assert len(DEFAULT_OMEGA_GRID) == 2000


@pytest.mark.parametrize("grid", [[], [0.0, 1.0], [2.0, 1.0]])
def test_margin_grid_validation(grid):
    with pytest.raises(ValueError):
        string_stability_margin(DEFAULT, grid)
