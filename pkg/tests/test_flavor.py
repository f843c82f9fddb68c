import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.flavor import (
    angles_from_sin2,
    build_mixing_matrix,
    check_unitarity,
    flavor_amplitudes,
    mixing_from_settings,
    spectrum_from_settings,
    tribimaximal_angles,
)
from src.models import Flavor, MassSpectrum, MixingAngles, MixingMatrix, Settings

angle = st.floats(min_value=0, max_value=math.pi / 2)
phase = st.floats(min_value=0, max_value=6.28)


def _make_angles(**kw):
    defaults = dict(theta12=0.59, theta13=0.15, theta23=0.83, delta_cp=0.0)
    defaults.update(kw)
    return MixingAngles(**defaults)


# --- build_mixing_matrix tests ---

@settings(max_examples=200)
@given(angle, angle, angle, phase)
def test_mixing_matrix_is_unitary(t12, t13, t23, delta):
    u = build_mixing_matrix(MixingAngles(theta12=t12, theta13=t13, theta23=t23, delta_cp=delta))
    assert check_unitarity(u) <= 1e-12


def test_zero_phase_gives_real_matrix():
    u = build_mixing_matrix(_make_angles())
    assert np.all(u.u.imag == 0)


def test_zero_angles_give_identity():
    u = build_mixing_matrix(_make_angles(theta12=0.0, theta13=0.0, theta23=0.0))
    np.testing.assert_allclose(u.u, np.eye(3), atol=1e-15)


def test_electron_row_in_standard_parametrization():
    angles = _make_angles(delta_cp=1.0)
    u = build_mixing_matrix(angles)
    c13 = math.cos(angles.theta13)
    assert u.u[0, 0] == pytest.approx(math.cos(angles.theta12) * c13)
    assert u.u[0, 1] == pytest.approx(math.sin(angles.theta12) * c13)
    assert u.u[0, 2] == pytest.approx(math.sin(angles.theta13) * np.exp(-1j))


def test_tribimaximal_weights():
    weights = np.abs(build_mixing_matrix(tribimaximal_angles()).u) ** 2
    np.testing.assert_allclose(weights[0], [2 / 3, 1 / 3, 0], atol=1e-15)
    np.testing.assert_allclose(weights[1], [1 / 6, 1 / 3, 1 / 2], atol=1e-15)
    np.testing.assert_allclose(weights[2], [1 / 6, 1 / 3, 1 / 2], atol=1e-15)


def test_angle_out_of_range_rejected():
    with pytest.raises(ValueError):
        _make_angles(theta12=2.0)


def test_non_unitary_matrix_rejected():
    with pytest.raises(ValueError, match="not unitary"):
        MixingMatrix(u=np.ones((3, 3)))


def test_mixing_matrix_is_read_only():
    u = build_mixing_matrix(_make_angles())
    with pytest.raises(ValueError):
        u.u[0, 0] = 0.0


# --- flavor_amplitudes tests ---

def test_flavor_amplitudes_are_conjugate_row():
    u = build_mixing_matrix(_make_angles(delta_cp=2.0))
    np.testing.assert_array_equal(flavor_amplitudes(u, Flavor.MU), u.u[1].conj())
    assert np.sum(np.abs(flavor_amplitudes(u, Flavor.E)) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_flavor_amplitudes_invalid_index():
    u = build_mixing_matrix(_make_angles())
    with pytest.raises(ValueError, match="invalid flavor"):
        flavor_amplitudes(u, 3)


# --- Settings helpers tests ---

def test_angles_from_sin2():
    angles = angles_from_sin2(0.307, 0.022, 0.545)
    assert math.sin(angles.theta12) ** 2 == pytest.approx(0.307)
    assert math.sin(angles.theta23) ** 2 == pytest.approx(0.545)


def test_mixing_from_settings_wraps_phase():
    u = mixing_from_settings(Settings(delta_cp_rad=2 * math.pi + 0.5))
    expected = mixing_from_settings(Settings(delta_cp_rad=0.5))
    np.testing.assert_allclose(u.u, expected.u, atol=1e-14)


def test_mixing_from_settings_tribimaximal_preset():
    u = mixing_from_settings(Settings(mixing_preset="tribimaximal", theta13_rad=0.3))
    assert abs(u.u[0, 2]) == 0.0


def test_spectrum_from_settings_carries_splittings():
    spectrum = spectrum_from_settings(Settings())
    assert spectrum.masses == (2.0, 2.0, 2.0)
    assert spectrum.dm2(1, 2) == 7.5e-5
    assert spectrum.dm2(2, 3) == 2.5e-3


# --- MassSpectrum tests ---

def test_splittings_from_masses():
    spectrum = MassSpectrum(m1=0.0, m2=0.01, m3=0.05)
    assert spectrum.dm2(1, 2) == pytest.approx(1e-4)
    assert spectrum.dm2(2, 3) == pytest.approx(0.0025 - 1e-4)


@given(
    st.floats(min_value=0, max_value=3),
    st.floats(min_value=0, max_value=3),
    st.floats(min_value=0, max_value=3),
)
def test_splitting_matrix_identities(m1, m2, m3):
    spectrum = MassSpectrum(m1=m1, m2=m2, m3=m3)
    d = spectrum.dm2_matrix()
    np.testing.assert_array_equal(d, -d.T)
    assert spectrum.dm2(1, 2) + spectrum.dm2(2, 3) == spectrum.dm2(1, 3)


def test_explicit_splittings_override_masses():
    spectrum = MassSpectrum(m1=2.0, m2=2.0, m3=2.0, dm2_21=1e-5, dm2_32=2e-3)
    assert spectrum.dm2(1, 3) == pytest.approx(2.01e-3)
    assert spectrum.dm2(3, 1) == pytest.approx(-2.01e-3)
