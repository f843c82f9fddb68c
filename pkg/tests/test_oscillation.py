import logging
import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from src.collapse import damped_probability_matrix
from src.constants import lightyears_to_natural, natural_to_meters
from src.flavor import build_mixing_matrix, tribimaximal_angles
from src.models import Beam, CollapseParams, Flavor, MassSpectrum, MixingAngles
from src.oscillation import (
    _clamp,
    band_averaged_probability,
    coherence_probability_matrix,
    consistent_coherence,
    momentum,
    momentum_approx,
    momentum_deficit,
    oscillation_length,
    phase_averaged_matrix,
    probability_matrix,
    quantum_phase,
    transition_probability,
    warn_if_nonrelativistic,
)

angle = st.floats(min_value=0, max_value=math.pi / 2)
mass = st.one_of(st.just(0.0), st.floats(min_value=1e-4, max_value=3))


def _make_mixing(delta_cp=0.0):
    return build_mixing_matrix(
        MixingAngles(theta12=0.5873, theta13=0.1489, theta23=0.8305, delta_cp=delta_cp)
    )


def _make_spectrum():
    return MassSpectrum(m1=0.0, m2=0.0087, m3=0.0505)


# --- Kinematics tests ---

def test_momentum_ultra_relativistic():
    assert momentum(1e9, 2.0) == pytest.approx(1e9, rel=1e-15)


def test_momentum_deficit_survives_cancellation():
    assert momentum_deficit(1e9, 2.0) == pytest.approx(2e-9, rel=1e-9)


def test_momentum_approx_matches_exact_when_relativistic():
    assert momentum_approx(1e3, 1.0) == pytest.approx(momentum(1e3, 1.0), rel=1e-12)


def test_momentum_rejects_mass_above_energy():
    with pytest.raises(ValueError, match="not below"):
        momentum(1.0, 2.0)


def test_momentum_warns_outside_relativistic_regime(caplog):
    with caplog.at_level(logging.WARNING):
        momentum(10.0, 0.1)
    assert "m/E" in caplog.text


def test_warn_if_nonrelativistic(caplog):
    spectrum = MassSpectrum(m1=2.0, m2=2.0, m3=2.0)
    with caplog.at_level(logging.WARNING):
        assert warn_if_nonrelativistic(spectrum, 100.0)
        assert not warn_if_nonrelativistic(spectrum, 1e20)
    assert caplog.text.count("max(m_j)/E") == 1


# --- Phase tests ---

def test_oscillation_length_atmospheric():
    L_O = oscillation_length(1e9, 2.5e-3)
    assert L_O == pytest.approx(5.0265e12, rel=1e-4)
    assert natural_to_meters(L_O) == pytest.approx(9.92e5, rel=1e-3)


def test_phase_is_two_pi_after_one_oscillation_length():
    L_O = oscillation_length(1e9, 2.5e-3)
    assert quantum_phase(1e9, 2.5e-3, L_O) == pytest.approx(2 * math.pi)


def test_oscillation_length_needs_positive_dm2():
    with pytest.raises(ValueError, match="positive dm2"):
        oscillation_length(1e9, 0.0)


# --- probability_matrix tests ---

def test_zero_baseline_is_identity():
    p = probability_matrix(_make_mixing(1.2), _make_spectrum(), 1e9, 0.0)
    np.testing.assert_allclose(p, np.eye(3), atol=1e-15)


def test_negative_baseline_rejected():
    with pytest.raises(ValueError, match="baseline"):
        probability_matrix(_make_mixing(), _make_spectrum(), 1e9, -1.0)


def test_two_flavor_limit():
    u = build_mixing_matrix(MixingAngles(theta12=math.pi / 8, theta13=0.0, theta23=0.0))
    spectrum = MassSpectrum(m1=0.0, m2=0.01, m3=0.0, dm2_21=1e-4, dm2_32=-1e-4)
    E, L = 1e6, 3e10
    p = probability_matrix(u, spectrum, E, L)
    expected = math.sin(math.pi / 4) ** 2 * math.sin(1e-4 * L / (4 * E)) ** 2
    assert p[Flavor.E, Flavor.MU] == pytest.approx(expected, abs=1e-12)
    assert p[Flavor.TAU, Flavor.TAU] == pytest.approx(1.0, abs=1e-12)


def test_two_flavor_period_is_oscillation_length():
    u = build_mixing_matrix(MixingAngles(theta12=math.pi / 8, theta13=0.0, theta23=0.0))
    spectrum = MassSpectrum(m1=0.0, m2=0.01, m3=0.0, dm2_21=1e-4, dm2_32=-1e-4)
    E = 1e6
    period = oscillation_length(E, 1e-4)
    for L in (0.0, 3e10, 0.37 * period):
        np.testing.assert_allclose(
            probability_matrix(u, spectrum, E, L + period),
            probability_matrix(u, spectrum, E, L),
            atol=1e-10,
        )


def test_zero_theta13_makes_delta_irrelevant():
    spectrum = _make_spectrum()
    matrices = [
        probability_matrix(
            build_mixing_matrix(
                MixingAngles(theta12=0.5873, theta13=0.0, theta23=0.8305, delta_cp=delta)
            ),
            spectrum,
            1e9,
            3e12,
        )
        for delta in (0.0, 1.2, 4.0)
    ]
    for p in matrices[1:]:
        np.testing.assert_allclose(p, matrices[0], atol=1e-14)


@settings(max_examples=1000, deadline=None)
@given(
    angle, angle, angle,
    st.floats(min_value=0, max_value=6.28),
    mass, mass, mass,
    st.floats(min_value=1e6, max_value=1e24),
    st.floats(min_value=0, max_value=1e35),
    st.floats(min_value=0, max_value=1.0),
)
@example(0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.375, 2.28e14, 8.87e34, 1.0)
def test_rows_conserve_probability(t12, t13, t23, delta, m1, m2, m3, E, L, xi):
    u = build_mixing_matrix(MixingAngles(theta12=t12, theta13=t13, theta23=t23, delta_cp=delta))
    spectrum = MassSpectrum(m1=m1, m2=m2, m3=m3)
    for p in (
        probability_matrix(u, spectrum, E, L),
        damped_probability_matrix(u, spectrum, E, L, CollapseParams(xi=xi)),
    ):
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-10)
        assert p.min() >= -1e-12
        assert p.max() <= 1 + 1e-12


@given(st.floats(min_value=0.01, max_value=6.27), st.floats(min_value=0, max_value=1e13))
def test_cp_conjugation_transposes(delta, L):
    spectrum = _make_spectrum()
    p = probability_matrix(_make_mixing(delta), spectrum, 1e9, L)
    p_conj = probability_matrix(_make_mixing(2 * math.pi - delta), spectrum, 1e9, L)
    np.testing.assert_allclose(p, p_conj.T, atol=1e-12)


def test_transition_probability_reads_matrix():
    u, spectrum = _make_mixing(), _make_spectrum()
    beam = Beam(energy_E=1e9, baseline_L=2.5e12, source_flavor=Flavor.MU)
    expected = probability_matrix(u, spectrum, 1e9, 2.5e12)[Flavor.MU, Flavor.E]
    assert transition_probability(u, spectrum, beam, Flavor.E) == expected


# --- Coherence and averaging tests ---

def test_coherence_form_matches_amplitude_form():
    u, spectrum = _make_mixing(0.7), _make_spectrum()
    np.testing.assert_allclose(
        coherence_probability_matrix(u, spectrum, 1e9, 4e12),
        probability_matrix(u, spectrum, 1e9, 4e12),
        atol=1e-12,
    )


def test_strong_damping_reaches_phase_average():
    u, spectrum = _make_mixing(0.7), _make_spectrum()
    damping = np.full((3, 3), 50.0)
    np.testing.assert_allclose(
        coherence_probability_matrix(u, spectrum, 1e9, 4e12, damping),
        phase_averaged_matrix(u),
        atol=1e-12,
    )


def test_rows_conserved_over_cosmological_grid():
    u = _make_mixing(0.0)
    spectrum = MassSpectrum(m1=2.0, m2=2.0, m3=2.0, dm2_21=7.5e-5, dm2_32=2.5e-3)
    params = CollapseParams(xi=1e-2)
    for E in np.geomspace(1e12, 1e20, 17):
        for L_ly in np.geomspace(1e8, 1.5e10, 9):
            p = damped_probability_matrix(u, spectrum, E, lightyears_to_natural(L_ly), params)
            np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)


def test_coherence_from_huge_phases_stays_valid():
    u, spectrum = _make_mixing(1.1), _make_spectrum()
    damping = np.full((3, 3), 0.3)
    p = coherence_probability_matrix(u, spectrum, 1e9, 1e25, damping)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert p.min() >= 0.0


def test_consistent_coherence_keeps_valid_pattern():
    damping = np.array([[0.0, 0.2, 0.5], [0.2, 0.0, 0.4], [0.5, 0.4, 0.0]])
    np.testing.assert_array_equal(
        consistent_coherence(damping), np.where(np.eye(3) == 1, 1.0, np.exp(-damping))
    )


def test_consistent_coherence_repairs_mixed_pattern(caplog):
    # one undamped pair next to two unequally damped ones
    damping = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.3], [0.0, 1.3, 0.0]])
    with caplog.at_level(logging.WARNING):
        g = consistent_coherence(damping)
    assert "not positive semidefinite" in caplog.text
    np.testing.assert_allclose(np.diag(g), 1.0)
    np.testing.assert_allclose(g, g.T)
    assert np.linalg.eigvalsh(g).min() >= -1e-12


def test_massless_state_with_damped_partners_conserves_rows():
    u = build_mixing_matrix(MixingAngles(theta12=0.0, theta13=1.0, theta23=1.0))
    spectrum = MassSpectrum(m1=0.0, m2=1.0, m3=0.375)
    p = damped_probability_matrix(u, spectrum, 2.28e14, 8.87e34, CollapseParams(xi=1.0))
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-10)
    assert p.min() >= 0.0


@pytest.mark.parametrize("L_ly", [1e9, 1e10, 1e11])
def test_massless_state_in_standard_spectrum(L_ly):
    u = _make_mixing(0.0)
    p = damped_probability_matrix(
        u, _make_spectrum(), 1e9, lightyears_to_natural(L_ly), CollapseParams(xi=1.0)
    )
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-10)


def test_damping_approaches_phase_average_monotonically():
    u = _make_mixing(0.0)
    spectrum = MassSpectrum(m1=2.0, m2=2.0, m3=2.0, dm2_21=7.5e-5, dm2_32=2.5e-3)
    E, L = 1e20, lightyears_to_natural(15e9)
    average = phase_averaged_matrix(u)
    distances = [
        np.abs(damped_probability_matrix(u, spectrum, E, L, CollapseParams(xi=xi)) - average).max()
        for xi in (0.0, 1e-2, 1e-1, 1.0, 10.0)
    ]
    assert all(b <= a + 1e-15 for a, b in zip(distances, distances[1:]))
    assert distances[-1] < 1e-10


def test_negative_damping_rejected():
    with pytest.raises(ValueError, match="non-negative"):
        coherence_probability_matrix(
            _make_mixing(), _make_spectrum(), 1e9, 1e12, -np.ones((3, 3))
        )


def test_tribimaximal_average_survival():
    p = phase_averaged_matrix(build_mixing_matrix(tribimaximal_angles()))
    assert p[Flavor.E, Flavor.E] == pytest.approx(5 / 9, abs=1e-12)


def test_band_average_zero_width_is_point_value():
    u, spectrum = _make_mixing(), _make_spectrum()
    point = probability_matrix(u, spectrum, 1e9, 2.5e12)[Flavor.MU, Flavor.E]
    assert band_averaged_probability(u, spectrum, 1e9, 0.0, 2.5e12, Flavor.MU, Flavor.E, 50) == point


def test_band_average_washes_out_fast_oscillation():
    u, spectrum = _make_mixing(), _make_spectrum()
    E, L = 1e9, 1e17
    averaged = band_averaged_probability(u, spectrum, E, 0.5, L, Flavor.E, Flavor.E, 20001)
    assert averaged == pytest.approx(phase_averaged_matrix(u)[0, 0], abs=2e-2)


def test_band_average_rejects_bad_width():
    with pytest.raises(ValueError, match="relative width"):
        band_averaged_probability(_make_mixing(), _make_spectrum(), 1e9, 1.5, 1e12, 0, 0, 10)


def test_clamp_warns_beyond_rounding(caplog):
    with caplog.at_level(logging.WARNING):
        clipped = _clamp(np.array([[1.1, -0.1]]))
    assert "outside [0, 1]" in caplog.text
    np.testing.assert_array_equal(clipped, [[1.0, 0.0]])
