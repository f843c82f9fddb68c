"""Where in (E, L) the collapse damping becomes visible, and what it bounds.

Substituting the observability condition dm2 = 4 pi E / L into the damping
exponent makes the ratio L/D independent of L:

    x = L / D = 6 pi (m_j + m_k) / (5 G_F m_j m_k E)

so the exponent grows linearly in L as long as x > 1, and vanishes for
x <= 1. The energy E* where x = 1 closes the observable window.
"""
import logging
import math

import numpy as np

from src.collapse import damped_probability_matrix, damping_exponent, decoherence_onset, pair_dampings
from src.constants import DEFAULT_CONSTANTS, lightyears_to_natural, natural_to_lightyears
from src.flux import detector_flux, ratio_deviation
from src.models import (
    CollapseParams,
    FlavorFlux,
    MassSpectrum,
    MixingMatrix,
    ObservabilityWindow,
    OutOfWindowError,
    PhysicalConstants,
    ScanCell,
    ScanGrid,
)
from src.oscillation import probability_matrix, warn_if_nonrelativistic
from src.roots import find_root, solve_bracketed

logger = logging.getLogger(__name__)


def _check_masses(m_j: float, m_k: float) -> None:
    if not (m_j > 0 and m_k > 0):
        raise ValueError(f"masses must be positive, got {m_j}, {m_k}")


def matched_dm2(E: float, L: float) -> float:
    """Splitting whose oscillation length equals the baseline, 4 pi E / L."""
    if not (E > 0 and L > 0):
        raise ValueError(f"energy and baseline must be positive, got {E}, {L}")
    return 4 * math.pi * E / L


def onset_ratio(
    m_j: float, m_k: float, E: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """L/D under the observability condition."""
    _check_masses(m_j, m_k)
    return 6 * math.pi * (m_j + m_k) / (5 * constants.fermi_constant_GF * m_j * m_k * E)


# --- Observability length ---

def minimal_observability_length(
    m_j: float, m_k: float, xi: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Low-energy limit of the observability length, in eV^-1."""
    _check_masses(m_j, m_k)
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")
    return (
        constants.planck_mass_mP**2 * 5 * constants.fermi_constant_GF
        / (8 * math.pi * xi * 3 * (m_j + m_k))
    )


def observability_length(
    m_j: float,
    m_k: float,
    E: float,
    xi: float,
    threshold: float = 1.0,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Baseline (eV^-1) at which the damping exponent reaches ``threshold``.

    Raises OutOfWindowError at and beyond E*, where no finite length exists.
    """
    _check_masses(m_j, m_k)
    if not (E > 0 and xi > 0 and threshold > 0):
        raise ValueError(f"energy, xi and threshold must be positive, got {E}, {xi}, {threshold}")
    x = onset_ratio(m_j, m_k, E, constants)
    if x <= 1:
        raise OutOfWindowError(
            f"no finite observability length at E = {E:.6g} eV "
            f"(decoherence onset is beyond the baseline)"
        )
    # 3(m_j+m_k)/5G_F - (m_j m_k E/2pi) ln(e x), written without cancellation
    u = x - 1
    bracket = m_j * m_k * E / (2 * math.pi) * (u - math.log1p(u))
    if not bracket > 0:
        raise OutOfWindowError(f"no finite observability length at E = {E:.6g} eV")
    return threshold * constants.planck_mass_mP**2 / (8 * math.pi * xi * bracket)


# --- Energy window ---

def window_energy_closed_form(
    m_j: float, m_k: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    _check_masses(m_j, m_k)
    return 6 * math.pi * (m_j + m_k) / (5 * constants.fermi_constant_GF * m_j * m_k)


def max_observable_energy(
    m_j: float, m_k: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Energy E* above which the decoherence onset outruns any matched baseline."""
    _check_masses(m_j, m_k)
    params = CollapseParams(xi=1.0, constants=constants)
    reference_L = 1.0

    def log_ratio(E: float) -> float:
        onset = decoherence_onset(m_j, m_k, E, matched_dm2(E, reference_L), params)
        return math.log(reference_L / onset)

    guess = (m_j + m_k) / (constants.fermi_constant_GF * m_j * m_k)
    try:
        energy = find_root(log_ratio, guess)
    except RuntimeError as e:
        raise RuntimeError(f"could not bracket the energy window edge: {e}") from e
    logger.debug(f"E* = {energy:.6e} eV for masses {m_j}, {m_k}")
    return energy


def observability_window(
    m_j: float,
    m_k: float,
    xi: float,
    l_max_ly: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> ObservabilityWindow:
    """Energies with an observability length no longer than ``l_max_ly``."""
    l_min = minimal_observability_length(m_j, m_k, xi, constants)
    l_max = lightyears_to_natural(l_max_ly, constants)
    if l_max <= l_min:
        raise OutOfWindowError(
            f"maximal baseline {l_max_ly:.3g} ly is below the minimal observability "
            f"length {natural_to_lightyears(l_min, constants):.3g} ly"
        )
    e_star = max_observable_energy(m_j, m_k, constants)

    def excess(E: float) -> float:
        return math.log(observability_length(m_j, m_k, E, xi, constants=constants) / l_max)

    e_upper = solve_bracketed(excess, e_star * 1e-12, e_star * (1 - 1e-9))
    return ObservabilityWindow(
        energy_range=(0.0, e_upper),
        baseline_range=(natural_to_lightyears(l_min, constants), l_max_ly),
        xi=xi,
        masses=(m_j, m_k),
    )


# --- Bounds on xi ---

def xi_upper_bound(
    m_j: float,
    m_k: float,
    E: float,
    L: float,
    damping_threshold: float = 1.0,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Largest xi whose damping exponent stays below the threshold at (E, L)."""
    _check_masses(m_j, m_k)
    if not damping_threshold > 0:
        raise ValueError(f"damping threshold must be positive, got {damping_threshold}")
    unit = CollapseParams(xi=1.0, constants=constants)
    exponent = damping_exponent(m_j, m_k, E, matched_dm2(E, L), L, unit)
    if exponent == 0:
        raise OutOfWindowError(
            f"unbounded: no damping accumulates at E = {E:.6g} eV, L = {L:.6g} eV^-1"
        )
    return damping_threshold / exponent


# --- Grid scans ---

def _check_grid(values: list[float], name: str) -> None:
    if len(values) == 0:
        raise ValueError(f"{name} grid is empty")
    if any(v <= 0 for v in values):
        raise ValueError(f"{name} grid must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} grid must be strictly increasing")


def scan_window(
    u: MixingMatrix,
    spectrum: MassSpectrum,
    xi: float,
    E_grid: list[float],
    L_grid_ly: list[float],
    source: FlavorFlux,
    window_pair: tuple[int, int] = (1, 2),
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> ScanGrid:
    """Evaluate every (E, L) cell; cells are ordered by energy, then baseline."""
    _check_grid(E_grid, "energy")
    _check_grid(L_grid_ly, "baseline")
    params = CollapseParams(xi=xi, constants=constants)
    j, k = window_pair
    m_j, m_k = spectrum.mass(j), spectrum.mass(k)
    warn_if_nonrelativistic(spectrum, min(E_grid))

    grid = ScanGrid(energies_eV=list(E_grid), baselines_ly=list(L_grid_ly), xi=xi)
    for e_index, E in enumerate(E_grid):
        for l_index, L_ly in enumerate(L_grid_ly):
            L = lightyears_to_natural(L_ly, constants)
            dm2 = matched_dm2(E, L)
            onset = decoherence_onset(m_j, m_k, E, dm2, params)
            window_exponent = damping_exponent(m_j, m_k, E, dm2, L, params)
            gammas = {f"{p.j}{p.k}": p.exponent for p in pair_dampings(spectrum, E, L, params)}
            p_undamped = probability_matrix(u, spectrum, E, L)
            p_damped = damped_probability_matrix(u, spectrum, E, L, params)
            deviation = ratio_deviation(
                detector_flux(p_undamped, source), detector_flux(p_damped, source)
            )
            grid.cells.append(
                ScanCell(
                    e_index=e_index,
                    l_index=l_index,
                    energy_eV=E,
                    baseline_ly=L_ly,
                    matched_dm2=dm2,
                    onset_D_ly=None if onset is None else natural_to_lightyears(onset, constants),
                    window_exponent=window_exponent,
                    gammas=gammas,
                    p_undamped=p_undamped,
                    p_damped=p_damped,
                    deviation=deviation,
                )
            )
    logger.info(f"Scanned {len(grid.cells)} cells ({len(E_grid)} energies x {len(L_grid_ly)} baselines)")
    return grid


def geometric_grid(lo: float, hi: float, num: int) -> list[float]:
    if num == 1:
        return [lo]
    return [float(v) for v in np.geomspace(lo, hi, num)]
