"""Unitary vacuum oscillations.

Energies are in eV, baselines in eV^-1. The common phase e^{-iEL} is dropped,
so every mass eigenstate carries the phase (m_j^2 - m_1^2) L / 2E.
"""
import logging
import math

import numpy as np

from src.models import Beam, Flavor, MassSpectrum, MixingMatrix

logger = logging.getLogger(__name__)

# max(m_j)/E above this leaves the ultra-relativistic regime
RELATIVISTIC_LIMIT = 1e-3
PROBABILITY_SLACK = 1e-12
COHERENCE_SLACK = 1e-12


def _check_energy(E: float) -> None:
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")


def _check_baseline(L: float) -> None:
    if L < 0:
        raise ValueError(f"baseline must be non-negative, got {L}")


def warn_if_nonrelativistic(spectrum: MassSpectrum, E: float) -> bool:
    ratio = max(spectrum.masses) / E
    if ratio >= RELATIVISTIC_LIMIT:
        logger.warning(
            f"max(m_j)/E = {ratio:.3g} at E = {E:.6g} eV; "
            f"the equal-energy dispersion approximation degrades"
        )
        return True
    return False


# --- Kinematics ---

def momentum(E: float, m: float) -> float:
    """Exact momentum sqrt(E^2 - m^2) of a mass eigenstate at energy E."""
    _check_energy(E)
    if m < 0:
        raise ValueError(f"mass must be non-negative, got {m}")
    if m >= E:
        raise ValueError(f"mass {m} eV is not below the energy {E} eV")
    if m / E >= RELATIVISTIC_LIMIT:
        exact = math.sqrt((E - m) * (E + m))
        approx = momentum_approx(E, m)
        logger.warning(
            f"m/E = {m / E:.3g}: exact and second-order momenta differ by "
            f"{abs(exact - approx) / exact:.3g} relative"
        )
    return math.sqrt((E - m) * (E + m))


def momentum_approx(E: float, m: float) -> float:
    """Second-order approximant E - m^2/2E."""
    _check_energy(E)
    return E - m * m / (2 * E)


def momentum_deficit(E: float, m: float) -> float:
    """E - p, evaluated as m^2/(E + p) so it survives m << E."""
    return m * m / (E + momentum(E, m))


# --- Phases ---

def oscillation_length(E: float, dm2: float) -> float:
    _check_energy(E)
    if not dm2 > 0:
        raise ValueError(f"oscillation length needs a positive dm2, got {dm2}")
    return 4 * math.pi * E / dm2


def quantum_phase(E: float, dm2: float, L: float) -> float:
    """Phi = 2 pi L / L_O = dm2 L / 2E."""
    _check_energy(E)
    return dm2 * L / (2 * E)


def _mass_phases(spectrum: MassSpectrum, E: float, L: float) -> np.ndarray:
    # m_j^2 - m_1^2 taken from the first row of the splitting matrix
    return spectrum.dm2_matrix()[0] * L / (2 * E)


# --- Probabilities ---

def probability_matrix(
    u: MixingMatrix, spectrum: MassSpectrum, E: float, L: float
) -> np.ndarray:
    """P[a, b] = |sum_j U*_aj exp(-i m_j^2 L/2E) U_bj|^2 for all flavor pairs."""
    _check_energy(E)
    _check_baseline(L)
    phases = np.exp(-1j * _mass_phases(spectrum, E, L))
    amplitudes = u.u.conj() @ np.diag(phases) @ u.u.T
    return _clamp(np.abs(amplitudes) ** 2)


def consistent_coherence(damping: np.ndarray) -> np.ndarray:
    """Coherence factors exp(-damping) with unit diagonal, made positive semidefinite.

    Independently computed pair exponents need not form a valid pattern (a
    zero exponent next to two unequal ones, say), and an invalid one yields
    negative probabilities. Negative eigenvalues are then clipped and the
    diagonal rescaled back to one.
    """
    g = np.exp(-np.asarray(damping, dtype=float))
    np.fill_diagonal(g, 1.0)
    eigenvalues, vectors = np.linalg.eigh(g)
    if eigenvalues.min() >= -COHERENCE_SLACK:
        return g
    logger.warning(
        f"pair damping pattern is not positive semidefinite (smallest eigenvalue "
        f"{eigenvalues.min():.3e}); projecting onto the nearest valid one"
    )
    clipped = (vectors * np.clip(eigenvalues, 0.0, None)) @ vectors.T
    scale = 1.0 / np.sqrt(np.diag(clipped))
    projected = clipped * np.outer(scale, scale)
    np.fill_diagonal(projected, 1.0)
    return projected


def coherence_probability_matrix(
    u: MixingMatrix,
    spectrum: MassSpectrum,
    E: float,
    L: float,
    damping: np.ndarray | None = None,
) -> np.ndarray:
    """Probabilities from the mass-basis coherences, each j != k term scaled by exp(-damping[j, k]).

    ``damping`` is a symmetric 3x3 matrix of exponents; its diagonal is ignored.
    """
    _check_energy(E)
    _check_baseline(L)
    gamma = np.zeros((3, 3)) if damping is None else np.array(damping, dtype=float)
    if gamma.shape != (3, 3) or np.any(gamma < 0):
        raise ValueError("damping must be a 3x3 matrix of non-negative exponents")
    np.fill_diagonal(gamma, 0.0)
    # outer product of the per-state phases keeps the pattern rank one at any phase size
    c = np.exp(-1j * _mass_phases(spectrum, E, L))
    coherences = np.outer(c, c.conj()) * consistent_coherence(gamma)
    uc = u.u.conj()
    weights = np.einsum("aj,ak,bj,bk,jk->ab", uc, u.u, u.u, uc, coherences)
    return _clamp(weights.real)


def transition_probability(
    u: MixingMatrix, spectrum: MassSpectrum, beam: Beam, beta: Flavor | int
) -> float:
    warn_if_nonrelativistic(spectrum, beam.energy_E)
    p = probability_matrix(u, spectrum, beam.energy_E, beam.baseline_L)
    return float(p[beam.source_flavor, Flavor(beta)])


def phase_averaged_matrix(u: MixingMatrix) -> np.ndarray:
    """Fully decohered limit: P[a, b] = sum_j |U_aj|^2 |U_bj|^2."""
    weights = np.abs(u.u) ** 2
    return weights @ weights.T


def band_averaged_probability(
    u: MixingMatrix,
    spectrum: MassSpectrum,
    E_center: float,
    E_relative_width: float,
    L: float,
    alpha: Flavor | int,
    beta: Flavor | int,
    n_samples: int,
) -> float:
    """Mean probability over a uniform energy grid spanning E(1 - w) .. E(1 + w)."""
    if not 0 <= E_relative_width < 1:
        raise ValueError(f"relative width must lie in [0, 1), got {E_relative_width}")
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    if n_samples == 1 or E_relative_width == 0:
        energies = np.array([E_center])
    else:
        energies = np.linspace(
            E_center * (1 - E_relative_width), E_center * (1 + E_relative_width), n_samples
        )
    alpha, beta = Flavor(alpha), Flavor(beta)
    values = [probability_matrix(u, spectrum, E, L)[alpha, beta] for E in energies]
    return float(np.mean(values))


def _clamp(p: np.ndarray) -> np.ndarray:
    if np.any(p < -PROBABILITY_SLACK) or np.any(p > 1 + PROBABILITY_SLACK):
        logger.warning(
            f"probability outside [0, 1] beyond rounding: "
            f"min {p.min():.3e}, max {p.max():.3e}"
        )
    return np.clip(p, 0.0, 1.0)
