"""Gravity-induced collapse of the mass-eigenstate superposition.

Every Newtonian energy below carries the coupling G = 1/m_P^2, so results
come out in eV. The damping exponent of a pair (j, k) is the integral of
that energy along the baseline, starting at the decoherence onset D where
it first reaches zero.
"""
import logging
import math

import numpy as np
from scipy.stats import qmc

from src.constants import DEFAULT_CONSTANTS, grams_to_ev, planck_time_seconds
from src.models import (
    CollapseParams,
    Flavor,
    MassSpectrum,
    MixingMatrix,
    PairDamping,
    PhysicalConstants,
    SphericalMassDistribution,
)
from src.oscillation import coherence_probability_matrix, probability_matrix

logger = logging.getLogger(__name__)

PAIRS = ((1, 2), (1, 3), (2, 3))
MIN_RESOLUTION = 10  # log2 of the sample count


# --- Gravitational self-energy of the difference ---

def uniform_sphere_self_energy(m: float, a: float) -> float:
    """Closed form of the double integral rho(r) rho(r')/|r - r'| over one uniform sphere."""
    return 6 * m * m / (5 * a)


def _unit_ball(points: np.ndarray) -> np.ndarray:
    radius = np.cbrt(points[:, 0])
    cos_theta = 2 * points[:, 1] - 1
    sin_theta = np.sqrt(1 - cos_theta**2)
    phi = 2 * math.pi * points[:, 2]
    return radius[:, None] * np.column_stack(
        (sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta)
    )


def _pair_integral(
    a: SphericalMassDistribution,
    b: SphericalMassDistribution,
    p: np.ndarray,
    q: np.ndarray,
) -> float:
    r = np.asarray(a.center) + a.radius * p
    r_prime = np.asarray(b.center) + b.radius * q
    distance = np.linalg.norm(r - r_prime, axis=1)
    return a.mass * b.mass * float(np.mean(1.0 / distance))


def delta_e_numeric(
    rho1: SphericalMassDistribution,
    rho2: SphericalMassDistribution | None,
    xi: float,
    resolution: int = 17,
    seed: int = 0,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """4 pi xi / m_P^2 times the double integral of the density difference.

    The six-dimensional integral is sampled with a scrambled Sobol sequence of
    2**resolution points. The same points serve every term, so two identical
    distributions cancel exactly. ``rho2=None`` means an empty second state.
    """
    if resolution < MIN_RESOLUTION:
        raise ValueError(
            f"resolution {resolution} is below the minimum of {MIN_RESOLUTION}"
        )
    if xi < 0:
        raise ValueError(f"xi must be non-negative, got {xi}")
    if rho2 is not None and rho1 != rho2:
        d = math.dist(rho1.center, rho2.center)
        if d < rho1.radius + rho2.radius:
            logger.warning(
                f"spheres overlap (d = {d:.3e}, radii {rho1.radius:.3e}, "
                f"{rho2.radius:.3e}); the two-body closed form does not apply"
            )

    sampler = qmc.Sobol(d=6, scramble=True, seed=seed)
    points = sampler.random_base2(m=resolution)
    p, q = _unit_ball(points[:, :3]), _unit_ball(points[:, 3:])

    integral = _pair_integral(rho1, rho1, p, q)
    if rho2 is not None:
        integral += _pair_integral(rho2, rho2, p, q) - 2 * _pair_integral(rho1, rho2, p, q)
    logger.debug(f"Sobol estimate with 2**{resolution} points: {integral:.6e}")
    return 4 * math.pi * xi * integral / constants.planck_mass_mP**2


def delta_e_pairwise(
    m_j: float,
    m_k: float,
    a_j: float,
    a_k: float,
    d: float,
    xi: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """Two uniform spheres of radii a_j, a_k displaced by d (point-separation form)."""
    if not d > 0:
        raise ValueError(f"displacement must be positive, got {d}")
    if m_j < 0 or m_k < 0:
        raise ValueError(f"masses must be non-negative, got {m_j}, {m_k}")

    def self_term(m: float, a: float) -> float:
        if m == 0:
            return 0.0
        if not a > 0:
            raise ValueError(f"effective radius must be positive, got {a}")
        return 3 * m * m / (5 * a)

    bracket = self_term(m_j, a_j) + self_term(m_k, a_k) - m_j * m_k / d
    return 8 * math.pi * xi * bracket / constants.planck_mass_mP**2


def separation(E: float, dm2: float, L: float) -> float:
    """Displacement between the two mass eigenstates after a baseline L."""
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    return abs(dm2) * L / (2 * E * E)


# --- Baseline dependence ---

def _coefficients(
    m_j: float, m_k: float, E: float, dm2: float, params: CollapseParams
) -> tuple[float, float]:
    a = 3 * (m_j + m_k) / (5 * params.fermi_constant)
    b = 2 * m_j * m_k * E * E / abs(dm2)
    return a, b


def _prefactor(params: CollapseParams) -> float:
    return 8 * math.pi * params.xi / params.planck_mass**2


def delta_e_of_baseline(
    m_j: float,
    m_k: float,
    E: float,
    dm2: float,
    L: float,
    params: CollapseParams,
) -> float:
    if not (m_j > 0 and m_k > 0):
        raise ValueError(f"masses must be positive, got {m_j}, {m_k}")
    if dm2 == 0:
        raise ValueError("degenerate pair: dm2 = 0 never separates")
    if not L > 0:
        raise ValueError(f"baseline must be positive, got {L}")
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    a, b = _coefficients(m_j, m_k, E, dm2, params)
    return _prefactor(params) * (a - b / L)


def decoherence_onset(
    m_j: float,
    m_k: float,
    E: float,
    dm2: float,
    params: CollapseParams,
) -> float | None:
    """Baseline D where the energy ill-definedness reaches zero.

    Returns None for a pair that never separates (a massless state or dm2 = 0).
    """
    if m_j * m_k == 0 or dm2 == 0:
        return None
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    return (
        10 * params.fermi_constant * m_j * m_k * E * E
        / (3 * (m_j + m_k) * abs(dm2))
    )


def damping_exponent(
    m_j: float,
    m_k: float,
    E: float,
    dm2: float,
    L: float,
    params: CollapseParams,
) -> float:
    """Integral of the energy ill-definedness from D to L; zero for L <= D."""
    if L < 0:
        raise ValueError(f"baseline must be non-negative, got {L}")
    onset = decoherence_onset(m_j, m_k, E, dm2, params)
    if onset is None or L <= onset:
        return 0.0
    _, b = _coefficients(m_j, m_k, E, dm2, params)
    # A (L - D) - B ln(L/D) = B (u - ln(1 + u)) with u = (L - D)/D
    u = (L - onset) / onset
    return _prefactor(params) * b * (u - math.log1p(u))


def pair_dampings(
    spectrum: MassSpectrum, E: float, L: float, params: CollapseParams
) -> list[PairDamping]:
    dampings = []
    for j, k in PAIRS:
        m_j, m_k = spectrum.mass(j), spectrum.mass(k)
        dm2 = spectrum.dm2(j, k)
        onset = decoherence_onset(m_j, m_k, E, dm2, params)
        if onset is None:
            logger.debug(f"pair ({j},{k}) is degenerate, no damping")
        dampings.append(
            PairDamping(
                j=j,
                k=k,
                onset_D=onset,
                exponent=damping_exponent(m_j, m_k, E, dm2, L, params),
            )
        )
    return dampings


def damping_matrix(
    spectrum: MassSpectrum, E: float, L: float, params: CollapseParams
) -> np.ndarray:
    gamma = np.zeros((3, 3))
    for pair in pair_dampings(spectrum, E, L, params):
        gamma[pair.j - 1, pair.k - 1] = gamma[pair.k - 1, pair.j - 1] = pair.exponent
    return gamma


# --- Damped probabilities ---

def damped_probability_matrix(
    u: MixingMatrix,
    spectrum: MassSpectrum,
    E: float,
    L: float,
    params: CollapseParams,
) -> np.ndarray:
    gamma = damping_matrix(spectrum, E, L, params)
    if not np.any(gamma):
        return probability_matrix(u, spectrum, E, L)
    return coherence_probability_matrix(u, spectrum, E, L, gamma)


def damped_transition_probability(
    u: MixingMatrix,
    spectrum: MassSpectrum,
    E: float,
    L: float,
    alpha: Flavor | int,
    beta: Flavor | int,
    params: CollapseParams,
) -> float:
    p = damped_probability_matrix(u, spectrum, E, L, params)
    return float(p[Flavor(alpha), Flavor(beta)])


# --- Order-of-magnitude mean life ---

def mean_life_estimate(
    m: float,
    delta_r: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float:
    """T ~ delta_r / m^2 in Planck units, returned in seconds.

    ``m`` is in grams and ``delta_r`` in meters. The 8 pi xi and geometric
    factors are dropped.
    """
    if not (m > 0 and delta_r > 0):
        raise ValueError(f"mass and spread must be positive, got {m} g, {delta_r} m")
    mass_ratio = grams_to_ev(m, constants) / constants.planck_mass_mP
    length_ratio = delta_r / constants.planck_length_lP
    return length_ratio / mass_ratio**2 * planck_time_seconds(constants)
