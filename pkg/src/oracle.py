"""Independent reference computations for the closed forms.

Used by the test suite and by ``run.py verify``. Nothing in the primary path
imports this module.
"""
import cmath
import logging
import math
from typing import Callable

import numpy as np
from scipy.integrate import quad

from src.collapse import (
    damping_exponent,
    decoherence_onset,
    delta_e_numeric,
    delta_e_of_baseline,
    delta_e_pairwise,
)
from src.constants import DEFAULT_CONSTANTS, constants_from_settings, lightyears_to_natural
from src.flavor import build_mixing_matrix, mixing_from_settings, spectrum_from_settings
from src.models import (
    CollapseParams,
    MassSpectrum,
    MixingAngles,
    MixingMatrix,
    OracleReport,
    OutOfWindowError,
    PhysicalConstants,
    Settings,
    SphericalMassDistribution,
)
from src.observability import matched_dm2, observability_length, window_energy_closed_form
from src.oscillation import probability_matrix
from src.roots import bracket_by_scaling, find_root, solve_bracketed

logger = logging.getLogger(__name__)

ALGEBRAIC_TOLERANCE = 1e-10
QUADRATURE_TOLERANCE = 1e-9
ROOT_TOLERANCE = 1e-6
NEAR_EDGE_ROOT_TOLERANCE = 1e-4
STOCHASTIC_TOLERANCE = 1e-2
MAX_COMPARABLE_PHASE = 1e3  # rad

CHECKS = ("probability", "delta_e", "damping", "observability")


# --- Transition probabilities ---

def pair_sum_probability_matrix(
    u: MixingMatrix, spectrum: MassSpectrum, E: float, L: float
) -> np.ndarray:
    """delta_ab - sum_{j!=k} U*_aj U_ak U_bj U*_bk [1 - exp(i (m_k^2 - m_j^2) L/2E)], term by term."""
    p = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            total = complex(1.0 if a == b else 0.0)
            for j in range(3):
                for k in range(3):
                    if j == k:
                        continue
                    weight = (
                        u.u[a, j].conjugate() * u.u[a, k] * u.u[b, j] * u.u[b, k].conjugate()
                    )
                    # dm2(j, k) = m_k^2 - m_j^2, so the pair phase is +dm2 L/2E
                    phase = spectrum.dm2(j + 1, k + 1) * L / (2 * E)
                    total -= weight * (1 - cmath.exp(1j * phase))
            if abs(total.imag) > 1e-12:
                logger.warning(f"P[{a},{b}] has imaginary residue {total.imag:.3e}")
            p[a, b] = total.real
    return p


def amplitude_probability_matrix(
    u: MixingMatrix, spectrum: MassSpectrum, E: float, L: float
) -> np.ndarray:
    """|sum_j U*_aj exp(-i m_j^2 L/2E) U_bj|^2 with explicit loops."""
    squared = [spectrum.dm2(1, j) for j in (1, 2, 3)]
    p = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            amplitude = sum(
                u.u[a, j].conjugate() * cmath.exp(-1j * squared[j] * L / (2 * E)) * u.u[b, j]
                for j in range(3)
            )
            p[a, b] = abs(amplitude) ** 2
    return p


def _conditioned_baseline(spectrum: MassSpectrum, E: float, L: float) -> float:
    """L, or a shorter baseline if the largest phase exceeds MAX_COMPARABLE_PHASE.

    Beyond that the two summation orders round the phases differently by more
    than the algebraic tolerance.
    """
    largest = float(np.max(np.abs(spectrum.dm2_matrix())))
    if largest == 0 or largest * L / (2 * E) <= MAX_COMPARABLE_PHASE:
        return L
    shortened = MAX_COMPARABLE_PHASE * 2 * E / largest
    logger.info(
        f"phase {largest * L / (2 * E):.3e} rad too large to compare; "
        f"checking at L = {shortened:.6e} eV^-1 instead"
    )
    return shortened


def verify_probability(
    u: MixingMatrix,
    spectrum: MassSpectrum,
    E: float,
    L: float,
    primary: Callable[[MixingMatrix, MassSpectrum, float, float], np.ndarray] = probability_matrix,
    name: str = "probability",
) -> OracleReport:
    value = primary(u, spectrum, E, L)
    reference = pair_sum_probability_matrix(u, spectrum, E, L)
    diff = np.abs(value - reference)
    worst = np.unravel_index(np.argmax(diff), diff.shape)
    error = float(diff.max() / max(np.abs(reference).max(), 1e-300))
    return OracleReport(
        name=name,
        primary=float(value[worst]),
        oracle=float(reference[worst]),
        relative_error=error,
        tolerance=ALGEBRAIC_TOLERANCE,
        passed=error <= ALGEBRAIC_TOLERANCE,
        note=f"worst entry {worst}",
    )


# --- Gravitational self-energy ---

def verify_delta_e(
    rho_j: SphericalMassDistribution,
    rho_k: SphericalMassDistribution,
    xi: float,
    resolution: int,
    seed: int,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    name: str = "delta_e",
) -> OracleReport:
    """Sobol double integral against the two-body closed form."""
    d = math.dist(rho_j.center, rho_k.center)
    if rho_j == rho_k:
        primary = 0.0
    elif d < rho_j.radius + rho_k.radius:
        raise ValueError(
            f"spheres overlap (d = {d:.3e} < {rho_j.radius + rho_k.radius:.3e}); "
            f"the two-body closed form does not apply"
        )
    else:
        primary = delta_e_pairwise(
            rho_j.mass, rho_k.mass, rho_j.radius, rho_k.radius, d, xi, constants
        )
    numeric = delta_e_numeric(rho_j, rho_k, xi, resolution, seed, constants)
    return OracleReport.compare(
        name, primary, numeric, STOCHASTIC_TOLERANCE,
        note=f"2**{resolution} Sobol points, seed {seed}",
    )


# --- Damping exponent ---

def onset_by_bisection(
    m_j: float, m_k: float, E: float, dm2: float, params: CollapseParams
) -> float:
    """Root of the baseline-dependent energy ill-definedness, found numerically."""
    return find_root(
        lambda L: delta_e_of_baseline(m_j, m_k, E, dm2, L, params),
        guess=E / abs(dm2),
        rtol=1e-13,
        factor=10.0,
    )


def quadrature_exponent(
    m_j: float, m_k: float, E: float, dm2: float, L: float, params: CollapseParams
) -> float:
    """Adaptive quadrature of the energy ill-definedness from the onset to L."""
    if m_j * m_k == 0 or dm2 == 0:
        return 0.0
    onset = onset_by_bisection(m_j, m_k, E, dm2, params)
    if L <= onset:
        return 0.0
    # integrate in s = ln L' so that many decades stay well resolved
    value, _ = quad(
        lambda s: delta_e_of_baseline(m_j, m_k, E, dm2, math.exp(s), params) * math.exp(s),
        math.log(onset),
        math.log(L),
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return value


def verify_damping(
    m_j: float,
    m_k: float,
    E: float,
    dm2: float,
    L: float,
    xi: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    name: str = "damping",
) -> OracleReport:
    params = CollapseParams(xi=xi, constants=constants)
    primary = damping_exponent(m_j, m_k, E, dm2, L, params)
    oracle = quadrature_exponent(m_j, m_k, E, dm2, L, params)
    return OracleReport.compare(name, primary, oracle, QUADRATURE_TOLERANCE)


# --- Observability length ---

def observability_length_by_bisection(
    m_j: float,
    m_k: float,
    E: float,
    xi: float,
    threshold: float = 1.0,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> float | None:
    """Solve exponent(L) = threshold with dm2 = 4 pi E / L; None if no root exists."""
    params = CollapseParams(xi=xi, constants=constants)

    def excess(L: float) -> float:
        return damping_exponent(m_j, m_k, E, matched_dm2(E, L), L, params) - threshold

    guess = constants.planck_mass_mP**2 * constants.fermi_constant_GF / (xi * (m_j + m_k))
    try:
        lo, hi = bracket_by_scaling(excess, guess)
    except RuntimeError:
        return None
    return solve_bracketed(excess, lo, hi, rtol=1e-12)


def verify_observability(
    m_j: float,
    m_k: float,
    E: float,
    xi: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    name: str = "observability",
) -> OracleReport:
    try:
        closed = observability_length(m_j, m_k, E, xi, constants=constants)
    except OutOfWindowError:
        closed = None
    solved = observability_length_by_bisection(m_j, m_k, E, xi, constants=constants)

    near_edge = E > 0.9 * window_energy_closed_form(m_j, m_k, constants)
    tolerance = NEAR_EDGE_ROOT_TOLERANCE if near_edge else ROOT_TOLERANCE
    if closed is None or solved is None:
        both = closed is None and solved is None
        return OracleReport(
            name=name,
            primary=closed,
            oracle=solved,
            relative_error=0.0 if both else math.inf,
            tolerance=tolerance,
            passed=both,
            note="both undefined" if both else "only one side has a finite length",
        )
    return OracleReport.compare(name, closed, solved, tolerance)


# --- Suite ---

def run_suite(settings: Settings, only: list[str] | None = None) -> list[OracleReport]:
    """Every oracle check, in a fixed order, optionally filtered by check name."""
    unknown = set(only or []) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; choose from {list(CHECKS)}")
    selected = [c for c in CHECKS if not only or c in only]

    constants = constants_from_settings(settings)
    u = mixing_from_settings(settings)
    spectrum = spectrum_from_settings(settings)
    j, k = settings.window_pair
    m_j, m_k = spectrum.mass(j), spectrum.mass(k)
    if m_j <= 0 or m_k <= 0:
        logger.warning(f"pair {j}{k} has a massless state; using 2 eV for the collapse checks")
        m_j, m_k = 2.0, 2.0
    xi = settings.xi if settings.xi > 0 else 1.0
    E = settings.energy_ev
    L = lightyears_to_natural(settings.baseline_ly, constants)
    reports: list[OracleReport] = []

    if "probability" in selected:
        L_checked = _conditioned_baseline(spectrum, E, L)
        report = verify_probability(u, spectrum, E, L_checked, name="probability[config]")
        if L_checked != L:
            report = report.model_copy(
                update={"note": f"{report.note}; baseline shortened to {L_checked:.6e} eV^-1"}
            )
        reports.append(report)
        rng = np.random.default_rng(settings.seed)
        angles = MixingAngles(
            theta12=rng.uniform(0, math.pi / 2),
            theta13=rng.uniform(0, math.pi / 2),
            theta23=rng.uniform(0, math.pi / 2),
            delta_cp=rng.uniform(0, 2 * math.pi),
        )
        random_spectrum = MassSpectrum(m1=0.0, m2=rng.uniform(0.01, 0.1), m3=rng.uniform(0.1, 0.2))
        E_random = rng.uniform(1e6, 1e9)
        reports.append(
            verify_probability(
                build_mixing_matrix(angles),
                random_spectrum,
                E_random,
                rng.uniform(0, 3) * 4 * math.pi * E_random / 1e-3,
                name="probability[random]",
            )
        )

    if "delta_e" in selected:
        a_j = constants.fermi_constant_GF * m_j
        a_k = constants.fermi_constant_GF * m_k
        rho_j = SphericalMassDistribution(mass=m_j, radius=a_j)
        rho_k = SphericalMassDistribution(mass=m_k, radius=a_k, center=(20 * (a_j + a_k), 0.0, 0.0))
        reports.append(
            verify_delta_e(rho_j, rho_k, xi, settings.resolution, settings.seed,
                           constants, name="delta_e[separated]")
        )
        reports.append(
            verify_delta_e(rho_j, rho_j, xi, settings.resolution, settings.seed,
                           constants, name="delta_e[coincident]")
        )

    if "damping" in selected:
        params = CollapseParams(xi=xi, constants=constants)
        dm2 = spectrum.dm2(j, k) or matched_dm2(E, L)
        onset = decoherence_onset(m_j, m_k, E, dm2, params)
        for label, baseline in (("L=2D", 2 * onset), ("L=10D", 10 * onset), ("L=1e3D", 1e3 * onset)):
            reports.append(
                verify_damping(m_j, m_k, E, dm2, baseline, xi, constants, name=f"damping[{label}]")
            )

    if "observability" in selected:
        e_star = window_energy_closed_form(m_j, m_k, constants)
        for label, energy in (
            ("config", E),
            ("0.5E*", 0.5 * e_star),
            ("0.99E*", 0.99 * e_star),
            ("2E*", 2 * e_star),
        ):
            reports.append(
                verify_observability(m_j, m_k, energy, xi, constants, name=f"observability[{label}]")
            )

    failed = [r.name for r in reports if not r.passed]
    logger.info(f"Oracle suite: {len(reports) - len(failed)}/{len(reports)} passed")
    if failed:
        logger.warning(f"Failed checks: {failed}")
    return reports
