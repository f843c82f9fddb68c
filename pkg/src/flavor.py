import logging
import math

import numpy as np

from src.models import Flavor, MassSpectrum, MixingAngles, MixingMatrix, Settings

logger = logging.getLogger(__name__)


# U = R23 . Delta(delta) . R13 . Delta(-delta) . R12, Majorana phases ignored

def _r23(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1, 0, 0], [0, c, s], [0, -s, c]], dtype=complex)


def _r13(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=complex)


def _r12(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]], dtype=complex)


def _phase(delta: float) -> np.ndarray:
    return np.diag([1, 1, np.exp(1j * delta)])


def build_mixing_matrix(angles: MixingAngles) -> MixingMatrix:
    u = np.linalg.multi_dot(
        [
            _r23(angles.theta23),
            _phase(angles.delta_cp),
            _r13(angles.theta13),
            _phase(-angles.delta_cp),
            _r12(angles.theta12),
        ]
    )
    return MixingMatrix(u=u)


def check_unitarity(u: MixingMatrix | np.ndarray) -> float:
    """Largest entrywise deviation of U U^dagger from the identity."""
    matrix = u.u if isinstance(u, MixingMatrix) else np.asarray(u, dtype=complex)
    return float(np.max(np.abs(matrix @ matrix.conj().T - np.eye(matrix.shape[0]))))


def flavor_amplitudes(u: MixingMatrix, alpha: Flavor | int) -> np.ndarray:
    """(U*_a1, U*_a2, U*_a3): mass-basis amplitudes of the flavor state."""
    try:
        alpha = Flavor(alpha)
    except ValueError:
        raise ValueError(f"invalid flavor index {alpha!r}") from None
    return u.u[alpha].conj()


def angles_from_sin2(
    sin2_12: float, sin2_13: float, sin2_23: float, delta_cp: float = 0.0
) -> MixingAngles:
    return MixingAngles(
        theta12=math.asin(math.sqrt(sin2_12)),
        theta13=math.asin(math.sqrt(sin2_13)),
        theta23=math.asin(math.sqrt(sin2_23)),
        delta_cp=delta_cp,
    )


def tribimaximal_angles() -> MixingAngles:
    return MixingAngles(
        theta12=math.asin(1 / math.sqrt(3)),
        theta13=0.0,
        theta23=math.pi / 4,
        delta_cp=0.0,
    )


def mixing_from_settings(settings: Settings) -> MixingMatrix:
    if settings.mixing_preset == "tribimaximal":
        angles = tribimaximal_angles()
    else:
        angles = MixingAngles(
            theta12=settings.theta12_rad,
            theta13=settings.theta13_rad,
            theta23=settings.theta23_rad,
            delta_cp=settings.delta_cp_rad % (2 * math.pi),
        )
    logger.debug(f"Mixing angles: {angles}")
    return build_mixing_matrix(angles)


def spectrum_from_settings(settings: Settings) -> MassSpectrum:
    return MassSpectrum(
        m1=settings.m1_ev,
        m2=settings.m2_ev,
        m3=settings.m3_ev,
        dm2_21=settings.dm2_21_ev2,
        dm2_32=settings.dm2_32_ev2,
    )
