import numpy as np

from src.models import FlavorFlux, Settings

STOCHASTIC_TOLERANCE = 1e-8


def pion_chain_source() -> FlavorFlux:
    """pi+ -> mu+ nu_mu -> e+ nu_e anti-nu_mu nu_mu gives 1/3 : 2/3 : 0 at the source."""
    return FlavorFlux(phi_e=1 / 3, phi_mu=2 / 3, phi_tau=0.0)


def source_from_settings(settings: Settings) -> FlavorFlux:
    if settings.source == "pion_chain":
        return pion_chain_source()
    return FlavorFlux(
        phi_e=settings.source_phi_e,
        phi_mu=settings.source_phi_mu,
        phi_tau=settings.source_phi_tau,
    )


def detector_flux(p: np.ndarray, source: FlavorFlux) -> FlavorFlux:
    """phi_D[b] = sum_a P[a, b] phi_S[a] for a row-stochastic P."""
    p = np.asarray(p, dtype=float)
    if p.shape != (3, 3):
        raise ValueError(f"probability matrix must be 3x3, got shape {p.shape}")
    row_sums = p.sum(axis=1)
    if np.any(p < -STOCHASTIC_TOLERANCE) or np.any(np.abs(row_sums - 1) > STOCHASTIC_TOLERANCE):
        raise ValueError(f"probability matrix is not row-stochastic (row sums {row_sums})")
    phi = np.clip(source.as_array() @ p, 0.0, None)
    return FlavorFlux(phi_e=phi[0], phi_mu=phi[1], phi_tau=phi[2])


def ratio_deviation(a: FlavorFlux, b: FlavorFlux) -> float:
    """Largest componentwise difference of the normalized flavor ratios."""
    if a.total <= 0 or b.total <= 0:
        raise ValueError("flavor ratios need fluxes with a positive total")
    return float(np.max(np.abs(a.normalized().as_array() - b.normalized().as_array())))
