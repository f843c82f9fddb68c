"""Physical constants and unit conversions.

Everything else computes in eV-based natural units (hbar = c = 1, G = 1/m_P^2);
conversions happen only at the boundaries, through the helpers below.
"""
from src.models import Dimension, PhysicalConstants, Quantity, Settings


def constants_from_settings(settings: Settings) -> PhysicalConstants:
    return PhysicalConstants(
        fermi_constant_GF=settings.gf_ev2,
        planck_mass_mP=settings.mp_ev,
        planck_length_lP=settings.lp_m,
        hbar_c=settings.hbar_c_evm,
        seconds_per_natural_eV_inverse=settings.hbar_evs,
        meters_per_lightyear=settings.m_per_ly,
        ev_per_gram=settings.ev_per_gram,
    )


DEFAULT_CONSTANTS = constants_from_settings(Settings())


def _require_non_negative(value: float, name: str) -> None:
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")


# --- Lengths ---

def lightyears_to_natural(
    L: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Light-years to eV^-1."""
    _require_non_negative(L, "baseline in light-years")
    return L * constants.meters_per_lightyear / constants.hbar_c


def natural_to_lightyears(
    L: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    _require_non_negative(L, "natural length")
    return L * constants.hbar_c / constants.meters_per_lightyear


def meters_to_natural(
    x: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    _require_non_negative(x, "length in meters")
    return x / constants.hbar_c


def natural_to_meters(
    x: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    _require_non_negative(x, "natural length")
    return x * constants.hbar_c


# --- Times ---

def natural_time_to_seconds(
    T: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """eV^-1 to seconds (multiplies by hbar in eV s)."""
    _require_non_negative(T, "natural time")
    return T * constants.seconds_per_natural_eV_inverse


def seconds_to_natural_time(
    t: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    _require_non_negative(t, "time in seconds")
    return t / constants.seconds_per_natural_eV_inverse


def planck_time_seconds(constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    # l_P / hbar_c is 1/m_P in eV^-1
    return natural_time_to_seconds(
        constants.planck_length_lP / constants.hbar_c, constants
    )


# --- Masses ---

def grams_to_ev(m: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    _require_non_negative(m, "mass in grams")
    return m * constants.ev_per_gram


def ev_to_grams(m: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    _require_non_negative(m, "mass in eV")
    return m / constants.ev_per_gram


# --- Quantities ---

def to_natural(
    value: float, unit: str, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> Quantity:
    """Wrap a boundary value as a natural-unit Quantity.

    Supported units: ``eV``, ``eV2``, ``ly``, ``m``, ``s``, ``g``, ``1``.
    """
    if unit == "eV":
        return Quantity(value=value, dimension=Dimension.ENERGY)
    if unit == "eV2":
        return Quantity(value=value, dimension=Dimension.ENERGY_SQUARED)
    if unit == "ly":
        return Quantity(value=lightyears_to_natural(value, constants), dimension=Dimension.LENGTH)
    if unit == "m":
        return Quantity(value=meters_to_natural(value, constants), dimension=Dimension.LENGTH)
    if unit == "s":
        return Quantity(value=seconds_to_natural_time(value, constants), dimension=Dimension.TIME)
    if unit == "g":
        return Quantity(value=grams_to_ev(value, constants), dimension=Dimension.MASS)
    if unit == "1":
        return Quantity(value=value, dimension=Dimension.DIMENSIONLESS)
    raise ValueError(f"unsupported unit {unit!r}")


_UNIT_DIMENSION = {
    "ly": Dimension.LENGTH,
    "m": Dimension.LENGTH,
    "s": Dimension.TIME,
    "g": Dimension.MASS,
    "eV": Dimension.ENERGY,
    "eV2": Dimension.ENERGY_SQUARED,
    "1": Dimension.DIMENSIONLESS,
}


def from_natural(
    quantity: Quantity, unit: str, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    expected = _UNIT_DIMENSION.get(unit)
    if expected is None:
        raise ValueError(f"unsupported unit {unit!r}")
    if quantity.dimension is not expected:
        raise ValueError(
            f"cannot express {quantity.dimension.value} in {unit} ({expected.value})"
        )
    if unit == "ly":
        return natural_to_lightyears(quantity.value, constants)
    if unit == "m":
        return natural_to_meters(quantity.value, constants)
    if unit == "s":
        return natural_time_to_seconds(quantity.value, constants)
    if unit == "g":
        return ev_to_grams(quantity.value, constants)
    return quantity.value
