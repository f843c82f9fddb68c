from __future__ import annotations

import math
from enum import Enum, IntEnum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class OutOfWindowError(ValueError):
    """Raised when no finite observability length or ξ bound exists."""


# --- Configuration ---

_SIN2_THETA12 = 0.307
_SIN2_THETA13 = 0.022
_SIN2_THETA23 = 0.545


class Settings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # constant overrides
    gf_ev2: float = Field(1.1664e-23, gt=0)
    mp_ev: float = Field(1.220890e28, gt=0)
    lp_m: float = Field(1.616255e-35, gt=0)
    hbar_c_evm: float = Field(1.97326980e-7, gt=0)
    hbar_evs: float = Field(6.582119569e-16, gt=0)
    m_per_ly: float = Field(9.4607e15, gt=0)
    ev_per_gram: float = Field(5.60958860e32, gt=0)

    # mixing
    mixing_preset: Literal["standard", "tribimaximal"] = "standard"
    theta12_rad: float = Field(math.asin(math.sqrt(_SIN2_THETA12)), ge=0, le=math.pi / 2)
    theta13_rad: float = Field(math.asin(math.sqrt(_SIN2_THETA13)), ge=0, le=math.pi / 2)
    theta23_rad: float = Field(math.asin(math.sqrt(_SIN2_THETA23)), ge=0, le=math.pi / 2)
    delta_cp_rad: float = 0.0

    # masses; explicit splittings win over the ones implied by the masses
    m1_ev: float = Field(2.0, ge=0)
    m2_ev: float = Field(2.0, ge=0)
    m3_ev: float = Field(2.0, ge=0)
    dm2_21_ev2: float | None = 7.5e-5
    dm2_32_ev2: float | None = 2.5e-3

    # collapse
    xi: float = Field(1e-2, ge=0)
    threshold: float = Field(1.0, gt=0)

    # point evaluation
    energy_ev: float = Field(1e20, gt=0)
    baseline_ly: float = Field(15e9, ge=0)
    band_width: float = Field(0.0, ge=0, lt=1)
    band_samples: int = Field(1, ge=1)

    # scan grids (geometric spacing)
    scan_e_min_ev: float = Field(1e20, gt=0)
    scan_e_max_ev: float = Field(1e24, gt=0)
    scan_e_num: int = Field(5, ge=1)
    scan_l_min_ly: float = Field(0.7e9, gt=0)
    scan_l_max_ly: float = Field(15e9, gt=0)
    scan_l_num: int = Field(5, ge=1)
    window_pair: tuple[int, int] = (1, 2)

    # source flux
    source: Literal["pion_chain", "custom"] = "pion_chain"
    source_phi_e: float = Field(1 / 3, ge=0)
    source_phi_mu: float = Field(2 / 3, ge=0)
    source_phi_tau: float = Field(0.0, ge=0)

    # output and oracles
    format: Literal["csv", "json"] = "csv"
    out: str | None = None
    seed: int = Field(20240917, ge=0)
    resolution: int = Field(17, ge=10, le=22)

    @field_validator("window_pair")
    @classmethod
    def _check_pair(cls, pair: tuple[int, int]) -> tuple[int, int]:
        j, k = pair
        if j == k or not {j, k} <= {1, 2, 3}:
            raise ValueError(f"window_pair must name two distinct mass indices, got {pair}")
        return (min(j, k), max(j, k))

    @model_validator(mode="after")
    def _check_grids(self) -> Settings:
        if self.scan_e_max_ev < self.scan_e_min_ev:
            raise ValueError("scan_e_max_ev must not be below scan_e_min_ev")
        if self.scan_l_max_ly < self.scan_l_min_ly:
            raise ValueError("scan_l_max_ly must not be below scan_l_min_ly")
        return self


# --- Constants ---

class PhysicalConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    fermi_constant_GF: float = Field(gt=0)  # eV^-2
    planck_mass_mP: float = Field(gt=0)  # eV
    planck_length_lP: float = Field(gt=0)  # m
    hbar_c: float = Field(gt=0)  # eV m
    seconds_per_natural_eV_inverse: float = Field(gt=0)  # s eV
    meters_per_lightyear: float = Field(gt=0)
    ev_per_gram: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_consistency(self) -> PhysicalConstants:
        product = self.planck_length_lP * self.planck_mass_mP
        if abs(product - self.hbar_c) > 1e-6 * self.hbar_c:
            raise ValueError(
                f"planck_length_lP * planck_mass_mP = {product:.7e} differs from "
                f"hbar_c = {self.hbar_c:.7e} by more than 1e-6 relative"
            )
        return self


class Dimension(str, Enum):
    ENERGY = "Energy"
    LENGTH = "Length"
    TIME = "Time"
    MASS = "Mass"
    DIMENSIONLESS = "Dimensionless"
    ENERGY_SQUARED = "EnergySquared"
    INVERSE_ENERGY_SQUARED = "InverseEnergySquared"


# power of eV carried by each dimension in natural units
_EV_POWER = {
    Dimension.ENERGY: 1,
    Dimension.MASS: 1,
    Dimension.LENGTH: -1,
    Dimension.TIME: -1,
    Dimension.DIMENSIONLESS: 0,
    Dimension.ENERGY_SQUARED: 2,
    Dimension.INVERSE_ENERGY_SQUARED: -2,
}
_PRODUCT_DIMENSION = {
    0: Dimension.DIMENSIONLESS,
    2: Dimension.ENERGY_SQUARED,
    -2: Dimension.INVERSE_ENERGY_SQUARED,
}


class Quantity(BaseModel):
    """A real value tagged with one of the natural-unit dimensions.

    Addition, subtraction and comparison need identical dimensions. Products
    and quotients are allowed when the result is a known dimension; a product
    of two energy-like factors is an EnergySquared, and so on.
    """

    model_config = ConfigDict(frozen=True)

    value: float
    dimension: Dimension

    def _require_same(self, other: Quantity, op: str) -> None:
        if not isinstance(other, Quantity):
            raise TypeError(f"cannot {op} Quantity and {type(other).__name__}")
        if other.dimension is not self.dimension:
            raise ValueError(
                f"cannot {op} {self.dimension.value} and {other.dimension.value}"
            )

    def __add__(self, other: Quantity) -> Quantity:
        self._require_same(other, "add")
        return Quantity(value=self.value + other.value, dimension=self.dimension)

    def __sub__(self, other: Quantity) -> Quantity:
        self._require_same(other, "subtract")
        return Quantity(value=self.value - other.value, dimension=self.dimension)

    def __lt__(self, other: Quantity) -> bool:
        self._require_same(other, "compare")
        return self.value < other.value

    def __le__(self, other: Quantity) -> bool:
        self._require_same(other, "compare")
        return self.value <= other.value

    def _combine(self, other: Quantity | float, sign: int) -> Quantity:
        if isinstance(other, (int, float)):
            value = self.value * other if sign > 0 else self.value / other
            return Quantity(value=value, dimension=self.dimension)
        if not isinstance(other, Quantity):
            return NotImplemented
        if self.dimension is Dimension.DIMENSIONLESS:
            dimension = other.dimension if sign > 0 else None
        elif other.dimension is Dimension.DIMENSIONLESS:
            dimension = self.dimension
        else:
            dimension = None
        if dimension is None:
            power = _EV_POWER[self.dimension] + sign * _EV_POWER[other.dimension]
            if power not in _PRODUCT_DIMENSION:
                raise ValueError(
                    f"{self.dimension.value} {'*' if sign > 0 else '/'} "
                    f"{other.dimension.value} has no supported dimension"
                )
            dimension = _PRODUCT_DIMENSION[power]
        value = self.value * other.value if sign > 0 else self.value / other.value
        return Quantity(value=value, dimension=dimension)

    def __mul__(self, other: Quantity | float) -> Quantity:
        return self._combine(other, +1)

    def __rmul__(self, other: float) -> Quantity:
        return self._combine(other, +1)

    def __truediv__(self, other: Quantity | float) -> Quantity:
        return self._combine(other, -1)


# --- Flavor ---

class Flavor(IntEnum):
    E = 0
    MU = 1
    TAU = 2

    @property
    def label(self) -> str:
        return self.name.lower()


class MixingAngles(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta12: float = Field(ge=0, le=math.pi / 2)
    theta13: float = Field(ge=0, le=math.pi / 2)
    theta23: float = Field(ge=0, le=math.pi / 2)
    delta_cp: float = Field(0.0, ge=0, lt=2 * math.pi)


class MixingMatrix(BaseModel):
    """Unitary 3x3 matrix, rows are flavors (e, mu, tau), columns mass indices."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: np.ndarray

    @field_validator("u")
    @classmethod
    def _check_unitary(cls, u: np.ndarray) -> np.ndarray:
        u = np.array(u, dtype=complex)
        if u.shape != (3, 3):
            raise ValueError(f"mixing matrix must be 3x3, got shape {u.shape}")
        residual = float(np.max(np.abs(u @ u.conj().T - np.eye(3))))
        if residual > 1e-12:
            raise ValueError(f"mixing matrix is not unitary (residual {residual:.3e})")
        u.setflags(write=False)
        return u


class MassSpectrum(BaseModel):
    """Three mass eigenvalues with their squared-mass splittings.

    The splittings Δm²_12 and Δm²_23 are taken from ``dm2_21``/``dm2_32`` when
    given, otherwise from the masses as (m_k - m_j)(m_k + m_j). Δm²_13 is
    always their sum, so the cycle identity holds exactly.
    """

    model_config = ConfigDict(frozen=True)

    m1: float = Field(ge=0)
    m2: float = Field(ge=0)
    m3: float = Field(ge=0)
    dm2_21: float | None = None
    dm2_32: float | None = None

    @property
    def masses(self) -> tuple[float, float, float]:
        return (self.m1, self.m2, self.m3)

    def dm2_matrix(self) -> np.ndarray:
        """Antisymmetric matrix with entry [j-1, k-1] = Δm²_jk = m_k² - m_j²."""
        d12 = self.dm2_21 if self.dm2_21 is not None else (self.m2 - self.m1) * (self.m2 + self.m1)
        d23 = self.dm2_32 if self.dm2_32 is not None else (self.m3 - self.m2) * (self.m3 + self.m2)
        d13 = d12 + d23
        return np.array(
            [
                [0.0, d12, d13],
                [-d12, 0.0, d23],
                [-d13, -d23, 0.0],
            ]
        )

    def dm2(self, j: int, k: int) -> float:
        return float(self.dm2_matrix()[j - 1, k - 1])

    def mass(self, j: int) -> float:
        return self.masses[j - 1]


# --- Oscillation ---

class Beam(BaseModel):
    energy_E: float = Field(gt=0)  # eV
    baseline_L: float = Field(ge=0)  # eV^-1
    source_flavor: Flavor


# --- Collapse ---

def _default_constants() -> PhysicalConstants:
    from src.constants import DEFAULT_CONSTANTS

    return DEFAULT_CONSTANTS


class CollapseParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    xi: float = Field(ge=0)
    constants: PhysicalConstants = Field(default_factory=_default_constants)

    @property
    def fermi_constant(self) -> float:
        return self.constants.fermi_constant_GF

    @property
    def planck_mass(self) -> float:
        return self.constants.planck_mass_mP

    def effective_radius(self, m: float) -> float:
        """a_j = G_F m_j, in eV^-1."""
        return self.fermi_constant * m


class SphericalMassDistribution(BaseModel):
    model_config = ConfigDict(frozen=True)

    mass: float = Field(gt=0)  # eV
    radius: float = Field(gt=0)  # eV^-1
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)  # eV^-1

    @property
    def density(self) -> float:
        return 3 * self.mass / (4 * math.pi * self.radius**3)


class PairDamping(BaseModel):
    j: int
    k: int
    onset_D: float | None  # eV^-1; None when the pair never separates
    exponent: float = Field(ge=0)


# --- Observability ---

class ObservabilityWindow(BaseModel):
    energy_range: tuple[float, float]  # eV
    baseline_range: tuple[float, float]  # ly
    xi: float = Field(gt=0)
    masses: tuple[float, float]  # eV

    @model_validator(mode="after")
    def _check_ranges(self) -> ObservabilityWindow:
        for name, (lo, hi) in (
            ("energy_range", self.energy_range),
            ("baseline_range", self.baseline_range),
        ):
            if lo > hi or lo < 0:
                raise ValueError(f"{name} must satisfy 0 <= lower <= upper, got {(lo, hi)}")
        return self


class ScanCell(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    e_index: int
    l_index: int
    energy_eV: float
    baseline_ly: float
    matched_dm2: float
    onset_D_ly: float | None
    window_exponent: float
    gammas: dict[str, float]  # keyed "12", "13", "23"
    p_undamped: np.ndarray
    p_damped: np.ndarray
    deviation: float


class ScanGrid(BaseModel):
    energies_eV: list[float]
    baselines_ly: list[float]
    xi: float
    cells: list[ScanCell] = Field(default_factory=list)


# --- Flux ---

class FlavorFlux(BaseModel):
    model_config = ConfigDict(frozen=True)

    phi_e: float = Field(ge=0)
    phi_mu: float = Field(ge=0)
    phi_tau: float = Field(ge=0)

    @property
    def total(self) -> float:
        return self.phi_e + self.phi_mu + self.phi_tau

    def as_array(self) -> np.ndarray:
        return np.array([self.phi_e, self.phi_mu, self.phi_tau])

    def normalized(self) -> FlavorFlux:
        total = self.total
        if total <= 0:
            raise ValueError("cannot normalize a flux with zero total")
        return FlavorFlux(
            phi_e=self.phi_e / total,
            phi_mu=self.phi_mu / total,
            phi_tau=self.phi_tau / total,
        )


# --- Oracles ---

class OracleReport(BaseModel):
    name: str
    primary: float | None
    oracle: float | None
    relative_error: float
    tolerance: float
    passed: bool
    note: str = ""

    @classmethod
    def compare(
        cls,
        name: str,
        primary: float,
        oracle: float,
        tolerance: float,
        note: str = "",
    ) -> OracleReport:
        error = relative_error(primary, oracle)
        return cls(
            name=name,
            primary=primary,
            oracle=oracle,
            relative_error=error,
            tolerance=tolerance,
            passed=error <= tolerance,
            note=note,
        )


def relative_error(primary: float, reference: float) -> float:
    diff = abs(primary - reference)
    if abs(reference) < 1e-300:
        return diff
    return diff / abs(reference)


# --- Output ---

Cell = float | int | str | None


class Table(BaseModel):
    """One block of command output: named columns and rows in emission order."""

    name: str
    columns: list[str]
    rows: list[list[Cell]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_widths(self) -> Table:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"table {self.name!r} row has {len(row)} cells, expected {len(self.columns)}"
                )
        return self
