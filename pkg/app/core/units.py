"""
Unit handling for problem configs

Internal units: lengths in nm, p and λ in eV, q and λ² in eV², γ in eV·nm².
The energy-squared scale of q is a reconstruction (the governing equation adds
q to λ² directly); every report carries UNIT_NOTE.
"""

from typing import Dict

from scipy import constants

from app.core.exceptions import ConfigError

UNIT_NOTE = (
    "unit reconstruction: lengths in nm, p and lambda in eV, q and lambda^2 in eV^2, "
    "gamma = hbar^2/2m converted from J*m^2 to eV*nm^2"
)

# scale factors into internal units, per dimension
LENGTH: Dict[str, float] = {"nm": 1.0, "angstrom": 0.1, "m": 1e9}
AREA: Dict[str, float] = {"nm^2": 1.0, "angstrom^2": 0.01, "m^2": 1e18}
ENERGY: Dict[str, float] = {"eV": 1.0, "meV": 1e-3, "J": 1.0 / constants.e}
ENERGY_SQUARED: Dict[str, float] = {"eV^2": 1.0, "meV^2": 1e-6}
GAMMA: Dict[str, float] = {"eV*nm^2": 1.0, "J*m^2": 1e18 / constants.e}

DIMENSIONS: Dict[str, Dict[str, float]] = {
    "length": LENGTH,
    "area": AREA,
    "energy": ENERGY,
    "energy^2": ENERGY_SQUARED,
    "gamma": GAMMA,
}


def to_internal(value: float, unit: str, dimension: str, where: str = "quantity") -> float:
    """Convert a configured quantity into internal units"""
    table = DIMENSIONS[dimension]
    if unit not in table:
        raise ConfigError(f"{where}: unit '{unit}' is not a {dimension} unit (expected one of {sorted(table)})")
    return float(value) * table[unit]


def gamma_from_si(gamma_si: float) -> float:
    """ħ²/2m given in J·m² -> eV·nm²"""
    return gamma_si * GAMMA["J*m^2"]


def gamma_si_from_mass(mass_kg: float) -> float:
    """ħ²/2m in J·m² for a particle of the given mass"""
    if mass_kg <= 0:
        raise ConfigError(f"particle mass must be positive, got {mass_kg}")
    return constants.hbar ** 2 / (2.0 * mass_kg)


def gamma_from_mass(mass_kg: float) -> float:
    return gamma_from_si(gamma_si_from_mass(mass_kg))
