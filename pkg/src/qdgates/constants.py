"""Physical constants and unit conversions.

Internal units are meV for energy, ps for time and nm for length.  All
constants derive from the exact SI values (CODATA 2018) so that a result
computed in internal units and one computed in SI agree to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# exact SI
E_CHARGE = 1.602176634e-19  # C
HBAR_SI = 1.054571817e-34  # J s
KB_SI = 1.380649e-23  # J / K

MEV_J = E_CHARGE * 1e-3
HBAR = HBAR_SI / MEV_J * 1e12  # meV ps  (0.6582119569...)
KB = KB_SI / MEV_J  # meV / K

# (V/cm) * (e nm) in meV
FIELD_DIPOLE_MEV = 1e-4

PER_PS_TO_PER_S = 1e12


def field_dipole_energy(E0: float, xi: float) -> float:
    """Return E0*xi in meV for E0 in V/cm and xi in e*nm."""
    return E0 * xi * FIELD_DIPOLE_MEV


def field_from_energy(energy: float, xi: float) -> float:
    """Inverse of :func:`field_dipole_energy`; returns V/cm."""
    return energy / (xi * FIELD_DIPOLE_MEV)


@dataclass(frozen=True)
class UnitSystem:
    """A consistent set of units in which the phonon rates can be evaluated.

    Each conversion factor turns a value given in the artifact's input units
    (meV, nm, eV for the deformation potential, g/cm^3, m/s) into this system.
    """

    name: str
    energy_per_mev: float
    length_per_nm: float
    time_per_ps: float
    mass_per_kg: float

    @property
    def hbar(self) -> float:
        return HBAR * self.energy_per_mev * self.time_per_ps

    @property
    def kb(self) -> float:
        return KB * self.energy_per_mev

    def energy(self, mev: float) -> float:
        return mev * self.energy_per_mev

    def length(self, nm: float) -> float:
        return nm * self.length_per_nm

    def velocity(self, m_per_s: float) -> float:
        return m_per_s * 1e9 * self.length_per_nm / (1e12 * self.time_per_ps)

    def density(self, g_per_cm3: float) -> float:
        kg_per_m3 = g_per_cm3 * 1e3
        return kg_per_m3 * self.mass_per_kg / (1e9 * self.length_per_nm) ** 3

    def rate_per_s(self, rate: float) -> float:
        return rate * 1e12 * self.time_per_ps


SI = UnitSystem("SI", energy_per_mev=MEV_J, length_per_nm=1e-9, time_per_ps=1e-12, mass_per_kg=1.0)

# mass unit implied by meV, nm, ps: 1 meV ps^2 / nm^2 in kg
_INTERNAL_MASS_KG = MEV_J * 1e-24 / 1e-18
INTERNAL = UnitSystem(
    "meV-nm-ps",
    energy_per_mev=1.0,
    length_per_nm=1.0,
    time_per_ps=1.0,
    mass_per_kg=1.0 / _INTERNAL_MASS_KG,
)

SQRT2 = math.sqrt(2.0)
