"""LA-phonon absorption rates for Gaussian disk-like dots and pulse feasibility.

Rates follow the Fermi golden rule with deformation-potential coupling.  The
system volume cancels between the density of phonon modes and the squared
coupling, so it never appears.  Inputs are in the units listed on
:class:`PhononParams`; the arithmetic runs in a selectable
:class:`~qdgates.constants.UnitSystem` (meV-nm-ps by default) and the result
is always returned in s^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .constants import HBAR, INTERNAL, SI, UnitSystem
from .errors import ConfigError
from .quadrature import adaptive_simpson, trapezoid_sine
from .single_gate import MoleculeSpec, field_from_rabi_energy, molecular_spectrum

Mode = Literal["corrected", "literal"]
QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class PhononParams:
    """Material and dot parameters.

    Xi: deformation potential (eV); rho: mass density (g/cm^3); c_s:
    longitudinal sound velocity (m/s); lambda_p, lambda_z: in-plane and
    growth-direction Gaussian radii (nm); T: temperature (K).  Defaults are
    GaAs with a 10 nm x 2 nm disk at room temperature.
    """

    Xi: float = 6.8
    rho: float = 5.36
    c_s: float = 5150.0
    lambda_p: float = 10.0
    lambda_z: float = 2.0
    T: float = 300.0

    def __post_init__(self):
        for name in ("Xi", "rho", "c_s", "lambda_p", "lambda_z"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.T >= 0:
            raise ConfigError(f"T must be >= 0, got {self.T}")
        if not self.lambda_p >= self.lambda_z:
            raise ConfigError(
                f"lambda_p ({self.lambda_p}) must be >= lambda_z ({self.lambda_z}) for a disk-like dot"
            )


@dataclass(frozen=True)
class RateResult:
    rate: float  # s^-1
    q: float  # nm^-1
    n_B: float
    integral_value: float
    mode_flag: str = "corrected"


def bose_occupation(E: float, T: float, kb: float | None = None) -> float:
    """Bose-Einstein occupation of a mode with energy E (meV) at T (K)."""
    if not E > 0:
        raise ConfigError(f"phonon energy must be > 0, got {E}")
    if not T >= 0:
        raise ConfigError(f"T must be >= 0, got {T}")
    if T == 0:
        return 0.0
    x = E / ((INTERNAL.kb if kb is None else kb) * T)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def phonon_wavevector(E: float, params: PhononParams) -> float:
    """q = E / (hbar c_s) in nm^-1."""
    if not E > 0:
        raise ConfigError(f"phonon energy must be > 0, got {E}")
    return E / (HBAR * params.c_s * 1e-3)  # c_s in nm/ps


def _end_points(c: float) -> list[float]:
    """Breakpoints resolving the peaks of width ~1/c at u = +-1."""
    pts = [0.0]
    w = 1.0 / max(c, 1.0)
    while w < 0.5:
        pts += [1.0 - w, w - 1.0]
        w *= 2.0
    return pts


def shape_integral(a: float, b: float, power: int, *, method: str = "simpson") -> float:
    """Integral over u in [-1, 1] of (1-u^2)^power exp(-a (1-u^2) - b u^2).

    ``method`` is ``"simpson"`` (adaptive, rtol 1e-10) or ``"trapezoid"``
    (fixed 1e5 nodes after u = sin t).
    """
    if method == "simpson":
        def f(u: float) -> float:
            s = 1.0 - u * u
            return s ** power * math.exp(-a * s - b * u * u)

        return adaptive_simpson(f, -1.0, 1.0, rtol=QUAD_RTOL, points=_end_points(a - b))
    if method == "trapezoid":
        def g(u: np.ndarray) -> np.ndarray:
            s = 1.0 - u * u
            return s ** power * np.exp(-a * s - b * u * u)

        return trapezoid_sine(g)
    raise ValueError(f"unknown quadrature method {method!r}")


def angular_integral(E: float, params: PhononParams, power: int, *, method: str = "simpson") -> float:
    """Shape integral at a = (q lambda_p)^2, b = (q lambda_z)^2 for energy E (meV)."""
    q = phonon_wavevector(E, params)
    return shape_integral((q * params.lambda_p) ** 2, (q * params.lambda_z) ** 2, power, method=method)


def _material(params: PhononParams, units: UnitSystem):
    return (
        units.energy(params.Xi * 1e3),
        units.density(params.rho),
        units.velocity(params.c_s),
        units.length(params.lambda_p),
        units.length(params.lambda_z),
        units.hbar,
    )


def gamma0(E: float, params: PhononParams, *, units: UnitSystem = INTERNAL, method: str = "simpson") -> RateResult:
    """Absorption rate from a localized ground state into a level E above it."""
    if not E > 0:
        raise ConfigError(f"phonon energy must be > 0, got {E}")
    Xi, rho, cs, lp, lz, hbar = _material(params, units)
    q = units.energy(E) / (hbar * cs)
    n = bose_occupation(units.energy(E), params.T, kb=units.kb)
    I = shape_integral((q * lp) ** 2, (q * lz) ** 2, 1, method=method)
    rate = Xi ** 2 * q ** 3 * n * I / (8 * math.pi * hbar * rho * cs ** 2)
    return RateResult(units.rate_per_s(rate), q * units.length_per_nm, n, I, "corrected")


def gamma2(E: float, params: PhononParams, mode: Mode = "corrected", *, units: UnitSystem = INTERNAL,
           method: str = "simpson") -> RateResult:
    """Absorption rate from the first excited molecular level to the next one.

    ``mode="corrected"`` carries the prefactor with 1/(hbar^2 c_s), which has
    the dimension of a rate.  ``mode="literal"`` evaluates the prefactor with
    1/hbar instead, always in SI; the number is reported with
    ``mode_flag="literal"`` and is not a rate in any consistent unit.
    """
    if mode not in ("corrected", "literal"):
        raise ValueError(f"mode must be 'corrected' or 'literal', got {mode!r}")
    if mode == "literal":
        units = SI
    if not E > 0:
        raise ConfigError(f"phonon energy must be > 0, got {E}")
    Xi, rho, cs, lp, lz, hbar = _material(params, units)
    q = units.energy(E) / (hbar * cs)
    n = bose_occupation(units.energy(E), params.T, kb=units.kb)
    I = shape_integral((q * lp) ** 2, (q * lz) ** 2, 2, method=method)
    # M(q)^2 * volume = Xi^2 hbar q / (2 rho c_s)
    coupling = Xi ** 2 * hbar * q / (2 * rho * cs)
    if mode == "corrected":
        rate = q ** 6 * lp ** 4 * coupling * n * I / (8 * math.pi * hbar ** 2 * cs)
        rate = units.rate_per_s(rate)
    else:
        rate = q ** 6 * lp ** 4 * coupling * n * I / (8 * math.pi * hbar)
    return RateResult(rate, q * units.length_per_nm, n, I, mode)


@dataclass(frozen=True)
class GroundRate:
    total: float  # s^-1
    weights: np.ndarray  # P_n for n = 2..6
    energies: np.ndarray  # eps_n - eps_0 (meV)
    channel_rates: np.ndarray  # P_n Gamma_0(q_n), s^-1


def excited_weights(molecule: MoleculeSpec, host: str = "A") -> tuple[np.ndarray, np.ndarray]:
    """Weights of the host dot's sigma and pi orbitals in |2> .. |6>, and excitation energies."""
    if host not in ("A", "B"):
        raise ValueError(f"host must be 'A' or 'B', got {host!r}")
    spec = molecular_spectrum(molecule)
    rows = (2, 4) if host == "A" else (3, 5)
    Q = spec.orbitals
    P = np.array([sum(abs(Q[r, n]) ** 2 for r in rows) for n in range(2, 7)])
    dE = spec.energies[2:] - spec.energies[0]
    return P, dE


def ground_total_rate(molecule: MoleculeSpec, params: PhononParams, host: str = "A", **kw) -> GroundRate:
    """Sum of P_n Gamma_0(q_n) over the five excited molecular levels."""
    P, dE = excited_weights(molecule, host)
    rates = np.array([p * gamma0(e, params, **kw).rate for p, e in zip(P, dE)])
    return GroundRate(float(rates.sum()), P, dE, rates)


@dataclass(frozen=True)
class Feasibility:
    margin: float
    verdict: str  # pass | marginal | fail


def pulse_feasibility(Omega: float, N: int, Gamma: float) -> Feasibility:
    """Compare the Rabi frequency Omega (ps^-1) with N times the rate Gamma (s^-1)."""
    if not Omega > 0 or not N > 0:
        raise ConfigError("Omega and N must be positive")
    if not Gamma >= 0:
        raise ConfigError("Gamma must be >= 0")
    if Gamma == 0:
        return Feasibility(math.inf, "pass")
    m = Omega * 1e12 / (N * Gamma)
    verdict = "pass" if m >= 10 else ("marginal" if m > 1 else "fail")
    return Feasibility(m, verdict)


def rabi_threshold(N: int, Gamma: float, margin: float = 2 * math.pi) -> float:
    """hbar*Omega (meV) giving Omega = margin * N * Gamma.

    The default margin 2 pi asks for N Rabi periods to fit into one
    scattering time.
    """
    if not Gamma > 0 or not N > 0 or not margin > 0:
        raise ConfigError("N, Gamma and margin must be positive")
    return HBAR * margin * N * Gamma * 1e-12


def min_field(molecule: MoleculeSpec, hbar_omega: float) -> float:
    """Field amplitude (V/cm) that produces the Rabi energy ``hbar_omega`` (meV)."""
    return field_from_rabi_energy(molecule, hbar_omega)


def dipole_from_radius(lambda_p: float) -> float:
    """Optical dipole (e nm) between the ground and an m = +-1 Gaussian state."""
    if not lambda_p > 0:
        raise ConfigError(f"lambda_p must be > 0, got {lambda_p}")
    return 0.5 * lambda_p


def dipole_by_quadrature(lambda_p: float, n: int = 40) -> complex:
    """<0| x |+1> by 2-D Gauss-Hermite quadrature (the z factor integrates to 1)."""
    s, w = np.polynomial.hermite.hermgauss(n)
    X, Y = np.meshgrid(s * lambda_p, s * lambda_p, indexing="ij")
    W = np.outer(w, w) * lambda_p ** 2
    # |psi_0|^2 without the Gaussian weight, which the rule supplies
    dens = 1.0 / (math.pi * lambda_p ** 2)
    return complex(np.sum(W * dens * X * (X + 1j * Y) / lambda_p))
