"""Five-dot controlled-NOT gate.

Electron 1 (target) sits on the ground states of dots F and G, electron 2
(control) on those of dots J and K.  The small dot I couples to the sigma
orbitals of F and G with strength V and to that of J with V'; dot K is
isolated.  With on-site Coulomb blockade the control electron removes its
own dot from the molecule seen by the target, so the target's lowest optical
transition depends on where the control sits.

Site basis order (13 orbitals)::

    0F 0G 0J 0K  sigmaF sigmaG sigmaJ sigmaK  piF piG piJ piK  0I

Two-qubit amplitudes are ordered ``FJ, GJ, FK, GK``, i.e. index
``t + 2 c`` for target bit ``t`` and control bit ``c``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, SQRT2, field_dipole_energy
from .core import evolve_driven, hermitian_eigendecompose
from .errors import ConfigError, NumericalError

SITES = ("0F", "0G", "0J", "0K", "sigmaF", "sigmaG", "sigmaJ", "sigmaK", "piF", "piG", "piJ", "piK", "0I")
DOTS = {"F": (0, 4, 8), "G": (1, 5, 9), "J": (2, 6, 10), "K": (3, 7, 11), "I": (12,)}
BASIS_LABELS = ("FJ", "GJ", "FK", "GK")
LEAKAGE_FLAG = 0.05
_I = SITES.index


@dataclass(frozen=True)
class CnotSpec:
    """Parameters of the CNOT molecule (meV, rad, e nm)."""

    eps_s: float
    eps_p: float
    V: float
    V_prime: float
    phi_G: float
    phi_K: float
    xi: float
    U_c: float = 0.0

    def __post_init__(self):
        if not self.eps_p > self.eps_s:
            raise ConfigError(f"eps_p ({self.eps_p}) must exceed eps_s ({self.eps_s})")
        if not self.V > 0:
            raise ConfigError(f"V must be > 0, got {self.V}")
        if not self.V_prime >= 0:
            raise ConfigError(f"V_prime must be >= 0, got {self.V_prime}")
        if not self.xi > 0:
            raise ConfigError(f"xi must be > 0, got {self.xi}")
        if not self.U_c >= 0:
            raise ConfigError(f"U_c must be >= 0, got {self.U_c}")

    @property
    def eta(self) -> float:
        return self.V_prime / self.V

    def barred_energies(self) -> dict[str, float]:
        e2 = self.eta ** 2
        p, V = self.eps_p, self.V
        return {
            "F": p - math.sqrt(1 + e2) * V,
            "G": p - math.sqrt(1 + e2) * V,
            "J": p - SQRT2 * V,
            "K": p - math.sqrt(2 + e2) * V,
        }

    @property
    def gap(self) -> float:
        """Energy by which the off-resonant J-branch transition lies above the K one."""
        return (math.sqrt(2 + self.eta ** 2) - SQRT2) * self.V


@dataclass(frozen=True)
class BarredStates:
    """Lowest excited state of the molecule with one dot removed.

    ``vectors[a]`` is given on the sigma/center orbitals
    ``(sigmaF, sigmaG, sigmaJ, 0I)``; ``energies[a]`` in meV.
    """

    vectors: dict[str, np.ndarray]
    energies: dict[str, float]
    overlaps: dict[str, float]


@dataclass(frozen=True)
class TwoQubitState:
    S_FJ: complex
    S_GJ: complex
    S_FK: complex
    S_GK: complex
    Y_J: complex = 0j
    Y_K: complex = 0j
    residual: float = 0.0  # population in excited states other than the barred ones

    @classmethod
    def from_qubits(cls, theta: float, varphi: float, theta_c: float, varphi_c: float) -> "TwoQubitState":
        t0 = math.cos(theta) * np.exp(1j * varphi)
        t1 = math.sin(theta)
        c0 = math.cos(theta_c) * np.exp(1j * varphi_c)
        c1 = math.sin(theta_c)
        return cls(complex(t0 * c0), complex(t1 * c0), complex(t0 * c1), complex(t1 * c1))

    @classmethod
    def basis(cls, index: int) -> "TwoQubitState":
        v = np.zeros(4, dtype=complex)
        v[index] = 1.0
        return cls(*v)

    @property
    def computational(self) -> np.ndarray:
        return np.array([self.S_FJ, self.S_GJ, self.S_FK, self.S_GK])

    @property
    def Z(self) -> np.ndarray:
        """Amplitudes with the control electron excited; zero for these inputs."""
        return np.zeros(4, dtype=complex)

    @property
    def leakage(self) -> float:
        return abs(self.Y_J) ** 2 + abs(self.Y_K) ** 2 + self.residual

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.computational) ** 2) + self.leakage)


@dataclass(frozen=True)
class CnotPulse:
    E0: float
    N: int
    omega_K: float
    omega_J: float
    Omega_C: float
    tau_C: float
    gap: float


def build_hc0(spec: CnotSpec) -> np.ndarray:
    H = np.diag([spec.eps_s] * 4 + [spec.eps_p] * 9).astype(complex)
    c = _I("0I")
    for site, g in (("sigmaF", spec.V), ("sigmaG", spec.V), ("sigmaJ", spec.V_prime)):
        H[c, _I(site)] = H[_I(site), c] = g
    return H


def closed_form_barred(spec: CnotSpec) -> dict[str, np.ndarray]:
    """Barred states in the 13-site basis."""
    eta = spec.eta
    out = {}
    for a, (coef, norm) in {
        "K": ({"sigmaF": 1, "sigmaG": 1, "sigmaJ": eta, "0I": -math.sqrt(2 + eta * eta)}, math.sqrt(2 * eta * eta + 4)),
        "J": ({"sigmaF": 1, "sigmaG": 1, "0I": -SQRT2}, 2.0),
        "G": ({"sigmaF": 1, "sigmaJ": eta, "0I": -math.sqrt(1 + eta * eta)}, math.sqrt(2 * eta * eta + 2)),
        "F": ({"sigmaG": 1, "sigmaJ": eta, "0I": -math.sqrt(1 + eta * eta)}, math.sqrt(2 * eta * eta + 2)),
    }.items():
        v = np.zeros(13, dtype=complex)
        for site, val in coef.items():
            v[_I(site)] = val / norm
        out[a] = v
    return out


def _without(dot: str) -> list[int]:
    gone = set(DOTS[dot])
    return [i for i in range(13) if i not in gone]


def _lowest_excited(H: np.ndarray, idx: list[int], ref: np.ndarray, name: str):
    """Lowest state of H restricted to the excited orbitals among ``idx``.

    The dot ground orbitals are uncoupled in H^C_0, so they are dropped
    before diagonalizing; this holds even when the bonding level lies below
    eps_s.  Returns (energy, vector on idx, overlap with ``ref``).
    """
    ground = {_I(f"0{d}") for d in "FGJK"}
    exc_idx = [i for i in idx if i not in ground]
    dec = hermitian_eigendecompose(H[np.ix_(exc_idx, exc_idx)], name)
    w, Q = dec.eigenvalues, dec.eigenvectors
    tol = 1e-9 * max(1.0, np.abs(w).max())
    group = np.nonzero(np.abs(w - w[0]) <= tol)[0]
    P = Q[:, group]
    r = ref[exc_idx]
    proj = P @ (P.conj().T @ r)
    wgt = float(np.vdot(proj, proj).real)
    vec = proj / math.sqrt(wgt) if wgt > 0 else P[:, 0]
    full = np.zeros(len(idx), dtype=complex)
    pos = {j: k for k, j in enumerate(idx)}
    full[[pos[i] for i in exc_idx]] = vec
    return float(w[0]), full, wgt


def barred_states(spec: CnotSpec, *, min_overlap: float = 0.999) -> BarredStates:
    """Remove each dot in turn and take the lowest excited single-particle state."""
    H = build_hc0(spec)
    refs = closed_form_barred(spec)
    keep = [_I(s) for s in ("sigmaF", "sigmaG", "sigmaJ", "0I")]
    vectors, energies, overlaps = {}, {}, {}
    for a in ("F", "G", "J", "K"):
        idx = _without(a)
        e, vec, wgt = _lowest_excited(H, idx, refs[a], f"H^C_0 without dot {a}")
        if wgt < min_overlap:
            raise NumericalError(f"barred state for dot {a}: overlap with closed form {wgt:.6f} < {min_overlap}")
        full = np.zeros(13, dtype=complex)
        full[idx] = vec
        vectors[a] = full[keep]
        energies[a] = e
        overlaps[a] = wgt
    return BarredStates(vectors, energies, overlaps)


@dataclass(frozen=True)
class TwoParticleSpectrum:
    energies: np.ndarray
    vectors: np.ndarray
    ground_residual: float  # max |(H - 2 eps_s) g| over the twelve product ground states
    low_excited: np.ndarray  # eight lowest energies above 2 eps_s


def _dot_of_site() -> np.ndarray:
    lab = np.empty(13, dtype=int)
    for k, (d, sites) in enumerate(DOTS.items()):
        lab[list(sites)] = k
    return lab


def two_particle_hamiltonian(spec: CnotSpec, U_c: float) -> np.ndarray:
    """H0(1) + H0(2) + U_c on every configuration with both electrons on one dot.

    The electrons are labelled (target 1, control 2), so the product basis
    |i>_1 |j>_2 has 169 states with index 13 i + j.
    """
    if not U_c >= 0:
        raise ConfigError(f"U_c must be >= 0, got {U_c}")
    h = build_hc0(spec)
    eye = np.eye(13)
    H = np.kron(h, eye) + np.kron(eye, h)
    dot = _dot_of_site()
    same = (dot[:, None] == dot[None, :]).ravel()
    H[np.diag_indices(169)] += U_c * same
    return H


def two_particle_spectrum(spec: CnotSpec, U_c: float | None = None) -> TwoParticleSpectrum:
    U = spec.U_c if U_c is None else U_c
    H = two_particle_hamiltonian(spec, U)
    dec = hermitian_eigendecompose(H, "two-particle H^C")
    w = dec.eigenvalues
    res = 0.0
    ground = [_I(f"0{a}") for a in "FGJK"]
    for i in ground:
        for j in ground:
            if i == j:
                continue
            g = np.zeros(169)
            g[13 * i + j] = 1.0
            res = max(res, float(np.abs(H @ g - 2 * spec.eps_s * g).max()))
    tol = 1e-9 * max(1.0, np.abs(w).max())
    above = w[w > 2 * spec.eps_s + tol]
    return TwoParticleSpectrum(w, dec.eigenvectors, res, above[:8])


def blockade_reference(spec: CnotSpec) -> np.ndarray:
    """Eight low excitation energies eps_s + eps_bar, two per blocked dot, sorted."""
    e = spec.barred_energies()
    return np.sort([spec.eps_s + e[a] for a in "FGJK" for _ in range(2)])


def cnot_parameters(spec: CnotSpec, E0: float, N: int = 1) -> CnotPulse:
    """Pulse resonant with the K-branch transition (polarized along x)."""
    if not E0 > 0:
        raise ConfigError(f"E0 must be > 0, got {E0}")
    if int(N) != N or N < 1 or N % 2 != 1:
        raise ConfigError(f"CNOT pulse needs an odd positive N, got {N}")
    eta = spec.eta
    hw_K = spec.eps_p - spec.eps_s - math.sqrt(2 + eta * eta) * spec.V
    hw_J = spec.eps_p - spec.eps_s - SQRT2 * spec.V
    if not hw_K > 0:
        raise ConfigError("K-branch transition energy must be positive")
    hOmega = SQRT2 * (spec.eps_p - spec.eps_s) * field_dipole_energy(E0, spec.xi) * math.cos(spec.phi_G) / (
        hw_K * math.sqrt(2 + eta * eta)
    )
    if hOmega > spec.gap / 10:
        warnings.warn(
            f"resonant approximation degraded: hbar*Omega_C = {hOmega:.4g} meV vs gap {spec.gap:.4g} meV",
            stacklevel=2,
        )
    Omega_C = hOmega / HBAR
    return CnotPulse(
        E0=E0,
        N=int(N),
        omega_K=hw_K / HBAR,
        omega_J=hw_J / HBAR,
        Omega_C=Omega_C,
        tau_C=2 * math.pi * N / Omega_C,
        gap=spec.gap,
    )


def field_for_rabi(spec: CnotSpec, hbar_omega_c: float) -> float:
    """E0 (V/cm) giving hbar*Omega_C = ``hbar_omega_c`` (meV)."""
    eta = spec.eta
    hw_K = spec.eps_p - spec.eps_s - math.sqrt(2 + eta * eta) * spec.V
    e0xi = hbar_omega_c * hw_K * math.sqrt(2 + eta * eta) / (SQRT2 * (spec.eps_p - spec.eps_s) * math.cos(spec.phi_G))
    return e0xi / (spec.xi * 1e-4)


def analytic_cnot_propagator(Omega_C: float, t: float) -> np.ndarray:
    """Resonant-branch map on (S_FK, S_GK, Y_K)."""
    if not Omega_C > 0:
        raise ConfigError("Omega_C must be positive")
    c2 = math.cos(Omega_C * t / 4) ** 2
    s2 = math.sin(Omega_C * t / 4) ** 2
    h = math.sin(Omega_C * t / 2) / SQRT2
    c = math.cos(Omega_C * t / 2)
    return np.array([[c2, s2, h], [s2, c2, -h], [-h, h, c]])


def ideal_cnot(state: TwoQubitState) -> np.ndarray:
    v = state.computational
    return np.array([v[0], v[1], v[3], v[2]])


def ideal_truth_table() -> np.ndarray:
    """Probabilities of the analytic map at t = tau_C (odd N)."""
    M = analytic_cnot_propagator(1.0, 2 * math.pi)
    T = np.eye(4)
    T[2:, 2:] = M[:2, :2] ** 2
    return T


def light_coupling_c(spec: CnotSpec, E0: float, omega: float) -> np.ndarray:
    """Hermitian L (13x13, site basis) with H_light(t) = cos(omega t) L."""
    b = SQRT2 * (spec.eps_p - spec.eps_s) * field_dipole_energy(E0, spec.xi) / (HBAR * omega)
    cG, sG = math.cos(spec.phi_G), math.sin(spec.phi_G)
    cK, sK = math.cos(spec.phi_K), math.sin(spec.phi_K)
    C = np.zeros((13, 13), dtype=complex)
    for (i, j), val in {
        ("0F", "sigmaF"): cG,
        ("0F", "piF"): sG,
        ("0G", "sigmaG"): -cG,
        ("0G", "piG"): sG,
        ("0J", "piJ"): -1.0,
        ("0K", "sigmaK"): -cK,
        ("0K", "piK"): sK,
    }.items():
        C[_I(i), _I(j)] = val
    C *= -1j * b
    return C + C.conj().T


@dataclass(frozen=True)
class _Branch:
    """Target-electron dynamics with the control electron parked on one dot."""

    blocked: str
    sites: list[int]
    energies: np.ndarray
    transform: np.ndarray
    barred_index: int


def _branch(spec: CnotSpec, blocked: str) -> _Branch:
    other = "J" if blocked == "K" else "K"
    # sigma then pi ordering of excited orbitals; 0I last
    excited = [_I("sigmaF"), _I("sigmaG"), _I(f"sigma{other}"), _I("piF"), _I("piG"), _I(f"pi{other}")]
    sites = [_I("0F"), _I("0G")] + excited + [_I("0I")]
    H = build_hc0(spec)[np.ix_(sites, sites)]
    dec = hermitian_eigendecompose(H[2:, 2:], f"excited block, control on {blocked}")
    w, Q = dec.eigenvalues.copy(), dec.eigenvectors.copy()
    ref = closed_form_barred(spec)[blocked][sites[2:]]
    tol = 1e-9 * max(1.0, np.abs(w).max())
    group = np.nonzero(np.abs(w - w[0]) <= tol)[0]
    P = Q[:, group]
    proj = P @ (P.conj().T @ ref)
    wgt = float(np.vdot(proj, proj).real)
    if wgt < 0.999:
        raise NumericalError(f"barred state of branch {blocked} not found (overlap {wgt:.6f})")
    # rotate the lowest eigenspace so its first column is the closed-form barred state
    basis = np.column_stack([proj / math.sqrt(wgt), P])
    q, _ = np.linalg.qr(basis)
    q = q[:, : len(group)]
    q[:, 0] = proj / math.sqrt(wgt)
    Q[:, group] = q
    T = np.zeros((9, 9), dtype=complex)
    T[0, 0] = T[1, 1] = 1.0
    T[2:, 2:] = Q
    energies = np.concatenate([[spec.eps_s, spec.eps_s], w])
    return _Branch(blocked, sites, energies, T, 2)


@dataclass(frozen=True)
class CnotSimulation:
    """Conditioned propagation of one two-qubit input.

    ``computational[i]`` holds (S_FJ, S_GJ, S_FK, S_GK) at ``times[i]``;
    ``barred[i]`` holds (Y_J, Y_K); ``leakage[i]`` is the total excited
    population and ``norm[i]`` the total squared norm.
    """

    times: np.ndarray
    computational: np.ndarray
    barred: np.ndarray
    leakage: np.ndarray
    norm: np.ndarray
    final: TwoQubitState
    fidelity: float
    max_norm_drift: float
    flagged: bool


def _propagate_branch(spec, pulse: CnotPulse, br: _Branch, dt, every):
    L = light_coupling_c(spec, pulse.E0, pulse.omega_K)[np.ix_(br.sites, br.sites)]
    Lm = br.transform.conj().T @ L @ br.transform
    runs = []
    for k in (0, 1):
        psi0 = np.zeros(9, dtype=complex)
        psi0[k] = 1.0
        runs.append(
            evolve_driven(np.zeros((9, 9)), 0.5 * Lm, pulse.omega_K, psi0, 0.0, pulse.tau_C, dt,
                          frame_energies=br.energies, sample_every=every)
        )
    return runs


class ConditionedCnot:
    """Propagates both control branches once; any input is a linear combination."""

    def __init__(self, spec: CnotSpec, pulse: CnotPulse, *, dt: float | None = None,
                 samples_per_period: int = 64, n_samples: int = 400):
        self.spec = spec
        self.pulse = pulse
        self.branches = {b: _branch(spec, b) for b in ("J", "K")}
        # one clock for both branches so their samples line up
        if dt is None:
            spread = max(br.energies.max() - br.energies.min() for br in self.branches.values())
            dt = 2 * math.pi / ((pulse.omega_K + spread / HBAR) * samples_per_period)
        every = max(1, math.ceil(pulse.tau_C / dt) // max(1, n_samples))
        self.runs = {b: _propagate_branch(spec, pulse, br, dt, every) for b, br in self.branches.items()}
        self.times = self.runs["K"][0].times
        self.max_norm_drift = max(r.max_norm_drift for rs in self.runs.values() for r in rs)

    def simulate(self, state: TwoQubitState) -> CnotSimulation:
        s = state.computational
        if state.leakage > 0:
            raise ValueError("input must have zero leakage amplitudes")
        parts = {}
        for b, (a_F, a_G) in (("J", (s[0], s[1])), ("K", (s[2], s[3]))):
            r0, r1 = self.runs[b]
            parts[b] = a_F * r0.states + a_G * r1.states
        J, K = parts["J"], parts["K"]
        comp = np.column_stack([J[:, 0], J[:, 1], K[:, 0], K[:, 1]])
        barred = np.column_stack([J[:, 2], K[:, 2]])
        exc = (np.abs(J[:, 2:]) ** 2).sum(axis=1) + (np.abs(K[:, 2:]) ** 2).sum(axis=1)
        norm = (np.abs(comp) ** 2).sum(axis=1) + exc
        resid = exc[-1] - float(np.sum(np.abs(barred[-1]) ** 2))
        final = TwoQubitState(*comp[-1], Y_J=complex(barred[-1, 0]), Y_K=complex(barred[-1, 1]), residual=max(0.0, resid))
        ideal = ideal_cnot(state)
        fid = float(abs(np.vdot(ideal, comp[-1])) ** 2 / np.vdot(ideal, ideal).real)
        return CnotSimulation(
            times=self.times,
            computational=comp,
            barred=barred,
            leakage=exc,
            norm=norm,
            final=final,
            fidelity=fid,
            max_norm_drift=self.max_norm_drift,
            flagged=bool(exc[-1] > LEAKAGE_FLAG),
        )

    def truth_table(self) -> np.ndarray:
        T = np.empty((4, 4))
        for i in range(4):
            T[i] = np.abs(self.simulate(TwoQubitState.basis(i)).final.computational) ** 2
        return T


def simulate_cnot(spec: CnotSpec, pulse: CnotPulse, state: TwoQubitState, **kw) -> CnotSimulation:
    """Conditioned numerical propagation without the resonant approximation.

    The control electron never moves (the light cannot excite it out of
    |0;J> or |0;K> into a barred state), so the problem splits into two
    target-electron problems: with the control on K the target sees the
    molecule without dot K and is driven resonantly; with the control on J
    it sees the molecule without dot J and the same pulse is detuned by the
    gap.  Both are integrated with the full cos(omega t) drive.
    """
    return ConditionedCnot(spec, pulse, **kw).simulate(state)


def truth_table_fidelity(spec: CnotSpec, pulse: CnotPulse, **kw) -> np.ndarray:
    """Output probabilities (rows: basis inputs, columns: basis outputs)."""
    return ConditionedCnot(spec, pulse, **kw).truth_table()


def permuted_diagonal(T: np.ndarray) -> np.ndarray:
    """Entries of T on the ideal CNOT permutation, one per input."""
    perm = [0, 1, 3, 2]
    return np.array([T[i, perm[i]] for i in range(4)])
