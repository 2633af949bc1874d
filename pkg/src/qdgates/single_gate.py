"""Three-dot single-bit gate.

Two large dots A and B each hold an s level and a pair of p levels; the
small dot C in between holds one level degenerate with the p levels.  The
qubit lives on the localized ground states |0;A> and |0;B>, and light
resonant with the first excited molecular orbital rotates it.

Geometry: dot B sits at angle ``phi_B`` from the x axis and dot A at
``-phi_B`` (mirror image), which is the arrangement the light-coupling
coefficients below presume.  The level of dot C equals ``eps_p``.

Site basis order: ``0A, 0B, sigmaA, sigmaB, piA, piB, 0C``.
Molecular basis order: ``|0> ... |6>`` with energies
``eps_s, eps_s, eps_p - sqrt2 V, eps_p, eps_p, eps_p, eps_p + sqrt2 V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR, SQRT2, field_dipole_energy, field_from_energy
from .core import Propagation, evolve_driven, hermitian_eigendecompose
from .errors import ConfigError, ConvergenceError, NumericalError

SITE_LABELS = ("0A", "0B", "sigmaA", "sigmaB", "piA", "piB", "0C")
LEAKAGE_FLAG = 0.05
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MoleculeSpec:
    """Energies (meV), coupling (meV), angle of dot B (rad) and dipole (e nm)."""

    eps_s: float
    eps_p: float
    V: float
    phi_B: float
    xi: float

    def __post_init__(self):
        if not self.eps_p > self.eps_s:
            raise ConfigError(f"eps_p ({self.eps_p}) must exceed eps_s ({self.eps_s})")
        if not self.V > 0:
            raise ConfigError(f"V must be > 0, got {self.V}")
        if not 0 < self.phi_B < math.pi / 2:
            raise ConfigError(f"phi_B must lie in (0, pi/2), got {self.phi_B}")
        if not self.xi > 0:
            raise ConfigError(f"xi must be > 0, got {self.xi}")

    def closed_form_energies(self) -> np.ndarray:
        d = SQRT2 * self.V
        p = self.eps_p
        return np.array([self.eps_s, self.eps_s, p - d, p, p, p, p + d])

    @property
    def resonance_energy(self) -> float:
        """eps_2 - eps_0 in meV."""
        return self.eps_p - self.eps_s - SQRT2 * self.V


@dataclass(frozen=True)
class PulseSpec:
    """Rectangular monochromatic pulse.

    ``E0`` in V/cm, polarization ``phi`` in rad, detuning ``delta`` in 1/ps
    (positive means the photon is below the |0> -> |2> transition) and the
    cycle count ``N`` that fixes the duration.
    """

    E0: float
    phi: float = 0.0
    delta: float = 0.0
    N: int = 1

    def __post_init__(self):
        if not self.E0 >= 0:
            raise ConfigError(f"E0 must be >= 0, got {self.E0}")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}")

    @classmethod
    def from_rabi_energy(cls, spec: MoleculeSpec, hbar_omega: float, phi: float = 0.0,
                         delta: float = 0.0, N: int = 1) -> "PulseSpec":
        """Pulse whose Rabi energy hbar*Omega equals ``hbar_omega`` (meV)."""
        return cls(E0=field_from_rabi_energy(spec, hbar_omega), phi=phi, delta=delta, N=N)


@dataclass(frozen=True)
class PulseDerived:
    u: float
    v: float
    Omega: float
    Omega_t: float
    delta_theta: float
    tau: float
    delta: float
    N: int


@dataclass(frozen=True)
class QubitState:
    """Amplitudes on |0> = |0;A> and |1> = |0;B>.

    The canonical form multiplies by a global phase so that ``S1`` is real
    and non-negative (``S0`` real and positive when ``S1`` vanishes); then
    ``S0 = cos(theta) exp(i varphi)`` and ``S1 = sin(theta)``.
    """

    S0: complex
    S1: complex

    def __post_init__(self):
        n = abs(self.S0) ** 2 + abs(self.S1) ** 2
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"qubit amplitudes not normalized (|S0|^2+|S1|^2 = {n:.12f})")

    @classmethod
    def from_angles(cls, theta: float, varphi: float) -> "QubitState":
        return cls(complex(math.cos(theta) * np.exp(1j * varphi)), complex(math.sin(theta)))

    @classmethod
    def from_amplitudes(cls, amps, normalize: bool = False) -> "QubitState":
        a = np.asarray(amps, dtype=complex)
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(complex(a[0]), complex(a[1]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.S0, self.S1], dtype=complex)

    def canonical(self) -> "QubitState":
        if abs(self.S1) > 1e-15:
            g = np.conj(self.S1) / abs(self.S1)
        else:
            g = np.conj(self.S0) / abs(self.S0)
        return QubitState(complex(self.S0 * g), complex(abs(self.S1) if abs(self.S1) > 1e-15 else 0.0))

    @property
    def theta(self) -> float:
        return math.atan2(abs(self.S1), abs(self.S0))

    @property
    def varphi(self) -> float:
        c = self.canonical()
        if abs(c.S0) < 1e-15:
            return 0.0
        return float(np.angle(c.S0)) % TWO_PI


@dataclass(frozen=True)
class Spectrum7:
    """Energies and orbitals of the seven molecular states.

    ``orbitals[:, k]`` is |k> in the site basis, phase-aligned with the
    closed-form vectors; ``overlaps[k]`` is the weight of the closed-form
    |k> inside the numerical eigenspace it was matched to.
    """

    energies: np.ndarray
    orbitals: np.ndarray
    overlaps: np.ndarray


def build_h0(spec: MoleculeSpec) -> np.ndarray:
    """Site-basis Hamiltonian of the three-dot molecule (7x7, meV)."""
    H = np.diag([spec.eps_s, spec.eps_s] + [spec.eps_p] * 5).astype(complex)
    for j in (2, 3):  # sigmaA, sigmaB <-> 0C
        H[6, j] = H[j, 6] = spec.V
    return H


def closed_form_orbitals() -> np.ndarray:
    """Columns are the analytic molecular orbitals |0> .. |6> in the site basis."""
    r = 1.0 / SQRT2
    Q = np.zeros((7, 7))
    Q[0, 0] = 1.0
    Q[1, 1] = 1.0
    Q[[6, 3, 2], 2] = [SQRT2 / 2, -0.5, -0.5]
    Q[[3, 2], 3] = [r, -r]
    Q[4, 4] = 1.0
    Q[5, 5] = 1.0
    Q[[6, 3, 2], 6] = [SQRT2 / 2, 0.5, 0.5]
    return Q


def _clusters(w: np.ndarray, tol: float) -> list[np.ndarray]:
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > tol:
            groups.append(np.arange(start, i))
            start = i
    return groups


def match_orbitals(H: np.ndarray, reference: np.ndarray, *, min_overlap: float = 0.99, name: str = "H"):
    """Label the eigenstates of ``H`` by the reference vectors (columns).

    Each reference vector is projected onto every numerically degenerate
    eigenspace; it is assigned to the one that captures the most weight, so
    the arbitrary basis chosen by LAPACK inside a degenerate subspace never
    matters.  Returns (energies, aligned vectors, captured weights).
    """
    dec = hermitian_eigendecompose(H, name)
    w, Q = dec.eigenvalues, dec.eigenvectors
    scale = max(1.0, np.abs(w).max())
    groups = _clusters(w, 1e-9 * scale)
    n_ref = reference.shape[1]
    energies = np.empty(n_ref)
    vectors = np.empty((H.shape[0], n_ref), dtype=complex)
    weights = np.empty(n_ref)
    for k in range(n_ref):
        ref = reference[:, k].astype(complex)
        best = None
        for g in groups:
            P = Q[:, g]
            proj = P @ (P.conj().T @ ref)
            wgt = np.vdot(proj, proj).real
            if best is None or wgt > best[0]:
                best = (wgt, g, proj)
        wgt, g, proj = best
        if wgt < min_overlap:
            raise NumericalError(
                f"{name}: reference state {k} overlaps its best eigenspace only {wgt:.6f} (< {min_overlap})"
            )
        energies[k] = w[g].mean()
        vectors[:, k] = proj / math.sqrt(wgt)
        weights[k] = wgt
    return energies, vectors, weights


def molecular_spectrum(spec: MoleculeSpec) -> Spectrum7:
    energies, vectors, weights = match_orbitals(build_h0(spec), closed_form_orbitals(), name="H0")
    return Spectrum7(energies, vectors, weights)


def drive_frequency(spec: MoleculeSpec, pulse: PulseSpec) -> float:
    """Photon angular frequency in 1/ps."""
    omega = spec.resonance_energy / HBAR - pulse.delta
    if not omega > 0:
        raise ConfigError(f"drive frequency must be positive, got {omega} 1/ps")
    return omega


def light_coupling(spec: MoleculeSpec, pulse: PulseSpec) -> np.ndarray:
    """Hermitian L with H_light(t) = cos(omega t) L, molecular basis, meV.

    Only ground <-> excited transitions appear; transitions among the excited
    orbitals are left out by construction.
    """
    omega = drive_frequency(spec, pulse)
    a = (spec.eps_p - spec.eps_s) * field_dipole_energy(pulse.E0, spec.xi) / (SQRT2 * HBAR * omega)
    u = math.cos(spec.phi_B + pulse.phi)
    v = math.cos(spec.phi_B - pulse.phi)
    C = np.zeros((7, 7), dtype=complex)
    C[0, 2] = u
    C[1, 2] = -v
    C[0, 3] = SQRT2 * u
    C[1, 3] = SQRT2 * v
    C[0, 4] = -2.0 * math.sin(spec.phi_B + pulse.phi)
    C[1, 5] = -2.0 * math.sin(spec.phi_B - pulse.phi)
    C[0, 6] = -u
    C[1, 6] = v
    C *= 1j * a
    return C + C.conj().T


def build_h_light(spec: MoleculeSpec, pulse: PulseSpec, t: float) -> np.ndarray:
    return math.cos(drive_frequency(spec, pulse) * t) * light_coupling(spec, pulse)


def rabi_energy(spec: MoleculeSpec, E0: float) -> float:
    """hbar*Omega in meV for field ``E0`` (V/cm)."""
    return SQRT2 * field_dipole_energy(E0, spec.xi) * (spec.eps_p - spec.eps_s) / spec.resonance_energy


def field_from_rabi_energy(spec: MoleculeSpec, hbar_omega: float) -> float:
    return field_from_energy(hbar_omega * spec.resonance_energy / (SQRT2 * (spec.eps_p - spec.eps_s)), spec.xi)


def generalized_rabi(Omega: float, u: float, v: float, delta: float) -> float:
    return math.sqrt(delta * delta + Omega * Omega * (u * u + v * v) / 4.0)


def pulse_derived(spec: MoleculeSpec, pulse: PulseSpec) -> PulseDerived:
    u = math.cos(spec.phi_B + pulse.phi)
    v = math.cos(spec.phi_B - pulse.phi)
    Omega = rabi_energy(spec, pulse.E0) / HBAR
    Omega_t = generalized_rabi(Omega, u, v, pulse.delta)
    if Omega_t == 0 or (u * u + v * v < 1e-30 and pulse.delta == 0):
        raise ConfigError("pulse drives nothing (no coupling to |2> and zero detuning)")
    return PulseDerived(
        u=u,
        v=v,
        Omega=Omega,
        Omega_t=Omega_t,
        delta_theta=math.atan2(v, u),
        tau=TWO_PI * pulse.N / Omega_t,
        delta=pulse.delta,
        N=int(pulse.N),
    )


def _reduced_map(u: float, v: float, Omega: float, delta: float, t: float) -> np.ndarray:
    r2 = u * u + v * v
    Ot = generalized_rabi(Omega, u, v, delta)
    x = 0.5 * Ot * t
    sinc = 0.5 * t if Ot == 0 else math.sin(x) / Ot  # sin(Ot t/2)/Ot
    M = np.zeros((3, 3), dtype=complex)
    if r2 > 0:
        dark = np.array([[v * v, u * v, 0], [u * v, u * u, 0], [0, 0, 0]]) / r2
        bright = np.array([[u * u, -u * v, 0], [-u * v, v * v, 0], [0, 0, r2]]) / r2
        third = np.array(
            [
                [2j * delta * u * u, -2j * delta * u * v, Omega * u * r2],
                [-2j * delta * u * v, 2j * delta * v * v, -Omega * v * r2],
                [-Omega * u * r2, Omega * v * r2, -2j * delta * r2],
            ]
        ) / (2.0 * r2)
        M = np.exp(0.5j * delta * t) * dark + math.cos(x) * bright + sinc * third
    else:
        M = np.diag([np.exp(0.5j * delta * t), np.exp(0.5j * delta * t), np.exp(-0.5j * delta * t)])
    phases = np.exp(np.array([-0.5j, -0.5j, 0.5j]) * delta * t)
    return phases[:, None] * M


def analytic_reduced_propagator(derived: PulseDerived, delta: float, t: float) -> np.ndarray:
    """Closed-form map S(0) -> S(t) on the S-amplitudes of |0>, |1>, |2>.

    The S-amplitudes are interaction-picture coefficients,
    S_k = exp(i eps_k t / hbar) <k|Psi(t)>.  The map is the rotating-frame
    exponential dressed with the phases of the frame transformation, so it
    depends on the molecule only through u, v, Omega and ``delta``.
    """
    return _reduced_map(derived.u, derived.v, derived.Omega, delta, t)


def reduced_hamiltonian_terms(spec: MoleculeSpec, pulse: PulseSpec):
    """(energies, X) with H_r = diag(energies) + e^{i w t} X + h.c. on |0>,|1>,|2>."""
    d = pulse_derived(spec, pulse)
    e = spec.closed_form_energies()[:3]
    X = np.zeros((3, 3), dtype=complex)
    X[0, 2] = 0.25j * HBAR * d.Omega * d.u
    X[1, 2] = -0.25j * HBAR * d.Omega * d.v
    return e, X


def gate_matrix(spec: MoleculeSpec, pulse: PulseSpec) -> np.ndarray:
    """2x2 gate R(phi, delta) realized by a pulse of duration 2 N pi / Omega_t."""
    if pulse.N % 2 != 1:
        raise ConfigError(f"gate matrix requires an odd cycle count N, got {pulse.N}")
    d = pulse_derived(spec, pulse)
    x = 0.25 * pulse.delta * d.tau
    c2, s2 = math.cos(2 * d.delta_theta), math.sin(2 * d.delta_theta)
    cx, sx = math.cos(x), math.sin(x)
    R = np.array([[-c2 * cx + 1j * sx, s2 * cx], [s2 * cx, c2 * cx + 1j * sx]])
    return np.exp(-1j * x) * R


def relative_phase(R: np.ndarray) -> float:
    """Phase of |0> relative to |1> imposed by a diagonal gate, in [0, 2 pi)."""
    return float(np.angle(R[0, 0] / R[1, 1])) % TWO_PI


def phase_pulse_polarization(spec: MoleculeSpec) -> float:
    """Polarization that leaves |1> dark (v = 0)."""
    return spec.phi_B + math.pi / 2


def phase_detuning_bound(spec: MoleculeSpec, E0: float, N: int) -> tuple[float, float]:
    """(exact, seed) detuning bounds for a phase gate with cycle count N.

    ``exact`` solves N delta = Omega_t(delta) so that delta*tau/2 = pi.
    The ``seed`` bound Omega sin(2 phi_B)/sqrt(N^2 - 1) is twice as wide and
    only used to bracket the root.
    """
    if N < 3:
        raise ConfigError(f"phase gate needs N >= 3 to span a full turn, got {N}")
    Omega = rabi_energy(spec, E0) / HBAR
    s = abs(math.sin(2 * spec.phi_B))
    root = math.sqrt(N * N - 1.0)
    return Omega * s / (2 * root), Omega * s / root


def _phase_of_detuning(spec, E0, N, delta):
    Omega = rabi_energy(spec, E0) / HBAR
    u = math.cos(2 * spec.phi_B + math.pi / 2)
    return math.pi - N * math.pi * delta / generalized_rabi(Omega, u, 0.0, delta)


def detuning_for_phase(spec: MoleculeSpec, pulse_template: PulseSpec, target_phase: float, N: int | None = None) -> float:
    """Detuning (1/ps) at which the v = 0 pulse imposes ``target_phase`` on |0>.

    Solves pi - delta*tau(delta)/2 = target_phase by bisection; the phase is
    strictly decreasing in delta.
    """
    N = int(pulse_template.N if N is None else N)
    if N % 2 != 1:
        raise ConfigError(f"phase gate requires odd N, got {N}")
    exact, seed = phase_detuning_bound(spec, pulse_template.E0, N)
    if not 0.0 <= target_phase <= TWO_PI:
        raise ConfigError(
            f"target phase {target_phase} outside the admissible range [0, 2pi] "
            f"(detuning within +-{exact:.6g} 1/ps for N={N})"
        )
    f = lambda d: _phase_of_detuning(spec, pulse_template.E0, N, d) - target_phase
    lo, hi = -seed, seed
    flo, fhi = f(lo), f(hi)
    if flo < 0 or fhi > 0:
        raise ConvergenceError("phase bracket does not contain the target")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
        if fm > 0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(f(mid)) > 1e-10:
        raise ConvergenceError(f"bisection stalled at residual {abs(f(mid)):.3e} rad")
    return mid


def phase_pulse(spec: MoleculeSpec, E0: float, target_phase: float, N: int = 3) -> PulseSpec:
    tmpl = PulseSpec(E0=E0, phi=phase_pulse_polarization(spec), N=N)
    return PulseSpec(E0=E0, phi=tmpl.phi, delta=detuning_for_phase(spec, tmpl, target_phase, N), N=N)


def polarization_for_rotation(spec: MoleculeSpec, delta_theta: float) -> float:
    """Polarization giving atan2(v, u) = delta_theta (mod pi)."""
    x = delta_theta - math.pi / 4
    return math.atan2(math.cos(spec.phi_B) * math.sin(x), math.sin(spec.phi_B) * math.cos(x))


def prepare_qubit(spec: MoleculeSpec, theta: float, varphi: float, E0: float, N_phase: int = 3):
    """Two pulses taking |0> to cos(theta) e^{i varphi}|0> + sin(theta)|1>.

    First a resonant amplitude pulse with rotation angle theta/2 (equivalent
    to (theta - pi)/2, the gate depends on twice the angle), then a v = 0
    phase pulse.  The amplitude pulse leaves a relative phase of pi, which
    the phase pulse target absorbs.
    """
    dtheta = 0.5 * theta
    phi = polarization_for_rotation(spec, dtheta)
    amp = PulseSpec(E0=E0, phi=phi, delta=0.0, N=1)
    got = pulse_derived(spec, amp).delta_theta
    if abs(math.cos(2 * got) - math.cos(theta)) > 1e-9 or abs(math.sin(2 * got) - math.sin(theta)) > 1e-9:
        raise ConfigError(f"rotation angle {dtheta} not reachable by polarization for phi_B={spec.phi_B}")
    target = (varphi + math.pi) % TWO_PI
    return amp, phase_pulse(spec, E0, target, N_phase)


def apply_gates(spec: MoleculeSpec, pulses, state: QubitState) -> QubitState:
    v = state.vector
    for p in pulses:
        v = gate_matrix(spec, p) @ v
    return QubitState.from_amplitudes(v)


@dataclass(frozen=True)
class PulseSimulation:
    """Full seven-level propagation of one pulse.

    ``amplitudes[i]`` holds the S-amplitudes (interaction picture with
    respect to H0) at ``times[i]``; populations are their squared moduli.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    final: np.ndarray
    qubit: QubitState
    leakage: float
    max_upper_leakage: float
    predicted: np.ndarray
    fidelity: float
    max_norm_drift: float
    dt: float
    nsteps: int
    flagged: bool = field(default=False)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norms(self) -> np.ndarray:
        return self.populations.sum(axis=1)


def _embed(psi0) -> np.ndarray:
    if isinstance(psi0, QubitState):
        psi0 = psi0.vector
    v = np.asarray(psi0, dtype=complex)
    if v.shape == (2,):
        v = np.concatenate([v, np.zeros(5)])
    if v.shape != (7,):
        raise ValueError(f"initial state must have 2 or 7 entries, got {v.shape}")
    if np.abs(v[2:]).max() > 1e-12:
        raise ValueError("initial state must be supported on the qubit states |0>, |1>")
    return v


def choose_step(rate: float, samples_per_period: int) -> float:
    return TWO_PI / (rate * samples_per_period)


def simulate_pulse(
    spec: MoleculeSpec,
    pulse: PulseSpec,
    psi0,
    *,
    duration: float | None = None,
    dt: float | None = None,
    samples_per_period: int = 64,
    frame: str = "interaction",
    n_samples: int = 400,
) -> PulseSimulation:
    """Propagate under H0 + H_light(t) without any rotating-wave approximation.

    The drive keeps both co- and counter-rotating parts and is switched on
    at t = 0.  By default the interaction picture of H0 is integrated (exact,
    and much cheaper since only the slow envelope has to be resolved);
    ``frame="lab"`` integrates the lab-frame equation with the energy origin
    moved to mid-spectrum.
    """
    psi0 = _embed(psi0)
    omega = drive_frequency(spec, pulse)
    L = light_coupling(spec, pulse)
    e = spec.closed_form_energies()
    if duration is None:
        duration = pulse_derived(spec, pulse).tau
    spread = (e.max() - e.min()) / HBAR
    if frame == "interaction":
        rate = omega + spread
        H0 = np.zeros((7, 7), dtype=complex)
        frame_e = e
    elif frame == "lab":
        c = 0.5 * (e.max() + e.min())
        rate = omega + 0.5 * spread
        H0 = np.diag(e - c).astype(complex)
        frame_e = None
    else:
        raise ConfigError(f"unknown frame {frame!r}")
    if dt is None:
        dt = choose_step(rate, samples_per_period)
    every = max(1, math.ceil(duration / dt) // max(1, n_samples))
    prop: Propagation = evolve_driven(
        H0, 0.5 * L, omega, psi0, 0.0, duration, dt, frame_energies=frame_e, sample_every=every
    )
    amps = prop.states
    if frame == "lab":
        amps = amps * np.exp(1j * np.outer(prop.times, e - c) / HBAR)
    final = amps[-1]
    q = final[:2]
    leakage = max(0.0, 1.0 - float(np.vdot(q, q).real))
    upper = float((np.abs(amps[:, 3:]) ** 2).sum(axis=1).max())

    predicted = _predict(spec, pulse, psi0[:2], duration)
    fid = float(abs(np.vdot(predicted, q)) ** 2 / max(np.vdot(predicted, predicted).real, 1e-300))
    return PulseSimulation(
        times=prop.times,
        amplitudes=amps,
        final=final,
        qubit=QubitState.from_amplitudes(q, normalize=True),
        leakage=leakage,
        max_upper_leakage=upper,
        predicted=predicted,
        fidelity=fid,
        max_norm_drift=prop.max_norm_drift,
        dt=prop.dt,
        nsteps=prop.nsteps,
        flagged=leakage > LEAKAGE_FLAG,
    )


def _predict(spec, pulse, s0, duration):
    u = math.cos(spec.phi_B + pulse.phi)
    v = math.cos(spec.phi_B - pulse.phi)
    Omega = rabi_energy(spec, pulse.E0) / HBAR
    if Omega == 0:
        return np.asarray(s0, dtype=complex)
    M = _reduced_map(u, v, Omega, pulse.delta, duration)
    return M[:2, :2] @ s0


def simulate_sequence(spec: MoleculeSpec, pulses, psi0, **kw) -> list[PulseSimulation]:
    """Apply pulses back to back.

    Every pulse is switched on with its own clock, which is the convention
    under which gate matrices compose.  Residual leakage is dropped between
    pulses so that each one starts inside the qubit subspace.
    """
    out = []
    state = _embed(psi0)
    for p in pulses:
        sim = simulate_pulse(spec, p, state, **kw)
        out.append(sim)
        q = sim.final[:2]
        state = np.concatenate([q / np.linalg.norm(q), np.zeros(5)])
    return out
