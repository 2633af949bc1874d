"""Dense linear algebra and propagation kernels shared by the physics modules.

Energies are in meV and times in ps throughout; ``hbar`` defaults to
:data:`qdgates.constants.HBAR`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .constants import HBAR
from .errors import NormDriftError, NotHermitianError, NumericalError

HERMITIAN_RTOL = 1e-12
NORM_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and the matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.conj().T

    def propagator(self, t: float, hbar: float = HBAR) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * np.exp(-1j * self.eigenvalues * t / hbar)) @ Q.conj().T


@dataclass(frozen=True)
class Propagation:
    """Result of a time-dependent propagation.

    ``states[i]`` is the state at ``times[i]``; the final state is also kept
    separately as ``psi``.  ``max_norm_drift`` is the largest deviation of
    the squared norm from its initial value over all steps.
    """

    psi: np.ndarray
    times: np.ndarray
    states: np.ndarray
    max_norm_drift: float
    dt: float
    nsteps: int


def as_state(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"state must be a non-empty vector, got shape {v.shape}")
    return v


def check_hermitian(H, name: str = "H", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``H`` as a complex array, raising if it is not Hermitian."""
    M = np.asarray(H, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise NotHermitianError(f"{name}: expected a non-empty square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(), np.finfo(float).tiny)
    err = np.abs(M - M.conj().T).max()
    if err > rtol * scale:
        raise NotHermitianError(f"{name}: not Hermitian (max |H - H^+| = {err:.3e}, scale {scale:.3e})")
    return M


def hermitian_eigendecompose(H, name: str = "H") -> SpectralDecomposition:
    """Diagonalize a Hermitian matrix with LAPACK ``zheevd``.

    The matrix is symmetrized before the call so that round-off below the
    Hermiticity tolerance cannot leak into the eigenvectors.
    """
    M = check_hermitian(H, name)
    M = 0.5 * (M + M.conj().T)
    try:
        w, Q = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{name}: eigendecomposition did not converge ({exc})") from exc
    return SpectralDecomposition(w, Q)


def evolve_static(H, psi0, t: float, hbar: float = HBAR) -> np.ndarray:
    """Return exp(-i H t / hbar) psi0 via the spectral decomposition of ``H``."""
    psi0 = as_state(psi0)
    M = np.asarray(H)
    if M.ndim != 2 or M.shape[0] != psi0.shape[0]:
        raise ValueError(f"dimension mismatch: H is {M.shape}, psi0 has {psi0.shape[0]} entries")
    dec = hermitian_eigendecompose(M)
    Q = dec.eigenvectors
    return Q @ (np.exp(-1j * dec.eigenvalues * t / hbar) * (Q.conj().T @ psi0))


def _step_count(t0: float, t1: float, dt: float) -> tuple[int, float]:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    span = t1 - t0
    if span < 0:
        raise ValueError(f"t1 ({t1}) must not precede t0 ({t0})")
    if span == 0:
        return 0, dt
    n = max(1, math.ceil(span / dt - 1e-9))
    return n, span / n


def _check_drift(drift: float, limit: float, dt: float) -> None:
    if drift > limit:
        raise NormDriftError(
            f"norm drift {drift:.3e} exceeds {limit:.1e} with dt={dt:.4g} ps; use a smaller time step"
        )


def evolve_timedep(
    H_of_t: Callable[[float], np.ndarray],
    psi0,
    t0: float,
    t1: float,
    dt: float,
    *,
    sample_every: int = 1,
    hbar: float = HBAR,
    drift_limit: float = NORM_DRIFT_LIMIT,
) -> Propagation:
    """Integrate i hbar dpsi/dt = H(t) psi with fixed-step classical RK4.

    ``dt`` is shrunk so that an integer number of steps lands exactly on
    ``t1``.  The state is never renormalized; a squared-norm drift above
    ``drift_limit`` raises :class:`NormDriftError`.
    """
    psi = as_state(psi0).copy()
    dim = psi.shape[0]
    nsteps, dt = _step_count(t0, t1, dt)
    norm0 = np.vdot(psi, psi).real
    c = -1j / hbar

    def rhs(t, y):
        H = np.asarray(H_of_t(t))
        if H.shape != (dim, dim):
            raise ValueError(f"H(t={t}) has shape {H.shape}, expected {(dim, dim)}")
        return c * (H @ y)

    times = [t0]
    states = [psi.copy()]
    drift = 0.0
    for n in range(nsteps):
        t = t0 + n * dt
        k1 = rhs(t, psi)
        k2 = rhs(t + 0.5 * dt, psi + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, psi + 0.5 * dt * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = max(drift, abs(np.vdot(psi, psi).real - norm0))
        if (n + 1) % sample_every == 0 or n + 1 == nsteps:
            times.append(t0 + (n + 1) * dt)
            states.append(psi.copy())
    _check_drift(drift, drift_limit, dt)
    return Propagation(psi, np.array(times), np.array(states), drift, dt, nsteps)


def evolve_driven(
    H0,
    A,
    omega: float,
    psi0,
    t0: float,
    t1: float,
    dt: float,
    *,
    frame_energies=None,
    sample_every: int = 1,
    hbar: float = HBAR,
    drift_limit: float = NORM_DRIFT_LIMIT,
) -> Propagation:
    """RK4 for H(t) = H0 + e^{i omega t} A + e^{-i omega t} A^+.

    With ``frame_energies`` given, the equation is integrated in the
    interaction picture with respect to ``diag(frame_energies)``: ``H0`` must
    then be the remainder ``H - diag(frame_energies)`` and the returned
    amplitudes are c_k = exp(i e_k t / hbar) psi_k.  This is exact, not an
    approximation, and removes the fast free phases from the step-size
    constraint.
    """
    psi0 = as_state(psi0)
    dim = psi0.shape[0]
    H0 = np.ascontiguousarray(H0, dtype=np.complex128)
    A = np.ascontiguousarray(A, dtype=np.complex128)
    if H0.shape != (dim, dim) or A.shape != (dim, dim):
        raise ValueError(f"dimension mismatch: H0 {H0.shape}, A {A.shape}, psi0 {dim}")
    check_hermitian(H0, "H0")
    if frame_energies is None:
        energies = np.zeros(dim)
    else:
        energies = np.ascontiguousarray(frame_energies, dtype=np.float64)
        if energies.shape != (dim,):
            raise ValueError(f"frame_energies must have {dim} entries")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    nsteps, dt = _step_count(t0, t1, dt)
    if nsteps == 0:
        return Propagation(psi0.copy(), np.array([t0]), psi0[None, :].copy(), 0.0, dt, 0)
    psi, states, times, drift = _kernels.rk4_drive(
        H0, A, float(omega), energies, float(hbar), np.ascontiguousarray(psi0), float(t0), float(dt), int(nsteps), int(sample_every)
    )
    _check_drift(drift, drift_limit, dt)
    return Propagation(psi, times, states, float(drift), dt, nsteps)


def fidelity(psi, phi) -> float:
    """Squared overlap |<phi|psi>|^2 of two normalized states."""
    a = as_state(psi)
    b = as_state(phi)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    for name, v in (("psi", a), ("phi", b)):
        n = np.vdot(v, v).real
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"{name} is not normalized (norm^2 = {n:.9f})")
    f = abs(np.vdot(b, a)) ** 2
    return float(min(max(f, 0.0), 1.0))
