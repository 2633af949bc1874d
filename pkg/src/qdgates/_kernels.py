"""Fixed-step RK4 kernels for harmonically driven Hamiltonians.

Both kernels integrate

    i hbar dpsi/dt = D(t)^+ [H0 + e^{i w t} A + e^{-i w t} A^+] D(t) psi,
    D(t) = diag(exp(-i e_k t / hbar)),

which covers the lab frame (``e = 0``) and the interaction picture with
respect to a diagonal Hamiltonian ``diag(e)`` (then ``H0`` holds whatever is
left over, usually zero).

The numba kernel is used unless numba is missing or the environment variable
``QDGATES_DISABLE_NUMBA`` is set to a true value, in which case the numpy
kernel is bound to :func:`rk4_drive`.  Both are always importable so they can
be compared against each other.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("QDGATES_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


def _n_samples(nsteps: int, every: int) -> int:
    return nsteps // every + 1 + (1 if nsteps % every else 0)


def rk4_drive_numpy(H0, A, omega, energies, hbar, psi0, t0, dt, nsteps, every):
    Ad = A.conj().T
    inv_hbar = 1.0 / hbar
    e = energies * inv_hbar

    # phases at the half and full step follow from the step start by one
    # fixed factor each, so only one set of exponentials is evaluated per step
    rh = np.exp(-0.5j * e * dt)
    rf = rh * rh
    wh = np.exp(0.5j * omega * dt)
    wf = wh * wh

    def rhs(p, eiw, psi):
        y = p * psi
        z = H0 @ y + eiw * (A @ y) + np.conj(eiw) * (Ad @ y)
        return (-1j * inv_hbar) * np.conj(p) * z

    nsamp = _n_samples(nsteps, every)
    samples = np.empty((nsamp, psi0.shape[0]), dtype=np.complex128)
    times = np.empty(nsamp)
    psi = psi0.astype(np.complex128).copy()
    norm0 = np.vdot(psi, psi).real
    samples[0] = psi
    times[0] = t0
    isamp = 1
    drift = 0.0
    half = 0.5 * dt
    for n in range(nsteps):
        t = t0 + n * dt
        p0 = np.exp(-1j * e * t)
        w0 = np.exp(1j * omega * t)
        ph, w_h = p0 * rh, w0 * wh
        k1 = rhs(p0, w0, psi)
        k2 = rhs(ph, w_h, psi + half * k1)
        k3 = rhs(ph, w_h, psi + half * k2)
        k4 = rhs(p0 * rf, w0 * wf, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        d = abs(np.vdot(psi, psi).real - norm0)
        if d > drift:
            drift = d
        if (n + 1) % every == 0 or n + 1 == nsteps:
            samples[isamp] = psi
            times[isamp] = t0 + (n + 1) * dt
            isamp += 1
    return psi, samples, times, drift


def _rk4_drive_loops(H0, A, omega, energies, hbar, psi0, t0, dt, nsteps, every):
    dim = psi0.shape[0]
    inv_hbar = 1.0 / hbar
    # drive matrices are sparse in practice (ground <-> excited only), so the
    # matrix-vector product runs over the union of nonzero entries
    nnz = 0
    for i in range(dim):
        for j in range(dim):
            if H0[i, j] != 0 or A[i, j] != 0 or A[j, i] != 0:
                nnz += 1
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    hv = np.empty(nnz, dtype=np.complex128)
    av = np.empty(nnz, dtype=np.complex128)
    adv = np.empty(nnz, dtype=np.complex128)
    m = 0
    for i in range(dim):
        for j in range(dim):
            if H0[i, j] != 0 or A[i, j] != 0 or A[j, i] != 0:
                rows[m] = i
                cols[m] = j
                hv[m] = H0[i, j]
                av[m] = A[i, j]
                adv[m] = np.conj(A[j, i])
                m += 1
    acc = np.empty(dim, dtype=np.complex128)

    nsamp = _n_samples(nsteps, every)
    samples = np.empty((nsamp, dim), dtype=np.complex128)
    times = np.empty(nsamp)
    psi = psi0.astype(np.complex128).copy()
    stage = np.empty(dim, dtype=np.complex128)
    y = np.empty(dim, dtype=np.complex128)
    p = np.empty(dim, dtype=np.complex128)
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty(dim, dtype=np.complex128)
    k3 = np.empty(dim, dtype=np.complex128)
    k4 = np.empty(dim, dtype=np.complex128)
    p0 = np.empty(dim, dtype=np.complex128)
    rh = np.empty(dim, dtype=np.complex128)
    rf = np.empty(dim, dtype=np.complex128)
    for i in range(dim):
        rh[i] = np.exp(-0.5j * energies[i] * dt * inv_hbar)
        rf[i] = rh[i] * rh[i]
    wh = np.exp(0.5j * omega * dt)
    wf = wh * wh

    norm0 = 0.0
    for i in range(dim):
        norm0 += psi[i].real ** 2 + psi[i].imag ** 2
        samples[0, i] = psi[i]
    times[0] = t0
    isamp = 1
    drift = 0.0
    half = 0.5 * dt
    mi = -1j * inv_hbar

    for n in range(nsteps):
        t = t0 + n * dt
        for i in range(dim):
            p0[i] = np.exp(-1j * energies[i] * t * inv_hbar)
        w0 = np.exp(1j * omega * t)
        for s in range(4):
            if s == 0:
                eiw = w0
                for i in range(dim):
                    p[i] = p0[i]
                    stage[i] = psi[i]
                out = k1
            elif s == 1:
                eiw = w0 * wh
                for i in range(dim):
                    p[i] = p0[i] * rh[i]
                    stage[i] = psi[i] + half * k1[i]
                out = k2
            elif s == 2:
                eiw = w0 * wh
                for i in range(dim):
                    p[i] = p0[i] * rh[i]
                    stage[i] = psi[i] + half * k2[i]
                out = k3
            else:
                eiw = w0 * wf
                for i in range(dim):
                    p[i] = p0[i] * rf[i]
                    stage[i] = psi[i] + dt * k3[i]
                out = k4
            for i in range(dim):
                y[i] = p[i] * stage[i]
            emw = np.conj(eiw)
            for i in range(dim):
                acc[i] = 0j
            for m in range(nnz):
                acc[rows[m]] += (hv[m] + eiw * av[m] + emw * adv[m]) * y[cols[m]]
            for i in range(dim):
                out[i] = mi * np.conj(p[i]) * acc[i]
        nrm = 0.0
        for i in range(dim):
            psi[i] = psi[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            nrm += psi[i].real ** 2 + psi[i].imag ** 2
        d = abs(nrm - norm0)
        if d > drift:
            drift = d
        if (n + 1) % every == 0 or n + 1 == nsteps:
            for i in range(dim):
                samples[isamp, i] = psi[i]
            times[isamp] = t0 + (n + 1) * dt
            isamp += 1
    return psi, samples, times, drift


rk4_drive_numba = None
if not _DISABLE:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass
    else:
        _n_samples = njit(cache=True)(_n_samples)
        rk4_drive_numba = njit(cache=True, nogil=True)(_rk4_drive_loops)

if rk4_drive_numba is not None:
    BACKEND = "numba"
    rk4_drive = rk4_drive_numba
else:
    BACKEND = "numpy"
    rk4_drive = rk4_drive_numpy
