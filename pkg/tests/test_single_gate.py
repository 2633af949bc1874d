import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdgates.constants import HBAR
from qdgates.core import evolve_driven, hermitian_eigendecompose
from qdgates.errors import ConfigError
from qdgates.single_gate import (
    MoleculeSpec,
    PulseSpec,
    QubitState,
    analytic_reduced_propagator,
    apply_gates,
    build_h0,
    build_h_light,
    closed_form_orbitals,
    detuning_for_phase,
    drive_frequency,
    gate_matrix,
    light_coupling,
    molecular_spectrum,
    phase_detuning_bound,
    phase_pulse,
    phase_pulse_polarization,
    polarization_for_rotation,
    prepare_qubit,
    pulse_derived,
    reduced_hamiltonian_terms,
    relative_phase,
    simulate_pulse,
    simulate_sequence,
)

R2 = math.sqrt(2)


def reduced_rk4(spec, pulse, psi0, t1, nsteps=20000, sample_every=None):
    e, X = reduced_hamiltonian_terms(spec, pulse)
    omega = drive_frequency(spec, pulse)
    return evolve_driven(np.zeros((3, 3)), X, omega, psi0, 0.0, t1, t1 / nsteps, frame_energies=e,
                         sample_every=sample_every or nsteps)


class TestMoleculeSpec:
    @pytest.mark.parametrize(
        "kw",
        [dict(eps_p=0.0), dict(V=0.0), dict(phi_B=0.0), dict(phi_B=math.pi / 2), dict(xi=-1.0)],
    )
    def test_invariants(self, kw):
        base = dict(eps_s=0.0, eps_p=10.0, V=1.0, phi_B=0.5, xi=5.0)
        base.update(kw)
        with pytest.raises(ConfigError):
            MoleculeSpec(**base)

    def test_pulse_invariants(self):
        with pytest.raises(ConfigError):
            PulseSpec(E0=-1.0)
        with pytest.raises(ConfigError):
            PulseSpec(E0=1.0, N=0)


class TestH0AndSpectrum:
    def test_decoupled(self):
        spec = MoleculeSpec(0.5, 10.0, 1.0, 0.5, 5.0)
        H = build_h0(spec)
        assert np.allclose(np.diag(H), [0.5, 0.5] + [10.0] * 5)
        H[6, 2] = H[2, 6] = H[6, 3] = H[3, 6] = 0
        assert np.allclose(H, np.diag(np.diag(H)))

    def test_couplings_only_sigma_center(self, molecule):
        H = build_h0(molecule)
        off = H - np.diag(np.diag(H))
        nz = {(i, j) for i, j in zip(*np.nonzero(off))}
        assert nz == {(2, 6), (6, 2), (3, 6), (6, 3)}
        assert np.allclose(H, H.conj().T)

    def test_reference_eigenvalues(self, molecule):
        w = hermitian_eigendecompose(build_h0(molecule)).eigenvalues
        assert np.allclose(w, [0, 0, 8.58579, 10, 10, 10, 11.41421], atol=5e-6)

    def test_first_excited_orbital(self, molecule):
        sp = molecular_spectrum(molecule)
        ref = np.zeros(7)
        ref[[6, 3, 2]] = [R2 / 2, -0.5, -0.5]
        assert abs(np.vdot(ref, sp.orbitals[:, 2])) ** 2 >= 1 - 1e-10
        assert sp.overlaps[2] >= 1 - 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-5, 5), st.floats(0.1, 20), st.floats(0.01, 5), st.floats(0.05, 1.5))
    def test_closed_forms(self, es, gap, V, phi):
        spec = MoleculeSpec(es, es + gap, V, phi, 5.0)
        sp = molecular_spectrum(spec)
        scale = max(abs(es), abs(es + gap + R2 * V))
        assert np.allclose(sp.energies, spec.closed_form_energies(), rtol=0, atol=1e-10 * scale)
        assert abs(sp.energies[6] - sp.energies[2] - 2 * R2 * V) <= 1e-10 * scale
        assert np.all(sp.overlaps > 1 - 1e-10)

    def test_resonance_window(self, molecule):
        sp = molecular_spectrum(molecule)
        assert sp.energies[3] - sp.energies[2] == pytest.approx(R2, abs=1e-12)

    def test_degenerate_labels_by_projector(self, molecule):
        # the closed-form |3>,|4>,|5> must lie inside the numerical eps_p eigenspace
        sp = molecular_spectrum(molecule)
        Q = closed_form_orbitals()
        for k in (3, 4, 5):
            assert abs(np.vdot(Q[:, k], sp.orbitals[:, k])) == pytest.approx(1.0, abs=1e-12)


class TestLightCoupling:
    def test_hermitian_and_ground_excited_only(self, molecule, not_pulse):
        L = light_coupling(molecule, not_pulse)
        assert np.allclose(L, L.conj().T, atol=0)
        assert np.all(L[:2, :2] == 0) and np.all(L[2:, 2:] == 0)

    def test_dark_polarizations(self, molecule):
        v0 = PulseSpec(E0=100.0, phi=molecule.phi_B + math.pi / 2)
        L = light_coupling(molecule, v0)
        # v = 0: |1> couples only through the sin(phi_B - phi) channel to |5>
        assert abs(L[1, 2]) < 1e-15 and abs(L[1, 3]) < 1e-15 and abs(L[1, 6]) < 1e-15
        u0 = PulseSpec(E0=100.0, phi=math.pi / 2 - molecule.phi_B)
        L = light_coupling(molecule, u0)
        assert abs(L[0, 2]) < 1e-15 and abs(L[0, 3]) < 1e-15 and abs(L[0, 6]) < 1e-15

    def test_coefficient_ratio(self, molecule):
        p = PulseSpec(E0=100.0, phi=0.2)
        L = light_coupling(molecule, p)
        r = abs(math.tan(molecule.phi_B + p.phi))
        assert abs(L[0, 4]) == pytest.approx(2 * abs(L[0, 2]) * r, rel=1e-12)

    def test_prefactor_and_time_dependence(self, molecule, not_pulse):
        w = drive_frequency(molecule, not_pulse)
        a = 10 * not_pulse.E0 * 5.0 * 1e-4 / (R2 * HBAR * w)
        L = light_coupling(molecule, not_pulse)
        assert L[0, 2] == pytest.approx(1j * a * math.cos(molecule.phi_B))
        t = 0.37
        assert np.allclose(build_h_light(molecule, not_pulse, t), math.cos(w * t) * L)

    def test_nonpositive_frequency(self, molecule):
        with pytest.raises(ConfigError):
            drive_frequency(molecule, PulseSpec(E0=1.0, delta=100.0))


class TestPulseDerived:
    def test_uv_symmetric(self, molecule):
        d = pulse_derived(molecule, PulseSpec(E0=10.0))
        assert d.u == pytest.approx(math.cos(math.radians(30)))
        assert d.v == pytest.approx(d.u)
        assert d.delta_theta == pytest.approx(math.pi / 4)

    def test_reference_numbers(self, molecule):
        E0 = 0.1 / (5.0 * 1e-4)  # E0 xi = 0.1 meV
        d = pulse_derived(molecule, PulseSpec(E0=E0))
        assert HBAR * d.Omega == pytest.approx(0.1 * R2 * 10 / 8.58579, rel=1e-5)
        assert d.Omega_t == pytest.approx(d.Omega * 0.866025 * R2 / 2, rel=1e-6)
        assert d.tau == pytest.approx(41.0, abs=0.05)

    def test_drives_nothing(self, molecule):
        # |u| = |v| = 0 needs phi_B +- phi = pi/2 at once, impossible for
        # 0 < phi_B < pi/2, so reach it through a zero field instead
        with pytest.raises(ConfigError, match="drives nothing"):
            pulse_derived(molecule, PulseSpec(E0=0.0))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(-0.05, 0.05), st.floats(1.0, 500.0))
    def test_invariants(self, phi, delta, E0):
        spec = MoleculeSpec(0.0, 10.0, 1.0, math.radians(30), 5.0)
        d = pulse_derived(spec, PulseSpec(E0=E0, phi=phi, delta=delta))
        r = math.hypot(d.u, d.v)
        assert d.Omega_t >= abs(delta) - 1e-15
        assert d.Omega_t >= d.Omega * r / 2 - 1e-15
        if r > 1e-9:
            assert math.cos(d.delta_theta) == pytest.approx(d.u / r, abs=1e-12)
            assert math.sin(d.delta_theta) == pytest.approx(d.v / r, abs=1e-12)


class TestReducedPropagator:
    def test_identity_at_zero(self, molecule, not_pulse):
        d = pulse_derived(molecule, not_pulse)
        assert np.allclose(analytic_reduced_propagator(d, 0.0, 0.0), np.eye(3), atol=1e-15)

    def test_half_transfer(self, molecule, not_pulse):
        d = pulse_derived(molecule, not_pulse)
        t = math.pi / d.Omega_t
        M = analytic_reduced_propagator(d, 0.0, t)
        r2 = d.u ** 2 + d.v ** 2
        col = M[2, :2]
        assert np.allclose(col, [-d.u / math.sqrt(r2), d.v / math.sqrt(r2)], atol=1e-12)

    def test_empty_excited_at_tau(self, molecule):
        for phi, delta, N in [(0.0, 0.0, 1), (0.4, 0.01, 3), (1.1, -0.02, 5)]:
            p = PulseSpec(E0=60.0, phi=phi, delta=delta, N=N)
            d = pulse_derived(molecule, p)
            M = analytic_reduced_propagator(d, delta, d.tau)
            assert np.abs(M[2, :2]).max() < 1e-10 and np.abs(M[:2, 2]).max() < 1e-10

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(-0.1, 0.1), st.floats(1, 500), st.floats(0, 500))
    def test_unitary(self, phi, delta, E0, t):
        spec = MoleculeSpec(0.0, 10.0, 1.0, math.radians(30), 5.0)
        d = pulse_derived(spec, PulseSpec(E0=E0, phi=phi, delta=delta))
        M = analytic_reduced_propagator(d, delta, t)
        assert np.abs(M.conj().T @ M - np.eye(3)).max() < 1e-12

    def test_matches_reduced_rk4_random(self, molecule):
        rng = np.random.default_rng(21)
        for _ in range(4):
            p = PulseSpec.from_rabi_energy(molecule, rng.uniform(0.02, 0.2), phi=rng.uniform(0, 6.28),
                                           delta=rng.uniform(-0.1, 0.1))
            d = pulse_derived(molecule, p)
            t = rng.uniform(0.2, 1.0) * d.tau
            for k in range(3):
                psi0 = np.eye(3)[k]
                r = reduced_rk4(molecule, p, psi0, t)
                M = analytic_reduced_propagator(d, p.delta, t)
                assert np.abs(r.psi - M[:, k]).max() < 1e-8


class TestGateMatrix:
    def test_not_gate(self, molecule, not_pulse):
        R = gate_matrix(molecule, not_pulse)
        assert np.allclose(R, [[0, 1], [1, 0]], atol=1e-12)

    def test_phase_gate(self, molecule):
        p = PulseSpec(E0=60.0, phi=phase_pulse_polarization(molecule), delta=0.004, N=3)
        R = gate_matrix(molecule, p)
        d = pulse_derived(molecule, p)
        assert abs(R[0, 1]) < 1e-12 and abs(R[1, 0]) < 1e-12
        assert relative_phase(R) == pytest.approx((math.pi - p.delta * d.tau / 2) % (2 * math.pi), abs=1e-12)

    def test_even_n_rejected(self, molecule):
        with pytest.raises(ConfigError):
            gate_matrix(molecule, PulseSpec(E0=60.0, N=2))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(-0.02, 0.02), st.sampled_from([1, 3, 5, 7]))
    def test_unitary_and_reflection(self, phi, delta, N):
        spec = MoleculeSpec(0.0, 10.0, 1.0, math.radians(30), 5.0)
        R = gate_matrix(spec, PulseSpec(E0=60.0, phi=phi, delta=delta, N=N))
        assert np.abs(R.conj().T @ R - np.eye(2)).max() < 1e-12
        R0 = gate_matrix(spec, PulseSpec(E0=60.0, phi=phi, delta=0.0, N=N))
        assert np.abs(R0.imag).max() < 1e-12
        assert np.linalg.det(R0).real == pytest.approx(-1.0, abs=1e-12)

    def test_matches_reduced_propagator_at_tau(self, molecule):
        for phi, delta, N in [(0.3, 0.0, 1), (2.0, 0.01, 3), (phase_pulse_polarization(molecule), -0.005, 5)]:
            p = PulseSpec(E0=60.0, phi=phi, delta=delta, N=N)
            d = pulse_derived(molecule, p)
            M = analytic_reduced_propagator(d, delta, d.tau)
            assert np.abs(M[:2, :2] - gate_matrix(molecule, p)).max() < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, math.pi / 2), st.floats(0, 2 * math.pi))
    def test_amplitude_pulse_on_real_qubit(self, theta0, phi):
        spec = MoleculeSpec(0.0, 10.0, 1.0, math.radians(30), 5.0)
        p = PulseSpec(E0=60.0, phi=phi)
        dth = pulse_derived(spec, p).delta_theta
        out = gate_matrix(spec, p) @ np.array([math.cos(theta0), math.sin(theta0)])
        # the amplitudes are those of angle theta0 + 2 dtheta + pi; as a
        # canonical qubit that angle carries relative phase pi
        ang = theta0 + 2 * dth + math.pi
        assert np.allclose(out, [-math.cos(ang), math.sin(ang)], atol=1e-12) or np.allclose(
            out, [math.cos(ang), -math.sin(ang)], atol=1e-12
        )


class TestPhaseDesign:
    def test_target_pi_is_zero_detuning(self, molecule):
        tmpl = PulseSpec(E0=60.0, phi=phase_pulse_polarization(molecule), N=3)
        assert detuning_for_phase(molecule, tmpl, math.pi) == pytest.approx(0.0, abs=1e-14)

    def test_bracket_ends(self, molecule):
        tmpl = PulseSpec(E0=60.0, phi=phase_pulse_polarization(molecule), N=3)
        exact, seed = phase_detuning_bound(molecule, 60.0, 3)
        assert seed == pytest.approx(2 * exact)
        assert detuning_for_phase(molecule, tmpl, 0.0) == pytest.approx(exact, rel=1e-9)
        assert detuning_for_phase(molecule, tmpl, 2 * math.pi) == pytest.approx(-exact, rel=1e-9)
        # exact bound solves N pi delta = pi Omega_t(delta)
        d = pulse_derived(molecule, PulseSpec(E0=60.0, phi=tmpl.phi, delta=exact, N=3))
        assert 3 * exact == pytest.approx(d.Omega_t, rel=1e-12)

    @pytest.mark.parametrize("target", [0.1, 1.0, 2.5, math.pi, 4.0, 6.2])
    def test_round_trip(self, molecule, target):
        p = phase_pulse(molecule, 60.0, target, 3)
        assert relative_phase(gate_matrix(molecule, p)) == pytest.approx(target, abs=1e-8)

    def test_out_of_range(self, molecule):
        tmpl = PulseSpec(E0=60.0, phi=phase_pulse_polarization(molecule), N=3)
        with pytest.raises(ConfigError, match="admissible"):
            detuning_for_phase(molecule, tmpl, 7.0)
        with pytest.raises(ConfigError):
            detuning_for_phase(molecule, tmpl, 1.0, N=4)
        with pytest.raises(ConfigError):
            phase_detuning_bound(molecule, 60.0, 1)


class TestPreparation:
    @pytest.mark.parametrize("dth", np.linspace(-1.5, 1.5, 7))
    def test_polarization_for_rotation(self, molecule, dth):
        phi = polarization_for_rotation(molecule, dth)
        d = pulse_derived(molecule, PulseSpec(E0=60.0, phi=phi))
        assert math.cos(2 * d.delta_theta) == pytest.approx(math.cos(2 * dth), abs=1e-12)
        assert math.sin(2 * d.delta_theta) == pytest.approx(math.sin(2 * dth), abs=1e-12)

    def test_null_preparation(self, molecule):
        pulses = prepare_qubit(molecule, 0.0, 0.0, 60.0)
        out = apply_gates(molecule, pulses, QubitState(1.0, 0.0))
        assert abs(np.vdot([1, 0], out.vector)) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_single_amplitude_pulse(self, molecule):
        theta = 1.0
        amp, _ = prepare_qubit(molecule, theta, 0.0, 60.0)
        out = gate_matrix(molecule, amp) @ np.array([1.0, 0.0])
        dth = pulse_derived(molecule, amp).delta_theta
        assert abs(out[1]) == pytest.approx(abs(math.sin(2 * dth + math.pi)), abs=1e-12)
        assert abs(out[1]) == pytest.approx(math.sin(theta), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, math.pi / 2), st.floats(0.0, 2 * math.pi - 1e-6))
    def test_two_pulse_composition(self, theta, varphi):
        spec = MoleculeSpec(0.0, 10.0, 1.0, math.radians(30), 5.0)
        pulses = prepare_qubit(spec, theta, varphi, 60.0)
        out = apply_gates(spec, pulses, QubitState(1.0, 0.0))
        target = QubitState.from_angles(theta, varphi)
        assert abs(np.vdot(target.vector, out.vector)) ** 2 == pytest.approx(1.0, abs=1e-9)


class TestQubitState:
    def test_normalization(self):
        with pytest.raises(ValueError):
            QubitState(1.0, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, math.pi / 2), st.floats(0, 2 * math.pi - 1e-9), st.floats(0, 2 * math.pi))
    def test_round_trip_and_canonical(self, theta, varphi, g):
        q = QubitState.from_angles(theta, varphi)
        assert q.theta == pytest.approx(theta, abs=1e-12)
        if 1e-6 < theta < math.pi / 2 - 1e-6:
            assert math.cos(q.varphi - varphi) == pytest.approx(1.0, abs=1e-12)
        rotated = QubitState(q.S0 * np.exp(1j * g), q.S1 * np.exp(1j * g))
        c1, c2 = rotated.canonical(), q.canonical()
        assert np.allclose(c1.vector, c2.vector, atol=1e-12)
        assert np.allclose(c1.canonical().vector, c1.vector, atol=0)
        assert c1.S1.real >= 0 and abs(c1.S1.imag) < 1e-15


class TestSimulatePulse:
    def test_zero_field(self, molecule):
        p = PulseSpec(E0=0.0)
        s = simulate_pulse(molecule, p, [1, 0], duration=50.0)
        assert s.leakage == 0.0 and np.allclose(s.final[:2], [1, 0])

    def test_reference_not_pulse(self, molecule, not_pulse):
        s = simulate_pulse(molecule, not_pulse, [1, 0])
        assert abs(s.final[1]) ** 2 >= 0.99
        assert s.leakage <= 1e-3
        assert s.max_norm_drift <= 1e-9
        assert not s.flagged
        # golden values of the full propagation
        assert abs(s.final[1]) ** 2 == pytest.approx(0.998194488, abs=1e-6)
        assert s.leakage == pytest.approx(3.9297e-4, rel=1e-3)

    def test_lab_frame_agrees(self, molecule, not_pulse):
        a = simulate_pulse(molecule, not_pulse, [1, 0])
        b = simulate_pulse(molecule, not_pulse, [1, 0], frame="lab", samples_per_period=200)
        assert np.abs(a.final - b.final).max() < 1e-6

    def test_detuned_onto_next_level_flags(self, molecule, not_pulse):
        tau = pulse_derived(molecule, not_pulse).tau
        p = PulseSpec(E0=not_pulse.E0, delta=-R2 * molecule.V / HBAR)
        s = simulate_pulse(molecule, p, [1, 0], duration=tau)
        assert s.flagged and s.leakage > 0.05

    def test_amplitude_error_is_first_order_in_drive(self, molecule):
        # the reduced model neglects the far-detuned levels; the amplitude
        # error it makes is linear in hbar*Omega / (sqrt2 V)
        errs = []
        for hw in (0.05, 0.005):
            p = PulseSpec.from_rabi_energy(molecule, hw)
            s = simulate_pulse(molecule, p, [1, 0])
            d = pulse_derived(molecule, p)
            errs.append(max(np.abs(a[:3] - analytic_reduced_propagator(d, 0.0, t)[:, 0]).max()
                            for t, a in zip(s.times, s.amplitudes)))
        assert errs[0] < 0.07
        assert 8 < errs[0] / errs[1] < 12

    def test_amplitude_error_below_1e3_in_weak_drive(self, molecule):
        p = PulseSpec.from_rabi_energy(molecule, 5e-4)
        s = simulate_pulse(molecule, p, [1, 0], n_samples=100, samples_per_period=32)
        d = pulse_derived(molecule, p)
        err = max(np.abs(a[:3] - analytic_reduced_propagator(d, 0.0, t)[:, 0]).max() for t, a in zip(s.times, s.amplitudes))
        assert err < 1e-3

    def test_upper_leakage_scales_quadratically(self, molecule):
        up = []
        for hw in (0.05, 0.005):
            up.append(simulate_pulse(molecule, PulseSpec.from_rabi_energy(molecule, hw), [1, 0]).max_upper_leakage)
        assert 50 < up[0] / up[1] < 200

    def test_rejects_excited_input(self, molecule, not_pulse):
        with pytest.raises(ValueError):
            simulate_pulse(molecule, not_pulse, np.eye(7)[2])

    def test_sequence_restarts_clock(self, molecule, not_pulse):
        sims = simulate_sequence(molecule, [not_pulse, not_pulse], [1, 0])
        assert abs(sims[-1].final[0]) ** 2 > 0.99
        assert sims[1].times[0] == 0.0

    def test_deterministic(self, molecule, not_pulse):
        a = simulate_pulse(molecule, not_pulse, [1, 0])
        b = simulate_pulse(molecule, not_pulse, [1, 0])
        assert a.amplitudes.tobytes() == b.amplitudes.tobytes()
