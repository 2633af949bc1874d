import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdgates.cnot import (
    ConditionedCnot,
    CnotSpec,
    TwoQubitState,
    analytic_cnot_propagator,
    barred_states,
    blockade_reference,
    build_hc0,
    cnot_parameters,
    field_for_rabi,
    ideal_cnot,
    ideal_truth_table,
    permuted_diagonal,
    two_particle_spectrum,
)
from qdgates.constants import HBAR
from qdgates.errors import ConfigError

R2, R3 = math.sqrt(2), math.sqrt(3)


def spec_with(**kw):
    base = dict(eps_s=0.0, eps_p=10.0, V=1.0, V_prime=1.0, phi_G=math.radians(30),
                phi_K=math.radians(-30), xi=5.0, U_c=1000.0)
    base.update(kw)
    return CnotSpec(**base)


def weak_pulse(spec, hbar_omega_c, N=1):
    return cnot_parameters(spec, field_for_rabi(spec, hbar_omega_c), N)


class TestSpec:
    @pytest.mark.parametrize("kw", [dict(eps_p=0.0), dict(V=0.0), dict(V_prime=-1.0), dict(xi=0.0), dict(U_c=-1.0)])
    def test_invariants(self, kw):
        with pytest.raises(ConfigError):
            spec_with(**kw)

    def test_single_particle_spectrum(self, cnot_spec):
        w = np.linalg.eigvalsh(build_hc0(cnot_spec))
        assert np.allclose(w[:4], 0.0, atol=1e-12)
        assert w[4] == pytest.approx(10 - R3, abs=1e-12)
        assert w[-1] == pytest.approx(10 + R3, abs=1e-12)
        assert np.allclose(w[5:12], 10.0, atol=1e-12)


class TestBarred:
    def test_reference_energies(self, cnot_spec):
        b = barred_states(cnot_spec)
        assert b.energies["K"] == pytest.approx(10 - R3, abs=1e-12)
        for a in "FGJ":
            assert b.energies[a] == pytest.approx(10 - R2, abs=1e-12)
        assert cnot_spec.gap == pytest.approx(R3 - R2, abs=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 3.0), st.floats(0.1, 3.0))
    def test_closed_forms(self, eta, V):
        spec = spec_with(V=V, V_prime=eta * V)
        b = barred_states(spec)
        ref = spec.barred_energies()
        for a in "FGJK":
            assert b.energies[a] == pytest.approx(ref[a], abs=1e-10 * 10)
            assert b.overlaps[a] >= 1 - 1e-10

    def test_gap_grows_with_eta(self):
        gaps = [spec_with(V_prime=e).gap for e in np.linspace(0.0, 3.0, 13)]
        assert np.all(np.diff(gaps) > 0)

    def test_eta_zero_degenerate_branches(self):
        spec = spec_with(V_prime=0.0)
        assert spec.gap == 0.0
        b = barred_states(spec)
        assert b.energies["J"] == pytest.approx(b.energies["K"], abs=1e-12)
        with pytest.warns(UserWarning, match="resonant approximation degraded"):
            cnot_parameters(spec, 10.0)


class TestTwoParticle:
    def test_product_ground_states(self, cnot_spec):
        ts = two_particle_spectrum(cnot_spec)
        assert ts.ground_residual < 1e-12
        assert np.sum(np.abs(ts.energies - 2 * cnot_spec.eps_s) < 1e-9) >= 12

    def test_blockade_reference(self, cnot_spec):
        ts = two_particle_spectrum(cnot_spec)
        ref = blockade_reference(cnot_spec)
        assert np.allclose(ts.low_excited, ref, rtol=1e-2)

    def test_without_blockade(self, cnot_spec):
        ts = two_particle_spectrum(cnot_spec, U_c=0.0)
        ref = blockade_reference(cnot_spec)
        assert np.abs(ts.low_excited - ref).max() / ref.max() > 1e-2


class TestParameters:
    def test_reference_numbers(self, cnot_spec, cnot_pulse):
        hw = HBAR * cnot_pulse.Omega_C
        # E0 xi = 0.1 meV; cos(30 deg) sqrt2 * 10 / ((10 - sqrt3) sqrt3)
        assert hw == pytest.approx(0.1 * math.cos(math.radians(30)) * R2 * 10 / ((10 - R3) * R3), rel=1e-12)
        assert hw == pytest.approx(0.08552, abs=5e-5)
        assert cnot_pulse.tau_C == pytest.approx(48.36, abs=0.01)
        assert cnot_pulse.gap == pytest.approx(0.31784, abs=1e-5)
        assert HBAR * cnot_pulse.omega_K == pytest.approx(10 - R3)
        assert HBAR * cnot_pulse.omega_J == pytest.approx(10 - R2)

    def test_warning_at_reference_field(self, cnot_spec):
        with pytest.warns(UserWarning, match="resonant approximation degraded"):
            cnot_parameters(cnot_spec, 200.0)

    def test_no_warning_in_weak_drive(self, cnot_spec):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            weak_pulse(cnot_spec, 0.03)

    @pytest.mark.parametrize("N", [0, 2, 1.5])
    def test_odd_n(self, cnot_spec, N):
        with pytest.raises(ConfigError):
            cnot_parameters(cnot_spec, 10.0, N)

    def test_field_inverse(self, cnot_spec):
        p = weak_pulse(cnot_spec, 0.013)
        assert HBAR * p.Omega_C == pytest.approx(0.013, rel=1e-12)


class TestAnalytic:
    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 1.0), st.floats(0, 1000))
    def test_orthogonal(self, Om, t):
        M = analytic_cnot_propagator(Om, t)
        assert np.abs(M.T @ M - np.eye(3)).max() < 1e-12

    def test_swap_at_tau(self):
        M = analytic_cnot_propagator(0.2, 2 * math.pi / 0.2)
        assert np.allclose(M, [[0, 1, 0], [1, 0, 0], [0, 0, -1]], atol=1e-12)
        assert np.allclose(ideal_truth_table(), np.eye(4)[[0, 1, 3, 2]], atol=1e-24)

    def test_ideal_map(self):
        s = TwoQubitState.from_qubits(0.3, 0.2, 0.9, 1.1)
        v = ideal_cnot(s)
        assert np.allclose(v, s.computational[[0, 1, 3, 2]])

    def test_from_qubits_normalized(self):
        s = TwoQubitState.from_qubits(0.3, 0.2, 0.9, 1.1)
        assert s.norm2() == pytest.approx(1.0)
        assert np.all(s.Z == 0)


@pytest.fixture(scope="module")
def weak():
    spec = spec_with()
    return ConditionedCnot(spec, weak_pulse(spec, 0.02))


@pytest.mark.filterwarnings("ignore:resonant approximation degraded")
class TestConditioned:
    def test_norm_conserved(self, weak):
        assert weak.max_norm_drift < 1e-9
        s = weak.simulate(TwoQubitState.from_qubits(0.4, 0.1, 0.7, 0.5))
        assert np.abs(s.norm - 1).max() < 1e-9

    def test_control_never_excited(self, weak):
        s = weak.simulate(TwoQubitState.from_qubits(0.4, 0.1, 0.7, 0.5))
        assert np.all(s.final.Z == 0)

    def test_weak_drive_truth_table(self, weak):
        diag = permuted_diagonal(weak.truth_table())
        assert np.all(diag >= 0.99)
        # reference values at hbar*Omega_C = 0.02 meV
        assert diag == pytest.approx([0.996582, 0.996582, 0.998968, 0.998968], abs=2e-6)

    def test_x_target_entangled(self, weak):
        x = TwoQubitState(1 / R2, 1 / R2, 0, 0)
        assert weak.simulate(x).fidelity >= 0.99
        s = weak.simulate(TwoQubitState.from_qubits(0.0, 0.0, math.pi / 4, 0.0))
        assert s.fidelity >= 0.99

    def test_resonant_branch_follows_analytic(self, weak):
        s = weak.simulate(TwoQubitState.basis(2))
        Om = weak.pulse.Omega_C
        ref = np.array([analytic_cnot_propagator(Om, t)[:2, 0] for t in s.times])
        assert np.abs(np.abs(s.computational[:, 2:]) - np.abs(ref)).max() < 0.05
        # Y_K reaches ~1/sqrt2 half way
        mid = np.argmin(np.abs(s.times - weak.pulse.tau_C / 2))
        assert abs(s.barred[mid, 1]) == pytest.approx(1 / R2, abs=0.03)

    def test_infidelity_falls_with_drive(self):
        spec = spec_with()
        infid = []
        for hw in (0.05, 0.03, 0.02):
            infid.append(1 - permuted_diagonal(ConditionedCnot(spec, weak_pulse(spec, hw)).truth_table()).min())
        assert infid[0] > infid[1] > infid[2]

    def test_leaky_input_rejected(self, weak):
        with pytest.raises(ValueError):
            weak.simulate(TwoQubitState(1, 0, 0, 0, Y_K=0.1))

    def test_deterministic(self):
        spec = spec_with()
        p = weak_pulse(spec, 0.05)
        a = ConditionedCnot(spec, p).truth_table()
        b = ConditionedCnot(spec, p).truth_table()
        assert a.tobytes() == b.tobytes()
