from __future__ import annotations

import math
import warnings

import pytest

from qdgates.cnot import CnotSpec, cnot_parameters
from qdgates.phonon import PhononParams
from qdgates.single_gate import MoleculeSpec, PulseSpec


@pytest.fixture
def molecule() -> MoleculeSpec:
    return MoleculeSpec(eps_s=0.0, eps_p=10.0, V=1.0, phi_B=math.radians(30), xi=5.0)


@pytest.fixture
def not_pulse(molecule) -> PulseSpec:
    return PulseSpec.from_rabi_energy(molecule, 0.05)


@pytest.fixture
def cnot_spec() -> CnotSpec:
    return CnotSpec(0.0, 10.0, 1.0, 1.0, math.radians(30), math.radians(-30), 5.0, U_c=1000.0)


@pytest.fixture
def cnot_pulse(cnot_spec):
    # E0 * xi = 0.1 meV
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cnot_parameters(cnot_spec, 200.0)


@pytest.fixture
def gaas() -> PhononParams:
    return PhononParams()
