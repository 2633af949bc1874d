"""Run configuration: YAML loading, defaults, validation and overrides.

A configuration is a mapping of sections.  Every section is optional in the
file; a command only demands the sections it uses.  Keys not listed in
:data:`SCHEMA` are rejected, values marked :data:`REQUIRED` must be given
whenever their section is used, and all physical invariants are checked by
constructing the corresponding domain objects at load time.

Angles are given in degrees (``*_deg``), energies in meV, fields in V/cm,
detunings in 1/ps, lengths in nm and rates in 1/s.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .cnot import CnotSpec, TwoQubitState, cnot_parameters, field_for_rabi, BASIS_LABELS
from .errors import ConfigError
from .phonon import PhononParams
from .single_gate import MoleculeSpec, PulseSpec, QubitState, phase_pulse


class _Required:
    def __repr__(self) -> str:
        return "REQUIRED"


REQUIRED = _Required()

SCHEMA: dict[str, dict[str, Any]] = {
    "molecule": {"eps_s": REQUIRED, "eps_p": REQUIRED, "V": REQUIRED, "phi_B_deg": REQUIRED, "xi": REQUIRED},
    # give exactly one of E0 (V/cm) or hbar_omega (meV); phase_target (rad)
    # replaces phi_deg and delta by the phase-gate pulse for that target
    "pulse": {"E0": None, "hbar_omega": None, "phi_deg": 0.0, "delta": 0.0, "N": 1, "phase_target": None},
    "state": {"theta_deg": 0.0, "varphi_deg": 0.0},
    "prepare": {"theta_deg": REQUIRED, "varphi_deg": REQUIRED, "N_phase": 3},
    "cnot": {
        "eps_s": REQUIRED,
        "eps_p": REQUIRED,
        "V": REQUIRED,
        "V_prime": REQUIRED,
        "phi_G_deg": REQUIRED,
        "phi_K_deg": REQUIRED,
        "xi": REQUIRED,
        "U_c": 0.0,
    },
    "cnot_pulse": {"E0": None, "hbar_omega_c": None, "N": 1},
    # either basis (FJ, GJ, FK, GK) or the four product-state angles
    "cnot_input": {
        "basis": None,
        "theta_t_deg": None,
        "varphi_t_deg": 0.0,
        "theta_c_deg": None,
        "varphi_c_deg": 0.0,
    },
    "phonon": {
        "Xi": 6.8,
        "rho": 5.36,
        "c_s": 5150.0,
        "lambda_p": 10.0,
        "lambda_z": 2.0,
        "T": 300.0,
        "E_min": 0.5,
        "E_max": 3.0,
        "E_steps": 50,
        "E_point": math.sqrt(2.0),
        "mode": "corrected",
    },
    # Gamma (1/s) defaults to Gamma_2 at the molecule's eps_3 - eps_2
    "feasibility": {"Gamma": None, "margin": 2 * math.pi},
    "integrator": {"dt": None, "samples_per_period": 64, "frame": "interaction", "n_samples": 400},
    "sweep": {"variable": REQUIRED, "min": REQUIRED, "max": REQUIRED, "steps": REQUIRED, "workers": 1},
    "output": None,
}

# sections filled with defaults even when absent from the file
_DEFAULTED = ("pulse", "state", "phonon", "feasibility", "integrator")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


@dataclass
class RunConfig:
    """Resolved configuration (defaults applied, overrides merged)."""

    data: dict
    source: str | None = None

    # -- provenance -----------------------------------------------------
    def canonical_json(self) -> str:
        return json.dumps(_jsonable(self.data), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    # -- access -----------------------------------------------------------
    def section(self, name: str) -> dict:
        sec = self.data.get(name)
        if sec is None:
            raise ConfigError(f"missing required section '{name}'")
        missing = [k for k, v in sec.items() if v is REQUIRED]
        if missing:
            raise ConfigError(f"missing required key '{name}.{missing[0]}'")
        return sec

    def has(self, name: str) -> bool:
        return self.data.get(name) is not None

    def get(self, path: str):
        sec, _, key = path.partition(".")
        if sec not in self.data or self.data[sec] is None or key not in self.data[sec]:
            raise ConfigError(f"unknown config field '{path}'")
        return self.data[sec][key]

    def with_value(self, path: str, value) -> "RunConfig":
        d = copy.deepcopy(self.data)
        sec, _, key = path.partition(".")
        if sec not in d or d[sec] is None or key not in d[sec]:
            raise ConfigError(f"unknown config field '{path}'")
        d[sec][key] = value
        cfg = RunConfig(d, self.source)
        cfg.validate()
        return cfg

    # -- domain objects ---------------------------------------------------
    def molecule(self) -> MoleculeSpec:
        m = self.section("molecule")
        return MoleculeSpec(
            eps_s=float(m["eps_s"]),
            eps_p=float(m["eps_p"]),
            V=float(m["V"]),
            phi_B=math.radians(m["phi_B_deg"]),
            xi=float(m["xi"]),
        )

    def field(self, molecule: MoleculeSpec) -> float:
        p = self.section("pulse")
        if (p["E0"] is None) == (p["hbar_omega"] is None):
            raise ConfigError("pulse: give exactly one of 'E0' and 'hbar_omega'")
        if p["E0"] is not None:
            return float(p["E0"])
        if not p["hbar_omega"] > 0:
            raise ConfigError(f"pulse.hbar_omega must be > 0, got {p['hbar_omega']}")
        return PulseSpec.from_rabi_energy(molecule, float(p["hbar_omega"])).E0

    def pulse(self, molecule: MoleculeSpec) -> PulseSpec:
        p = self.section("pulse")
        E0 = self.field(molecule)
        if p["phase_target"] is not None:
            return phase_pulse(molecule, E0, float(p["phase_target"]), int(p["N"]))
        return PulseSpec(E0=E0, phi=math.radians(p["phi_deg"]), delta=float(p["delta"]), N=int(p["N"]))

    def initial_state(self) -> QubitState:
        s = self.section("state")
        return QubitState.from_angles(math.radians(s["theta_deg"]), math.radians(s["varphi_deg"]))

    def cnot_spec(self) -> CnotSpec:
        c = self.section("cnot")
        return CnotSpec(
            eps_s=float(c["eps_s"]),
            eps_p=float(c["eps_p"]),
            V=float(c["V"]),
            V_prime=float(c["V_prime"]),
            phi_G=math.radians(c["phi_G_deg"]),
            phi_K=math.radians(c["phi_K_deg"]),
            xi=float(c["xi"]),
            U_c=float(c["U_c"]),
        )

    def cnot_field(self, spec: CnotSpec) -> float:
        p = self.section("cnot_pulse")
        if (p["E0"] is None) == (p["hbar_omega_c"] is None):
            raise ConfigError("cnot_pulse: give exactly one of 'E0' and 'hbar_omega_c'")
        if p["E0"] is not None:
            return float(p["E0"])
        if not p["hbar_omega_c"] > 0:
            raise ConfigError(f"cnot_pulse.hbar_omega_c must be > 0, got {p['hbar_omega_c']}")
        return field_for_rabi(spec, float(p["hbar_omega_c"]))

    def cnot_pulse(self, spec: CnotSpec):
        return cnot_parameters(spec, self.cnot_field(spec), int(self.section("cnot_pulse")["N"]))

    def cnot_input(self) -> TwoQubitState:
        c = self.section("cnot_input")
        if c["basis"] is not None:
            if c["theta_t_deg"] is not None or c["theta_c_deg"] is not None:
                raise ConfigError("cnot_input: give either 'basis' or the angles, not both")
            if c["basis"] not in BASIS_LABELS:
                raise ConfigError(f"cnot_input.basis must be one of {BASIS_LABELS}, got {c['basis']!r}")
            return TwoQubitState.basis(BASIS_LABELS.index(c["basis"]))
        if c["theta_t_deg"] is None or c["theta_c_deg"] is None:
            raise ConfigError("cnot_input: give 'basis' or both 'theta_t_deg' and 'theta_c_deg'")
        return TwoQubitState.from_qubits(
            math.radians(c["theta_t_deg"]),
            math.radians(c["varphi_t_deg"]),
            math.radians(c["theta_c_deg"]),
            math.radians(c["varphi_c_deg"]),
        )

    def phonon(self) -> PhononParams:
        p = self.section("phonon")
        return PhononParams(
            Xi=float(p["Xi"]),
            rho=float(p["rho"]),
            c_s=float(p["c_s"]),
            lambda_p=float(p["lambda_p"]),
            lambda_z=float(p["lambda_z"]),
            T=float(p["T"]),
        )

    def integrator(self) -> dict:
        i = self.section("integrator")
        out = {"samples_per_period": int(i["samples_per_period"]), "n_samples": int(i["n_samples"])}
        if i["dt"] is not None:
            out["dt"] = float(i["dt"])
        return out

    # -- validation -------------------------------------------------------
    def validate(self) -> None:
        d = self.data
        for name, build in (("molecule", self.molecule), ("cnot", self.cnot_spec), ("phonon", self.phonon)):
            if d.get(name) is not None and not _missing(d[name]):
                try:
                    build()
                except ConfigError as exc:
                    raise ConfigError(f"section '{name}': {exc}") from exc
        if self.has("molecule") and self.has("pulse") and not _missing(d["molecule"]):
            p = d["pulse"]
            if p["E0"] is not None or p["hbar_omega"] is not None:
                self.pulse(self.molecule())
        p = d.get("pulse")
        if p is not None and (int(p["N"]) != p["N"] or p["N"] < 1):
            raise ConfigError(f"pulse.N must be a positive integer, got {p['N']}")
        if self.has("state"):
            self.initial_state()
        if self.has("cnot_input"):
            self.cnot_input()
        if self.has("cnot") and self.has("cnot_pulse") and not _missing(d["cnot"]):
            spec = self.cnot_spec()
            N = d["cnot_pulse"]["N"]
            if int(N) != N or N < 1 or N % 2 != 1:
                raise ConfigError(f"cnot_pulse.N must be an odd positive integer, got {N}")
            self.cnot_field(spec)
        ph = d.get("phonon")
        if ph is not None:
            if ph["mode"] not in ("corrected", "literal"):
                raise ConfigError(f"phonon.mode must be 'corrected' or 'literal', got {ph['mode']!r}")
            if not 0 < ph["E_min"] <= ph["E_max"]:
                raise ConfigError("phonon: need 0 < E_min <= E_max")
            if int(ph["E_steps"]) != ph["E_steps"] or ph["E_steps"] < 1:
                raise ConfigError("phonon.E_steps must be a positive integer")
            if not ph["E_point"] > 0:
                raise ConfigError("phonon.E_point must be > 0")
        f = d.get("feasibility")
        if f is not None:
            if f["Gamma"] is not None and not f["Gamma"] >= 0:
                raise ConfigError("feasibility.Gamma must be >= 0")
            if not f["margin"] > 0:
                raise ConfigError("feasibility.margin must be > 0")
        i = d.get("integrator")
        if i is not None:
            if i["frame"] not in ("interaction", "lab"):
                raise ConfigError(f"integrator.frame must be 'interaction' or 'lab', got {i['frame']!r}")
            if i["dt"] is not None and not i["dt"] > 0:
                raise ConfigError("integrator.dt must be > 0")
            if int(i["samples_per_period"]) != i["samples_per_period"] or i["samples_per_period"] < 4:
                raise ConfigError("integrator.samples_per_period must be an integer >= 4")
            if int(i["n_samples"]) != i["n_samples"] or i["n_samples"] < 1:
                raise ConfigError("integrator.n_samples must be a positive integer")
        s = d.get("sweep")
        if s is not None and not _missing(s):
            target = self.get(s["variable"]) if "." in str(s["variable"]) else None
            if not _is_number(target):
                raise ConfigError(f"sweep.variable '{s['variable']}' must name a numeric config field")
            if not (_is_number(s["min"]) and _is_number(s["max"])):
                raise ConfigError("sweep.min and sweep.max must be numbers")
            if int(s["steps"]) != s["steps"] or s["steps"] < 1:
                raise ConfigError("sweep.steps must be a positive integer")
            if s["steps"] == 1 and s["min"] != s["max"]:
                raise ConfigError("a single-step sweep needs min == max")
            if int(s["workers"]) != s["workers"] or s["workers"] < 1:
                raise ConfigError("sweep.workers must be a positive integer")


def _missing(sec: dict) -> bool:
    return any(v is REQUIRED for v in sec.values())


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items() if v is not REQUIRED}
    return x


_STRING_KEYS = ("cnot_input.basis", "sweep.variable")


def _coerce(path: str, value, default):
    # YAML 1.1 reads exponents without a sign (1.0e11) as strings
    if isinstance(value, str) and not isinstance(default, str) and path not in _STRING_KEYS:
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _check_value(path: str, value, default) -> None:
    if value is None:
        return
    if isinstance(value, (dict, list)):
        raise ConfigError(f"'{path}' must be a scalar, got {type(value).__name__}")
    if isinstance(default, str) or path in _STRING_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string, got {value!r}")
    elif not _is_number(value):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    elif isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"'{path}' must be finite, got {value!r}")


def resolve(raw: dict | None, source: str | None = None) -> RunConfig:
    """Apply defaults to a parsed mapping and validate it."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping of sections")
    data: dict[str, Any] = {}
    for name, value in raw.items():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section '{name}'")
        if name == "output":
            if value is not None and not isinstance(value, str):
                raise ConfigError("'output' must be a file path")
            continue
        if value is None:
            value = {}
        if not isinstance(value, dict):
            raise ConfigError(f"section '{name}' must be a mapping")
        for key in value:
            if key not in SCHEMA[name]:
                raise ConfigError(f"unknown key '{name}.{key}'")
    for name, schema in SCHEMA.items():
        if name == "output":
            data["output"] = raw.get("output")
            continue
        if name in raw or name in _DEFAULTED:
            given = raw.get(name) or {}
            sec = {}
            for key, default in schema.items():
                val = _coerce(f"{name}.{key}", given.get(key, default), default)
                if val is not REQUIRED:
                    _check_value(f"{name}.{key}", val, default)
                sec[key] = val
            data[name] = sec
        else:
            data[name] = None
    cfg = RunConfig(data, source)
    cfg.validate()
    return cfg


def parse_override(text: str) -> tuple[str, Any]:
    key, sep, value = text.partition("=")
    if not sep or "." not in key:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    try:
        parsed = yaml.safe_load(value)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {value!r}: {exc}") from exc
    return key.strip(), parsed


def apply_overrides(raw: dict, overrides) -> dict:
    raw = copy.deepcopy(raw) if raw else {}
    for text in overrides or ():
        path, value = parse_override(text)
        sec, _, key = path.partition(".")
        if sec not in SCHEMA or sec == "output":
            raise ConfigError(f"unknown section '{sec}' in override {text!r}")
        if key not in SCHEMA[sec]:
            raise ConfigError(f"unknown key '{path}' in override")
        if raw.get(sec) is None:
            raw[sec] = {}
        raw[sec][key] = value
    return raw


def read_yaml(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: not valid YAML ({exc})") from exc
    return {} if raw is None else raw


def load_config(path, overrides=None) -> RunConfig:
    """Read, default and validate a YAML configuration file."""
    raw = read_yaml(path)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: configuration must be a mapping of sections")
    return resolve(apply_overrides(raw, overrides), str(path))
