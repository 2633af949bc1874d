"""Command-line interface: ``qdgates <command> --config run.yaml``.

Every command writes one CSV table (to ``--out``, the config's ``output``
or stdout).  Leading ``#`` lines record the tool version, the command and
the SHA-256 digest of the resolved configuration.  When the config has a
``sweep`` section the command runs once per sweep point and the table holds
one summary row per point instead.

Exit codes::

    0  success
    2  configuration error
    3  leakage flag (end-of-pulse excited population above 0.05)
    4  feasibility verdict other than "pass"
    5  numerical failure (norm drift, non-convergence)

A nonzero status is accompanied by one JSON object on stderr with the keys
``exit_code``, ``status`` and ``reason``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cnot import BASIS_LABELS, ConditionedCnot, TwoQubitState, permuted_diagonal, simulate_cnot
from .config import RunConfig, load_config, resolve
from .constants import HBAR
from .errors import ConfigError, NumericalError
from .phonon import gamma0, gamma2, pulse_feasibility, rabi_threshold
from .single_gate import (
    QubitState,
    molecular_spectrum,
    prepare_qubit,
    rabi_energy,
    simulate_pulse,
    simulate_sequence,
    field_from_rabi_energy,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_LEAKAGE = 3
EXIT_FEASIBILITY = 4
EXIT_NUMERICAL = 5
_STATUS = {EXIT_LEAKAGE: "leakage", EXIT_FEASIBILITY: "feasibility", EXIT_CONFIG: "config", EXIT_NUMERICAL: "numerical"}

COMMANDS = ("spectrum", "gate", "prepare", "cnot", "truth-table", "phonon-sweep", "feasibility")


@dataclass
class Outcome:
    header: list[str]
    rows: list[list]
    summary: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    code: int = EXIT_OK
    reason: str | None = None


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _deg(rad: float) -> float:
    return math.degrees(rad)


# -- commands ---------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig) -> Outcome:
    spec = cfg.molecule()
    sp = molecular_spectrum(spec)
    closed = spec.closed_form_energies()
    rows = [[k, sp.energies[k], closed[k], sp.overlaps[k]] for k in range(7)]
    summary = {f"E{k}_meV": sp.energies[k] for k in range(7)}
    return Outcome(["state", "E_meV", "closed_form_meV", "overlap"], rows, summary)


def _relative_phase_change(s0: np.ndarray, s1: np.ndarray) -> float:
    if min(abs(s0[0]), abs(s0[1]), abs(s1[0]), abs(s1[1])) < 1e-12:
        return float("nan")
    return float(np.angle((s1[0] / s1[1]) / (s0[0] / s0[1]))) % (2 * math.pi)


def cmd_gate(cfg: RunConfig) -> Outcome:
    spec = cfg.molecule()
    pulse = cfg.pulse(spec)
    psi0 = cfg.initial_state()
    frame = cfg.get("integrator.frame")
    sim = simulate_pulse(spec, pulse, psi0, frame=frame, **cfg.integrator())
    pops = sim.populations
    leak = pops[:, 2:].sum(axis=1)
    rows = [[t, p[0], p[1], p[2], l, n] for t, p, l, n in zip(sim.times, pops, leak, sim.norms)]
    phase = _relative_phase_change(psi0.vector, sim.final[:2])
    summary = {
        "p0": pops[-1, 0],
        "p1": pops[-1, 1],
        "leakage": sim.leakage,
        "fidelity": sim.fidelity,
        "relative_phase_rad": phase,
        "max_norm_drift": sim.max_norm_drift,
    }
    notes = [
        f"pulse E0_V_per_cm={_fmt(pulse.E0)} phi_rad={_fmt(pulse.phi)} delta_per_ps={_fmt(pulse.delta)} N={pulse.N}",
        f"fidelity_vs_reduced_model={_fmt(sim.fidelity)} end_leakage={_fmt(sim.leakage)} "
        f"max_norm_drift={_fmt(sim.max_norm_drift)} steps={sim.nsteps}",
    ]
    out = Outcome(["t_ps", "p0", "p1", "p2", "leakage", "norm"], rows, summary, notes)
    if sim.flagged:
        out.code, out.reason = EXIT_LEAKAGE, f"end leakage {sim.leakage:.4g} exceeds 0.05"
    return out


def cmd_prepare(cfg: RunConfig) -> Outcome:
    spec = cfg.molecule()
    E0 = cfg.field(spec)
    prep = cfg.section("prepare")
    theta, varphi = math.radians(prep["theta_deg"]), math.radians(prep["varphi_deg"])
    pulses = prepare_qubit(spec, theta, varphi, E0, int(prep["N_phase"]))
    sims = simulate_sequence(spec, pulses, QubitState(1.0, 0.0), frame=cfg.get("integrator.frame"), **cfg.integrator())
    rows = []
    for k, (p, s) in enumerate(zip(pulses, sims)):
        q = s.qubit.canonical()
        rows.append([k + 1, _deg(p.phi), p.delta, p.N, s.times[-1], abs(s.final[0]) ** 2, abs(s.final[1]) ** 2,
                     s.leakage, _deg(q.theta), _deg(q.varphi)])
    target = QubitState.from_angles(theta, varphi)
    final = sims[-1].qubit
    fid = float(abs(np.vdot(target.vector, final.vector)) ** 2)
    leak = max(s.leakage for s in sims)
    summary = {"theta_deg": _deg(final.theta), "varphi_deg": _deg(final.canonical().varphi), "fidelity": fid,
               "leakage": leak, "max_norm_drift": max(s.max_norm_drift for s in sims)}
    notes = [f"target theta_deg={_fmt(prep['theta_deg'])} varphi_deg={_fmt(prep['varphi_deg'])} fidelity={_fmt(fid)}"]
    header = ["pulse", "phi_deg", "delta_per_ps", "N", "tau_ps", "p0", "p1", "leakage", "theta_deg", "varphi_deg"]
    out = Outcome(header, rows, summary, notes)
    if any(s.flagged for s in sims):
        out.code, out.reason = EXIT_LEAKAGE, f"end leakage {leak:.4g} exceeds 0.05"
    return out


def _cnot_setup(cfg: RunConfig):
    spec = cfg.cnot_spec()
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pulse = cfg.cnot_pulse(spec)
    notes += [f"warning: {w.message}" for w in caught]
    notes.append(
        f"omega_K_per_ps={_fmt(pulse.omega_K)} Omega_C_per_ps={_fmt(pulse.Omega_C)} "
        f"tau_C_ps={_fmt(pulse.tau_C)} gap_meV={_fmt(pulse.gap)}"
    )
    return spec, pulse, notes


def cmd_cnot(cfg: RunConfig) -> Outcome:
    spec, pulse, notes = _cnot_setup(cfg)
    sim = simulate_cnot(spec, pulse, cfg.cnot_input(), **cfg.integrator())
    pc = np.abs(sim.computational) ** 2
    pb = np.abs(sim.barred) ** 2
    rows = [[t, *c, *b, l, n] for t, c, b, l, n in zip(sim.times, pc, pb, sim.leakage, sim.norm)]
    header = ["t_ps", "p_FJ", "p_GJ", "p_FK", "p_GK", "p_YJ", "p_YK", "leakage", "norm"]
    summary = {"fidelity": sim.fidelity, "leakage": sim.final.leakage, "max_norm_drift": sim.max_norm_drift}
    notes.append(f"fidelity_vs_ideal_cnot={_fmt(sim.fidelity)} end_leakage={_fmt(sim.final.leakage)}")
    out = Outcome(header, rows, summary, notes)
    if sim.flagged:
        out.code, out.reason = EXIT_LEAKAGE, f"end leakage {sim.final.leakage:.4g} exceeds 0.05"
    return out


def cmd_truth_table(cfg: RunConfig) -> Outcome:
    spec, pulse, notes = _cnot_setup(cfg)
    engine = ConditionedCnot(spec, pulse, **cfg.integrator())
    T = engine.truth_table()
    diag = permuted_diagonal(T)
    rows = [[BASIS_LABELS[i], *T[i], diag[i]] for i in range(4)]
    summary = {f"f_{BASIS_LABELS[i]}": diag[i] for i in range(4)}
    summary["infidelity"] = 1.0 - float(diag.min())
    summary["max_norm_drift"] = engine.max_norm_drift
    leak = max(engine.simulate(TwoQubitState.basis(i)).final.leakage for i in range(4))
    notes.append(f"min_fidelity={_fmt(diag.min())} max_end_leakage={_fmt(leak)}")
    out = Outcome(["input", "p_FJ", "p_GJ", "p_FK", "p_GK", "fidelity"], rows, summary, notes)
    if leak > 0.05:
        out.code, out.reason = EXIT_LEAKAGE, f"end leakage {leak:.4g} exceeds 0.05"
    return out


def cmd_phonon_sweep(cfg: RunConfig) -> Outcome:
    params = cfg.phonon()
    ph = cfg.section("phonon")
    mode = ph["mode"]
    energies = np.linspace(ph["E_min"], ph["E_max"], int(ph["E_steps"]))
    col2 = "gamma2_per_s" if mode == "corrected" else "gamma2_literal_SI"
    rows = [[E, gamma0(E, params).rate, gamma2(E, params, mode).rate] for E in energies]
    Ep = float(ph["E_point"])
    summary = {"gamma0_per_s": gamma0(Ep, params).rate, col2: gamma2(Ep, params, mode).rate}
    notes = [f"T_K={_fmt(params.T)} lambda_p_nm={_fmt(params.lambda_p)} lambda_z_nm={_fmt(params.lambda_z)} mode={mode}"]
    if mode == "literal":
        notes.append("warning: literal gamma2 prefactor is dimensionally inconsistent; values are SI numbers, not rates")
    return Outcome(["E_meV", "gamma0_per_s", col2], rows, summary, notes)


def cmd_feasibility(cfg: RunConfig) -> Outcome:
    spec = cfg.molecule()
    E0 = cfg.field(spec)
    N = int(cfg.get("pulse.N"))
    f = cfg.section("feasibility")
    if f["Gamma"] is not None:
        Gamma = float(f["Gamma"])
        source = "config"
    else:
        E = math.sqrt(2.0) * spec.V  # eps_3 - eps_2
        Gamma = gamma2(E, cfg.phonon()).rate
        source = f"gamma2({E:.6g} meV)"
    hw = rabi_energy(spec, E0)
    res = pulse_feasibility(hw / HBAR, N, Gamma)
    if Gamma > 0:
        thr = rabi_threshold(N, Gamma, float(f["margin"]))
        thr_E0 = field_from_rabi_energy(spec, thr)
    else:
        thr = thr_E0 = 0.0
    header = ["Gamma_per_s", "hbar_omega_meV", "E0_V_per_cm", "N", "margin", "verdict",
              "threshold_hbar_omega_meV", "threshold_E0_V_per_cm"]
    rows = [[Gamma, hw, E0, N, res.margin, res.verdict, thr, thr_E0]]
    verdict_code = {"pass": 0, "marginal": 1, "fail": 2}[res.verdict]
    summary = {"margin": res.margin, "verdict_code": verdict_code, "threshold_hbar_omega_meV": thr}
    out = Outcome(header, rows, summary, [f"Gamma source: {source}"])
    if res.verdict != "pass":
        out.code, out.reason = EXIT_FEASIBILITY, f"feasibility {res.verdict}: margin {res.margin:.4g} < 10"
    return out


HANDLERS = {
    "spectrum": cmd_spectrum,
    "gate": cmd_gate,
    "prepare": cmd_prepare,
    "cnot": cmd_cnot,
    "truth-table": cmd_truth_table,
    "phonon-sweep": cmd_phonon_sweep,
    "feasibility": cmd_feasibility,
}


# -- sweeps -----------------------------------------------------------------


def sweep_values(cfg: RunConfig) -> np.ndarray:
    s = cfg.section("sweep")
    return np.linspace(float(s["min"]), float(s["max"]), int(s["steps"]))


def sweep_runner(subcommand: str, cfg: RunConfig) -> Outcome:
    """Run ``subcommand`` once per sweep point; rows keep the sweep order."""
    s = cfg.section("sweep")
    var = s["variable"]
    handler = HANDLERS[subcommand]
    base = cfg.data[var.split(".")[0]][var.split(".")[1]]
    values = sweep_values(cfg)
    if isinstance(base, int) and all(float(v).is_integer() for v in values):
        values = [int(v) for v in values]
    else:
        values = [float(v) for v in values]
    points = [cfg.with_value(var, v) for v in values]
    for p in points:
        p.data["sweep"] = None

    def run(point):
        return handler(point)

    workers = int(s["workers"])
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(p) for p in points]

    keys = list(results[0].summary)
    rows = [[v, *[r.summary[k] for k in keys], r.code] for v, r in zip(values, results)]
    out = Outcome([var.replace(".", "_"), *keys, "exit_code"], rows, notes=[f"sweep {var} over {len(values)} points"])
    flagged = [(v, r) for v, r in zip(values, results) if r.code]
    if flagged:
        v, r = flagged[0]
        out.code = r.code
        out.reason = f"{len(flagged)} of {len(values)} sweep points flagged; first at {var}={_fmt(v)}: {r.reason}"
    return out


def run_command(subcommand: str, cfg: RunConfig) -> Outcome:
    if subcommand not in HANDLERS:
        raise ConfigError(f"unknown command {subcommand!r}; choose from {', '.join(COMMANDS)}")
    if cfg.has("sweep"):
        return sweep_runner(subcommand, cfg)
    return HANDLERS[subcommand](cfg)


# -- output -----------------------------------------------------------------


def render_csv(out: Outcome, subcommand: str, cfg: RunConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# qdgates {__version__}\n")
    buf.write(f"# command: {subcommand}\n")
    buf.write(f"# config_sha256: {cfg.digest()}\n")
    for n in out.notes:
        buf.write(f"# {n}\n")
    buf.write(",".join(out.header) + "\n")
    width = len(out.header)
    for row in out.rows:
        if len(row) != width:
            raise RuntimeError(f"row has {len(row)} columns, header has {width}")
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _report(code: int, reason: str) -> None:
    sys.stderr.write(json.dumps({"exit_code": code, "status": _STATUS.get(code, "error"), "reason": reason}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="CSV output path (default: config 'output' or stdout)")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config value, e.g. pulse.N=3 (repeatable)")
    ap = argparse.ArgumentParser(prog="qdgates", description="Coupled quantum-dot gate simulations")
    ap.add_argument("--version", action="version", version=f"qdgates {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.override)
        else:
            from .config import apply_overrides
            cfg = resolve(apply_overrides({}, args.override))
        out = run_command(args.command, cfg)
        text = render_csv(out, args.command, cfg)
    except ConfigError as exc:
        _report(EXIT_CONFIG, str(exc))
        return EXIT_CONFIG
    except NumericalError as exc:
        _report(EXIT_NUMERICAL, str(exc))
        return EXIT_NUMERICAL
    path = args.out or cfg.data.get("output")
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if out.code:
        _report(out.code, out.reason or "")
    return out.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
