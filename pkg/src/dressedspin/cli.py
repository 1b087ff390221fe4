"""Command-line front end: config-driven sweeps with deterministic CSV output.

Every subcommand writes one CSV per run into the output directory.  The CSV
starts with ``#``-prefixed comment lines recording the tool version, the full
resolved configuration in base units, and the RNG seed, so a result file is
reproducible from its own header.  Numeric cells use 12 significant digits
and LF line endings; identical config and version give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 non-converged numerics,
64 unknown subcommand, 74 unwritable output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .circuits import (
    Circuit,
    SqrtSwap,
    SWAP,
    builtin_decompositions,
    circuit_unitary,
    conditional_gate_targets,
)
from .config import ConfigError, RunConfig, apply_override, as_int, load_config
from .core import Basis, StateVector, basis_state, gate_fidelity
from .dynamics import StepControl, spectrum_scan
from .model import DoubleDotParams, ParameterError, RegimeError, SingleQubitParams
from .protocols import (
    CalibrationError,
    EPS_END_DEFAULT,
    EPS_START_DEFAULT,
    RAMP_TOLERANCE,
    RampSpec,
    calibrate_gate,
    crossover_sweep,
    fm_gate,
    fsk_gate,
    ramp_time_sweep,
    readout_ramp,
    rwa_crosscheck,
    sw_validation_draws,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_USAGE = 64
EXIT_IO = 74

SUBCOMMANDS = (
    "spectrum",
    "init-sweep",
    "readout",
    "single-gate",
    "crossover",
    "sw-validate",
    "decompose-check",
    "rwa-check",
)

_DEFAULT_SEED = 12345


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return "nan"
    return f"{f:.11e}"


def _fmt_cfg(v) -> str:
    if isinstance(v, list):
        return ",".join(_fmt(x) for x in v)
    return _fmt(v)


def _get(section: dict, key: str, default):
    """Read a config entry, materializing the default into the section.

    Materialized defaults end up in the CSV header, so the file records the
    fully resolved configuration.
    """
    if key not in section:
        section[key] = default
    return section[key]


def _require(section: dict, section_name: str, key: str):
    if key not in section or section[key] is None:
        raise ConfigError(
            f"missing required config field: {section_name}.{key} "
            f"(set e.g. {section_name}.{key}_<unit>)"
        )
    return section[key]


def _as_float_list(v) -> list[float]:
    if isinstance(v, list):
        return [float(x) for x in v]
    return [float(v)]


def _double_dot(cfg: RunConfig) -> DoubleDotParams:
    s = cfg.system
    return DoubleDotParams(
        delta_nu_1=_get(s, "delta_nu_1", 0.0),
        delta_nu_2=_get(s, "delta_nu_2", 0.0),
        omega_r1=_get(s, "omega_r1", 10e6),
        omega_r2=_get(s, "omega_r2", 10e6),
        t_c=_get(s, "t_c", 1e9),
        eps=_get(s, "eps", 0.0),
        u=s.get("u"),
    )


def _step_control(cfg: RunConfig, default_tol: float) -> StepControl:
    p = cfg.protocol
    return StepControl(
        initial_dt=p.get("initial_dt"),
        tolerance=_get(p, "tolerance", default_tol),
        max_halvings=as_int(_get(p, "max_halvings", 20), "protocol.max_halvings"),
    )


def _cmd_spectrum(cfg, args, seed):
    dd = _double_dot(cfg)
    p = cfg.protocol
    lo = _get(p, "eps_scan_min", -200e9)
    hi = _get(p, "eps_scan_max", 50e9)
    n = as_int(_get(p, "eps_scan_points", 201), "protocol.eps_scan_points")
    basis_name = _get(p, "scan_basis", "dressed_st5")
    basis = {"dressed5": Basis.DRESSED5, "dressed_st5": Basis.DRESSED_ST5}.get(basis_name)
    if basis is None:
        raise ConfigError(f"protocol.scan_basis must be dressed5 or dressed_st5, got {basis_name!r}")
    scan = spectrum_scan(dd, np.linspace(lo, hi, n), basis)
    columns = ["eps_hz", "branch", "energy_hz"] + [f"comp_{k}" for k in basis.kets]
    rows = []
    for i, eps in enumerate(scan.eps_values):
        for b in range(basis.dim):
            rows.append([eps, b, scan.energies[i, b], *scan.compositions[i, b, :]])
    return {"spectrum.csv": (columns, rows)}, True


def _ramp_times(p: dict) -> list[float]:
    if "ramp_times" in p:
        return _as_float_list(p["ramp_times"])
    lo = _get(p, "ramp_time_min", 1e-9)
    hi = _get(p, "ramp_time_max", 1e-6)
    n = as_int(_get(p, "ramp_time_points", 13), "protocol.ramp_time_points")
    return list(np.geomspace(lo, hi, n))


def _cmd_init_sweep(cfg, args, seed):
    dd = _double_dot(cfg)
    p = cfg.protocol
    template = RampSpec(
        eps_start=_get(p, "eps_start", EPS_START_DEFAULT),
        eps_end=_get(p, "eps_end", EPS_END_DEFAULT),
        ramp_time=1e-6,
        direction="init",
    )
    ctrl = _step_control(cfg, RAMP_TOLERANCE)
    results = ramp_time_sweep(dd, template, _ramp_times(p), ctrl, threads=args.threads)
    columns = ["ramp_time_s", "p_s02", "p_s11", "p_t0", "p_tplus", "p_tminus"]
    rows = [
        [r.ramp_time, r.populations["s02"], r.populations["s11"],
         r.populations["t_zero"], r.populations["t_plus"], r.populations["t_minus"]]
        for r in results
    ]
    return {"init_sweep.csv": (columns, rows)}, all(r.converged for r in results)


_READOUT_STATES = {
    "s02": ("s02",),
    "t_plus": ("t_plus",),
    "s11": ("s11",),
    "t_zero": ("t_zero",),
    "t_minus": ("t_minus",),
}


def _readout_state(label: str) -> StateVector:
    if label == "mixed_s11_t0":
        amps = np.zeros(5, dtype=np.complex128)
        amps[2] = amps[3] = 1.0 / math.sqrt(2.0)
        return StateVector(amps, Basis.DRESSED_ST5)
    if label in _READOUT_STATES:
        return basis_state(Basis.DRESSED_ST5, label)
    raise ConfigError(
        f"unknown readout state {label!r}; expected one of "
        f"{sorted(_READOUT_STATES) + ['mixed_s11_t0']}"
    )


def _cmd_readout(cfg, args, seed):
    dd = _double_dot(cfg)
    p = cfg.protocol
    ramp = RampSpec(
        eps_start=_get(p, "eps_start", EPS_END_DEFAULT),
        eps_end=_get(p, "eps_end", EPS_START_DEFAULT),
        ramp_time=_get(p, "ramp_time", 1e-6),
        direction="readout",
    )
    states = _get(p, "states", "s11,t_minus,mixed_s11_t0")
    labels = states if isinstance(states, list) else [s.strip() for s in str(states).split(",")]
    ctrl = _step_control(cfg, RAMP_TOLERANCE)
    rows = []
    for label in labels:
        psi = _readout_state(label)
        rows.append([label, ramp.ramp_time, readout_ramp(dd, ramp, psi, ctrl)])
    return {"readout.csv": (["state", "ramp_time_s", "p_singlet"], rows)}, True


def _cmd_single_gate(cfg, args, seed):
    omega_r = _require(cfg.system, "system", "omega_r")
    p = cfg.protocol
    scheme = _get(p, "scheme", "fm")
    if scheme not in ("fm", "fsk"):
        raise ConfigError(f"protocol.scheme must be fm or fsk, got {scheme!r}")
    delta = _get(p, "delta", 0.1e6 if scheme == "fm" else 0.5e6)
    target_angle = _get(p, "target_angle", 0.5 * math.pi)
    f_n = p.get("f_n")
    columns = ["scheme", "axis", "phase_rad", "delta_hz", "f_n_hz", "duration_s", "fidelity"]
    rows = []
    for axis, phase in (("x", 0.0), ("y", 0.5 * math.pi)):
        duration = calibrate_gate(scheme, omega_r, delta, phase, target_angle, f_n)
        if scheme == "fm":
            report = fm_gate(omega_r, delta, phase, duration, target_angle=target_angle)
        else:
            report = fsk_gate(omega_r, delta, f_n, phase, duration, target_angle=target_angle)
        rows.append([scheme, axis, phase, delta, report.calibration.f_n, duration, report.fidelity])
    return {"single_gate.csv": (columns, rows)}, True


def _cmd_crossover(cfg, args, seed):
    s = cfg.system
    omega_r = _get(s, "omega_r", 10e6)
    u = _get(s, "u", 1000e9)
    eps = _get(s, "eps", 0.0)
    p = cfg.protocol
    t_c_list = _as_float_list(_get(p, "t_c_list", [0.04e9, 0.4e9, 4e9]))
    lo = _get(p, "ratio_min", 0.0)
    hi = _get(p, "ratio_max", 3.0)
    n = as_int(_get(p, "ratio_points", 61), "protocol.ratio_points")
    convention = _get(p, "convention", "difference")
    points = crossover_sweep(t_c_list, np.linspace(lo, hi, n), u, eps, omega_r, convention)
    rows = [[pt.t_c, pt.ratio, pt.theta, pt.status] for pt in points]
    return {"crossover.csv": (["t_c_hz", "ratio", "theta_rad", "status"], rows)}, True


def _cmd_sw_validate(cfg, args, seed):
    omega_r = _get(cfg.system, "omega_r", 10e6)
    p = cfg.protocol
    draws = sw_validation_draws(
        omega_r=omega_r,
        draws=as_int(_get(p, "draws", 200), "protocol.draws"),
        seed=seed,
        t_over_u=(_get(p, "t_over_u_min", 1e-3), _get(p, "t_over_u_max", 0.05)),
        exchange_frac=(_get(p, "exchange_frac_min", 1e-3), _get(p, "exchange_frac_max", 0.2)),
        dnu_ratio_max=_get(p, "dnu_ratio_max", 0.03),
        eps_frac_max=_get(p, "eps_frac_max", 0.3),
    )
    columns = [
        "draw", "t_c_hz", "u_hz", "eps_hz", "delta_nu_1_hz", "delta_nu_2_hz",
        "omega_r_hz", "rel_error", "regime",
    ]
    rows = [
        [d.index, d.dd.t_c, d.dd.u, d.dd.eps, d.dd.delta_nu_1, d.dd.delta_nu_2,
         omega_r, d.report.rel_error, d.report.regime]
        for d in draws
    ]
    return {"sw_validate.csv": (columns, rows)}, True


def _cmd_decompose_check(cfg, args, seed):
    circuits = builtin_decompositions()
    targets = conditional_gate_targets()
    rows = []
    for name in ("CNOT", "CNOT_X", "CY_Y"):
        fid = gate_fidelity(circuit_unitary(circuits[name]), targets[name])
        rows.append([name, fid, len(circuits[name])])
    sq2 = circuit_unitary(Circuit((SqrtSwap(), SqrtSwap())))
    rows.append(["SQRT_SWAP_SQUARED", gate_fidelity(sq2.matrix, SWAP), 2])
    return {"decompose_check.csv": (["gate", "fidelity", "gate_count"], rows)}, True


def _cmd_rwa_check(cfg, args, seed):
    s = cfg.system
    f_mw = _get(s, "f_mw", 1e9)
    nu = _get(s, "nu", f_mw)
    p = cfg.protocol
    ratios = _as_float_list(_get(p, "drive_ratios", [1e-4, 0.05]))
    ctrl = _step_control(cfg, 1e-5)
    columns = ["drive_ratio", "omega_r_hz", "f_mw_hz", "duration_s", "max_deviation"]
    rows = []
    for ratio in ratios:
        omega_r = ratio * f_mw
        sq = SingleQubitParams(omega_r=omega_r, nu=nu, f_mw=f_mw)
        duration = p.get("duration", 0.5 / omega_r if omega_r > 0 else 1.0 / f_mw)
        report = rwa_crosscheck(sq, duration, ctrl)
        rows.append([ratio, omega_r, f_mw, duration, report.max_deviation])
    return {"rwa_check.csv": (columns, rows)}, True


HANDLERS = {
    "spectrum": _cmd_spectrum,
    "init-sweep": _cmd_init_sweep,
    "readout": _cmd_readout,
    "single-gate": _cmd_single_gate,
    "crossover": _cmd_crossover,
    "sw-validate": _cmd_sw_validate,
    "decompose-check": _cmd_decompose_check,
    "rwa-check": _cmd_rwa_check,
}


def _usage() -> str:
    subs = " | ".join(SUBCOMMANDS)
    return (
        f"usage: dressedspin <subcommand> [--config PATH] [--out DIR] "
        f"[--set section.key=value ...] [--seed N] [--threads N]\n"
        f"subcommands: {subs}\n"
    )


def _write_csv(path: str, header: list[str], columns: list[str], rows) -> None:
    lines = [f"# {h}" for h in header]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".tmp-csv-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if not argv:
        sys.stderr.write(_usage())
        return EXIT_USAGE
    if argv[0] in ("-h", "--help"):
        sys.stdout.write(_usage())
        return EXIT_OK
    if argv[0] in ("--version",):
        sys.stdout.write(f"dressedspin {__version__}\n")
        return EXIT_OK
    sub = argv[0]
    if sub not in HANDLERS:
        sys.stderr.write(f"unknown subcommand: {sub!r}\n{_usage()}")
        return EXIT_USAGE

    parser = argparse.ArgumentParser(prog=f"dressedspin {sub}", add_help=True)
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument("--out", default=".", help="output directory for CSV files")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config entry (repeatable)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (sw-validate)")
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep evaluation")
    try:
        args = parser.parse_args(argv[1:])
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG

    seed = args.seed if args.seed is not None else _DEFAULT_SEED
    try:
        cfg = load_config(args.config)
        for assignment in args.set:
            apply_override(cfg, assignment)
        files, converged = HANDLERS[sub](cfg, args, seed)
    except (ConfigError, ParameterError, RegimeError, ValueError) as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG
    except CalibrationError as e:
        sys.stderr.write(f"numerics error: {e}\n")
        return EXIT_NUMERICS

    header = [f"dressedspin {__version__} {sub}"]
    header += [f"{sec}.{key}={_fmt_cfg(val)}" for sec, key, val in cfg.items()]
    header.append(f"seed={seed if sub == 'sw-validate' else 'none'}")
    try:
        os.makedirs(args.out, exist_ok=True)
        for name, (columns, rows) in files.items():
            _write_csv(os.path.join(args.out, name), header, columns, rows)
    except OSError as e:
        sys.stderr.write(f"output error: {e}\n")
        return EXIT_IO
    return EXIT_OK if converged else EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
