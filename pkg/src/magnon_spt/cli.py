"""Command-line front end: ``magnon-spt <command> [--config F] [--param k=v ...]``.

Configs are nested JSON. ``--param`` overrides use dotted paths
(``model.lambda_r=10``, ``grid.resolution=[101,101]``); values are parsed as
JSON and fall back to plain strings. Initial conditions are given in units of
sqrt(gamma/K), as pairs [re, im].
"""

import argparse
import copy
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (EFFECTIVE, LAB, IntegrationError, Unsettled, integrate_effective,
                       integrate_lab_frame, settle)
from .fluctuations import (NoiseSpec, NotHurwitzError, SingularLyapunovError, cavity_fluctuation,
                           diffusion_matrix, magnon_fluctuation, solve_lyapunov)
from .io import config_hash, render_csv, render_json, write_table
from .model import (EffectiveModel, FloquetDrive, LabParams, build_effective_model,
                    fig2_lab_params, rwa_report)
from .stability import classify, drift_matrix, is_hurwitz
from .steady_state import SteadyStateError, residual, steady_states
from .sweep import (DRIVE_SWEEP_COLUMNS, NoTransitionError, _ordered_map, boundary_overlay,
                    drive_sweep, find_critical_drive, phase_diagram_grid)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("effective-params", "steady-state", "phase-diagram", "dynamics",
            "drive-sweep", "fluctuations", "critical-drive")


class ConfigError(ValueError):
    pass


# -- config plumbing ---------------------------------------------------------

def preset_names():
    return sorted(p.name[:-5] for p in resources.files(__package__).joinpath("presets").iterdir()
                  if p.name.endswith(".json"))


def load_preset(name):
    path = resources.files(__package__).joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads(path.read_text())


def parse_override(text):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"--param expects key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def apply_override(cfg, key, value):
    node = cfg
    parts = key.split(".")
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot set {key!r}: {p!r} is not a section")
        node = nxt
    node[parts[-1]] = value


def _section(cfg, name, required=True):
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"config needs a {name!r} section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name!r} must be an object")
    return sec


def _build(cls, kwargs, what):
    try:
        return cls(**kwargs)
    except TypeError as err:
        raise ConfigError(f"bad {what} block: {err}") from err
    except ValueError as err:
        raise ConfigError(f"invalid {what}: {err}") from err


def lab_and_drive(cfg):
    """(LabParams, FloquetDrive) from a ``fig2`` block or ``lab`` + ``drive`` blocks."""
    if "fig2" in cfg:
        f = dict(_section(cfg, "fig2"))
        xi = f.pop("xi", 0.0)
        try:
            lab, drive = fig2_lab_params(**f)
            return lab, drive.with_xi(float(xi))
        except TypeError as err:
            raise ConfigError(f"bad fig2 block: {err}") from err
        except ValueError as err:
            raise ConfigError(f"invalid fig2 block: {err}") from err
    if "lab" not in cfg:
        raise ConfigError("config needs a 'fig2' block or 'lab' and 'drive' blocks")
    lab = _build(LabParams, _section(cfg, "lab"), "lab")
    d = dict(_section(cfg, "drive"))
    xi = d.pop("xi", None)
    if xi is not None:
        d.setdefault("Omega", 0.0)
    drive = _build(FloquetDrive, d, "drive")
    if xi is not None:
        try:
            drive = drive.with_xi(float(xi))
        except ValueError as err:
            raise ConfigError(f"invalid drive: {err}") from err
    return lab, drive


def effective_model(cfg):
    if "model" in cfg:
        return _build(EffectiveModel, _section(cfg, "model"), "model")
    lab, drive = lab_and_drive(cfg)
    return build_effective_model(lab, drive)


def noise_spec(cfg):
    return _build(NoiseSpec, _section(cfg, "noise", required=False), "noise")


def _interval(value, name):
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{name} must be a pair of numbers") from err
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ConfigError(f"{name} must be a non-degenerate interval")
    return lo, hi


def _count(value, name, minimum=2):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}")
    return value


def _complex(value, name):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    try:
        re, im = value
        return complex(float(re), float(im))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{name} must be a number or [re, im]") from err


def _c(z):
    return float(np.real(z)), float(np.imag(z))


# -- commands ---------------------------------------------------------------
# each returns (rows, columns, extra_meta, companion) where companion is
# None or (suffix, rows, columns)

def cmd_effective_params(cfg, threads):
    lab, drive = lab_and_drive(cfg)
    rwa = _section(cfg, "rwa", required=False)
    window = rwa.get("window", max(abs(drive.n1), abs(drive.n2)) + 5)
    threshold = float(rwa.get("threshold", 0.1))
    if "sweep" in cfg:
        sw = _section(cfg, "sweep")
        lo, hi = _interval(sw.get("xi_range", (0.0, 3.0)), "sweep.xi_range")
        xis = np.linspace(lo, hi, _count(sw.get("samples", 301), "sweep.samples"))
    else:
        xis = [drive.xi]

    def row(xi):
        d = drive.with_xi(float(xi))
        m = build_effective_model(lab, d)
        rep = rwa_report(lab, d, window, threshold)
        return {"xi": float(xi), "Omega": d.Omega, "omega_c": m.omega_c, "omega_m": m.omega_m,
                "lambda_r": m.lambda_r, "lambda_cr": m.lambda_cr,
                "delta_n1_minus": m.delta_n1_minus, "delta_n2_plus": m.delta_n2_plus,
                "rwa_worst_ratio": rep.worst_ratio, "rwa_valid": rep.valid}

    try:
        rows = _ordered_map(row, xis, threads)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    cols = ["xi", "Omega", "omega_c", "omega_m", "lambda_r", "lambda_cr",
            "delta_n1_minus", "delta_n2_plus", "rwa_worst_ratio", "rwa_valid"]
    return rows, cols, {"rwa_window": window, "rwa_threshold": threshold}, None


def _state_row(model, state, parity):
    stable, margin = is_hurwitz(drift_matrix(model, state))
    a, b = state.a_amp, state.b_amp
    return {"branch": state.branch, "parity": parity, "n_occ": state.n_occ,
            "n_scaled": state.n_occ / model.n_scale, "a_re": _c(a)[0], "a_im": _c(a)[1],
            "b_re": _c(b)[0], "b_im": _c(b)[1], "residual": residual(model, a, b),
            "stable": stable, "max_re_eig": margin}


def cmd_steady_state(cfg, threads):
    model = effective_model(cfg)
    rows = []
    for state in steady_states(model):
        rows.append(_state_row(model, state, 1))
        if state.n_occ > 0:
            rows.append(_state_row(model, state.partner(), -1))
    label = classify(model).label
    cols = ["branch", "parity", "n_occ", "n_scaled", "a_re", "a_im", "b_re", "b_im",
            "residual", "stable", "max_re_eig"]
    return rows, cols, {"phase": label}, None


def cmd_phase_diagram(cfg, threads):
    base = effective_model(cfg).with_couplings(0.0, 0.0)
    g = _section(cfg, "grid", required=False)
    lr = _interval(g.get("lr_range", (-30.0, 30.0)), "grid.lr_range")
    lcr = _interval(g.get("lcr_range", (-30.0, 30.0)), "grid.lcr_range")
    res = g.get("resolution", [601, 601])
    if isinstance(res, int):
        res = [res, res]
    if not isinstance(res, (list, tuple)) or len(res) != 2:
        raise ConfigError("grid.resolution must be an integer or a pair")
    res = (_count(res[0], "grid.resolution"), _count(res[1], "grid.resolution"))
    samples = _count(g.get("boundary_samples", 1201), "grid.boundary_samples")
    grid = phase_diagram_grid(base, lr, lcr, res, threads)
    cols = ["lambda_r", "lambda_cr", "label", "trivial_stable", "plus_exists", "plus_stable",
            "minus_exists", "minus_stable", "stability_margin", "marginal"]
    overlay = boundary_overlay(base, lr, samples, lcr)
    return list(grid.rows()), cols, {}, (".boundaries", overlay, ["curve", "lambda_r", "lambda_cr"])


def _initial_conditions(dyn, scale):
    ics = dyn.get("initial_conditions")
    if ics is None:
        ics = {"ic": {"a": dyn.get("a0", 0.0), "b": dyn.get("b0", 0.0)}}
    if not isinstance(ics, dict) or not ics:
        raise ConfigError("dynamics.initial_conditions must be a non-empty object")
    out = []
    for name in ics:
        ic = ics[name]
        if not isinstance(ic, dict):
            raise ConfigError(f"initial condition {name!r} must have 'a' and 'b'")
        out.append((name, _complex(ic.get("a", 0.0), f"{name}.a") * scale,
                    _complex(ic.get("b", 0.0), f"{name}.b") * scale))
    return out


def cmd_dynamics(cfg, threads):
    dyn = _section(cfg, "dynamics")
    frame = dyn.get("frame", EFFECTIVE)
    if frame not in (EFFECTIVE, LAB):
        raise ConfigError(f"dynamics.frame must be {EFFECTIVE!r} or {LAB!r}")
    try:
        t_end = float(dyn.get("t_end", 20.0))
        dt = float(dyn.get("sample_dt", 0.01))
    except (TypeError, ValueError) as err:
        raise ConfigError("t_end and sample_dt must be numbers") from err
    if not (t_end > 0 and dt > 0):
        raise ConfigError("t_end and sample_dt must be positive")
    if frame == LAB:
        lab, drive = lab_and_drive(cfg)
        model = build_effective_model(lab, drive)
        scale = math.sqrt(lab.gamma / lab.kerr_K)
    else:
        model = effective_model(cfg)
        scale = math.sqrt(model.n_scale)

    rows, settled = [], {}
    for name, a0, b0 in _initial_conditions(dyn, scale):
        if frame == LAB:
            traj = integrate_lab_frame(lab, drive, a0, b0, t_end, dt)
        else:
            traj = integrate_effective(model, a0, b0, t_end, dt)
        n_scaled = traj.magnon_number / scale ** 2
        for k in range(len(traj)):
            rows.append({"ic": name, "t": traj.times[k], "a_re": traj.a[k].real,
                         "a_im": traj.a[k].imag, "b_re": traj.b[k].real, "b_im": traj.b[k].imag,
                         "n_scaled": n_scaled[k]})
        if dyn.get("settle", False):
            r = settle(model, a0, b0, float(dyn.get("t_max", 50.0)))
            if isinstance(r, Unsettled):
                settled[name] = {"settled": False, "reason": r.reason}
            else:
                settled[name] = {"settled": True, "branch": r.branch,
                                 "n_scaled": float(r.n_occ / model.n_scale)}
    meta = {"frame": frame, "phase": classify(model).label}
    if settled:
        meta["settle"] = settled
    cols = ["ic", "t", "a_re", "a_im", "b_re", "b_im", "n_scaled"]
    return rows, cols, meta, None


def cmd_drive_sweep(cfg, threads):
    lab, drive = lab_and_drive(cfg)
    sw = _section(cfg, "sweep", required=False)
    lo, hi = _interval(sw.get("xi_range", (0.0, 3.0)), "sweep.xi_range")
    samples = _count(sw.get("samples", 301), "sweep.samples")
    try:
        rows = drive_sweep(lab, drive, (lo, hi), samples, noise_spec(cfg), threads)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    cols = [c for c, _ in DRIVE_SWEEP_COLUMNS]
    return rows, cols, {"column_docs": dict(DRIVE_SWEEP_COLUMNS)}, None


def cmd_fluctuations(cfg, threads):
    model = effective_model(cfg)
    noise = noise_spec(cfg)
    D = diffusion_matrix(noise, model.kappa, model.gamma)
    rows = []
    for state in steady_states(model):
        U = drift_matrix(model, state)
        if not is_hurwitz(U)[0]:
            continue
        V = solve_lyapunov(U, D)
        row = {"branch": state.branch, "n_occ": state.n_occ,
               "fluct_b": magnon_fluctuation(V), "fluct_a": cavity_fluctuation(V),
               "lyapunov_residual": V.residual}
        for i in range(4):
            for j in range(i, 4):
                row[f"V{i + 1}{j + 1}"] = V.entries[i, j]
        rows.append(row)
    if not rows:
        raise NotHurwitzError("no linearly stable steady state; stationary covariance undefined")
    cols = (["branch", "n_occ", "fluct_b", "fluct_a", "lyapunov_residual"]
            + [f"V{i + 1}{j + 1}" for i in range(4) for j in range(i, 4)])
    return rows, cols, {"noise": {"n_a": noise.n_a, "n_b": noise.n_b}}, None


def cmd_critical_drive(cfg, threads):
    lab, drive = lab_and_drive(cfg)
    bracket = _interval(cfg.get("bracket", (2.0, 2.35)), "bracket")
    xtol = float(cfg.get("xtol", 1e-7))
    crits = find_critical_drive(lab, drive, bracket, xtol=xtol)
    rows = [{"xi": c.xi, "order": c.order, "jump_scaled": c.jump,
             "label_below": c.label_below, "label_above": c.label_above} for c in crits]
    return rows, ["xi", "order", "jump_scaled", "label_below", "label_above"], {}, None


HANDLERS = {
    "effective-params": cmd_effective_params,
    "steady-state": cmd_steady_state,
    "phase-diagram": cmd_phase_diagram,
    "dynamics": cmd_dynamics,
    "drive-sweep": cmd_drive_sweep,
    "fluctuations": cmd_fluctuations,
    "critical-drive": cmd_critical_drive,
}

# bookkeeping keys that do not change results and stay out of the hash
_NON_RESULT_KEYS = ("command", "out", "format")


def run(command, cfg, threads=1, seed=None):
    """Run one command on a config dict; returns (rows, columns, meta, companion)."""
    clean = {k: v for k, v in cfg.items() if k not in _NON_RESULT_KEYS}
    rows, cols, extra, companion = HANDLERS[command](copy.deepcopy(clean), threads)
    meta = {"generator": f"magnon-spt {__version__}", "command": command,
            "config_sha256": config_hash(clean), "config": clean}
    if seed is not None:
        meta["seed"] = seed
    meta.update(extra)
    return rows, cols, meta, companion


def companion_path(out, suffix):
    p = Path(out)
    return p.with_name(p.stem + suffix + p.suffix)


def build_parser():
    p = argparse.ArgumentParser(prog="magnon-spt",
                                description="Floquet cavity-magnon superradiance toolkit.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--preset", help="shipped config: " + ", ".join(preset_names()))
        s.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted-path override, repeatable")
        s.add_argument("--out", default=None, help="output file ('-' for stdout)")
        s.add_argument("--format", choices=("csv", "json"), default=None)
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--seed", type=int, default=None,
                       help="recorded in the output header; no command draws random numbers")
    return p


def _load_config(args):
    cfg = {}
    if args.preset:
        cfg = load_preset(args.preset)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from err
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        cfg.update(loaded)
    for item in args.param:
        apply_override(cfg, *parse_override(item))
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = args.out if args.out is not None else cfg.get("out", "-")
        fmt = args.format or cfg.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not isinstance(out, str) or not out.strip():
            raise ConfigError("output path must not be empty")
        rows, cols, meta, companion = run(args.command, cfg, args.threads, args.seed)
        if out == "-":
            render = render_csv if fmt == "csv" else render_json
            sys.stdout.write(render(rows, cols, meta))
        else:
            write_table(out, rows, cols, meta, fmt)
            if companion is not None:
                suffix, crow, ccols = companion
                write_table(companion_path(out, suffix), crow, ccols,
                            {k: meta[k] for k in ("generator", "command", "config_sha256")}, fmt)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotHurwitzError, SingularLyapunovError, IntegrationError, NoTransitionError,
            SteadyStateError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
