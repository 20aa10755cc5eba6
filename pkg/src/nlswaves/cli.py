"""Command-line front end.

    nlswaves <subcommand> --config PATH [--out DIR] [--seed U64] [--threads N]

Subcommands: profile, diagram, kink, classify, spectrum, evolve, distances.
--config accepts a file path or the name of a builtin config (one per
nonlinearity family shipped with the package). Reports are JSON, series are
CSV with numbers at 17 significant digits; repeated invocations with the
same config and seed produce byte-identical outputs. Exit codes: 0 success,
2 config errors (with line/key), 1 domain errors (structured JSON on stdout).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import invariants as inv
from . import spectrum as sp
from .config import ConfigError, ExperimentConfig, parse_config, serialize_config
from .dynamics import (FieldState, energy_space_distance, evolve,
                       hydrodynamic_distance)
from .nonlinearity import ModelError, make_model
from .potential import PotentialError, find_turning_point
from .profile import ProfileError, solve_profile

DOMAIN_ERRORS = (ModelError, PotentialError, ProfileError, inv.InvariantError,
                 sp.SpectrumError, ValueError)


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: list, columns: list) -> None:
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row) + "\n")


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonify(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(spec: str) -> ExperimentConfig:
    p = Path(spec)
    if p.exists():
        return parse_config(p.read_text(encoding="utf-8"))
    builtin = resources.files("nlswaves").joinpath("configs", f"{spec}.cfg")
    if builtin.is_file():
        return parse_config(builtin.read_text(encoding="utf-8"))
    raise ConfigError(f"config {spec!r} is neither a file nor a builtin name")


def _model(cfg: ExperimentConfig):
    return make_model(cfg.nonlinearity_spec())


# ---------------------------------------------------------------------------
# subcommands

def cmd_profile(cfg, out: Path, seed: int, threads: int) -> dict:
    model = _model(cfg)
    prof = solve_profile(model, cfg.require("profile.c"),
                         h=cfg.get("grid.h"), L=cfg.get("grid.L"))
    _write_csv(out / "profile.csv", ["x", "eta", "A", "u", "phi"],
               [prof.x, prof.eta, prof.A, prof.u, prof.phi])
    header = {
        "c": prof.c, "xi_c": prof.xi_c, "status": prof.status,
        "theta_c": prof.theta_c, "h": prof.h, "L": prof.L,
        "tail": {"kind": prof.tail.kind,
                 "rate_or_exponent": prof.tail.rate_or_exponent,
                 "amplitude": prof.tail.amplitude,
                 "x_stitch": prof.tail.x_stitch},
    }
    _write_json(out / "profile.json", header)
    return header


def cmd_diagram(cfg, out: Path, seed: int, threads: int) -> dict:
    model = _model(cfg)
    diag = inv.compute_diagram(model, cfg.require("diagram.c_min"),
                               cfg.require("diagram.c_max"),
                               cfg.require("diagram.n"), workers=threads)
    pts = diag.points
    _write_csv(out / "diagram.csv",
               ["c", "E", "P", "dPdc", "d2Pdc2", "verdict"],
               [[p.c for p in pts], [p.E for p in pts], [p.P for p in pts],
                [p.dPdc for p in pts], [p.d2Pdc2 for p in pts],
                [p.verdict for p in pts]])
    report = {"n_points": len(pts), "gaps": diag.gaps, "notes": diag.notes,
              "kink": diag.kink,
              "verdicts": sorted({p.verdict for p in pts})}
    _write_json(out / "diagram.json", report)
    return report


def cmd_kink(cfg, out: Path, seed: int, threads: int) -> dict:
    model = _model(cfg)
    slope = inv.kink_momentum_slope(model)
    report = {
        "E_kink": inv.kink_energy(model),
        "dPdc0": slope["dPdc0"],
        "VK0": slope["VK0"],
        "P_limit": inv.extrapolate_momentum_to_zero(model),
        "verdict": "stable" if slope["dPdc0"] < 0 else "unstable",
    }
    _write_json(out / "kink.json", report)
    return report


def cmd_classify(cfg, out: Path, seed: int, threads: int) -> dict:
    model = _model(cfg)
    c = cfg.require("classify.c")
    verdict = find_turning_point(model, c)
    report = {"c": c, "status": verdict.status, "xi_c": verdict.xi_c,
              "other_roots": verdict.other_roots, "diagnostic": verdict.diagnostic,
              "c_s": model.c_s, "m_index": model.m_index, "lambda_m": model.lambda_m}
    if verdict.status not in ("no_wave",):
        pt = inv._branch_point(model, c)
        if pt is not None:
            report.update({"E": pt.E, "P": pt.P, "dPdc": pt.dPdc,
                           "d2Pdc2": pt.d2Pdc2, "verdict": pt.verdict})
    _write_json(out / "classify.json", report)
    return report


def cmd_spectrum(cfg, out: Path, seed: int, threads: int) -> dict:
    model = _model(cfg)
    prof = solve_profile(model, cfg.require("spectrum.c"),
                         h=cfg.get("grid.h"), L=cfg.get("grid.L"))
    rep = sp.spectrum_report(prof, cfg.get("spectrum.N", 1024))
    report = {"gamma0": rep.gamma0, "n_neg_L": rep.n_neg_L,
              "n_neg_Mdag": rep.n_neg_Mdag, "continuum_edge": rep.continuum_edge,
              "residuals": rep.residuals, "N": rep.N}
    _write_json(out / "spectrum.json", report)
    if cfg.get("spectrum.write_mode", 0) and rep.mode is not None:
        ops = sp.build_operators(prof, rep.N)
        zeta, ups = rep.mode
        w = sp.mode_to_field(prof, ops, zeta, ups)
        _write_csv(out / "mode.csv", ["x", "zeta", "upsilon", "re_w", "im_w"],
                   [ops.x, zeta, ups, w.real, w.imag])
    return report


def cmd_evolve(cfg, out: Path, seed: int, threads: int) -> dict:
    model = _model(cfg)
    c = cfg.require("evolve.c")
    prof = solve_profile(model, c, h=cfg.get("grid.h"), L=cfg.get("grid.L"))
    c_frame = cfg.get("evolve.c_frame", c)
    h = cfg.get("evolve.h") or 0.02
    L = cfg.get("evolve.L") or prof.L
    n = int(round(L / h))
    x = np.linspace(-n * h, n * h, 2 * n + 1)
    ref = prof.field_of(x)
    kind = cfg.get("evolve.initial", "exact")
    delta = cfg.get("evolve.delta", 0.0)
    mode_real = None
    if kind == "exact":
        psi0 = ref.copy()
    elif kind == "wave+mode":
        ops = sp.build_operators(prof, cfg.get("spectrum.N", 1024))
        found = sp.find_unstable_mode(ops)
        if found is None:
            raise inv.InvariantError("no unstable mode to seed at this speed")
        w = sp.mode_to_field(prof, ops, found["zeta"], found["upsilon"])
        # real eigenvalue: the complex mode field is the growing solution
        wrun = np.interp(x, ops.x, w.real) + 1j * np.interp(x, ops.x, w.imag)
        wrun /= math.sqrt(float(np.sum(wrun.real ** 2)) * h)
        mode_real = wrun.real
        psi0 = ref + delta * wrun
    elif kind == "wave+random":
        rng = np.random.Generator(np.random.Philox(seed))
        bump = np.exp(-(x / (0.25 * L)) ** 2)
        coeffs = rng.normal(size=6) + 1j * rng.normal(size=6)
        pert = sum(cf * np.cos((k + 1) * math.pi * x / L) for k, cf in enumerate(coeffs))
        pert *= bump
        pert /= max(float(np.max(np.abs(pert))), 1e-300)
        psi0 = ref + delta * pert
    else:
        raise ConfigError(f"unknown evolve.initial {kind!r}")
    result = evolve(model, FieldState(psi0, x, 0.0, c_frame),
                    T=cfg.require("evolve.T"), dt=cfg.require("evolve.dt"),
                    reference=ref, mode_real=mode_real,
                    out_stride=cfg.get("evolve.output_stride", 10),
                    track_distances=bool(cfg.get("evolve.track_distances", 0)),
                    untwisted=bool(cfg.get("evolve.untwisted", 0)),
                    keep_snapshots=bool(cfg.get("evolve.snapshots", 0)))
    final, diags = result[0], result[1]
    cols = [diags.t, diags.energy, diags.momentum]
    hdr = ["t", "E", "P_untwisted" if diags.momentum_kind == "untwisted" else "P"]
    if diags.d_hy is not None:
        cols += [diags.d_hy, diags.d_Z]
        hdr += ["d_hy", "d_Z"]
    if diags.mode_amp is not None:
        cols.append(diags.mode_amp)
        hdr.append("mode_amp")
    _write_csv(out / "run.csv", hdr, cols)
    if len(result) == 3:
        snaps = result[2]
        ts = np.concatenate([np.full(x.size, s.t) for s in snaps])
        xs = np.concatenate([s.x for s in snaps])
        res = np.concatenate([s.psi.real for s in snaps])
        ims = np.concatenate([s.psi.imag for s in snaps])
        _write_csv(out / "snapshots.csv", ["t", "x", "re", "im"], [ts, xs, res, ims])
    report = {"E_drift": abs(diags.energy[-1] - diags.energy[0]) /
                         max(1e-300, abs(diags.energy[0])),
              "P_drift": abs(diags.momentum[-1] - diags.momentum[0]),
              "boundary_drift": diags.boundary_drift,
              "T": float(diags.t[-1])}
    _write_json(out / "run.json", report)
    return report


def cmd_distances(cfg, out: Path, seed: int, threads: int) -> dict:
    mode = cfg.get("distances.mode", "invariance")
    if mode == "invariance":
        model = _model(cfg)
        prof = solve_profile(model, cfg.require("distances.c"),
                             h=cfg.get("grid.h"), L=cfg.get("grid.L"))
        theta = cfg.get("distances.theta", 0.7)
        y = cfg.get("distances.y", 0.3)
        x = prof.x
        psi = prof.field_of(x - y) * np.exp(1j * theta)
        report = {
            "theta": theta, "y": y,
            "d_hy_raw": hydrodynamic_distance(psi, prof, x, minimize=False),
            "d_hy_min": hydrodynamic_distance(psi, prof, x),
            "d_Z_raw": energy_space_distance(psi, prof, x, minimize=False),
            "d_Z_min": energy_space_distance(psi, prof, x),
        }
    elif mode == "phase_sequence":
        rows = []
        for n in cfg.get("distances.n_values", [100.0, 1000.0]):
            d_hy, d_Z = phase_sequence_distances(int(n))
            rows.append({"n": int(n), "d_hy": d_hy, "d_Z": d_Z,
                         "ratio": d_Z / d_hy,
                         "sqrt_2pi_over_n": math.sqrt(2.0 * math.pi / n)})
        report = {"mode": "phase_sequence", "rows": rows}
    else:
        raise ConfigError(f"unknown distances.mode {mode!r}")
    _write_json(out / "distances.json", report)
    return report


def phase_sequence_distances(n: int, h: float = 0.05) -> tuple:
    """d_hy and d_Z between exp(i phi_*) and exp(i (phi_* + phi_n)) for the
    slow-logarithmic phase phi_* = (ln x)^2/2 (x >= 1) and the piecewise
    ramp phi_n (slope 1/n up, flat, slope -1/n down over [0, 3 n pi])."""
    span = 3.0 * n * math.pi
    m = int(round((span + 40.0) / h))
    x = np.linspace(-20.0, span + 20.0, m + 1)
    phi_star = np.where(x >= 1.0, 0.5 * np.log(np.maximum(x, 1.0)) ** 2, 0.0)
    phi_n = np.zeros_like(x)
    up = (x >= 0) & (x <= n * math.pi)
    flat = (x > n * math.pi) & (x < 2 * n * math.pi)
    down = (x >= 2 * n * math.pi) & (x <= 3 * n * math.pi)
    phi_n[up] = x[up] / n
    phi_n[flat] = math.pi
    phi_n[down] = 3.0 * math.pi - x[down] / n
    psi_ref = np.exp(1j * phi_star)
    psi = np.exp(1j * (phi_star + phi_n))
    d_hy = hydrodynamic_distance(psi, psi_ref, x, minimize=False)
    d_Z = energy_space_distance(psi, psi_ref, x, minimize=False)
    return d_hy, d_Z


COMMANDS = {
    "profile": cmd_profile,
    "diagram": cmd_diagram,
    "kink": cmd_kink,
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "distances": cmd_distances,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nlswaves", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True,
                        help="config file path or builtin config name")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the config seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for branch sweeps")
    parser.add_argument("--echo-config", action="store_true",
                        help="print the canonical serialized config and exit")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    if args.echo_config:
        sys.stdout.write(serialize_config(cfg))
        return 0
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = COMMANDS[args.command](cfg, out, seed, max(1, args.threads))
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    print(json.dumps(_jsonify(report), sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
