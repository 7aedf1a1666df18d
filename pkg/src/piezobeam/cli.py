"""Command line front end: simulate, modes, check, limit.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 scenario failure.  All outputs are byte-stable across reruns and thread
counts; CSV numbers carry 17 significant digits.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .assembly import build_system
from .config import RunConfig, config_digest, parse_config, resolved_dt
from .errors import ConfigError, IllegalRegime, PiezobeamError
from .forms import eval_field_at
from .kernels import backend_name
from .layout import CHARGE_FIELDS
from .scenarios import (
    check_patch_voltage_selectivity,
    check_single_beam_decoupling,
    classify_mode,
    mode_energy_fractions,
    run_electrostatic_limit,
)
from .solvers import eigenmodes, simulate
from .output import svg_line_plot, write_csv, write_json

_CLASS_CODE = {"stretching": 0.0, "bending": 1.0, "charge": 2.0}
_MOTION_FIELDS = ("v", "w", "psi")


def _load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _provenance(config: RunConfig, system) -> list:
    return [
        f"piezobeam {__version__}",
        f"config sha256 {config_digest(config)}",
        f"mesh elements={system.mesh.n_elements} dofs={system.n_dofs}",
        f"backend {backend_name()}",
    ]


def _arrays_of(layout, full_vec):
    return {name: full_vec[layout.dof_slice(name)] for name in layout.fields}


def _probe_position(layout, field: str, probe: float) -> float:
    """Clamp the probe into the field's support (charge fields live on the patch)."""
    elems = layout.field_elements(field)
    nodes = layout.mesh.nodes
    lo, hi = float(nodes[elems[0]]), float(nodes[elems[-1] + 1])
    return min(max(probe, lo), hi)


def cmd_simulate(config: RunConfig, out: str, svg: bool) -> int:
    vspec = config.validated()
    system = build_system(vspec, config.n_elements)
    dt = resolved_dt(config)
    zero = np.zeros(system.n_dofs)
    traj = simulate(system, zero, zero, dt, config.t_end, stride=config.stride)

    layout = system.layout
    probe = config.probe if config.probe is not None else vspec.geometry.length
    names, columns = ["t"], [traj.t]
    for field in layout.fields:
        px = _probe_position(layout, field, probe)
        vals = np.empty(len(traj))
        for i in range(len(traj)):
            arrays = _arrays_of(layout, system.embed(traj.X[i]))
            vals[i] = eval_field_at(layout, arrays, field, px)
        names.append(f"{field}_probe")
        columns.append(vals)
        value_idx = system.value_dofs_of(field)
        names.append(f"{field}_max")
        columns.append(np.max(np.abs(traj.X[:, value_idx]), axis=1)
                       if len(value_idx) else np.zeros(len(traj)))
    energy_names = ["E_kin", "E_stored", "E_mag", "E_total", "work_in",
                    "balance_residual"]
    energy_cols = [traj.kinetic, traj.stored, traj.magnetic, traj.total,
                   traj.work, traj.balance_residual]
    names.extend(energy_names)
    columns.extend(energy_cols)

    comments = _provenance(config, system) + [f"dt {dt!r}"]
    write_csv(os.path.join(out, "trajectory.csv"), names, columns, comments)
    write_csv(os.path.join(out, "energy.csv"), ["t"] + energy_names,
              [traj.t] + energy_cols, comments)

    scale = float(np.max(traj.total)) if len(traj.t) else 0.0
    resid = float(np.max(np.abs(traj.balance_residual)))
    write_json(os.path.join(out, "simulate_report.json"), {
        "config_sha256": config_digest(config),
        "backend": backend_name(),
        "n_dofs": system.n_dofs,
        "n_steps": int(round(config.t_end / dt)),
        "dt": dt,
        "max_energy": scale,
        "max_balance_residual": resid,
        "final_energy": float(traj.total[-1]),
    })
    if svg:
        motion = [(f"{f}_probe", traj.t, columns[names.index(f"{f}_probe")])
                  for f in _MOTION_FIELDS if f in layout.fields]
        svg_line_plot(os.path.join(out, "trajectory.svg"), motion,
                      title="probe displacements", xlabel="t", ylabel="value")
        svg_line_plot(os.path.join(out, "energy.svg"),
                      [(n, traj.t, c) for n, c in zip(energy_names[:4], energy_cols)],
                      title="energy ledger", xlabel="t", ylabel="energy")
    return 0


def cmd_modes(config: RunConfig, out: str, svg: bool, n_modes: int) -> int:
    vspec = config.validated()
    system = build_system(vspec, config.n_elements)
    ms = eigenmodes(system.M, system.K, n_modes)
    k = len(ms.omegas)

    fractions = [mode_energy_fractions(system, ms.shapes[:, i]) for i in range(k)]
    classes = [classify_mode(fr) for fr in fractions]
    frac_stretch = [fr.get("v", 0.0) for fr in fractions]
    frac_bend = [sum(fr.get(f, 0.0) for f in ("w", "psi")) for fr in fractions]
    frac_charge = [sum(v for f, v in fr.items() if f in CHARGE_FIELDS)
                   for fr in fractions]

    comments = _provenance(config, system) + [
        "class codes: 0 stretching, 1 bending, 2 charge"]
    write_csv(os.path.join(out, "modes.csv"),
              ["index", "omega_rad_s", "freq_hz", "is_zero", "class",
               "frac_stretch", "frac_bend", "frac_charge"],
              [np.arange(k, dtype=float), ms.omegas, ms.omegas / (2.0 * np.pi),
               (np.arange(k) < ms.n_zero).astype(float),
               [_CLASS_CODE[c] for c in classes],
               frac_stretch, frac_bend, frac_charge],
              comments)
    write_json(os.path.join(out, "modes_report.json"), {
        "config_sha256": config_digest(config),
        "n_modes": k,
        "n_zero": ms.n_zero,
        "omega_rad_s": [float(w) for w in ms.omegas],
        "classes": classes,
    })
    if svg:
        series = []
        layout = system.layout
        shown = 0
        for i in range(ms.n_zero, k):
            field = {"stretching": "v", "bending": "w", "charge": "q"}[classes[i]]
            if field == "q" and "q" not in layout.fields:
                field = "qT"
            full = system.embed(ms.shapes[:, i])
            series.append((f"mode {i} ({classes[i]})",
                           layout.node_positions(field),
                           full[layout.value_dofs(field)]))
            shown += 1
            if shown == 4:
                break
        if series:
            svg_line_plot(os.path.join(out, "modes.svg"), series,
                          title="mode shapes (dominant field)", xlabel="x",
                          ylabel="shape")
    return 0


def cmd_check(config: RunConfig, out: str) -> int:
    vspec = config.validated()
    dt = resolved_dt(config)
    corrupt = os.environ.get("PIEZOBEAM_CORRUPT_COUPLING", "") == "1"
    reports = []
    if vspec.is_patch:
        for mode in ("symmetric", "antisymmetric"):
            reports.append(check_patch_voltage_selectivity(
                vspec, mode, config.n_elements, dt, config.t_end,
                corrupt_sign=corrupt))
    else:
        reports.append(check_single_beam_decoupling(
            vspec, config.n_elements, dt, config.t_end))
    passed = all(r.passed for r in reports)
    write_json(os.path.join(out, "check_report.json"), {
        "config_sha256": config_digest(config),
        "passed": passed,
        "scenarios": [r.as_dict() for r in reports],
    })
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.scenario}: {status}")
    return 0 if passed else 4


def cmd_limit(config: RunConfig, out: str, svg: bool, mus) -> int:
    vspec = config.validated()
    dt = resolved_dt(config)
    study = run_electrostatic_limit(vspec, mus, config.n_elements, dt,
                                    config.t_end)
    write_csv(os.path.join(out, "limit.csv"), ["mu", "distance"],
              [np.array(study.mus), np.array(study.distances)],
              [f"piezobeam {__version__}",
               f"config sha256 {config_digest(config)}"])
    write_json(os.path.join(out, "limit_report.json"), {
        "config_sha256": config_digest(config),
        **study.as_dict(),
    })
    if svg:
        svg_line_plot(os.path.join(out, "limit.svg"),
                      [("distance", np.array(study.mus), np.array(study.distances))],
                      title="electrostatic limit", xlabel="mu",
                      ylabel="relative L2 distance", logx=True, logy=True)
    print(f"electrostatic-limit: monotone={study.monotone} "
          f"static_gap={study.static_gap:.3e}")
    return 0 if study.monotone else 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="piezobeam",
        description="Voltage-actuated piezoelectric beam simulator")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="path to a run configuration file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--svg", action="store_true", help="also write SVG plots")

    common(sub.add_parser("simulate", help="time-integrate and write CSVs"))
    mp = sub.add_parser("modes", help="modal analysis")
    common(mp)
    mp.add_argument("--n", type=int, default=8, help="number of modes")
    common(sub.add_parser("check", help="run the structure checks"))
    lp = sub.add_parser("limit", help="electrostatic-limit study")
    common(lp)
    lp.add_argument("--mu", default="5e-1,5e-2,5e-3,5e-4",
                    help="comma-separated descending mu values")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(config, args.out, args.svg)
        if args.command == "modes":
            return cmd_modes(config, args.out, args.svg, args.n)
        if args.command == "check":
            return cmd_check(config, args.out)
        mus = [float(tok) for tok in args.mu.split(",") if tok.strip()]
        return cmd_limit(config, args.out, args.svg, mus)
    except (ConfigError, IllegalRegime, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PiezobeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
