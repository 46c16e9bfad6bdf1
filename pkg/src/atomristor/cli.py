"""Command-line front end: config parsing, dispatch, CSV/JSON/figure output.

All numeric output is serialized with 17 significant digits, and every
computation below the CLI is deterministic, so identical configs produce
byte-identical files regardless of the thread count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import calib, scf
from .config import ConfigError, RunConfig, default_config, parse_config, serialize
from .device import GeometryError, build_grid, profile_for_state
from .hamiltonian import assemble, resolve_hoppings
from .negf import SingularGreensFunction, ldos_map, spectrum
from .transport import (TransportSettings, energy_grid, hysteresis_sweep,
                        iv_sweep, ratio_table)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _settings(cfg: RunConfig, args) -> TransportSettings:
    return TransportSettings(base_step=cfg.energy_step,
                             refinement=cfg.refinement,
                             eta=cfg.eta,
                             transverse_mass_ratio=cfg.transverse_mass_ratio,
                             threads=args.threads)


def _outdir(cfg: RunConfig, args) -> Path:
    import os
    out = args.output_dir or os.environ.get("ATOMRISTOR_OUTPUT_DIR") or cfg.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


IV_HEADER = ["bias_V", "current_A", "current_density_A_cm2", "state",
             "temperature_K"]


def _iv_rows(table):
    return [(r.bias, r.current_1d, r.current_density, r.state, r.temperature)
            for r in table.rows]


def cmd_iv(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    settings = _settings(cfg, args)
    figure_tables = {}
    for temp in cfg.temperatures:
        if args.state == "composite":
            table = hysteresis_sweep(cfg.device, cfg.biases, temp,
                                     set_voltage=cfg.set_voltage,
                                     settings=settings)
        else:
            table = iv_sweep(cfg.device, args.state.upper(), cfg.biases, temp,
                             settings=settings)
        name = f"iv_{args.state}_{temp:g}K.csv"
        write_csv(out / name, IV_HEADER, _iv_rows(table))
        figure_tables[f"{args.state.upper()} {temp:g} K"] = (
            table.biases(), table.current_densities())
    if not args.no_figures:
        from .figures import render_iv
        render_iv(figure_tables, out / f"iv_{args.state}.png")
    _maybe_plot_script(out, args)
    return 0


def cmd_transmission(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    spec = cfg.device
    profile = profile_for_state(spec, args.state.upper(), args.bias)
    ham = assemble(build_grid(spec), profile, resolve_hoppings(spec))
    mu1 = spec.fermi_level
    mu2 = mu1 - args.bias
    energies = energy_grid(profile.values, mu1, mu2, spec.temperature,
                           base_step=cfg.energy_step, refinement=cfg.refinement)
    trans = spectrum(ham, energies, eta=cfg.eta).transmission
    write_csv(out / "transmission.csv", ["energy_eV", "transmission"],
              zip(energies, trans))
    if not args.no_figures:
        from .figures import render_transmission
        render_transmission(energies, trans, out / "transmission.png", mu=mu1)
    _maybe_plot_script(out, args)
    return 0


def cmd_ldos(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    spec = cfg.device
    profile = profile_for_state(spec, args.state.upper(), args.bias)
    grid = build_grid(spec)
    ham = assemble(grid, profile, resolve_hoppings(spec))
    e_min = args.e_min if args.e_min is not None else float(profile.values.min()) - 0.1
    e_max = args.e_max if args.e_max is not None else \
        float(spec.insulator.onset_potential) + 0.5
    energies = np.linspace(e_min, e_max, args.n_energies)
    dens = ldos_map(ham, energies, grid.spacing, eta=cfg.eta)
    header = ["position_nm", "potential_eV"] + [f"E_{e:.6f}eV" for e in energies]
    rows = [(grid.positions[i], profile.values[i], *dens[i])
            for i in range(grid.n_points)]
    name = f"ldos_{args.state}.csv"
    write_csv(out / name, header, rows)
    if not args.no_figures:
        from .figures import render_ldos
        render_ldos(grid.positions, energies, dens, profile.values,
                    out / f"ldos_{args.state}.png")
    _maybe_plot_script(out, args)
    return 0


def cmd_ratio(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    biases = [b for b in cfg.biases if b > 0]
    table = ratio_table(cfg.device, biases, cfg.device.temperature,
                        settings=_settings(cfg, args))
    write_csv(out / "ratio.csv", ["bias_V", "ratio", "reliable"],
              [(r.bias, r.ratio, int(r.reliable)) for r in table.rows])
    if not args.no_figures:
        from .figures import render_ratio
        render_ratio([r.bias for r in table.rows],
                     [r.ratio for r in table.rows], out / "ratio.png")
    _maybe_plot_script(out, args)
    return 0


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    settings = _settings(cfg, args)
    spec = cfg.device
    bias = args.bias if args.bias is not None else cfg.calib_bias
    temp = spec.temperature
    if args.parameter == "well_depth":
        values = ([float(v) for v in args.values.split(",")] if args.values
                  else sorted(cfg.calib_depths, reverse=True))
        result = calib.sweep_well_depth(spec, values, bias, temp, settings)
        col = "well_depth_eV"
    elif args.parameter == "well_location":
        values = ([float(v) for v in args.values.split(",")] if args.values
                  else cfg.calib_locations)
        result = calib.sweep_well_location(spec, values, bias, temp, settings)
        col = "well_location_nm"
    else:
        values = (args.values.split(",") if args.values
                  else ["deepened", "coulomb", "widened"])
        result = calib.lrs_distortion_study(spec, values, bias, temp, settings)
        col = "lrs_shape"
    name = f"sweep_{args.parameter}.csv"
    write_csv(out / name, [col, "ratio", "bias_V", "temperature_K"],
              [(v, r, bias, temp) for v, r in zip(result.values, result.ratios)])
    if result.fit:
        with open(out / f"sweep_{args.parameter}_fit.json", "w",
                  encoding="utf-8") as fh:
            json.dump(result.fit, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if not args.no_figures:
        from .figures import render_sweep
        render_sweep(result.values, result.ratios, args.parameter,
                     out / f"sweep_{args.parameter}.png")
    _maybe_plot_script(out, args)
    return 0


def cmd_calibrate(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    target = args.target if args.target is not None else cfg.calib_target
    tolerance = (args.tolerance if args.tolerance is not None
                 else cfg.calib_tolerance)
    bias = args.bias if args.bias is not None else cfg.calib_bias
    result = calib.calibrate_to_ratio(
        cfg.device, target, tolerance, cfg.calib_depths, cfg.calib_locations,
        bias, cfg.device.temperature, _settings(cfg, args))
    payload = {
        "best_depth_eV": result.best_depth,
        "best_location_nm": result.best_location,
        "achieved_ratio": result.achieved_ratio,
        "target_ratio": result.target_ratio,
        "tolerance": result.tolerance,
        "status": result.status,
        "bias_V": bias,
        "table": [{"depth_eV": d, "location_nm": l, "ratio": r}
                  for d, l, r in result.table],
    }
    with open(out / "calibration.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not args.no_figures:
        from .figures import render_calibration
        render_calibration(result.table, (result.best_depth, result.best_location),
                           out / "calibration.png")
    _maybe_plot_script(out, args)
    if result.status != "success":
        print("ERROR NO_CONVERGENCE: no grid point within tolerance of the "
              "target ratio (nearest result written)", file=sys.stderr)
        return 1
    return 0


def cmd_scf(cfg: RunConfig, args) -> int:
    out = _outdir(cfg, args)
    spec = cfg.device
    settings = scf.ScfSettings(damping=cfg.scf_damping, tol=cfg.scf_tol,
                               max_iter=cfg.scf_max_iter, mode=cfg.scf_mode,
                               cross_section=cfg.scf_cross_section)
    result = scf.scf_loop(spec, args.state.upper(), args.bias, settings,
                          _settings(cfg, args))
    grid = build_grid(spec)
    frozen = profile_for_state(spec, args.state.upper(), args.bias)
    write_csv(out / "scf_profile.csv",
              ["position_nm", "frozen_eV", "converged_eV", "density_per_nm"],
              zip(grid.positions, frozen.values, result.profile.values,
                  result.density))
    write_csv(out / "scf_residuals.csv", ["iteration", "max_update_eV"],
              enumerate(result.residual_history, start=1))
    if not args.no_figures:
        from .figures import render_scf
        render_scf(grid.positions, frozen.values, result.profile.values,
                   result.residual_history, out / "scf.png")
    _maybe_plot_script(out, args)
    if not result.converged:
        print(f"ERROR NO_CONVERGENCE: SCF did not reach tol "
              f"{settings.tol:g} eV in {result.iterations} iterations",
              file=sys.stderr)
        return 1
    return 0


PLOT_SCRIPT = """\
#!/usr/bin/env python
\"\"\"Regenerate plots from the CSV files in this directory.\"\"\"
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] < 2:
        continue
    fig, ax = plt.subplots()
    for col in range(1, min(data.shape[1], 6)):
        try:
            ax.plot(data[:, 0], data[:, col], label=header[col])
        except (ValueError, IndexError):
            continue
    ax.set_xlabel(header[0])
    ax.legend()
    fig.savefig(path.replace(".csv", "_replot.png"), dpi=120)
    plt.close(fig)
"""


def _maybe_plot_script(out: Path, args) -> None:
    if getattr(args, "emit_plot_script", False):
        (out / "plot_outputs.py").write_text(PLOT_SCRIPT, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomristor",
        description="1D quantum-transport simulator for MIM memristors")
    parser.add_argument("-c", "--config", help="configuration file")
    parser.add_argument("-o", "--output-dir", help="output directory override")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel bias points (default 1)")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip matplotlib figure output")
    parser.add_argument("--emit-plot-script", action="store_true",
                        help="write a standalone plotting script next to the CSVs")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default configuration and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("iv", help="I-V sweep CSVs per temperature")
    p.add_argument("--state", choices=["hrs", "lrs", "composite"],
                   default="composite")
    p.set_defaults(func=cmd_iv)

    p = sub.add_parser("transmission", help="transmission vs energy")
    p.add_argument("--bias", type=float, default=0.0)
    p.add_argument("--state", choices=["hrs", "lrs"], default="hrs")
    p.set_defaults(func=cmd_transmission)

    p = sub.add_parser("ldos", help="site x energy LDOS matrix")
    p.add_argument("--bias", type=float, default=1.0)
    p.add_argument("--state", choices=["hrs", "lrs"], default="hrs")
    p.add_argument("--e-min", type=float, default=None)
    p.add_argument("--e-max", type=float, default=None)
    p.add_argument("--n-energies", type=int, default=400)
    p.set_defaults(func=cmd_ldos)

    p = sub.add_parser("ratio", help="switching ratio vs bias")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("sweep", help="calibration parameter sweep")
    p.add_argument("--parameter", choices=["well_depth", "well_location",
                                           "lrs_shape"], required=True)
    p.add_argument("--values", help="comma-separated sweep values")
    p.add_argument("--bias", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="fit well depth/location to a ratio")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--bias", type=float, default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("scf", help="self-consistent profile and residuals")
    p.add_argument("--bias", type=float, default=0.0)
    p.add_argument("--state", choices=["hrs", "lrs"], default="hrs")
    p.set_defaults(func=cmd_scf)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else default_config()
        if args.print_defaults:
            print(serialize(default_config()), end="")
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("ERROR USAGE: no command given", file=sys.stderr)
            return 1
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"ERROR CONFIG: {exc}", file=sys.stderr)
        return 1
    except GeometryError as exc:
        print(f"ERROR GEOMETRY: {exc}", file=sys.stderr)
        return 1
    except SingularGreensFunction as exc:
        print(f"ERROR SINGULAR: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ERROR VALUE: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
