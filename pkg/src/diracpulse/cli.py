"""Command-line interface.

Subcommands: eigen, propagate, sweep, scale, validate.
Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 validation
failure.  Report paths write the delimited output plus a rendered figure;
figures can be suppressed with --no-figure.

The environment variable DIRACPULSE_THREADS overrides the sweep worker
count from the config file or --jobs.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config, parse_sweep
from .constants import C_AU, critical_field
from .dipole import coupling_key, load_coupling, save_coupling
from .pulse import field_to_intensity, intensity_to_field, wavelength_to_omega
from .runner import (build_run_basis, build_run_coupling, eigen_table,
                     run_once, run_sweep)
from .scaling import (RateTable, ScaledConfig, ionization_potential,
                      keldysh_parameter, rate_scale, relativistic_ip_shift,
                      scale_config, scaled_charge)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4


def _out_base(args, cfg=None) -> Path:
    out = args.output or (cfg.output if cfg is not None else None)
    if not out:
        raise ConfigError("no output path: pass -o or set 'output' in the config")
    p = Path(out)
    if p.suffix in (".csv", ".json", ".png"):
        p = p.with_suffix("")
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def cmd_eigen(args) -> int:
    cfg = load_config(args.config)
    base = _out_base(args, cfg)
    rows, summary = eigen_table(cfg)
    with open(base.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "index", "class", "energy_au"])
        for r in rows:
            w.writerow([r["channel"], r["index"], r["class"],
                        f"{r['energy_au']:.17g}"])
    _write_json(base.with_suffix(".json"), summary)
    if not args.no_figure:
        from .plots import spectrum_figure
        spectrum_figure(rows, base.with_suffix(".png"),
                        title=f"{cfg.theory} spectrum, Z={cfg.z:g}")
    print(f"wrote {base}.csv ({summary['states_emitted']} states, "
          f"{summary['spurious_excluded']} spurious excluded)")
    return EXIT_OK


def cmd_propagate(args) -> int:
    cfg = load_config(args.config)
    base = _out_base(args, cfg)

    coupling = None
    if args.cache_dir:
        cache_dir = Path(args.cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        basis = build_run_basis(cfg)
        include_ne = bool(cfg.include_ne) if cfg.theory == "dirac" else False
        m = 0.5 if cfg.theory == "dirac" else 0.0
        key = coupling_key(basis, cfg.z, cfg.theory, cfg.gauge, include_ne,
                           cfg.max_angular, m)
        cache_path = cache_dir / f"coupling_{key}.npz"
        if cache_path.exists():
            logger.info("loading coupling cache %s", cache_path)
            coupling = load_coupling(cache_path, key)
        else:
            coupling = build_run_coupling(cfg, basis=basis)
            save_coupling(cache_path, key, coupling)

    out = run_once(cfg, coupling=coupling)
    rep = out.report
    payload = rep.as_dict()
    payload.update(kind="propagation",
                   stats=out.result.stats,
                   checkpoints=out.result.checkpoints,
                   manifest=out.manifest)
    _write_json(base.with_suffix(".json"), payload)

    with open(base.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "negative_energy", "bound",
                    "positive_continuum", "total"])
        for label, entry in rep.per_channel.items():
            ne = entry.get("negative-energy", 0.0)
            bo = entry.get("bound", 0.0)
            co = entry.get("positive-continuum", 0.0)
            w.writerow([label] + [f"{v:.17g}" for v in (ne, bo, co, ne + bo + co)])

    if not args.no_figure:
        from .plots import populations_figure
        populations_figure(out.result.checkpoints, base.with_suffix(".png"),
                           title=f"{cfg.theory}/{cfg.gauge}, Z={cfg.z:g}")
    print(f"yield {rep.ionization:.6e}  survival {rep.survival:.6e}  "
          f"norm {rep.norm:.12f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = parse_sweep(Path(args.config).read_text())
    base = _out_base(args, spec.base)
    jobs = spec.jobs if args.jobs is None else args.jobs
    env = os.environ.get("DIRACPULSE_THREADS")
    if env:
        jobs = int(env)
    rows = run_sweep(spec, base.with_suffix(".csv"),
                     resume=not args.no_resume, jobs=jobs)
    if not args.no_figure:
        from .plots import sweep_figure
        sweep_figure(rows, spec.axis, base.with_suffix(".png"))
    n_err = sum(1 for r in rows if r.get("status") != "ok")
    print(f"wrote {base}.csv ({len(rows)} points, {n_err} failed)")
    return EXIT_NUMERICAL if n_err else EXIT_OK


def cmd_scale(args) -> int:
    z = args.z
    if args.wavelength_nm is not None and args.photon_energy_au is not None:
        raise ConfigError("give either --photon-energy-au or --wavelength-nm")
    if args.intensity_wcm2 is not None and args.field_au is not None:
        raise ConfigError("give either --intensity-wcm2 or --field-au")
    omega = args.photon_energy_au
    if args.wavelength_nm is not None:
        omega = wavelength_to_omega(args.wavelength_nm)
    f0 = args.field_au
    if args.intensity_wcm2 is not None:
        f0 = intensity_to_field(args.intensity_wcm2)

    zp = scaled_charge(z)
    payload = {
        "kind": "scaling",
        "z": z,
        "z_prime": zp,
        "ip_nonrel_au": ionization_potential(z, relativistic=False),
        "ip_rel_au": ionization_potential(z, relativistic=True),
        "delta_ip_au": relativistic_ip_shift(z),
        "critical_field_au": critical_field(),
        "c_au": C_AU,
    }
    if omega is not None and f0 is not None:
        payload["keldysh_gamma"] = keldysh_parameter(z, omega, f0)
    if omega is not None and f0 is not None:
        base_cfg = ScaledConfig(Z=args.base_z, omega=omega, f0=f0,
                                cycles=args.cycles,
                                r_max=args.r_max if args.r_max else 250.0 / args.base_z)
        scaled = scale_config(base_cfg, z)
        payload["base"] = {"z": base_cfg.Z, "photon_energy_au": base_cfg.omega,
                           "field_au": base_cfg.f0,
                           "intensity_wcm2": field_to_intensity(base_cfg.f0),
                           "cycles": base_cfg.cycles, "r_max": base_cfg.r_max}
        payload["scaled"] = {"z": scaled.Z, "photon_energy_au": scaled.omega,
                             "field_au": scaled.f0,
                             "intensity_wcm2": field_to_intensity(scaled.f0),
                             "cycles": scaled.cycles, "r_max": scaled.r_max}

    if args.rate_table:
        with open(args.rate_table) as fh:
            table = RateTable.load(fh)
        transformed = rate_scale(table, z)
        rate_out = Path(args.rate_output) if args.rate_output else None
        if rate_out is None and args.output:
            rate_out = _out_base(args).with_name(
                _out_base(args).name + "_rate").with_suffix(".csv")
        if rate_out is None:
            raise ConfigError("rate table given: pass --rate-output or -o")
        with open(rate_out, "w") as fh:
            transformed.save(fh)
        payload["rate_output"] = str(rate_out)
        if not args.no_figure and args.output:
            from .plots import rate_figure
            rate_figure({f"input (Z'={z:g} frame)": (table.f0, table.gamma),
                         f"scaled to Z={z:g}": (transformed.f0, transformed.gamma)},
                        _out_base(args).with_suffix(".png"))

    if args.output:
        _write_json(_out_base(args).with_suffix(".json"), payload)
        print(f"wrote {_out_base(args)}.json")
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import run_checks
    report = run_checks(basis_n=args.basis_n, basis_k=args.basis_k,
                        z=args.z, mutate=args.mutate)
    if args.output:
        base = _out_base(args)
        _write_json(base.with_suffix(".json"), report)
    for c in report["checks"]:
        tag = "PASS" if c["passed"] else "FAIL"
        print(f"[{tag}] {c['name']}: {c['value']:.3e} "
              f"(tolerance {c['tolerance']:.0e}) - {c['detail']}")
    print("validation", "PASSED" if report["passed"] else "FAILED",
          f"in {report['wall_time_s']:.1f} s")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="diracpulse",
        description="Hydrogenlike ions in strong laser pulses: spectral "
                    "solvers for the time-dependent Dirac and Schrodinger "
                    "equations in the dipole approximation.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true",
                   help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, figure=True):
        sp.add_argument("-o", "--output", help="output base path "
                        "(suffixes .csv/.json/.png are added)")
        if figure:
            sp.add_argument("--no-figure", action="store_true",
                            help="skip the rendered figure")

    sp = sub.add_parser("eigen", help="solve and dump one spectrum")
    sp.add_argument("config")
    add_common(sp)
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("propagate", help="run one pulse propagation")
    sp.add_argument("config")
    sp.add_argument("--cache-dir", help="directory for coupling caches")
    add_common(sp)
    sp.set_defaults(func=cmd_propagate)

    sp = sub.add_parser("sweep", help="run a single-axis parameter sweep")
    sp.add_argument("config", help="run config plus sweep_axis/sweep_values")
    sp.add_argument("--jobs", type=int, help="worker processes")
    sp.add_argument("--no-resume", action="store_true",
                    help="recompute points already in the output CSV")
    add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("scale", help="Z-scaling relations and rate transforms")
    sp.add_argument("--z", type=float, required=True, help="target charge")
    sp.add_argument("--base-z", type=float, default=1.0,
                    help="charge at which the pulse arguments are given")
    sp.add_argument("--photon-energy-au", type=float)
    sp.add_argument("--wavelength-nm", type=float)
    sp.add_argument("--intensity-wcm2", type=float)
    sp.add_argument("--field-au", type=float)
    sp.add_argument("--cycles", type=int, default=20)
    sp.add_argument("--r-max", type=float)
    sp.add_argument("--rate-table", help="CSV of f0_z3au,gamma_z2au")
    sp.add_argument("--rate-output", help="where to write the transformed table")
    add_common(sp)
    sp.set_defaults(func=cmd_scale)

    sp = sub.add_parser("validate", help="run the invariant self-check suite")
    sp.add_argument("--basis-n", type=int, default=200)
    sp.add_argument("--basis-k", type=int, default=7)
    sp.add_argument("--z", type=float, default=50.0)
    sp.add_argument("--mutate", choices=["velocity-sign"],
                    help="deliberately corrupt one coupling block "
                         "(demonstrates failure detection)")
    add_common(sp, figure=False)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
