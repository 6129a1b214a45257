"""Run orchestration: basis, spectra, couplings, propagation, sweeps.

Everything the CLI does goes through here so that library users get the same
manifests and the same in-memory reuse (one coupling set per sweep when the
axis only changes the pulse).
"""

from __future__ import annotations

import csv
import hashlib
import logging
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import scipy

from . import __version__
from .bspline import RadialBasis, build_basis
from .config import RunConfig, SweepSpec, render_config, parse_config
from .constants import C_AU, HARTREE_EV, INTENSITY_AU_WCM2, WAVELENGTH_NM_AU
from .dipole import CouplingSet, build_coupling
from .dirac import solve_channels, CLASS_NAMES, SPURIOUS
from .observables import YieldReport, ionization_yield
from .propagate import PropagationSettings, RunResult, propagate
from .schrodinger import solve_channels_nr

logger = logging.getLogger(__name__)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(render_config(cfg).encode()).hexdigest()[:12]


def build_run_basis(cfg: RunConfig) -> RadialBasis:
    return build_basis(cfg.r_max, cfg.basis_n, cfg.basis_k,
                       n_geom=cfg.basis_n_geom, g=cfg.basis_g)


def solve_run_spectra(cfg: RunConfig, basis: Optional[RadialBasis] = None) -> Dict:
    basis = basis or build_run_basis(cfg)
    if cfg.theory == "dirac":
        return solve_channels(basis, cfg.z, cfg.j_max)
    return solve_channels_nr(basis, cfg.z, cfg.l_max)


def build_run_coupling(cfg: RunConfig, basis: Optional[RadialBasis] = None,
                       spectra: Optional[Dict] = None) -> CouplingSet:
    basis = basis or build_run_basis(cfg)
    spectra = spectra or solve_run_spectra(cfg, basis)
    include_ne = bool(cfg.include_ne) if cfg.theory == "dirac" else False
    return build_coupling(spectra, basis, cfg.theory, cfg.gauge,
                          include_negative=include_ne)


def propagation_settings(cfg: RunConfig) -> PropagationSettings:
    return PropagationSettings(rtol=cfg.rtol, atol=cfg.atol,
                               max_step=cfg.max_step,
                               checkpoints_per_cycle=cfg.checkpoints_per_cycle)


@dataclass
class RunOutcome:
    config: RunConfig
    result: RunResult
    report: YieldReport

    @property
    def manifest(self) -> Dict:
        return build_manifest(self.config, self.result, self.report)


def run_once(cfg: RunConfig, coupling: Optional[CouplingSet] = None) -> RunOutcome:
    coupling = coupling or build_run_coupling(cfg)
    result = propagate(coupling, cfg.pulse(), propagation_settings(cfg))
    return RunOutcome(config=cfg, result=result, report=ionization_yield(result))


def build_manifest(cfg: RunConfig, result: RunResult, report: YieldReport) -> Dict:
    pulse = cfg.pulse()
    return {
        "kind": "propagation",
        "config_text": render_config(cfg),
        "config_hash": config_hash(cfg),
        "package_version": __version__,
        "versions": {"python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "constants": {"c_au": C_AU, "hartree_ev": HARTREE_EV,
                      "intensity_au_wcm2": INTENSITY_AU_WCM2,
                      "wavelength_nm_au": WAVELENGTH_NM_AU},
        "threads_env": os.environ.get("DIRACPULSE_THREADS"),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "pulse": {"duration_au": pulse.duration, "a0": pulse.a0,
                  "intensity_wcm2": pulse.intensity_wcm2},
        "stats": result.stats,
        "report": report.as_dict(),
    }


def rerun_manifest(manifest: Dict) -> RunOutcome:
    """Repeat the propagation a manifest records; bitwise at equal threads."""
    return run_once(parse_config(manifest["config_text"]))


# ============================================================
# Eigen table
# ============================================================

def eigen_table(cfg: RunConfig) -> tuple:
    """Spectrum rows (channel, index, class, energy_au) plus a summary."""
    basis = build_run_basis(cfg)
    spectra = solve_run_spectra(cfg, basis)
    rows: List[Dict] = []
    per_channel: Dict[str, Dict[str, int]] = {}
    spurious_total = 0
    for key in sorted(spectra, key=lambda q: (abs(q), q) if cfg.theory == "dirac" else q):
        spec = spectra[key]
        label = spec.channel.name if cfg.theory == "dirac" else f"l={key}"
        counts: Dict[str, int] = {}
        idx = 0
        for i in range(len(spec.energies)):
            cls = int(spec.classes[i])
            name = CLASS_NAMES[cls]
            if cls == SPURIOUS:
                spurious_total += 1
                counts[name] = counts.get(name, 0) + 1
                continue
            rows.append({"channel": label, "index": idx, "class": name,
                         "energy_au": float(spec.energies[i])})
            counts[name] = counts.get(name, 0) + 1
            idx += 1
        per_channel[label] = counts
    ground = min(r["energy_au"] for r in rows if r["class"] == "bound")
    summary = {"kind": "spectrum", "theory": cfg.theory, "z": cfg.z,
               "config_hash": config_hash(cfg),
               "states_emitted": len(rows),
               "spurious_excluded": spurious_total,
               "ground_energy_au": ground,
               "per_channel_counts": per_channel}
    return rows, summary


# ============================================================
# Sweeps
# ============================================================

SWEEP_FIELDS = ["axis", "value", "config_hash", "status", "ionization",
                "survival", "bound_excitation", "negative_energy", "norm",
                "n_steps", "n_rhs", "wall_time_s", "error"]

_FLOAT_FIELDS = {"value", "ionization", "survival", "bound_excitation",
                 "negative_energy", "norm", "wall_time_s"}


def _fmt_cell(field: str, v) -> str:
    if v is None or v == "":
        return ""
    if field in _FLOAT_FIELDS:
        return f"{float(v):.17g}"
    return str(v)


def sweep_point_row(spec: SweepSpec, value: float,
                    coupling: Optional[CouplingSet] = None) -> Dict:
    cfg = spec.point(value)
    row = {"axis": spec.axis, "value": float(value),
           "config_hash": config_hash(cfg)}
    try:
        out = run_once(cfg, coupling=coupling)
    except Exception as exc:  # keep the sweep going, record the failure
        logger.warning("sweep point %s=%g failed: %s", spec.axis, value, exc)
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return row
    rep, st = out.report, out.result.stats
    row.update(status="ok", error="",
               ionization=rep.ionization, survival=rep.survival,
               bound_excitation=rep.bound_excitation,
               negative_energy=rep.negative_energy, norm=rep.norm,
               n_steps=st["n_steps"], n_rhs=st["n_rhs"],
               wall_time_s=st["wall_time_s"])
    return row


def write_sweep_csv(path: Union[str, Path], rows: List[Dict]) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_FIELDS)
        for row in rows:
            w.writerow([_fmt_cell(f, row.get(f)) for f in SWEEP_FIELDS])
    os.replace(tmp, path)


def read_sweep_csv(path: Union[str, Path]) -> List[Dict]:
    with open(path, newline="") as fh:
        rdr = csv.DictReader(fh)
        return list(rdr)


# per-process coupling reuse for parallel sweeps
_POOL_STATE: Dict = {}


def _pool_init(spec_text_base: str, axis: str):
    from .config import parse_config as _pc
    _POOL_STATE["base"] = _pc(spec_text_base)
    _POOL_STATE["axis"] = axis
    _POOL_STATE["coupling"] = None


def _pool_point(value: float) -> Dict:
    spec = SweepSpec(base=_POOL_STATE["base"], axis=_POOL_STATE["axis"],
                     values=(value,))
    if _POOL_STATE["axis"] in ("wavelength_nm", "photon_energy_au",
                               "intensity_wcm2", "field_au"):
        if _POOL_STATE["coupling"] is None:
            _POOL_STATE["coupling"] = build_run_coupling(_POOL_STATE["base"])
        return sweep_point_row(spec, value, coupling=_POOL_STATE["coupling"])
    return sweep_point_row(spec, value)


def run_sweep(spec: SweepSpec, csv_path: Union[str, Path],
              resume: bool = True, jobs: Optional[int] = None) -> List[Dict]:
    """Execute all sweep points, skipping rows already on disk.

    The CSV is rewritten atomically after every completed point, always in
    axis order, so an interrupted sweep resumes to an identical final file.
    Failed points are recorded with status=error and retried on resume.
    """
    csv_path = Path(csv_path)
    jobs = spec.jobs if jobs is None else jobs

    wanted = {config_hash(spec.point(v)): float(v) for v in spec.values}
    done: Dict[str, Dict] = {}
    if resume and csv_path.exists():
        for row in read_sweep_csv(csv_path):
            h = row.get("config_hash", "")
            if h in wanted and row.get("status") == "ok":
                done[h] = row
        logger.info("resuming sweep: %d/%d points already done",
                    len(done), len(spec.values))

    def current_rows() -> List[Dict]:
        out = []
        for v in spec.values:
            h = config_hash(spec.point(v))
            if h in done:
                out.append(done[h])
        return out

    pending = [v for v in spec.values
               if config_hash(spec.point(v)) not in done]
    write_sweep_csv(csv_path, current_rows())

    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_pool_init,
                                 initargs=(render_config(spec.base), spec.axis)
                                 ) as pool:
            for row in pool.map(_pool_point, pending):
                done[row["config_hash"]] = row
                write_sweep_csv(csv_path, current_rows())
    else:
        shared = None
        if spec.axis in ("wavelength_nm", "photon_energy_au",
                         "intensity_wcm2", "field_au") and pending:
            shared = build_run_coupling(spec.base)
        restrict_from = None
        if spec.axis == "j_max" and pending:
            top = spec.point(max(spec.values))
            restrict_from = build_run_coupling(top)
        for v in pending:
            if restrict_from is not None:
                coupling = restrict_from.restrict(float(v))
            else:
                coupling = shared
            row = sweep_point_row(spec, v, coupling=coupling)
            done[row["config_hash"]] = row
            write_sweep_csv(csv_path, current_rows())

    return current_rows()
