"""Flat key-value run configuration.

The on-disk format is one ``key = value`` pair per line, ``#`` comments,
blank lines ignored.  No sections, no nesting, so any language can parse it.
Floats are rendered with 17 significant digits, which round-trips IEEE
doubles exactly.

Frequency and field strength each accept two alternative keys
(photon_energy_au | wavelength_nm, field_au | intensity_wcm2); exactly one
of each pair must be present.  Serialization always emits the atomic-unit
form, so parse -> render -> parse is the identity on RunConfig values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from .pulse import PulseParams, intensity_to_field, wavelength_to_omega


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    theory: str
    z: float
    omega: float                     # photon energy, a.u.
    f0: float                        # peak field, a.u.
    gauge: str = "length"
    cycles: int = 20
    include_ne: Optional[bool] = None    # dirac only; default True
    j_max: Optional[float] = None        # dirac only; default 5.5
    l_max: Optional[int] = None          # schrodinger only; default 5
    basis_n: int = 200
    basis_k: int = 7
    r_max: Optional[float] = None        # default 250/z
    # Geometric knot head sized for time propagation: finer heads sharpen
    # the deep negative-energy eigenvalues but inflate the spectral radius
    # (smallest interval sets the momentum cutoff), multiplying the step
    # count of the interaction-picture integrator.
    basis_n_geom: int = 40
    basis_g: float = 1.05
    rtol: float = 1e-8
    atol: float = 1e-12
    max_step: float = 0.0
    checkpoints_per_cycle: int = 1
    output: Optional[str] = None

    def __post_init__(self):
        if self.theory not in ("dirac", "schrodinger"):
            raise ConfigError(f"theory must be dirac or schrodinger, got {self.theory!r}")
        if self.gauge not in ("length", "velocity"):
            raise ConfigError(f"gauge must be length or velocity, got {self.gauge!r}")
        if not self.z > 0:
            raise ConfigError("z must be positive")
        if self.theory == "dirac" and self.z >= 137.035999:
            raise ConfigError("z must be below c for the dirac theory")
        if not self.omega > 0:
            raise ConfigError("photon_energy_au must be positive")
        if self.f0 < 0:
            raise ConfigError("field_au must be nonnegative")
        if self.cycles < 1:
            raise ConfigError("cycles must be at least 1")

        if self.theory == "schrodinger":
            if self.include_ne is not None:
                raise ConfigError("include_ne applies only to theory = dirac")
            if self.j_max is not None:
                raise ConfigError("j_max applies only to theory = dirac")
            lm = 5 if self.l_max is None else self.l_max
            if lm < 1:
                raise ConfigError("l_max must be at least 1")
            object.__setattr__(self, "l_max", int(lm))
        else:
            if self.l_max is not None:
                raise ConfigError("l_max applies only to theory = schrodinger")
            if self.include_ne is None:
                object.__setattr__(self, "include_ne", True)
            jm = 5.5 if self.j_max is None else self.j_max
            if round(2 * jm) != 2 * jm or int(round(2 * jm)) % 2 != 1 or jm < 0.5:
                raise ConfigError("j_max must be a positive half-integer (0.5, 1.5, ...)")
            object.__setattr__(self, "j_max", float(jm))

        if self.r_max is None:
            object.__setattr__(self, "r_max", 250.0 / self.z)
        if not self.r_max > 0:
            raise ConfigError("r_max must be positive")
        if self.basis_k < 2:
            raise ConfigError("basis_k must be at least 2")
        if self.basis_n <= self.basis_k:
            raise ConfigError("basis_n must exceed basis_k")
        if self.basis_n_geom < 0 or self.basis_n_geom >= self.basis_n - self.basis_k + 3:
            raise ConfigError("basis_n_geom must be below the interval count")
        if not self.basis_g > 1.0:
            raise ConfigError("basis_g must exceed 1")
        if not 1e-12 <= self.rtol <= 1e-4:
            raise ConfigError("rtol must lie in [1e-12, 1e-4]")
        if not self.atol > 0:
            raise ConfigError("atol must be positive")
        if self.max_step < 0:
            raise ConfigError("max_step must be nonnegative")
        if self.checkpoints_per_cycle < 1:
            raise ConfigError("checkpoints_per_cycle must be at least 1")

    @property
    def max_angular(self) -> float:
        return self.j_max if self.theory == "dirac" else float(self.l_max)

    def pulse(self) -> PulseParams:
        return PulseParams(omega=self.omega, cycles=self.cycles, f0=self.f0)


_BOOL = {"true": True, "false": False, "on": True, "off": False,
         "yes": True, "no": False, "1": True, "0": False}

# key -> (python type, target RunConfig field)
_SCHEMA: Dict[str, tuple] = {
    "theory": (str, "theory"),
    "gauge": (str, "gauge"),
    "z": (float, "z"),
    "photon_energy_au": (float, "omega"),
    "wavelength_nm": (float, "omega"),
    "field_au": (float, "f0"),
    "intensity_wcm2": (float, "f0"),
    "cycles": (int, "cycles"),
    "include_ne": (bool, "include_ne"),
    "j_max": (float, "j_max"),
    "l_max": (int, "l_max"),
    "basis_n": (int, "basis_n"),
    "basis_k": (int, "basis_k"),
    "r_max": (float, "r_max"),
    "basis_n_geom": (int, "basis_n_geom"),
    "basis_g": (float, "basis_g"),
    "rtol": (float, "rtol"),
    "atol": (float, "atol"),
    "max_step": (float, "max_step"),
    "checkpoints_per_cycle": (int, "checkpoints_per_cycle"),
    "output": (str, "output"),
}

_SWEEP_AXES = ("wavelength_nm", "photon_energy_au", "intensity_wcm2",
               "field_au", "j_max", "z")
_SWEEP_KEYS = ("sweep_axis", "sweep_values", "sweep_jobs")


def _parse_value(key: str, raw: str):
    typ, _ = _SCHEMA[key]
    try:
        if typ is bool:
            return _BOOL[raw.lower()]
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except (ValueError, KeyError):
        raise ConfigError(f"cannot parse value {raw!r} for key '{key}'") from None


def parse_pairs(text: str) -> Dict[str, str]:
    """Raw key -> raw value, with duplicate and syntax diagnostics."""
    pairs: Dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {ln}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in body.split("=", 1))
        if key in pairs:
            raise ConfigError(f"duplicate key '{key}'")
        pairs[key] = val
    return pairs


def parse_config(text: str) -> RunConfig:
    pairs = parse_pairs(text)
    return config_from_pairs({k: v for k, v in pairs.items()
                              if k not in _SWEEP_KEYS})


def config_from_pairs(pairs: Dict[str, str]) -> RunConfig:
    kwargs = {}
    for key, raw in pairs.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key '{key}'")
        val = _parse_value(key, raw)
        if key == "wavelength_nm":
            if val <= 0:
                raise ConfigError("wavelength_nm must be positive")
            val = wavelength_to_omega(val)
        elif key == "intensity_wcm2":
            if val < 0:
                raise ConfigError("intensity_wcm2 must be nonnegative")
            val = intensity_to_field(val)
        field = _SCHEMA[key][1]
        if field in kwargs:
            other = {"omega": "photon_energy_au/wavelength_nm",
                     "f0": "field_au/intensity_wcm2"}.get(field, key)
            raise ConfigError(f"exactly one of {other} may be given")
        kwargs[field] = val
    for req, names in (("omega", "photon_energy_au or wavelength_nm"),
                       ("f0", "field_au or intensity_wcm2")):
        if req not in kwargs:
            raise ConfigError(f"missing required key: {names}")
    for req in ("theory", "z"):
        if req not in kwargs:
            raise ConfigError(f"missing required key: {req}")
    return RunConfig(**kwargs)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def render_config(cfg: RunConfig) -> str:
    lines = [
        f"theory = {cfg.theory}",
        f"gauge = {cfg.gauge}",
        f"z = {_fmt(cfg.z)}",
        f"photon_energy_au = {_fmt(cfg.omega)}",
        f"field_au = {_fmt(cfg.f0)}",
        f"cycles = {cfg.cycles}",
    ]
    if cfg.theory == "dirac":
        lines += [f"include_ne = {_fmt(cfg.include_ne)}",
                  f"j_max = {_fmt(cfg.j_max)}"]
    else:
        lines += [f"l_max = {cfg.l_max}"]
    lines += [
        f"basis_n = {cfg.basis_n}",
        f"basis_k = {cfg.basis_k}",
        f"r_max = {_fmt(cfg.r_max)}",
        f"basis_n_geom = {cfg.basis_n_geom}",
        f"basis_g = {_fmt(cfg.basis_g)}",
        f"rtol = {_fmt(cfg.rtol)}",
        f"atol = {_fmt(cfg.atol)}",
        f"max_step = {_fmt(cfg.max_step)}",
        f"checkpoints_per_cycle = {cfg.checkpoints_per_cycle}",
    ]
    if cfg.output is not None:
        lines.append(f"output = {cfg.output}")
    return "\n".join(lines) + "\n"


def load_config(path: Union[str, Path]) -> RunConfig:
    return parse_config(Path(path).read_text())


def save_config(cfg: RunConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(render_config(cfg))


# ============================================================
# Sweeps
# ============================================================

@dataclass(frozen=True)
class SweepSpec:
    """A single-axis scan around a base configuration."""

    base: RunConfig
    axis: str
    values: tuple
    jobs: int = 1

    def __post_init__(self):
        if self.axis not in _SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {', '.join(_SWEEP_AXES)}")
        if not self.values:
            raise ConfigError("sweep_values must be nonempty")
        if list(self.values) != sorted(self.values):
            raise ConfigError("sweep_values must be sorted ascending")
        if len(set(self.values)) != len(self.values):
            raise ConfigError("sweep_values must be distinct")
        if self.jobs < 1:
            raise ConfigError("sweep_jobs must be at least 1")
        for v in self.values:
            self.point(v)  # every derived config must validate

    def point(self, value: float) -> RunConfig:
        """Base config with the axis value applied."""
        if self.axis == "wavelength_nm":
            return replace(self.base, omega=wavelength_to_omega(value))
        if self.axis == "photon_energy_au":
            return replace(self.base, omega=value)
        if self.axis == "intensity_wcm2":
            return replace(self.base, f0=intensity_to_field(value))
        if self.axis == "field_au":
            return replace(self.base, f0=value)
        if self.axis == "j_max":
            if self.base.theory != "dirac":
                raise ConfigError("j_max sweep requires theory = dirac")
            return replace(self.base, j_max=value)
        # z sweep keeps the base box literally; scaled studies go through
        # the scale subcommand instead
        return replace(self.base, z=value)


def parse_sweep(text: str) -> SweepSpec:
    pairs = parse_pairs(text)
    if "sweep_axis" not in pairs:
        raise ConfigError("missing required key: sweep_axis")
    axis = pairs.pop("sweep_axis")
    if axis not in _SWEEP_AXES:
        # check before building the base config, otherwise a bad axis
        # surfaces as a misleading missing-key error
        raise ConfigError(f"sweep_axis must be one of {', '.join(_SWEEP_AXES)}")
    raw_values = pairs.pop("sweep_values", "")
    try:
        values = tuple(float(v) for v in raw_values.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse sweep_values {raw_values!r}") from None
    if not values:
        raise ConfigError("sweep_values must be nonempty")
    try:
        jobs = int(pairs.pop("sweep_jobs", "1"))
    except ValueError:
        raise ConfigError("cannot parse sweep_jobs") from None
    # the swept quantity may be omitted from the base; seed it with the
    # first grid value so the base is a complete RunConfig
    if values:
        seed = _fmt(float(values[0]))
        if axis in ("wavelength_nm", "photon_energy_au") and not (
                "wavelength_nm" in pairs or "photon_energy_au" in pairs):
            pairs[axis] = seed
        elif axis in ("intensity_wcm2", "field_au") and not (
                "intensity_wcm2" in pairs or "field_au" in pairs):
            pairs[axis] = seed
        elif axis in ("j_max", "z") and axis not in pairs:
            pairs[axis] = seed
    base = config_from_pairs(pairs)
    return SweepSpec(base=base, axis=axis, values=values, jobs=jobs)


def render_sweep(spec: SweepSpec) -> str:
    head = (f"sweep_axis = {spec.axis}\n"
            f"sweep_values = {','.join(_fmt(float(v)) for v in spec.values)}\n"
            f"sweep_jobs = {spec.jobs}\n")
    return head + render_config(spec.base)
