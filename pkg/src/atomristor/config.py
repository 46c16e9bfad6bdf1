"""Run configuration: flat key = value files with section headers.

Unknown keys and sections are hard errors (no silent typos), diagnostics
carry the line number, and an empty file reproduces the default
multi-defect reference device. ``serialize`` round-trips through
``parse_config_text``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources

from .device import (DEFAULT_COULOMB_CONSTANT, DEFAULT_FERMI_LEVEL, DefectSpec,
                     DefectState, DeviceSpec, LrsShape, MaterialParams)
from .hamiltonian import (CALIBRATED_T_INSULATOR, CALIBRATED_T_JUNCTION,
                          CALIBRATED_T_METAL)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None,
                 path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        super().__init__(where + message)
        self.line = line
        self.path = path


@dataclass
class RunConfig:
    device: DeviceSpec
    biases: list[float] = field(default_factory=list)
    temperatures: list[float] = field(default_factory=lambda: [150.0, 300.0])
    set_voltage: float = 1.0
    use_scf: bool = False
    output_dir: str = "out"
    energy_step: float = 1e-3
    refinement: int = 4
    eta: float = 1e-12
    transverse_mass_ratio: float | None = None
    scf_damping: float = 0.1
    scf_tol: float = 1e-4
    scf_max_iter: int = 200
    scf_mode: str = "damped_fixed_point"
    scf_cross_section: float = 1.0
    calib_target: float = 3.0
    calib_tolerance: float = 0.3
    calib_bias: float = 0.4
    calib_depths: list[float] = field(
        default_factory=lambda: [0.0, 0.05, 0.10, 0.15])
    calib_locations: list[float] = field(
        default_factory=lambda: [round(0.02 * k, 2) for k in range(26)])


def _default_defects() -> tuple[DefectSpec, ...]:
    # two vacancy planes in the 1.5 nm reference stack
    return (DefectSpec(location=0.45, depth=0.10, width=0.10,
                       lrs_shape=LrsShape.COULOMB),
            DefectSpec(location=1.05, depth=0.10, width=0.10,
                       lrs_shape=LrsShape.COULOMB))


def default_config() -> RunConfig:
    device = DeviceSpec(
        metal=MaterialParams(effective_mass_ratio=1.1),
        insulator=MaterialParams(effective_mass_ratio=1.0, onset_potential=1.0),
        metal_length=1.5,
        insulator_length=1.5,
        grid_spacing=0.05,
        temperature=300.0,
        fermi_level=DEFAULT_FERMI_LEVEL,
        defects=_default_defects(),
        permittivity_rel=4.0,
        coulomb_constant=DEFAULT_COULOMB_CONSTANT,
        hopping_override=(CALIBRATED_T_METAL, CALIBRATED_T_JUNCTION,
                          CALIBRATED_T_INSULATOR),
    )
    biases = [round(0.05 * k, 2) for k in range(13)]
    return RunConfig(device=device, biases=biases, set_voltage=0.6)


# section -> key -> parser; defect sections are handled dynamically
def _parse_bool(s: str) -> bool:
    if s.lower() in ("true", "yes", "on", "1"):
        return True
    if s.lower() in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_list(s: str) -> list[float]:
    """Comma list ('0.1, 0.2') or range syntax 'start:stop:step' (inclusive)."""
    s = s.strip()
    if ":" in s:
        parts = [float(p) for p in s.split(":")]
        if len(parts) != 3:
            raise ValueError("range syntax is start:stop:step")
        start, stop, step = parts
        if step <= 0:
            raise ValueError("range step must be positive")
        out = []
        v = start
        while v <= stop + 1e-9 * step:
            out.append(round(v, 12))
            v += step
        return out
    return [float(p) for p in s.split(",") if p.strip()]


_SCHEMA: dict[str, dict[str, object]] = {
    "metal": {"effective_mass_ratio": float, "length_nm": float},
    "insulator": {"effective_mass_ratio": float, "onset_potential_eV": float,
                  "length_nm": float, "permittivity_rel": float,
                  "coulomb_constant_eVnm": float},
    "grid": {"spacing_nm": float},
    "contacts": {"fermi_level_eV": float, "temperature_K": float},
    "hopping": {"source": str, "t_metal_eV": float, "t_junction_eV": float,
                "t_insulator_eV": float},
    "run": {"biases": _parse_list, "temperatures": _parse_list,
            "set_voltage_V": float, "scf": _parse_bool, "output_dir": str,
            "energy_step_eV": float, "fermi_window_refinement": int,
            "eta_eV": float, "transverse_mass_ratio": float},
    "scf": {"damping": float, "tolerance_eV": float, "max_iterations": int,
            "mode": str, "cross_section_nm2": float},
    "calibrate": {"target_ratio": float, "tolerance": float, "bias_V": float,
                  "depths_eV": _parse_list, "locations_nm": _parse_list},
}
_DEFECT_KEYS = {"location_nm": float, "depth_eV": float, "width_nm": float,
                "state": str, "lrs_shape": str}


def _read_items(text: str, path: str | None):
    """Yield (section, key, raw_value, line_number)."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            base = section.split(".", 1)[0]
            if base not in _SCHEMA and base != "defect":
                raise ConfigError(f"unknown section [{section}]", lineno, path)
            if base == "defect" and "." not in section:
                raise ConfigError("defect sections must be named [defect.N]",
                                  lineno, path)
            yield section, None, None, lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}",
                              lineno, path)
        if section is None:
            raise ConfigError("key outside any [section]", lineno, path)
        key, value = (p.strip() for p in line.split("=", 1))
        yield section, key, value, lineno


def parse_config_text(text: str, path: str | None = None) -> RunConfig:
    cfg = default_config()
    dev: dict = {
        "metal_mass": cfg.device.metal.effective_mass_ratio,
        "metal_length": cfg.device.metal_length,
        "ins_mass": cfg.device.insulator.effective_mass_ratio,
        "onset": cfg.device.insulator.onset_potential,
        "ins_length": cfg.device.insulator_length,
        "permittivity": cfg.device.permittivity_rel,
        "coulomb": cfg.device.coulomb_constant,
        "spacing": cfg.device.grid_spacing,
        "fermi": cfg.device.fermi_level,
        "temperature": cfg.device.temperature,
        "hop_source": "calibrated",
        "t_m": CALIBRATED_T_METAL, "t_p": CALIBRATED_T_JUNCTION,
        "t_i": CALIBRATED_T_INSULATOR,
    }
    defects: dict[str, dict] = {}
    defects_declared = False

    for section, key, value, lineno in _read_items(text, path):
        base = section.split(".", 1)[0]
        if key is None:
            if base == "defect":
                defects_declared = True
                defects.setdefault(section, {})
            continue
        if base == "defect":
            if key not in _DEFECT_KEYS:
                raise ConfigError(f"unknown key {key!r} in [{section}]",
                                  lineno, path)
            try:
                defects.setdefault(section, {})[key] = _DEFECT_KEYS[key](value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}", lineno, path)
            continue
        schema = _SCHEMA[section]
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, path)
        try:
            parsed = schema[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, path)
        _apply(cfg, dev, section, key, parsed, lineno, path)

    if defects_declared:
        specs = []
        for name in sorted(defects):
            d = defects[name]
            try:
                specs.append(DefectSpec(
                    location=d.get("location_nm", 0.0),
                    depth=d.get("depth_eV", 0.0),
                    width=d.get("width_nm", 0.10),
                    state=DefectState(d.get("state", "vacancy")),
                    lrs_shape=LrsShape(d.get("lrs_shape", "deepened"))))
            except ValueError as exc:
                raise ConfigError(f"bad defect [{name}]: {exc}", path=path)
        defect_specs = tuple(specs)
    else:
        defect_specs = cfg.device.defects

    for name, bound in (("metal.length_nm", dev["metal_length"]),
                        ("insulator.length_nm", dev["ins_length"]),
                        ("grid.spacing_nm", dev["spacing"])):
        if bound <= 0:
            raise ConfigError(f"{name} must be positive, got {bound}", path=path)
    if dev["temperature"] <= 0:
        raise ConfigError("contacts.temperature_K must be positive", path=path)

    override = None
    if dev["hop_source"] == "calibrated":
        override = (dev["t_m"], dev["t_p"], dev["t_i"])
    elif dev["hop_source"] != "computed":
        raise ConfigError("hopping.source must be 'calibrated' or 'computed'",
                          path=path)
    try:
        cfg.device = DeviceSpec(
            metal=MaterialParams(effective_mass_ratio=dev["metal_mass"]),
            insulator=MaterialParams(effective_mass_ratio=dev["ins_mass"],
                                     onset_potential=dev["onset"]),
            metal_length=dev["metal_length"],
            insulator_length=dev["ins_length"],
            grid_spacing=dev["spacing"],
            temperature=dev["temperature"],
            fermi_level=dev["fermi"],
            defects=defect_specs,
            permittivity_rel=dev["permittivity"],
            coulomb_constant=dev["coulomb"],
            hopping_override=override,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), path=path)
    return cfg


def _apply(cfg: RunConfig, dev: dict, section: str, key: str, value, lineno,
           path) -> None:
    def err(msg):
        raise ConfigError(msg, lineno, path)

    match (section, key):
        case ("metal", "effective_mass_ratio"):
            dev["metal_mass"] = value
        case ("metal", "length_nm"):
            if value <= 0:
                err(f"metal.length_nm must be positive, got {value}")
            dev["metal_length"] = value
        case ("insulator", "effective_mass_ratio"):
            dev["ins_mass"] = value
        case ("insulator", "onset_potential_eV"):
            dev["onset"] = value
        case ("insulator", "length_nm"):
            if value <= 0:
                err(f"insulator.length_nm must be positive, got {value}")
            dev["ins_length"] = value
        case ("insulator", "permittivity_rel"):
            dev["permittivity"] = value
        case ("insulator", "coulomb_constant_eVnm"):
            if value <= 0:
                err("insulator.coulomb_constant_eVnm must be positive")
            dev["coulomb"] = value
        case ("grid", "spacing_nm"):
            if value <= 0:
                err(f"grid.spacing_nm must be positive, got {value}")
            dev["spacing"] = value
        case ("contacts", "fermi_level_eV"):
            dev["fermi"] = value
        case ("contacts", "temperature_K"):
            dev["temperature"] = value
        case ("hopping", "source"):
            dev["hop_source"] = value
        case ("hopping", "t_metal_eV"):
            dev["t_m"] = value
        case ("hopping", "t_junction_eV"):
            dev["t_p"] = value
        case ("hopping", "t_insulator_eV"):
            dev["t_i"] = value
        case ("run", "biases"):
            cfg.biases = value
        case ("run", "temperatures"):
            cfg.temperatures = value
        case ("run", "set_voltage_V"):
            cfg.set_voltage = value
        case ("run", "scf"):
            cfg.use_scf = value
        case ("run", "output_dir"):
            cfg.output_dir = value
        case ("run", "energy_step_eV"):
            if value <= 0:
                err("run.energy_step_eV must be positive")
            cfg.energy_step = value
        case ("run", "fermi_window_refinement"):
            cfg.refinement = value
        case ("run", "eta_eV"):
            cfg.eta = value
        case ("run", "transverse_mass_ratio"):
            cfg.transverse_mass_ratio = value
        case ("scf", "damping"):
            cfg.scf_damping = value
        case ("scf", "tolerance_eV"):
            cfg.scf_tol = value
        case ("scf", "max_iterations"):
            cfg.scf_max_iter = value
        case ("scf", "mode"):
            cfg.scf_mode = value
        case ("scf", "cross_section_nm2"):
            cfg.scf_cross_section = value
        case ("calibrate", "target_ratio"):
            cfg.calib_target = value
        case ("calibrate", "tolerance"):
            cfg.calib_tolerance = value
        case ("calibrate", "bias_V"):
            cfg.calib_bias = value
        case ("calibrate", "depths_eV"):
            cfg.calib_depths = value
        case ("calibrate", "locations_nm"):
            cfg.calib_locations = value
        case _:
            err(f"unhandled key {section}.{key}")


def parse_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path))
    return parse_config_text(text, path=str(path))


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def serialize(cfg: RunConfig) -> str:
    """Write a config back out; parse(serialize(cfg)) == cfg."""
    dev = cfg.device
    lines = []
    lines += ["[metal]",
              f"effective_mass_ratio = {_fmt(dev.metal.effective_mass_ratio)}",
              f"length_nm = {_fmt(dev.metal_length)}", ""]
    lines += ["[insulator]",
              f"effective_mass_ratio = {_fmt(dev.insulator.effective_mass_ratio)}",
              f"onset_potential_eV = {_fmt(dev.insulator.onset_potential)}",
              f"length_nm = {_fmt(dev.insulator_length)}",
              f"permittivity_rel = {_fmt(dev.permittivity_rel)}"]
    if dev.coulomb_constant is not None:
        lines += [f"coulomb_constant_eVnm = {_fmt(dev.coulomb_constant)}"]
    lines += [""]
    lines += ["[grid]", f"spacing_nm = {_fmt(dev.grid_spacing)}", ""]
    lines += ["[contacts]",
              f"fermi_level_eV = {_fmt(dev.fermi_level)}",
              f"temperature_K = {_fmt(dev.temperature)}", ""]
    lines += ["[hopping]"]
    if dev.hopping_override is None:
        lines += ["source = computed"]
    else:
        tm, tp, ti = dev.hopping_override
        lines += ["source = calibrated",
                  f"t_metal_eV = {_fmt(tm)}",
                  f"t_junction_eV = {_fmt(tp)}",
                  f"t_insulator_eV = {_fmt(ti)}"]
    lines += [""]
    for i, d in enumerate(dev.defects, start=1):
        lines += [f"[defect.{i}]",
                  f"location_nm = {_fmt(d.location)}",
                  f"depth_eV = {_fmt(d.depth)}",
                  f"width_nm = {_fmt(d.width)}",
                  f"state = {d.state.value}",
                  f"lrs_shape = {d.lrs_shape.value}", ""]
    lines += ["[run]",
              "biases = " + ", ".join(_fmt(b) for b in cfg.biases),
              "temperatures = " + ", ".join(_fmt(t) for t in cfg.temperatures),
              f"set_voltage_V = {_fmt(cfg.set_voltage)}",
              f"scf = {'true' if cfg.use_scf else 'false'}",
              f"output_dir = {cfg.output_dir}",
              f"energy_step_eV = {_fmt(cfg.energy_step)}",
              f"fermi_window_refinement = {cfg.refinement}",
              f"eta_eV = {_fmt(cfg.eta)}", ""]
    if cfg.transverse_mass_ratio is not None:
        lines.insert(lines.index("[run]") + 1,
                     f"transverse_mass_ratio = {_fmt(cfg.transverse_mass_ratio)}")
    lines += ["[scf]",
              f"damping = {_fmt(cfg.scf_damping)}",
              f"tolerance_eV = {_fmt(cfg.scf_tol)}",
              f"max_iterations = {cfg.scf_max_iter}",
              f"mode = {cfg.scf_mode}",
              f"cross_section_nm2 = {_fmt(cfg.scf_cross_section)}", ""]
    lines += ["[calibrate]",
              f"target_ratio = {_fmt(cfg.calib_target)}",
              f"tolerance = {_fmt(cfg.calib_tolerance)}",
              f"bias_V = {_fmt(cfg.calib_bias)}",
              "depths_eV = " + ", ".join(_fmt(d) for d in cfg.calib_depths),
              "locations_nm = " + ", ".join(_fmt(v) for v in cfg.calib_locations),
              ""]
    return "\n".join(lines)


def example_config_path(name: str):
    """Filesystem path of a shipped example config ('multi_defect' etc.)."""
    return resources.files("atomristor").joinpath("configs", f"{name}.cfg")
