"""Parameter sweeps and calibration of the switching ratio.

Sweeps are keyed by parameter value and run independently, so results are
order-independent; calibration is an exhaustive grid search with
deterministic tie-breaking.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .device import DeviceSpec, LrsShape
from .transport import TransportSettings, nvrs_ratio


@dataclass
class SweepResult:
    parameter: str
    values: list
    ratios: list[float]
    bias: float
    temperature: float
    fit: dict = field(default_factory=dict)


@dataclass
class CalibResult:
    best_depth: float          # eV
    best_location: float       # nm
    achieved_ratio: float
    target_ratio: float
    tolerance: float
    status: str                # "success" | "nearest_only"
    table: list[tuple[float, float, float]] = field(default_factory=list)
    # rows of (depth, location, ratio)


def _with_defect_field(spec: DeviceSpec, **changes) -> DeviceSpec:
    if not spec.defects:
        raise ValueError("device has no defects to sweep")
    defects = tuple(dataclasses.replace(d, **changes) for d in spec.defects)
    return dataclasses.replace(spec, defects=defects)


def _linear_fit(x, y) -> dict:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(x)) < 2:
        return {}
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def sweep_well_depth(spec: DeviceSpec, depths, bias: float, temperature: float,
                     settings: TransportSettings | None = None) -> SweepResult:
    """Switching ratio vs HRS well depth; the LRS profile is unaffected."""
    depths = list(depths)
    if any(d < 0 for d in depths):
        raise ValueError("well depths must be >= 0")
    ratios = [nvrs_ratio(_with_defect_field(spec, depth=d), bias, temperature,
                         settings).ratio for d in depths]
    return SweepResult(parameter="well_depth", values=depths, ratios=ratios,
                       bias=bias, temperature=temperature,
                       fit=_linear_fit(depths, ratios))


def sweep_well_location(spec: DeviceSpec, locations, bias: float,
                        temperature: float,
                        settings: TransportSettings | None = None) -> SweepResult:
    """Switching ratio vs defect location (HRS and LRS wells move together)."""
    locations = list(locations)
    for loc in locations:
        if not 0 <= loc <= spec.insulator_length:
            raise ValueError(f"location {loc} nm outside the insulator")
    ratios = [nvrs_ratio(_with_defect_field(spec, location=loc), bias,
                         temperature, settings).ratio for loc in locations]
    # location dependence is roughly exponential; fit in log space
    fit = _linear_fit(locations, np.log(np.maximum(ratios, 1e-300)))
    if fit:
        fit = {"log_slope": fit["slope"], "log_intercept": fit["intercept"],
               "r2": fit["r2"]}
    return SweepResult(parameter="well_location", values=locations,
                       ratios=ratios, bias=bias, temperature=temperature,
                       fit=fit)


def lrs_distortion_study(spec: DeviceSpec, shapes, bias: float,
                         temperature: float,
                         settings: TransportSettings | None = None) -> SweepResult:
    """Switching ratio for each LRS distortion shape of the same defect."""
    shapes = [LrsShape(s) for s in shapes]
    ratios = [nvrs_ratio(_with_defect_field(spec, lrs_shape=s), bias,
                         temperature, settings).ratio for s in shapes]
    return SweepResult(parameter="lrs_shape", values=[s.value for s in shapes],
                       ratios=ratios, bias=bias, temperature=temperature)


def calibrate_to_ratio(spec: DeviceSpec, target: float, tolerance: float,
                       depths, locations, bias: float, temperature: float,
                       settings: TransportSettings | None = None) -> CalibResult:
    """Exhaustive (depth x location) grid search minimizing |ratio - target|.

    Ties break toward smaller depth, then smaller location.
    """
    if target <= 0:
        raise ValueError("target ratio must be positive")
    depths = sorted(depths)
    locations = sorted(locations)
    if not depths or not locations:
        raise ValueError("search space must be non-empty")
    table = []
    best = None
    for depth in depths:
        for loc in locations:
            trial = _with_defect_field(spec, depth=depth, location=loc)
            ratio = nvrs_ratio(trial, bias, temperature, settings).ratio
            table.append((depth, loc, ratio))
            key = (abs(ratio - target), depth, loc)
            if best is None or key < best[0]:
                best = (key, depth, loc, ratio)
    _, b_depth, b_loc, b_ratio = best
    status = "success" if abs(b_ratio - target) <= tolerance else "nearest_only"
    return CalibResult(best_depth=b_depth, best_location=b_loc,
                       achieved_ratio=b_ratio, target_ratio=target,
                       tolerance=tolerance, status=status, table=table)
