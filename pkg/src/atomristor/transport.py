"""Fermi statistics, energy grids, current integrals, I-V sweeps, ratios.

Two current measures are provided: the strictly 1D Landauer current (A),
used for analytic cross-checks, and the per-area tunneling current density
(A/cm^2) with a logarithmic transverse supply function, which is what the
reported switching ratios are built from.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import (BOLTZMANN_EV, BOLTZMANN_J, ELECTRON_MASS,
                        ELEMENTARY_CHARGE, HBAR, PLANCK)
from .device import DeviceSpec, build_grid, profile_for_state
from .hamiltonian import assemble, resolve_hoppings
from .negf import DEFAULT_ETA, spectrum

DEFAULT_BASE_STEP = 1e-3   # eV
DEFAULT_REFINEMENT = 4     # extra grid density inside the Fermi window
FLOOR_MARGIN = 0.2         # eV below the global potential minimum
CEIL_KT = 15.0             # kT above the highest chemical potential
WINDOW_KT = 10.0           # half-width of the refined Fermi window, in kT
HRS = "HRS"
LRS = "LRS"


def fermi(energy, mu: float, temperature: float):
    """Fermi-Dirac occupation, overflow-safe for arbitrarily large |E - mu|."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    x = (np.asarray(energy, dtype=float) - mu) / (BOLTZMANN_EV * temperature)
    # evaluate via exp(-|x|) so the exponential never overflows
    t = np.exp(-np.abs(x))
    out = np.where(x >= 0, t / (1.0 + t), 1.0 / (1.0 + t))
    if np.ndim(energy) == 0:
        return float(out[()])
    return out


def energy_grid(profile_values, mu1: float, mu2: float, temperature: float,
                base_step: float = DEFAULT_BASE_STEP,
                refinement: int = DEFAULT_REFINEMENT) -> np.ndarray:
    """Sorted integration energies covering the occupied window.

    A uniform grid at base_step spans from the global potential minimum
    minus 0.2 eV up to max(mu) + 15 kT, with refinement-times finer
    sampling inside the mu +- 10 kT window. Deterministic for fixed inputs.
    """
    if base_step <= 0:
        raise ValueError("base_step must be positive")
    values = np.asarray(profile_values, dtype=float)
    kt = BOLTZMANN_EV * temperature
    floor = min(values.min(), 0.0) - FLOOR_MARGIN
    ceil = max(mu1, mu2) + CEIL_KT * kt
    coarse = np.arange(floor, ceil, base_step)
    w_lo = max(floor, min(mu1, mu2) - WINDOW_KT * kt)
    w_hi = min(ceil, max(mu1, mu2) + WINDOW_KT * kt)
    fine = np.arange(w_lo, w_hi, base_step / refinement)
    return np.unique(np.concatenate([coarse, fine, [ceil]]))


def current_1d(energies, trans, mu1: float, mu2: float,
               temperature: float) -> float:
    """Landauer current 2q/h * integral T(E) [f1 - f2] dE, in A."""
    energies = np.asarray(energies, dtype=float)
    occ = fermi(energies, mu1, temperature) - fermi(energies, mu2, temperature)
    integral = np.trapezoid(np.asarray(trans) * occ, energies)   # dimension: eV
    return 2.0 * ELEMENTARY_CHARGE**2 / PLANCK * integral


def current_density(energies, trans, mu1: float, mu2: float, temperature: float,
                    transverse_mass_ratio: float = 1.0) -> float:
    """Per-area tunneling current with the transverse supply function, A/cm^2.

    J = q m* kT / (2 pi^2 hbar^3) * integral T(E) ln[(1 + e^{(mu1-E)/kT})
    / (1 + e^{(mu2-E)/kT})] dE over the longitudinal energy.
    """
    energies = np.asarray(energies, dtype=float)
    kt = BOLTZMANN_EV * temperature
    supply = (np.logaddexp(0.0, (mu1 - energies) / kt)
              - np.logaddexp(0.0, (mu2 - energies) / kt))
    integral = np.trapezoid(np.asarray(trans) * supply, energies)  # eV
    mass = transverse_mass_ratio * ELECTRON_MASS
    prefactor = (ELEMENTARY_CHARGE * mass * BOLTZMANN_J * temperature
                 / (2.0 * np.pi**2 * HBAR**3))                 # A / (m^2 J)
    return prefactor * integral * ELEMENTARY_CHARGE / 1e4      # A / cm^2


@dataclass
class IVPoint:
    bias: float             # V
    current_1d: float       # A
    current_density: float  # A/cm^2
    state: str
    temperature: float      # K


@dataclass
class IVTable:
    rows: list[IVPoint] = field(default_factory=list)

    def biases(self) -> np.ndarray:
        return np.array([r.bias for r in self.rows])

    def currents_1d(self) -> np.ndarray:
        return np.array([r.current_1d for r in self.rows])

    def current_densities(self) -> np.ndarray:
        return np.array([r.current_density for r in self.rows])


@dataclass
class RatioPoint:
    bias: float
    ratio: float
    reliable: bool = True


@dataclass
class RatioTable:
    rows: list[RatioPoint] = field(default_factory=list)


@dataclass
class TransportSettings:
    base_step: float = DEFAULT_BASE_STEP
    refinement: int = DEFAULT_REFINEMENT
    eta: float = DEFAULT_ETA
    transverse_mass_ratio: float | None = None  # None -> insulator mass
    threads: int = 1


def _transverse_mass(spec: DeviceSpec, settings: TransportSettings) -> float:
    if settings.transverse_mass_ratio is not None:
        return settings.transverse_mass_ratio
    # the supply function weights the limiting barrier region
    return spec.insulator.effective_mass_ratio


def bias_point(spec: DeviceSpec, state: str, bias: float, temperature: float,
               settings: TransportSettings | None = None) -> IVPoint:
    """Currents at a single bias; the profile is rebuilt for the bias ramp."""
    settings = settings or TransportSettings()
    profile = profile_for_state(spec, state, bias)
    grid = build_grid(spec)
    ham = assemble(grid, profile, resolve_hoppings(spec))
    mu1 = spec.fermi_level
    mu2 = mu1 - bias
    energies = energy_grid(profile.values, mu1, mu2, temperature,
                           base_step=settings.base_step,
                           refinement=settings.refinement)
    trans = spectrum(ham, energies, eta=settings.eta).transmission
    i1d = current_1d(energies, trans, mu1, mu2, temperature)
    jden = current_density(energies, trans, mu1, mu2, temperature,
                           _transverse_mass(spec, settings))
    return IVPoint(bias=bias, current_1d=i1d, current_density=jden,
                   state=state, temperature=temperature)


def _map_biases(fn, biases, threads: int):
    if threads <= 1:
        return [fn(b) for b in biases]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, biases))


def iv_sweep(spec: DeviceSpec, state: str, biases, temperature: float,
             settings: TransportSettings | None = None) -> IVTable:
    """One I-V row per bias, state held fixed across the sweep."""
    settings = settings or TransportSettings()
    biases = list(biases)
    if any(b2 <= b1 for b1, b2 in zip(biases, biases[1:])):
        raise ValueError("biases must be strictly increasing")
    rows = _map_biases(lambda b: bias_point(spec, state, b, temperature, settings),
                       biases, settings.threads)
    return IVTable(rows=rows)


def hysteresis_sweep(spec: DeviceSpec, biases, temperature: float,
                     set_voltage: float = 1.0,
                     settings: TransportSettings | None = None) -> IVTable:
    """Composite sweep: HRS up to the SET voltage, then LRS back down.

    The SET voltage appears in both branches, so the stitched trace is
    discontinuous exactly there.
    """
    settings = settings or TransportSettings()
    up = [b for b in biases if b <= set_voltage]
    down = sorted(up, reverse=True)
    rows_up = _map_biases(lambda b: bias_point(spec, HRS, b, temperature, settings),
                          up, settings.threads)
    rows_down = _map_biases(lambda b: bias_point(spec, LRS, b, temperature, settings),
                            down, settings.threads)
    return IVTable(rows=rows_up + rows_down)


UNDERFLOW_CURRENT = 1e-30  # A/cm^2; below this the HRS current is noise


def nvrs_ratio(spec: DeviceSpec, bias: float, temperature: float,
               settings: TransportSettings | None = None) -> RatioPoint:
    """Resistance switching ratio R_off/R_on = J_LRS / J_HRS at one bias."""
    if bias == 0:
        raise ValueError("ratio is undefined at zero bias")
    j_hrs = bias_point(spec, HRS, bias, temperature, settings).current_density
    j_lrs = bias_point(spec, LRS, bias, temperature, settings).current_density
    if abs(j_hrs) < UNDERFLOW_CURRENT:
        warnings.warn("HRS current underflowed; ratio unreliable", RuntimeWarning)
        return RatioPoint(bias=bias, ratio=np.inf if j_lrs > 0 else np.nan,
                          reliable=False)
    return RatioPoint(bias=bias, ratio=j_lrs / j_hrs, reliable=True)


def ratio_table(spec: DeviceSpec, biases, temperature: float,
                settings: TransportSettings | None = None) -> RatioTable:
    settings = settings or TransportSettings()
    rows = _map_biases(lambda b: nvrs_ratio(spec, b, temperature, settings),
                       list(biases), settings.threads)
    return RatioTable(rows=rows)
