"""1D Poisson solver and the self-consistent charge/potential loop.

The loop corrects the frozen (prescribed) profile with the electrostatic
response of the charge *deviation* from the zero-bias, defect-free
equilibrium density. That reference makes the frozen profile an exact
fixed point at zero bias, without needing a doping model for the stack.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .constants import COULOMB_COUPLING
from .device import DeviceSpec, PotentialProfile, build_grid, profile_for_state
from .hamiltonian import assemble, resolve_hoppings
from .negf import electron_density
from .transport import TransportSettings, energy_grid


@dataclass
class ScfSettings:
    damping: float = 0.1        # in (0, 1]
    tol: float = 1e-4           # eV, max damped potential update
    max_iter: int = 200
    mode: str = "damped_fixed_point"   # or "newton"
    cross_section: float = 1.0  # nm^2, converts line density to volume density

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.mode not in ("damped_fixed_point", "newton"):
            raise ValueError(f"unknown SCF mode {self.mode!r}")


@dataclass
class ScfResult:
    profile: PotentialProfile
    density: np.ndarray            # 1/nm per site
    iterations: int
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False


def poisson_solve(charge, permittivity_rel: float, boundary: tuple[float, float],
                  spacing: float, cross_section: float = 1.0) -> np.ndarray:
    """Potential energy (eV) from a line charge density with Dirichlet ends.

    Solves the discrete d2U/dx2 = -q^2 n(x) / (eps0 eps_r A) on the grid,
    where n is the excess electron density in 1/nm and A the effective
    cross-section in nm^2. Exact for the discrete system.
    """
    n = np.asarray(charge, dtype=float)
    if len(n) < 3:
        raise ValueError("need at least 3 grid points")
    rhs_full = -COULOMB_COUPLING * n / (permittivity_rel * cross_section)  # eV/nm^2
    u = np.empty_like(n)
    u[0], u[-1] = boundary
    m = len(n) - 2
    rhs = rhs_full[1:-1] * spacing**2
    rhs[0] -= u[0]
    rhs[-1] -= u[-1]
    ab = np.zeros((3, m))
    ab[0, 1:] = 1.0
    ab[1, :] = -2.0
    ab[2, :-1] = 1.0
    u[1:-1] = solve_banded((1, 1), ab, rhs)
    return u


def _reference_density(spec: DeviceSpec, settings: TransportSettings) -> np.ndarray:
    """Equilibrium density of the defect-free device at zero bias."""
    ref_spec = dataclasses.replace(spec, defects=())
    profile = profile_for_state(ref_spec, "HRS", 0.0)
    grid = build_grid(ref_spec)
    ham = assemble(grid, profile, resolve_hoppings(ref_spec))
    mu = spec.fermi_level
    energies = energy_grid(profile.values, mu, mu, spec.temperature,
                           base_step=settings.base_step,
                           refinement=settings.refinement)
    return electron_density(ham, energies, mu, mu, spec.temperature,
                            grid.spacing, eta=settings.eta)


def _density_of(spec, grid, hoppings, values, bias, mu1, mu2, settings):
    profile = PotentialProfile(values=values, bias=bias, state_label="scf")
    ham = assemble(grid, profile, hoppings)
    energies = energy_grid(values, mu1, mu2, spec.temperature,
                           base_step=settings.base_step,
                           refinement=settings.refinement)
    return electron_density(ham, energies, mu1, mu2, spec.temperature,
                            grid.spacing, eta=settings.eta)


def scf_loop(spec: DeviceSpec, state: str, bias: float,
             settings: ScfSettings | None = None,
             transport_settings: TransportSettings | None = None) -> ScfResult:
    """Iterate potential -> density -> Poisson correction until stationary.

    Non-convergence returns the best iterate flagged ``converged=False``
    rather than raising.
    """
    settings = settings or ScfSettings()
    tsettings = transport_settings or TransportSettings()
    grid = build_grid(spec)
    hoppings = resolve_hoppings(spec)
    frozen = profile_for_state(spec, state, bias)
    mu1 = spec.fermi_level
    mu2 = mu1 - bias
    n_ref = _reference_density(spec, tsettings)

    def target(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = _density_of(spec, grid, hoppings, values, bias, mu1, mu2, tsettings)
        correction = poisson_solve(n - n_ref, spec.permittivity_rel, (0.0, 0.0),
                                   grid.spacing, settings.cross_section)
        return frozen.values + correction, n

    u = frozen.values.copy()
    density = np.zeros_like(u)
    history: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, settings.max_iter + 1):
        if settings.mode == "newton":
            resid, density, step = _newton_step(target, u, settings)
        else:
            u_target, density = target(u)
            # convergence is judged on the undamped fixed-point error so the
            # converged profile does not depend on the damping factor
            resid = float(np.max(np.abs(u_target - u)))
            step = settings.damping * (u_target - u)
        history.append(resid)
        if resid < settings.tol:
            converged = True
            break
        u = u + step
    profile = PotentialProfile(values=u, bias=bias, state_label=state)
    return ScfResult(profile=profile, density=density, iterations=iterations,
                     residual_history=history, converged=converged)


def _newton_step(target, u: np.ndarray, settings: ScfSettings,
                 fd_step: float = 1e-4):
    """One damped Newton step on F(U) = target(U) - U, Jacobian by FD."""
    n = len(u)
    t0, density = target(u)
    f0 = t0 - u
    jac = np.empty((n, n))
    for j in range(n):
        up = u.copy()
        up[j] += fd_step
        tj, _ = target(up)
        jac[:, j] = ((tj - up) - f0) / fd_step
    try:
        delta = np.linalg.solve(jac, -f0)
    except np.linalg.LinAlgError:
        delta = f0  # fall back to a fixed-point step
    step = settings.damping * delta
    return float(np.max(np.abs(f0))), density, step
