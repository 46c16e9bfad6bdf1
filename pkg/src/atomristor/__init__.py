"""1D NEGF quantum-transport simulator for metal / 2D-material / metal memristors."""

from .calib import (CalibResult, SweepResult, calibrate_to_ratio,
                    lrs_distortion_study, sweep_well_depth, sweep_well_location)
from .config import (ConfigError, RunConfig, default_config, example_config_path,
                     parse_config, parse_config_text, serialize)
from .device import (DefectSpec, DefectState, DeviceSpec, GeometryError, Grid,
                     LrsShape, MaterialParams, PotentialProfile, build_grid,
                     hrs_profile, lrs_profile, profile_for_state,
                     with_defect_state)
from .hamiltonian import (HoppingSet, TridiagonalHamiltonian, assemble,
                          hopping_from_mass, junction_hopping, resolve_hoppings)
from .negf import (SingularGreensFunction, Spectrum, broadening,
                   electron_density, ldos_map, lead_self_energy, spectrum,
                   transmission)
from .scf import ScfResult, ScfSettings, poisson_solve, scf_loop
from .transport import (IVPoint, IVTable, RatioPoint, RatioTable,
                        TransportSettings, bias_point, current_1d,
                        current_density, energy_grid, fermi, hysteresis_sweep,
                        iv_sweep, nvrs_ratio, ratio_table)

__version__ = "0.1.0"
