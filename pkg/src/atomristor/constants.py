"""Physical constants in the unit system used throughout (eV, nm, K, s)."""

import scipy.constants as sc

HBAR = sc.hbar                      # J s
ELECTRON_MASS = sc.m_e              # kg
ELEMENTARY_CHARGE = sc.e            # C
PLANCK = sc.h                       # J s
BOLTZMANN_EV = sc.k / sc.e          # eV / K
BOLTZMANN_J = sc.k                  # J / K

# q^2 / epsilon_0 expressed in eV nm; sets the strength of the Poisson coupling
# between a line charge density (1/nm) and the potential energy (eV).
COULOMB_COUPLING = sc.e / sc.epsilon_0 * 1e9
