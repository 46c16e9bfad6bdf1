"""Green's-function machinery: self-energies, transmission, LDOS, density.

Everything here is a pure per-energy computation, vectorized over the
energy grid. The fast path exploits tridiagonality with scalar
forward/backward recursions (O(N) per energy); a dense-inverse oracle is
retained behind ``dense=True`` for verification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .hamiltonian import TridiagonalHamiltonian

DEFAULT_ETA = 1e-12   # eV; imaginary shift for out-of-band stability
MAX_ETA = 1e-6


class SingularGreensFunction(RuntimeError):
    """Green's function stayed singular even at the widest imaginary shift."""


def lead_self_energy(energy, lead_level: float, t_lead: float):
    """Retarded contact self-energy -t e^{ika} of a semi-infinite 1D lead.

    Solves cos(ka) = 1 - (E - U)/(2t). In-band the branch with Im <= 0 is
    taken; out-of-band the evanescent branch with |e^{ika}| <= 1.
    Accepts scalars or arrays of real energies.
    """
    if t_lead <= 0:
        raise ValueError("lead hopping must be positive")
    e = np.asarray(energy, dtype=float)
    z = 1.0 - (e - lead_level) / (2.0 * t_lead)
    out = np.empty(z.shape, dtype=complex)
    inband = np.abs(z) <= 1.0
    zi = z[inband]
    out[inband] = -t_lead * (zi + 1j * np.sqrt(1.0 - zi * zi))
    below = z > 1.0       # E below the band bottom
    zb = z[below]
    out[below] = -t_lead * (zb - np.sqrt(zb * zb - 1.0))
    above = z < -1.0      # E above the band top
    za = z[above]
    out[above] = -t_lead * (za + np.sqrt(za * za - 1.0))
    if np.isscalar(energy) or np.ndim(energy) == 0:
        return complex(out[()])
    return out


def broadening(sigma):
    """Gamma = i (Sigma - Sigma^dagger); real and >= 0 for retarded Sigma."""
    sig = np.asarray(sigma)
    return np.real(1j * (sig - np.conj(sig)))


@dataclass
class Spectrum:
    """Per-energy transport quantities for one Hamiltonian."""
    energies: np.ndarray          # (NE,) eV
    transmission: np.ndarray      # (NE,) from trace(Gamma1 A2)
    transmission_alt: np.ndarray  # (NE,) from trace(Gamma2 A1)
    g_11: np.ndarray              # (NE,) complex
    g_nn: np.ndarray
    g_1n: np.ndarray
    gamma1: np.ndarray            # (NE,) real
    gamma2: np.ndarray
    a1_diag: np.ndarray           # (N, NE) diagonal of G Gamma1 G^dagger
    a2_diag: np.ndarray           # (N, NE) diagonal of G Gamma2 G^dagger
    g_diag: np.ndarray            # (N, NE) complex diagonal of G
    eta: float


def _spectrum_recursive(ham: TridiagonalHamiltonian, energies: np.ndarray,
                        eta: float) -> Spectrum:
    n = ham.n
    ne = len(energies)
    sig1 = np.asarray(lead_self_energy(energies, *ham.lead_left))
    sig2 = np.asarray(lead_self_energy(energies, *ham.lead_right))
    # d, e are the tridiagonal entries of M = (E + i eta) I - H - Sigma
    d = (energies + 1j * eta)[None, :] - ham.diagonal[:, None]
    d[0] -= sig1
    d[-1] -= sig2
    e = -ham.off_diagonal  # = +t per bond

    g_left = np.empty((n, ne), dtype=complex)    # left-connected
    g_left[0] = 1.0 / d[0]
    for i in range(1, n):
        g_left[i] = 1.0 / (d[i] - e[i - 1] ** 2 * g_left[i - 1])
    g_right = np.empty((n, ne), dtype=complex)   # right-connected
    g_right[-1] = 1.0 / d[-1]
    for i in range(n - 2, -1, -1):
        g_right[i] = 1.0 / (d[i] - e[i] ** 2 * g_right[i + 1])

    col1 = np.empty((n, ne), dtype=complex)      # first column of G
    col1[0] = 1.0 / (d[0] - e[0] ** 2 * g_right[1])
    for i in range(1, n):
        col1[i] = -g_right[i] * e[i - 1] * col1[i - 1]
    coln = np.empty((n, ne), dtype=complex)      # last column of G
    coln[-1] = 1.0 / (d[-1] - e[-1] ** 2 * g_left[-2])
    for i in range(n - 2, -1, -1):
        coln[i] = -g_left[i] * e[i] * coln[i + 1]

    g_diag = np.empty((n, ne), dtype=complex)
    g_diag[0] = col1[0]
    g_diag[-1] = coln[-1]
    for i in range(1, n - 1):
        g_diag[i] = 1.0 / (d[i] - e[i - 1] ** 2 * g_left[i - 1]
                           - e[i] ** 2 * g_right[i + 1])

    gamma1 = broadening(sig1)
    gamma2 = broadening(sig2)
    a1 = gamma1[None, :] * np.abs(col1) ** 2
    a2 = gamma2[None, :] * np.abs(coln) ** 2
    return Spectrum(
        energies=energies,
        transmission=gamma1 * a2[0],          # trace(Gamma1 A2)
        transmission_alt=gamma2 * a1[-1],     # trace(Gamma2 A1)
        g_11=col1[0], g_nn=coln[-1], g_1n=coln[0],
        gamma1=gamma1, gamma2=gamma2,
        a1_diag=a1, a2_diag=a2, g_diag=g_diag, eta=eta)


def _spectrum_dense(ham: TridiagonalHamiltonian, energies: np.ndarray,
                    eta: float) -> Spectrum:
    n = ham.n
    ne = len(energies)
    sig1 = np.asarray(lead_self_energy(energies, *ham.lead_left))
    sig2 = np.asarray(lead_self_energy(energies, *ham.lead_right))
    gamma1 = broadening(sig1)
    gamma2 = broadening(sig2)
    h = np.diag(ham.diagonal.astype(complex))
    h += np.diag(ham.off_diagonal, 1) + np.diag(ham.off_diagonal, -1)
    col1 = np.empty((n, ne), dtype=complex)
    coln = np.empty((n, ne), dtype=complex)
    g_diag = np.empty((n, ne), dtype=complex)
    for k, en in enumerate(energies):
        m = (en + 1j * eta) * np.eye(n) - h
        m[0, 0] -= sig1[k]
        m[-1, -1] -= sig2[k]
        g = np.linalg.inv(m)
        col1[:, k] = g[:, 0]
        coln[:, k] = g[:, -1]
        g_diag[:, k] = np.diag(g)
    a1 = gamma1[None, :] * np.abs(col1) ** 2
    a2 = gamma2[None, :] * np.abs(coln) ** 2
    return Spectrum(
        energies=energies,
        transmission=gamma1 * a2[0],
        transmission_alt=gamma2 * a1[-1],
        g_11=col1[0], g_nn=coln[-1], g_1n=coln[0],
        gamma1=gamma1, gamma2=gamma2,
        a1_diag=a1, a2_diag=a2, g_diag=g_diag, eta=eta)


def spectrum(ham: TridiagonalHamiltonian, energies, eta: float = DEFAULT_ETA,
             dense: bool = False) -> Spectrum:
    """Transmission and spectral diagonals on an energy grid.

    On a numerically singular system the imaginary shift is widened by 10x
    up to 1e-6 eV before giving up.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    compute = _spectrum_dense if dense else _spectrum_recursive
    current_eta = eta
    while True:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            sp = compute(ham, energies, current_eta)
        finite = (np.all(np.isfinite(sp.transmission))
                  and np.all(np.isfinite(sp.a1_diag))
                  and np.all(np.isfinite(sp.a2_diag)))
        if finite:
            return sp
        if current_eta >= MAX_ETA:
            raise SingularGreensFunction(
                f"Green's function singular up to eta = {current_eta:g} eV")
        current_eta *= 10.0


def transmission(sp: Spectrum) -> np.ndarray:
    """T(E) = Gamma1 |G_1N|^2 Gamma2, equal to both trace forms in 1D."""
    return sp.gamma1 * np.abs(sp.g_1n) ** 2 * sp.gamma2


def ldos_map(ham: TridiagonalHamiltonian, energies, spacing: float,
             eta: float = DEFAULT_ETA, dense: bool = False) -> np.ndarray:
    """Local density of states, (site x energy), in 1/(eV nm)."""
    sp = spectrum(ham, energies, eta=eta, dense=dense)
    return (sp.a1_diag + sp.a2_diag) / (2.0 * np.pi * spacing)


def electron_density(ham: TridiagonalHamiltonian, energies, mu1: float,
                     mu2: float, temperature: float, spacing: float,
                     eta: float = DEFAULT_ETA) -> np.ndarray:
    """Occupied spectral weight per site, integrated over energy, in 1/nm.

    n_i = integral of [A1_ii f(E; mu1) + A2_ii f(E; mu2)] dE / (2 pi a).
    Warns when the integrand has not decayed at the grid edges.
    """
    from .transport import fermi  # local import avoids a module cycle
    energies = np.asarray(energies, dtype=float)
    sp = spectrum(ham, energies, eta=eta)
    f1 = fermi(energies, mu1, temperature)
    f2 = fermi(energies, mu2, temperature)
    integrand = sp.a1_diag * f1[None, :] + sp.a2_diag * f2[None, :]
    peak = integrand.max()
    if peak > 0:
        edge = max(integrand[:, 0].max(), integrand[:, -1].max())
        if edge > 1e-6 * peak:
            warnings.warn("energy grid truncates the occupied window; "
                          "density may be underconverged", RuntimeWarning)
    return np.trapezoid(integrand, energies, axis=1) / (2.0 * np.pi * spacing)
