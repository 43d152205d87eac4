"""Exact reduced dynamics for pure dephasing.

Two routes to the same object: the closed Gaussian form written in terms of
Lambda, phi and psi, and the product of single-mode characteristic
functions, which also covers factorized non-Gaussian states (finite
coherent-state mixtures). Both evaluate every grid time independently; no
time stepping is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .baths import (
    BathMode,
    DiscreteBath,
    SpectralBath,
    lambda_damping,
    one_minus_expi,
    phi_phase,
    psi_phase,
    spectral_lambda,
    spectral_phi,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class SystemSpec:
    """Common eigenbasis of H_s and X: energies E_n and coupling eigenvalues X_n."""

    energies: tuple[float, ...]
    couplings: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(x) for x in self.energies)
        x = tuple(float(v) for v in self.couplings)
        if len(e) != len(x):
            raise ValueError(f"energies ({len(e)}) and couplings ({len(x)}) differ in length")
        if len(e) < 1:
            raise ValueError("system dimension must be >= 1")
        if not all(np.isfinite(e)) or not all(np.isfinite(x)):
            raise ValueError("energies and couplings must be finite")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "couplings", x)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def E(self) -> np.ndarray:
        return np.array(self.energies)

    @property
    def X(self) -> np.ndarray:
        return np.array(self.couplings)

    def coupling_differences(self):
        """Matrices ``X_m - X_n`` and ``X_m^2 - X_n^2``."""
        x = self.X
        return x[:, None] - x[None, :], (x**2)[:, None] - (x**2)[None, :]


@dataclass(frozen=True)
class Gaussian:
    """Displaced thermal mode state with P-function mean ``beta_bar`` and width ``nbar``."""

    nbar: float = 0.0
    beta_bar: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "nbar", float(self.nbar))
        object.__setattr__(self, "beta_bar", complex(self.beta_bar))
        if not (np.isfinite(self.nbar) and self.nbar >= 0):
            raise ValueError(f"Gaussian nbar must be >= 0, got {self.nbar}")


@dataclass(frozen=True)
class CoherentMixture:
    """``sum_j w_j |beta_j><beta_j|``; a non-Gaussian but positive P-function."""

    weights: tuple[float, ...]
    betas: tuple[complex, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        b = tuple(complex(x) for x in self.betas)
        if len(w) != len(b) or not w:
            raise ValueError("mixture needs equally many (>= 1) weights and amplitudes")
        if any(not x > 0 for x in w):
            raise ValueError("mixture weights must be > 0")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {sum(w)!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "betas", b)

    @property
    def mean(self) -> complex:
        return complex(np.dot(self.weights, self.betas))

    @property
    def covariance(self) -> float:
        """``<|beta - mean|^2>``."""
        d = np.array(self.betas) - self.mean
        return float(np.dot(self.weights, np.abs(d) ** 2))

    @property
    def anomalous(self) -> complex:
        """``<(beta - mean)^2>``."""
        d = np.array(self.betas) - self.mean
        return complex(np.dot(self.weights, d**2))


ModeState = Union[Gaussian, CoherentMixture]


@dataclass(frozen=True)
class CoherenceTrajectory:
    """Density matrices ``rho[i]`` at ``times[i]``."""

    times: np.ndarray
    rho: np.ndarray
    picture: str = "interaction"

    def element(self, m: int, n: int) -> np.ndarray:
        return self.rho[:, m, n]


def validate_density_matrix(rho, *, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, psd_tol=POSITIVITY_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array or raise ValueError naming the violated property."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > hermitian_tol:
        raise ValueError(f"density matrix not hermitian (deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace is {tr.real:.15g}, expected 1")
    low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if low < -psd_tol:
        raise ValueError(f"density matrix not positive semidefinite (min eigenvalue {low:.3e})")
    return rho


def _check_rho(system: SystemSpec, rho0) -> np.ndarray:
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != system.dim:
        raise ValueError(f"rho0 has dimension {rho0.shape[0]}, system has {system.dim}")
    return rho0


def _times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or np.any(times < 0):
        raise ValueError("times must be a 1-D array of values >= 0")
    return times


def z_coefficient(mode: BathMode, t):
    """``z_k(t) = conj(g_k) (1 - exp(i w_k t)) / w_k``."""
    return np.conj(mode.g) * one_minus_expi(np.asarray(t, dtype=float) * mode.omega) / mode.omega


def characteristic_fn(state: ModeState, lam):
    """Single-mode P-function characteristic function ``<exp(lam conj(beta) - conj(lam) beta)>_P``."""
    lam = np.asarray(lam, dtype=complex)
    if isinstance(state, Gaussian):
        b = state.beta_bar
        return np.exp(lam * np.conj(b) - np.conj(lam) * b - np.abs(lam) ** 2 * state.nbar)
    w = np.array(state.weights)
    b = np.array(state.betas)
    arg = np.multiply.outer(lam, np.conj(b)) - np.multiply.outer(np.conj(lam), b)
    return np.exp(arg) @ w


def gaussian_exponent(system: SystemSpec, lam, phi, psi) -> np.ndarray:
    """Exponent matrix ``-dX^2 Lambda + i (dX2 phi + dX psi)`` for each time, shape (T, d, d)."""
    dx, dx2 = system.coupling_differences()
    lam, phi, psi = (np.atleast_1d(a)[:, None, None] for a in (lam, phi, psi))
    return -(dx**2) * lam + 1j * (dx2 * phi + dx * psi)


def propagate_exact_gaussian(system: SystemSpec, bath: Union[DiscreteBath, SpectralBath], rho0, times) -> CoherenceTrajectory:
    """Closed-form dephasing of every element for a Gaussian (displaced thermal) bath."""
    rho0 = _check_rho(system, rho0)
    times = _times(times)
    if isinstance(bath, SpectralBath):
        lam = np.atleast_1d(spectral_lambda(bath, times))
        phi = np.atleast_1d(spectral_phi(bath, times))
        psi = np.zeros_like(times)
    else:
        if np.any(bath.anomalous != 0):
            raise ValueError("the Gaussian closed form needs modes with zero anomalous covariance")
        lam = np.atleast_1d(lambda_damping(bath, times))
        phi = np.atleast_1d(phi_phase(bath, times))
        psi = np.atleast_1d(psi_phase(bath, times))
    factor = np.exp(gaussian_exponent(system, lam, phi, psi))
    return CoherenceTrajectory(times, factor * rho0[None, :, :])


def _modes_and_states(modes) -> tuple[DiscreteBath, list]:
    pairs = list(modes)
    return DiscreteBath(tuple(m for m, _ in pairs)), [s for _, s in pairs]


def coherence_factors(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], times) -> np.ndarray:
    """Ratios ``rho_mn(t) / rho_mn(0)`` from the characteristic-function product, shape (T, d, d)."""
    times = _times(times)
    bath, states = _modes_and_states(modes)
    dx, dx2 = system.coupling_differences()
    phi = np.atleast_1d(phi_phase(bath, times))
    log_det = 1j * dx2[None] * phi[:, None, None]
    out = np.ones((times.size,) + dx.shape, dtype=complex)
    for mode, state in modes:
        z = np.atleast_1d(z_coefficient(mode, times))
        lam = z[:, None, None] * dx[None]
        log_det = log_det - 0.5 * np.abs(lam) ** 2
        out = out * characteristic_fn(state, lam)
    return out * np.exp(log_det)


def propagate_exact_charfn(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], rho0, times) -> CoherenceTrajectory:
    """Exact dynamics for any mode-factorized P-function via characteristic functions.

    Only each mode's ``omega`` and ``g`` are read from the BathMode; the
    state is taken from the paired ModeState.
    """
    rho0 = _check_rho(system, rho0)
    times = _times(times)
    return CoherenceTrajectory(times, coherence_factors(system, modes, times) * rho0[None])


def to_schrodinger(traj: CoherenceTrajectory, system: SystemSpec) -> CoherenceTrajectory:
    """Restore the free phases ``exp(-i (E_m - E_n) t)`` stripped by the interaction picture."""
    if traj.picture != "interaction":
        raise ValueError(f"trajectory is already in the {traj.picture} picture")
    e = system.E
    de = e[:, None] - e[None, :]
    phase = np.exp(-1j * traj.times[:, None, None] * de[None])
    return replace(traj, rho=traj.rho * phase, picture="schrodinger")


def gaussian_bath(modes: Sequence[tuple[BathMode, ModeState]]) -> DiscreteBath:
    """Moment-matched bath: each mode carries its state's first and second P-cumulants.

    For Gaussian states this is just the state copied into the mode. For
    mixtures it is the Gaussian truncation of the P-function, including the
    anomalous cumulant ``<(beta - mean)^2>``.
    """
    out = []
    for mode, state in modes:
        if isinstance(state, Gaussian):
            out.append(replace(mode, nbar=state.nbar, beta_bar=state.beta_bar, anomalous=0j))
        else:
            out.append(replace(mode, nbar=state.covariance, beta_bar=state.mean, anomalous=state.anomalous))
    return DiscreteBath(tuple(out))


def states_from_bath(bath: DiscreteBath) -> list[tuple[BathMode, ModeState]]:
    """Pair every mode with the Gaussian state its ``nbar`` / ``beta_bar`` describe."""
    return [(m, Gaussian(m.nbar, m.beta_bar)) for m in bath.modes]
