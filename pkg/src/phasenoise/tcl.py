"""Second-order time-convolutionless master equation and its Markov limit.

In the common eigenbasis of H_s and X the TCL2 equation decouples into one
linear scalar ODE per matrix element,

    d rho_mn / dt = r_mn(t) rho_mn,
    r_mn(t) = -i dX <xi(t)> - dX^2 int_0^t S - i dX2 int_0^t A,

with ``dX = X_m - X_n`` and ``dX2 = X_m^2 - X_n^2``. These are integrated
numerically with an adaptive embedded Runge-Kutta pair even though the
antiderivative is known, so agreement with the exact engine is a genuine
check of the equation rather than of an algebraic identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp

from . import baths
from .baths import DiscreteBath, SpectralBath
from .errors import IntegrationError, UnsupportedModelError
from .exact import CoherenceTrajectory, SystemSpec, _check_rho, _times

Bath = Union[DiscreteBath, SpectralBath]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14


@dataclass(frozen=True)
class TclRates:
    """Rate matrix ``drift[m, n]`` of the element equations at time ``t``."""

    t: float
    drift: np.ndarray


@dataclass(frozen=True)
class MarkovRates:
    """Constant dephasing rate ``gamma`` and frequency shift ``shift``."""

    gamma: float
    shift: float


def _kernel_values(bath: Bath, t: float) -> tuple[float, float, float]:
    if isinstance(bath, SpectralBath):
        if t == 0:
            return 0.0, 0.0, 0.0
        return (
            0.0,
            float(baths.spectral_sym_integral(bath, t)),
            float(baths.spectral_antisym_integral(bath, t)),
        )
    return (
        float(baths.mean_xi(bath, t)),
        float(baths.sym_integral(bath, t)),
        float(baths.antisym_integral(bath, t)),
    )


def tcl2_rates(system: SystemSpec, bath: Bath, t: float) -> TclRates:
    """All element rates at time ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    xi, s_int, a_int = _kernel_values(bath, t)
    dx, dx2 = system.coupling_differences()
    drift = -1j * dx * xi - dx**2 * s_int - 1j * dx2 * a_int
    return TclRates(float(t), drift)


def tcl2_rate(system: SystemSpec, bath: Bath, m: int, n: int, t: float) -> complex:
    """Rate ``r_mn(t)`` multiplying ``rho_mn`` in the TCL2 element equation."""
    d = system.dim
    if not (0 <= m < d and 0 <= n < d):
        raise IndexError(f"element ({m}, {n}) outside a {d}-level system")
    return complex(tcl2_rates(system, bath, t).drift[m, n])


def apply_generator(system: SystemSpec, bath: Bath, t: float, rho) -> np.ndarray:
    """Operator form ``-i<xi>[X, rho] - (IS [X, [X, rho]] + i IA [X, {X, rho}])``."""
    rho = np.asarray(rho, dtype=complex)
    xi, s_int, a_int = _kernel_values(bath, t)
    x = np.diag(system.X).astype(complex)

    def comm(a, b):
        return a @ b - b @ a

    return (
        -1j * xi * comm(x, rho)
        - s_int * comm(x, comm(x, rho))
        - 1j * a_int * comm(x, x @ rho + rho @ x)
    )


def integrate_tcl2(
    system: SystemSpec,
    bath: Bath,
    rho0,
    times,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    method: str = "DOP853",
) -> CoherenceTrajectory:
    """Integrate the TCL2 element equations from ``t = 0`` and sample at ``times``.

    Every element (including the lower triangle and the diagonal) is
    integrated as its own complex ODE; nothing is filled in by symmetry.
    """
    if not (rtol > 0 and atol > 0):
        raise ValueError("rtol and atol must be > 0")
    rho0 = _check_rho(system, rho0)
    times = _times(times)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    d = system.dim
    t_end = float(times[-1])
    if t_end == 0:
        return CoherenceTrajectory(times, np.repeat(rho0[None], times.size, axis=0))

    def rhs(t, y):
        return tcl2_rates(system, bath, t).drift.ravel() * y

    sol = solve_ivp(rhs, (0.0, t_end), rho0.ravel(), method=method, t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"TCL2 integration failed near t = {reached:.6g}: {sol.message}", time=reached)
    return CoherenceTrajectory(times, sol.y.T.reshape(times.size, d, d))


def markov_rates(bath: Bath) -> MarkovRates:
    """Markov (Bloch-Redfield) limit of the kernel integrals.

    ``gamma = lim_{t->inf} int_0^t S = (pi / 2) lim_{w->0} J(w) coth(w / 2T)``
    and ``shift = lim_{t->inf} int_0^t A = -int_0^inf J(w) / w dw``.
    """
    if isinstance(bath, DiscreteBath) and len(bath) == 0:
        # no coupling at all: the kernels vanish identically and the limit exists
        return MarkovRates(0.0, 0.0)
    if not isinstance(bath, SpectralBath):
        raise UnsupportedModelError(
            "unsupported-model: the Markov limit needs a continuum (spectral) bath; "
            "the kernel integrals of a discrete bath oscillate forever"
        )
    gamma = 0.5 * math.pi * baths.low_frequency_limit(bath)
    shift = -baths.reorganization_integral(bath)
    return MarkovRates(gamma, shift)


def integrate_bloch_redfield(system: SystemSpec, rates: MarkovRates, rho0, times) -> CoherenceTrajectory:
    """Constant-rate solution ``rho_mn(0) exp([-dX^2 gamma - i dX2 shift] t)``."""
    rho0 = _check_rho(system, rho0)
    times = _times(times)
    factors = bloch_redfield_factors(system, rates, times)
    return CoherenceTrajectory(times, factors * rho0[None])


def bloch_redfield_factors(system: SystemSpec, rates: MarkovRates, times) -> np.ndarray:
    dx, dx2 = system.coupling_differences()
    rate = -(dx**2) * rates.gamma - 1j * dx2 * rates.shift
    return np.exp(np.multiply.outer(np.asarray(times, dtype=float), rate))


def choi_matrix(factor: np.ndarray) -> np.ndarray:
    """Choi matrix ``sum_mn |m><n| (x) Phi(|m><n|)`` of the Schur map ``rho -> factor * rho``."""
    factor = np.asarray(factor, dtype=complex)
    d = factor.shape[0]
    choi = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for n in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[m, n] = 1.0
            choi += np.kron(unit, factor * unit)
    return choi
