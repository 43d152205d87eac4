"""Cumulant expansion of the log-coherence under the bath P-function.

For element (m, n) the exact coherence is ``rho_mn(t) = <exp F(t)>_P
rho_mn(0)`` where

    F(t) = i dX2 phi(t) - sum_k [dX^2 |z_k|^2 / 2 - dX (z_k beta_k^* - z_k^* beta_k)]

is affine in the random amplitudes ``beta_k``. Hence
``log(rho_mn(t) / rho_mn(0)) = sum_l kappa_l(F) / l!`` with ``kappa_l`` the
ordinary cumulants of the scalar ``F``; the order-l term of the time-local
generator integrates to exactly ``kappa_l / l!``. Gaussian P-functions stop
at l = 2, which is the TCL2 equation; mixtures do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baths import BathMode, DiscreteBath, phi_phase
from .errors import CoherenceUnderflowError
from .exact import CoherentMixture, Gaussian, ModeState, SystemSpec, coherence_factors, z_coefficient

MAX_ORDER = 4


@dataclass
class CumulantReport:
    m: int
    n: int
    t: float
    order_contributions: list[complex]
    exact_log: complex
    tcl2_log: complex = field(init=False)

    def __post_init__(self):
        self.tcl2_log = self.order_contributions[0] + self.order_contributions[1]

    def partial_sum(self, order: int) -> complex:
        return sum(self.order_contributions[:order])

    def gap(self, order: int) -> float:
        """``|exact_log - sum_{l <= order} contribution_l|``."""
        return abs(self.exact_log - self.partial_sum(order))


def _differences(system: SystemSpec, m: int, n: int) -> tuple[float, float]:
    x = system.X
    return x[m] - x[n], x[m] ** 2 - x[n] ** 2


def _deterministic_part(system, modes, m, n, t) -> complex:
    dx, dx2 = _differences(system, m, n)
    bath = DiscreteBath(tuple(mode for mode, _ in modes))
    z = np.array([z_coefficient(mode, t) for mode, _ in modes], dtype=complex)
    return 1j * dx2 * float(phi_phase(bath, t)) - dx**2 * 0.5 * float(np.sum(np.abs(z) ** 2))


def f_mn_value(system: SystemSpec, modes: Sequence[BathMode], m: int, n: int, t: float, betas: Sequence[complex]) -> complex:
    """Value of ``F(t)`` for one realization ``betas`` of the mode amplitudes."""
    modes = list(modes)
    if len(betas) != len(modes):
        raise ValueError(f"need one amplitude per mode ({len(modes)}), got {len(betas)}")
    dx, _ = _differences(system, m, n)
    det = _deterministic_part(system, [(mode, None) for mode in modes], m, n, t)
    rand = 0j
    for mode, beta in zip(modes, betas):
        z = complex(z_coefficient(mode, t))
        rand += dx * (z * np.conj(beta) - np.conj(z) * beta)
    return det + rand


def moments_to_cumulants(moments: Sequence[complex]) -> list[complex]:
    """``[kappa_1, ..., kappa_L]`` from raw moments ``[mu_1, ..., mu_L]``."""
    mu = [1.0 + 0j] + list(moments)
    kappa = [0j] * len(mu)
    for r in range(1, len(mu)):
        kappa[r] = mu[r] - sum(math.comb(r - 1, k - 1) * kappa[k] * mu[r - k] for k in range(1, r))
    return kappa[1:]


def _mode_cumulants(mode: BathMode, state: ModeState, dx: float, t: float, order: int) -> list[complex]:
    z = complex(z_coefficient(mode, t))
    if isinstance(state, Gaussian):
        b = state.beta_bar
        out = [dx * (z * np.conj(b) - np.conj(z) * b), -2.0 * dx**2 * abs(z) ** 2 * state.nbar]
        return (out + [0j] * order)[:order]
    betas = np.array(state.betas)
    w = np.array(state.weights)
    y = dx * (z * np.conj(betas) - np.conj(z) * betas)
    mean = complex(np.dot(w, y))
    centred = y - mean
    moments = [complex(np.dot(w, centred**r)) for r in range(1, order + 1)]
    kappa = moments_to_cumulants(moments)
    kappa[0] = mean
    return kappa


def cumulants(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], m: int, n: int, t: float, order: int = MAX_ORDER) -> list[complex]:
    """``[kappa_1(F), ..., kappa_order(F)]``; cumulants of independent modes add."""
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"cumulant order must be in 1..{MAX_ORDER}, got {order}")
    modes = list(modes)
    dx, _ = _differences(system, m, n)
    total = [0j] * order
    total[0] = _deterministic_part(system, modes, m, n, t)
    for mode, state in modes:
        for i, k in enumerate(_mode_cumulants(mode, state, dx, t, order)):
            total[i] += k
    return total


def cumulant_contribution(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], m: int, n: int, t: float, order: int) -> complex:
    """Order-``order`` term ``kappa_l(F) / l!`` of the log-coherence expansion."""
    if order not in range(1, MAX_ORDER + 1):
        raise ValueError(f"unsupported cumulant order {order}; supported: 1..{MAX_ORDER}")
    return cumulants(system, modes, m, n, t, order)[order - 1] / math.factorial(order)


def log_coherence_exact(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], m: int, n: int, times, max_phase_step: float = 0.5):
    """``log(rho_mn(t) / rho_mn(0))`` with the branch followed continuously from t = 0.

    The principal logarithm is sampled on a grid refined until consecutive
    phase increments stay below ``max_phase_step`` and then unwrapped.
    """
    modes = list(modes)
    scalar = np.ndim(times) == 0
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t_end = float(times.max()) if times.size else 0.0
    n_grid = 64
    while True:
        grid = np.union1d(np.linspace(0.0, t_end, n_grid), times)
        factors = coherence_factors(system, modes, grid)[:, m, n]
        mags = np.abs(factors)
        if np.any(mags < 1e-300):
            bad = grid[np.argmax(mags < 1e-300)]
            raise CoherenceUnderflowError(f"|rho_{m}{n}(t) / rho_{m}{n}(0)| underflows near t = {bad:.6g}")
        phase = np.angle(factors)
        if np.all(np.abs(np.diff(np.unwrap(phase))) < max_phase_step) or n_grid > 2**22:
            break
        n_grid *= 4
    logs = np.log(mags) + 1j * np.unwrap(phase)
    out = logs[np.searchsorted(grid, times)]
    return complex(out[0]) if scalar else out


def cumulant_report(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], m: int, n: int, t: float, orders: int = MAX_ORDER) -> CumulantReport:
    if orders < 2:
        raise ValueError("a report needs at least orders 1 and 2")
    kappa = cumulants(system, modes, m, n, t, orders)
    contrib = [k / math.factorial(i + 1) for i, k in enumerate(kappa)]
    return CumulantReport(m, n, float(t), contrib, log_coherence_exact(system, modes, m, n, t))
