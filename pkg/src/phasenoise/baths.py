"""Bath models and every scalar function of the bath.

Units: hbar = k_B = 1, all frequencies angular. A discrete bath is a list of
independent oscillators with coupling ``g_k`` to the effective coordinate
``xi = sum_k (g_k b_k + g_k^* b_k^dagger)``; a spectral bath is a continuum
described by ``J(omega) = sum_k |g_k|^2 delta(omega - omega_k)`` at thermal
equilibrium.

All discrete-bath functions accept a scalar or an array of times and
broadcast over it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from . import quadrature
from .errors import DivergenceError

TAIL_TOLERANCE = 1e-12
SMALL_OMEGA_FRACTION = 1e-6


def thermal_occupation(omega, temperature):
    """Bose-Einstein occupation ``1 / (exp(omega / T) - 1)``; zero at ``T = 0``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0) or not np.all(np.isfinite(omega)):
        raise ValueError(f"thermal_occupation needs omega > 0, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        out = np.zeros_like(omega)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(omega / temperature)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class BathMode:
    """One bath oscillator.

    ``nbar`` and ``beta_bar`` are the covariance ``<|beta - beta_bar|^2>``
    and the mean of the mode's Gaussian P-function. ``anomalous`` is the
    second P-cumulant ``<(beta - beta_bar)^2>``; it is zero for every
    Gaussian state handled by the exact engine and is only set when a
    non-Gaussian state is moment-matched for the TCL2 solver.
    """

    omega: float
    g: complex
    nbar: float = 0.0
    beta_bar: complex = 0j
    anomalous: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "g", complex(self.g))
        object.__setattr__(self, "nbar", float(self.nbar))
        object.__setattr__(self, "beta_bar", complex(self.beta_bar))
        object.__setattr__(self, "anomalous", complex(self.anomalous))
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"mode frequency must be finite and > 0, got {self.omega}")
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise ValueError(f"mode occupation must be finite and >= 0, got {self.nbar}")


@dataclass(frozen=True)
class DiscreteBath:
    """An ordered, possibly empty, collection of independent modes."""

    modes: tuple[BathMode, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))

    def __len__(self):
        return len(self.modes)

    def __add__(self, other: "DiscreteBath") -> "DiscreteBath":
        return DiscreteBath(self.modes + other.modes)

    @cached_property
    def omega(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes], dtype=float)

    @cached_property
    def g(self) -> np.ndarray:
        return np.array([m.g for m in self.modes], dtype=complex)

    @cached_property
    def coupling2(self) -> np.ndarray:
        return np.abs(self.g) ** 2

    @cached_property
    def nbar(self) -> np.ndarray:
        return np.array([m.nbar for m in self.modes], dtype=float)

    @cached_property
    def beta_bar(self) -> np.ndarray:
        return np.array([m.beta_bar for m in self.modes], dtype=complex)

    @cached_property
    def anomalous(self) -> np.ndarray:
        return np.array([m.anomalous for m in self.modes], dtype=complex)


@dataclass(frozen=True)
class OhmicExpCutoff:
    """``J(omega) = alpha * omega * exp(-omega / omega_c)``."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.alpha * omega * np.exp(-omega / self.omega_c)

    @property
    def scale(self) -> float:
        return self.omega_c

    @property
    def low_frequency_slope(self) -> float:
        """``lim J(omega) / omega`` as omega -> 0."""
        return self.alpha

    def breakpoints(self) -> list[float]:
        return []

    def upper_cutoff(self, weight: float, tol: float = TAIL_TOLERANCE) -> float:
        """Frequency beyond which ``weight * int J(w)/w dw`` stays below ``tol``."""
        mass = weight * self.alpha * self.omega_c
        if mass <= tol:
            return self.omega_c
        return self.omega_c * max(1.0, math.log(mass / tol))


@dataclass(frozen=True)
class TabulatedDensity:
    """Piecewise-linear ``J(omega)`` through samples, zero outside their span."""

    omegas: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.omegas)
        j = tuple(float(x) for x in self.values)
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "values", j)
        if len(w) != len(j) or len(w) < 2:
            raise ValueError("tabulated J needs at least two (omega, J) samples of equal length")
        if w[0] < 0 or any(b <= a for a, b in zip(w, w[1:])):
            raise ValueError("tabulated omegas must be >= 0 and strictly increasing")
        if any(not (math.isfinite(x) and x >= 0) for x in j):
            raise ValueError("tabulated J values must be finite and >= 0")
        if w[0] == 0 and j[0] != 0:
            raise ValueError(
                "J(omega)/omega must stay bounded as omega -> 0; tabulated J(0) must be 0"
            )

    def __call__(self, omega):
        return np.interp(np.asarray(omega, dtype=float), self.omegas, self.values, left=0.0, right=0.0)

    @property
    def scale(self) -> float:
        return self.omegas[-1]

    @property
    def low_frequency_slope(self) -> float:
        if self.omegas[0] > 0:
            return 0.0
        return (self.values[1] - self.values[0]) / (self.omegas[1] - self.omegas[0])

    def breakpoints(self) -> list[float]:
        return list(self.omegas)

    def upper_cutoff(self, weight: float, tol: float = TAIL_TOLERANCE) -> float:
        return self.omegas[-1]


SpectralDensity = Union[OhmicExpCutoff, TabulatedDensity]


@dataclass(frozen=True)
class SpectralBath:
    """Continuum bath at thermal equilibrium (mean displacement always zero)."""

    density: SpectralDensity
    temperature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "temperature", float(self.temperature))
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise ValueError(f"temperature must be finite and >= 0, got {self.temperature}")

    def spectral_density(self, omega):
        return self.density(omega)

    def thermal_factor(self, omega):
        """``coth(omega / 2T) = 1 + 2 n(omega)``; identically 1 at T = 0."""
        omega = np.asarray(omega, dtype=float)
        if self.temperature == 0:
            return np.ones_like(omega)
        return 1.0 / np.tanh(omega / (2.0 * self.temperature))


Bath = Union[DiscreteBath, SpectralBath]


@dataclass(frozen=True)
class DephasingFunctionals:
    """Lambda, phi and psi sampled on a time grid."""

    times: np.ndarray
    lam: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    sym_integral: np.ndarray = field(default=None)
    antisym_integral: np.ndarray = field(default=None)
    mean_xi: np.ndarray = field(default=None)


# --- helpers ---------------------------------------------------------------

def _grid(bath: DiscreteBath, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    return t, np.multiply.outer(t, bath.omega)


def _finish(values):
    return values[()] if values.ndim == 0 else values


def one_minus_cos(x):
    """``1 - cos x`` without cancellation at small x."""
    return 2.0 * np.sin(0.5 * np.asarray(x)) ** 2


def x_minus_sin(x):
    """``x - sin x`` with a series branch where direct subtraction cancels."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.2
    xs = x[small]
    x2 = xs * xs
    # Terms through x^13 keep the truncation below 1e-17 relative for |x| < 0.2.
    out[small] = xs * x2 / 6.0 * (
        1 - x2 / 20.0 * (1 - x2 / 42.0 * (1 - x2 / 72.0 * (1 - x2 / 110.0 * (1 - x2 / 156.0))))
    )
    xl = x[~small]
    out[~small] = xl - np.sin(xl)
    return out


def one_minus_expi(x):
    """``1 - exp(i x)`` computed as ``2 sin^2(x/2) - i sin x``."""
    x = np.asarray(x, dtype=float)
    return one_minus_cos(x) - 1j * np.sin(x)


# --- discrete bath ----------------------------------------------------------

def mean_xi(bath: DiscreteBath, t):
    """Mean bath coordinate ``2 sum_k Re(g_k beta_k exp(-i w_k t))``."""
    t, wt = _grid(bath, t)
    terms = (bath.g * bath.beta_bar) * np.exp(-1j * wt)
    return _finish(2.0 * terms.real.sum(axis=-1))


def sym_kernel(bath: DiscreteBath, tau, t=0.0):
    """Symmetric correlation ``S(t, t - tau)``.

    For Gaussian modes this is ``sum |g|^2 cos(w tau)(1 + 2n)`` and does not
    depend on ``t``. Modes with a nonzero ``anomalous`` cumulant add the
    non-stationary piece ``2 Re(g^2 M exp(-i w (2t - tau)))``.
    """
    tau, wtau = _grid(bath, tau)
    out = (bath.coupling2 * (1 + 2 * bath.nbar) * np.cos(wtau)).sum(axis=-1)
    if np.any(bath.anomalous != 0):
        phase = np.multiply.outer(2.0 * np.asarray(t, dtype=float) - tau, bath.omega)
        out = out + 2.0 * (bath.g**2 * bath.anomalous * np.exp(-1j * phase)).real.sum(axis=-1)
    return _finish(out)


def antisym_kernel(bath: DiscreteBath, tau):
    """Antisymmetric correlation ``A(t, t - tau) = -sum |g|^2 sin(w tau)``."""
    tau, wtau = _grid(bath, tau)
    return _finish(-(bath.coupling2 * np.sin(wtau)).sum(axis=-1))


def sym_integral(bath: DiscreteBath, t):
    """``int_0^t S(t, t - tau) dtau`` in closed form."""
    t, wt = _grid(bath, t)
    w = bath.omega
    out = (bath.coupling2 * (1 + 2 * bath.nbar) * np.sin(wt) / w).sum(axis=-1)
    if np.any(bath.anomalous != 0):
        # int_0^t exp(-i w (2t - tau)) dtau = (exp(-i w t) - exp(-2 i w t)) / (i w)
        kern = (np.exp(-1j * wt) - np.exp(-2j * wt)) / (1j * w)
        out = out + 2.0 * (bath.g**2 * bath.anomalous * kern).real.sum(axis=-1)
    return _finish(out)


def antisym_integral(bath: DiscreteBath, t):
    """``int_0^t A(t, t - tau) dtau = -sum |g|^2 (1 - cos w t) / w``."""
    t, wt = _grid(bath, t)
    return _finish(-(bath.coupling2 * one_minus_cos(wt) / bath.omega).sum(axis=-1))


def lambda_damping(bath: DiscreteBath, t):
    """Damping amplitude ``sum |g|^2 (1 - cos w t)(1 + 2n) / w^2``; never negative."""
    t, wt = _grid(bath, t)
    w = bath.omega
    return _finish((bath.coupling2 * (1 + 2 * bath.nbar) * one_minus_cos(wt) / w**2).sum(axis=-1))


def phi_phase(bath: DiscreteBath, t):
    """Phase ``sum |g|^2 (w t - sin w t) / w^2``; nondecreasing in t."""
    t, wt = _grid(bath, t)
    w = bath.omega
    return _finish((bath.coupling2 * x_minus_sin(wt) / w**2).sum(axis=-1))


def psi_phase(bath: DiscreteBath, t):
    """Displacement phase ``2 sum Im(conj(beta) conj(g) (1 - exp(i w t)) / w)``."""
    t, wt = _grid(bath, t)
    pref = np.conj(bath.beta_bar) * np.conj(bath.g) / bath.omega
    return _finish(2.0 * (pref * one_minus_expi(wt)).imag.sum(axis=-1))


def recurrence_time(bath: DiscreteBath) -> float:
    """``2 pi / d omega`` for the smallest spacing between distinct mode frequencies."""
    w = np.unique(bath.omega)
    if w.size < 2:
        return math.inf
    return 2 * math.pi / np.diff(w).min()


# --- spectral bath ----------------------------------------------------------

def _spectral_integral(bath: SpectralBath, t: float, integrand, small_integrand, weight: float, rtol: float):
    density = bath.density
    w_min = SMALL_OMEGA_FRACTION * density.scale
    w_max = density.upper_cutoff(weight)
    value = quadrature.gauss_legendre(small_integrand, 0.0, w_min)
    edges = [w_min] + [b for b in density.breakpoints() if w_min < b < w_max] + [w_max]
    for lo, hi in zip(edges, edges[1:]):
        panels = int(math.ceil((hi - lo) * max(t, 1e-300) / math.pi)) + 8
        part, _ = quadrature.integrate(integrand, lo, hi, rtol=rtol, atol=1e-300, panels=panels)
        value += part
    return value


def _spectral_map(func, bath, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    out = np.array([func(bath, float(x)) if x > 0 else 0.0 for x in t.ravel()]).reshape(t.shape)
    return _finish(out)


def _tail_weight(bath: SpectralBath, t: float, thermal: bool = True) -> float:
    scale = bath.density.scale
    factor = 1 + 2 * bath.temperature / scale if thermal else 1.0
    return factor * (2 + t)


def _lambda_single(bath: SpectralBath, t: float, rtol: float = 1e-10) -> float:
    J, c = bath.spectral_density, bath.thermal_factor
    return _spectral_integral(
        bath, t,
        lambda w: J(w) * c(w) * one_minus_cos(w * t) / w**2,
        lambda w: J(w) * c(w) * (0.5 * t * t),
        _tail_weight(bath, t), rtol,
    )


def _phi_single(bath: SpectralBath, t: float, rtol: float = 1e-10) -> float:
    J = bath.spectral_density
    return _spectral_integral(
        bath, t,
        lambda w: J(w) * x_minus_sin(w * t) / w**2,
        lambda w: J(w) * w * t**3 / 6.0,
        _tail_weight(bath, t, thermal=False), rtol,
    )


def _sym_integral_single(bath: SpectralBath, t: float, rtol: float = 1e-10) -> float:
    J, c = bath.spectral_density, bath.thermal_factor
    return _spectral_integral(
        bath, t,
        lambda w: J(w) * c(w) * np.sin(w * t) / w,
        lambda w: J(w) * c(w) * t,
        _tail_weight(bath, t), rtol,
    )


def _antisym_integral_single(bath: SpectralBath, t: float, rtol: float = 1e-10) -> float:
    J = bath.spectral_density
    return -_spectral_integral(
        bath, t,
        lambda w: J(w) * one_minus_cos(w * t) / w,
        lambda w: J(w) * w * t * t / 2.0,
        _tail_weight(bath, t, thermal=False), rtol,
    )


def spectral_lambda(bath: SpectralBath, t):
    """``int J(w) (1 - cos w t) coth(w / 2T) / w^2 dw`` by adaptive quadrature."""
    return _spectral_map(_lambda_single, bath, t)


def spectral_phi(bath: SpectralBath, t):
    """``int J(w) (w t - sin w t) / w^2 dw``; independent of temperature."""
    return _spectral_map(_phi_single, bath, t)


def spectral_sym_integral(bath: SpectralBath, t):
    """``int_0^t S dtau = int J(w) sin(w t) coth(w / 2T) / w dw``."""
    return _spectral_map(_sym_integral_single, bath, t)


def spectral_antisym_integral(bath: SpectralBath, t):
    """``int_0^t A dtau = -int J(w) (1 - cos w t) / w dw``."""
    return _spectral_map(_antisym_integral_single, bath, t)


def low_frequency_limit(bath: SpectralBath) -> float:
    """``lim_{w -> 0} J(w) coth(w / 2T)``, finite because J(w)/w is bounded."""
    slope = bath.density.low_frequency_slope
    if bath.temperature == 0:
        return 0.0
    return 2.0 * bath.temperature * slope


def reorganization_integral(bath: SpectralBath, rtol: float = 1e-10) -> float:
    """``int_0^inf J(w) / w dw``; raises DivergenceError if it does not exist."""
    density = bath.density
    if not math.isfinite(density.low_frequency_slope):
        raise DivergenceError("int J(w)/w dw diverges at w = 0: J(w)/w is unbounded there")
    w_max = density.upper_cutoff(1.0)
    edges = [0.0] + [b for b in density.breakpoints() if 0 < b < w_max] + [w_max]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        def integrand(w):
            w = np.asarray(w)
            out = np.empty_like(w)
            pos = w > 0
            out[pos] = density(w[pos]) / w[pos]
            out[~pos] = density.low_frequency_slope
            return out
        part, _ = quadrature.integrate(integrand, lo, hi, rtol=rtol, atol=1e-300, panels=16)
        total += part
    return total


def discretize(bath: SpectralBath, n_modes: int, omega_max: float | None = None, tail_rtol: float = 1e-6) -> DiscreteBath:
    """Equally spaced modes on ``(0, omega_max]`` with ``|g_k|^2 = J(w_k) dw``.

    Frequencies sit at panel midpoints ``(k - 1/2) dw``. The default
    ``omega_max`` drops at most ``tail_rtol`` of ``int J(w)/w dw``.
    Occupations follow the bath temperature.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if omega_max is None:
        if isinstance(bath.density, OhmicExpCutoff):
            omega_max = bath.density.omega_c * math.log(1.0 / tail_rtol)
        else:
            omega_max = bath.density.omegas[-1]
    dw = omega_max / n_modes
    w = dw * (np.arange(1, n_modes + 1) - 0.5)
    g = np.sqrt(bath.spectral_density(w) * dw)
    n = thermal_occupation(w, bath.temperature)
    return DiscreteBath(tuple(BathMode(wk, gk, nk) for wk, gk, nk in zip(w, g, n)))


# --- dispatch ---------------------------------------------------------------

def dephasing_functionals(bath: Bath, times: Sequence[float]) -> DephasingFunctionals:
    """Sample Lambda, phi, psi and the kernel integrals on ``times``."""
    times = np.asarray(times, dtype=float)
    if isinstance(bath, SpectralBath):
        zero = np.zeros_like(times)
        return DephasingFunctionals(
            times=times,
            lam=np.atleast_1d(spectral_lambda(bath, times)),
            phi=np.atleast_1d(spectral_phi(bath, times)),
            psi=zero,
            sym_integral=np.atleast_1d(spectral_sym_integral(bath, times)),
            antisym_integral=np.atleast_1d(spectral_antisym_integral(bath, times)),
            mean_xi=zero.copy(),
        )
    return DephasingFunctionals(
        times=times,
        lam=np.atleast_1d(lambda_damping(bath, times)),
        phi=np.atleast_1d(phi_phase(bath, times)),
        psi=np.atleast_1d(psi_phase(bath, times)),
        sym_integral=np.atleast_1d(sym_integral(bath, times)),
        antisym_integral=np.atleast_1d(antisym_integral(bath, times)),
        mean_xi=np.atleast_1d(mean_xi(bath, times)),
    )
