"""Brute-force reference: system plus truncated oscillator bath, propagated unitarily.

The total Hamiltonian ``H = H_s + X xi + sum_k w_k b_k^dagger b_k`` is built
as an explicit matrix in ``system (x) mode_1 (x) ... (x) mode_K`` order with
every mode truncated at ``n_max`` photons. Because ``X`` and ``H_s`` share an
eigenbasis, ``H`` is block diagonal in the system index; each block is
diagonalized once and reused for every grid time. Nothing from the
closed-form derivation is used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .baths import BathMode
from .errors import DimensionError, TruncationError
from .exact import CoherenceTrajectory, CoherentMixture, Gaussian, ModeState, SystemSpec, _check_rho, _times

MAX_MODES = 3
DEFAULT_MAX_DIM = 200_000
DEFAULT_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class TruncatedBathSpec:
    modes: tuple[BathMode, ...]
    n_max: int
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")
        if len(self.modes) > MAX_MODES:
            raise ValueError(f"the Fock oracle supports at most {MAX_MODES} modes, got {len(self.modes)}")

    @property
    def bath_dim(self) -> int:
        return (self.n_max + 1) ** len(self.modes)


def annihilation(n_max: int) -> sp.csr_matrix:
    """Truncated ``b`` on ``n_max + 1`` number states."""
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr", dtype=complex)


def _embed(op, k: int, n_modes: int, n_max: int):
    eye = sp.identity(n_max + 1, format="csr", dtype=complex)
    factors = [op if j == k else eye for j in range(n_modes)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors, sp.identity(1, format="csr", dtype=complex))


def bath_operators(spec: TruncatedBathSpec):
    """Return ``(H_b, xi)`` on the truncated bath space."""
    dim = spec.bath_dim
    hb = sp.csr_matrix((dim, dim), dtype=complex)
    xi = sp.csr_matrix((dim, dim), dtype=complex)
    b = annihilation(spec.n_max)
    for k, mode in enumerate(spec.modes):
        bk = _embed(b, k, len(spec.modes), spec.n_max)
        hb = hb + mode.omega * (bk.conj().T @ bk)
        xi = xi + mode.g * bk + np.conj(mode.g) * bk.conj().T
    return hb.tocsr(), xi.tocsr()


def build_hamiltonian(system: SystemSpec, spec: TruncatedBathSpec) -> sp.csr_matrix:
    """Total Hamiltonian as a sparse hermitian matrix of size ``d * (n_max + 1)^K``."""
    total = system.dim * spec.bath_dim
    if total > spec.max_dim:
        raise DimensionError(
            f"Hilbert space dimension {total} exceeds the limit {spec.max_dim} "
            f"(d={system.dim}, {len(spec.modes)} modes, n_max={spec.n_max})"
        )
    hb, xi = bath_operators(spec)
    eye_b = sp.identity(spec.bath_dim, format="csr", dtype=complex)
    h = (
        sp.kron(sp.diags(system.E.astype(complex)), eye_b)
        + sp.kron(sp.identity(system.dim, dtype=complex), hb)
        + sp.kron(sp.diags(system.X.astype(complex)), xi)
    )
    return h.tocsr()


def _coherent_vector(beta: complex, dim: int) -> np.ndarray:
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-0.5 * abs(beta) ** 2)
    for m in range(1, dim):
        c[m] = c[m - 1] * beta / math.sqrt(m)
    return c


def _full_state(state: ModeState, dim: int) -> np.ndarray:
    """Mode density matrix on ``dim`` levels, computed inside a padded space."""
    if isinstance(state, CoherentMixture):
        rho = np.zeros((dim, dim), dtype=complex)
        for w, beta in zip(state.weights, state.betas):
            c = _coherent_vector(beta, dim)
            rho += w * np.outer(c, c.conj())
        return rho
    pad = dim + 40 + int(4 * abs(state.beta_bar) ** 2)
    n = state.nbar
    levels = np.arange(pad)
    if n == 0:
        pops = (levels == 0).astype(float)
    else:
        pops = (n / (1 + n)) ** levels / (1 + n)
    b = annihilation(pad - 1).toarray()
    disp = scipy.linalg.expm(state.beta_bar * b.conj().T - np.conj(state.beta_bar) * b)
    rho = (disp * pops[None, :]) @ disp.conj().T
    return rho[:dim, :dim]


def tail_population(state: ModeState, n_max: int) -> float:
    """Population above ``n_max`` photons that truncation would discard."""
    return float(max(0.0, 1.0 - np.trace(_full_state(state, n_max + 1)).real))


def required_cutoff(state: ModeState, tail_tol: float = DEFAULT_TAIL_TOL, limit: int = 2000) -> int:
    """Smallest ``n_max`` with discarded population below ``tail_tol``."""
    hi = 4
    while tail_population(state, hi) >= tail_tol:
        hi *= 2
        if hi > limit:
            raise TruncationError(f"no cutoff below {limit} reaches tail population {tail_tol:g}")
    lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_population(state, mid) < tail_tol:
            hi = mid
        else:
            lo = mid
    return max(hi, 1)


def prepare_bath_state(state: ModeState, n_max: int, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Truncated single-mode density matrix; raises TruncationError if the tail is too heavy."""
    rho = _full_state(state, n_max + 1)
    tail = 1.0 - np.trace(rho).real
    if tail >= tail_tol:
        need = required_cutoff(state, tail_tol)
        raise TruncationError(
            f"n_max={n_max} discards population {tail:.3e} >= {tail_tol:g}; need n_max >= {need}",
            required_cutoff=need,
        )
    return rho


def oracle_cutoff(system: SystemSpec, modes: Sequence[tuple[BathMode, ModeState]], tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Cutoff that keeps the tail criterion during the whole evolution.

    The coupling displaces mode k by at most ``2 |g_k| max|X| / w_k``; the
    cutoff is taken for each state pushed out by that amount.
    """
    xmax = float(np.max(np.abs(system.X)))
    need = 1
    for mode, state in modes:
        push = 2 * abs(mode.g) * xmax / mode.omega
        if isinstance(state, Gaussian):
            probe = [Gaussian(state.nbar, abs(state.beta_bar) + push)]
        else:
            probe = [Gaussian(0.0, abs(b) + push) for b in state.betas]
        need = max([need] + [required_cutoff(s, tail_tol) for s in probe])
    return need


class BlockPropagator:
    """Eigen-decomposition of each system block ``<m|H|m>`` of a pure-dephasing Hamiltonian."""

    def __init__(self, hamiltonian, dim: int, block_tol: float = 1e-14):
        h = sp.csr_matrix(hamiltonian)
        size = h.shape[0]
        if size % dim:
            raise ValueError(f"Hamiltonian size {size} is not a multiple of the system dimension {dim}")
        self.dim = dim
        self.bath_dim = size // dim
        nb = self.bath_dim
        coo = h.tocoo()
        coupled = (coo.row // nb) != (coo.col // nb)
        if np.any(np.abs(coo.data[coupled]) > block_tol):
            raise ValueError("Hamiltonian couples different system eigenstates; not a pure-dephasing model")
        self.values = []
        self.vectors = []
        for m in range(dim):
            block = h[m * nb:(m + 1) * nb, m * nb:(m + 1) * nb].toarray()
            herm = np.max(np.abs(block - block.conj().T)) if block.size else 0.0
            if herm > block_tol * max(1.0, np.max(np.abs(block))):
                raise ValueError(f"block {m} of the Hamiltonian is not hermitian ({herm:.2e})")
            w, v = np.linalg.eigh(block)
            self.values.append(w)
            self.vectors.append(v)

    def block_unitary(self, m: int, t: float) -> np.ndarray:
        v = self.vectors[m]
        return (v * np.exp(-1j * self.values[m] * t)[None, :]) @ v.conj().T

    def total_state(self, rho0: np.ndarray, rho_bath: np.ndarray, t: float) -> np.ndarray:
        """Full ``U(t) (rho0 (x) rho_b) U(t)^dagger`` as a dense matrix."""
        nb = self.bath_dim
        us = [self.block_unitary(m, t) for m in range(self.dim)]
        out = np.zeros((self.dim * nb, self.dim * nb), dtype=complex)
        for m in range(self.dim):
            left = us[m] @ rho_bath
            for n in range(self.dim):
                out[m * nb:(m + 1) * nb, n * nb:(n + 1) * nb] = rho0[m, n] * left @ us[n].conj().T
        return out

    def overlaps(self, rho_bath: np.ndarray, times: np.ndarray) -> np.ndarray:
        """``tr(U_m(t) rho_b U_n(t)^dagger)`` for all (m, n), shape (T, d, d)."""
        d = self.dim
        out = np.empty((times.size, d, d), dtype=complex)
        phases = [np.exp(-1j * np.multiply.outer(times, w)) for w in self.values]
        for m in range(d):
            vm = self.vectors[m]
            for n in range(d):
                vn = self.vectors[n]
                kernel = (vn.conj().T @ vm) * (vm.conj().T @ rho_bath @ vn).T
                out[:, m, n] = np.sum((phases[n].conj() @ kernel) * phases[m], axis=1)
        return out


def partial_trace_bath(total: np.ndarray, dim: int) -> np.ndarray:
    """Trace out everything after the first ``dim``-level factor."""
    nb = total.shape[0] // dim
    return np.trace(total.reshape(dim, nb, dim, nb), axis1=1, axis2=3)


def bath_density(states: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, states, np.ones((1, 1), dtype=complex))


def propagate_and_trace(hamiltonian, system: SystemSpec, rho0, bath_states: Sequence[np.ndarray], times) -> CoherenceTrajectory:
    """Evolve ``rho0 (x) rho_b`` under ``hamiltonian``, trace out the bath.

    ``bath_states`` are the truncated single-mode density matrices in the
    same order as the modes used to build ``hamiltonian``. The result is
    returned in the interaction picture, i.e. with the free phases
    ``exp(-i (E_m - E_n) t)`` removed.
    """
    rho0 = _check_rho(system, rho0)
    times = _times(times)
    prop = BlockPropagator(hamiltonian, system.dim)
    rho_b = bath_density(bath_states)
    if rho_b.shape[0] != prop.bath_dim:
        raise ValueError(f"bath state dimension {rho_b.shape[0]} does not match Hamiltonian ({prop.bath_dim})")
    reduced = prop.overlaps(rho_b, times) * rho0[None]
    e = system.E
    strip = np.exp(1j * np.multiply.outer(times, e[:, None] - e[None, :]))
    return CoherenceTrajectory(times, reduced * strip)


def oracle_trajectory(
    system: SystemSpec,
    modes: Sequence[tuple[BathMode, ModeState]],
    rho0,
    times,
    n_max: int | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_dim: int = DEFAULT_MAX_DIM,
) -> CoherenceTrajectory:
    """Convenience wrapper: pick the cutoff, build everything, propagate."""
    modes = list(modes)
    if n_max is None:
        n_max = oracle_cutoff(system, modes, tail_tol)
    spec = TruncatedBathSpec(tuple(m for m, _ in modes), n_max, max_dim)
    h = build_hamiltonian(system, spec)
    states = [prepare_bath_state(s, n_max, tail_tol) for _, s in modes]
    return propagate_and_trace(h, system, rho0, states, times)
