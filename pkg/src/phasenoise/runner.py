"""Scenario orchestration and the on-disk formats.

Trajectory files are CSV with a header ``t,re_rho_0_0,im_rho_0_0,...``
(row-major over (m, n)), every float written with 17 significant digits
and LF line endings. Reports are ``key: value`` lines ending in
``pass: true|false``. All files are written atomically.
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from . import baths, cumulants, exact, fock, tcl
from .config import ScenarioConfig
from .errors import PhaseNoiseError, UnsupportedModelError
from .exact import CoherenceTrajectory, Gaussian

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def atomic_write(path: PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv(header: list[str], rows: Iterable[Iterable[float]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def trajectory_header(dim: int) -> list[str]:
    cols = ["t"]
    for m in range(dim):
        for n in range(dim):
            cols += [f"re_rho_{m}_{n}", f"im_rho_{m}_{n}"]
    return cols


def trajectory_csv(traj: CoherenceTrajectory) -> str:
    flat = traj.rho.reshape(traj.times.size, -1)
    parts = np.empty((traj.times.size, 1 + 2 * flat.shape[1]))
    parts[:, 0] = traj.times
    parts[:, 1::2] = flat.real
    parts[:, 2::2] = flat.imag
    return _csv(trajectory_header(traj.rho.shape[1]), parts)


def read_trajectory(path: PathLike) -> CoherenceTrajectory:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n_el = (len(header) - 1) // 2
    dim = int(round(np.sqrt(n_el)))
    if header[0] != "t" or dim * dim != n_el or header != trajectory_header(dim):
        raise ValueError(f"{path}: not a trajectory file (unexpected header)")
    rho = (data[:, 1::2] + 1j * data[:, 2::2]).reshape(-1, dim, dim)
    return CoherenceTrajectory(data[:, 0], rho)


# --- engines ----------------------------------------------------------------

def _modes(cfg: ScenarioConfig):
    if cfg.is_spectral:
        return None
    return list(cfg.bath)


def kernel_bath(cfg: ScenarioConfig):
    """Bath used for kernels and TCL2: the spectral bath or the moment-matched modes."""
    if cfg.is_spectral:
        return cfg.bath
    return exact.gaussian_bath(cfg.bath)


def run_engine(cfg: ScenarioConfig, engine: str) -> CoherenceTrajectory:
    times = cfg.times
    modes = _modes(cfg)
    if engine == "exact":
        if modes is None:
            return exact.propagate_exact_gaussian(cfg.system, cfg.bath, cfg.rho0, times)
        if all(isinstance(s, Gaussian) for _, s in modes):
            return exact.propagate_exact_gaussian(cfg.system, exact.gaussian_bath(modes), cfg.rho0, times)
        return exact.propagate_exact_charfn(cfg.system, modes, cfg.rho0, times)
    if engine == "tcl2":
        return tcl.integrate_tcl2(cfg.system, kernel_bath(cfg), cfg.rho0, times, cfg.rtol, cfg.atol)
    if engine == "markov":
        rates = tcl.markov_rates(kernel_bath(cfg))
        return tcl.integrate_bloch_redfield(cfg.system, rates, cfg.rho0, times)
    if engine == "oracle":
        if modes is None:
            raise UnsupportedModelError("unsupported-model: the Fock oracle needs a discrete bath")
        return fock.oracle_trajectory(cfg.system, modes, cfg.rho0, times, n_max=cfg.n_max)
    raise ValueError(f"unknown engine {engine!r}")


def kernels_csv(cfg: ScenarioConfig) -> str:
    f = baths.dephasing_functionals(kernel_bath(cfg), cfg.times)
    header = ["t", "sym_integral", "antisym_integral", "mean_xi", "lambda", "phi", "psi"]
    rows = zip(f.times, f.sym_integral, f.antisym_integral, f.mean_xi, f.lam, f.phi, f.psi)
    return _csv(header, rows)


@dataclass
class RunResult:
    files: dict[str, Path] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def output_path(cfg: ScenarioConfig, name: str, suffix: str = ".csv") -> Path:
    return Path(f"{cfg.output}_{name}{suffix}")


def write_kernels(cfg: ScenarioConfig) -> Path:
    return atomic_write(output_path(cfg, "kernels"), kernels_csv(cfg))


def run(cfg: ScenarioConfig) -> RunResult:
    """Run every selected engine; a failing engine is recorded and the rest continue."""
    result = RunResult()
    result.files["kernels"] = write_kernels(cfg)
    for engine in cfg.engines:
        try:
            traj = run_engine(cfg, engine)
        except PhaseNoiseError as exc:
            log.warning("engine %s failed: %s", engine, exc)
            result.errors[engine] = str(exc)
            continue
        if cfg.schrodinger:
            traj = exact.to_schrodinger(traj, cfg.system)
        result.files[engine] = atomic_write(output_path(cfg, engine), trajectory_csv(traj))
    lines = []
    for engine in cfg.engines:
        status = f"error: {result.errors[engine]}" if engine in result.errors else "ok"
        lines.append(f"engine.{engine}: {status}")
    lines.append(f"success: {str(result.ok).lower()}")
    result.files["summary"] = atomic_write(output_path(cfg, "summary", ".txt"), "\n".join(lines) + "\n")
    return result


# --- comparison ---------------------------------------------------------------

class GridMismatchError(ValueError):
    pass


@dataclass
class ComparisonReport:
    files: list[str]
    threshold: float
    deviations: dict[tuple[int, int], tuple[float, float]]

    @property
    def max_deviation(self) -> float:
        return max((d for d, _ in self.deviations.values()), default=0.0)

    @property
    def worst_element(self) -> tuple[int, int]:
        return max(self.deviations, key=lambda k: self.deviations[k][0])

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.threshold

    def to_text(self) -> str:
        lines = [f"file_{i}: {name}" for i, name in enumerate(self.files)]
        lines.append(f"threshold: {fmt(self.threshold)}")
        for (m, n), (dev, t) in sorted(self.deviations.items()):
            lines.append(f"element_{m}_{n}.max_deviation: {fmt(dev)}")
            lines.append(f"element_{m}_{n}.time_of_max: {fmt(t)}")
        m, n = self.worst_element
        lines.append(f"max_deviation: {fmt(self.max_deviation)}")
        lines.append(f"worst_element: {m},{n}")
        lines.append(f"pass: {str(self.passed).lower()}")
        return "\n".join(lines) + "\n"


def compare_trajectories(trajs: list[CoherenceTrajectory], names: list[str], threshold: float) -> ComparisonReport:
    if len(trajs) < 2:
        raise ValueError("compare needs at least two trajectory files")
    ref = trajs[0]
    for name, other in zip(names[1:], trajs[1:]):
        if other.rho.shape[1:] != ref.rho.shape[1:]:
            raise GridMismatchError(f"{name}: system dimension differs from {names[0]}")
        if other.times.size != ref.times.size or np.any(other.times != ref.times):
            k = min(other.times.size, ref.times.size)
            diff = np.flatnonzero(other.times[:k] != ref.times[:k])
            idx = int(diff[0]) if diff.size else k
            mine = fmt(other.times[idx]) if idx < other.times.size else "<missing>"
            theirs = fmt(ref.times[idx]) if idx < ref.times.size else "<missing>"
            raise GridMismatchError(
                f"{name}: time grid differs from {names[0]} first at t = {theirs} (row {idx + 1}; {name} has t = {mine})"
            )
    dim = ref.rho.shape[1]
    deviations = {}
    for m in range(dim):
        for n in range(dim):
            dev = np.zeros(ref.times.size)
            for other in trajs[1:]:
                dev = np.maximum(dev, np.abs(other.rho[:, m, n] - ref.rho[:, m, n]))
            i = int(np.argmax(dev))
            deviations[(m, n)] = (float(dev[i]), float(ref.times[i]))
    return ComparisonReport(list(names), threshold, deviations)


def compare(paths: list[PathLike], threshold: float = 1e-8, report_path: PathLike | None = None) -> ComparisonReport:
    trajs = [read_trajectory(p) for p in paths]
    report = compare_trajectories(trajs, [str(p) for p in paths], threshold)
    if report_path is not None:
        atomic_write(report_path, report.to_text())
    return report


# --- cumulants -----------------------------------------------------------------

def cumulants_csv(cfg: ScenarioConfig, m: int, n: int, orders: int = 4) -> str:
    modes = _modes(cfg)
    if modes is None:
        raise UnsupportedModelError("unsupported-model: cumulant analysis needs a discrete bath")
    d = cfg.system.dim
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError(f"element ({m}, {n}) outside a {d}-level system")
    times = cfg.times
    exact_log = cumulants.log_coherence_exact(cfg.system, modes, m, n, times)
    header = ["t"]
    for k in range(1, orders + 1):
        header += [f"re_order_{k}", f"im_order_{k}"]
    header += ["re_exact_log", "im_exact_log", "re_tcl2_log", "im_tcl2_log"]
    rows = []
    for t, lg in zip(times, exact_log):
        kappa = cumulants.cumulants(cfg.system, modes, m, n, float(t), orders)
        contrib = [k / math.factorial(i + 1) for i, k in enumerate(kappa)]
        row = [t]
        for c in contrib:
            row += [c.real, c.imag]
        tcl2_log = contrib[0] + contrib[1]
        row += [lg.real, lg.imag, tcl2_log.real, tcl2_log.imag]
        rows.append(row)
    return _csv(header, rows)


def write_cumulants(cfg: ScenarioConfig, m: int, n: int, orders: int = 4) -> Path:
    return atomic_write(output_path(cfg, f"cumulants_{m}_{n}"), cumulants_csv(cfg, m, n, orders))
