"""Scenario configuration: a TOML file with one table per concern.

Grammar (complex numbers are written as ``[re, im]`` pairs)::

    [system]
    energies  = [0.0, 1.0]          # E_n
    couplings = [1.0, -1.0]         # X_n

    [bath]
    kind = "discrete"               # or "spectral"

    [[bath.modes]]                  # discrete only, repeated per mode
    omega    = 1.0
    g        = [0.2, 0.0]
    nbar     = 0.0                  # Gaussian state (default)
    beta_bar = [0.0, 0.0]
    # state   = "mixture"           # non-Gaussian coherent mixture instead:
    # weights = [0.5, 0.5]
    # betas   = [[2.0, 0.0], [-2.0, 0.0]]

    # spectral only:
    # family = "ohmic"   alpha = 0.1   omega_c = 5.0
    # family = "tabulated"   samples = [[omega, J], ...]
    # temperature = 0.0

    [initial]
    real = [[0.5, 0.5], [0.5, 0.5]]
    imag = [[0.0, 0.0], [0.0, 0.0]]  # optional

    [time]
    t_end    = 10.0                 # grid starts at 0
    n_points = 101

    [solver]                        # optional
    rtol = 1e-10
    atol = 1e-14

    [run]
    engines     = ["exact", "tcl2"] # subset of exact, tcl2, markov, oracle
    output      = "out/reference"   # file prefix
    schrodinger = false             # optional
    threshold   = 1e-8              # optional, used by compare
    n_max       = 40                # optional Fock cutoff for the oracle
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .baths import BathMode, OhmicExpCutoff, SpectralBath, TabulatedDensity
from .errors import ConfigError
from .exact import CoherentMixture, Gaussian, ModeState, SystemSpec, validate_density_matrix

ENGINES = ("exact", "tcl2", "markov", "oracle")

ModeList = list[tuple[BathMode, ModeState]]


@dataclass
class ScenarioConfig:
    system: SystemSpec
    bath: Union[ModeList, SpectralBath]
    rho0: np.ndarray
    t_end: float
    n_points: int
    output: str
    engines: tuple[str, ...] = ("exact", "tcl2")
    rtol: float = 1e-10
    atol: float = 1e-14
    schrodinger: bool = False
    threshold: float = 1e-8
    n_max: int | None = None
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_points)

    @property
    def is_spectral(self) -> bool:
        return isinstance(self.bath, SpectralBath)


def _complex(value, where, problems):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    problems.append(f"{where}: expected a number or [re, im], got {value!r}")
    return 0j


def _number(table, key, where, problems, default=None, positive=False, nonneg=False):
    if key not in table:
        if default is None:
            problems.append(f"{where}.{key}: missing")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{where}.{key}: expected a number, got {value!r}")
        return default
    value = float(value)
    if positive and not value > 0:
        problems.append(f"{where}.{key}: must be > 0, got {value!r}")
    if nonneg and not value >= 0:
        problems.append(f"{where}.{key}: must be >= 0, got {value!r}")
    return value


def _parse_mode(raw, i, problems):
    where = f"bath.modes[{i}]"
    if not isinstance(raw, dict):
        problems.append(f"{where}: expected a table")
        return None
    before = len(problems)
    omega = _number(raw, "omega", where, problems, positive=True)
    g = _complex(raw.get("g", 0.0), f"{where}.g", problems)
    kind = raw.get("state", "gaussian")
    state = None
    if kind == "gaussian":
        nbar = _number(raw, "nbar", where, problems, default=0.0, nonneg=True)
        beta = _complex(raw.get("beta_bar", 0.0), f"{where}.beta_bar", problems)
        if len(problems) == before:
            state = Gaussian(nbar, beta)
    elif kind == "mixture":
        weights = raw.get("weights")
        betas = raw.get("betas")
        if not isinstance(weights, list) or not isinstance(betas, list):
            problems.append(f"{where}: a mixture needs 'weights' and 'betas' lists")
        else:
            betas = [_complex(b, f"{where}.betas[{j}]", problems) for j, b in enumerate(betas)]
            if len(problems) == before:
                try:
                    state = CoherentMixture(tuple(weights), tuple(betas))
                except (TypeError, ValueError) as exc:
                    problems.append(f"{where}: {exc}")
    else:
        problems.append(f"{where}.state: unknown state {kind!r} (use 'gaussian' or 'mixture')")
    if state is None or len(problems) != before:
        return None
    nbar = state.nbar if isinstance(state, Gaussian) else 0.0
    beta = state.beta_bar if isinstance(state, Gaussian) else 0j
    return BathMode(omega, g, nbar, beta), state


def _parse_bath(raw, problems):
    if not isinstance(raw, dict):
        problems.append("bath: missing table")
        return None
    kind = raw.get("kind", "discrete")
    if kind == "discrete":
        modes = raw.get("modes", [])
        if not isinstance(modes, list):
            problems.append("bath.modes: expected an array of tables")
            return None
        parsed = [_parse_mode(m, i, problems) for i, m in enumerate(modes)]
        return [p for p in parsed if p is not None] if all(p is not None for p in parsed) else None
    if kind == "spectral":
        temperature = _number(raw, "temperature", "bath", problems, default=0.0, nonneg=True)
        family = raw.get("family")
        try:
            if family == "ohmic":
                alpha = _number(raw, "alpha", "bath", problems, nonneg=True)
                omega_c = _number(raw, "omega_c", "bath", problems, positive=True)
                if alpha is None or omega_c is None:
                    return None
                density = OhmicExpCutoff(alpha, omega_c)
            elif family == "tabulated":
                samples = raw.get("samples")
                if not isinstance(samples, list) or not all(isinstance(s, list) and len(s) == 2 for s in samples):
                    problems.append("bath.samples: expected [[omega, J], ...]")
                    return None
                density = TabulatedDensity(tuple(s[0] for s in samples), tuple(s[1] for s in samples))
            else:
                problems.append(f"bath.family: unknown family {family!r} (use 'ohmic' or 'tabulated')")
                return None
            return SpectralBath(density, temperature if temperature is not None else 0.0)
        except (TypeError, ValueError) as exc:
            problems.append(f"bath: {exc}")
            return None
    problems.append(f"bath.kind: unknown kind {kind!r} (use 'discrete' or 'spectral')")
    return None


def _parse_matrix(raw, key, problems):
    value = raw.get(key)
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        problems.append(f"initial.{key}: expected a square array of numbers")
        return None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        problems.append(f"initial.{key}: expected a square array, got shape {arr.shape}")
        return None
    return arr


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a decoded config document; every problem is collected before raising."""
    problems: list[str] = []
    system = None
    sys_raw = data.get("system")
    if not isinstance(sys_raw, dict):
        problems.append("system: missing table")
    else:
        try:
            system = SystemSpec(tuple(sys_raw.get("energies", ())), tuple(sys_raw.get("couplings", ())))
        except (TypeError, ValueError) as exc:
            problems.append(f"system: {exc}")

    bath = _parse_bath(data.get("bath"), problems)

    rho0 = None
    init = data.get("initial")
    if not isinstance(init, dict) or "real" not in init:
        problems.append("initial.real: missing")
    else:
        real = _parse_matrix(init, "real", problems)
        imag = _parse_matrix(init, "imag", problems) if "imag" in init else (None if real is None else np.zeros_like(real))
        if real is not None and imag is not None:
            if real.shape != imag.shape:
                problems.append("initial: real and imag parts differ in shape")
            else:
                rho0 = real + 1j * imag
                if system is not None and rho0.shape[0] != system.dim:
                    problems.append(f"initial: matrix dimension {rho0.shape[0]} does not match system dimension {system.dim}")
                try:
                    validate_density_matrix(rho0)
                except ValueError as exc:
                    problems.append(f"initial: {exc}")

    time_raw = data.get("time") if isinstance(data.get("time"), dict) else {}
    if "time" not in data:
        problems.append("time: missing table")
    t_end = _number(time_raw, "t_end", "time", problems, positive=True)
    n_points = time_raw.get("n_points")
    if not isinstance(n_points, int) or isinstance(n_points, bool) or n_points < 2:
        problems.append(f"time.n_points: expected an integer >= 2, got {n_points!r}")

    solver = data.get("solver", {})
    rtol = _number(solver, "rtol", "solver", problems, default=1e-10, positive=True)
    atol = _number(solver, "atol", "solver", problems, default=1e-14, positive=True)

    run = data.get("run", {})
    engines = run.get("engines", ["exact", "tcl2"])
    if not isinstance(engines, list) or not engines or any(e not in ENGINES for e in engines):
        problems.append(f"run.engines: expected a non-empty subset of {list(ENGINES)}, got {engines!r}")
    elif len(set(engines)) != len(engines):
        problems.append("run.engines: duplicate engine names")
    output = run.get("output")
    if not isinstance(output, str) or not output:
        problems.append("run.output: missing output path prefix")
    schrodinger = run.get("schrodinger", False)
    if not isinstance(schrodinger, bool):
        problems.append("run.schrodinger: expected true or false")
    threshold = _number(run, "threshold", "run", problems, default=1e-8, positive=True)
    n_max = run.get("n_max")
    if n_max is not None and (not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 1):
        problems.append(f"run.n_max: expected an integer >= 1, got {n_max!r}")

    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(
        system=system,
        bath=bath,
        rho0=rho0,
        t_end=t_end,
        n_points=n_points,
        output=output,
        engines=tuple(engines),
        rtol=rtol,
        atol=atol,
        schrodinger=schrodinger,
        threshold=threshold,
        n_max=n_max,
    )


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def config_to_dict(cfg: ScenarioConfig) -> dict:
    if isinstance(cfg.bath, SpectralBath):
        bath: dict = {"kind": "spectral", "temperature": cfg.bath.temperature}
        d = cfg.bath.density
        if isinstance(d, OhmicExpCutoff):
            bath.update(family="ohmic", alpha=float(d.alpha), omega_c=float(d.omega_c))
        else:
            bath.update(family="tabulated", samples=[[w, j] for w, j in zip(d.omegas, d.values)])
    else:
        modes = []
        for mode, state in cfg.bath:
            entry = {"omega": mode.omega, "g": _pair(mode.g)}
            if isinstance(state, Gaussian):
                entry.update(nbar=state.nbar, beta_bar=_pair(state.beta_bar))
            else:
                entry.update(state="mixture", weights=list(state.weights), betas=[_pair(b) for b in state.betas])
            modes.append(entry)
        bath = {"kind": "discrete", "modes": modes}
    run = {
        "engines": list(cfg.engines),
        "output": cfg.output,
        "schrodinger": cfg.schrodinger,
        "threshold": cfg.threshold,
    }
    if cfg.n_max is not None:
        run["n_max"] = cfg.n_max
    return {
        "system": {"energies": list(cfg.system.energies), "couplings": list(cfg.system.couplings)},
        "bath": bath,
        "initial": {"real": cfg.rho0.real.tolist(), "imag": cfg.rho0.imag.tolist()},
        "time": {"t_end": cfg.t_end, "n_points": cfg.n_points},
        "solver": {"rtol": cfg.rtol, "atol": cfg.atol},
        "run": run,
    }


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))


def loads(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"not valid TOML: {exc}"]) from exc
    return parse_config(data)


def load(path: Union[str, Path]) -> ScenarioConfig:
    return loads(Path(path).read_text(encoding="utf-8"))
