"""Flat key=value run configuration.

The file format is one ``key = value`` pair per line, ``#`` comments, blank
lines ignored.  Keys are namespaced with dots (``grid.n``, ``step.dt``).
Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .grid import GridSpec, ScalarField
from .integrator import (QUAD_MIDPOINT, QUAD_TRAPEZOID, SCHEME_RK4,
                         SCHEME_TWISTED, StepConfig)
from .model import (CshState, PotentialSpec, fourier_modes, gaussian_bump,
                    make_state, vortex_like, zero_state)

GENERATORS = ("zero", "gaussian", "vortex", "fourier_random", "snapshot")

_KNOWN_KEYS = {
    "grid.n", "grid.length", "grid.dealias_fraction",
    "potential.m", "potential.v_coeffs", "potential.alpha",
    "sign_sigma",
    "init.generator", "init.amplitude", "init.width", "init.winding",
    "init.core_radius", "init.max_mode", "init.velocity_factor",
    "init.snapshot",
    "step.dt", "step.scheme", "step.picard_max", "step.picard_tol",
    "step.quadrature", "step.delta0_guard",
    "t_end", "diag_every", "snapshot_every", "out_dir", "seed",
    "norms.gamma", "convergence.levels",
}


def parse_flat_file(path: str) -> Dict[str, str]:
    """Parse a flat key=value file into a string-to-string map."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    pairs: Dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in pairs:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            pairs[key] = value
    return pairs


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected integer, got {value!r}") from exc


def _to_float(key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected number, got {value!r}") from exc
    if not math.isfinite(out):
        raise ConfigError(f"{key}: value must be finite")
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for a single evolution run."""

    n: int = 64
    length: float = 2.0 * math.pi
    dealias_fraction: float = 2.0 / 3.0
    m: float = 0.0
    v_coeffs: Tuple[float, ...] = ()
    alpha: Optional[float] = None
    sign_sigma: int = 1
    generator: str = "gaussian"
    amplitude: float = 0.5
    width: float = 0.5
    winding: int = 1
    core_radius: float = 0.5
    max_mode: int = 3
    velocity_factor: float = 0.0
    snapshot_path: Optional[str] = None
    dt: float = 1e-3
    scheme: str = SCHEME_TWISTED
    picard_max: int = 8
    picard_tol: float = 1e-12
    quadrature: str = QUAD_TRAPEZOID
    delta0_guard: float = 10.0
    t_end: float = 1.0
    diag_every: int = 1
    snapshot_every: int = 0
    out_dir: str = "out"
    seed: int = 7
    gamma: float = 0.9
    convergence_levels: int = 4

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigError(f"init.generator must be one of {GENERATORS}")
        if self.generator == "snapshot" and not self.snapshot_path:
            raise ConfigError("init.generator=snapshot requires init.snapshot")
        if self.sign_sigma not in (-1, 1):
            raise ConfigError("sign_sigma must be +1 or -1")
        if self.scheme not in (SCHEME_TWISTED, SCHEME_RK4):
            raise ConfigError(f"unknown step.scheme {self.scheme!r}")
        if self.quadrature not in (QUAD_TRAPEZOID, QUAD_MIDPOINT):
            raise ConfigError(f"unknown step.quadrature {self.quadrature!r}")
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ConfigError("step.dt and t_end must be positive")
        if self.diag_every < 1 or self.snapshot_every < 0:
            raise ConfigError("diag_every must be >= 1, snapshot_every >= 0")
        if self.convergence_levels < 2:
            raise ConfigError("convergence.levels must be >= 2")

    # -- factories ----------------------------------------------------------

    def grid(self) -> GridSpec:
        try:
            return GridSpec(self.n, self.length, self.dealias_fraction)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def potential(self) -> PotentialSpec:
        try:
            return PotentialSpec(self.m, self.v_coeffs, self.alpha)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def step_config(self, dt: Optional[float] = None) -> StepConfig:
        try:
            return StepConfig(dt=self.dt if dt is None else dt,
                              scheme=self.scheme,
                              picard_max=self.picard_max,
                              picard_tol=self.picard_tol,
                              quadrature=self.quadrature,
                              sign_sigma=self.sign_sigma,
                              delta0_guard=self.delta0_guard)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def initial_state(self) -> CshState:
        grid = self.grid()
        if self.generator == "snapshot":
            from .snapshot import read_snapshot
            return read_snapshot(self.snapshot_path, self.dealias_fraction)
        if self.generator == "zero":
            return zero_state(grid, sign_sigma=self.sign_sigma)
        if self.generator == "gaussian":
            phi = gaussian_bump(grid, amplitude=self.amplitude,
                                width=self.width)
        elif self.generator == "vortex":
            phi = vortex_like(grid, winding=self.winding,
                              core_radius=self.core_radius)
            phi = self.amplitude * phi
        else:  # fourier_random
            rng = np.random.default_rng(self.seed)
            modes = []
            for m1 in range(-self.max_mode, self.max_mode + 1):
                for m2 in range(-self.max_mode, self.max_mode + 1):
                    mag = rng.standard_normal() + 1j * rng.standard_normal()
                    modes.append((m1, m2, self.amplitude * mag))
            phi = fourier_modes(grid, modes)
        u = (self.velocity_factor * 1j) * phi if self.velocity_factor else \
            ScalarField.zeros(grid)
        return make_state(phi, u, sign_sigma=self.sign_sigma)

    # -- serialization ------------------------------------------------------

    def to_flat_dict(self) -> Dict[str, str]:
        out = {
            "grid.n": str(self.n),
            "grid.length": repr(self.length),
            "grid.dealias_fraction": repr(self.dealias_fraction),
            "potential.m": repr(self.m),
            "potential.v_coeffs": ",".join(repr(c) for c in self.v_coeffs),
            "sign_sigma": str(self.sign_sigma),
            "init.generator": self.generator,
            "init.amplitude": repr(self.amplitude),
            "init.width": repr(self.width),
            "init.winding": str(self.winding),
            "init.core_radius": repr(self.core_radius),
            "init.max_mode": str(self.max_mode),
            "init.velocity_factor": repr(self.velocity_factor),
            "step.dt": repr(self.dt),
            "step.scheme": self.scheme,
            "step.picard_max": str(self.picard_max),
            "step.picard_tol": repr(self.picard_tol),
            "step.quadrature": self.quadrature,
            "step.delta0_guard": repr(self.delta0_guard),
            "t_end": repr(self.t_end),
            "diag_every": str(self.diag_every),
            "snapshot_every": str(self.snapshot_every),
            "out_dir": self.out_dir,
            "seed": str(self.seed),
            "norms.gamma": repr(self.gamma),
            "convergence.levels": str(self.convergence_levels),
        }
        if self.alpha is not None:
            out["potential.alpha"] = repr(self.alpha)
        if self.snapshot_path is not None:
            out["init.snapshot"] = self.snapshot_path
        return out


def config_from_pairs(pairs: Dict[str, str]) -> RunConfig:
    unknown = sorted(set(pairs) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kw: dict = {}

    def take(key, conv, dest):
        if key in pairs:
            kw[dest] = conv(key, pairs[key])

    take("grid.n", _to_int, "n")
    take("grid.length", _to_float, "length")
    take("grid.dealias_fraction", _to_float, "dealias_fraction")
    take("potential.m", _to_float, "m")
    if "potential.v_coeffs" in pairs:
        text = pairs["potential.v_coeffs"].strip()
        if text:
            kw["v_coeffs"] = tuple(_to_float("potential.v_coeffs", p)
                                   for p in text.split(","))
        else:
            kw["v_coeffs"] = ()
    take("potential.alpha", _to_float, "alpha")
    take("sign_sigma", _to_int, "sign_sigma")
    if "init.generator" in pairs:
        kw["generator"] = pairs["init.generator"]
    take("init.amplitude", _to_float, "amplitude")
    take("init.width", _to_float, "width")
    take("init.winding", _to_int, "winding")
    take("init.core_radius", _to_float, "core_radius")
    take("init.max_mode", _to_int, "max_mode")
    take("init.velocity_factor", _to_float, "velocity_factor")
    if "init.snapshot" in pairs:
        kw["snapshot_path"] = pairs["init.snapshot"]
    take("step.dt", _to_float, "dt")
    if "step.scheme" in pairs:
        kw["scheme"] = pairs["step.scheme"]
    take("step.picard_max", _to_int, "picard_max")
    take("step.picard_tol", _to_float, "picard_tol")
    if "step.quadrature" in pairs:
        kw["quadrature"] = pairs["step.quadrature"]
    take("step.delta0_guard", _to_float, "delta0_guard")
    take("t_end", _to_float, "t_end")
    take("diag_every", _to_int, "diag_every")
    take("snapshot_every", _to_int, "snapshot_every")
    if "out_dir" in pairs:
        kw["out_dir"] = pairs["out_dir"]
    take("seed", _to_int, "seed")
    take("norms.gamma", _to_float, "gamma")
    take("convergence.levels", _to_int, "convergence_levels")
    return RunConfig(**kw)


def load_config(path: str) -> RunConfig:
    return config_from_pairs(parse_flat_file(path))


def with_overrides(cfg: RunConfig, out_dir: Optional[str] = None,
                   seed: Optional[int] = None) -> RunConfig:
    updates = {}
    if out_dir is not None:
        updates["out_dir"] = out_dir
    if seed is not None:
        updates["seed"] = seed
    return replace(cfg, **updates) if updates else cfg
