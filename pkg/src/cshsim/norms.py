"""Sobolev norms and the space-time dyadic norms built on cube covers.

Time norms of sampled trajectories use composite trapezoidal quadrature for
finite exponents and a max over samples for L^infinity in time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyTrajectory
from .grid import GridSpec, ScalarField
from .lp import band_range, band_symbol, cube_cover, square_function_sq


def sobolev_norm(f: ScalarField, s: float, homogeneous: bool = False) -> float:
    """H^s (or homogeneous, zero mode excluded) norm, computed spectrally."""
    fs = f.spectral()
    grid = f.grid
    c2 = np.abs(fs.data) ** 2
    if homogeneous:
        with np.errstate(divide="ignore"):
            w = grid.xi_sq ** s
        w[0, 0] = 0.0
    else:
        w = (1.0 + grid.xi_sq) ** s
    return float(grid.period_length * np.sqrt(np.sum(w * c2)))


def spatial_lp(f: ScalarField, r: float) -> float:
    """L^r norm over the torus; r = inf gives the max over samples."""
    vals = np.abs(f.physical().data)
    if math.isinf(r):
        return float(np.max(vals))
    return float((np.sum(vals ** r) * f.grid.quad_weight) ** (1.0 / r))


def time_quad(times: np.ndarray, vals: np.ndarray, q: float) -> float:
    """L^q norm in time of sampled values; trapezoid for finite q."""
    vals = np.asarray(vals, dtype=np.float64)
    if math.isinf(q):
        return float(np.max(vals))
    return float(np.trapz(vals ** q, np.asarray(times)) ** (1.0 / q))


class History:
    """A uniformly sampled field history: times plus spectral coefficients.

    ``coeffs`` has shape (T, n, n) in the grid's spectral normalization.
    """

    def __init__(self, times: Sequence[float], fields: Sequence[ScalarField]):
        if len(fields) == 0:
            raise EmptyTrajectory("history holds no samples")
        if len(times) != len(fields):
            raise ValueError("times and fields length mismatch")
        self.grid: GridSpec = fields[0].grid
        self.times = np.asarray(times, dtype=np.float64)
        self.coeffs = np.stack([f.spectral().data for f in fields])

    @classmethod
    def from_coeffs(cls, grid: GridSpec, times, coeffs) -> "History":
        obj = cls.__new__(cls)
        obj.grid = grid
        obj.times = np.asarray(times, dtype=np.float64)
        obj.coeffs = np.asarray(coeffs, dtype=np.complex128)
        if obj.coeffs.shape[0] == 0:
            raise EmptyTrajectory("history holds no samples")
        return obj

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def field(self, i: int) -> ScalarField:
        return ScalarField.from_spectral(self.grid, self.coeffs[i])

    def lebesgue_tx(self, q: float, r: float) -> float:
        """L^q in time of the spatial L^r norm."""
        per_t = np.array([spatial_lp(self.field(i), r) for i in range(len(self))])
        return time_quad(self.times, per_t, q)

    def sobolev_t(self, q: float, s: float, homogeneous: bool = False) -> float:
        """L^q in time of the spatial H^s (or homogeneous) norm."""
        grid = self.grid
        if homogeneous:
            with np.errstate(divide="ignore"):
                w = grid.xi_sq ** s
            w[0, 0] = 0.0
        else:
            w = (1.0 + grid.xi_sq) ** s
        per_t = grid.period_length * np.sqrt(
            np.sum(w[None] * np.abs(self.coeffs) ** 2, axis=(1, 2)))
        return time_quad(self.times, per_t, q)


def _as_history(traj) -> History:
    if isinstance(traj, History):
        return traj
    if hasattr(traj, "phi_history"):
        return traj.phi_history()
    raise TypeError(f"cannot interpret {type(traj).__name__} as a field history")


def s0k_detail(traj, k: int) -> Tuple[float, int]:
    """The dyadic building-block norm of band k, squared pieces combined.

    Returns (value, attained_ell) where attained_ell is the fine scale at
    which the cube-square-function supremum is reached (truncated below at
    the lattice scale).
    """
    hist = _as_history(traj)
    grid = hist.grid
    sym = band_symbol(grid, k)
    band = hist.coeffs * sym[None]
    ell_floor, _ = band_range(grid)
    # L^infinity in time of the band L^2 norm
    l2s = grid.period_length * np.sqrt(np.sum(np.abs(band) ** 2, axis=(1, 2)))
    term_inf = float(np.max(l2s)) ** 2
    if np.max(l2s) == 0.0:
        return 0.0, k
    support = np.any(band != 0.0, axis=0)
    best = -1.0
    best_ell = k
    for ell in range(ell_floor, k + 1):
        cover = cube_cover(grid, ell, k)
        sq = square_function_sq(band, cover, support=support)
        sup_x = np.sqrt(np.max(sq, axis=(1, 2)))
        l4t = time_quad(hist.times, sup_x, 4.0)
        val = 2.0 ** (-(ell - k)) * 2.0 ** (-1.5 * k) * l4t ** 2
        if val > best:
            best = val
            best_ell = ell
    return math.sqrt(term_inf + max(best, 0.0)), best_ell


def s0k_norm(traj, k: int) -> float:
    return s0k_detail(traj, k)[0]


@dataclass
class TrajectoryNormReport:
    """Band-by-band breakdown of the aggregate dyadic space-time norm."""

    gamma: float
    band_values: Dict[int, float]
    attained_ell: Dict[int, int]
    aggregate: float
    quadrature: str = "trapezoid"
    samples: int = 0
    interval: Tuple[float, float] = (0.0, 0.0)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "bands": {str(k): v for k, v in sorted(self.band_values.items())},
            "attained_ell": {str(k): v for k, v in sorted(self.attained_ell.items())},
            "aggregate": self.aggregate,
            "quadrature": self.quadrature,
            "samples": self.samples,
            "interval": list(self.interval),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def s_gamma_norm(traj, gamma: float) -> TrajectoryNormReport:
    """Aggregate norm (sum_k 4^(gamma k+) S0_k^2)^(1/2) over resolvable bands."""
    hist = _as_history(traj)
    k_min, k_max = band_range(hist.grid)
    bands: Dict[int, float] = {}
    attained: Dict[int, int] = {}
    total = 0.0
    for k in range(k_min, k_max + 1):
        val, ell = s0k_detail(hist, k)
        bands[k] = val
        attained[k] = ell
        total += 2.0 ** (2.0 * gamma * max(k, 0)) * val ** 2
    return TrajectoryNormReport(
        gamma=gamma,
        band_values=bands,
        attained_ell=attained,
        aggregate=math.sqrt(total),
        samples=len(hist),
        interval=(float(hist.times[0]), float(hist.times[-1])),
    )


def s_gamma_value(traj, gamma: float) -> float:
    return s_gamma_norm(traj, gamma).aggregate
