"""Empirical verification harness for the harmonic-analysis inequalities.

Each catalogue entry probes one inequality: a seeded random ensemble is
drawn, both sides are computed, and the left/right ratio statistics are
reported together with a resolution-drift factor (same draws on an n and a
2n grid).  These are falsification probes with bounded-ratio statistics,
never proofs, and no claim is made about continuum constants.

Ensembles use power-law spectra |xi|^(-a) with random phases, a in
{0.5, 1, 1.5} cycling through the ensemble.  Time-dependent norms use
free-wave trajectories on an interval of length 1 sampled at 65 uniform
times (fewer for the expensive high-high cases, recorded per case).
Draws are expressed in terms of integer mode indices of the case's base
grid, so the same spectra appear verbatim on the doubled grid; the drift
factor then isolates evaluation effects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InadmissibleParameters, NotFound
from .grid import GridSpec, ScalarField, SPECTRAL
from .lp import (TRICHOTOMY_GAP, band_range, band_symbol, cube_cover,
                 square_function_sq)
from .norms import (History, s0k_norm, s_gamma_value, sobolev_norm,
                    spatial_lp, time_quad)

DEFAULT_TIME_SAMPLES = 65
POWER_LAW_EXPONENTS = (0.5, 1.0, 1.5)


# -- case and report containers -------------------------------------------


@dataclass(frozen=True)
class EstimateCase:
    estimate_id: str
    params: Tuple[Tuple[str, object], ...]
    ensemble_size: int = 8
    seed: int = 7
    n: int = 16
    period_length: float = 2.0 * math.pi

    @property
    def param_dict(self) -> Dict[str, object]:
        return dict(self.params)

    @classmethod
    def make(cls, estimate_id: str, params: Optional[dict] = None, **kw
             ) -> "EstimateCase":
        items = tuple(sorted((params or {}).items()))
        return cls(estimate_id=estimate_id, params=items, **kw)


@dataclass
class EstimateReport:
    estimate_id: str
    params: Dict[str, object]
    seed: int
    n: int
    ensemble_size: int
    ratio_max: float
    ratio_median: float
    drift_factor: float
    status: str

    def to_dict(self) -> dict:
        return {
            "id": self.estimate_id,
            "params": {k: (None if v is None else
                           (v if isinstance(v, (int, str)) else float(v)))
                       for k, v in self.params.items()},
            "seed": self.seed,
            "n": self.n,
            "ensemble_size": self.ensemble_size,
            "ratio_max": self.ratio_max,
            "ratio_median": self.ratio_median,
            "drift_factor": self.drift_factor,
            "status": self.status,
        }


# -- ensemble helpers ------------------------------------------------------


def _mode_shell(xi_min: float, lo: float, hi: float) -> List[Tuple[int, int]]:
    """Integer mode pairs with lo < |xi| <= hi, in a fixed deterministic order."""
    m_hi = int(math.ceil(hi / xi_min))
    out = []
    for m1 in range(-m_hi, m_hi + 1):
        for m2 in range(-m_hi, m_hi + 1):
            r = math.hypot(m1, m2) * xi_min
            if lo < r <= hi:
                out.append((m1, m2))
    return out


def _place(grid: GridSpec, modes: Sequence[Tuple[int, int]],
           amps: np.ndarray) -> np.ndarray:
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for (m1, m2), c in zip(modes, amps):
        coeffs[m1 % grid.n, m2 % grid.n] += c
    return coeffs


def _power_amps(rng: np.random.Generator, xi_min: float,
                modes: Sequence[Tuple[int, int]], a: float) -> np.ndarray:
    radii = np.array([math.hypot(m1, m2) * xi_min for m1, m2 in modes])
    phases = rng.uniform(0.0, 2.0 * math.pi, size=len(modes))
    return radii ** (-a) * np.exp(1j * phases)


def _draw_field(rng, grid: GridSpec, xi_min: float, lo: float, hi: float,
                a: float) -> ScalarField:
    modes = _mode_shell(xi_min, lo, hi)
    return ScalarField.from_spectral(
        grid, _place(grid, modes, _power_amps(rng, xi_min, modes, a)))


def _times(samples: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, samples)


def _free_history(grid: GridSpec, f: ScalarField, g: Optional[ScalarField],
                  times: np.ndarray) -> History:
    """cos(t|grad|) f + sin(t|grad|)/|grad| g sampled at the given times."""
    w = grid.xi_abs
    fc = f.spectral().data
    tw = times[:, None, None] * w[None]
    coeffs = np.cos(tw) * fc[None]
    if g is not None:
        gc = g.spectral().data
        with np.errstate(invalid="ignore", divide="ignore"):
            sinc = np.where(w[None] > 0.0, np.sin(tw) / np.where(w[None] > 0, w[None], 1.0),
                            times[:, None, None])
        coeffs = coeffs + sinc * gc[None]
    return History.from_coeffs(grid, times, coeffs)


def _exp_history(grid: GridSpec, f: ScalarField, times: np.ndarray) -> History:
    """e^{i t |grad|} f sampled at the given times."""
    w = grid.xi_abs
    coeffs = np.exp(1j * times[:, None, None] * w[None]) * f.spectral().data[None]
    return History.from_coeffs(grid, times, coeffs)


def _draw_wave(rng, grid, xi_min, lo, hi, a, times) -> History:
    f = _draw_field(rng, grid, xi_min, lo, hi, a)
    g = _draw_field(rng, grid, xi_min, lo, hi, a)
    return _free_history(grid, f, g, times)


def _product_history(h1: History, h2: History,
                     extra: Optional[History] = None) -> History:
    """Pointwise product trajectory (triple product when extra is given)."""
    grid = h1.grid
    n = grid.n
    phys1 = np.fft.ifft2(h1.coeffs) * n ** 2
    phys2 = np.fft.ifft2(h2.coeffs) * n ** 2
    prod = phys1 * phys2
    if extra is not None:
        prod = prod * (np.fft.ifft2(extra.coeffs) * n ** 2)
    return History.from_coeffs(grid, h1.times, np.fft.fft2(prod) / n ** 2)


def _weighted_tx_norm(h: History, q: float, weight: np.ndarray) -> float:
    """L^q in time of the spectrally weighted L^2 norm."""
    per_t = h.grid.period_length * np.sqrt(
        np.sum(weight[None] * np.abs(h.coeffs) ** 2, axis=(1, 2)))
    return time_quad(h.times, per_t, q)


def _hdot_weight(grid: GridSpec, s: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        w = grid.xi_sq ** s
    w[0, 0] = 0.0
    return w


# -- hypothesis predicates -------------------------------------------------


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InadmissibleParameters(msg)


def _check_strichartz(q: float, r: float) -> None:
    _need(2.0 <= q and 2.0 <= r, "need 2 <= q, r")
    _need(2.0 / q <= 0.5 - 1.0 / r + 1e-12, "pair (q, r) is not wave-admissible")


# -- individual estimate runners -------------------------------------------
# Each runner returns one LHS/RHS ratio per ensemble member, computed on
# the supplied grid; draws depend only on (seed, case), not the grid size.


def _run_bernstein(case: EstimateCase, grid: GridSpec, rng) -> List[float]:
    p = case.param_dict
    pexp = float(p.get("p", 4.0))
    radius = float(p.get("radius", 3.0))
    _need(2.0 <= pexp, "Bernstein needs p >= 2")
    xi_min = 2.0 * math.pi / case.period_length
    area = math.pi * radius ** 2
    ratios = []
    for i in range(case.ensemble_size):
        a = POWER_LAW_EXPONENTS[i % len(POWER_LAW_EXPONENTS)]
        f = _draw_field(rng, grid, xi_min, 0.0, radius, a)
        lhs = spatial_lp(f, pexp)
        rhs = area ** (0.5 - 1.0 / pexp) * f.l2_norm() if not math.isinf(pexp) \
            else area ** 0.5 * f.l2_norm()
        ratios.append(lhs / rhs)
    return ratios


def _run_sobolev_product(case, grid, rng) -> List[float]:
    p = case.param_dict
    b0, b1, b2 = (float(p.get(k)) for k in ("beta0", "beta1", "beta2"))
    _need(abs(b0 + b1 + b2 - 1.0) < 1e-12, "exponents must sum to 1")
    _need(max(b0, b1, b2) < 1.0, "every exponent must be below 1")
    xi_min = 2.0 * math.pi / case.period_length
    hi = 0.22 * xi_min * case.n  # products stay inside the base Nyquist range
    ratios = []
    for i in range(case.ensemble_size):
        a = POWER_LAW_EXPONENTS[i % len(POWER_LAW_EXPONENTS)]
        f = _draw_field(rng, grid, xi_min, 0.0, hi, a)
        g = _draw_field(rng, grid, xi_min, 0.0, hi, a)
        prod = f * g
        lhs = sobolev_norm(prod, -b0, homogeneous=True)
        rhs = sobolev_norm(f, b1, homogeneous=True) * sobolev_norm(g, b2, homogeneous=True)
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_simple_conv(case, grid, rng) -> List[float]:
    p = case.param_dict
    a = int(p.get("a", 3))
    pexp = float(p.get("p", 2.0))
    _need(a >= 0, "window radius must be a nonnegative integer")
    _need(1.0 <= pexp, "need p >= 1")
    ratios = []
    for _ in range(case.ensemble_size):
        b = rng.uniform(0.0, 1.0, size=41)
        window = np.array([b[max(0, k - a):k + a + 1].sum() for k in range(41)])
        if math.isinf(pexp):
            lhs, rhs = np.max(window), np.max(b)
        else:
            lhs = np.sum(window ** pexp) ** (1.0 / pexp)
            rhs = np.sum(b ** pexp) ** (1.0 / pexp)
        ratios.append(float(lhs / rhs))
    return ratios


def _run_kt_strichartz(case, grid, rng) -> List[float]:
    p = case.param_dict
    q, r = float(p["q"]), float(p["r"])
    ell, k = int(p["ell"]), int(p["k"])
    _check_strichartz(q, r)
    _need(ell <= k, "need ell <= k")
    xi_min = 2.0 * math.pi / case.period_length
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    cover = cube_cover(grid, ell, k)
    sym = band_symbol(grid, k)
    rhs_weight = (2.0 ** ((1.0 - 2.0 / q - 2.0 / r) * (ell - k))
                  * 2.0 ** ((1.0 - 1.0 / q - 2.0 / r) * k))
    ratios = []
    for i in range(case.ensemble_size):
        a = POWER_LAW_EXPONENTS[i % len(POWER_LAW_EXPONENTS)]
        f = _draw_field(rng, grid, xi_min, 2.0 ** (k - 1), 2.0 ** (k + 1), a)
        fk = ScalarField(f.spectral().data * sym, SPECTRAL, grid, "complex")
        hist = _exp_history(grid, fk, times)
        support = np.any(hist.coeffs != 0.0, axis=0)
        sq = square_function_sq(hist.coeffs, cover, support=support)
        if math.isinf(r):
            per_t = np.sqrt(np.max(sq, axis=(1, 2)))
        else:
            per_t = (np.sum(sq ** (r / 2.0), axis=(1, 2))
                     * grid.quad_weight) ** (1.0 / r)
        lhs = time_quad(times, per_t, q)
        rhs = rhs_weight * fk.l2_norm()
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_low_freq(case, grid, rng) -> List[float]:
    p = case.param_dict
    k = int(p.get("k", 0))
    _need(k <= 0, "low-frequency bound needs k <= 0")
    xi_min = 2.0 * math.pi / case.period_length
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    sym = band_symbol(grid, k)
    ratios = []
    for i in range(case.ensemble_size):
        a = POWER_LAW_EXPONENTS[i % len(POWER_LAW_EXPONENTS)]
        hist = _draw_wave(rng, grid, xi_min, 2.0 ** (k - 2), 2.0 ** (k + 2), a, times)
        band = History.from_coeffs(grid, times, hist.coeffs * sym[None])
        rhs = float(np.max(grid.period_length * np.sqrt(
            np.sum(np.abs(band.coeffs) ** 2, axis=(1, 2)))))
        if rhs > 0:
            ratios.append(s0k_norm(band, k) / rhs)
    return ratios


def _gamma_pair(case, grid, rng, times):
    """Two independent free-wave histories inside the base band range."""
    xi_min = 2.0 * math.pi / case.period_length
    hi = 0.22 * xi_min * case.n
    a = POWER_LAW_EXPONENTS[rng.integers(0, len(POWER_LAW_EXPONENTS))]
    h1 = _draw_wave(rng, grid, xi_min, 0.0, hi, a, times)
    h2 = _draw_wave(rng, grid, xi_min, 0.0, hi, a, times)
    return h1, h2


def _run_abstract_a1(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma, beta = float(p["gamma"]), float(p["beta"])
    if gamma == 1.0:
        _need(0.0 < beta < 1.0, "at gamma = 1 the order must satisfy 0 < beta < 1")
    else:
        _need(0.75 < gamma < 1.0, "need 3/4 < gamma < 1")
        _need(0.0 < beta <= 2.0 * (gamma - 0.5), "order beta out of range")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    w = _hdot_weight(grid, beta - 1.0)
    ratios = []
    for _ in range(case.ensemble_size):
        h1, h2 = _gamma_pair(case, grid, rng, times)
        prod = _product_history(h1, h2)
        lhs = _weighted_tx_norm(prod, math.inf, w)
        rhs = s_gamma_value(h1, gamma) * s_gamma_value(h2, gamma - 1.0)
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_abstract_a2(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma = float(p["gamma"])
    _need(gamma > 0.75, "need gamma > 3/4")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    w34 = _hdot_weight(grid, -0.25)  # squared weight of |grad|^(-1) in H-dot 3/4
    winv = _hdot_weight(grid, -1.0)  # square of the |grad|^(-1) multiplier
    ratios = []
    for _ in range(case.ensemble_size):
        h1, h2 = _gamma_pair(case, grid, rng, times)
        prod = _product_history(h1, h2)
        lhs1 = _weighted_tx_norm(prod, 4.0, w34)
        inv = History.from_coeffs(grid, times, prod.coeffs * np.sqrt(winv)[None])
        lhs2 = inv.lebesgue_tx(2.0, math.inf)
        rhs = s_gamma_value(h1, gamma) * s_gamma_value(h2, gamma - 1.0)
        if rhs > 0:
            ratios.append(max(lhs1, lhs2) / rhs)
    return ratios


def _run_wente_null(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma, beta = float(p["gamma"]), float(p["beta"])
    _need(0.75 < gamma < 1.75, "need 3/4 < gamma < 7/4")
    _need(0.75 <= beta <= 2.0 * (gamma - 0.5) + 0.25, "order beta out of range")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    w = _hdot_weight(grid, beta - 2.0)
    xi1, xi2 = grid.xi1, grid.xi2
    ratios = []
    for _ in range(case.ensemble_size):
        h1, h2 = _gamma_pair(case, grid, rng, times)
        n = grid.n
        p1 = np.fft.ifft2(h1.coeffs) * n ** 2
        d1h2 = np.fft.ifft2(1j * xi1[None] * h2.coeffs) * n ** 2
        d2h2 = np.fft.ifft2(1j * xi2[None] * h2.coeffs) * n ** 2
        null = (1j * xi1[None] * np.fft.fft2(p1 * d2h2)
                - 1j * xi2[None] * np.fft.fft2(p1 * d1h2)) / n ** 2
        nh = History.from_coeffs(grid, times, null)
        lhs = _weighted_tx_norm(nh, 4.0, w)
        rhs = s_gamma_value(h1, gamma) * s_gamma_value(h2, gamma - 1.0)
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_quadric(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma = float(p["gamma"])
    _need(gamma > 0.75, "need gamma > 3/4")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    weights = {s: _hdot_weight(grid, s - 1.0) for s in (0.5, 0.75, 1.0)}
    winv = _hdot_weight(grid, -1.0)  # square of the |grad|^(-1) multiplier
    ratios = []
    for _ in range(case.ensemble_size):
        hb, h1 = _gamma_pair(case, grid, rng, times)
        h2 = _gamma_pair(case, grid, rng, times)[0]
        prod = _product_history(hb, h1, extra=h2)
        lhs = max(_weighted_tx_norm(prod, math.inf, w) for w in weights.values())
        inv = History.from_coeffs(grid, times, prod.coeffs * np.sqrt(winv)[None])
        lhs = max(lhs, inv.lebesgue_tx(math.inf, math.inf))
        rhs = (hb.sobolev_t(math.inf, 0.5, homogeneous=True)
               * s_gamma_value(h1, gamma) * s_gamma_value(h2, gamma))
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_phi_bilinear(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma = float(p["gamma"])
    _need(0.75 < gamma < 1.75, "need 3/4 < gamma < 7/4")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    ratios = []
    for _ in range(case.ensemble_size):
        hb, hphi = _gamma_pair(case, grid, rng, times)
        prod = _product_history(hb, hphi)
        b_l2linf = hb.lebesgue_tx(2.0, math.inf)
        b_h34 = hb.sobolev_t(4.0, 0.75, homogeneous=True)
        lhs1 = prod.sobolev_t(2.0, gamma - 1.0)
        rhs1 = (b_l2linf + b_h34) * s_gamma_value(hphi, gamma - 1.0)
        lhs2 = prod.sobolev_t(2.0, gamma)
        b_mix = max(b_h34, hb.sobolev_t(4.0, gamma, homogeneous=True))
        rhs2 = (b_l2linf + b_mix) * s_gamma_value(hphi, gamma)
        vals = [lhs1 / rhs1 if rhs1 > 0 else 0.0,
                lhs2 / rhs2 if rhs2 > 0 else 0.0]
        if max(vals) > 0:
            ratios.append(max(vals))
    return ratios


def _run_quintic(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma = float(p["gamma"])
    _need(0.75 < gamma < 1.0, "need 3/4 < gamma < 1")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    ratios = []
    for _ in range(case.ensemble_size):
        b1, b2 = _gamma_pair(case, grid, rng, times)
        hphi = _gamma_pair(case, grid, rng, times)[0]
        prod = _product_history(b1, b2, extra=hphi)
        lhs = prod.sobolev_t(math.inf, gamma - 1.0)
        rhs = (b1.sobolev_t(math.inf, 0.5, homogeneous=True)
               * b2.sobolev_t(math.inf, 0.5, homogeneous=True)
               * s_gamma_value(hphi, gamma))
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_v_phi(case, grid, rng) -> List[float]:
    p = case.param_dict
    gamma = float(p["gamma"])
    nfac = int(p.get("N", 3))
    _need(0.75 < gamma <= 1.0, "need 3/4 < gamma <= 1")
    _need(nfac >= 1, "need at least one factor")
    if gamma < 1.0:
        _need(nfac < 1.0 + 2.0 / (1.0 - gamma), "degree too high for this gamma")
    times = _times(int(p.get("time_samples", DEFAULT_TIME_SAMPLES)))
    xi_min = 2.0 * math.pi / case.period_length
    hi = 0.6 * xi_min * case.n / nfac  # keep the product unaliased
    ratios = []
    for i in range(case.ensemble_size):
        a = POWER_LAW_EXPONENTS[i % len(POWER_LAW_EXPONENTS)]
        hists = [_draw_wave(rng, grid, xi_min, 0.0, hi, a, times)
                 for _ in range(nfac)]
        n = grid.n
        prod_phys = np.ones((len(times), n, n), dtype=np.complex128)
        for h in hists:
            prod_phys = prod_phys * (np.fft.ifft2(h.coeffs) * n ** 2)
        prod = History.from_coeffs(grid, times, np.fft.fft2(prod_phys) / n ** 2)
        lhs = prod.sobolev_t(1.0, gamma - 1.0)
        rhs = 1.0
        for h in hists:
            rhs *= s_gamma_value(h, gamma)
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _hh_pair_draw(case, grid, rng, k: int, count: int, times):
    """Two sparse band-k free waves whose mode sets contain near-opposite
    pairs, so the high-high low-output interaction is nonvacuous."""
    xi_min = 2.0 * math.pi / case.period_length
    shell = _mode_shell(xi_min, 2.0 ** k, 0.75 * 2.0 ** (k + 2))
    idx = rng.choice(len(shell), size=min(count, len(shell)), replace=False)
    modes1 = [shell[i] for i in idx]
    offsets = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    modes2 = [(-m1 + offsets[i % 4][0], -m2 + offsets[i % 4][1])
              for i, (m1, m2) in enumerate(modes1)]
    sym = band_symbol(grid, k)

    def hist_of(modes):
        amps = _power_amps(rng, xi_min, modes, 1.0)
        f = ScalarField.from_spectral(grid, _place(grid, modes, amps) * sym)
        g_amps = _power_amps(rng, xi_min, modes, 1.0)
        g = ScalarField.from_spectral(grid, _place(grid, modes, g_amps) * sym)
        return _free_history(grid, f, g, times)

    return hist_of(modes1), hist_of(modes2)


def _hh_band_products(grid, h1: History, h2: History, k: int):
    """Spectral products P_k0(h1_k h2_k) summed over HH output bands k0.

    Returns the spectral stack of sum_{k0 <= k - gap} P_k0(h1 h2)."""
    k_min, _ = band_range(grid)
    n = grid.n
    prod = np.fft.fft2((np.fft.ifft2(h1.coeffs) * n ** 2)
                       * (np.fft.ifft2(h2.coeffs) * n ** 2)) / n ** 2
    mask = np.zeros((n, n))
    for k0 in range(k_min, k - TRICHOTOMY_GAP + 1):
        mask = mask + band_symbol(grid, k0)
    return prod, mask


def _run_bilin_str(case, grid, rng) -> List[float]:
    p = case.param_dict
    q, r, sigma = float(p["q"]), float(p["r"]), float(p["sigma"])
    k = int(p.get("k", 2))
    _need(not math.isinf(r) and r < math.inf, "need r < infinity")
    _check_strichartz(q, r)
    _need(-2.0 + 4.0 / r + 4.0 / q < sigma < 0.0, "sigma out of range")
    gamma = 1.0 - 2.0 / r - 1.0 / q
    times = _times(int(p.get("time_samples", 17)))
    count = int(p.get("mode_count", 24))
    k_min, _ = band_range(grid)
    _need(k - TRICHOTOMY_GAP >= k_min, "grid cannot resolve the output band")
    wsig = _hdot_weight(grid, sigma)  # square of the |grad|^sigma multiplier
    ratios = []
    for _ in range(case.ensemble_size):
        h1, h2 = _hh_pair_draw(case, grid, rng, k, count, times)
        prod, mask = _hh_band_products(grid, h1, h2, k)
        per_band = []
        for k0 in range(k_min, k - TRICHOTOMY_GAP + 1):
            piece = prod * band_symbol(grid, k0)[None]
            sq = np.sqrt(wsig)[None] * piece  # |grad|^sigma applied spectrally
            wh = History.from_coeffs(grid, times, sq)
            per_band.append(wh.lebesgue_tx(q / 2.0, r / 2.0))
        lhs = max(per_band) if per_band else 0.0
        rhs = (2.0 ** (gamma * k) * s0k_norm(h1, k)
               * 2.0 ** (gamma * k) * s0k_norm(h2, k))
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


def _run_bilin_var_str(case, grid, rng) -> List[float]:
    p = case.param_dict
    sigma, gamma = float(p["sigma"]), float(p["gamma"])
    k = int(p.get("k", 2))
    _need(sigma > -0.5, "need sigma > -1/2")
    _need(0.75 < gamma <= 1.0, "need 3/4 < gamma <= 1")
    times = _times(int(p.get("time_samples", 17)))
    count = int(p.get("mode_count", 24))
    k_min, _ = band_range(grid)
    _need(k - TRICHOTOMY_GAP >= k_min, "grid cannot resolve the output band")
    wbes = (1.0 + grid.xi_sq) ** sigma
    ratios = []
    for _ in range(case.ensemble_size):
        h1, h2 = _hh_pair_draw(case, grid, rng, k, count, times)
        prod, mask = _hh_band_products(grid, h1, h2, k)
        summed = prod * mask[None]
        wh = History.from_coeffs(grid, times, np.sqrt(wbes)[None] * summed)
        lhs = _weighted_tx_norm(wh, 2.0, np.ones_like(wbes))
        rhs = h1.sobolev_t(4.0, 0.75, homogeneous=True) * s_gamma_value(h2, gamma)
        if rhs > 0:
            ratios.append(lhs / rhs)
    return ratios


# -- catalogue -------------------------------------------------------------


@dataclass(frozen=True)
class CatalogueEntry:
    estimate_id: str
    description: str
    param_domain: str
    runner: Callable = field(compare=False)
    default_case: EstimateCase = None


def _default_cases() -> Dict[str, "CatalogueEntry"]:
    mk = EstimateCase.make
    two_pi = 2.0 * math.pi
    entries = [
        CatalogueEntry(
            "bernstein",
            "band-limited L^p bound by |B|^(1/2-1/p) times the L^2 norm",
            "2 <= p <= inf",
            _run_bernstein,
            mk("bernstein", {"p": 4.0, "radius": 3.0}, ensemble_size=30)),
        CatalogueEntry(
            "sobolev_product",
            "product rule for homogeneous Sobolev norms",
            "beta0+beta1+beta2 = 1, max < 1",
            _run_sobolev_product,
            mk("sobolev_product",
               {"beta0": 0.25, "beta1": 0.5, "beta2": 0.25}, ensemble_size=30)),
        CatalogueEntry(
            "simple_conv",
            "window-sum sequence bound in little-l^p",
            "a >= 0 integer, 1 <= p <= inf",
            _run_simple_conv,
            mk("simple_conv", {"a": 3, "p": 2.0}, ensemble_size=30)),
        CatalogueEntry(
            "kt_strichartz",
            "cube-localized square-function Strichartz bound for free waves",
            "ell <= k, (q,r) wave-admissible",
            _run_kt_strichartz,
            mk("kt_strichartz", {"q": 4.0, "r": math.inf, "ell": 0, "k": 1},
               ensemble_size=6)),
        CatalogueEntry(
            "low_freq",
            "low-band dyadic norm controlled by sup-in-time L^2",
            "k <= 0",
            _run_low_freq,
            mk("low_freq", {"k": 0}, ensemble_size=6)),
        CatalogueEntry(
            "abstract_a1",
            "smoothed bilinear bound in sup-in-time homogeneous Sobolev",
            "3/4 < gamma < 1 and 0 < beta <= 2(gamma-1/2); gamma = 1 with 0 < beta < 1",
            _run_abstract_a1,
            mk("abstract_a1", {"gamma": 0.9, "beta": 0.5}, ensemble_size=4)),
        CatalogueEntry(
            "abstract_a2",
            "smoothed bilinear bound in mixed time-integrated norms",
            "gamma > 3/4",
            _run_abstract_a2,
            mk("abstract_a2", {"gamma": 0.9}, ensemble_size=4)),
        CatalogueEntry(
            "wente_null",
            "null-form bilinear bound of Wente type",
            "3/4 < gamma < 7/4, 3/4 <= beta <= 2(gamma-1/2)+1/4",
            _run_wente_null,
            mk("wente_null", {"gamma": 0.9, "beta": 0.8}, ensemble_size=4)),
        CatalogueEntry(
            "quadric",
            "smoothed trilinear bound for the quadratic gauge source",
            "gamma > 3/4",
            _run_quadric,
            mk("quadric", {"gamma": 0.9}, ensemble_size=4)),
        CatalogueEntry(
            "phi_bilinear",
            "bilinear source bounds in time-integrated Sobolev norms",
            "3/4 < gamma < 7/4",
            _run_phi_bilinear,
            mk("phi_bilinear", {"gamma": 0.9}, ensemble_size=4)),
        CatalogueEntry(
            "quintic",
            "trilinear bound for the squared-potential term",
            "3/4 < gamma < 1",
            _run_quintic,
            mk("quintic", {"gamma": 0.9}, ensemble_size=4)),
        CatalogueEntry(
            "v_phi",
            "polynomial self-interaction bound",
            "3/4 < gamma <= 1, 1 <= N < 1 + 2/(1-gamma) for gamma < 1",
            _run_v_phi,
            mk("v_phi", {"gamma": 0.9, "N": 3}, ensemble_size=4)),
        CatalogueEntry(
            "bilin_str",
            "high-high double-Strichartz bilinear bound",
            "r < inf, (q,r) wave-admissible, -2+4/r+4/q < sigma < 0",
            _run_bilin_str,
            mk("bilin_str", {"q": 8.0, "r": 8.0, "sigma": -0.5, "k": 2},
               ensemble_size=2, n=128, period_length=8.0 * math.pi)),
        CatalogueEntry(
            "bilin_var_str",
            "summed high-high bilinear bound in L^2 of space-time",
            "sigma > -1/2",
            _run_bilin_var_str,
            mk("bilin_var_str", {"sigma": 0.25, "gamma": 0.9, "k": 2},
               ensemble_size=2, n=128, period_length=8.0 * math.pi)),
    ]
    return {e.estimate_id: e for e in entries}


_CATALOGUE = _default_cases()


def list_estimates() -> Dict[str, CatalogueEntry]:
    """The full estimate catalogue keyed by identifier."""
    return dict(_CATALOGUE)


def get_entry(estimate_id: str) -> CatalogueEntry:
    entry = _CATALOGUE.get(estimate_id)
    if entry is None:
        raise NotFound(f"unknown estimate identifier {estimate_id!r}")
    return entry


def default_cases() -> List[EstimateCase]:
    return [e.default_case for e in _CATALOGUE.values()]


UNSTABLE_DRIFT = 4.0


def run_estimate(case: EstimateCase) -> EstimateReport:
    """Run one estimate case at resolution n and 2n and report ratio
    statistics plus the resolution-drift factor of the max ratio."""
    entry = get_entry(case.estimate_id)
    results = []
    for n in (case.n, 2 * case.n):
        grid = GridSpec(n, case.period_length)
        rng = np.random.default_rng(case.seed)
        ratios = entry.runner(case, grid, rng)
        results.append([float(v) for v in ratios])
    base, fine = results
    if not base or not all(math.isfinite(v) for v in base + fine):
        status = "degenerate"
        rmax = rmed = drift = math.nan
    else:
        rmax = max(base)
        rmed = float(np.median(base))
        fmax = max(fine) if fine else rmax
        if rmax > 0 and fmax > 0:
            drift = max(fmax / rmax, rmax / fmax)
        else:
            drift = 1.0 if rmax == fmax else math.inf
        status = "ok" if drift < UNSTABLE_DRIFT else "unstable"
    return EstimateReport(
        estimate_id=case.estimate_id,
        params=case.param_dict,
        seed=case.seed,
        n=case.n,
        ensemble_size=case.ensemble_size,
        ratio_max=rmax,
        ratio_median=rmed,
        drift_factor=drift,
        status=status,
    )
