"""Littlewood-Paley projections, frequency-cube covers, and the product
trichotomy.

Dyadic indexing is anchored at angular frequency: the band k collects modes
with |xi| near 2^k.  With the default period 2*pi the integer grid modes sit
at integer frequencies, so the k <= 0 / k > 0 split is meaningful.

The cutoff profile chi is a fixed smooth bump built from exp(-1/t)
mollification: chi(r) = 1 for r <= 2, 0 for r >= 4, monotone in between.
All constants quoted in the docs refer to this profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .errors import BandOutOfRange, GridMismatch
from .grid import GridSpec, ScalarField, SPECTRAL

# Offset used in the product-trichotomy index sets.
TRICHOTOMY_GAP = 5

# Maximum cubes emitted per cover, as a multiple of 4^(k-ell).  The lattice
# construction below stays under ~60 for ell << k.
CUBE_COUNT_FACTOR = 100

# Almost-orthogonality constants of the separable partition of unity:
# sum_c chi_c(xi)^2 lies in [ALMOST_ORTHO_LO, ALMOST_ORTHO_HI] on the annulus.
ALMOST_ORTHO_LO = 0.25
ALMOST_ORTHO_HI = 1.0


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C^infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=np.float64)
    lo = np.where(t > 0.0, t, 1.0)
    hi = np.where(t < 1.0, 1.0 - t, 1.0)
    a = np.where(t > 0.0, np.exp(-1.0 / lo), 0.0)
    b = np.where(t < 1.0, np.exp(-1.0 / hi), 0.0)
    with np.errstate(invalid="ignore"):
        out = a / (a + b)
    out = np.where(t <= 0.0, 0.0, out)
    out = np.where(t >= 1.0, 1.0, out)
    return out


def chi_profile(r) -> np.ndarray:
    """Radial bump: 1 on [0,2], 0 on [4,inf), smooth monotone in between."""
    r = np.abs(np.asarray(r, dtype=np.float64))
    return 1.0 - _smoothstep((r - 2.0) / 2.0)


def _tent(t: np.ndarray) -> np.ndarray:
    """Smooth tent supported in (-1,1) with sum_j tent(t - j) = 1."""
    t = np.asarray(t, dtype=np.float64)
    return _smoothstep(t + 1.0) - _smoothstep(t)


def band_range(grid: GridSpec) -> Tuple[int, int]:
    """Resolvable dyadic band indices [k_min, k_max].

    k_max is the largest k with 2^(k+2) <= Nyquist.  k_min is chosen one
    step below the lowest nonzero frequency so that chi_{k_min - 1}
    vanishes on every nonzero mode and the band sum telescopes to the
    identity on mean-zero band-limited fields.
    """
    k_max = int(math.floor(math.log2(grid.xi_nyquist))) - 2
    while 2.0 ** (k_max + 3) <= grid.xi_nyquist:
        k_max += 1
    k_min = int(math.floor(math.log2(grid.xi_min))) - 1
    return k_min, k_max


def _chi_k_table(grid: GridSpec, k: int) -> np.ndarray:
    key = ("lp_chi", k)
    tab = grid._cache.get(key)
    if tab is None:
        tab = chi_profile(grid.xi_abs / 2.0 ** k)
        tab.setflags(write=False)
        grid._cache[key] = tab
    return tab


def band_symbol(grid: GridSpec, k: int) -> np.ndarray:
    """Symbol of P_k on the grid: chi_k - chi_{k-1}."""
    key = ("lp_band", k)
    tab = grid._cache.get(key)
    if tab is None:
        tab = _chi_k_table(grid, k) - _chi_k_table(grid, k - 1)
        tab.setflags(write=False)
        grid._cache[key] = tab
    return tab


def _check_band(grid: GridSpec, k: int) -> None:
    if 2.0 ** (k + 2) > grid.xi_nyquist * (1.0 + 1e-12):
        raise BandOutOfRange(
            f"band k={k} needs frequencies up to 2^(k+2)={2.0 ** (k + 2)} "
            f"beyond Nyquist {grid.xi_nyquist}")


def lp_project(f: ScalarField, k: int) -> ScalarField:
    """Band projection P_k f."""
    _check_band(f.grid, k)
    fs = f.spectral()
    return ScalarField(fs.data * band_symbol(f.grid, k), SPECTRAL, f.grid,
                       f.value_kind)


def lp_project_leq(f: ScalarField, k: int) -> ScalarField:
    """Low-pass projection P_{<=k} f (includes the zero mode)."""
    _check_band(f.grid, k)
    fs = f.spectral()
    return ScalarField(fs.data * _chi_k_table(f.grid, k), SPECTRAL, f.grid,
                       f.value_kind)


@dataclass(frozen=True)
class CubeCover:
    """Partition of unity on the annulus 2^(k-2) <= |xi| <= 2^(k+2) by
    smooth cutoffs supported on lattice squares of side 2^(ell+1).

    ``symbols`` has shape (count, n, n); symbols sum to 1 on every grid
    frequency of the annulus.  For ell = k the cover is the singleton sharp
    indicator of the annulus.
    """

    ell: int
    k: int
    grid: GridSpec
    centers: Tuple[Tuple[float, float], ...]
    symbols: np.ndarray = field(repr=False)
    annulus_mask: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.centers)

    def square_sum_weight(self) -> np.ndarray:
        """sum_c chi_c(xi)^2 tabulated on the grid."""
        return np.sum(self.symbols ** 2, axis=0)


def cube_cover(grid: GridSpec, ell: int, k: int) -> CubeCover:
    """Build the (ell, k) frequency-cube cover on a grid (memoized)."""
    if ell > k:
        raise BandOutOfRange(f"cube cover needs ell <= k, got ell={ell}, k={k}")
    _check_band(grid, k)
    key = ("cube_cover", ell, k)
    cached = grid._cache.get(key)
    if cached is not None:
        return cached

    r_lo, r_hi = 2.0 ** (k - 2), 2.0 ** (k + 2)
    annulus = (grid.xi_abs >= r_lo) & (grid.xi_abs <= r_hi)

    if ell == k:
        sym = annulus.astype(np.float64)[None, :, :]
        cover = CubeCover(ell, k, grid, ((0.0, 0.0),), sym, annulus)
        grid._cache[key] = cover
        return cover

    h = 2.0 ** ell  # lattice pitch; each cutoff supported in a 2h square
    # lattice indices whose support square can meet the annulus
    j_hi = int(math.ceil(r_hi / h)) + 1
    js = np.arange(-j_hi, j_hi + 1)
    # 1d cutoff tables theta(xi/h - j) for every candidate j, both axes
    t1 = _tent(grid.xi1[:, 0][None, :] / h - js[:, None])  # (J, n)
    t2 = _tent(grid.xi2[0, :][None, :] / h - js[:, None])
    # keep a cube iff its symbol is nonzero somewhere on the annulus
    ann1 = np.any(annulus, axis=1)
    ann2 = np.any(annulus, axis=0)
    centers: List[Tuple[float, float]] = []
    syms: List[np.ndarray] = []
    nz1 = [i for i in range(len(js)) if np.any(t1[i] > 0.0)]
    nz2 = [i for i in range(len(js)) if np.any(t2[i] > 0.0)]
    for i1 in nz1:
        row = t1[i1]
        for i2 in nz2:
            col = t2[i2]
            sym = row[:, None] * col[None, :]
            if np.any(sym[annulus] > 0.0):
                centers.append((js[i1] * h, js[i2] * h))
                syms.append(sym)
    count = len(syms)
    limit = CUBE_COUNT_FACTOR * 4 ** (k - ell)
    if count > limit:
        raise BandOutOfRange(
            f"cube cover ({ell},{k}) emitted {count} cubes, above the "
            f"construction bound {limit}")
    symbols = np.stack(syms) if syms else np.zeros((0, grid.n, grid.n))
    # restrict to the annulus so the partition property is exact there and
    # each P_c acts only on annulus modes
    symbols = symbols * annulus[None, :, :]
    symbols.setflags(write=False)
    cover = CubeCover(ell, k, grid, tuple(centers), symbols, annulus)
    grid._cache[key] = cover
    return cover


def square_function_sq(coeffs: np.ndarray, cover: CubeCover,
                       support: Optional[np.ndarray] = None,
                       chunk_elems: int = 20_000_000) -> np.ndarray:
    """sum_c |P_c f|^2 in physical space for a stack of spectral fields.

    ``coeffs`` has shape (..., n, n) (spectral, same normalization as
    ScalarField).  ``support`` optionally marks the modes where any of the
    fields can be nonzero; cubes that never touch it are skipped, which is
    exact since they contribute nothing.
    """
    grid = cover.grid
    n = grid.n
    stack = np.asarray(coeffs, dtype=np.complex128)
    lead = stack.shape[:-2]
    out = np.zeros(lead + (n, n), dtype=np.float64)
    syms = cover.symbols
    if support is not None:
        keep = np.array([np.any((s != 0.0) & support) for s in syms])
        syms = syms[keep]
    if syms.shape[0] == 0:
        return out
    # fast path: every cube holds at most one grid frequency per axis, so
    # each P_c f is a single plane wave and the square sum is x-independent
    if 2.0 ** (cover.ell + 1) <= grid.xi_min * (1.0 + 1e-12) and cover.ell != cover.k:
        w = np.sum(syms ** 2, axis=0)
        tot = np.sum((np.abs(stack) ** 2) * w, axis=(-2, -1))
        # plane wave c*e^(i xi x) has |.|^2 = |c|^2 * n^4 / n^4 ... with our
        # coefficient normalization |P_c f(x)|^2 = |chi_c * fhat|^2
        return out + tot[..., None, None]
    t = int(np.prod(lead)) if lead else 1
    flat = stack.reshape(t, n, n)
    oflat = out.reshape(t, n, n)
    step = max(1, chunk_elems // (t * n * n))
    for i0 in range(0, syms.shape[0], step):
        block = syms[i0:i0 + step]  # (c, n, n)
        prod = block[:, None, :, :] * flat[None, :, :, :]
        fields = np.fft.ifft2(prod) * n ** 2
        oflat += np.sum(np.abs(fields) ** 2, axis=0)
    return out


def band_decompose(f: ScalarField) -> Tuple[List[int], List[ScalarField]]:
    """All resolvable band projections of a field, plus the mean part.

    Returns (indices, parts) where indices[0] is None-like sentinel for the
    mean; concretely the mean part is tagged with an index far below k_min
    so trichotomy classification treats it as lowest frequency.
    """
    grid = f.grid
    k_min, k_max = band_range(grid)
    fs = f.spectral()
    ks: List[int] = []
    parts: List[ScalarField] = []
    mean = np.zeros_like(fs.data)
    mean[0, 0] = fs.data[0, 0]
    if abs(fs.data[0, 0]) != 0.0:
        ks.append(k_min - TRICHOTOMY_GAP - 10)
        parts.append(ScalarField(mean, SPECTRAL, grid, f.value_kind))
    for k in range(k_min, k_max + 1):
        ks.append(k)
        parts.append(lp_project(fs, k))
    return ks, parts


def trichotomy_split(f: ScalarField, g: ScalarField
                     ) -> Tuple[ScalarField, ScalarField, ScalarField]:
    """Split f*g into low-high, high-low and high-high interaction sums.

    Each band pair (k1, k2) is assigned to exactly one class (the paper's
    index sets overlap; here ties go LH then HL so the three parts
    reconstruct the product exactly):
      LH: k1 <= k2 - TRICHOTOMY_GAP
      HL: k2 <= k1 - TRICHOTOMY_GAP
      HH: |k1 - k2| < TRICHOTOMY_GAP
    """
    if f.grid != g.grid:
        raise GridMismatch("trichotomy_split needs a common grid")
    grid = f.grid
    ks_f, parts_f = band_decompose(f)
    ks_g, parts_g = band_decompose(g)
    lh = np.zeros((grid.n, grid.n), dtype=np.complex128)
    hl = np.zeros_like(lh)
    hh = np.zeros_like(lh)
    phys_f = [p.physical().data for p in parts_f]
    phys_g = [p.physical().data for p in parts_g]
    for i, k1 in enumerate(ks_f):
        for j, k2 in enumerate(ks_g):
            prod = phys_f[i] * phys_g[j]
            if k1 <= k2 - TRICHOTOMY_GAP:
                lh += prod
            elif k2 <= k1 - TRICHOTOMY_GAP:
                hl += prod
            else:
                hh += prod
    kind = "real" if f.value_kind == g.value_kind == "real" else "complex"
    mk = lambda d: ScalarField(d, "physical", grid, kind)
    return mk(lh), mk(hl), mk(hh)


def hh_pair_sum(f: ScalarField, g: ScalarField, symbol_fn,
                k0_weight_fn) -> ScalarField:
    """sum over HH triples (k0,k1,k2) of weight(k0) * P_k0(f_k1 * g_k2).

    Helper for the high-high bilinear estimates: k0 runs over resolvable
    bands at least TRICHOTOMY_GAP below min(k1,k2); |k1-k2| <= gap.
    ``k0_weight_fn(k0)`` scales each output band (e.g. 2^(sigma*k0+)).
    """
    if f.grid != g.grid:
        raise GridMismatch("hh_pair_sum needs a common grid")
    grid = f.grid
    k_min, k_max = band_range(grid)
    ks_f, parts_f = band_decompose(f)
    ks_g, parts_g = band_decompose(g)
    acc = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for i, k1 in enumerate(ks_f):
        if k1 < k_min:
            continue
        for j, k2 in enumerate(ks_g):
            if k2 < k_min or abs(k1 - k2) > TRICHOTOMY_GAP:
                continue
            prod = None
            for k0 in range(k_min, min(k1, k2) - TRICHOTOMY_GAP + 1):
                if prod is None:
                    prod = np.fft.fft2(parts_f[i].physical().data
                                       * parts_g[j].physical().data) / grid.n ** 2
                piece = prod * band_symbol(grid, k0)
                acc += k0_weight_fn(k0) * (symbol_fn(grid) * piece
                                           if symbol_fn is not None else piece)
    return ScalarField(acc, SPECTRAL, grid, "complex")
