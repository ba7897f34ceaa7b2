"""Periodic grid geometry, Fourier transforms and multiplier operators.

Fields live on the square torus [0, L)^2 sampled on an n x n grid.  The
spectral representation stores Fourier-series coefficients c_m such that

    f(x) = sum_m c_m exp(i xi_m . x),    xi_m = (2 pi / L) m,

with m the signed integer index in [-n/2, n/2)^2 in numpy FFT layout.
With this convention a unit plane wave is a single unit coefficient and
Parseval reads  ||f||_{L^2}^2 = (L/n)^2 sum |f|^2 = L^2 sum |c_m|^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import GridMismatch, SingularSymbol

PHYSICAL = "physical"
SPECTRAL = "spectral"


class GridSpec:
    """Geometry of a periodic n x n grid on [0, L)^2.

    Parameters
    ----------
    n : samples per axis, power of two, >= 8
    period_length : side length L > 0 (default 2*pi, which puts the
        integer modes at integer angular frequencies)
    dealias_fraction : fraction of the highest modes zeroed after
        pointwise products (default 2/3 rule)
    """

    def __init__(self, n: int, period_length: float = 2.0 * np.pi,
                 dealias_fraction: float = 2.0 / 3.0):
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {n}")
        if not period_length > 0:
            raise ValueError(f"period_length must be positive, got {period_length}")
        if not 0.0 < dealias_fraction <= 1.0:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {dealias_fraction}")
        self.n = int(n)
        self.period_length = float(period_length)
        self.dealias_fraction = float(dealias_fraction)

        L = self.period_length
        m1d = np.fft.fftfreq(n, d=1.0 / n)  # signed integer mode indices
        self.modes1, self.modes2 = np.meshgrid(m1d, m1d, indexing="ij")
        self.xi1 = (2.0 * np.pi / L) * self.modes1
        self.xi2 = (2.0 * np.pi / L) * self.modes2
        self.xi_sq = self.xi1 ** 2 + self.xi2 ** 2
        self.xi_abs = np.sqrt(self.xi_sq)
        x1d = np.arange(n) * (L / n)
        self.x1, self.x2 = np.meshgrid(x1d, x1d, indexing="ij")

        cutoff = dealias_fraction * n / 2.0
        self.dealias_mask = (np.maximum(np.abs(self.modes1),
                                        np.abs(self.modes2)) < cutoff)
        # smallest nonzero and largest resolvable angular frequency
        self.xi_min = 2.0 * np.pi / L
        self.xi_nyquist = (2.0 * np.pi / L) * (n / 2.0)
        # per-grid caches used by the LP toolkit and the integrator
        self._cache: dict = {}

    @property
    def quad_weight(self) -> float:
        """Quadrature weight (L/n)^2 of one grid cell."""
        return (self.period_length / self.n) ** 2

    def __eq__(self, other) -> bool:
        return (isinstance(other, GridSpec)
                and self.n == other.n
                and self.period_length == other.period_length
                and self.dealias_fraction == other.dealias_fraction)

    def __hash__(self):
        return hash((self.n, self.period_length, self.dealias_fraction))

    def __repr__(self):
        return (f"GridSpec(n={self.n}, period_length={self.period_length}, "
                f"dealias_fraction={self.dealias_fraction})")


@dataclass(frozen=True)
class ScalarField:
    """A sampled complex or real scalar field, physical or spectral.

    Instances are immutable; all operations return new fields.
    """

    data: np.ndarray
    representation: str
    grid: GridSpec
    value_kind: str = "complex"  # "complex" or "real"

    def __post_init__(self):
        if self.representation not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"bad representation {self.representation!r}")
        if self.value_kind not in ("complex", "real"):
            raise ValueError(f"bad value_kind {self.value_kind!r}")
        data = np.asarray(self.data, dtype=np.complex128)
        if data.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"data shape {data.shape} does not match grid n={self.grid.n}")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_physical(cls, grid: GridSpec, values,
                      value_kind: Optional[str] = None) -> "ScalarField":
        arr = np.asarray(values)
        if value_kind is None:
            value_kind = "real" if np.isrealobj(arr) else "complex"
        return cls(arr.astype(np.complex128), PHYSICAL, grid, value_kind)

    @classmethod
    def from_spectral(cls, grid: GridSpec, coeffs,
                      value_kind: str = "complex") -> "ScalarField":
        return cls(np.asarray(coeffs, dtype=np.complex128), SPECTRAL, grid, value_kind)

    @classmethod
    def zeros(cls, grid: GridSpec, representation: str = PHYSICAL,
              value_kind: str = "complex") -> "ScalarField":
        return cls(np.zeros((grid.n, grid.n), np.complex128), representation,
                   grid, value_kind)

    # -- basic queries -----------------------------------------------------

    def spectral(self) -> "ScalarField":
        return to_spectral(self) if self.representation == PHYSICAL else self

    def physical(self) -> "ScalarField":
        return to_physical(self) if self.representation == SPECTRAL else self

    def l2_norm(self) -> float:
        if self.representation == PHYSICAL:
            return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.quad_weight))
        return float(self.grid.period_length * np.sqrt(np.sum(np.abs(self.data) ** 2)))

    def mean(self) -> complex:
        if self.representation == SPECTRAL:
            return complex(self.data[0, 0])
        return complex(np.mean(self.data))

    def real_part(self) -> "ScalarField":
        return ScalarField.from_physical(self.grid, self.physical().data.real, "real")

    def imag_part(self) -> "ScalarField":
        return ScalarField.from_physical(self.grid, self.physical().data.imag, "real")

    def conj(self) -> "ScalarField":
        return ScalarField.from_physical(self.grid, np.conj(self.physical().data),
                                         self.value_kind)

    # -- arithmetic (pointwise in physical space; products NOT dealiased
    #    here, callers dealias where the model requires it) ----------------

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        a, b = _align(self, other)
        kind = "real" if self.value_kind == other.value_kind == "real" else "complex"
        return ScalarField(a.data + b.data, a.representation, self.grid, kind)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        a, b = _align(self, other)
        kind = "real" if self.value_kind == other.value_kind == "real" else "complex"
        return ScalarField(a.data - b.data, a.representation, self.grid, kind)

    def __mul__(self, other: Union["ScalarField", complex, float]) -> "ScalarField":
        if isinstance(other, ScalarField):
            _check_same_grid(self, other)
            kind = "real" if self.value_kind == other.value_kind == "real" else "complex"
            return ScalarField(self.physical().data * other.physical().data,
                               PHYSICAL, self.grid, kind)
        scalar = complex(other)
        kind = self.value_kind
        if kind == "real" and abs(scalar.imag) > 0:
            kind = "complex"
        return ScalarField(self.data * scalar, self.representation, self.grid, kind)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return self * (-1.0)


def _check_same_grid(a: ScalarField, b: ScalarField) -> None:
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")


def _align(a: ScalarField, b: ScalarField):
    """Bring two fields to a common representation (prefer a's)."""
    if a.representation == b.representation:
        return a, b
    if a.representation == PHYSICAL:
        return a, b.physical()
    return a, b.spectral()


# -- transforms ------------------------------------------------------------

def to_spectral(f: ScalarField) -> ScalarField:
    """Forward transform: physical samples -> Fourier-series coefficients."""
    if f.representation == SPECTRAL:
        return f
    coeffs = np.fft.fft2(f.data) / f.grid.n ** 2
    return ScalarField(coeffs, SPECTRAL, f.grid, f.value_kind)


def to_physical(f: ScalarField) -> ScalarField:
    """Inverse transform: coefficients -> physical samples."""
    if f.representation == PHYSICAL:
        return f
    values = np.fft.ifft2(f.data) * f.grid.n ** 2
    if f.value_kind == "real":
        values = values.real.astype(np.complex128)
    return ScalarField(values, PHYSICAL, f.grid, f.value_kind)


# -- multiplier operators --------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier xi -> complex.

    ``zero_value`` is the value assigned at xi = 0; ``None`` marks a symbol
    singular at the origin, which then requires the caller to pass an
    explicit zero-mode value when the input has nonzero mean.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    zero_value: Optional[complex]
    name: str = "symbol"
    hermitian: Optional[bool] = None  # None = decide numerically

    def table(self, grid: GridSpec, zero_value: Optional[complex] = None) -> np.ndarray:
        key = ("symtab", self.name, zero_value)
        cached = grid._cache.get(key)
        if cached is not None and self.name != "symbol":
            return cached
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.asarray(self.fn(grid.xi1, grid.xi2), dtype=np.complex128)
        zv = zero_value if zero_value is not None else self.zero_value
        if zv is not None:
            vals[0, 0] = zv
        if self.name != "symbol":
            vals.setflags(write=False)
            grid._cache[key] = vals
        return vals


def partial_deriv(j: int) -> Symbol:
    """d/dx_j, symbol i*xi_j."""
    if j not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    fn = (lambda x1, x2: 1j * x1) if j == 1 else (lambda x1, x2: 1j * x2)
    return Symbol(fn, 0.0, name=f"d{j}", hermitian=True)


def grad_abs_power(s: float) -> Symbol:
    """|nabla|^s, symbol |xi|^s; singular at 0 for s <= 0."""
    def fn(x1, x2):
        return (x1 ** 2 + x2 ** 2) ** (s / 2.0)
    return Symbol(fn, 0.0 if s > 0 else None, name=f"gradabs^{s}", hermitian=True)


def bessel_power(s: float) -> Symbol:
    """<nabla>^s, symbol (1+|xi|^2)^(s/2)."""
    def fn(x1, x2):
        return (1.0 + x1 ** 2 + x2 ** 2) ** (s / 2.0)
    return Symbol(fn, 1.0, name=f"bessel^{s}", hermitian=True)


def riesz(j: int) -> Symbol:
    """(-Lap)^{-1} d/dx_j, symbol i*xi_j/|xi|^2, zero at the origin."""
    if j not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    def fn(x1, x2):
        num = x1 if j == 1 else x2
        return 1j * num / (x1 ** 2 + x2 ** 2)
    return Symbol(fn, 0.0, name=f"riesz{j}", hermitian=True)


def inv_laplacian() -> Symbol:
    """(-Lap)^{-1}, symbol 1/|xi|^2 on mean-zero input, 0 at the origin.

    Solves (-Lap) u = f, i.e. inv_laplacian on cos(k x) gives cos(k x)/k^2.
    """
    def fn(x1, x2):
        return 1.0 / (x1 ** 2 + x2 ** 2) + 0j
    return Symbol(fn, None, name="invlap", hermitian=True)


_MEAN_TOL = 1e-13


def apply_multiplier(f: ScalarField, symbol: Union[Symbol, Callable],
                     zero_value: Optional[complex] = None) -> ScalarField:
    """Apply a Fourier multiplier to a field.

    Raises SingularSymbol when a symbol undefined at xi=0 meets a field of
    nonzero mean without an explicit ``zero_value``.
    """
    if not isinstance(symbol, Symbol):
        symbol = Symbol(symbol, None, name="symbol")
    fs = f.spectral()
    grid = f.grid
    if symbol.zero_value is None and zero_value is None:
        scale = np.max(np.abs(fs.data))
        if scale > 0 and abs(fs.data[0, 0]) > _MEAN_TOL * scale:
            raise SingularSymbol(
                f"symbol {symbol.name!r} is undefined at xi=0 but the field "
                "has nonzero mean; supply zero_value explicitly")
        zero_value = 0.0
    table = symbol.table(grid, zero_value)
    out = fs.data * table
    kind = "complex"
    if f.value_kind == "real" and _symbol_is_hermitian(symbol, table):
        kind = "real"
    return ScalarField(out, SPECTRAL, grid, kind)


def _symbol_is_hermitian(symbol: Symbol, table: np.ndarray) -> bool:
    if symbol.hermitian is not None:
        return symbol.hermitian
    flipped = table[(-np.arange(table.shape[0])) % table.shape[0], :]
    flipped = flipped[:, (-np.arange(table.shape[1])) % table.shape[1]]
    return bool(np.allclose(table, np.conj(flipped), atol=1e-12))


def dealias(f: ScalarField) -> ScalarField:
    """Zero the top dealias fraction of modes; idempotent."""
    fs = f.spectral()
    return ScalarField(fs.data * f.grid.dealias_mask, SPECTRAL, f.grid, f.value_kind)


def multiply_dealiased(a: ScalarField, b: ScalarField) -> ScalarField:
    """Pointwise product in physical space followed by dealiasing."""
    return dealias(a * b)
