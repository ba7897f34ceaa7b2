"""State container, self-interaction potential, elliptic gauge solves,
null-form evaluation, gauge transforms, and initial-data generators.

The gauge sector is solved hierarchically: the spatial potentials a1, a2
come from (phi, u) alone; a0 = a01 + a02 then uses phi and the already
solved a1, a2.  All gauge potentials are pinned to zero spatial mean,
which fixes the residual gauge freedom on the torus.

A single sign sigma multiplies the gauge-sector right-hand sides; the
shipped default sigma = +1 is the sign under which the curl constraint
residual stays at integrator-truncation scale during evolution (the other
sign produces an O(1) residual; see the consistency experiment in the
acceptance tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import GridMismatch
from .grid import (GridSpec, ScalarField, apply_multiplier, dealias,
                   multiply_dealiased, partial_deriv, riesz)
from .norms import History

DEFAULT_SIGMA = 1

# self-dual sextic case: V(r) = r(1-r)^2/16 has V'(r)=(1-r)(1-3r)/16; the
# classical quartic normalization used here is V(r) = r(1-r)/16.
SELF_DUAL_COEFFS = (1.0 / 16.0, -1.0 / 16.0)


@dataclass(frozen=True)
class PotentialSpec:
    """Mass term and polynomial self-interaction V(r) = sum_j c_j r^j.

    ``alpha`` is an optional lower-bound witness for V(r) >= -alpha^2 r,
    used by the a-priori monitor; None means unverified.
    """

    m: float = 0.0
    v_coeffs: Tuple[float, ...] = ()
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"mass must be nonnegative, got {self.m}")
        object.__setattr__(self, "v_coeffs", tuple(float(c) for c in self.v_coeffs))
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    def v(self, r):
        """V(r); no constant term, so V(0) = 0."""
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(r)
        for c in reversed(self.v_coeffs):
            out = (out + c) * r
        return out

    def v_prime(self, r):
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(r)
        for j in range(len(self.v_coeffs), 0, -1):
            out = out * r + j * self.v_coeffs[j - 1]
        return out

    def check_alpha(self, r_max: float = 4.0, samples: int = 4097,
                    tol: float = 1e-12) -> bool:
        """Dense-sampling check of V(r) + alpha^2 r >= 0 on [0, r_max].

        A necessary check, not a proof.
        """
        if self.alpha is None:
            return False
        r = np.linspace(0.0, r_max, samples)
        return bool(np.min(self.v(r) + self.alpha ** 2 * r) >= -tol)

    def fit_alpha(self, r_max: float = 4.0, samples: int = 4097) -> float:
        """Smallest alpha (on the sample grid) with V(r) + alpha^2 r >= 0."""
        r = np.linspace(0.0, r_max, samples)[1:]
        a2 = max(0.0, float(np.max(-self.v(r) / r)))
        return math.sqrt(a2)


def self_dual_potential(m: float = 0.0) -> PotentialSpec:
    pot = PotentialSpec(m=m, v_coeffs=SELF_DUAL_COEFFS)
    return replace(pot, alpha=pot.fit_alpha())


def eval_w(phi: ScalarField, pot: PotentialSpec) -> ScalarField:
    """W(phi) = phi * V'(|phi|^2), evaluated pointwise then dealiased."""
    p = phi.physical()
    w = p.data * pot.v_prime(np.abs(p.data) ** 2)
    return dealias(ScalarField.from_physical(phi.grid, w, "complex"))


# -- elliptic gauge solves -------------------------------------------------


def _imag_product(a: ScalarField, b: ScalarField) -> ScalarField:
    """Im(a * conj(b)) as a dealiased real field."""
    pa, pb = a.physical(), b.physical()
    vals = np.imag(pa.data * np.conj(pb.data))
    return dealias(ScalarField.from_physical(a.grid, vals, "real"))


def coulomb_initial_data(f: ScalarField, g: ScalarField
                         ) -> Tuple[ScalarField, ScalarField]:
    """Unique mean-zero divergence-free (a1, a2) with curl a = Im(f conj g).

    a1 = (-Lap)^{-1} d2 Im(f conj g),  a2 = -(-Lap)^{-1} d1 Im(f conj g).
    """
    if f.grid != g.grid:
        raise GridMismatch("initial data fields live on different grids")
    rho = _imag_product(f, g)
    a1 = apply_multiplier(rho, riesz(2))
    a2 = -1.0 * apply_multiplier(rho, riesz(1))
    return a1, a2


def solve_spatial_potentials(phi: ScalarField, u: ScalarField,
                             sign_sigma: int = DEFAULT_SIGMA
                             ) -> Tuple[ScalarField, ScalarField]:
    """Solve the spatial gauge potentials from rho = Im(phi conj u).

    By construction div a = 0 exactly and curl a = sigma * rho.
    """
    if phi.grid != u.grid:
        raise GridMismatch("phi and u live on different grids")
    rho = _imag_product(phi, u)
    a1 = float(sign_sigma) * apply_multiplier(rho, riesz(2))
    a2 = float(-sign_sigma) * apply_multiplier(rho, riesz(1))
    return a1, a2


def solve_a0(phi: ScalarField, a1: ScalarField, a2: ScalarField,
             sign_sigma: int = DEFAULT_SIGMA
             ) -> Tuple[ScalarField, ScalarField, ScalarField]:
    """Solve the temporal potential a0 = a01 + a02 given a1, a2.

    a01 inverts  Lap a01 = -d1 Im(phi conj(d2 phi)) + d2 Im(phi conj(d1 phi)),
    a02 inverts  Lap a02 = -d1 (a2 |phi|^2) + d2 (a1 |phi|^2).
    Returns (a0, a01, a02), all mean-zero real fields.
    """
    for other in (a1, a2):
        if phi.grid != other.grid:
            raise GridMismatch("gauge solve fields live on different grids")
    d1phi = apply_multiplier(phi, partial_deriv(1))
    d2phi = apply_multiplier(phi, partial_deriv(2))
    n1 = _imag_product(phi, d1phi)
    n2 = _imag_product(phi, d2phi)
    a01 = float(sign_sigma) * (apply_multiplier(n2, riesz(1))
                               - apply_multiplier(n1, riesz(2)))
    p = phi.physical()
    mod2 = ScalarField.from_physical(phi.grid, np.abs(p.data) ** 2, "real")
    q1 = multiply_dealiased(a1, mod2)
    q2 = multiply_dealiased(a2, mod2)
    a02 = apply_multiplier(q2, riesz(1)) - apply_multiplier(q1, riesz(2))
    a0 = a01 + a02
    return a0, a01, a02


# -- state and trajectory --------------------------------------------------


@dataclass(frozen=True)
class CshState:
    """Full dynamical state: matter fields plus derived gauge caches.

    ``u`` is the covariant time derivative of phi.  The gauge fields are
    caches recomputed from (phi, u) by the hierarchical solves; they are
    carried so diagnostics and steppers avoid redundant solves.
    """

    t: float
    phi: ScalarField
    u: ScalarField
    a0: ScalarField
    a1: ScalarField
    a2: ScalarField
    sign_sigma: int = DEFAULT_SIGMA
    step_index: int = 0
    picard_iters: int = 0
    picard_residual: float = 0.0


def make_state(phi: ScalarField, u: ScalarField, t: float = 0.0,
               sign_sigma: int = DEFAULT_SIGMA, **meta) -> CshState:
    """Assemble a state, running the hierarchical gauge solves."""
    a1, a2 = solve_spatial_potentials(phi, u, sign_sigma)
    a0, _, _ = solve_a0(phi, a1, a2, sign_sigma)
    return CshState(t=t, phi=phi, u=u, a0=a0, a1=a1, a2=a2,
                    sign_sigma=sign_sigma, **meta)


def zero_state(grid: GridSpec, t: float = 0.0,
               sign_sigma: int = DEFAULT_SIGMA) -> CshState:
    z = ScalarField.zeros(grid)
    zr = ScalarField.zeros(grid, value_kind="real")
    return CshState(t=t, phi=z, u=z, a0=zr, a1=zr, a2=zr, sign_sigma=sign_sigma)


class Trajectory:
    """Uniformly sampled sequence of states with optional diagnostics rows."""

    def __init__(self, states: Sequence[CshState], dt_sample: float,
                 rows: Optional[list] = None):
        self.states: List[CshState] = list(states)
        self.dt_sample = float(dt_sample)
        self.rows = rows if rows is not None else []

    def __len__(self) -> int:
        return len(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def grid(self) -> GridSpec:
        return self.states[0].phi.grid

    def append(self, state: CshState) -> None:
        self.states.append(state)

    def phi_history(self) -> History:
        return History(self.times, [s.phi for s in self.states])

    def u_history(self) -> History:
        return History(self.times, [s.u for s in self.states])


# -- null structure and gauge transform ------------------------------------


def null_form_pair(phi: ScalarField, psi: ScalarField
                   ) -> Tuple[ScalarField, ScalarField]:
    """Both sides of the antisymmetric-derivative identity
    d1(phi d2 psi) - d2(phi d1 psi) = -d1(d2 phi psi) + d2(d1 phi psi),
    computed independently with identical dealiasing.
    """
    if phi.grid != psi.grid:
        raise GridMismatch("null form fields live on different grids")
    d1, d2 = partial_deriv(1), partial_deriv(2)
    lhs = (apply_multiplier(multiply_dealiased(phi, apply_multiplier(psi, d2)), d1)
           - apply_multiplier(multiply_dealiased(phi, apply_multiplier(psi, d1)), d2))
    rhs = (-1.0 * apply_multiplier(multiply_dealiased(apply_multiplier(phi, d2), psi), d1)
           + apply_multiplier(multiply_dealiased(apply_multiplier(phi, d1), psi), d2))
    return lhs, rhs


def gauge_transform(state: CshState, chi: ScalarField,
                    chi_t: ScalarField) -> CshState:
    """Gauge change by the profile chi (chi_t its time derivative).

    phi and u pick up the phase e^{-i chi}; the potentials shift by the
    gradient of chi with the sign that keeps every covariant derivative,
    and hence the energy, invariant.  The output generally violates the
    Coulomb condition unless chi is harmonic.
    """
    phase = np.exp(-1j * chi.physical().data)
    grid = state.phi.grid
    phi2 = ScalarField.from_physical(grid, state.phi.physical().data * phase)
    u2 = ScalarField.from_physical(grid, state.u.physical().data * phase)
    d1chi = apply_multiplier(chi, partial_deriv(1))
    d2chi = apply_multiplier(chi, partial_deriv(2))
    return replace(state, phi=phi2, u=u2,
                   a0=state.a0 - chi_t,
                   a1=state.a1 - d1chi,
                   a2=state.a2 - d2chi)


# -- initial data generators ------------------------------------------------


def gaussian_bump(grid: GridSpec, amplitude: complex = 1.0,
                  width: float = 0.5,
                  center: Optional[Tuple[float, float]] = None) -> ScalarField:
    """Periodized Gaussian bump (3x3 image sum keeps it smooth)."""
    L = grid.period_length
    cx, cy = center if center is not None else (L / 2.0, L / 2.0)
    vals = np.zeros((grid.n, grid.n))
    for ox in (-L, 0.0, L):
        for oy in (-L, 0.0, L):
            d2 = (grid.x1 - cx + ox) ** 2 + (grid.x2 - cy + oy) ** 2
            vals = vals + np.exp(-d2 / (2.0 * width ** 2))
    return ScalarField.from_physical(grid, complex(amplitude) * vals, "complex")


def fourier_modes(grid: GridSpec,
                  modes: Sequence[Tuple[int, int, complex]]) -> ScalarField:
    """Field with the given (m1, m2, amplitude) spectral content."""
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for m1, m2, amp in modes:
        if not (-grid.n // 2 <= m1 < grid.n // 2 and -grid.n // 2 <= m2 < grid.n // 2):
            raise ValueError(f"mode ({m1},{m2}) outside grid range")
        coeffs[m1 % grid.n, m2 % grid.n] += complex(amp)
    return ScalarField.from_spectral(grid, coeffs)


def vortex_like(grid: GridSpec, winding: int = 1,
                core_radius: float = 0.5) -> ScalarField:
    """Winding-phase profile with a smooth core, windowed to near-periodicity."""
    L = grid.period_length
    x = grid.x1 - L / 2.0
    y = grid.x2 - L / 2.0
    r = np.sqrt(x ** 2 + y ** 2)
    theta = np.arctan2(y, x)
    profile = np.tanh(r / max(core_radius, 1e-12)) ** abs(winding)
    window = np.exp(-((r / (0.35 * L)) ** 6))
    vals = profile * window * np.exp(1j * winding * theta)
    return ScalarField.from_physical(grid, vals, "complex")
