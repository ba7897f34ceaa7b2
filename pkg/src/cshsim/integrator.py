"""Time evolution: half-wave propagators, the twisted-Duhamel step with an
inner Picard iteration, and a classical Runge-Kutta reference integrator on
the equivalent first-order system.

Both schemes advance (phi, u) with u the covariant time derivative; the
gauge potentials are re-solved hierarchically from (phi, u) wherever the
nonlinearity is evaluated, so no time derivative of a0 ever appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import GridMismatch, NonFinite, PicardDivergence
from .grid import GridSpec, ScalarField, SPECTRAL, apply_multiplier, \
    multiply_dealiased, partial_deriv
from .model import (CshState, PotentialSpec, Trajectory, eval_w, make_state,
                    solve_a0, solve_spatial_potentials)

SCHEME_TWISTED = "twisted_duhamel"
SCHEME_RK4 = "rk4_reference"
QUAD_TRAPEZOID = "trapezoid"
QUAD_MIDPOINT = "midpoint"


@dataclass(frozen=True)
class StepConfig:
    dt: float
    scheme: str = SCHEME_TWISTED
    picard_max: int = 8
    picard_tol: float = 1e-12
    quadrature: str = QUAD_TRAPEZOID
    sign_sigma: int = 1
    delta0_guard: float = 10.0  # warn when dt * ||a0||_inf^2 exceeds this

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.picard_max < 1:
            raise ValueError("picard_max must be at least 1")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.scheme not in (SCHEME_TWISTED, SCHEME_RK4):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.quadrature not in (QUAD_TRAPEZOID, QUAD_MIDPOINT):
            raise ValueError(f"unknown quadrature {self.quadrature!r}")


def _propagator_tables(grid: GridSpec, t: float):
    """cos(t|xi|), sin(t|xi|)/|xi| (value t at 0), |xi| sin(t|xi|)."""
    key = ("halfwave", float(t))
    tabs = grid._cache.get(key)
    if tabs is None:
        w = grid.xi_abs
        c = np.cos(t * w)
        with np.errstate(invalid="ignore", divide="ignore"):
            s_over = np.where(w > 0.0, np.sin(t * w) / np.where(w > 0, w, 1.0), t)
        s_times = w * np.sin(t * w)
        for a in (c, s_over, s_times):
            a.setflags(write=False)
        tabs = (c, s_over, s_times)
        if len(grid._cache) < 4096:
            grid._cache[key] = tabs
    return tabs


def half_wave(f: ScalarField, g: ScalarField, t: float
              ) -> Tuple[ScalarField, ScalarField]:
    """Exact free evolution of (f, g) by time t:
    pos = cos(t|grad|) f + sin(t|grad|)/|grad| g,
    vel = -|grad| sin(t|grad|) f + cos(t|grad|) g.
    The zero mode uses the free-particle limit sin(t|xi|)/|xi| -> t.
    """
    if f.grid != g.grid:
        raise GridMismatch("half_wave fields live on different grids")
    grid = f.grid
    c, s_over, s_times = _propagator_tables(grid, t)
    fc, gc = f.spectral().data, g.spectral().data
    pos = ScalarField(c * fc + s_over * gc, SPECTRAL, grid, "complex")
    vel = ScalarField(-s_times * fc + c * gc, SPECTRAL, grid, "complex")
    return pos, vel


def exp_half_wave(f: ScalarField, t: float) -> ScalarField:
    """e^{i t |grad|} f, the half-wave exponential propagator."""
    grid = f.grid
    sym = np.exp(1j * t * grid.xi_abs)
    return ScalarField(f.spectral().data * sym, SPECTRAL, grid, "complex")


def nonlinearity_f(state: CshState, pot: PotentialSpec) -> ScalarField:
    """Right-hand side of the twisted wave equation:
    F = m phi + 2i (a1 d1 phi + a2 d2 phi) - i a0 u + (a1^2 + a2^2) phi + W(phi).
    All products are dealiased.
    """
    phi, u = state.phi, state.u
    grid = phi.grid
    d1phi = apply_multiplier(phi, partial_deriv(1))
    d2phi = apply_multiplier(phi, partial_deriv(2))
    transport = multiply_dealiased(state.a1, d1phi) + multiply_dealiased(state.a2, d2phi)
    asq = ScalarField.from_physical(
        grid, state.a1.physical().data ** 2 + state.a2.physical().data ** 2, "real")
    total = (pot.m * phi
             + 2j * transport
             + (-1j) * multiply_dealiased(state.a0, u)
             + multiply_dealiased(asq, phi)
             + eval_w(phi, pot))
    return total.spectral()


def _a0phi(state: CshState) -> ScalarField:
    return multiply_dealiased(state.a0, state.phi)


def _rel_change(dphi: np.ndarray, du: np.ndarray,
                phi: np.ndarray, u: np.ndarray) -> float:
    num = math.sqrt(np.sum(np.abs(dphi) ** 2) + np.sum(np.abs(du) ** 2))
    den = math.sqrt(np.sum(np.abs(phi) ** 2) + np.sum(np.abs(u) ** 2))
    return num / max(den, 1e-300)


def _finite_check(*fields: ScalarField) -> None:
    for f in fields:
        if not np.all(np.isfinite(f.data)):
            raise NonFinite("NaN or Inf in evolved field")


def twisted_duhamel_step(state: CshState, cfg: StepConfig,
                         pot: PotentialSpec) -> CshState:
    """One step of the twisted-Duhamel fixed-point map.

    The Duhamel integrals are approximated by the configured two-point
    rule; integrand values at the step endpoint come from the current
    Picard iterate, whose gauge potentials are re-solved hierarchically on
    every iterate.  Iterate zero is the free evolution.
    """
    dt = cfg.dt
    grid = state.phi.grid
    c, s_over, s_times = _propagator_tables(grid, dt)

    # endpoint data at s = 0
    f0 = nonlinearity_f(state, pot).spectral().data
    g0 = _a0phi(state).spectral().data
    phi0 = state.phi.spectral().data
    u0 = state.u.spectral().data

    free_phi = c * phi0 + s_over * u0
    free_u = -s_times * phi0 + c * u0

    if cfg.quadrature == QUAD_TRAPEZOID:
        # kernels at s=0 carry the full-step propagator; the sin kernels
        # vanish at s=dt so only the cos integrals see the new endpoint
        base_phi = (free_phi
                    - 0.5 * dt * (s_over * f0)
                    + 0.5 * dt * 1j * (c * g0))
        base_u = (free_u
                  - 0.5 * dt * (c * f0)
                  - 0.5 * dt * 1j * (s_times * g0))

        def update(f1: np.ndarray, g1: np.ndarray):
            phi_new = base_phi + 0.5 * dt * 1j * g1
            u_new = base_u - 0.5 * dt * f1
            return phi_new, u_new
    else:
        ch, sh_over, sh_times = _propagator_tables(grid, 0.5 * dt)

        def update(f1: np.ndarray, g1: np.ndarray):
            fm = 0.5 * (f0 + f1)
            gm = 0.5 * (g0 + g1)
            phi_new = free_phi - dt * (sh_over * fm) + dt * 1j * (ch * gm)
            u_new = free_u - dt * (ch * fm) - dt * 1j * (sh_times * gm)
            return phi_new, u_new

    phi_cur, u_cur = free_phi, free_u
    last_res = math.inf
    grow_run = 0
    iters = 0
    res = 0.0
    for it in range(1, cfg.picard_max + 1):
        trial = make_state(
            ScalarField(phi_cur, SPECTRAL, grid, "complex"),
            ScalarField(u_cur, SPECTRAL, grid, "complex"),
            t=state.t + dt, sign_sigma=cfg.sign_sigma)
        f1 = nonlinearity_f(trial, pot).spectral().data
        g1 = _a0phi(trial).spectral().data
        phi_next, u_next = update(f1, g1)
        res = _rel_change(phi_next - phi_cur, u_next - u_cur, phi_next, u_next)
        phi_cur, u_cur = phi_next, u_next
        iters = it
        if res <= cfg.picard_tol:
            break
        if res > last_res:
            grow_run += 1
            if grow_run >= 3:
                raise PicardDivergence(
                    f"Picard residual grew 3 consecutive iterations "
                    f"(last {res:.3e}); dt={dt} is beyond the contraction regime")
        else:
            grow_run = 0
        last_res = res

    out = make_state(
        ScalarField(phi_cur, SPECTRAL, grid, "complex"),
        ScalarField(u_cur, SPECTRAL, grid, "complex"),
        t=state.t + dt, sign_sigma=cfg.sign_sigma,
        step_index=state.step_index + 1,
        picard_iters=iters, picard_residual=res)
    _finite_check(out.phi, out.u)
    return out


def picard_deltas(state: CshState, cfg: StepConfig, pot: PotentialSpec):
    """Successive Picard iterate change norms for one step (no early stop)."""
    probe = replace(cfg, picard_tol=1e-300, picard_max=cfg.picard_max)
    deltas = []

    dt = probe.dt
    grid = state.phi.grid
    c, s_over, s_times = _propagator_tables(grid, dt)
    f0 = nonlinearity_f(state, pot).spectral().data
    g0 = _a0phi(state).spectral().data
    phi0 = state.phi.spectral().data
    u0 = state.u.spectral().data
    free_phi = c * phi0 + s_over * u0
    free_u = -s_times * phi0 + c * u0
    base_phi = free_phi - 0.5 * dt * (s_over * f0) + 0.5 * dt * 1j * (c * g0)
    base_u = free_u - 0.5 * dt * (c * f0) - 0.5 * dt * 1j * (s_times * g0)
    phi_cur, u_cur = free_phi, free_u
    for _ in range(probe.picard_max):
        trial = make_state(ScalarField(phi_cur, SPECTRAL, grid, "complex"),
                           ScalarField(u_cur, SPECTRAL, grid, "complex"),
                           t=state.t + dt, sign_sigma=cfg.sign_sigma)
        f1 = nonlinearity_f(trial, pot).spectral().data
        g1 = _a0phi(trial).spectral().data
        phi_next = base_phi + 0.5 * dt * 1j * g1
        u_next = base_u - 0.5 * dt * f1
        deltas.append(_rel_change(phi_next - phi_cur, u_next - u_cur,
                                  phi_next, u_next))
        phi_cur, u_cur = phi_next, u_next
    return deltas


def _rk4_rhs(phi: ScalarField, u: ScalarField, pot: PotentialSpec,
             sign_sigma: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vector field of the first-order system
    d/dt phi = u + i a0 phi,   d/dt u = Lap phi - F,
    with the gauge potentials re-solved from (phi, u)."""
    state = make_state(phi, u, sign_sigma=sign_sigma)
    grid = phi.grid
    f_tot = nonlinearity_f(state, pot).data
    a0phi = _a0phi(state).spectral().data
    lap_phi = -grid.xi_sq * phi.spectral().data
    dphi = u.spectral().data + 1j * a0phi
    du = lap_phi - f_tot
    return dphi, du


def rk4_reference_step(state: CshState, cfg: StepConfig,
                       pot: PotentialSpec) -> CshState:
    """Classical 4-stage explicit step of the first-order system."""
    dt = cfg.dt
    grid = state.phi.grid
    phi0 = state.phi.spectral().data
    u0 = state.u.spectral().data

    def rhs(pc, uc):
        return _rk4_rhs(ScalarField(pc, SPECTRAL, grid, "complex"),
                        ScalarField(uc, SPECTRAL, grid, "complex"),
                        pot, cfg.sign_sigma)

    k1p, k1u = rhs(phi0, u0)
    k2p, k2u = rhs(phi0 + 0.5 * dt * k1p, u0 + 0.5 * dt * k1u)
    k3p, k3u = rhs(phi0 + 0.5 * dt * k2p, u0 + 0.5 * dt * k2u)
    k4p, k4u = rhs(phi0 + dt * k3p, u0 + dt * k3u)
    phi1 = phi0 + (dt / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    u1 = u0 + (dt / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
    out = make_state(ScalarField(phi1, SPECTRAL, grid, "complex"),
                     ScalarField(u1, SPECTRAL, grid, "complex"),
                     t=state.t + dt, sign_sigma=cfg.sign_sigma,
                     step_index=state.step_index + 1)
    _finite_check(out.phi, out.u)
    return out


def step(state: CshState, cfg: StepConfig, pot: PotentialSpec) -> CshState:
    if cfg.scheme == SCHEME_RK4:
        return rk4_reference_step(state, cfg, pot)
    return twisted_duhamel_step(state, cfg, pot)


def evolve(initial: CshState, cfg: StepConfig, pot: PotentialSpec,
           t_end: float, diag_every: int = 1,
           store_every: Optional[int] = None) -> Trajectory:
    """Advance to t_end with uniform steps, storing states every
    ``store_every`` steps (default: every ``diag_every``).

    On Picard divergence or a non-finite field the partial trajectory is
    attached to the raised exception as ``exc.trajectory``.
    """
    if not t_end > initial.t:
        raise ValueError("t_end must exceed the initial time")
    n_steps = int(round((t_end - initial.t) / cfg.dt))
    if abs(initial.t + n_steps * cfg.dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end - t0 must be an integer multiple of dt")
    if store_every is None:
        store_every = diag_every
    traj = Trajectory([initial], dt_sample=cfg.dt * store_every)
    state = initial
    guard = cfg.delta0_guard
    try:
        for i in range(1, n_steps + 1):
            a0_inf = float(np.max(np.abs(state.a0.physical().data)))
            if guard > 0 and cfg.dt * max(a0_inf, 1e-300) ** 2 > guard:
                import warnings
                warnings.warn("dt exceeds the configured contraction guard",
                              RuntimeWarning, stacklevel=2)
            state = step(state, cfg, pot)
            if i % store_every == 0 or i == n_steps:
                traj.append(state)
    except (PicardDivergence, NonFinite) as exc:
        exc.trajectory = traj
        raise
    return traj
