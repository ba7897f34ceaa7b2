"""Command-line entry point.

Subcommands:
    simulate     run one evolution, writing diagnostics.csv, snapshots and
                 run_manifest.json
    verify       run the structural property suite and the inequality
                 catalogue, writing verify_report.json
    norms        evaluate the dyadic space-time norms of a stored trajectory
    convergence  dt-halving ladder plus a grid-doubling pair, writing
                 convergence.json

Exit codes: 0 ok, 1 property failure, 2 config or format error, 3 runtime
abort (with partial outputs preserved).
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import os
import sys
import tempfile
from typing import List, Optional

import numpy as np

from .config import RunConfig, config_from_pairs, load_config, with_overrides
from .diagnostics import compute_rows, write_diagnostics_csv
from .errors import (ConfigError, CshError, InadmissibleParameters, NonFinite,
                     PicardDivergence, SnapshotFormatError)
from .estimates import default_cases, run_estimate
from .grid import ScalarField
from .integrator import SCHEME_RK4, evolve
from .lp import band_decompose, band_range, cube_cover
from .model import Trajectory, make_state, null_form_pair
from .norms import History, s_gamma_norm
from .snapshot import read_snapshot, write_snapshot

_VERSION = "0.1.0"


def _say(quiet: bool, msg: str) -> None:
    if not quiet:
        print(msg)


def _write_json_atomic(obj, path: str) -> None:
    payload = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _manifest(cfg: RunConfig, status: str, extra: Optional[dict] = None) -> dict:
    out = {
        "config": cfg.to_flat_dict(),
        "build": {
            "package": "cshsim",
            "version": _VERSION,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "status": status,
    }
    if extra:
        out.update(extra)
    return out


def manifest_to_config(path: str) -> RunConfig:
    """Re-ingest a run manifest; reproduces the run it echoes."""
    try:
        with open(path) as fh:
            manifest = json.load(fh)
        return config_from_pairs(manifest["config"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot re-ingest manifest {path!r}: {exc}") from exc


# -- simulate ----------------------------------------------------------------


def cmd_simulate(cfg: RunConfig, quiet: bool = False) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    initial = cfg.initial_state()
    pot = cfg.potential()
    step_cfg = cfg.step_config()

    def emit(traj: Trajectory, status: str) -> None:
        rows = compute_rows(traj, pot, cfg.scheme)
        write_diagnostics_csv(rows, os.path.join(cfg.out_dir, "diagnostics.csv"))
        for i, state in enumerate(traj.states):
            last = i == len(traj.states) - 1
            if last or (cfg.snapshot_every
                        and i % cfg.snapshot_every == 0):
                write_snapshot(state, os.path.join(
                    cfg.out_dir, f"snapshot_{i:06d}.csh2"))
        _write_json_atomic(
            _manifest(cfg, status, {
                "final_time": traj.states[-1].t,
                "stored_samples": len(traj.states),
                "sign_sigma": cfg.sign_sigma,
            }),
            os.path.join(cfg.out_dir, "run_manifest.json"))

    try:
        traj = evolve(initial, step_cfg, pot, cfg.t_end,
                      diag_every=cfg.diag_every, store_every=cfg.diag_every)
    except (PicardDivergence, NonFinite) as exc:
        emit(exc.trajectory, f"aborted: {type(exc).__name__}: {exc}")
        _say(quiet, f"run aborted: {exc}")
        return 3
    emit(traj, "ok")
    _say(quiet, f"simulate: {len(traj.states)} samples written to {cfg.out_dir}")
    return 0


# -- norms -------------------------------------------------------------------


def _load_trajectory(path: str, dealias_fraction: float):
    if os.path.isdir(path):
        files = sorted(glob.glob(os.path.join(path, "*.csh2")))
    else:
        files = [path]
    if not files:
        raise SnapshotFormatError(f"no snapshot files under {path!r}")
    states = [read_snapshot(f, dealias_fraction) for f in files]
    times = np.array([s.t for s in states])
    if len(states) > 1 and np.any(np.diff(times) <= 0):
        raise SnapshotFormatError("snapshot times are not increasing")
    return states, times


def cmd_norms(cfg: RunConfig, traj_path: str, gamma: Optional[float] = None,
              quiet: bool = False) -> int:
    gamma = cfg.gamma if gamma is None else gamma
    states, times = _load_trajectory(traj_path, cfg.dealias_fraction)
    os.makedirs(cfg.out_dir, exist_ok=True)
    phi_hist = History(times, [s.phi for s in states])
    u_hist = History(times, [s.u for s in states])
    report = {
        "gamma": gamma,
        "samples": len(states),
        "phi": {
            "s_gamma": s_gamma_norm(phi_hist, gamma).to_dict(),
            "s_gamma_minus_one": s_gamma_norm(phi_hist, gamma - 1.0).to_dict(),
        },
        "u": {
            "s_gamma": s_gamma_norm(u_hist, gamma).to_dict(),
            "s_gamma_minus_one": s_gamma_norm(u_hist, gamma - 1.0).to_dict(),
        },
    }
    report["pair_aggregate"] = math.hypot(
        report["phi"]["s_gamma"]["aggregate"],
        report["u"]["s_gamma_minus_one"]["aggregate"])
    out_path = os.path.join(cfg.out_dir, "norm_report.json")
    _write_json_atomic(report, out_path)
    _say(quiet, f"norms: pair aggregate {report['pair_aggregate']:.6g} "
                f"written to {out_path}")
    return 0


# -- verify ------------------------------------------------------------------


def _check_null_form(cfg: RunConfig, rng) -> dict:
    grid = cfg.grid()
    worst = 0.0
    for _ in range(20):
        phi = ScalarField.from_physical(grid, rng.standard_normal(
            (grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n)))
        psi = ScalarField.from_physical(grid, rng.standard_normal(
            (grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n)))
        lhs, rhs = null_form_pair(phi, psi)
        from .norms import sobolev_norm
        scale = sobolev_norm(phi, 1.0) * sobolev_norm(psi, 1.0)
        worst = max(worst, (lhs - rhs).l2_norm() / max(scale, 1e-300))
    ok = worst <= 1e-11
    return {"id": "null_form_identity", "status": "pass" if ok else "fail",
            "worst_relative_residual": worst}


def _check_partition(cfg: RunConfig, rng) -> dict:
    grid = cfg.grid()
    f = ScalarField.from_physical(grid, rng.standard_normal(
        (grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n)))
    ks, parts = band_decompose(f)
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    recon = (total - f).l2_norm() / max(f.l2_norm(), 1e-300)
    k_min, k_max = band_range(grid)
    k = min(k_min + 2, k_max)
    cover = cube_cover(grid, max(k_min, k - 1), k)
    weights = np.sum(cover.symbols, axis=0)
    mask = cover.annulus_mask
    weight_err = float(np.max(np.abs(weights[mask] - 1.0))) if mask.any() else 0.0
    ok = recon <= 1e-10 and weight_err <= 1e-12
    return {"id": "partition_of_unity", "status": "pass" if ok else "fail",
            "reconstruction_residual": recon, "cube_weight_error": weight_err}


def _check_round_trips(cfg: RunConfig, rng, scratch_dir: str) -> dict:
    grid = cfg.grid()
    phi = ScalarField.from_physical(grid, rng.standard_normal(
        (grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n)))
    u = ScalarField.from_physical(grid, rng.standard_normal(
        (grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n)))
    state = make_state(phi, u, t=0.25, sign_sigma=cfg.sign_sigma)
    path = os.path.join(scratch_dir, "roundtrip.csh2")
    write_snapshot(state, path)
    back = read_snapshot(path, cfg.dealias_fraction)
    snap_ok = (np.array_equal(back.phi.physical().data,
                              state.phi.physical().data)
               and np.array_equal(back.u.physical().data,
                                  state.u.physical().data)
               and back.t == state.t
               and back.sign_sigma == state.sign_sigma)
    cfg_ok = config_from_pairs(cfg.to_flat_dict()) == cfg
    ok = snap_ok and cfg_ok
    return {"id": "round_trips", "status": "pass" if ok else "fail",
            "snapshot_ok": snap_ok, "config_ok": cfg_ok}


def _check_catalogue(quiet: bool) -> List[dict]:
    results = []
    for case in default_cases():
        try:
            report = run_estimate(case)
        except InadmissibleParameters as exc:
            results.append({"id": case.estimate_id, "status": "skip",
                            "reason": str(exc)})
            continue
        status = "pass" if report.status == "ok" else "fail"
        results.append({"id": case.estimate_id, "status": status,
                        "report": report.to_dict()})
        _say(quiet, f"  estimate {case.estimate_id}: {status}")
    return results


def cmd_verify(cfg: RunConfig, quiet: bool = False) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    results = [
        _check_null_form(cfg, rng),
        _check_partition(cfg, rng),
        _check_round_trips(cfg, rng, cfg.out_dir),
    ]
    _say(quiet, "verify: running inequality catalogue")
    results.extend(_check_catalogue(quiet))
    failed = [r["id"] for r in results if r["status"] == "fail"]
    report = {"results": results, "failed": failed,
              "ok": not failed}
    _write_json_atomic(report, os.path.join(cfg.out_dir, "verify_report.json"))
    for r in results:
        _say(quiet, f"  {r['id']}: {r['status']}")
    return 0 if not failed else 1


# -- convergence -------------------------------------------------------------


def _restrict_coeffs(fine: np.ndarray, n_coarse: int) -> np.ndarray:
    """Keep the modes of a finer grid that the coarse grid resolves."""
    out = np.zeros((n_coarse, n_coarse), dtype=np.complex128)
    n_fine = fine.shape[0]
    half = n_coarse // 2
    idx = np.arange(-half, half)
    out[np.ix_(idx % n_coarse, idx % n_coarse)] = fine[
        np.ix_(idx % n_fine, idx % n_fine)]
    return out


def _final_state(cfg: RunConfig, dt: float):
    initial = cfg.initial_state()
    traj = evolve(initial, cfg.step_config(dt), cfg.potential(), cfg.t_end,
                  diag_every=max(1, int(round(cfg.t_end / dt))),
                  store_every=max(1, int(round(cfg.t_end / dt))))
    return traj.states[-1]


def cmd_convergence(cfg: RunConfig, quiet: bool = False) -> int:
    if cfg.convergence_levels < 4:
        raise ConfigError("convergence ladder needs at least 4 dt levels")
    os.makedirs(cfg.out_dir, exist_ok=True)
    dts = [cfg.dt / 2 ** i for i in range(cfg.convergence_levels)]
    finals = []
    for dt in dts:
        _say(quiet, f"convergence: dt = {dt:g}")
        finals.append(_final_state(cfg, dt))
    ref = finals[-1]
    errors = [(s.phi - ref.phi).l2_norm() for s in finals[:-1]]
    floor = 1e-300
    slope, _ = np.polyfit(np.log([d for d in dts[:-1]]),
                          np.log([max(e, floor) for e in errors]), 1)
    slope = float(slope)
    expected = 4.0 if cfg.scheme == SCHEME_RK4 else 2.0
    passed = slope >= expected - 0.3

    _say(quiet, f"convergence: grid pair n = {cfg.n} vs {2 * cfg.n}")
    coarse = _final_state(cfg, dts[0])
    from dataclasses import replace as _dc_replace
    fine_cfg = _dc_replace(cfg, n=2 * cfg.n)
    fine = _final_state(fine_cfg, dts[0])
    restricted = _restrict_coeffs(fine.phi.spectral().data, cfg.n)
    grid_err = float(cfg.length * np.sqrt(np.sum(
        np.abs(restricted - coarse.phi.spectral().data) ** 2)))

    report = {
        "scheme": cfg.scheme,
        "quadrature": cfg.quadrature,
        "t_end": cfg.t_end,
        "dts": dts,
        "errors": errors,
        "slope": slope,
        "expected_order": expected,
        "passed": bool(passed),
        "grid_pair": {"n_coarse": cfg.n, "n_fine": 2 * cfg.n,
                      "dt": dts[0], "error": grid_err},
    }
    _write_json_atomic(report, os.path.join(cfg.out_dir, "convergence.json"))
    _say(quiet, f"convergence: slope {slope:.3f} "
                f"(expected {expected:.1f}) -> "
                f"{'pass' if passed else 'fail'}")
    return 0 if passed else 1


# -- argument parsing --------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cshsim",
        description="Pseudo-spectral gauged-wave simulator and analysis tools")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "verify", "norms", "convergence"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat key=value file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None,
                       help="seed override (unsigned 64-bit)")
        p.add_argument("--quiet", action="store_true")
        if name == "norms":
            p.add_argument("--traj", required=True,
                           help="snapshot file or directory of snapshots")
            p.add_argument("--gamma", type=float, default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = with_overrides(load_config(args.config), args.out, args.seed)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.quiet)
        if args.command == "verify":
            return cmd_verify(cfg, args.quiet)
        if args.command == "norms":
            return cmd_norms(cfg, args.traj, args.gamma, args.quiet)
        return cmd_convergence(cfg, args.quiet)
    except (ConfigError, SnapshotFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PicardDivergence, NonFinite) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3
    except CshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
