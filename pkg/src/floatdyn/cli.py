"""Command-line front end.

Subcommands
-----------
analyze   equilibrium, stability and normal modes -> JSON report
simulate  integrate full or reduced dynamics -> CSV trajectory
modes     recompute modal results from a stored report
verify    run the residual property suites on user geometry
clip      export the submerged part at a pose as STL (debugging aid)

Exit codes: 0 success, 1 error, 2 equilibrium found but not
pseudo-stable (so sweep scripts can tell the outcomes apart).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dynamics import FullState, ReducedState, integrate_full, integrate_reduced
from .clipping import clip_by_waterplane
from .errors import FloatDynError
from .kinematics import Pose
from .mesh import save_stl
from .oscillations import normal_modes
from .report import AnalysisConfig, Report, load_body, run_analysis
from .verification import run_verification

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_PSEUDO_STABLE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floatdyn",
        description="Hydrostatics, stability and dynamics of floating hulls.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="equilibrium + stability + modes")
    p_analyze.add_argument("--config", required=True, help="JSON config path")
    p_analyze.add_argument("--out", default=None, help="report path (JSON)")
    p_analyze.add_argument(
        "--tol", type=float, default=None,
        help="override the equilibrium residual tolerance (relative to m g)",
    )

    p_sim = sub.add_parser("simulate", help="integrate the dynamics")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", default=None, help="trajectory path (CSV)")
    p_sim.add_argument("--mode", choices=("full", "reduced"), default=None)
    p_sim.add_argument("--t-end", type=float, default=None)
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.add_argument(
        "--tol", type=float, default=None,
        help="override the integrator relative tolerance (absolute = tol/10)",
    )

    p_modes = sub.add_parser("modes", help="modal analysis from a stored report")
    p_modes.add_argument("--report", required=True, help="existing report JSON")
    p_modes.add_argument("--out", default=None)

    p_verify = sub.add_parser("verify", help="run property suites on the geometry")
    p_verify.add_argument("--config", required=True)
    p_verify.add_argument("--out", default=None)
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--poses", type=int, default=25)
    p_verify.add_argument("--loops", type=int, default=5)

    p_clip = sub.add_parser("clip", help="export the submerged part as STL")
    p_clip.add_argument("--config", required=True)
    p_clip.add_argument("--out", required=True)
    p_clip.add_argument(
        "--pose",
        default="0,0,0",
        help="zeta,theta,phi (optionally ,psi,xi,eta)",
    )

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except FloatDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _dispatch(args) -> int:
    if args.command == "analyze":
        return _cmd_analyze(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "modes":
        return _cmd_modes(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "clip":
        return _cmd_clip(args)
    raise AssertionError(f"unhandled command {args.command}")


def _cmd_analyze(args) -> int:
    config = AnalysisConfig.from_file(args.config)
    if args.tol is not None:
        config.solver = {**config.solver, "tol": args.tol}
    report, _ = run_analysis(config)
    if args.out:
        report.save(args.out)
    stab = report.stability
    eq = report.equilibrium
    print(
        f"equilibrium: zeta*={eq['pose']['zeta']:.6g} m, "
        f"theta*={eq['pose']['theta']:.6g} rad, phi*={eq['pose']['phi']:.6g} rad "
        f"({eq['iterations']} iterations)"
    )
    print(
        f"GM_T={stab['gm_transverse']:.6g} m, GM_L={stab['gm_longitudinal']:.6g} m, "
        f"displacement={stab['displacement']:.6g} N"
    )
    freqs = [f for f in report.modal["frequencies_hz"] if f is not None]
    if freqs:
        print("mode frequencies [Hz]: " + ", ".join(f"{f:.6g}" for f in freqs))
    verdict = "pseudo-stable" if stab["pseudo_stable"] else "NOT pseudo-stable"
    print(f"verdict: {verdict}")
    if args.out:
        print(f"report written to {args.out}")
    return EXIT_OK if stab["pseudo_stable"] else EXIT_NOT_PSEUDO_STABLE


def _cmd_simulate(args) -> int:
    config = AnalysisConfig.from_file(args.config)
    if args.tol is not None:
        config.integrator = {
            **config.integrator, "rtol": args.tol, "atol": args.tol / 10.0,
        }
    report, objects = run_analysis(config)
    sim = dict(config.simulate)
    mode = args.mode or sim.get("mode", "full")
    t_end = args.t_end if args.t_end is not None else float(sim.get("t_end", 10.0))
    dt = args.dt if args.dt is not None else float(sim.get("dt", 0.01))
    integrator = dict(config.integrator)
    kwargs = {
        "method": integrator.get("method", "DOP853"),
        "rtol": float(integrator.get("rtol", 1e-9)),
        "atol": float(integrator.get("atol", 1e-10)),
        "max_step": float(integrator.get("max_step", np.inf)),
    }

    mesh, body, env = objects["mesh"], objects["body"], objects["env"]
    eq_pose = objects["equilibrium"].pose
    deviation = sim.get("initial", {})

    if mode == "full":
        pose = Pose(
            xi=float(deviation.get("xi", 0.0)),
            eta=float(deviation.get("eta", 0.0)),
            zeta=eq_pose.zeta + float(deviation.get("zeta", 0.0)),
            psi=float(deviation.get("psi", 0.0)),
            theta=eq_pose.theta + float(deviation.get("theta", 0.0)),
            phi=eq_pose.phi + float(deviation.get("phi", 0.0)),
        )
        rates = np.array(
            [float(deviation.get(f"{name}_dot", 0.0))
             for name in ("xi", "eta", "zeta", "psi", "theta", "phi")]
        )
        traj = integrate_full(mesh, body, env, FullState(pose, rates), t_end, dt, **kwargs)
    else:
        coords = np.array(
            [
                eq_pose.zeta + float(deviation.get("zeta", 0.0)),
                eq_pose.theta + float(deviation.get("theta", 0.0)),
                eq_pose.phi + float(deviation.get("phi", 0.0)),
            ]
        )
        rates = np.array(
            [float(deviation.get(f"{name}_dot", 0.0)) for name in ("zeta", "theta", "phi")]
        )
        momenta = np.asarray(sim.get("momenta", (0.0, 0.0, 0.0)), dtype=float)
        traj = integrate_reduced(
            mesh, body, env, ReducedState(coords, rates, momenta), t_end, dt, **kwargs
        )

    if args.out:
        traj.to_csv(args.out)
        print(f"trajectory written to {args.out}")
    drift = traj.momentum_drift()
    print(
        f"samples: {len(traj.t)}, energy drift (relative): {traj.energy_drift():.3e}, "
        f"momentum drift: {drift[0]:.3e}, {drift[1]:.3e}, {drift[2]:.3e}"
    )
    if traj.terminated_early:
        print("warning: integration halted early (gimbal guard)", file=sys.stderr)
    return EXIT_OK


def _cmd_modes(args) -> int:
    report = Report.load(args.report)
    hessian = np.asarray(report.stability["hessian"], dtype=float)
    m_red = np.asarray(report.modal["reduced_mass"], dtype=float)
    modal = normal_modes(hessian, m_red)
    payload = {
        "lambdas": modal.lambdas.tolist(),
        "omegas_rad_s": [None if not np.isfinite(w) else float(w) for w in modal.omegas],
        "frequencies_hz": [
            None if not np.isfinite(f) else float(f) for f in modal.frequencies_hz
        ],
        "mode_shapes": modal.mode_shapes.tolist(),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"modal results written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    config = AnalysisConfig.from_file(args.config)
    mesh, _, _ = load_body(config)
    env = config.environment()
    seed = args.seed if args.seed is not None else config.seed
    summary = run_verification(
        mesh, env, seed=seed, n_poses=args.poses, n_loops=args.loops
    )
    for name in ("loop_work", "gradient", "gradient_symmetry", "planar_invariance"):
        value = getattr(summary, name)
        tol = getattr(summary, f"{name}_tol")
        status = "PASS" if value <= tol else "FAIL"
        print(f"{name:24s} max residual {value:.3e}  (tol {tol:.1e})  {status}")
    if args.out:
        Path(args.out).write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    return EXIT_OK if summary.passed else EXIT_ERROR


def _cmd_clip(args) -> int:
    config = AnalysisConfig.from_file(args.config)
    mesh, _, _ = load_body(config)
    values = [float(x) for x in args.pose.split(",")]
    while len(values) < 6:
        values.append(0.0)
    zeta, theta, phi, psi, xi, eta = values[:6]
    pose = Pose(xi=xi, eta=eta, zeta=zeta, psi=psi, theta=theta, phi=phi)
    solid = clip_by_waterplane(mesh, pose)
    if solid.is_empty:
        print("fully emerged: nothing to export", file=sys.stderr)
        return EXIT_ERROR
    save_stl(args.out, solid.boundary_triangles(), name="submerged")
    print(
        f"wrote {args.out}: {len(solid.hull_triangles)} hull triangles, "
        f"{len(solid.cap_polygons)} cap loop(s)"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
