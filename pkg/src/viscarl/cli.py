"""Command-line driver: solvers, sweeps and figure reproduction.

Every subcommand resolves its configuration from built-in defaults, an
optional config file and command-line flags (in that order of precedence),
runs the mapped solver, and persists delimited data plus a JSON metadata
record into the output directory. Figure subcommands additionally render a
PNG next to the data.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import ensemble, figures, fpmodes, steady
from . import stability as stab
from .errors import ViscarlError
from .output import Stopwatch, write_csv, write_metadata
from .params import PhysicalParams, derive_scaled, rho_at_threshold


def _phys_from_cfg(cfg) -> PhysicalParams:
    return PhysicalParams(
        kappa_c=cfg["kappa_c"], gamma_f=cfg["gamma_f"],
        temperature=cfg["temperature"], atom_mass=cfg["atom_mass"],
        wavenumber=cfg["wavenumber"], atom_count=cfg["atom_count"],
        momentum_spread_prefactor=cfg["momentum_spread_prefactor"])


def _traj_rows(traj):
    omega = traj.omega_inst
    for i in range(len(traj.tau)):
        yield (traj.tau[i], traj.a[i].real, traj.a[i].imag,
               abs(traj.a[i]) ** 2, traj.bunching[i], traj.mean_p[i], omega[i])


_TRAJ_HEADER = ["tau", "re_a", "im_a", "abs_a_sq", "bunching", "mean_p", "omega_inst"]


def cmd_stability(cfg, outdir: Path):
    r = stab.dispersion_roots(cfg["kappa"], cfg["D"])
    write_csv(outdir / "stability.csv",
              ["kappa", "D", "margin", "re_lambda", "im_lambda",
               "gain_over_kc", "shift_over_kc", "unstable"],
              [(r.kappa, r.D, r.margin, r.lambda_plus.real, r.lambda_plus.imag,
                r.gain_over_kc, r.shift_over_kc, r.unstable)])
    print(f"kappa={r.kappa:g} D={r.D:g} margin={r.margin:.6g} "
          f"G/kc={r.gain_over_kc:.6g} dw/kc={r.shift_over_kc:.6g} "
          f"unstable={r.unstable}")
    return {}


def cmd_threshold(cfg, outdir: Path):
    kappa = cfg["kappa"]
    d_th = stab.threshold_D(kappa)
    r = stab.dispersion_roots(kappa, d_th)
    write_csv(outdir / "threshold.csv",
              ["kappa", "D_th", "margin", "shift_over_kc"],
              [(kappa, d_th, r.margin, r.shift_over_kc)])
    print(f"kappa={kappa:g} D_th={d_th:.10g} shift_over_kc={r.shift_over_kc:.6g}")
    return {"D_th": d_th}


def cmd_simulate_fp(cfg, outdir: Path):
    dt = fpmodes.stable_dt(cfg["n_max"], cfg["D"], cfg["dt"])
    se = max(1, int(round(cfg["sample_dtau"] / dt)))
    state = fpmodes.new_state(cfg["n_max"], cfg["a0"])
    traj, final = fpmodes.integrate(state, cfg["kappa"], cfg["D"], dt,
                                    cfg["t_end"], se)
    write_csv(outdir / "fp_trajectory.csv", _TRAJ_HEADER, _traj_rows(traj))
    print(f"final: b={final.bunching:.6g} abs_a_sq={abs(final.a)**2:.6g} "
          f"under_resolved={traj.under_resolved}")
    return {"dt_used": dt, "under_resolved": traj.under_resolved,
            "tail_max": traj.tail_max}


def cmd_simulate_sde(cfg, outdir: Path):
    common = dict(kappa=cfg["kappa"], D=cfg["D"], n_sim=cfg["n_sim"],
                  seed=cfg["seed"], a0=cfg["a0"], t_end=cfg["t_end"],
                  sample_dtau=cfg["sample_dtau"],
                  stratified_phases=cfg["stratified_phases"])
    if cfg["mode"] == "overdamped":
        traj = ensemble.run_overdamped(dtau=cfg["dtau"], **common)
    else:
        traj = ensemble.run_full(gamma_bar=cfg["gamma_bar"], **common)
    omega = np.gradient(np.unwrap(np.angle(traj.a)), traj.tau)
    rows = [(traj.tau[i], traj.a[i].real, traj.a[i].imag, abs(traj.a[i]) ** 2,
             traj.bunching[i], traj.mean_p[i], omega[i], traj.var_p[i],
             traj.var_theta[i], traj.n_particles, traj.seed)
            for i in range(len(traj.tau))]
    write_csv(outdir / "sde_trajectory.csv",
              _TRAJ_HEADER + ["var_p", "var_theta", "n_particles", "seed"], rows)
    print(f"final: b={traj.bunching[-1]:.6g} abs_a_sq={traj.abs_a_sq[-1]:.6g}")
    return {}


def cmd_steady(cfg, outdir: Path):
    sol = steady.solve_steady(cfg["kappa"], cfg["D"])
    write_csv(outdir / "steady.csv",
              ["kappa", "D", "b", "omega", "omega_over_kappa", "abs_a_sq",
               "mean_p", "below_threshold", "residual"],
              [(sol.kappa, sol.D, sol.b, sol.omega, sol.omega / sol.kappa,
                sol.abs_a_sq, sol.mean_p, sol.below_threshold, sol.residual)])
    print(f"b={sol.b:.6g} omega={sol.omega:.6g} abs_a_sq={sol.abs_a_sq:.6g} "
          f"below_threshold={sol.below_threshold}")
    return {}


def _sweep_rows(points, kappa):
    for pt in points:
        sol = pt.exact
        yield (pt.D, sol.b, sol.omega, sol.omega / kappa,
               -sol.mean_p / kappa, sol.abs_a_sq,
               pt.gaussian_b if pt.gaussian_b is not None else math.nan,
               pt.gaussian_omega if pt.gaussian_omega is not None else math.nan,
               sol.below_threshold)


_SWEEP_HEADER = ["D", "b", "omega", "omega_over_kappa", "minus_mean_p_over_kappa",
                 "abs_a_sq", "gaussian_b", "gaussian_omega", "below_threshold"]


def cmd_sweep_d(cfg, outdir: Path):
    grid = np.linspace(cfg["d_min"], cfg["d_max"], cfg["n_points"])
    points = steady.sweep_D(cfg["kappa"], grid)
    write_csv(outdir / "sweep_d.csv", _SWEEP_HEADER,
              _sweep_rows(points, cfg["kappa"]))
    return {}


def _ramp_rows(rows):
    for r in rows:
        yield (r.p_ratio, r.rho, r.kappa, r.D, r.b, r.omega_over_kappa, r.a_sq)


_RAMP_HEADER = ["p_ratio", "rho", "kappa", "D", "b", "omega_over_kappa", "abs_a_sq"]


def cmd_ramp(cfg, outdir: Path):
    phys = _phys_from_cfg(cfg)
    grid = np.linspace(cfg["ratio_min"], cfg["ratio_max"], cfg["n_points"])
    rows = steady.ramp_scan(phys, grid)
    write_csv(outdir / "ramp.csv", _RAMP_HEADER, _ramp_rows(rows))
    return {"rho_threshold": rho_at_threshold(phys)}


def cmd_verify_scaling(cfg, outdir: Path):
    phys = _phys_from_cfg(cfg)
    slope = stab.verify_scaling(phys, cfg["sweep"], cfg["regime"],
                                observable=cfg["observable"],
                                n_points=cfg["n_points"], decades=cfg["decades"])
    write_csv(outdir / "scaling.csv",
              ["sweep", "regime", "observable", "exponent"],
              [(cfg["sweep"], cfg["regime"], cfg["observable"], slope)])
    print(f"fitted exponent d ln({cfg['observable']}) / d ln({cfg['sweep']}) "
          f"= {slope:.4f} ({cfg['regime']} cavity)")
    return {"exponent": slope}


def cmd_fig1(cfg, outdir: Path):
    kgrid = np.geomspace(cfg["kappa_min"], cfg["kappa_max"], cfg["n_kappa"])
    dgrid = np.geomspace(cfg["d_min"], cfg["d_max"], cfg["n_d"])
    imap = stab.instability_map(kgrid, dgrid)
    rows = []
    for i, k in enumerate(imap.kappa):
        for j, d in enumerate(imap.D):
            rows.append((k, d, imap.margin[i, j], imap.re_lambda[i, j],
                         bool(imap.unstable[i, j])))
    write_csv(outdir / "fig1_region.csv",
              ["kappa", "D", "margin", "re_lambda", "unstable"], rows)
    figures.render_instability_region(imap, outdir / "fig1_region.png")
    return {}


def cmd_fig2(cfg, outdir: Path):
    kappa, D = cfg["kappa"], cfg["D"]
    traj, final = fpmodes.simulate(kappa, D, a0=cfg["a0"], t_end=cfg["t_end"],
                                   n_max=cfg["n_max"])
    omega = traj.omega_inst
    write_csv(outdir / "fig2_intensity.csv", ["tau", "abs_a_sq"],
              zip(traj.tau, traj.abs_a_sq))
    write_csv(outdir / "fig2_bunching.csv", ["tau", "bunching"],
              zip(traj.tau, traj.bunching))
    write_csv(outdir / "fig2_frequency.csv",
              ["tau", "omega_over_kappa", "minus_mean_p_over_kappa"],
              zip(traj.tau, omega / kappa, -traj.mean_p / kappa))
    theta = np.linspace(0.0, 2.0 * np.pi, 400, endpoint=False)
    dens = fpmodes.reconstruct_density(final, theta)
    write_csv(outdir / "fig2_density.csv", ["theta", "P"], zip(theta, dens))
    figures.render_dynamics(traj, final, kappa, outdir / "fig2_dynamics.png")
    return {"final_b": final.bunching, "final_abs_a_sq": abs(final.a) ** 2}


def cmd_fig3(cfg, outdir: Path):
    kappa = cfg["kappa"]
    grid = np.linspace(cfg["d_min"], cfg["d_max"], cfg["n_points"])
    points = steady.sweep_D(kappa, grid)
    write_csv(outdir / "fig3_steady_sweep.csv", _SWEEP_HEADER,
              _sweep_rows(points, kappa))
    figures.render_steady_sweep(
        [p.D for p in points],
        [p.exact.b for p in points],
        [p.gaussian_b if p.gaussian_b is not None else math.nan for p in points],
        [p.exact.omega / kappa for p in points],
        [-p.exact.mean_p / kappa for p in points],
        outdir / "fig3_steady_sweep.png")
    return {}


def cmd_fig4(cfg, outdir: Path):
    phys = _phys_from_cfg(cfg)
    grid = np.linspace(cfg["ratio_min"], cfg["ratio_max"], cfg["n_points"])
    rows = steady.ramp_scan(phys, grid)
    write_csv(outdir / "fig4_ramp.csv", _RAMP_HEADER, _ramp_rows(rows))
    figures.render_ramp([r.p_ratio for r in rows],
                        [r.omega_over_kappa for r in rows],
                        [r.a_sq for r in rows],
                        outdir / "fig4_ramp.png")
    return {"rho_threshold": rho_at_threshold(phys)}


_COMMANDS = {
    "stability": cmd_stability,
    "threshold": cmd_threshold,
    "simulate-fp": cmd_simulate_fp,
    "simulate-sde": cmd_simulate_sde,
    "steady": cmd_steady,
    "sweep-d": cmd_sweep_d,
    "ramp": cmd_ramp,
    "verify-scaling": cmd_verify_scaling,
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
}

_FLAG_TYPES = {bool: lambda s: s.lower() in ("1", "true", "yes", "on")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viscarl",
        description="Collective recoil lasing with molasses friction and "
                    "diffusion: stability maps, mode dynamics, stochastic "
                    "ensembles and steady states.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI config file (flags override it)")
        for key in cfgmod.SCHEMA["common"] + cfgmod.SCHEMA[name]:
            flag = "--" + key.name.replace("_", "-")
            typ = _FLAG_TYPES.get(key.type, key.type)
            sp.add_argument(flag, dest=key.name, type=typ, default=None,
                            help=f"(default: {key.default})")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.subcommand
    try:
        if args.config:
            cfg = cfgmod.parse_config(args.config, name)
        else:
            cfg = cfgmod.defaults(name)
        overrides = {k.name: getattr(args, k.name)
                     for k in cfgmod.SCHEMA["common"] + cfgmod.SCHEMA[name]}
        cfg = cfgmod.apply_overrides(cfg, name, overrides)
        outdir = Path(cfg["output_dir"]) / name
        with Stopwatch() as sw:
            extra = _COMMANDS[name](cfg, outdir)
        write_metadata(outdir / "metadata.json", name, cfg, sw.elapsed, extra)
    except ViscarlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
