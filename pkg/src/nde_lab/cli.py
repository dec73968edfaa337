"""Command-line front end.

Runs named experiments and writes CSV/JSON artifacts.  All computations are
deterministic, CSV floats use 17-significant-digit round-trip formatting,
and every artifact carries the configuration that produced it, so identical
invocations give bit-identical files.

Exit codes: 0 success, 1 usage error, 2 numerical failure (an error report
is written to the output directory).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import __version__
from .blowup_estimates import (
    BlowupCertificate,
    PolynomialCutoff,
    blowup_time_bound,
    capacity_bound,
    expansion_coefficient,
)
from .diagnostics import (
    airy_tail_fit,
    convergence_rate,
    g_admissibility_report,
    total_variation,
)
from .errors import NdeLabError
from .exact_solutions import build_saw, invariant_cubic, saw_envelope_fit
from .ode_core import OdeSettings
from .pde_simulator import (
    RiemannData,
    StepControl,
    evolve,
    make_state,
    write_snapshot_csv,
)
from .similarity_profiles import (
    complete_blowup_orbit,
    interface_profile,
    reflect_to_rarefaction,
    rescale_profile,
    shoot_origin_slope,
    shoot_profile,
    singular_point_family,
    solve_heaviside,
)
from .w4_dynamics import (
    integrate_w4,
    w4_blowup_time,
    w4_closed_form,
    write_trajectory_csv,
)

TOLS_ENV_VAR = "NDE_LAB_TOLS"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the artifact contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _default_tols() -> float:
    raw = os.environ.get(TOLS_ENV_VAR)
    if raw is None:
        return 1e-12
    try:
        val = float(raw)
    except ValueError:
        raise NdeLabError(f"{TOLS_ENV_VAR} must be a float, got {raw!r}")
    if val <= 0:
        raise NdeLabError(f"{TOLS_ENV_VAR} must be positive")
    return val


def _settings(tols: float) -> OdeSettings:
    return OdeSettings(rel_tol=tols, abs_tol=tols)


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" for v in row])


def _write_gnuplot(outdir: Path, csv_names):
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    lines += [f"plot '{name}' using 1:2 with lines" for name in csv_names]
    (outdir / "plot.gp").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands


def _cmd_profile(args, outdir: Path) -> dict:
    settings = _settings(args.tols)
    if args.z0 is not None:
        prof = interface_profile(args.alpha, args.z0, settings,
                                 z_min=args.z_min)
    else:
        prof = shoot_profile(args.alpha, args.limit, settings,
                             z_min=args.z_min)
    prof.to_csv(outdir / "profile.csv")
    meta = prof.metadata()
    meta["config"] = {"alpha": args.alpha, "limit": args.limit,
                      "z0": args.z0, "z_min": args.z_min, "tols": args.tols}
    _write_json(outdir / "profile.json", meta)
    return {"artifacts": ["profile.csv", "profile.json"],
            "origin_slope": meta["origin_slope"]}


def _cmd_heaviside(args, outdir: Path) -> dict:
    settings = _settings(args.tols)
    z0, h0, prof = solve_heaviside(settings)
    prof.to_csv(outdir / "heaviside.csv")
    doc = {"z0": z0, "H0": h0, "config": {"tols": args.tols}}
    _write_json(outdir / "heaviside.json", doc)
    return {"artifacts": ["heaviside.csv", "heaviside.json"], **doc}


def _cmd_saw(args, outdir: Path) -> dict:
    saw = build_saw(args.m, args.humps)
    z = np.linspace(saw.edges[0], 0.0, args.samples)
    _write_csv(outdir / "saw.csv", ["z", "g"], zip(z, saw(z)))
    doc = saw.to_json()
    doc["ratio_z1_z0"] = float(saw.edges[-3] / saw.edges[-2]) \
        if saw.edges.size >= 3 else None
    if saw.coeffs.shape[0] >= 8:
        c_env, expo = saw_envelope_fit(saw)
        doc["envelope"] = {"coefficient": c_env, "exponent": expo}
    doc["config"] = {"m": args.m, "humps": args.humps}
    _write_json(outdir / "saw.json", doc)
    return {"artifacts": ["saw.csv", "saw.json"]}


def _cmd_w4(args, outdir: Path) -> dict:
    settings = _settings(args.tols)
    c0 = w4_closed_form(args.T, args.A0, args.B0, args.D0, 0.0).c
    t_end = args.t_frac * args.T
    traj = integrate_w4(c0, (0.0, t_end), settings)
    write_trajectory_csv(outdir / "w4.csv", traj)
    dev = 0.0
    for t, c in zip(traj.times, traj.states):
        exact = w4_closed_form(args.T, args.A0, args.B0, args.D0, float(t)).c
        dev = max(dev, float(np.max(np.abs(c - exact)
                                    / np.maximum(np.abs(exact), 1e-12))))
    doc = {
        "max_rel_deviation_from_closed_form": dev,
        "blowup_time_from_C3": w4_blowup_time(float(c0[3])),
        "config": {"T": args.T, "A0": args.A0, "B0": args.B0,
                   "D0": args.D0, "t_frac": args.t_frac, "tols": args.tols},
    }
    _write_json(outdir / "w4.json", doc)
    return {"artifacts": ["w4.csv", "w4.json"], **doc}


def _cmd_blowup(args, outdir: Path) -> dict:
    if args.capacity:
        xc = np.linspace(0.0, args.L, 2001)
        ut0 = -args.u0_const * np.ones_like(xc)  # positive weighted integral
        J0 = float(simpson(ut0 * (args.L - xc) ** 3, x=xc))
        c0, T0 = capacity_bound(xc, ut0, args.L,
                                PolynomialCutoff(args.capacity[0],
                                                 args.capacity[1]))
        cert = BlowupCertificate(L=args.L, J0=J0, order_in_time="second",
                                 bound_T0=T0, capacity_c0=c0)
    else:
        x = np.linspace(-args.L, 0.0, 2001)
        u0 = args.u0_const * np.ones_like(x)
        J0 = expansion_coefficient(x, u0, args.L)
        T0 = blowup_time_bound(J0, args.L, args.order)
        cert = BlowupCertificate(L=args.L, J0=J0, order_in_time=args.order,
                                 bound_T0=T0)
    cert.to_json(outdir / "certificate.json")
    return {"artifacts": ["certificate.json"], "J0": cert.J0,
            "T0": cert.bound_T0}


def _cmd_pde(args, outdir: Path) -> dict:
    data = RiemannData(kind=args.data, smoothing_width=args.smoothing_width)
    state = make_state(data, args.L, args.n, args.epsilon)
    control = StepControl()
    artifacts = []
    steps = 0
    boundary = None
    snapshots = sorted(t for t in (args.snapshots or []) if t < args.t_end)
    cur = state
    for t_snap in snapshots:
        cur, diag = evolve(cur, t_snap, control)
        steps += diag.n_steps
        boundary = boundary if boundary is not None else diag.boundary_touched
        name = f"snapshot_t{t_snap:g}.csv"
        write_snapshot_csv(outdir / name, cur)
        artifacts.append(name)
    final, diag = evolve(cur, args.t_end, control)
    steps += diag.n_steps
    boundary = boundary if boundary is not None else diag.boundary_touched
    write_snapshot_csv(outdir / "final.csv", final)
    diag.to_csv(outdir / "diagnostics.csv")
    config = {"data": args.data, "L": args.L, "n": args.n,
              "epsilon": args.epsilon, "t_end": args.t_end,
              "smoothing_width": args.smoothing_width,
              "snapshots": snapshots,
              "dt_safety": [control.c3, control.c4]}
    doc = {"config": config, "n_steps": steps,
           "boundary_touched": boundary,
           "final_sup": float(np.max(np.abs(final.u)))}
    _write_json(outdir / "run.json", doc)
    artifacts += ["final.csv", "diagnostics.csv", "run.json"]
    return {"artifacts": artifacts, **doc}


def _cmd_diagnose(args, outdir: Path) -> dict:
    settings = _settings(args.tols)
    prof = shoot_profile(args.alpha, args.limit, settings, z_min=args.z_min)
    doc = {"config": {"alpha": args.alpha, "limit": args.limit,
                      "z_min": args.z_min, "target": args.target}}
    if args.target == "airy-tail":
        fit = airy_tail_fit(prof)
        doc["fit"] = {"c": fit.c, "a0": fit.a0_fit, "c0": fit.c0_fit,
                      "decay_exp": fit.decay_exp, "residual": fit.residual}
    elif args.target == "tv":
        Zs = np.linspace(10.0, min(50.0, -prof.z[0]), 17)
        tvs = [total_variation(prof, (-Z, 0.0)) for Z in Zs]
        slope = np.polyfit(np.log(Zs), np.log(tvs), 1)[0]
        _write_csv(outdir / "tv.csv", ["Z", "tv"], zip(Zs, tvs))
        doc["tv_growth_exponent"] = float(slope)
        doc.setdefault("artifacts", []).append("tv.csv")
    else:  # convergence-rate
        q, details = convergence_rate(prof, window_len=1.0)
        _write_csv(outdir / "rate.csv", ["t", "I"],
                   zip(details["t"], details["I"]))
        doc["rate_exponent"] = q
    _write_json(outdir / "report.json", doc)
    arts = ["report.json"] + [a for a in doc.get("artifacts", [])]
    return {"artifacts": arts, **{k: v for k, v in doc.items()
                                  if k != "artifacts"}}


# ---------------------------------------------------------------------------
# figure reproduction


def _fig_f1(outdir, settings):
    prof = shoot_profile(0.0, 1.0, settings, z_min=-30.0, dz=0.05)
    rare = reflect_to_rarefaction(prof)
    prof.to_csv(outdir / "shock_profile.csv")
    rare.to_csv(outdir / "rarefaction_profile.csv")
    return {
        "artifacts": ["shock_profile.csv", "rarefaction_profile.csv"],
        "checked": {"origin_slope": prof.origin_slope,
                    "far_limit": prof.far_limit},
        "plotted": ["shock and reflected rarefaction profiles"],
    }


def _fig_f2(outdir, settings):
    base = shoot_profile(0.0, 1.0, settings, z_min=-30.0, dz=0.05)
    arts, checked = [], {}
    for target in (0.5, 1.0, 2.0):
        a = target ** (1.0 / 3.0)
        p = rescale_profile(base, a)
        name = f"profile_limit_{target:g}.csv"
        p.to_csv(outdir / name)
        arts.append(name)
        checked[f"far_limit_{target:g}"] = p.far_limit
    return {"artifacts": arts, "checked": checked,
            "plotted": ["scaling family with far-field values 0.5, 1, 2"]}


def _fig_f3(outdir, settings):
    prof = singular_point_family(5.0, -1.0, settings, z_min=-60.0,
                                 z_max=25.0)
    prof.to_csv(outdir / "nonsymmetric_profile.csv")
    c_plus = float(np.mean(prof.g[prof.z >= 20.0]))
    return {
        "artifacts": ["nonsymmetric_profile.csv"],
        "checked": {"zero_at_z0": float(prof(5.0)),
                    "C_minus": prof.far_limit, "C_plus_mean_tail": c_plus},
        "plotted": ["non-symmetric profile through a regular zero at z0=5"],
    }


def _fig_f4(outdir, settings):
    arts = []
    for z0 in (1.0, 2.192, 3.0):
        p = interface_profile(0.0, z0, settings, z_min=-30.0)
        name = f"interface_z0_{z0:g}.csv"
        p.to_csv(outdir / name)
        arts.append(name)
    return {"artifacts": arts,
            "checked": {"seed_coefficient_rule": "A = z0/18 (leading balance)"},
            "plotted": ["finite-interface profiles for z0 in {1, 2.192, 3}"]}


def _fig_f41(outdir, settings):
    target = interface_profile(0.0, 1.0, settings, z_min=-30.0)
    fam = lambda C: singular_point_family(1.0, C, settings, z_min=-30.0,
                                          z_max=10.0)
    report = g_admissibility_report(target, fam, [-1e-2, -1e-3, -1e-4],
                                    window=(-10.0, 0.9))
    report.to_csv(outdir / "approximation_distances.csv")
    target.to_csv(outdir / "interface_target.csv")
    return {
        "artifacts": ["approximation_distances.csv", "interface_target.csv"],
        "checked": {"verdict": report.verdict,
                    "sup_distances": report.sup_distances},
        "plotted": ["smooth approximations of the interface profile"],
    }


def _fig_f5(outdir, settings):
    arts, checked = [], {}
    for alpha in (0.5, 0.0, -0.05):
        p = shoot_origin_slope(alpha, -1.0, settings, z_min=-30.0, dz=0.05)
        name = f"profile_alpha_{alpha:g}.csv"
        p.to_csv(outdir / name)
        arts.append(name)
        checked[f"far_field_exponent_alpha_{alpha:g}"] = \
            3.0 * alpha / (1.0 + alpha)
    return {"artifacts": arts, "checked": checked,
            "plotted": ["profiles for positive, zero, and negative exponents"]}


def _fig_f6(outdir, settings):
    arts = []
    for alpha in (-0.05, -0.09, -0.099, -0.09999):
        p = shoot_origin_slope(alpha, -1.0, settings, z_min=-25.0, dz=0.05)
        name = f"profile_alpha_{alpha:g}.csv"
        p.to_csv(outdir / name)
        arts.append(name)
    return {"artifacts": arts, "checked": {},
            "plotted": ["family approaching the critical saw exponent"]}


def _fig_f7(outdir, settings):
    saw = build_saw(1.0, 12)
    fam = lambda k: shoot_origin_slope(-0.1 + 10.0 ** -k, -1.0, settings,
                                       z_min=-14.0, dz=0.002)
    member = fam(4)
    zq = member.z[(member.z >= -12.0) & (member.z <= -0.05)]
    report = g_admissibility_report(saw, fam, [4, 5, 6, 7],
                                    window=(-12.0, -0.05), z_values=zq)
    report.to_csv(outdir / "saw_convergence.csv")
    z = np.linspace(-120.0, 0.0, 2401)
    _write_csv(outdir / "saw_tail.csv", ["z", "g"], zip(z, saw(z)))
    return {
        "artifacts": ["saw_convergence.csv", "saw_tail.csv"],
        "checked": {"sup_distances": report.sup_distances},
        "plotted": ["saw tail structure far from the origin"],
    }


def _fig_f8(outdir, settings):
    saw = build_saw(1.0, 12)
    cub = invariant_cubic("I", C0=0.0, C1=-1.0)
    z = np.linspace(-30.0, 0.0, 1201)
    _write_csv(outdir / "saw.csv", ["z", "g"], zip(z, saw(z)))
    _write_csv(outdir / "invariant_cubic.csv", ["z", "g"], zip(z, cub(z)))
    c_env, expo = saw_envelope_fit(saw)
    peaks_doc = {"envelope_coefficient": c_env, "envelope_exponent": expo}
    _write_json(outdir / "envelope.json", peaks_doc)
    return {
        "artifacts": ["saw.csv", "invariant_cubic.csv", "envelope.json"],
        "checked": peaks_doc,
        "plotted": ["saw vs the exact single-cubic member"],
    }


def _fig_f9(outdir, settings):
    saw = build_saw(1.0, 12)
    arts = []
    sups = []
    for k in (4, 5, 6, 7, 8):
        p = shoot_origin_slope(-0.1 + 10.0 ** -k, -1.0, settings,
                               z_min=-12.0, dz=0.002)
        name = f"corner_zoom_k{k}.csv"
        m = (p.z >= -10.0) & (p.z <= -5.0)
        _write_csv(outdir / name, ["z", "g"],
                   zip(p.z[m][::5], p.g[m][::5]))
        arts.append(name)
        zq = p.z[m]  # profile nodes: no storage-interpolation error
        sups.append(float(np.max(np.abs(p(zq) - saw(zq)))))
    return {
        "artifacts": arts,
        "checked": {"corner_sup_distances": sups,
                    "monotone": all(b < a for a, b in zip(sups, sups[1:]))},
        "plotted": ["local convergence to the saw corner"],
    }


def _fig_f10(outdir, settings):
    z, g, report = complete_blowup_orbit(-0.2, -1.0, settings)
    _write_csv(outdir / "blowup_orbit.csv", ["z", "g"], zip(z, g))
    return {
        "artifacts": ["blowup_orbit.csv"],
        "checked": {"classification": report.classification.value,
                    "sqrt_coefficient": report.coefficient,
                    "z0": report.z0},
        "plotted": ["orbit terminating in a sqrt singularity"],
    }


def _fig_f55(outdir, settings):
    arts = []
    for C in (-0.5, -1.0):
        p = singular_point_family(2.0, C, settings, z_min=-30.0, z_max=20.0)
        name = f"nonsymmetric_C_{abs(C):g}.csv"
        p.to_csv(outdir / name)
        arts.append(name)
    z0, h0, prof = solve_heaviside(settings)
    prof.to_csv(outdir / "heaviside_interface.csv")
    arts.append("heaviside_interface.csv")
    return {
        "artifacts": arts,
        "checked": {"heaviside_z0": z0, "heaviside_H0": h0},
        "plotted": ["non-symmetric profiles and the unit-interface member"],
    }


_FIGURES = {
    "figure-F1": _fig_f1,
    "figure-F2": _fig_f2,
    "figure-F3": _fig_f3,
    "figure-F4": _fig_f4,
    "figure-F41": _fig_f41,
    "figure-F5": _fig_f5,
    "figure-F6": _fig_f6,
    "figure-F7": _fig_f7,
    "figure-F8": _fig_f8,
    "figure-F9": _fig_f9,
    "figure-F10": _fig_f10,
    "figure-F55": _fig_f55,
}


def _cmd_reproduce(args, outdir: Path) -> dict:
    builder = _FIGURES[args.target]
    figdir = outdir / args.target
    figdir.mkdir(parents=True, exist_ok=True)
    settings = _settings(args.tols)
    manifest = builder(figdir, settings)
    manifest["figure"] = args.target
    manifest["config"] = {"tols": args.tols}
    _write_json(figdir / "manifest.json", manifest)
    return {"artifacts": [f"{args.target}/manifest.json"]}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nde-lab",
                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")
        p.add_argument("--tols", type=float, default=None,
                       help=f"integrator tolerances (default 1e-12, or "
                            f"${TOLS_ENV_VAR})")
        p.add_argument("--gnuplot-script", action="store_true",
                       help="also emit a gnuplot script for the CSV artifacts")

    p = sub.add_parser("profile", help="shoot a similarity profile")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--limit", type=float, default=1.0)
    p.add_argument("--z0", type=float, default=None,
                   help="build the finite-interface profile with this "
                        "interface instead of shooting for a far-field "
                        "value")
    p.add_argument("--z-min", type=float, default=-50.0, dest="z_min")
    common(p)

    p = sub.add_parser("heaviside",
                       help="interface profile with unit far-field value")
    common(p)

    p = sub.add_parser("saw", help="piecewise-cubic critical profile")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--humps", type=int, default=12)
    p.add_argument("--samples", type=int, default=2001)
    common(p)

    p = sub.add_parser("w4", help="cubic-coefficient blow-up dynamics")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--A0", type=float, default=0.3)
    p.add_argument("--B0", type=float, default=-0.2)
    p.add_argument("--D0", type=float, default=0.5)
    p.add_argument("--t-frac", type=float, default=0.9, dest="t_frac")
    common(p)

    p = sub.add_parser("blowup", help="blow-up time bound certificate")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--u0-const", type=float, default=-1.0, dest="u0_const")
    p.add_argument("--order", choices=["first", "second", "third"],
                   default="first")
    p.add_argument("--capacity", type=int, nargs=2, metavar=("P", "Q"),
                   default=None,
                   help="also compute the capacity bound with cut-off "
                        "tau^P (1-tau)^Q")
    common(p)

    p = sub.add_parser("pde", help="regularized step-data evolution")
    p.add_argument("--data", choices=["s-minus", "s-plus", "h-left",
                                      "h-right"], default="s-minus")
    p.add_argument("--L", type=float, default=10.0)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--t-end", type=float, default=0.1, dest="t_end")
    p.add_argument("--smoothing-width", type=float, default=None,
                   dest="smoothing_width")
    p.add_argument("--snapshots", type=float, nargs="*", default=None,
                   help="intermediate times at which to write (x, u) CSVs")
    common(p)

    p = sub.add_parser("diagnose", help="tail / variation / rate reports")
    p.add_argument("--target", choices=["airy-tail", "tv",
                                        "convergence-rate"],
                   default="airy-tail")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--limit", type=float, default=1.0)
    p.add_argument("--z-min", type=float, default=-60.0, dest="z_min")
    common(p)

    p = sub.add_parser("reproduce", help="rebuild a figure's data files")
    p.add_argument("target", choices=sorted(_FIGURES))
    common(p)

    return parser


_COMMANDS = {
    "profile": _cmd_profile,
    "heaviside": _cmd_heaviside,
    "saw": _cmd_saw,
    "w4": _cmd_w4,
    "blowup": _cmd_blowup,
    "pde": _cmd_pde,
    "diagnose": _cmd_diagnose,
    "reproduce": _cmd_reproduce,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    outdir = args.out
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        if args.tols is None:
            args.tols = _default_tols()
        result = _COMMANDS[args.command](args, outdir)
    except NdeLabError as exc:
        report = {"error": type(exc).__name__, "message": str(exc),
                  "command": args.command}
        _write_json(outdir / "error.json", report)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    if args.gnuplot_script:
        csvs = [a for a in result.get("artifacts", []) if a.endswith(".csv")]
        _write_gnuplot(outdir, csvs)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
