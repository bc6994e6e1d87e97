"""Command-line front end.

Non-interactive, batch-oriented: every command writes a JSON report (and CSV
data files where applicable) into the output directory and prints the report
path. Reports are deterministic for a fixed config and version except for
the isolated ``meta`` block (timestamp). Exit codes: 0 success, 1 validation
failure (bad parameter values, empty sections, unresolved grids), 2 usage
error (unknown flags/commands, malformed values, grid mismatches), 3
numerical-acceptance failure (selftest criteria or scan slope windows).

A JSON config file mirroring the flags can be supplied with --config;
explicit flags win over config values.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import construction as con
from . import greens, hyperplanes, sections, shortpulse, sphere
from .errors import GridMismatchError, LightconeError
from .minkowski import Covector4

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_ACCEPTANCE = 3


def _outdir_default():
    return os.environ.get("LIGHTCONE_OUTDIR", "lightcone_out")


def _csv_floats(text):
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {exc}")


def _write_report(outdir, name, command, config, result):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    canonical = json.dumps({"command": command, "config": config}, sort_keys=True)
    doc = {
        "meta": {
            "version": __version__,
            "command": command,
            "config_hash": hashlib.sha256(canonical.encode()).hexdigest()[:16],
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
        "config": config,
        "result": result,
    }
    path = outdir / name
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def _grid_from_args(args):
    mode = sphere.FULL_SPHERE if args.grid_mode == "full" else sphere.AXISYM_TRUNCATED
    n_phi = args.n_phi if mode == sphere.FULL_SPHERE else 1
    return sphere.build_grid(mode, args.n_theta, n_phi, args.theta_min)


# -- commands ---------------------------------------------------------------


def cmd_section(args):
    if args.n_theta is None:
        # module default resolutions: spectral full sphere 64, axisym zone 256
        args.n_theta = 64 if args.grid_mode == "full" else 256
    grid = _grid_from_args(args)
    if args.kind == "constant":
        spec = sections.SectionSpec(grid.constant_field(args.value))
    elif args.kind == "marginal":
        spec = greens.marginal_section_spec(grid)
    else:
        if not args.path:
            raise GridMismatchError("--kind csv needs --path")
        spec = sections.SectionSpec(sphere.field_from_csv(args.path, grid))
    geom = sections.compute_geometry(spec, tol=args.tol)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    sphere.field_to_csv(geom.tr_chi, outdir / "section_tr_chi.csv")
    sphere.field_to_csv(geom.tr_chibar, outdir / "section_tr_chibar.csv")
    sphere.field_to_csv(geom.K, outdir / "section_K.csv")
    config = {"kind": args.kind, "value": args.value, "path": args.path,
              "grid_mode": args.grid_mode, "n_theta": args.n_theta,
              "n_phi": args.n_phi, "theta_min": args.theta_min, "tol": args.tol}
    path = _write_report(args.outdir, "section_report.json", "section",
                         config, geom.report())
    print(path)
    return EXIT_OK


def cmd_hyperplane(args):
    if len(args.a) != 4:
        raise GridMismatchError("--a needs exactly 4 components")
    plane = hyperplanes.Hyperplane(Covector4(*args.a), args.c)
    grid = sphere.build_grid(sphere.AXISYM_TRUNCATED, args.n_theta, 1, 0.0)
    report = hyperplanes.trichotomy_report(plane, grid, margin=args.margin)
    config = {"a": args.a, "c": args.c, "n_theta": args.n_theta,
              "margin": args.margin}
    path = _write_report(args.outdir, "hyperplane_report.json", "hyperplane",
                         config, report)
    print(path)
    return EXIT_OK


def cmd_greens(args):
    refinements = [int(n) for n in args.refinements]
    result = {"residuals": {}, "flatness": None, "cos_moment": None}
    tests = {
        "1": lambda g: g.constant_field(1.0),
        "cos": lambda g: g.field_from_function(lambda th, ph: np.cos(th)),
        "Y20": lambda g: g.harmonic_field(2, 0),
        "Y40": lambda g: g.harmonic_field(4, 0),
    }
    for name, make in tests.items():
        result["residuals"][name] = [
            greens.distributional_residual(make(sphere.build_grid(sphere.FULL_SPHERE, n, 8)))
            for n in refinements]
    result["refinements"] = refinements
    result["cos_moment"] = greens.log_moment_weighted(lambda x: x)
    result["cos_moment_error"] = abs(result["cos_moment"] + 2.0 * np.pi)
    gz = sphere.build_grid(sphere.AXISYM_TRUNCATED, args.flatness_n, 1,
                           args.flatness_theta_min)
    result["flatness"] = greens.flatness_check(gz)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    greens.embedded_surface_to_csv(outdir / "greens_surface.csv",
                                   gz.theta_nodes[:: max(1, args.flatness_n // 64)],
                                   np.linspace(0.0, 2 * np.pi, 33)[:-1])
    config = {"refinements": refinements, "flatness_n": args.flatness_n,
              "flatness_theta_min": args.flatness_theta_min}
    path = _write_report(args.outdir, "greens_report.json", "greens",
                         config, result)
    print(path)
    return EXIT_OK


def cmd_construct(args):
    grid = con.default_construction_grid(args.n_theta)
    built = con.build_f_eps(args.eps, grid)
    k_eps = con.compute_k_eps(built, patch_n=args.patch_n)
    if args.k_csv:
        profile = con.EnergyProfile(sphere.field_from_csv(args.k_csv, grid))
    else:
        profile = con.EnergyProfile.cap_indicator(grid, args.k_scale * k_eps,
                                                  built.cap_boundary)
    report = con.verify_trapped(built, profile, margin=args.margin,
                                patch_n=args.patch_n)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    bound = con.bound_profile(built, profile, patch_n=args.patch_n)
    with open(outdir / "construct_profile.csv", "w") as fh:
        fh.write("theta,f_eps,tr_chi_upper,tr_chibar\n")
        for t, f, b in zip(grid.theta_nodes, built.f.values, bound.values):
            fh.write(f"{t:.17g},{f:.17g},{b:.17g},{-2.0 / f:.17g}\n")
    profile.to_csv(outdir / "construct_k.csv")
    result = report.to_dict()
    result.update({
        "k_eps": built.k_eps,
        "k_eps_location": built.k_eps_location,
        "f_at_pole": built.f_limit_at_pole(),
    })
    config = {"eps": args.eps, "k_scale": args.k_scale, "k_csv": args.k_csv,
              "n_theta": args.n_theta, "patch_n": args.patch_n,
              "margin": args.margin}
    path = _write_report(args.outdir, "construct_report.json", "construct",
                         config, result)
    print(path)
    return EXIT_OK


def cmd_scan(args):
    scan = con.asymptotic_scan(args.eps, n_theta=args.n_theta,
                               patch_n=args.patch_n, threads=args.threads)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scan.to_csv(outdir / "scan.csv")
    f_lo, f_hi = args.slope_window_f
    k_lo, k_hi = args.slope_window_k
    in_f = f_lo <= scan.slope_f <= f_hi
    in_k = k_lo <= scan.slope_k <= k_hi
    result = {
        "rows": [{"epsilon": r.epsilon, "f_eps_at_0": r.f_at_pole,
                  "k_eps": r.k_eps, "cap_lap_sup": r.cap_lap_sup}
                 for r in scan.rows],
        "slope_f": scan.slope_f,
        "slope_k": scan.slope_k,
        "slope_window_f": list(args.slope_window_f),
        "slope_window_k": list(args.slope_window_k),
        "slopes_in_windows": bool(in_f and in_k),
    }
    config = {"eps": args.eps, "n_theta": args.n_theta, "patch_n": args.patch_n,
              "slope_window_f": list(args.slope_window_f),
              "slope_window_k": list(args.slope_window_k),
              "window_check": not args.no_window_check}
    path = _write_report(args.outdir, "scan_report.json", "scan", config, result)
    print(path)
    if not args.no_window_check and not (in_f and in_k):
        print(f"slope window check failed: slope_f={scan.slope_f:.4f} "
              f"slope_k={scan.slope_k:.4f}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


def cmd_shortpulse(args):
    if args.csv:
        profile = shortpulse.PulseProfile.from_csv(args.csv, args.delta, args.r0)
    else:
        cutoff = con.smooth_cutoff()
        width = args.cap_width
        if args.angular == "cap":
            def ang(th, ph):
                return args.amplitude * cutoff(2.0 * np.asarray(th) / width)
        else:
            def ang(th, ph):
                return args.amplitude * np.ones_like(np.asarray(th))
        profile = shortpulse.PulseProfile.polynomial_bump(
            ang, lambda th, ph: np.zeros_like(np.asarray(th)), args.delta, args.r0)
    grid = con.default_construction_grid(args.n_theta)
    k = shortpulse.energy_per_solid_angle(profile, grid, n_quad=args.n_quad)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    k.to_csv(outdir / "shortpulse_k.csv")
    result = {"profile": profile.name, "delta": profile.delta, "r0": profile.r0,
              "k_max": k.k.max(), "k_min": k.k.min(),
              "total_energy": sphere.integrate(k.k)}
    if args.eps is not None:
        built = con.build_f_eps(args.eps, grid)
        k_eps = con.compute_k_eps(built, patch_n=args.patch_n)
        rep = con.verify_trapped(built, k, margin=args.margin,
                                 patch_n=args.patch_n)
        result["construct"] = rep.to_dict()
        result["construct"]["k_eps"] = k_eps
    config = {"csv": args.csv, "delta": args.delta, "r0": args.r0,
              "amplitude": args.amplitude, "angular": args.angular,
              "cap_width": args.cap_width, "n_theta": args.n_theta,
              "n_quad": args.n_quad, "eps": args.eps, "margin": args.margin,
              "patch_n": args.patch_n}
    path = _write_report(args.outdir, "shortpulse_report.json", "shortpulse",
                         config, result)
    print(path)
    return EXIT_OK


def cmd_selftest(args):
    from . import acceptance

    indices = set(int(i) for i in args.criteria) if args.criteria else None
    results = acceptance.run_all(indices)
    for res in results:
        print(res.line())
        if args.verbose or not res.passed:
            for label, ok, detail in res.checks:
                print(f"    {'ok' if ok else 'FAIL'}: {label}: {detail}")
    result = {"criteria": [r.to_dict() for r in results],
              "passed": all(r.passed for r in results)}
    config = {"criteria": sorted(indices) if indices else "all"}
    path = _write_report(args.outdir, "selftest_report.json", "selftest",
                         config, result)
    print(path)
    return EXIT_OK if result["passed"] else EXIT_ACCEPTANCE


# -- parser -----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lightcone",
        description="Geometry of spacelike sections of the Minkowski lightcone")
    parser.add_argument("--config", help="JSON file with default option values "
                        "(explicit flags win)")
    sub = parser.add_subparsers(dest="command", required=True)
    parser._command_choices = sub.choices

    def add_common(p):
        p.add_argument("--outdir", default=_outdir_default(),
                       help="output directory (env LIGHTCONE_OUTDIR)")

    p = sub.add_parser("section", help="geometry report for a graph section")
    p.add_argument("--kind", choices=["constant", "marginal", "csv"],
                   default="constant")
    p.add_argument("--value", type=float, default=1.0,
                   help="graph radius for --kind constant")
    p.add_argument("--path", help="field CSV for --kind csv")
    p.add_argument("--grid-mode", choices=["full", "axisym"], default="full")
    p.add_argument("--n-theta", type=int, default=None,
                   help="default 64 (full) or 256 (axisym)")
    p.add_argument("--n-phi", type=int, default=128)
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-8)
    add_common(p)
    p.set_defaults(func=cmd_section)

    p = sub.add_parser("hyperplane", help="curvature trichotomy of a hyperplane section")
    p.add_argument("--a", type=_csv_floats, required=True,
                   help="normal covector a0,a1,a2,a3")
    p.add_argument("--c", type=float, required=True, help="plane offset")
    p.add_argument("--n-theta", type=int, default=96)
    p.add_argument("--margin", type=float, default=hyperplanes.EDGE_MARGIN)
    add_common(p)
    p.set_defaults(func=cmd_hyperplane)

    p = sub.add_parser("greens", help="distributional identity and flatness checks")
    p.add_argument("--refinements", type=_csv_floats, default=[128, 256, 512])
    p.add_argument("--flatness-n", type=int, default=256)
    p.add_argument("--flatness-theta-min", type=float, default=0.2)
    add_common(p)
    p.set_defaults(func=cmd_greens)

    p = sub.add_parser("construct", help="build f_eps, compute k_eps, verify trappedness")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k-scale", type=float, default=1.1,
                   help="energy as a multiple of k_eps on the cap")
    p.add_argument("--k-csv", help="energy profile CSV (theta,k) instead of --k-scale")
    p.add_argument("--n-theta", type=int, default=512)
    p.add_argument("--patch-n", type=int, default=con.CAP_PATCH_N)
    p.add_argument("--margin", type=float, default=0.0)
    add_common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("scan", help="asymptotics of f_eps(0) and k_eps over an eps list")
    p.add_argument("--eps", type=_csv_floats, default=[0.2, 0.1, 0.05, 0.025])
    p.add_argument("--n-theta", type=int, default=512)
    p.add_argument("--patch-n", type=int, default=con.CAP_PATCH_N)
    p.add_argument("--slope-window-f", type=_csv_floats, default=[-2.3, -1.8])
    p.add_argument("--slope-window-k", type=_csv_floats, default=[-4.6, -3.7])
    p.add_argument("--no-window-check", action="store_true",
                   help="report slopes without the exit-3 window gate")
    p.add_argument("--threads", type=int, default=1,
                   help="fan the eps values out over a thread pool "
                   "(rows merge deterministically)")
    add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("shortpulse", help="incoming energy per solid angle from a pulse seed")
    p.add_argument("--csv", help="tabulated seed: columns s,theta,psi11,psi12")
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--r0", type=float, default=2.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--angular", choices=["cap", "uniform"], default="cap")
    p.add_argument("--cap-width", type=float, default=0.4,
                   help="support width of the cap-localized seed (radians)")
    p.add_argument("--n-theta", type=int, default=512,
                   help="construction-grid resolution (matches `construct`, "
                   "so the emitted k CSV can be fed back via --k-csv)")
    p.add_argument("--n-quad", type=int, default=64)
    p.add_argument("--eps", type=float, default=None,
                   help="also verify the f_eps construction against the computed k")
    p.add_argument("--margin", type=float, default=0.0)
    p.add_argument("--patch-n", type=int, default=con.CAP_PATCH_N)
    add_common(p)
    p.set_defaults(func=cmd_shortpulse)

    p = sub.add_parser("selftest", help="run the acceptance criteria")
    p.add_argument("--criteria", type=_csv_floats, default=None,
                   help="subset of criterion indices, e.g. 1,2,9")
    p.add_argument("--verbose", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def _apply_config_file(parser, subparsers, argv):
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        parser.error("--config needs a file path")
    with open(argv[idx + 1]) as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise LightconeError("config file must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in values.items()}
    # config supplies defaults; anything passed explicitly still wins
    for sp in subparsers.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
        for a in sp._actions:
            if a.dest in cfg and getattr(a, "required", False):
                a.required = False
    return argv[:idx] + argv[idx + 2:]


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, parser._command_choices, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except GridMismatchError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LightconeError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
