"""Command-line entry point: ``g2flow <subcommand> [options]``.

Every run writes its CSV outputs and a ``manifest.json`` into the output
directory (``--out``, or ``$G2FLOW_OUTPUT_ROOT/<subcommand>``). The manifest
is written on failure too, with the error recorded.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .curves import CURVE_PRESETS, MIN_SAMPLES, SPEED_TOL, CurveState, circle, helix, line, perturbed_circle
from .errors import DegenerateRotationError, G2FlowError, InvalidInputError
from .flow import (
    DEFAULT_CFL,
    SCHEMES,
    SPHERE_PRESETS,
    SPHERE_TOL,
    FlowConfig,
    SphereMapState,
    best_rigid_translation_error,
    conservation_report,
    evolve,
)
from .frame import (
    FRAME_ORDER,
    K1_THRESHOLD,
    KAPPA2_THRESHOLD,
    build_g2_frame,
    complex_frenet_residual,
    complexify_frame,
    frenet_residual,
    hasimoto_fields,
    table_errors,
)
from .io import NLSS_HEADER, InputPathError, prepare_output_dir, read_curve, read_matrix, read_nlss, write_columns, write_csv, write_manifest
from .nlss import DIVISOR_FLOOR, NLSS_ORDER, NLSS_PRESETS, SYSTEMS, NlssConfig, NlssState, cross_validate, evolve_nlss, soliton_exact, soliton_residual
from .octonion import BASIS_NAMES, IM_NAMES, BLOCK_A, cross_table, multiplication_table
from .stencils import BOUNDARIES, PERIODIC
from .surface import associative_plane_check, first_fundamental_form, rotate_frame, rotated_closed_form, second_fundamental_form

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2  # unknown flag or malformed value
EXIT_MISSING = 3  # a required option is absent
# 4 and 5 are unreadable input and unwritable output (see io.py); module errors use 10..16


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        code = EXIT_MISSING if "required" in message else EXIT_USAGE
        self.exit(code, f"{self.prog}: error: {message}\n")


# --- inputs -------------------------------------------------------------------------------


def _curve_from_args(args) -> CurveState:
    n = args.N
    if getattr(args, "input", None):
        pts = read_curve(args.input)
        closed = np.vstack([pts, pts[:1]]) if args.boundary == PERIODIC else pts
        ds = args.ds or float(np.sum(np.linalg.norm(np.diff(closed, axis=0), axis=1))) / (closed.shape[0] - 1)
        return CurveState(pts, ds, args.boundary)
    name = args.preset
    if name == "line":
        return line(n, args.ds or 0.01)
    if name == "circle":
        return circle(n)
    if name == "helix":
        return helix(n)
    if name == "perturbed-circle":
        dirs = ("i", "j", "k") if args.quaternionic else IM_NAMES
        return perturbed_circle(n, amplitude=args.amplitude, seed=args.seed, directions=dirs)
    raise InvalidInputError(f"unknown curve preset {name!r}")


def _matrix_from_arg(spec: str) -> np.ndarray:
    if spec in ("block-A", "paper-A"):
        return BLOCK_A.copy()
    if spec == "identity":
        return np.eye(7)
    if not Path(spec).exists():
        raise InputPathError(f"matrix file {spec} does not exist")
    return read_matrix(spec)


def _dt(args, ds: float) -> float:
    return args.dt if args.dt is not None else args.cfl * ds**2


def _curve_rows(curve: CurveState):
    return np.column_stack([curve.s, curve.points])


CURVE_HEADER = ["s", *IM_NAMES]


# --- subcommands ----------------------------------------------------------------------------
# each returns (metrics, thresholds, outputs)


def cmd_tables(args, out: Path):
    mul = multiplication_table()
    crs = cross_table()
    write_csv(out / "multiplication_table.csv", ["", *IM_NAMES], [[IM_NAMES[a], *mul[a]] for a in range(7)])
    write_csv(out / "cross_table.csv", ["", *IM_NAMES], [[IM_NAMES[a], *crs[a]] for a in range(7)])
    antisym = all(crs[a][b] == ("0" if a == b else _neg(crs[b][a])) for a in range(7) for b in range(7))
    return {"basis": list(BASIS_NAMES), "entries": 49, "cross_antisymmetric": antisym}, {}, ["multiplication_table.csv", "cross_table.csv"]


def _neg(sym: str) -> str:
    return sym[1:] if sym.startswith("-") else "-" + sym


def cmd_frame(args, out: Path):
    curve = _curve_from_args(args)
    fr = build_g2_frame(
        curve,
        k1_threshold=args.k1_threshold,
        kappa2_threshold=args.kappa2_threshold,
        speed_tol=args.speed_tol,
    )
    rho, beta = fr.constraint_errors()
    res = frenet_residual(fr)
    cf = complexify_frame(fr)
    fields = hasimoto_fields(fr, cf)
    cres = complex_frenet_residual(cf, fields)
    mul_err, cross_err = table_errors(cf)
    cols = {"s": fr.s, "k1": fr.k1, "kappa2": fr.kappa2, "rho1": fr.rho1, "rho2": fr.rho2, "rho3": fr.rho3}
    cols.update(alpha=fr.alpha, beta1=fr.beta1, beta2=fr.beta2)
    for a, vec in enumerate(FRAME_ORDER):
        for b, comp in enumerate(IM_NAMES):
            cols[f"{vec}_{comp}"] = fr.frame[:, a, b]
    write_columns(out / "invariants.csv", cols)
    fcols = {"s": fields.s}
    for i in range(3):
        fcols[f"phi{i + 1}_re"] = fields.phi[:, i].real
        fcols[f"phi{i + 1}_im"] = fields.phi[:, i].imag
    write_columns(out / "fields.csv", fcols)
    metrics = {
        "N": curve.n,
        "ds": curve.ds,
        "degenerate_samples": int(np.sum(fr.degenerate)),
        "rho_constraint_max": rho,
        "beta_constraint_max": beta,
        "gram_error": fr.gram_error(),
        "frenet_residual_max": res.max_residual,
        "frenet_antisymmetry": res.antisymmetry,
        "complex_frenet_residual_max": cres.max_residual,
        "complex_relations": cf.relation_errors(),
        "complex_table_error": mul_err,
        "complex_cross_table_error": cross_err,
        "twists": fields.twist,
    }
    thresholds = {"k1_threshold": args.k1_threshold, "kappa2_threshold": args.kappa2_threshold, "speed_tol": curve.speed_tolerance(args.speed_tol)}
    return metrics, thresholds, ["invariants.csv", "fields.csv"]


def _flow_outputs(traj, out: Path, stem: str):
    """One CSV per output time (``<stem>_0000.csv`` is the initial state) plus a times index."""
    names = []
    for k, st in enumerate(traj.states):
        names.append(f"{stem}_{k:04d}.csv")
        write_csv(out / names[-1], CURVE_HEADER, _curve_rows(st))
    write_csv(out / f"{stem}_times.csv", ["index", "t", "file"], [(k, t, n) for k, (t, n) in enumerate(zip(traj.times, names))])
    return names + [f"{stem}_times.csv"]


def _flow_config(args, ds: float, **kw) -> FlowConfig:
    cfg = FlowConfig(dt=_dt(args, ds), t_end=args.t_end, scheme=args.scheme, cfl=args.cfl, n_outputs=args.n_outputs, **kw)
    return cfg


def cmd_simulate_curve(args, out: Path, A=None):
    curve = _curve_from_args(args)
    curve.check_unit_speed(args.speed_tol)
    kw = {"variant": "modified", "A": A} if A is not None else {}
    cfg = _flow_config(args, curve.ds, **kw)
    traj = evolve(curve, cfg)
    metrics = {"N": curve.n, "ds": curve.ds, "steps": traj.steps, "dt_used": traj.dt_used, "t_final": traj.times[-1]}
    metrics.update(conservation_report(traj).maxima())
    metrics["displacement_k"] = float(np.mean(traj.final.points[:, 2] - curve.points[:, 2]))
    if args.preset == "circle" and not getattr(args, "input", None):
        metrics["translation_error"] = best_rigid_translation_error(traj, np.eye(7)[2])
    thresholds = {"cfl": cfg.cfl, "blowup_norm": cfg.blowup_norm, "speed_tol": curve.speed_tolerance(args.speed_tol)}
    return metrics, {**thresholds, "flow": cfg.as_dict()}, _flow_outputs(traj, out, "curve")


def cmd_simulate_modified(args, out: Path):
    return cmd_simulate_curve(args, out, A=_matrix_from_arg(args.A))


def cmd_simulate_u(args, out: Path):
    if args.preset in SPHERE_PRESETS:
        u0 = SPHERE_PRESETS[args.preset](args.N)
    else:
        u0 = SphereMapState.from_curve(_curve_from_args(args))
    cfg = _flow_config(args, u0.ds, projection=args.projection)
    traj = evolve(u0, cfg)
    metrics = {"N": u0.n, "ds": u0.ds, "steps": traj.steps, "dt_used": traj.dt_used}
    metrics.update(conservation_report(traj).maxima())
    metrics["fixed_point_error"] = float(np.max(np.abs(traj.final.points - u0.points)))
    return metrics, {"sphere_tol": SPHERE_TOL, "flow": cfg.as_dict()}, _flow_outputs(traj, out, "u")


def _nlss_rows(state):
    cols = [state.s]
    for i in range(3):
        cols += [state.phi[:, i].real, state.phi[:, i].imag]
    return np.column_stack(cols)


def cmd_simulate_nlss(args, out: Path):
    if args.input:
        phi, ds = read_nlss(args.input)
        state = NlssState(phi, ds, args.boundary, twist=np.array(args.twist))
    else:
        state = NLSS_PRESETS[args.preset](args.N)
    cfg = NlssConfig(
        dt=_dt(args, state.ds),
        t_end=args.t_end,
        system=args.system,
        cfl=args.cfl,
        n_outputs=args.n_outputs,
        divisor_floor=args.divisor_floor,
        order=args.order,
    )
    soliton_run = args.preset == "soliton" and not args.input
    metrics = {"N": state.n, "ds": state.ds}
    if soliton_run:
        metrics["rhs_residual_t0"] = soliton_residual(state, system=args.system, order=args.order)
    traj = evolve_nlss(state, cfg)
    metrics.update(steps=traj.steps, dt_used=traj.dt_used, mass_drift=traj.mass_drift(), max_integrand_mean=traj.max_integrand_mean)
    if soliton_run:
        fin = traj.final
        metrics["profile_error"] = float(np.max(np.abs(np.abs(fin.phi[:, 0]) - np.abs(state.phi[:, 0]))))
        metrics["solution_error"] = float(np.max(np.abs(fin.phi[:, 0] - soliton_exact(fin))))
    names = []
    for k, st in enumerate(traj.states):
        names.append(f"nlss_{k:04d}.csv")
        write_csv(out / names[-1], NLSS_HEADER, _nlss_rows(st))
    write_csv(out / "nlss_times.csv", ["index", "t", "file"], [(k, t, n) for k, (t, n) in enumerate(zip(traj.times, names))])
    return metrics, {"nlss": cfg.as_dict()}, names + ["nlss_times.csv"]


def cmd_cross_validate(args, out: Path):
    grids = tuple(args.grids)
    if min(grids) < MIN_SAMPLES:
        raise InvalidInputError(f"grid sizes must be at least {MIN_SAMPLES}")

    def make(n):
        args.N = n
        return _curve_from_args(args)

    rep = cross_validate(make, args.t_end, grids=grids, cfl=args.cfl, n_outputs=args.n_outputs, divisor_floor=args.divisor_floor)
    rows = []
    for g in rep.grids:
        rows.append([g.n, g.ds, g.dt, g.steps, *g.magnitude, *g.phase_derivative])
    header = ["N", "ds", "dt", "steps", "mag_phi1", "mag_phi2", "mag_phi3", "dphase_phi1", "dphase_phi2", "dphase_phi3"]
    write_csv(out / "cross_validate.csv", header, rows)
    return rep.as_dict(), {"cfl": args.cfl, "divisor_floor": args.divisor_floor}, ["cross_validate.csv"]


def cmd_surface(args, out: Path):
    curve = _curve_from_args(args)
    fr = build_g2_frame(curve, speed_tol=args.speed_tol)
    fields = hasimoto_fields(fr, complexify_frame(fr))
    _, g_tt, degenerate = first_fundamental_form(fields, args.divisor_floor)
    h = second_fundamental_form(fields, args.divisor_floor)
    cols = {"s": fields.s, "g_tt": g_tt, **h.columns(), "phi2_limit": h.limit_mask}
    metrics = {"N": curve.n, "symmetry_error": h.symmetry_error(), "metric_degenerate": bool(np.any(degenerate))}
    metrics["phi2_limit_samples"] = int(np.sum(h.limit_mask))
    metrics["max_abs_h4_to_h7"] = float(np.max(np.abs(h.h[:, 1:])))
    try:
        hr = rotate_frame(h, fields, args.divisor_floor)
    except DegenerateRotationError:
        if args.rotate == "always":
            raise
        metrics["rotation"] = "degenerate"
    else:
        cols["theta"] = hr.theta
        for name, v in hr.columns().items():
            cols[f"rot_{name}"] = v
        closed = rotated_closed_form(h, fields)
        metrics["rotation"] = "applied"
        metrics["rotation_closed_form_error"] = float(max(np.max(np.abs(hr.entry(4, 2, 2) - closed[0])), np.max(np.abs(hr.entry(7, 2, 2) - closed[1]))))
        metrics["frobenius_change"] = float(np.max(np.abs(hr.frobenius() - h.frobenius())))
    write_columns(out / "surface.csv", cols)
    thresholds = {"divisor_floor": args.divisor_floor, "plane_tol": args.plane_tol, "speed_tol": curve.speed_tolerance(args.speed_tol)}
    if args.t_end > 0:
        cfg = _flow_config(args, curve.ds)
        traj = evolve(curve, cfg)
        metrics["associative_plane"] = associative_plane_check(traj, args.plane_tol).as_dict()
        thresholds["flow"] = cfg.as_dict()
    return metrics, thresholds, ["surface.csv"]


COMMANDS = {
    "tables": cmd_tables,
    "frame": cmd_frame,
    "simulate-curve": cmd_simulate_curve,
    "simulate-u": cmd_simulate_u,
    "simulate-nlss": cmd_simulate_nlss,
    "simulate-modified": cmd_simulate_modified,
    "cross-validate": cmd_cross_validate,
    "surface": cmd_surface,
}


# --- parser ---------------------------------------------------------------------------------


def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {x}")
    return v


def _curve_args(p, default_n: int, default_preset: str | None = "helix", presets=tuple(CURVE_PRESETS)):
    src = p.add_mutually_exclusive_group(required=default_preset is None)
    src.add_argument("--preset", choices=presets, default=default_preset)
    src.add_argument("--input", help="curve CSV with seven coordinate columns")
    p.add_argument("--N", type=int, default=default_n, help="number of samples (>= 8)")
    p.add_argument("--ds", type=_positive, help="sample spacing for --input curves and the line preset")
    p.add_argument("--boundary", choices=BOUNDARIES, default=PERIODIC)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--amplitude", type=float, default=0.04, help="perturbed-circle amplitude")
    p.add_argument("--quaternionic", action="store_true", help="perturb only inside span{i, j, k}")
    p.add_argument("--speed-tol", type=_positive, default=None, help=f"unit-speed tolerance (default {SPEED_TOL:g} + ds^2)")


def _time_args(p, t_end: float, n_outputs: int = 1):
    p.add_argument("--dt", type=_positive, default=None, help="time step (default cfl * ds^2)")
    p.add_argument("--t-end", type=float, default=t_end)
    p.add_argument("--cfl", type=_positive, default=DEFAULT_CFL)
    p.add_argument("--n-outputs", type=int, default=n_outputs)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="g2flow", description="Octonionic curve flows, the S^6 Schroedinger flow and the three-field NLS system.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = {}

    def add(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--out", help="output directory (default $G2FLOW_OUTPUT_ROOT/<command>)")
        p.add_argument("--config", help="JSON file of option defaults; command-line flags win")
        parser.commands[name] = p
        return p

    add("tables", "dump the imaginary multiplication and cross-product tables")

    p = add("frame", "build the G2 frame of a curve and report residuals")
    _curve_args(p, 512)
    p.add_argument("--k1-threshold", type=_positive, default=K1_THRESHOLD)
    p.add_argument("--kappa2-threshold", type=_positive, default=KAPPA2_THRESHOLD)

    for name, helptext in (("simulate-curve", "evolve a curve by gamma_t = gamma_s x gamma_ss"), ("simulate-modified", "evolve a curve by the J^A flow")):
        p = add(name, helptext)
        _curve_args(p, 256, "circle")
        _time_args(p, 0.1)
        p.add_argument("--scheme", choices=SCHEMES, default="rk4")
        if name == "simulate-modified":
            p.add_argument("--A", required=True, help="'block-A' (alias 'paper-A'), 'identity' or a 7x7 CSV file")

    p = add("simulate-u", "evolve a map into S^6 by u_t = u x u_ss")
    _curve_args(p, 256, "great-circle", tuple(SPHERE_PRESETS) + tuple(CURVE_PRESETS))
    _time_args(p, 0.1)
    p.add_argument("--scheme", choices=SCHEMES, default="rk4")
    p.add_argument("--projection", choices=("none", "renormalize_tangent"), default="renormalize_tangent")

    p = add("simulate-nlss", "evolve the three-field system")
    p.add_argument("--preset", choices=tuple(NLSS_PRESETS), default="soliton")
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--input", help="CSV with columns s, re1, im1, re2, im2, re3, im3 (overrides --preset)")
    p.add_argument("--boundary", choices=BOUNDARIES, default=PERIODIC)
    p.add_argument("--twist", type=float, nargs=3, default=[0.0, 0.0, 0.0], help="phase gained by each field over one period")
    p.add_argument("--system", choices=SYSTEMS, default="nlst")
    p.add_argument("--order", type=int, choices=(4, 6), default=NLSS_ORDER)
    p.add_argument("--divisor-floor", type=_positive, default=DIVISOR_FLOOR)
    _time_args(p, 0.5)

    p = add("cross-validate", "compare the curve flow with the three-field system under refinement")
    _curve_args(p, 128, "perturbed-circle")
    _time_args(p, 0.05, 5)
    p.add_argument("--grids", type=int, nargs="+", default=[128, 256])
    p.add_argument("--divisor-floor", type=_positive, default=DIVISOR_FLOOR)

    p = add("surface", "second fundamental form of the swept surface")
    _curve_args(p, 256)
    _time_args(p, 0.0)
    p.add_argument("--divisor-floor", type=_positive, default=DIVISOR_FLOOR)
    p.add_argument("--scheme", choices=SCHEMES, default="rk4")
    p.add_argument("--rotate", choices=("auto", "always"), default="auto", help="'always' fails when the rotation is undefined")
    p.add_argument("--plane-tol", type=_positive, default=1e-8)
    return parser


def validate(args) -> None:
    n = getattr(args, "N", None)
    if n is not None and n < MIN_SAMPLES:
        raise InvalidInputError(f"N = {n} is too small; need N >= {MIN_SAMPLES}")
    t_end = getattr(args, "t_end", None)
    if t_end is not None and not t_end >= 0:
        raise InvalidInputError("t_end must be non-negative")
    if getattr(args, "n_outputs", 1) < 1:
        raise InvalidInputError("n_outputs must be at least 1")
    path = getattr(args, "input", None)
    if path and not Path(path).is_file():
        raise InputPathError(f"input file {path} does not exist")


def run(args) -> int:
    """Execute a parsed command; always leaves a manifest behind once the output directory exists."""
    config = {k: v for k, v in sorted(vars(args).items())}
    try:
        out = prepare_output_dir(args.out, args.command)
    except G2FlowError as exc:
        print(f"g2flow: error: {exc}", file=sys.stderr)
        return exc.exit_code
    t0 = time.perf_counter()
    metrics, thresholds, outputs, error, code = {}, {}, [], None, EXIT_OK
    try:
        validate(args)
        metrics, thresholds, outputs = COMMANDS[args.command](args, out)
    except G2FlowError as exc:
        error = {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        code = exc.exit_code
    except Exception as exc:  # noqa: BLE001 - recorded in the manifest, then reported
        error = {"type": type(exc).__name__, "message": str(exc), "exit_code": EXIT_INTERNAL, "traceback": traceback.format_exc()}
        code = EXIT_INTERNAL
    status = "ok" if error is None else "failed"
    write_manifest(out, config, metrics, thresholds, status, time.perf_counter() - t0, __version__, error, outputs)
    if error is not None:
        print(f"g2flow: {error['type']}: {error['message']}", file=sys.stderr)
    return code


def _config_defaults(argv) -> tuple[str | None, dict]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return known.command, {}
    try:
        doc = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputPathError(f"cannot read config file {known.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config file {known.config} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInputError("config file must hold a JSON object")
    return known.command, {k.replace("-", "_"): v for k, v in doc.items()}


def _apply_config(parser, command, defaults) -> None:
    sub = parser.commands.get(command)
    if sub is None or not defaults:
        return
    dests = {a.dest: a for a in sub._actions}
    unknown = sorted(set(defaults) - set(dests) - {"command"})
    if unknown:
        parser.exit(EXIT_USAGE, f"g2flow: error: unknown config keys: {', '.join(unknown)}\n")
    for key in defaults:
        if key in dests:
            dests[key].required = False
    sub.set_defaults(**{k: v for k, v in defaults.items() if k in dests})


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        command, defaults = _config_defaults(argv)
    except G2FlowError as exc:
        print(f"g2flow: error: {exc}", file=sys.stderr)
        return exc.exit_code
    _apply_config(parser, command, defaults)
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
