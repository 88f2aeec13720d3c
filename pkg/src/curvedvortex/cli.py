"""Command-line front end.

    curvedvortex solve-planar --config cfg.json --out runs
    curvedvortex solve-radial --config cfg.json --set radial.metric=self-consistent
    curvedvortex observables  --config cfg.json
    curvedvortex sweep        --config cfg.json --sweep G=0,0.005,0.01
    curvedvortex self-test

Exit codes: 0 success, 2 invalid configuration or parameters, 3 solver did
not converge (artifacts still written, marked as failed), 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import logging
import math
import os
import sys
import time

from . import __version__
from . import io as vio
from .errors import GridError, InadmissibleParams, NoConvergence, VortexError
from .params import (SOLVER_DEFAULTS, check_config, make_radial_grid, params_from_config,
                     require_valid, solver_options)

log = logging.getLogger("curvedvortex")

COMMANDS = ("solve-planar", "solve-radial", "observables", "sweep", "self-test")
SWEEP_AXES = ("G", "lambda", "N", "g0")
EXIT_OK, EXIT_INVALID, EXIT_NOCONV, EXIT_IO = 0, 2, 3, 4

_OPTIONAL_KEYS = {
    "solver": set(SOLVER_DEFAULTS) | {"richardson"},
    "radial": {"r_min", "r_max", "nodes", "metric", "v_equation", "tail_tol"},
    "grid": {"R", "n"},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply dotted ``key=value`` overrides in order (last one wins)."""
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form KEY=VALUE")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = cfg
        for depth, part in enumerate(parts[:-1]):
            if part not in node:
                if depth == 0 and part in _OPTIONAL_KEYS:
                    node[part] = {}
                else:
                    raise ConfigError(f"override {key!r} does not match a config key")
            node = node[part]
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-table value")
        last = parts[-1]
        allowed = _OPTIONAL_KEYS.get(parts[0], set()) if len(parts) == 2 else set()
        if last not in node and last not in allowed:
            raise ConfigError(f"override {key!r} does not match a config key")
        node[last] = _parse_value(text)
    return cfg


def load_run_config(path, overrides=()):
    if path is None:
        raise ConfigError("--config is required for this command")
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    cfg = apply_overrides(cfg, overrides)
    try:
        check_config(cfg)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    return cfg


def _check_radial_modes(cfg):
    from .metric import POWER_LAW, SELF_CONSISTENT
    from .radial import EULER_LAGRANGE, STANDARD

    rc = cfg.get("radial", {})
    if rc.get("metric", POWER_LAW) not in (POWER_LAW, SELF_CONSISTENT):
        raise ConfigError(f"radial.metric must be {POWER_LAW!r} or {SELF_CONSISTENT!r}")
    if rc.get("v_equation", STANDARD) not in (STANDARD, EULER_LAGRANGE):
        raise ConfigError(f"radial.v_equation must be {STANDARD!r} or {EULER_LAGRANGE!r}")


def _radial_grid(cfg):
    rc = cfg.get("radial", {})
    return make_radial_grid(float(rc.get("r_min", 1e-3)), float(rc.get("r_max", 1e3)),
                            nodes=rc.get("nodes"))


# ---------------------------------------------------------------------------
# solves


def _solve(cfg, kind):
    params = params_from_config(cfg)
    require_valid(params)
    opts = solver_options(cfg)
    if kind == "planar":
        from .planar import solve_planar

        if "grid" not in cfg:
            raise ConfigError("planar solves need a grid:{R,n} table")
        g = cfg["grid"]
        return solve_planar(params, R=float(g["R"]), n=int(g["n"]), tol=float(opts["tol"]),
                            max_outer=int(opts["max_iter"]), max_inner=int(opts["max_inner"]),
                            omega=float(opts["omega"]))
    from .radial import STANDARD, TAIL_TOL, fixed_point_T

    rc = cfg.get("radial", {})
    return fixed_point_T(params, tol=float(opts["tol"]), max_iter=int(opts["max_iter"]),
                         omega=float(opts["omega"]), grid=_radial_grid(cfg),
                         metric_mode=rc.get("metric", "power"),
                         v_equation=rc.get("v_equation", STANDARD),
                         tail_tol=float(rc.get("tail_tol", TAIL_TOL)))


def _kind_of(cfg, command):
    if command == "solve-planar":
        return "planar"
    if command == "solve-radial":
        return "radial"
    return "planar" if "grid" in cfg else "radial"


def _report(sol, cfg):
    from .observables import observable_report

    richardson = bool(solver_options(cfg).get("richardson", True))
    return observable_report(sol, richardson=richardson)


def _write_solution(outdir, sol, kind):
    files = []
    if kind == "planar":
        # F12 column from the self-dual relation (non-negative, finite on vortex nodes)
        vio.write_fields_csv(os.path.join(outdir, "fields.csv"), sol)
        vio.write_json(os.path.join(outdir, "telemetry.json"), vio.planar_telemetry(sol))
        files += ["fields.csv", "telemetry.json"]
    else:
        from .radial import verify_radial_properties

        props = verify_radial_properties(sol)
        vio.write_profile_csv(os.path.join(outdir, "profile.csv"), sol)
        tel = vio.radial_telemetry(sol, props)
        tel["properties"] = [{"name": c.name, "status": c.status, "message": c.message}
                             for c in props.checks]
        vio.write_json(os.path.join(outdir, "telemetry.json"), tel)
        files += ["profile.csv", "telemetry.json"]
    return files


def _write_report(outdir, report):
    vio.write_json(os.path.join(outdir, "report.json"), report.as_dict())
    with open(os.path.join(outdir, "report.csv"), "w") as fh:
        fh.write(report.csv_header() + "\n" + report.csv_row() + "\n")
    return ["report.json", "report.csv"]


# ---------------------------------------------------------------------------
# commands


def _run_solve(command, cfg, outdir):
    kind = _kind_of(cfg, command)
    status, code, files, message = "ok", EXIT_OK, [], None
    try:
        sol = _solve(cfg, kind)
    except NoConvergence as exc:
        sol, status, code, message = exc.state, "not-converged", EXIT_NOCONV, str(exc)
        if exc.diagnosis:
            message += f" ({exc.diagnosis})"
    report = None
    if sol is not None and (command == "observables" or status == "ok"):
        try:
            report = _report(sol, cfg)
        except VortexError as exc:
            log.warning("observables unavailable: %s", exc)
    if sol is not None and command != "observables":
        files += _write_solution(outdir, sol, kind)
    if report is not None:
        files += _write_report(outdir, report)
        log.info("flux %.10g  energy %.10g  curvature %.10g", report.flux, report.energy,
                 report.total_curvature)
    return code, status, files, message


def sweep_values(text):
    """Parse ``KEY=V1,V2,...``; an empty value list is allowed."""
    if "=" not in text:
        raise ConfigError(f"--sweep expects KEY=V1,V2,..., got {text!r}")
    key, vals = text.split("=", 1)
    key = key.strip()
    if key not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got {key!r}")
    values = [_parse_value(v.strip()) for v in vals.split(",") if v.strip()]
    if key == "N":
        if any(not isinstance(v, int) or v < 0 for v in values):
            raise ConfigError("N sweep values must be non-negative integers")
    elif any(not isinstance(v, (int, float)) or isinstance(v, bool) for v in values):
        raise ConfigError(f"{key} sweep values must be numbers")
    return key, values


def _with_axis(cfg, key, value):
    cfg = copy.deepcopy(cfg)
    if key == "N":
        base = cfg["points"][0] if cfg["points"] else [0.0, 0.0]
        cfg["points"] = [list(base) for _ in range(value)]
    else:
        cfg[key] = value
    return cfg


SWEEP_COLUMNS = ("index", "key", "value", "status", "flux", "energy", "total_curvature",
                 "deficit_angle", "current_flux", "b_u", "b_F12", "message")


def run_sweep(cfg, key, values, outdir):
    """One row per value in input order; failing rows are recorded and skipped."""
    rows = []
    worst = EXIT_OK
    for i, value in enumerate(values):
        row = {"index": i, "key": key, "value": value, "status": "ok", "message": ""}
        try:
            c = _with_axis(cfg, key, value)
            sol = _solve(c, _kind_of(c, "sweep"))
            rep = _report(sol, c)
            row.update(flux=rep.flux, energy=rep.energy, total_curvature=rep.total_curvature,
                       deficit_angle=rep.deficit_angle, current_flux=rep.current_flux)
            for k in ("b_u", "b_F12"):
                f = rep.decay.get(k)
                row[k] = getattr(f, "exponent", float("nan"))
        except NoConvergence as exc:
            row.update(status="not-converged", message=str(exc))
            worst = max(worst, EXIT_NOCONV)
        except (InadmissibleParams, GridError, ConfigError, ValueError, VortexError) as exc:
            row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
        rows.append(row)
        log.info("sweep %s=%s: %s", key, value, row["status"])
    path = os.path.join(outdir, "sweep.csv")
    with open(path, "w") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            cells = []
            for col in SWEEP_COLUMNS:
                v = row.get(col, float("nan"))
                if isinstance(v, float):
                    cells.append("%.17g" % v)
                else:
                    cells.append('"' + str(v).replace('"', "'") + '"' if col == "message" else str(v))
            fh.write(",".join(cells) + "\n")
    return worst, rows


def _output_dir(base, command):
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S")
    path = os.path.join(base, f"{command}-{stamp}")
    k = 1
    while os.path.exists(path):
        path = os.path.join(base, f"{command}-{stamp}-{k}")
        k += 1
    os.makedirs(path)
    return path


def build_parser():
    ap = argparse.ArgumentParser(prog="curvedvortex", description=__doc__.split("\n")[0],
                                 epilog="exit codes: 0 ok, 2 invalid config/parameters, "
                                        "3 not converged, 4 I/O error")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="JSON run configuration")
    ap.add_argument("--out", metavar="DIR", default="runs",
                    help="parent directory for <command>-<timestamp>/ (default: runs)")
    ap.add_argument("--set", metavar="KEY=VAL", action="append", default=[], dest="overrides",
                    help="override a config entry by dotted path, e.g. grid.n=257 (repeatable)")
    ap.add_argument("--sweep", metavar="KEY=V1,V2,...",
                    help=f"sweep axis and values; KEY in {{{', '.join(SWEEP_AXES)}}}")
    ap.add_argument("--quiet", action="store_true", help="only warnings and errors")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    if args.command == "self-test":
        from .selftest import run_selftest

        results = run_selftest()
        for name, ok, msg in results:
            if not args.quiet or not ok:
                print(f"{'PASS' if ok else 'FAIL'} {name}: {msg}")
        return EXIT_OK if all(ok for _, ok, _ in results) else 1

    t0 = time.perf_counter()
    try:
        cfg = load_run_config(args.config, args.overrides)
        if args.command == "sweep":
            if not args.sweep:
                raise ConfigError("sweep needs --sweep KEY=V1,V2,...")
            key, values = sweep_values(args.sweep)
        params = params_from_config(cfg)
        if args.command != "sweep":
            require_valid(params)
            if _kind_of(cfg, args.command) == "radial":
                _radial_grid(cfg)
                _check_radial_modes(cfg)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InadmissibleParams, GridError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        outdir = _output_dir(args.out, args.command)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "sweep":
            code, _ = run_sweep(cfg, key, values, outdir)
            status, files, message = ("ok" if code == EXIT_OK else "partial"), ["sweep.csv"], None
        else:
            code, status, files, message = _run_solve(args.command, cfg, outdir)
        manifest = {"command": args.command, "config": cfg, "overrides": list(args.overrides),
                    "version": __version__, "status": status, "exit_code": code,
                    "files": files + ["manifest.json"], "message": message,
                    "wall_clock_seconds": time.perf_counter() - t0,
                    "finished": _dt.datetime.now().isoformat(timespec="seconds")}
        if args.command == "sweep":
            manifest["sweep"] = args.sweep
        vio.write_json(os.path.join(outdir, "manifest.json"), manifest)
    except OSError as exc:
        print(f"error: writing results failed: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InadmissibleParams, GridError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if message:
        print(f"error: {message}", file=sys.stderr)
    if not args.quiet:
        print(outdir)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
