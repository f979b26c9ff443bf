"""Command line front end: ``pumi {interpolate,benchmark,simulate,surface}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, ecology, surface
from .errors import (DuplicateSites, IllConditionedPatch, MissingParameters, NumericalBlowup,
                     PumiError, TooFewPoints, UncoveredSites)
from .io import InputFormatError, load_param_file, read_points_csv, read_query_csv, write_csv
from .pum import STRUCTURES, PumConfig, ScatteredData, build_pum

log = logging.getLogger("pumi")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNCOVERED = 3
EXIT_MISSING_PARAMS = 4
EXIT_BLOWUP = 5
EXIT_NO_SAMPLES = 6

EXIT_CODES_HELP = """exit codes:
  0  success
  2  malformed or unreadable input (message cites the line when known)
  3  data sites left uncovered by the patches (indices listed)
  4  parameter file lacks model parameters (a and b are never defaulted)
  5  numerical blow-up during integration (time stamp reported)
  6  no grid point produced a valid bisection bracket
"""

DEFAULT_SURFACE = {
    "e": [0.59, 0.62],
    "alpha": [19.5, 20.5],
    "grid": [10, 11],
    "mu_range": [0.026, 0.035],
    "eval_grid": 40,
}


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def parse_grid(text: str):
    """``"40"`` -> (40, 40); ``"10x11"`` -> (10, 11)."""
    parts = text.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid spec {text!r}; use N or NxM") from None
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"bad grid spec {text!r}; use N or NxM")
    return tuple(dims)


def _int_list(text: str):
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def _need_file(path, what="input"):
    if path is None:
        raise CliError(EXIT_INPUT, f"--{what} is required")
    if not Path(path).is_file():
        raise CliError(EXIT_INPUT, f"{what} file not found: {path}")


def _need_out_dir(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise CliError(EXIT_INPUT, f"output directory does not exist: {parent}")


def regular_grid(rect, nx, ny):
    xs = np.linspace(rect.min_x, rect.max_x, nx)
    ys = np.linspace(rect.min_y, rect.max_y, ny)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def cmd_interpolate(args) -> int:
    _need_file(args.input)
    if args.query:
        _need_file(args.query, "query")
    _need_out_dir(args.output)
    sites, values = read_points_csv(args.input)
    if len(values) < 16:
        raise CliError(EXIT_INPUT, f"need at least 16 data rows, got {len(values)}")
    query = read_query_csv(args.query) if args.query else None

    cfg = PumConfig(epsilon=args.epsilon, structure=args.structure)
    try:
        model = build_pum(ScatteredData(sites, values), cfg)
    except UncoveredSites as exc:
        raise CliError(EXIT_UNCOVERED, str(exc)) from None
    except (DuplicateSites, IllConditionedPatch, TooFewPoints) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None

    pts = query if query is not None else regular_grid(model.rect, *args.grid)
    res = model.eval_batch(pts)
    write_csv(args.output, ("x", "y", "value"),
              ([pts[i, 0], pts[i, 1], res.values[i]] for i in np.flatnonzero(res.ok)))
    if res.failed:
        log.warning("%d of %d evaluation points skipped (outside hull or uncovered)",
                    len(res.failed), len(pts))
    if args.save_model:
        model.save(args.save_model)
    log.info("patches=%d delta_pu=%g q=%d epsilon=%g", model.d, model.delta_pu, model.q,
             model.kernel.epsilon)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    _need_out_dir(args.output)
    structures = tuple(args.structure) if args.structure else bench.STRUCTURES
    rows = bench.run_benchmark(args.n, seed=args.seed, structures=structures)
    write_csv(args.output, bench.CSV_HEADER, ([r[k] for k in bench.CSV_HEADER] for r in rows))
    for r in rows:
        log.info("%-7s N=%-7d build=%.4fs query=%.4fs", r["structure"], r["N"],
                 r["build_seconds"], r["total_query_seconds"])
    return EXIT_OK


def _load_params(path):
    _need_file(path)
    try:
        return load_param_file(path)
    except MissingParameters as exc:
        raise CliError(EXIT_MISSING_PARAMS, str(exc)) from None
    except (InputFormatError, ValueError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None


def cmd_simulate(args) -> int:
    cfg = _load_params(args.input)
    _need_out_dir(args.output)
    dt = args.dt if args.dt is not None else cfg["dt"]
    horizon = args.horizon if args.horizon is not None else cfg["horizon"]
    try:
        traj = ecology.integrate(cfg["state"], cfg["params"], horizon, dt)
    except NumericalBlowup as exc:
        raise CliError(EXIT_BLOWUP, str(exc)) from None
    idx = np.arange(0, len(traj), max(1, args.every))
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    write_csv(args.output, ("t", "H", "G", "T"),
              ([traj.t[i], *traj.states[i]] for i in idx))
    return EXIT_OK


def cmd_surface(args) -> int:
    cfg = _load_params(args.input)
    prefix = Path(args.output)
    _need_out_dir(prefix)
    spec = dict(DEFAULT_SURFACE, **cfg["surface"])
    if args.grid:
        spec["grid"] = list(args.grid)
    dt = args.dt if args.dt is not None else cfg["dt"]
    horizon = args.horizon if args.horizon is not None else cfg["horizon"]
    axis = spec.get("axis", "mu")
    if axis != "mu":
        raise CliError(EXIT_INPUT, "the command line surface scans mu; use the library for other axes")
    try:
        scan_range = [float(v) for v in spec.get("scan_range", spec["mu_range"])]
        grid = ecology.parameter_grid((*spec["e"], spec["grid"][0]),
                                      (*spec["alpha"], spec["grid"][1]))
        if len(scan_range) != 2:
            raise ValueError("mu_range needs two values")
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"bad surface settings: {exc}") from None

    base = cfg["params"]
    samples, failures = ecology.build_sensitivity_samples(
        grid, scan_range, base, cfg["state"], horizon, dt, axis=axis)

    write_csv(prefix.with_name(prefix.name + "_samples.csv"),
              ("e", "alpha", "mu_star", "iterations", "bracket_width"),
              ([s.e, s.alpha, s.mu, s.iterations, s.bracket_width] for s in samples))
    report = {
        "grid_points": len(grid),
        "samples": len(samples),
        "failures": [{"point": list(p), "reason": r} for p, r in failures],
        "scan_axis": axis,
        "scan_range": list(scan_range),
        "a": base.a,
        "b": base.b,
        "dt": dt,
        "horizon": horizon,
        "seed": args.seed,
    }
    if not samples:
        _write_json(prefix.with_name(prefix.name + "_report.json"), report)
        raise CliError(EXIT_NO_SAMPLES, "no grid point produced a valid bracket")

    xy, z = surface.sample_arrays(samples, axis)
    cfg_pum = PumConfig(epsilon=args.epsilon)
    if len(samples) < 16:
        report["surface"] = f"skipped: {len(samples)} samples, at least 16 needed"
    else:
        try:
            fit = surface.fit_surface(xy, z, cfg_pum)
        except UncoveredSites as exc:
            _write_json(prefix.with_name(prefix.name + "_report.json"), report)
            raise CliError(EXIT_UNCOVERED, str(exc)) from None
        gxy, gz = surface.surface_grid(fit, int(spec["eval_grid"]))
        write_csv(prefix.with_name(prefix.name + "_surface.csv"), ("e", "alpha", "mu_interpolated"),
                  ([gxy[i, 0], gxy[i, 1], gz[i]] for i in range(len(gz))))
        report["surface"] = {"patches": fit.model.d, "delta_pu": fit.model.delta_pu,
                             "epsilon": fit.model.kernel.epsilon, "grid_points": len(gz)}
        if len(samples) >= 20:
            try:
                rms, count, skipped = surface.holdout_rms(xy, z, seed=args.seed, config=cfg_pum)
            except PumiError as exc:
                # the training subset can lose the hull corners that carry the patch centers
                report["holdout"] = {"error": f"{type(exc).__name__}: {exc}"}
            else:
                report["holdout"] = {"rms": rms, "evaluated": count, "skipped_outside_hull": len(skipped),
                                     "rms_over_scan_range": rms / abs(scan_range[1] - scan_range[0])}
    _write_json(prefix.with_name(prefix.name + "_report.json"), report)
    return EXIT_OK


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pumi",
        description="Partition-of-unity RBF interpolation with block-based neighbour search.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, func):
        p = sub.add_parser(name, help=help_, epilog=EXIT_CODES_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        p.add_argument("--output", required=True)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("interpolate", "fit a PUM model to x,y,f data and evaluate it", cmd_interpolate)
    p.add_argument("--input", required=True, help="CSV with header x,y,f")
    p.add_argument("--grid", type=parse_grid, default=(40, 40), help="evaluation grid, N or NxM")
    p.add_argument("--query", help="CSV with header x,y; overrides --grid")
    p.add_argument("--epsilon", type=float, help="kernel shape parameter")
    p.add_argument("--structure", choices=STRUCTURES, default="block")
    p.add_argument("--save-model", help="write the fitted model as JSON")

    p = add("benchmark", "time block grid, kd-tree and brute-force search", cmd_benchmark)
    p.add_argument("--n", type=_int_list, default=[1000, 10000, 100000],
                   help="comma separated site counts")
    p.add_argument("--structure", action="append", choices=bench.STRUCTURES)

    p = add("simulate", "integrate the herbivore/grass/trees model", cmd_simulate)
    p.add_argument("--input", required=True, help="parameter JSON")
    p.add_argument("--dt", type=float)
    p.add_argument("--horizon", type=float, help="days")
    p.add_argument("--every", type=int, default=1, help="write every k-th step")

    p = add("surface", "bisect the separatrix on an (e, alpha) grid and fit it", cmd_surface)
    p.add_argument("--input", required=True, help="parameter JSON")
    p.add_argument("--grid", type=parse_grid, help="(e, alpha) grid, N or NxM")
    p.add_argument("--dt", type=float)
    p.add_argument("--horizon", type=float, help="days")
    p.add_argument("--epsilon", type=float, help="kernel shape parameter for the surface fit")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"pumi: error: {exc}", file=sys.stderr)
        return exc.code
    except InputFormatError as exc:
        print(f"pumi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PumiError as exc:
        print(f"pumi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
