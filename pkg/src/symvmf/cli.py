"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import bench, ebsdmap, ginv, vmf
from .exceptions import DegenerateResultant, NoZoneFound, NonFiniteLikelihood, SymVmfError
from .io import format_fit_report, read_quaternions, write_quaternions
from .symgrp import BUILTIN_GROUPS, builtin_group, map_to_fz, resolve_group

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
NUMERICAL_ERRORS = (DegenerateResultant, NonFiniteLikelihood, NoZoneFound)

QUAT_FORMAT = "Quaternion CSV: rows q1,q2,q3,q4 (scalar first), optional header line."
GROUP_HELP = f"built-in group ({', '.join(BUILTIN_GROUPS)}) or path to a quaternion CSV table"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(prog):
    return argparse.RawDescriptionHelpFormatter(prog, max_help_position=32)


def _threads(default=None):
    return default or os.cpu_count() or 1


def build_parser():
    p = _Parser(prog="symvmf", description="Mean orientation and concentration estimation under "
                "finite rotation symmetry.", epilog=__doc__.strip(), formatter_class=_fmt)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", formatter_class=_fmt, help="run the estimator comparison sweep",
                         description="Simulate invariant-VMF data over a log-spaced kappa grid and compare "
                         "estimators.",
                         epilog=f"Writes DIR/sweep.csv with columns {','.join(bench.CSV_COLUMNS)} plus "
                         "DIR/inner_product.svg and DIR/kappa_bias.svg.\ninner_sym is max_m |<g_m mu_hat, mu_o>|; "
                         "inner_raw is <FZ(mu_hat), FZ(mu_o)>; se_inner is the standard error of inner_sym.")
    sim.add_argument("--group", default="cubic_m3m", help=GROUP_HELP + " (default: %(default)s)")
    sim.add_argument("--n", type=int, default=1000, help="samples per trial (default: %(default)s)")
    sim.add_argument("--kappa-min", type=float, default=1.0, help="(default: %(default)s)")
    sim.add_argument("--kappa-max", type=float, default=100.0, help="(default: %(default)s)")
    sim.add_argument("--steps", type=int, default=25, help="grid points (default: %(default)s)")
    sim.add_argument("--kappas", default=None, help="comma list of kappa values; replaces the log-spaced grid")
    sim.add_argument("--trials", type=int, default=100, help="trials per grid point (default: %(default)s)")
    sim.add_argument("--estimators", default="naive,fz,em", help="comma list from naive,fz,em (default: %(default)s)")
    sim.add_argument("--seed", type=int, default=0, help="master seed (default: %(default)s)")
    sim.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")
    sim.add_argument("--out", required=True, metavar="DIR", help="output directory")

    est = sub.add_parser("estimate", formatter_class=_fmt, help="fit one sample file",
                         description="Estimate mean orientation and concentration from a sample file.",
                         epilog=QUAT_FORMAT + "\nPrints a key=value fit report (mean, mean_raw, kappa, saturated, "
                         "iterations, converged, log_likelihood).")
    est.add_argument("--input", required=True, help="quaternion CSV")
    est.add_argument("--method", choices=("em", "naive", "fz"), default="em", help="(default: %(default)s)")
    est.add_argument("--group", default="cubic_m3m", help=GROUP_HELP + " (default: %(default)s)")
    est.add_argument("--init", choices=ginv.INIT_STRATEGIES, default="fz_ml", help="EM start (default: %(default)s)")
    est.add_argument("--n-init", type=int, default=1, help="random restarts (default: %(default)s)")
    est.add_argument("--tol", type=float, default=1e-8, help="relative log-likelihood tolerance (default: %(default)s)")
    est.add_argument("--max-iter", type=int, default=200, help="(default: %(default)s)")
    est.add_argument("--seed", type=int, default=0, help="seed for random restarts (default: %(default)s)")
    est.add_argument("--out", metavar="DIR", help="also write DIR/fit.txt")

    fz = sub.add_parser("fz", formatter_class=_fmt, help="fundamental-zone utilities")
    fzsub = fz.add_subparsers(dest="fz_command", required=True, parser_class=_Parser)
    fzmap = fzsub.add_parser("map", formatter_class=_fmt, help="fold quaternions into the fundamental zone",
                             description="Map each orientation to its fundamental-zone representative.",
                             epilog=QUAT_FORMAT + "\nWrites DIR/fz.csv with columns q1,q2,q3,q4,element.")
    fzmap.add_argument("--input", required=True, help="quaternion CSV")
    fzmap.add_argument("--group", default="cubic_m3m", help=GROUP_HELP + " (default: %(default)s)")
    fzmap.add_argument("--out", required=True, metavar="DIR", help="output directory")

    grp = sub.add_parser("group", formatter_class=_fmt, help="symmetry group utilities")
    grpsub = grp.add_subparsers(dest="group_command", required=True, parser_class=_Parser)
    chk = grpsub.add_parser("check", formatter_class=_fmt, help="verify group axioms",
                            description="Verify identity, closure (up to sign), inverses and distinctness.",
                            epilog="Group CSV: rows q1,q2,q3,q4, header optional; exit 2 on violation.")
    chk.add_argument("group", help=GROUP_HELP)
    chk.add_argument("--antipodal", action="store_true", help="extend a built-in group with -g")

    ebsd = sub.add_parser("ebsd", formatter_class=_fmt, help="orientation-map pipeline")
    esub = ebsd.add_subparsers(dest="ebsd_command", required=True, parser_class=_Parser)
    idx = esub.add_parser("index", formatter_class=_fmt, help="segment and index grains",
                          description="Delineate grains and fit the invariant VMF to each.",
                          epilog="Map CSV: header x,y,phi1,Phi,phi2[,grain]; Bunge Euler angles in radians, "
                          "row-major.\nWrites DIR/grains.csv and DIR/pixels.csv.")
    idx.add_argument("--input", required=True, help="map CSV")
    idx.add_argument("--group", default="cubic_m3m", help=GROUP_HELP + " (default: %(default)s)")
    idx.add_argument("--threshold-deg", type=float, default=5.0,
                     help="neighbour disorientation threshold in degrees (default: %(default)s)")
    idx.add_argument("--min-size", type=int, default=ebsdmap.DEFAULT_MIN_SIZE,
                     help="smallest grain in pixels (default: %(default)s)")
    idx.add_argument("--labels", choices=("auto", "file", "segment"), default="auto",
                     help="grain source: 'file' uses the map's grain column, 'segment' flood-fills, "
                     "'auto' uses the column when present (default: %(default)s)")
    idx.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")
    idx.add_argument("--out", required=True, metavar="DIR", help="output directory")

    syn = esub.add_parser("synth", formatter_class=_fmt, help="generate a synthetic map",
                          description="Voronoi polycrystal with invariant-VMF pixel noise.",
                          epilog="Writes the map CSV (with ground-truth grain column) and, next to it, "
                          "<stem>_truth.csv with columns grain,q1,q2,q3,q4,kappa.")
    syn.add_argument("--grains", type=int, default=10, help="(default: %(default)s)")
    syn.add_argument("--size", default="128x128", help="WIDTHxHEIGHT (default: %(default)s)")
    syn.add_argument("--kappa", type=float, default=200.0, help="(default: %(default)s)")
    syn.add_argument("--group", default="cubic_m3m", help=GROUP_HELP + " (default: %(default)s)")
    syn.add_argument("--seed", type=int, default=0, help="(default: %(default)s)")
    syn.add_argument("--out", required=True, metavar="MAP_CSV", help="output map file")
    return p


def _require_file(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"input file not found: {path}")


def _group_arg(spec):
    if spec not in BUILTIN_GROUPS:
        _require_file(spec)
    return resolve_group(spec)


def cmd_simulate(args):
    estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    try:
        kappas = None if args.kappas is None else tuple(float(k) for k in args.kappas.split(","))
    except ValueError:
        raise UsageError(f"--kappas must be a comma list of numbers, got {args.kappas!r}") from None
    config = bench.SweepConfig(kappa_min=args.kappa_min, kappa_max=args.kappa_max, steps=args.steps, n=args.n,
                               trials=args.trials, group=_group_arg(args.group), seed=args.seed,
                               estimators=estimators, kappas=kappas)
    os.makedirs(args.out, exist_ok=True)
    rows = bench.run_sweep(config, threads=_threads(args.threads))
    for path in bench.emit_report(rows, args.out):
        print(path)
    return EXIT_OK


def cmd_estimate(args):
    _require_file(args.input)
    group = _group_arg(args.group)
    X = read_quaternions(args.input)
    report = {"method": args.method, "group": args.group, "n": len(X)}
    if args.method == "em":
        cfg = ginv.EmConfig(args.tol, args.max_iter, args.init, args.n_init, args.seed)
        res = ginv.em_fit(X, group, cfg)
        report.update(mean=res.mean, mean_raw=res.params.mu, kappa=res.params.kappa,
                      saturated=res.params.saturated, iterations=res.iterations, converged=res.converged,
                      log_likelihood=res.log_likelihood)
    else:
        if args.method == "naive":
            params = vmf.ml_estimate(X)
            ll = float(np.sum(vmf.log_density(X, params)))
        else:
            params = ginv.modified_ml_fit(X, group)
            ll = float(np.sum(vmf.log_density(map_to_fz(X, group)[0], params)))
        report.update(mean=params.mu, mean_raw=params.mu, kappa=params.kappa, saturated=params.saturated,
                      iterations=0, converged=True, log_likelihood=ll)
    text = format_fit_report(report)
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "fit.txt"), "w") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_fz_map(args):
    _require_file(args.input)
    group = _group_arg(args.group)
    X = read_quaternions(args.input)
    fz, idx = map_to_fz(X, group)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "fz.csv")
    write_quaternions(path, fz, extra=idx, header=("q1", "q2", "q3", "q4", "element"))
    print(path)
    return EXIT_OK


def cmd_group_check(args):
    spec = args.group
    if spec in BUILTIN_GROUPS:
        group = builtin_group(spec, antipodal=args.antipodal)
    else:
        _require_file(spec)
        group = resolve_group(spec)
    group.check()
    print(f"group={group.name}")
    print(f"M={len(group)}")
    print(f"antipodal_extended={str(group.antipodal_extended).lower()}")
    print("axioms=ok")
    return EXIT_OK


def _parse_size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--size must look like WIDTHxHEIGHT, got {text!r}") from None
    if w < 1 or h < 1:
        raise UsageError("--size dimensions must be positive")
    return w, h


def cmd_ebsd_index(args):
    _require_file(args.input)
    group = _group_arg(args.group)
    os.makedirs(args.out, exist_ok=True)
    omap = ebsdmap.load_map(args.input)
    use_file = args.labels == "file" or (args.labels == "auto" and omap.labels is not None)
    if use_file:
        if omap.labels is None:
            raise ValueError(f"{args.input} has no grain column")
        labels = omap.labels
    else:
        labels = ebsdmap.segment_grains(omap, group, np.deg2rad(args.threshold_deg), args.min_size)
    records, failures = ebsdmap.index_grains(omap, group, labels=labels, threads=_threads(args.threads))
    for gid, msg in failures.items():
        print(f"grain {gid}: not indexed: {msg}", file=sys.stderr)
    if not records:
        raise DegenerateResultant("no grain could be indexed")
    for path in ebsdmap.emit_outputs(records, omap, args.out, labels=labels):
        print(path)
    return EXIT_OK


def cmd_ebsd_synth(args):
    width, height = _parse_size(args.size)
    group = _group_arg(args.group)
    omap, truth = ebsdmap.synth_map(args.grains, width, height, args.kappa, args.seed, group)
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    ebsdmap.write_map(args.out, omap)
    stem, _ = os.path.splitext(args.out)
    truth_path = stem + "_truth.csv"
    with open(truth_path, "w") as fh:
        fh.write("grain,q1,q2,q3,q4,kappa\n")
        for gid, mu in truth.items():
            fh.write(f"{gid}," + ",".join(repr(float(v)) for v in mu) + f",{args.kappa!r}\n")
    print(args.out)
    print(truth_path)
    return EXIT_OK


COMMANDS = {
    ("simulate",): cmd_simulate,
    ("estimate",): cmd_estimate,
    ("fz", "map"): cmd_fz_map,
    ("group", "check"): cmd_group_check,
    ("ebsd", "index"): cmd_ebsd_index,
    ("ebsd", "synth"): cmd_ebsd_synth,
}


def run(argv=None):
    """Parse ``argv`` and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    key = (args.command,) + tuple(
        getattr(args, a) for a in ("fz_command", "group_command", "ebsd_command") if getattr(args, a, None)
    )
    try:
        return COMMANDS[key](args)
    except UsageError as exc:
        print(f"symvmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"symvmf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SymVmfError, ValueError, OSError) as exc:
        print(f"symvmf: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(run())
