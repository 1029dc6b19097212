"""Command line entry point.

Subcommands::

    slitwave list
    slitwave export-config <preset>
    slitwave run <preset|config>          every job the preset declares
    slitwave simulate <preset|config>     TDSE only
    slitwave kirchhoff <preset|config>    plain Kirchhoff profiles
    slitwave cavity <preset|config>       cavity-augmented profiles
    slitwave analytic --mass M --x0 X --sigma S --q0 Q --t T
    slitwave compare <run-dir>

Outputs go to ``--out``, else ``$SLITWAVE_OUTPUT_DIR``, else ``./slitwave-out``.
The exit status is 0 when every check declared by the preset passes, 1 when
a check fails and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic
from .exceptions import SlitwaveError
from .kirchhoff import ContourSpec, SlitSourceParams, free_space_opening
from .presets import PRESETS, CavityOptions, export_config, load_preset
from .runner import ComparisonReport, Metric, compare_run_dir, run_preset

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _openings(text):
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"opening {part!r} is not lo:hi")
        out.append((float(lo), float(hi)))
    return out


def _contour_args(p):
    p.add_argument("--phi", type=float, help="contour rotation angle (radians)")
    p.add_argument("--n-nodes", type=int, help="contour node count")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--openings", type=_openings, help="override openings, e.g. -5:-1,1:5")
    group.add_argument("--free-space", action="store_true", help="one opening covering the whole packet")


def _cavity_args(p):
    p.add_argument("--nmax", type=int, help="number of x modes")
    p.add_argument("--lmax", type=int, help="number of y modes")
    p.add_argument("--cmix-abs", type=float, help="modulus of the mixing constant")
    p.add_argument("--cmix-phase", type=float, help="phase of the mixing constant (radians)")


def build_parser():
    ap = argparse.ArgumentParser(prog="slitwave", description="Wavepacket scattering from slits.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in presets")
    p = sub.add_parser("export-config", help="print a preset as a config file")
    p.add_argument("preset")

    for name, hlp in (("run", "run every job of a preset"), ("simulate", "TDSE run"),
                      ("kirchhoff", "plain Kirchhoff profiles"), ("cavity", "cavity-augmented profiles")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("preset", help="preset name or config file")
        p.add_argument("--out", help="output directory")
        if name in ("simulate", "run"):
            p.add_argument("--dt", type=float, help="time step")
            p.add_argument("--stencil", choices=("compact", "standard"))
        if name in ("kirchhoff", "cavity", "run"):
            _contour_args(p)
        if name in ("cavity", "run"):
            _cavity_args(p)

    p = sub.add_parser("analytic", help="one-dimensional backward amplitude on an x grid")
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--x0", type=float, required=True, help="launch distance (packet starts at -x0)")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--q0", type=float, default=0.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=50.0)
    p.add_argument("--points", type=int, default=501)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("compare", help="recompute mismatches in a run directory")
    p.add_argument("run_dir")
    p.add_argument("--metric", choices=[m.value for m in Metric], default=Metric.L2.value)
    return ap


def _apply_overrides(preset, args):
    if getattr(args, "dt", None) is not None or getattr(args, "stencil", None) is not None:
        if preset.stepper is None:
            raise SlitwaveError(f"preset {preset.name} has no TDSE job")
        kw = {}
        if args.dt is not None:
            kw["dt"] = args.dt
        if args.stencil is not None:
            kw["stencil"] = args.stencil
        preset = replace(preset, stepper=replace(preset.stepper, **kw))
    if getattr(args, "phi", None) is not None or getattr(args, "n_nodes", None) is not None:
        c = preset.contour or ContourSpec()
        preset = replace(preset, contour=ContourSpec(args.phi if args.phi is not None else c.phi,
                                                     args.n_nodes if args.n_nodes is not None else c.n_nodes,
                                                     c.rule))
    opts = {k: getattr(args, a) for k, a in (("n_max", "nmax"), ("l_max", "lmax"), ("cmix_abs", "cmix_abs"),
                                              ("cmix_phase", "cmix_phase")) if getattr(args, a, None) is not None}
    if opts:
        preset = replace(preset, cavity=replace(preset.cavity or CavityOptions(), **opts))
    return preset


_JOBS = {"simulate": ("tdse",), "kirchhoff": ("kirchhoff",), "cavity": ("cavity",), "run": None}


def _run(args):
    preset = _apply_overrides(load_preset(args.preset), args)
    jobs = _JOBS[args.command]
    if jobs == ("tdse",) and "tdse" not in preset.jobs:
        raise SlitwaveError(f"preset {preset.name} has no TDSE job")
    if jobs is not None and jobs[0] not in preset.jobs:
        # approximations can be evaluated for any preset
        preset = replace(preset, jobs=preset.jobs + jobs, contour=preset.contour or ContourSpec())
    openings = getattr(args, "openings", None)
    if getattr(args, "free_space", False):
        openings = free_space_opening(SlitSourceParams.from_packet(preset.packet), preset.time)
    report = run_preset(preset, args.out, jobs=jobs, openings=openings)
    _print_report(report)
    return EXIT_OK if report.passed else EXIT_FAILED


def _print_report(report):
    print(f"preset {report.preset}: {'PASS' if report.passed else 'FAIL'} ({report.seconds:.1f} s)")
    if report.norm_drift is not None:
        print(f"  norm drift {report.norm_drift:.3e}")
    for key, n in sorted(report.peak_counts.items()):
        print(f"  peaks {key}: {n}")
    for key, v in sorted(report.mismatches.items()):
        print(f"  mismatch {key}: {v:.4g}")
    for name, c in report.checks.items():
        print(f"  [{'ok' if c['passed'] else 'FAIL'}] {name}: {c['detail']}")


def _analytic(args):
    p = analytic.AnalyticParams(args.mass, args.x0, args.sigma, args.q0)
    xs = np.linspace(args.x_min, args.x_max, args.points)
    amp = analytic.backward_amplitude(xs, args.t, p)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["x", "amplitude"])
        for x, a in zip(xs, amp):
            w.writerow([repr(float(x)), repr(float(a))])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def _compare(args):
    directory = Path(args.run_dir)
    result = compare_run_dir(directory, args.metric)
    print(json.dumps(result, indent=2, sort_keys=True))
    passed = all(ComparisonReport.from_json(p.read_text()).passed for p in directory.glob("*_report.json"))
    return EXIT_OK if passed and all(math.isfinite(v) for r in result.values() for v in r.values()) \
        else EXIT_FAILED


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list":
            for name in PRESETS:
                print(name)
            return EXIT_OK
        if args.command == "export-config":
            print(export_config(load_preset(args.preset)), end="")
            return EXIT_OK
        if args.command == "analytic":
            return _analytic(args)
        if args.command == "compare":
            return _compare(args)
        return _run(args)
    except SlitwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
