"""Run presets end to end and score approximations against the TDSE.

Each run writes into one directory:

* ``<preset>_t<time>_amplitude.bin`` / ``.hdr``: final |psi| (TDSE jobs),
* ``<preset>_t<time>_<job>-<probe>.csv``: one profile per job and probe,
* ``<preset>_report.json``: the :class:`ComparisonReport`.

The report is a JSON object with keys ``preset``, ``metric``,
``value_plain``, ``value_cavity``, ``peak_counts`` (``"job:probe" -> int``),
``norm_drift``, ``mismatches`` (``"job:probe" -> float``), ``checks``
(``name -> {"passed": bool, "detail": str}``), ``passed``, ``files`` and
``seconds``.  Values that were not computed are ``null``.
"""

from __future__ import annotations

import enum
import functools
import json
import logging
import math
import os
import time as _time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cavity import TotalWaveConfig, cavity_kirchhoff_wave, mode_wavenumbers
from .core import make_packet
from .exceptions import InvalidInputError, SlitwaveError
from .kirchhoff import SlitSourceParams, kirchhoff_wave
from .presets import load_preset
from .tdse import (
    Profile1D,
    count_peaks,
    normalize_at_reference,
    output_name,
    propagate,
    read_profile,
    slice_amplitude,
    write_profile,
    write_snapshot,
)

log = logging.getLogger(__name__)

OUTPUT_ENV = "SLITWAVE_OUTPUT_DIR"


class Metric(str, enum.Enum):
    L2 = "L2"
    MAXNORM = "MaxNorm"


def _merged_grid(a, b):
    lo = max(a.coords[0], b.coords[0])
    hi = min(a.coords[-1], b.coords[-1])
    if not hi > lo:
        raise InvalidInputError("profiles have disjoint coordinate ranges")
    pts = np.union1d(a.coords, b.coords)
    return pts[(pts >= lo) & (pts <= hi)]


def mismatch(profile_a, profile_b, metric=Metric.L2):
    """Distance between two profiles over their common coordinate range.

    Both are linearly interpolated onto the union of their sample points
    inside the overlap (which contains every sample of the numeric grid).
    ``L2`` is the exact L2 norm of the difference of the two piecewise-linear
    interpolants; ``MaxNorm`` is its maximum.  Symmetric, and a metric for
    profiles sharing a range.
    """
    metric = Metric(metric)
    pts = _merged_grid(profile_a, profile_b)
    d = np.interp(pts, profile_a.coords, profile_a.amps) - np.interp(pts, profile_b.coords, profile_b.amps)
    if metric is Metric.MAXNORM:
        return float(np.max(np.abs(d)))
    h = np.diff(pts)
    d0, d1 = d[:-1], d[1:]
    return float(math.sqrt(max(0.0, np.sum(h * (d0 * d0 + d0 * d1 + d1 * d1)) / 3.0)))


@dataclass
class ComparisonReport:
    preset: str
    metric: str = Metric.L2.value
    value_plain: float | None = None
    value_cavity: float | None = None
    peak_counts: dict = field(default_factory=dict)
    norm_drift: float | None = None
    mismatches: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    seconds: float = 0.0

    def add_check(self, name, passed, detail=""):
        self.checks[name] = {"passed": bool(passed), "detail": detail}

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values())

    def to_json(self):
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        d.pop("passed", None)
        return cls(**d)

    def write(self, directory):
        path = Path(directory) / f"{self.preset}_report.json"
        path.write_text(self.to_json() + "\n")
        return path


def output_dir(explicit=None):
    """Explicit directory, else ``$SLITWAVE_OUTPUT_DIR``, else ``./slitwave-out``."""
    return Path(explicit or os.environ.get(OUTPUT_ENV) or "slitwave-out")


def _finish_profile(prof, probe):
    prof = prof.window(probe.lo, probe.hi)
    if prof.coords.size == 0:
        raise InvalidInputError(f"probe {probe.name} window holds no samples")
    return normalize_at_reference(prof, 0.0) if probe.normalize else prof


def _approx_line(probe, tdse_profiles):
    """Fixed coordinate and sample points for an approximation profile.

    When a TDSE profile exists the approximation is evaluated on the same
    grid line and nodes, so the two can be compared pointwise.
    """
    base = tdse_profiles.get(probe.name)
    if base is not None:
        return base.fixed_coordinate, base.coords
    return probe.at, np.linspace(probe.lo, probe.hi, probe.samples)


def cavity_config(options):
    if options.cmix_abs is None:
        return TotalWaveConfig(None, options.cmix_phase, options.sign)
    return TotalWaveConfig.from_polar(options.cmix_abs, options.cmix_phase, options.sign)


@functools.lru_cache(maxsize=4)
def _tdse_cached(packet, grid, geometry, stepper):
    f0 = make_packet(packet, grid, geometry)
    return propagate(f0, geometry, stepper)


def run_tdse(preset):
    """Propagate the preset's packet; returns the PropagationResult.

    Presets sharing packet, grid, geometry and stepper share one run within
    a process.
    """
    if preset.stepper.observers:
        return _tdse_cached.__wrapped__(preset.packet, preset.grid, preset.geometry, preset.stepper)
    return _tdse_cached(preset.packet, preset.grid, preset.geometry, preset.stepper)


def run_preset(preset, out_dir=None, *, jobs=None, openings=None, write=True):
    """Execute a preset (object, name or config path) and score it.

    ``jobs`` restricts the jobs to run; ``openings`` replaces the opening
    intervals of the approximations (for example one interval spanning the
    box as a free-space check).
    """
    if isinstance(preset, (str, Path)):
        preset = load_preset(str(preset))
    jobs = tuple(preset.jobs if jobs is None else jobs)
    for j in jobs:
        if j not in preset.jobs:
            raise InvalidInputError(f"preset {preset.name} has no {j} job")
    out = output_dir(out_dir)
    report = ComparisonReport(preset.name)
    t_start = _time.perf_counter()
    profiles = {j: {} for j in jobs}
    try:
        if "tdse" in jobs:
            log.info("%s: TDSE on %dx%d, %d steps", preset.name, preset.grid.nx, preset.grid.ny,
                     preset.stepper.n_steps)
            res = run_tdse(preset)
            drift = abs(1.0 - float(res.norms[-1]))
            report.norm_drift = drift
            tol = preset.checks.norm_tolerance
            report.add_check("norm", drift <= tol, f"|1 - norm| = {drift:.3e} (limit {tol:g})")
            if write:
                report.files += [str(p) for p in write_snapshot(res.field, out, preset.name)]
            for probe in preset.probes:
                profiles["tdse"][probe.name] = _finish_profile(slice_amplitude(res.field, probe.axis, probe.at), probe)
        src = SlitSourceParams.from_packet(preset.packet)
        approx_probes = [p for p in preset.probes if p.axis == "y" and p.at > 0]
        if "kirchhoff" in jobs:
            for probe in approx_probes:
                x, ys = _approx_line(probe, profiles.get("tdse", {}))
                log.info("%s: Kirchhoff profile %s (%d points)", preset.name, probe.name, ys.size)
                vals = kirchhoff_wave(x, ys, preset.time, preset.geometry, src, preset.contour,
                                      openings=openings, form=preset.form)
                profiles["kirchhoff"][probe.name] = _finish_profile(Profile1D("y", x, ys, np.abs(vals)), probe)
        if "cavity" in jobs:
            cfg = cavity_config(preset.cavity)
            opts = preset.cavity
            modes = None
            if opts.n_max is not None or opts.l_max is not None:
                modes = mode_wavenumbers(preset.geometry, opts.n_max or 16, opts.l_max or 16)
            for probe in approx_probes:
                x, ys = _approx_line(probe, profiles.get("tdse", {}))
                log.info("%s: cavity profile %s (%d points)", preset.name, probe.name, ys.size)
                vals = cavity_kirchhoff_wave(x, ys, preset.time, preset.geometry, src, preset.contour,
                                             modes, cfg, form=preset.form)
                profiles["cavity"][probe.name] = _finish_profile(Profile1D("y", x, ys, np.abs(vals)), probe)
    except SlitwaveError:
        log.error("preset %s failed", preset.name)
        raise

    probes = {p.name: p for p in preset.probes}
    for job, by_probe in profiles.items():
        for name, prof in by_probe.items():
            probe = probes[name]
            n = count_peaks(prof, probe.threshold, scale=1.0 if probe.normalize else None)
            report.peak_counts[f"{job}:{name}"] = n
            if probe.check_on == job and probe.has_expectation:
                bounds = f"[{probe.min_peaks if probe.min_peaks is not None else 0}, " \
                         f"{probe.max_peaks if probe.max_peaks is not None else 'inf'}]"
                report.add_check(f"peaks:{job}:{name}", probe.peaks_ok(n),
                                 f"{n} maxima above {probe.threshold:g}, expected {bounds}")
            if write:
                path = out / output_name(preset.name, preset.time, f"{job}-{name}", "csv")
                report.files.append(str(write_profile(prof, path)))

    if "tdse" in profiles:
        for job in ("kirchhoff", "cavity"):
            for name, prof in profiles.get(job, {}).items():
                report.mismatches[f"{job}:{name}"] = mismatch(profiles["tdse"][name], prof, Metric.L2)
        first = next((p.name for p in approx_probes if p.name in profiles["tdse"]), None)
        if first is not None:
            report.value_plain = report.mismatches.get(f"kirchhoff:{first}")
            report.value_cavity = report.mismatches.get(f"cavity:{first}")
    vp, vc = report.value_plain, report.value_cavity
    if preset.checks.cavity_better and vp is not None and vc is not None:
        report.add_check("cavity_better", vc < vp, f"cavity {vc:.4g} vs plain {vp:.4g}")
    if preset.checks.cavity_within is not None and vp is not None and vc is not None:
        rel = abs(vc - vp) / vp
        report.add_check("cavity_within", rel <= preset.checks.cavity_within,
                         f"relative difference {rel:.3g} (limit {preset.checks.cavity_within:g})")
    report.seconds = _time.perf_counter() - t_start
    if write:
        out.mkdir(parents=True, exist_ok=True)
        report.files.append(str(out / f"{preset.name}_report.json"))
        report.write(out)
    report.profiles = profiles
    return report


def compare_run_dir(directory, metric=Metric.L2):
    """Recompute mismatches from the profiles written into a run directory.

    Every ``*_report.json`` found is reloaded; its TDSE profiles are compared
    with the matching Kirchhoff/cavity ones.  Returns ``{preset: {key: value}}``.
    """
    directory = Path(directory)
    reports = sorted(directory.glob("*_report.json"))
    if not reports:
        raise InvalidInputError(f"no *_report.json in {directory}")
    out = {}
    for rp in reports:
        rep = ComparisonReport.from_json(rp.read_text())
        csvs = {Path(f).stem: Path(f) for f in rep.files if f.endswith(".csv")}
        res = {}
        for stem, path in csvs.items():
            head, _, kind = stem.rpartition("_")
            job, _, probe = kind.partition("-")
            if job != "tdse":
                continue
            base = read_profile(path if path.exists() else directory / path.name)
            for other in ("kirchhoff", "cavity"):
                o = csvs.get(f"{head}_{other}-{probe}")
                if o is not None:
                    prof = read_profile(o if o.exists() else directory / o.name)
                    res[f"{other}:{probe}"] = mismatch(base, prof, metric)
        out[rep.preset] = res
    return out
