"""Built-in experiment presets and the sectioned config file format.

A config file is INI-style::

    [preset]
    name = fig2
    jobs = tdse
    time = 300

    [packet]
    x0 = -10
    ...

    [geometry]      kind, a, b, d, v_screen
    [grid]          x_min, x_max, y_min, y_max, nx, ny       (tdse only)
    [stepper]       dt, snapshot_stride, stencil             (tdse only)
    [contour]       phi, n_nodes, rule, form                 (kirchhoff/cavity)
    [cavity]        n_max, l_max, cmix_abs, cmix_phase, sign (optional)
    [checks]        norm_tolerance, cavity_better, cavity_within (optional)
    [probes]        one line per probe: name = key=value ...

Unknown sections and keys are rejected.  ``auto`` selects the default for
cavity truncation and mixing modulus.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .core import Grid2D, PacketParams, SlitGeometry, SlitKind
from .exceptions import ConfigParseError, InvalidInputError
from .kirchhoff import SOURCE_FORMS, ContourSpec
from .tdse import STENCILS, StepperConfig

JOBS = ("tdse", "kirchhoff", "cavity")

#: Grid shared by all TDSE presets (512 x 512 nodes).
TDSE_GRID = Grid2D(-48.0, 48.0, -40.0, 40.0, 512, 512)


@dataclass(frozen=True)
class Probe:
    """A 1D slice request and the peak-count property it must satisfy.

    ``axis`` is the coordinate that varies, ``at`` the fixed one.  The
    profile is cut to ``[lo, hi]``; with ``normalize`` it is scaled to one
    at the sample nearest zero.  ``check_on`` names the job whose profile the
    peak bounds apply to.  ``samples`` sets the resolution of approximation
    profiles; TDSE profiles use the grid.
    """

    name: str
    axis: str
    at: float
    lo: float
    hi: float
    threshold: float = 0.05
    min_peaks: int | None = None
    max_peaks: int | None = None
    check_on: str | None = None
    normalize: bool = True
    samples: int = 201

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", self.name):
            raise InvalidInputError(f"probe name {self.name!r} must be an identifier")
        if self.axis not in ("x", "y"):
            raise InvalidInputError(f"probes.{self.name}.axis must be x or y")
        if not self.hi > self.lo:
            raise InvalidInputError(f"probes.{self.name}: hi must exceed lo")
        if not 0 < self.threshold < 1:
            raise InvalidInputError(f"probes.{self.name}.threshold must lie in (0, 1)")
        if self.check_on is not None and self.check_on not in JOBS:
            raise InvalidInputError(f"probes.{self.name}.check_on must be one of {JOBS}")
        if self.samples < 3:
            raise InvalidInputError(f"probes.{self.name}.samples must be >= 3")
        if self.min_peaks is not None and self.max_peaks is not None and self.min_peaks > self.max_peaks:
            raise InvalidInputError(f"probes.{self.name}: min_peaks exceeds max_peaks")

    def peaks_ok(self, n):
        lo_ok = self.min_peaks is None or n >= self.min_peaks
        hi_ok = self.max_peaks is None or n <= self.max_peaks
        return lo_ok and hi_ok

    @property
    def has_expectation(self):
        return self.check_on is not None and (self.min_peaks is not None or self.max_peaks is not None)


@dataclass(frozen=True)
class CavityOptions:
    """Cavity truncation and mixing; ``None`` means automatic/default."""

    n_max: int | None = None
    l_max: int | None = None
    cmix_abs: float | None = None
    cmix_phase: float = 0.0
    sign: str = "decaying"


@dataclass(frozen=True)
class Checks:
    norm_tolerance: float = 1e-9
    cavity_better: bool = False
    cavity_within: float | None = None


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    packet: PacketParams
    geometry: SlitGeometry
    jobs: tuple
    time: float
    probes: tuple = ()
    grid: Grid2D | None = None
    stepper: StepperConfig | None = None
    contour: ContourSpec | None = None
    form: str = "exact"
    cavity: CavityOptions = field(default_factory=CavityOptions)
    checks: Checks = field(default_factory=Checks)
    note: str = ""

    def __post_init__(self):
        jobs = tuple(self.jobs)
        if not jobs or any(j not in JOBS for j in jobs):
            raise InvalidInputError(f"preset.jobs must be a non-empty subset of {JOBS}")
        object.__setattr__(self, "jobs", jobs)
        object.__setattr__(self, "probes", tuple(self.probes))
        if not self.time > 0:
            raise InvalidInputError("preset.time must be > 0")
        if "tdse" in jobs:
            if self.grid is None or self.stepper is None:
                raise InvalidInputError("tdse job needs [grid] and [stepper]")
            if abs(self.stepper.t_final - self.time) > 1e-9 * self.time:
                raise InvalidInputError("stepper.t_final must equal preset.time")
        if ("kirchhoff" in jobs or "cavity" in jobs) and self.contour is None:
            raise InvalidInputError("kirchhoff/cavity jobs need [contour]")
        if self.form not in SOURCE_FORMS:
            raise InvalidInputError(f"contour.form must be one of {SOURCE_FORMS}")
        names = [p.name for p in self.probes]
        if len(set(names)) != len(names):
            raise InvalidInputError("probe names must be unique")
        for p in self.probes:
            if p.check_on is not None and p.check_on not in jobs:
                raise InvalidInputError(f"probes.{p.name}.check_on names a job the preset does not run")


def _stepper(t_final, dt=0.05, stride=1000):
    return StepperConfig(dt=dt, t_final=t_final, snapshot_stride=stride)


def _thin(**kw):
    base = dict(x0=-10.0, y0=0.0, vx=0.05, vy=0.0, sigma1=1.0, sigma2=1.0, mass=20.0)
    base.update(kw)
    return PacketParams(**base)


def _tdse(name, packet, geom, probes=(), jobs=("tdse",), time=300.0, **kw):
    return ExperimentPreset(name, packet, geom, jobs, time, probes, TDSE_GRID, _stepper(time),
                            ContourSpec() if len(jobs) > 1 else None, **kw)


# Slices used by several presets: the backward cut in front of the screen and
# the forward cut behind the single slit, both at t = 300.
_BACKWARD = dict(axis="x", at=5.46, lo=-48.0, hi=-2.0, threshold=0.05, normalize=False)
_FORWARD = dict(axis="y", at=29.76, lo=-20.0, hi=20.0, threshold=0.05)


def _build_catalog():
    single = SlitGeometry.single
    double = SlitGeometry.double
    # Launched from x0=-16 and run 120 time units longer so that it reaches
    # the slit exactly as an x0=-10 launch would by t=300; from x0=-10 its
    # front flank already overlaps the screen and the cut launches debris
    # brighter than the transmitted wave.
    wide9 = _thin(x0=-16.0, sigma1=2.0, sigma2=1.0)
    presets = [
        # x0=-10, y0=0, vx=0.05, sigma=1, m=20 against a=2, b=3; t=300
        _tdse("fig2", _thin(), single(2.0, 3.0),
              (Probe("backward", check_on="tdse", min_peaks=3, **_BACKWARD),)),
        # same launch, sigma1=sigma2=2 against a=b=1
        _tdse("fig3", _thin(sigma1=2.0, sigma2=2.0), single(1.0, 1.0),
              (Probe("backward", check_on="tdse", min_peaks=1, max_peaks=1, **_BACKWARD),)),
        # double slit a=b=d=2, sigma=1; d is the half-gap between inner edges
        _tdse("fig6", _thin(), double(2.0, 2.0, 2.0),
              (Probe("backward", axis="x", at=0.0, lo=-48.0, hi=-2.0, normalize=False),)),
        # double slit a=b=d=2 with the wide packet read as sigma1=5, sigma2=5/4
        _tdse("fig7", _thin(sigma1=5.0, sigma2=1.25), double(2.0, 2.0, 2.0),
              (Probe("backward", axis="x", at=0.0, lo=-48.0, hi=-2.0, normalize=False),)),
        # Kirchhoff only: t=10000 at x=5000, v=0.5, m=20, a=2, b=3
        ExperimentPreset("fig8_thin", _thin(x0=-10.0, vx=0.5, sigma1=0.5, sigma2=0.5), single(2.0, 3.0),
                         ("kirchhoff",), 10000.0,
                         (Probe("far", axis="y", at=5000.0, lo=-1500.0, hi=1500.0, threshold=0.02,
                                max_peaks=1, check_on="kirchhoff", samples=301),),
                         contour=ContourSpec()),
        ExperimentPreset("fig8_wide", _thin(x0=-200.0, vx=0.5, sigma1=100.0, sigma2=100.0), single(2.0, 3.0),
                         ("kirchhoff",), 10000.0,
                         (Probe("far", axis="y", at=5000.0, lo=-1500.0, hi=1500.0, threshold=0.02,
                                min_peaks=3, check_on="kirchhoff", samples=301),),
                         contour=ContourSpec()),
        # forward slice x=29.76 for the fig2 launch; wide variant sigma1=2, sigma2=1, a=1, b=2
        _tdse("fig9", _thin(), single(2.0, 3.0),
              (Probe("forward", check_on="tdse", min_peaks=5, **_FORWARD),), jobs=("tdse", "kirchhoff")),
        _tdse("fig9_wide", wide9, single(1.0, 2.0),
              (Probe("forward", check_on="tdse", min_peaks=1, max_peaks=1, **_FORWARD),),
              jobs=("tdse", "kirchhoff"), time=420.0),
        # double slit a=b=d=2, sigma=1, slice x=35.16
        _tdse("fig12", _thin(), double(2.0, 2.0, 2.0),
              (Probe("forward", axis="y", at=35.16, lo=-20.0, hi=20.0),), jobs=("tdse", "kirchhoff")),
        # double slit a=b=2, d=1, sigma1=5, sigma2=5/4, slice x=15
        _tdse("fig13", _thin(sigma1=5.0, sigma2=1.25), double(2.0, 2.0, 1.0),
              (Probe("forward", axis="y", at=15.0, lo=-20.0, hi=20.0),), jobs=("tdse", "kirchhoff")),
        # cavity-augmented source against the fig9 runs
        _tdse("fig14_thin", _thin(), single(2.0, 3.0), (Probe("forward", **_FORWARD),),
              jobs=("tdse", "kirchhoff", "cavity"), checks=Checks(cavity_better=True)),
        _tdse("fig14_wide", wide9, single(1.0, 2.0), (Probe("forward", **_FORWARD),),
              jobs=("tdse", "kirchhoff", "cavity"), time=420.0, checks=Checks(cavity_within=0.10)),
        # long time, approximation only: t=50000 at x=5000.  phi is kept below
        # 2 m sigma^2 / t so the cavity sums converge on the contour.
        ExperimentPreset("fig15_thin", _thin(), single(2.0, 3.0), ("kirchhoff", "cavity"), 50000.0,
                         (Probe("far", axis="y", at=5000.0, lo=-3000.0, hi=3000.0, threshold=0.10,
                                min_peaks=5, check_on="cavity", samples=241),),
                         contour=ContourSpec(phi=5e-4)),
        ExperimentPreset("fig15_wide", _thin(x0=-200.0, sigma1=100.0, sigma2=100.0), single(2.0, 3.0),
                         ("kirchhoff", "cavity"), 50000.0,
                         (Probe("far", axis="y", at=5000.0, lo=-3000.0, hi=3000.0, threshold=0.10,
                                max_peaks=3, check_on="cavity", samples=241),),
                         contour=ContourSpec(phi=5e-4)),
    ]
    return {p.name: p for p in presets}


PRESETS = _build_catalog()


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidInputError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


# -- config files -------------------------------------------------------------

_SECTIONS = {
    "preset": {"name", "jobs", "time", "note"},
    "packet": {"x0", "y0", "vx", "vy", "sigma1", "sigma2", "mass"},
    "geometry": {"kind", "a", "b", "d", "v_screen"},
    "grid": {"x_min", "x_max", "y_min", "y_max", "nx", "ny"},
    "stepper": {"dt", "snapshot_stride", "stencil"},
    "contour": {"phi", "n_nodes", "rule", "form"},
    "cavity": {"n_max", "l_max", "cmix_abs", "cmix_phase", "sign"},
    "checks": {"norm_tolerance", "cavity_better", "cavity_within"},
    "probes": None,
}
_REQUIRED = ("preset", "packet", "geometry", "probes")
_PROBE_KEYS = {"axis", "at", "lo", "hi", "threshold", "min_peaks", "max_peaks", "check_on", "normalize", "samples"}


def _line_index(text):
    """Map ``(section, key)`` and ``section`` to 1-based line numbers."""
    where = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where.setdefault(section, i)
        elif section and s and s[0] not in "#;":
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            where.setdefault((section, key), i)
    return where


class _Reader:
    def __init__(self, parser, lines, source):
        self.p = parser
        self.lines = lines
        self.source = source

    def fail(self, section, key, message):
        line = self.lines.get((section, key), self.lines.get(section))
        fld = f"{section}.{key}" if key else section
        raise ConfigParseError(f"{self.source}: {message}", line=line, field=fld)

    def raw(self, section, key, default=None, required=False):
        if self.p.has_option(section, key):
            return self.p.get(section, key).strip()
        if required:
            self.fail(section, None, f"missing required key {section}.{key}")
        return default

    def num(self, section, key, default=None, required=False, kind=float):
        v = self.raw(section, key, None, required)
        if v is None:
            return default
        try:
            x = kind(v) if kind is float else kind(float(v))
            if kind is int and float(v) != int(float(v)):
                raise ValueError
        except ValueError:
            self.fail(section, key, f"{section}.{key} must be {'an integer' if kind is int else 'a number'}, got {v!r}")
        if kind is float and not math.isfinite(x):
            self.fail(section, key, f"{section}.{key} must be finite")
        return x

    def auto(self, section, key, kind=float):
        v = self.raw(section, key, "auto")
        if v.lower() == "auto":
            return None
        return self.num(section, key, kind=kind)

    def flag(self, section, key, default=False):
        v = self.raw(section, key)
        if v is None:
            return default
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        self.fail(section, key, f"{section}.{key} must be a boolean")


def _parse_probe(reader, name, spec):
    items = {}
    for tok in spec.split():
        if "=" not in tok:
            reader.fail("probes", name, f"probe token {tok!r} is not key=value")
        k, v = tok.split("=", 1)
        k = k.strip().lower()
        if k not in _PROBE_KEYS:
            reader.fail("probes", name, f"unknown probe key {k!r}")
        items[k] = v.strip()
    for k in ("axis", "at", "lo", "hi"):
        if k not in items:
            reader.fail("probes", name, f"probe {name} needs {k}=")
    try:
        kw = dict(name=name, axis=items["axis"], at=float(items["at"]), lo=float(items["lo"]), hi=float(items["hi"]))
        if "threshold" in items:
            kw["threshold"] = float(items["threshold"])
        for k in ("min_peaks", "max_peaks", "samples"):
            if k in items:
                kw[k] = int(items[k])
        if "check_on" in items:
            kw["check_on"] = items["check_on"]
        if "normalize" in items:
            kw["normalize"] = items["normalize"].lower() in ("1", "true", "yes", "on")
        return Probe(**kw)
    except ValueError as exc:
        reader.fail("probes", name, f"bad value in probe {name}: {exc}")


def parse_config(text, source="<config>"):
    """Parse config text into an :class:`ExperimentPreset` (strict)."""
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#",))
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError(f"{source}: content before the first [section]", line=exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigParseError(f"{source}: duplicate section [{exc.section}]", line=exc.lineno,
                               field=exc.section) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigParseError(f"{source}: duplicate key {exc.section}.{exc.option}", line=exc.lineno,
                               field=f"{exc.section}.{exc.option}") from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigParseError(f"{source}: cannot parse line", line=line) from exc
    lines = _line_index(text)
    r = _Reader(parser, lines, source)
    for sec in parser.sections():
        if sec not in _SECTIONS:
            r.fail(sec, None, f"unknown section [{sec}]")
        allowed = _SECTIONS[sec]
        if allowed is not None:
            for key in parser.options(sec):
                if key not in allowed:
                    r.fail(sec, key, f"unknown key {sec}.{key}")
    for sec in _REQUIRED:
        if not parser.has_section(sec):
            raise ConfigParseError(f"{source}: missing section [{sec}]", field=sec)

    def guarded(section, build):
        try:
            return build()
        except InvalidInputError as exc:
            msg = str(exc)
            m = re.match(r"([a-z_]+)\.([a-z_0-9]+)", msg)
            if m and m.group(1) == section:
                r.fail(section, m.group(2), msg)
            r.fail(section, None, msg)

    name = r.raw("preset", "name", required=True)
    jobs = tuple(j.strip() for j in r.raw("preset", "jobs", required=True).split(",") if j.strip())
    time = r.num("preset", "time", required=True)
    note = r.raw("preset", "note", "")

    packet = guarded("packet", lambda: PacketParams(**{k: r.num("packet", k, required=True) for k in
                                                        ("x0", "y0", "vx", "vy", "sigma1", "sigma2", "mass")}))

    kind = r.raw("geometry", "kind", "single").lower()
    if kind not in (k.value for k in SlitKind):
        r.fail("geometry", "kind", f"geometry.kind must be single or double, got {kind!r}")
    geom = guarded("geometry", lambda: SlitGeometry(kind, r.num("geometry", "a", required=True),
                                                    r.num("geometry", "b", required=True),
                                                    r.num("geometry", "d", 0.0),
                                                    r.num("geometry", "v_screen", 1e19)))
    grid = stepper = contour = None
    form = "exact"
    if parser.has_section("grid"):
        grid = guarded("grid", lambda: Grid2D(*(r.num("grid", k, required=True) for k in
                                                ("x_min", "x_max", "y_min", "y_max")),
                                              r.num("grid", "nx", required=True, kind=int),
                                              r.num("grid", "ny", required=True, kind=int)))
    if parser.has_section("stepper"):
        stencil = r.raw("stepper", "stencil", "compact")
        if stencil not in STENCILS:
            r.fail("stepper", "stencil", f"stepper.stencil must be one of {STENCILS}")
        stepper = guarded("stepper", lambda: StepperConfig(
            dt=r.num("stepper", "dt", 0.05), t_final=time,
            snapshot_stride=r.num("stepper", "snapshot_stride", 1000, kind=int), stencil=stencil))
    if parser.has_section("contour"):
        form = r.raw("contour", "form", "exact")
        contour = guarded("contour", lambda: ContourSpec(r.num("contour", "phi", 1e-3),
                                                         r.num("contour", "n_nodes", 10000, kind=int),
                                                         r.raw("contour", "rule", "gauss-legendre")))
    cavity = CavityOptions()
    if parser.has_section("cavity"):
        sign = r.raw("cavity", "sign", "decaying")
        if sign not in ("decaying", "printed"):
            r.fail("cavity", "sign", "cavity.sign must be decaying or printed")
        cavity = CavityOptions(r.auto("cavity", "n_max", int), r.auto("cavity", "l_max", int),
                               r.auto("cavity", "cmix_abs"), r.num("cavity", "cmix_phase", 0.0), sign)
        for k in ("n_max", "l_max"):
            v = getattr(cavity, k)
            if v is not None and v < 1:
                r.fail("cavity", k, f"cavity.{k} must be >= 1")
        if cavity.cmix_abs is not None and cavity.cmix_abs < 0:
            r.fail("cavity", "cmix_abs", "cavity.cmix_abs must be >= 0")
    checks = Checks()
    if parser.has_section("checks"):
        checks = Checks(r.num("checks", "norm_tolerance", 1e-9), r.flag("checks", "cavity_better"),
                        r.auto("checks", "cavity_within") if r.raw("checks", "cavity_within") else None)
    probes = tuple(_parse_probe(r, k, v) for k, v in parser.items("probes"))

    return guarded("preset", lambda: ExperimentPreset(name, packet, geom, jobs, time, probes, grid, stepper,
                                                      contour, form, cavity, checks, note))


def ingest_config(path):
    """Read and validate a config file; see the module docstring for the schema."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, str(path))


def _fmt(v):
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_config(preset):
    """Render a preset in the config format; :func:`parse_config` inverts it."""
    out = ["[preset]", f"name = {preset.name}", f"jobs = {','.join(preset.jobs)}", f"time = {preset.time!r}"]
    if preset.note:
        out.append(f"note = {preset.note}")
    p = preset.packet
    out += ["", "[packet]"] + [f"{f.name} = {getattr(p, f.name)!r}" for f in fields(p)]
    g = preset.geometry
    out += ["", "[geometry]", f"kind = {g.kind.value}", f"a = {g.a!r}", f"b = {g.b!r}", f"d = {g.d!r}",
            f"v_screen = {g.v_screen!r}"]
    if preset.grid is not None:
        out += ["", "[grid]"] + [f"{f.name} = {getattr(preset.grid, f.name)!r}" for f in fields(preset.grid)]
    if preset.stepper is not None:
        s = preset.stepper
        out += ["", "[stepper]", f"dt = {s.dt!r}", f"snapshot_stride = {s.snapshot_stride}", f"stencil = {s.stencil}"]
    if preset.contour is not None:
        c = preset.contour
        out += ["", "[contour]", f"phi = {c.phi!r}", f"n_nodes = {c.n_nodes}", f"rule = {c.rule}",
                f"form = {preset.form}"]
    cv = preset.cavity
    out += ["", "[cavity]", f"n_max = {_fmt(cv.n_max)}", f"l_max = {_fmt(cv.l_max)}",
            f"cmix_abs = {_fmt(cv.cmix_abs)}", f"cmix_phase = {cv.cmix_phase!r}", f"sign = {cv.sign}"]
    ch = preset.checks
    out += ["", "[checks]", f"norm_tolerance = {ch.norm_tolerance!r}", f"cavity_better = {_fmt(ch.cavity_better)}"]
    if ch.cavity_within is not None:
        out.append(f"cavity_within = {ch.cavity_within!r}")
    out += ["", "[probes]"]
    for pr in preset.probes:
        toks = [f"axis={pr.axis}", f"at={pr.at!r}", f"lo={pr.lo!r}", f"hi={pr.hi!r}", f"threshold={pr.threshold!r}"]
        if pr.min_peaks is not None:
            toks.append(f"min_peaks={pr.min_peaks}")
        if pr.max_peaks is not None:
            toks.append(f"max_peaks={pr.max_peaks}")
        if pr.check_on is not None:
            toks.append(f"check_on={pr.check_on}")
        toks += [f"normalize={_fmt(pr.normalize)}", f"samples={pr.samples}"]
        out.append(f"{pr.name} = {' '.join(toks)}")
    return "\n".join(out) + "\n"


def load_preset(name_or_path):
    """A built-in preset by name, or a config file by path."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    path = Path(name_or_path)
    if path.exists():
        return ingest_config(path)
    raise InvalidInputError(f"{name_or_path!r} is neither a preset name nor a config file")


def refined(preset):
    """The same preset with dx, dy and dt halved (convergence studies)."""
    if preset.grid is None:
        raise InvalidInputError("only TDSE presets can be refined")
    s = preset.stepper
    return replace(preset, name=f"{preset.name}_refined", grid=preset.grid.refined(),
                   stepper=replace(s, dt=0.5 * s.dt, snapshot_stride=2 * s.snapshot_stride))
