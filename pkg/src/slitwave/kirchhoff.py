"""Kirchhoff approximation for the forward region.

The wave behind the screen is rebuilt from the wave in the opening(s) on the
plane ``x = 0`` through Green's theorem with the free propagator:

    psi(x, y, t) = (-i m x / 4 pi) int_0^t dt0 int_opening dy0
                   e^{delta(tau)} / tau^2 [S(y0, t0) - i tau / (m x) D(y0, t0)]
    delta(tau)   = i m ((y - y0)^2 + x^2) / (2 tau),   tau = t - t0

with ``S`` the wave in the opening and ``D`` its x-derivative.  For the plain
approximation ``S`` is the freely moving incoming packet.  The t0 integral is
taken along the ray ``t0 = s e^{i phi}``, ``0 < s < t``, where the propagator
decays instead of oscillating; the piece of contour joining ``t e^{i phi}`` to
``t`` is of order ``exp(-m x^2 / (2 phi t))`` and is dropped.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import PacketParams, free_packet, free_packet_dx, opening_intervals
from .exceptions import ConfigurationError, InvalidInputError
from .tdse import Profile1D, normalize_at_reference

RULES = ("gauss-legendre", "trapezoid")
SOURCE_FORMS = ("exact", "printed", "printed-sqrt")
GL_PANEL = 16


@dataclass(frozen=True)
class ContourSpec:
    """Rotated t0 contour: angle ``phi`` (radians), node count and rule.

    ``"gauss-legendre"`` is composite with 16-node panels (``n_nodes`` is
    rounded up to a multiple of 16); ``"trapezoid"`` places equal weights at
    half-offset nodes so neither endpoint is sampled.
    """

    phi: float = 1e-3
    n_nodes: int = 10000
    rule: str = "gauss-legendre"

    def __post_init__(self):
        if not (0 < self.phi < math.pi / 4):
            raise InvalidInputError(f"contour.phi must lie in (0, pi/4), got {self.phi!r}")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 100:
            raise InvalidInputError("contour.n_nodes must be an integer >= 100")
        rule = str(self.rule).lower().replace("_", "-")
        aliases = {"gausslegendre": "gauss-legendre", "gauss-legendre": "gauss-legendre", "trapezoid": "trapezoid"}
        if rule not in aliases:
            raise InvalidInputError(f"contour.rule must be one of {RULES}")
        object.__setattr__(self, "rule", aliases[rule])
        object.__setattr__(self, "n_nodes", int(self.n_nodes))


@dataclass(frozen=True)
class SlitSourceParams:
    """Incoming packet as seen from the slit: initial centre, velocity, widths."""

    x00: float
    y00: float
    vx: float
    vy: float
    sigma1: float
    sigma2: float
    mass: float

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "mass"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"source.{name} must be > 0")

    @classmethod
    def from_packet(cls, p):
        return cls(p.x0, p.y0, p.vx, p.vy, p.sigma1, p.sigma2, p.mass)

    def as_packet(self):
        return PacketParams(self.x00, self.y00, self.vx, self.vy, self.sigma1, self.sigma2, self.mass)


def green_free(r, t, r0, t0, mass):
    """Free propagator ``Theta(tau) sqrt(m / (2 pi i tau^3)) exp(delta)``.

    ``r`` and ``r0`` are ``(x, y)`` pairs (array components broadcast).  For
    complex ``tau`` the power is taken as ``exp(-1.5 Log tau)``, continuous as
    long as ``tau`` stays off the negative real axis, which holds on the
    rotated ray.
    """
    tau = np.asarray(t, dtype=complex) - np.asarray(t0, dtype=complex)
    if np.any(tau == 0):
        raise InvalidInputError("tau = 0 is singular")
    r2 = (np.asarray(r[0]) - np.asarray(r0[0])) ** 2 + (np.asarray(r[1]) - np.asarray(r0[1])) ** 2
    pref = math.sqrt(mass / (2 * math.pi)) * np.exp(-0.25j * math.pi) * np.exp(-1.5 * np.log(tau))
    g = pref * np.exp(1j * mass * r2 / (2 * tau))
    causal = tau.real > 0
    g = np.where(causal, g, 0.0)
    return g[()] if g.ndim == 0 else g


@functools.lru_cache(maxsize=4)
def _gl_panel(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _real_nodes(length, n, rule):
    """Nodes and weights on ``(0, length)`` along the real parameter."""
    if rule == "trapezoid":
        h = length / n
        return (np.arange(n) + 0.5) * h, np.full(n, h)
    panels = -(-n // GL_PANEL)
    xp, wp = _gl_panel(GL_PANEL)
    h = length / panels
    starts = np.arange(panels)[:, None] * h
    return (starts + h * xp).ravel(), np.tile(h * wp, panels)


@dataclass(frozen=True)
class Contour:
    nodes: np.ndarray
    weights: np.ndarray
    s: np.ndarray
    direction: int


def rotated_contour(t, spec, direction=1):
    """Quadrature over ``t0`` on the ray ``s e^{i direction phi}``, ``0 < s < t``.

    ``direction=+1`` (counter-clockwise) makes ``Im tau < 0`` so the
    propagator decays; ``-1`` exists to exercise the sign check.
    """
    if not t > 0:
        raise InvalidInputError("t must be > 0")
    if direction not in (1, -1):
        raise InvalidInputError("direction must be +1 or -1")
    s, w = _real_nodes(float(t), spec.n_nodes, spec.rule)
    rot = np.exp(1j * direction * spec.phi)
    return Contour(s * rot, w * rot, s, direction)


def contour_integrate(f, t, spec, direction=1):
    """Integrate an analytic ``f(t0)`` from 0 to ``t`` along the rotated ray."""
    c = rotated_contour(t, spec, direction)
    return complex(np.sum(c.weights * f(c.nodes)))


def packet_at_slit(y0, t0, s, form="exact"):
    """Incoming packet on the plane ``x = 0``.

    ``form="exact"`` is the free evolution of the launched packet (carrier
    included, ``1/sqrt(d1 d2)`` spreading).  ``"printed"`` is the literal
    envelope ``sqrt(s1 s2 / 2pi) e^{-u} / (d1 d2)`` with
    ``u = (x00 + vx t0)^2 / (4 s1^2 d1) + (y0 - y00 - vy t0)^2 / (4 s2^2 d2)``
    and ``d = s^2 + i t0 / 2m``; ``"printed-sqrt"`` swaps in ``sqrt(d1 d2)``.
    """
    t0 = np.asarray(t0, dtype=complex)
    y0 = np.asarray(y0, dtype=float)
    if form == "exact":
        return free_packet(s.as_packet(), 0.0, y0, t0)
    if form not in SOURCE_FORMS:
        raise InvalidInputError(f"form must be one of {SOURCE_FORMS}")
    d1 = s.sigma1**2 + 0.5j * t0 / s.mass
    d2 = s.sigma2**2 + 0.5j * t0 / s.mass
    u = (s.x00 + s.vx * t0) ** 2 / (4 * s.sigma1**2 * d1) + (y0 - s.y00 - s.vy * t0) ** 2 / (4 * s.sigma2**2 * d2)
    denom = d1 * d2 if form == "printed" else np.sqrt(d1) * np.sqrt(d2)
    return math.sqrt(s.sigma1 * s.sigma2 / (2 * math.pi)) * np.exp(-u) / denom


def packet_log_derivative(t0, s, form="exact"):
    """``(d psi / dx) / psi`` of the incoming packet on ``x = 0``."""
    t0 = np.asarray(t0, dtype=complex)
    if form == "exact":
        return free_packet_dx(s.as_packet(), 0.0, 0.0, t0)
    return (s.x00 + s.vx * t0) / (2 * (s.sigma1**2 + 0.5j * t0 / s.mass))


class IncomingSource:
    """Plain Kirchhoff source: the incoming packet and its x-derivative."""

    def __init__(self, s, form="exact"):
        if form not in SOURCE_FORMS:
            raise InvalidInputError(f"form must be one of {SOURCE_FORMS}")
        self.params = s
        self.form = form
        self.mass = s.mass

    def __call__(self, y0, t0):
        val = packet_at_slit(y0[None, :], t0[:, None], self.params, self.form)
        return val, val * packet_log_derivative(t0, self.params, self.form)[:, None]


def merge_intervals(intervals):
    """Union of closed intervals as a sorted list of disjoint pieces."""
    out = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def y0_nodes(intervals, n_per):
    xs, ws = [], []
    x, w = np.polynomial.legendre.leggauss(n_per)
    for lo, hi in intervals:
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (x + 1.0))
        ws.append(half * w)
    return np.concatenate(xs), np.concatenate(ws)


def _sum_once(x, ys, prep, y0_rule, source, mass):
    tau = prep.t_end - prep.nodes
    y0, w0 = y0_rule
    val, dx = source(y0, prep.nodes)
    src = val - (1j * tau / (mass * x))[:, None] * dx
    return _kernels.kirchhoff_sum(ys, x, y0, w0, tau, prep.weights, np.ascontiguousarray(src), 0.5 * mass)


@dataclass(frozen=True)
class _Prepared:
    nodes: np.ndarray
    weights: np.ndarray
    t_end: float


def _prepare(x, t, spec, mass, direction):
    c = rotated_contour(t, spec, direction)
    tau = t - c.nodes
    decay = (1j / tau).real
    if decay[0] > 0 or decay[-1] > 0:
        raise ConfigurationError("contour rotated the wrong way: the propagator grows along it")
    # contributions below exp(-700) underflow anyway
    keep = decay * 0.5 * mass * x * x > -700.0
    tail = math.exp(max(-700.0, 0.5 * mass * x * x * (1j / (t - t * np.exp(1j * direction * spec.phi))).real))
    if tail > 1e-12:
        warnings.warn(f"contour closing segment not negligible ({tail:.2e}); increase phi or x",
                      RuntimeWarning, stacklevel=3)
    return _Prepared(c.nodes[keep], c.weights[keep], float(t))


def kirchhoff_integral(x, ys, t, intervals, source, spec=None, *, y0_start=64, y0_rtol=1e-4,
                       y0_max=4096, direction=1, return_nodes=False):
    """Evaluate the Kirchhoff integral for a generic opening source.

    ``source(y0, t0)`` returns ``(value, x_derivative)`` arrays of shape
    ``(len(t0), len(y0))``.  The y0 rule is Gauss–Legendre per (merged)
    interval, doubled from ``y0_start`` until the result changes by less
    than ``y0_rtol`` relative to its maximum modulus.
    """
    spec = spec or ContourSpec()
    x = float(x)
    if not x > 0:
        raise InvalidInputError("x must be > 0 (forward region)")
    if not t > 0:
        raise InvalidInputError("t must be > 0")
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    intervals = merge_intervals(intervals)
    if not intervals:
        raise InvalidInputError("no opening to integrate over")
    mass = source.mass
    prep = _prepare(x, t, spec, mass, direction)
    pref = -1j * mass * x / (4 * math.pi)
    if prep.nodes.size == 0:
        return np.zeros(ys.shape, dtype=complex)
    n = y0_start
    prev = pref * _sum_once(x, ys, prep, y0_nodes(intervals, n), source, mass)
    while True:
        if 2 * n > y0_max:
            warnings.warn("y0 quadrature hit its node cap before converging", RuntimeWarning, stacklevel=2)
            return prev
        n *= 2
        cur = pref * _sum_once(x, ys, prep, y0_nodes(intervals, n), source, mass)
        scale = np.max(np.abs(cur))
        if scale == 0 or np.max(np.abs(cur - prev)) <= y0_rtol * scale:
            return (cur, n) if return_nodes else cur
        prev = cur


def free_space_opening(s, t, n_sigma=10.0):
    """One interval covering the packet's slit-plane footprint up to time ``t``.

    Used as ``openings`` it removes the screen, so the integral should return
    the freely evolved packet.
    """
    width = s.sigma2 * math.hypot(1.0, t / (2 * s.mass * s.sigma2**2))
    lo = min(s.y00, s.y00 + s.vy * t) - n_sigma * width
    hi = max(s.y00, s.y00 + s.vy * t) + n_sigma * width
    return [(lo, hi)]


def kirchhoff_wave(x, y, t, geom, s, spec=None, *, openings=None, form="exact", **kw):
    """Plain Kirchhoff wave at ``(x, y, t)``; ``y`` may be an array.

    ``openings`` overrides the geometry's intervals (e.g. one interval spanning
    the box turns the screen off for the free-space check).
    """
    intervals = opening_intervals(geom) if openings is None else list(openings)
    out = kirchhoff_integral(x, y, t, intervals, IncomingSource(s, form), spec, **kw)
    return out[0] if np.ndim(y) == 0 else out


def kirchhoff_profile(x, t, y_samples, geom, s, spec=None, *, ref=0.0, **kw):
    """Normalised |psi| along y at fixed ``x`` (unity at the sample nearest ``ref``)."""
    ys = np.asarray(y_samples, dtype=float)
    vals = kirchhoff_wave(x, ys, t, geom, s, spec, **kw)
    prof = Profile1D("y", float(x), ys, np.abs(vals))
    return normalize_at_reference(prof, ref)
