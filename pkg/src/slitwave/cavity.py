"""Cavity-mode correction to the Kirchhoff source.

Inside an opening of half-width ``b`` in a screen of thickness ``2a`` the
standing waves with Dirichlet walls and an antinode at the exit plane are

    cos(p_n (x - a)) cos(q_l y),   p_n = n pi / (2a),   q_l = (2l + 1) pi / (2b)

with ``y`` measured from the opening's centre.  Their coefficients are taken
from the Gaussian momentum weights of the incoming packet,

    A_n B_l = sqrt(s1 s2 / 2pi) exp(-s1^2 (p_n - m vx)^2 - s2^2 q_l^2
                                    - i (p_n^2 + q_l^2) t / 2m) cos(p_n (x00 - a))

and the wave in the opening becomes ``incoming + C * cavity``.  At the exit
plane the x-cosines equal one and their x-derivatives vanish, so the cavity
adds to the value of the source only.

Both sums factorise (one over ``n``, one over ``l``), which keeps the
Kirchhoff evaluation to a matrix product.  On the rotated contour
``Im t0 > 0`` and each term gains ``exp((p^2 + q^2) Im t0 / 2m)``; the sums
converge only while ``Im t0 < 2 m sigma^2`` for both widths.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp

from .core import opening_intervals
from .exceptions import ConfigurationError, InvalidInputError
from .kirchhoff import (
    ContourSpec,
    IncomingSource,
    SOURCE_FORMS,
    kirchhoff_integral,
    packet_at_slit,
)

#: Relative truncation tail targeted by :func:`default_modes`.
DEFAULT_TAIL_TOL = 1e-12
MIN_MODES = 16
MAX_MODES = 100000
SIGNS = ("decaying", "printed")


@dataclass(frozen=True, eq=False)
class CavityModeSet:
    """Retained wavenumbers ``p`` (``n = 1..n_max``) and ``q`` (``l = 0..l_max``).

    ``b`` is the half-width of one opening; for a double slit every opening
    has the same ``b``.
    """

    geometry: object
    n_max: int
    l_max: int
    p: np.ndarray
    q: np.ndarray

    @property
    def a(self):
        return self.geometry.a

    @property
    def b(self):
        return self.geometry.b


def mode_wavenumbers(geom, n_max, l_max):
    for name, v in (("n_max", n_max), ("l_max", l_max)):
        if int(v) != v or v < 1:
            raise InvalidInputError(f"cavity.{name} must be an integer >= 1, got {v!r}")
    n = np.arange(1, int(n_max) + 1)
    l = np.arange(0, int(l_max) + 1)
    p = n * math.pi / (2.0 * geom.a)
    q = (2 * l + 1) * math.pi / (2.0 * geom.b)
    p.flags.writeable = False
    q.flags.writeable = False
    return CavityModeSet(geom, int(n_max), int(l_max), p, q)


@dataclass(frozen=True)
class TotalWaveConfig:
    """Mixing constant ``C`` of the cavity wave.

    ``c_mix=None`` gives the default ``pi^2 / (4ab)`` rotated by ``phase``.
    ``c_mix = 0`` is allowed and turns the correction off exactly.
    """

    c_mix: complex | None = None
    phase: float = 0.0
    sign: str = "decaying"

    def __post_init__(self):
        if self.sign not in SIGNS:
            raise InvalidInputError(f"cavity.sign must be one of {SIGNS}")
        if self.c_mix is not None and not cmath.isfinite(complex(self.c_mix)):
            raise InvalidInputError("cavity.c_mix must be finite")

    @classmethod
    def from_polar(cls, modulus, phase=0.0, sign="decaying"):
        if not modulus >= 0:
            raise InvalidInputError("cavity.cmix_abs must be >= 0")
        return cls(modulus * cmath.exp(1j * phase), 0.0, sign)

    def value(self, geom):
        if self.c_mix is None:
            return default_c_mix(geom) * cmath.exp(1j * self.phase)
        return complex(self.c_mix)


def default_c_mix(geom):
    """Product of the wavenumber increments, ``pi^2 / (4ab)``."""
    return math.pi**2 / (4.0 * geom.a * geom.b)


def _x_exponent(p, t0, s, sign):
    detune = -s.sigma1**2 * (p - s.mass * s.vx) ** 2
    if sign == "printed":
        detune = -detune
    return detune - 0.5j * p * p * t0 / s.mass


def _y_exponent(q, t0, s, sign):
    w = -s.sigma2**2 * q * q
    if sign == "printed":
        w = -w
    return w - 0.5j * q * q * t0 / s.mass


def _prefactor(s):
    return math.sqrt(s.sigma1 * s.sigma2 / (2.0 * math.pi))


def _x_phase(p, s, geom):
    return np.cos(p * (s.x00 - geom.a))


def mode_amplitude(n, l, t, s, geom, sign="decaying"):
    """Coefficient ``A_n B_l`` at time ``t`` (may be complex)."""
    if int(n) != n or n < 1:
        raise InvalidInputError("n must be an integer >= 1")
    if int(l) != l or l < 0:
        raise InvalidInputError("l must be an integer >= 0")
    if sign not in SIGNS:
        raise InvalidInputError(f"sign must be one of {SIGNS}")
    p = n * math.pi / (2.0 * geom.a)
    q = (2 * l + 1) * math.pi / (2.0 * geom.b)
    t = complex(t)
    expo = _x_exponent(p, t, s, sign) + _y_exponent(q, t, s, sign)
    return _prefactor(s) * cmath.exp(expo) * math.cos(p * (s.x00 - geom.a))


def _cos_q(q_index, u):
    """``cos(q_l b u)`` for ``|u| <= 1``, exactly zero at ``|u| = 1``."""
    k = 2 * q_index + 1
    sgn = np.where(q_index % 2 == 0, 1.0, -1.0)
    return sgn * np.sin(0.5 * math.pi * k * (1.0 - np.abs(u)))


def _local_coordinate(y0, geom):
    """Offset from the centre of the containing opening, in units of ``b``.

    Raises when a point lies in no opening.
    """
    y0 = np.asarray(y0, dtype=float)
    u = np.full(y0.shape, np.nan)
    for lo, hi in opening_intervals(geom):
        c = 0.5 * (lo + hi)
        inside = (y0 >= lo) & (y0 <= hi) & np.isnan(u)
        u = np.where(inside, np.clip((y0 - c) / geom.b, -1.0, 1.0), u)
    if np.any(np.isnan(u)):
        raise InvalidInputError("y0 lies outside the opening(s)")
    return u


def _check_growth(s, t0, sign):
    if sign == "printed":
        return
    im = float(np.max(np.imag(np.atleast_1d(t0)))) if np.size(t0) else 0.0
    limit = 2.0 * s.mass * min(s.sigma1, s.sigma2) ** 2
    if im >= limit:
        raise ConfigurationError(
            f"cavity sums diverge for Im t0 = {im:.4g} >= 2 m sigma^2 = {limit:.4g}; reduce the contour angle")


def x_sum(t0, modes, s, sign="decaying"):
    """``sqrt(s1 s2/2pi) sum_n cos(p_n (x00 - a)) exp(...)`` vectorised over ``t0``."""
    t0 = np.asarray(t0, dtype=complex)
    e = _x_exponent(modes.p, t0[..., None], s, sign)
    return _prefactor(s) * np.sum(np.exp(e) * _x_phase(modes.p, s, modes.geometry), axis=-1)


def y_sum(y0, t0, modes, s, sign="decaying"):
    """``sum_l exp(...) cos(q_l y_local)`` on the grid ``t0 x y0``."""
    t0 = np.atleast_1d(np.asarray(t0, dtype=complex))
    u = _local_coordinate(np.atleast_1d(y0), modes.geometry)
    l = np.arange(modes.l_max + 1)
    e = np.exp(_y_exponent(modes.q, t0[:, None], s, sign))
    return e @ _cos_q(l[:, None], u[None, :])


def cavity_wave_at_exit(y0, t0, modes, s, geom=None, sign="decaying"):
    """Cavity wave on the exit plane; broadcasts scalar/array ``y0`` and ``t0``."""
    if geom is not None and geom != modes.geometry:
        raise InvalidInputError("mode set was built for a different geometry")
    y0a = np.asarray(y0, dtype=float)
    t0a = np.asarray(t0, dtype=complex)
    _check_growth(s, t0a, sign)
    yb, tb = np.broadcast_arrays(y0a, t0a)
    flat_y = yb.ravel()
    flat_t = tb.ravel()
    u = _local_coordinate(flat_y, modes.geometry)
    l = np.arange(modes.l_max + 1)
    ey = np.exp(_y_exponent(modes.q[None, :], flat_t[:, None], s, sign))
    ys = np.sum(ey * _cos_q(l[None, :], u[:, None]), axis=1)
    out = (x_sum(flat_t, modes, s, sign) * ys).reshape(yb.shape)
    return out[()] if out.ndim == 0 else out


def psi_total_at_exit(y0, t0, cfg, modes, s, geom=None, form="exact"):
    """Incoming packet plus ``C`` times the cavity wave on the exit plane."""
    geom = modes.geometry if geom is None else geom
    inc = packet_at_slit(y0, t0, s, form)
    c = cfg.value(geom)
    if c == 0:
        return inc
    return inc + c * cavity_wave_at_exit(y0, t0, modes, s, geom, cfg.sign)


# -- truncation -------------------------------------------------------------


def _log_gauss_tail(alpha, start, step):
    """Log of a bound on ``sum_{k>=0} exp(-alpha (start + k step)^2)``, ``start >= 0``.

    The sum is at most the first term plus the integral from ``start``.
    """
    first = -alpha * start * start
    z = math.sqrt(alpha) * start
    # int_start^inf exp(-alpha x^2) dx / step = sqrt(pi/alpha)/(2 step) erfc(z)
    integral = math.log(math.sqrt(math.pi / alpha) / (2.0 * step)) + math.log(2.0) + float(log_ndtr(-math.sqrt(2.0) * z))
    return float(np.logaddexp(first, integral))


def _shifted_gaussian(sigma2, centre, kappa):
    """Rewrite ``-sigma2 (k - centre)^2 + kappa k^2`` as ``-alpha (k - c)^2 + const``."""
    alpha = sigma2 - kappa
    if alpha <= 0:
        return alpha, math.inf, math.inf
    c = sigma2 * centre / alpha
    const = kappa * sigma2 * centre * centre / alpha
    return alpha, c, const


def _log_tail(first_k, step, alpha, c, const):
    """Bound on the log of the sum of ``exp(-alpha (k - c)^2 + const)`` over ``k >= first_k``."""
    if first_k >= c:
        return const + _log_gauss_tail(alpha, first_k - c, step)
    # the peak is not retained; bound by the whole series
    return const + float(np.logaddexp(0.0, math.log(math.sqrt(math.pi / alpha) / step)))


def truncation_tail(modes, s, im_t0=0.0):
    """Bound on neglected / retained coefficient mass ``sum |A_n B_l|``.

    The moduli are evaluated at ``Im t = im_t0`` (the worst point of a
    rotated contour); ``|cos(p_n (x00 - a))| <= 1`` is used for the tail.
    Returns ``inf`` when the sums diverge.
    """
    kappa = im_t0 / (2.0 * s.mass)
    ax, cx, kx = _shifted_gaussian(s.sigma1**2, s.mass * s.vx, kappa)
    ay, cy, ky = _shifted_gaussian(s.sigma2**2, 0.0, kappa)
    if ax <= 0 or ay <= 0:
        return math.inf
    geom = modes.geometry
    log_x = -ax * (modes.p - cx) ** 2 + kx + np.log(np.abs(_x_phase(modes.p, s, geom)) + 1e-300)
    log_y = -ay * (modes.q - cy) ** 2 + ky
    lx = float(logsumexp(log_x))
    ly = float(logsumexp(log_y))
    dp = math.pi / (2.0 * geom.a)
    dq = math.pi / geom.b
    tx = _log_tail(modes.p[-1] + dp, dp, ax, cx, kx)
    ty = _log_tail(modes.q[-1] + dq, dq, ay, cy, ky)
    rx = math.exp(min(700.0, tx - lx))
    ry = math.exp(min(700.0, ty - ly))
    return rx + ry + rx * ry


def default_modes(geom, s, tol=DEFAULT_TAIL_TOL, im_t0=0.0):
    """Smallest mode set (at least 16 x 16) whose truncation tail is below ``tol``."""
    n_max = l_max = MIN_MODES
    while True:
        modes = mode_wavenumbers(geom, n_max, l_max)
        kappa = im_t0 / (2.0 * s.mass)
        if s.sigma1**2 <= kappa or s.sigma2**2 <= kappa:
            raise ConfigurationError("cavity sums diverge at this contour angle; reduce phi")
        if truncation_tail(modes, s, im_t0) < tol:
            return modes
        # grow whichever direction dominates the tail
        one = truncation_tail(mode_wavenumbers(geom, 2 * n_max, l_max), s, im_t0)
        other = truncation_tail(mode_wavenumbers(geom, n_max, 2 * l_max), s, im_t0)
        if one <= other:
            n_max *= 2
        else:
            l_max *= 2
        if max(n_max, l_max) > MAX_MODES:
            raise ConfigurationError("could not reach the cavity truncation tolerance")


# -- Kirchhoff with the cavity source ------------------------------------------


class CavitySource:
    """Kirchhoff source ``incoming + C * cavity`` for :func:`kirchhoff_integral`."""

    def __init__(self, s, modes, cfg, form="exact"):
        if form not in SOURCE_FORMS:
            raise InvalidInputError(f"form must be one of {SOURCE_FORMS}")
        self.incoming = IncomingSource(s, form)
        self.params = s
        self.modes = modes
        self.c = cfg.value(modes.geometry)
        self.sign = cfg.sign
        self.mass = s.mass

    def __call__(self, y0, t0):
        val, dx = self.incoming(y0, t0)
        if self.c == 0:
            return val, dx
        _check_growth(self.params, t0, self.sign)
        cav = x_sum(t0, self.modes, self.params, self.sign)[:, None] * y_sum(y0, t0, self.modes, self.params, self.sign)
        return val + self.c * cav, dx


def cavity_kirchhoff_wave(x, y, t, geom, s, spec=None, modes=None, cfg=None, *, form="exact", **kw):
    """Kirchhoff wave with the cavity-augmented source; ``y`` may be an array.

    With ``modes=None`` the truncation is chosen for the worst point of the
    contour.  Double slits use one mode set per opening (experimental).
    """
    spec = spec or ContourSpec()
    cfg = cfg or TotalWaveConfig()
    if modes is None:
        modes = default_modes(geom, s, im_t0=t * math.sin(spec.phi))
    elif cfg.sign == "decaying":
        tail = truncation_tail(modes, s, t * math.sin(spec.phi))
        if tail > 1e-10:
            warnings.warn(f"cavity truncation tail {tail:.2e} on the contour", RuntimeWarning, stacklevel=2)
    out = kirchhoff_integral(x, y, t, opening_intervals(geom), CavitySource(s, modes, cfg, form), spec, **kw)
    return out[0] if np.ndim(y) == 0 else out
