"""Long-time backward diffraction amplitude in one dimension.

For a packet of width ``sigma`` and momentum ``q0`` launched from ``-x0``
against a static scatterer, the reflected wave at late times is

    |psi(x, t)| = 2 sqrt(2 m pi / t) exp(-z) |sin(m x (x0 + 2 i sigma^2 q0) / t)|
    z = sigma^2 (m^2 (x^2 + x0^2) / t^2 + q0^2)

and the modulus of the complex sine equals
``sqrt(sin^2(m x x0 / t) + sinh^2(2 sigma^2 q0 m x / t))``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidInputError


@dataclass(frozen=True)
class AnalyticParams:
    mass: float
    x0: float
    sigma: float
    q0: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise InvalidInputError("mass must be > 0")
        if not self.x0 > 0:
            raise InvalidInputError("x0 must be > 0 (distance of the initial centre)")
        if not self.sigma > 0:
            raise InvalidInputError("sigma must be > 0")
        if not self.q0 >= 0:
            raise InvalidInputError("q0 must be >= 0")


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise InvalidInputError("t must be > 0")
    return t


def _exponent(x, t, p):
    return p.sigma**2 * (p.mass**2 * (x**2 + p.x0**2) / t**2 + p.q0**2)


def _prefactor(t, p):
    return 2.0 * np.sqrt(2.0 * p.mass * np.pi / t)


def _scaled_sinh(u, z):
    """``sinh(u) exp(-z)`` without overflow or cancellation."""
    au = np.abs(u)
    return -0.5 * np.sign(u) * np.exp(au - z) * np.expm1(-2.0 * au)


def _scaled_cosh(u, z):
    au = np.abs(u)
    return 0.5 * np.exp(au - z) * (1.0 + np.exp(-2.0 * au))


def backward_amplitude_complex(x, t, p):
    """First form: modulus of the complex sine, ``|sin(a + ib)| exp(-z)``.

    ``sin(a + ib) = sin a cosh b + i cos a sinh b``; the hyperbolic factors
    absorb ``exp(-z)`` so large ``b`` cannot overflow.
    """
    t = _check_time(t)
    x = np.asarray(x, dtype=float)
    z = _exponent(x, t, p)
    a = p.mass * x * p.x0 / t
    b = 2.0 * p.sigma**2 * p.q0 * p.mass * x / t
    val = np.sin(a) * _scaled_cosh(b, z) + 1j * np.cos(a) * _scaled_sinh(b, z)
    return _prefactor(t, p) * np.abs(val)


def backward_amplitude_real(x, t, p):
    """Second form: square root of sin^2 + sinh^2, scaled by ``exp(-z)``."""
    t = _check_time(t)
    x = np.asarray(x, dtype=float)
    z = _exponent(x, t, p)
    u = 2.0 * p.sigma**2 * p.q0 * p.mass * x / t
    s = np.sin(p.mass * x * p.x0 / t) * np.exp(-z)
    return _prefactor(t, p) * np.hypot(s, _scaled_sinh(u, z))


def _log_sinh_abs(u):
    au = np.abs(u)
    with np.errstate(divide="ignore"):
        return au - math.log(2.0) + np.log(-np.expm1(-2.0 * au))


def _log_hypot(la, lb):
    hi = np.maximum(la, lb)
    lo = np.minimum(la, lb)
    with np.errstate(invalid="ignore"):
        out = hi + 0.5 * np.log1p(np.exp(2.0 * (lo - hi)))
    return np.where(np.isneginf(hi), -np.inf, out)


def log_backward_amplitude(x, t, p, form="real"):
    """Natural log of the amplitude, finite far below the float64 range.

    ``form`` selects which closed form is evaluated ("real" or "complex").
    """
    t = _check_time(t)
    x = np.asarray(x, dtype=float)
    base = np.log(_prefactor(t, p)) - _exponent(x, t, p)
    a = p.mass * x * p.x0 / t
    b = 2.0 * p.sigma**2 * p.q0 * p.mass * x / t
    with np.errstate(divide="ignore"):
        if form == "real":
            core = _log_hypot(np.log(np.abs(np.sin(a))), _log_sinh_abs(b))
        elif form == "complex":
            ab = np.abs(b)
            val = np.sin(a) * 0.5 * (1.0 + np.exp(-2.0 * ab)) - 0.5j * np.sign(b) * np.cos(a) * np.expm1(-2.0 * ab)
            core = ab + np.log(np.abs(val))
        else:
            raise InvalidInputError("form must be 'real' or 'complex'")
    out = base + core
    return out[()] if np.ndim(out) == 0 else out


def backward_amplitude(x, t, p, check=True, rtol=1e-12):
    """Backward-region amplitude, vectorised over ``x`` and ``t``.

    Both closed forms are evaluated; with ``check`` they must agree to
    ``rtol`` wherever both are finite and non-zero.
    """
    a = backward_amplitude_real(x, t, p)
    if check:
        b = backward_amplitude_complex(x, t, p)
        both = np.isfinite(a) & np.isfinite(b)
        scale = np.maximum(np.abs(a), np.abs(b))
        bad = both & (np.abs(a - b) > rtol * scale)
        if np.any(bad):
            raise ArithmeticError("closed forms of the backward amplitude disagree")
    return a[()] if np.ndim(a) == 0 else a


class ZeroPositions(NamedTuple):
    positions: np.ndarray
    approximate: bool
    sinh_at_last: float


def backward_zero_positions(t, p, k_max):
    """Valleys ``x_k = k pi t / (m x0)``, ``k = 1..k_max``, of the pattern.

    They are exact zeros only while the sinh term is negligible;
    ``approximate`` is set (and a RuntimeWarning issued) when
    ``sinh(2 sigma^2 q0 m x_kmax / t)`` exceeds 0.1.
    """
    t = float(_check_time(t))
    if int(k_max) != k_max or k_max < 1:
        raise InvalidInputError("k_max must be a positive integer")
    k = np.arange(1, int(k_max) + 1)
    xs = k * np.pi * t / (p.mass * p.x0)
    sh = math.sinh(2.0 * p.sigma**2 * p.q0 * p.mass * xs[-1] / t)
    approximate = sh > 0.1
    if approximate:
        warnings.warn(f"sinh term {sh:.3g} > 0.1 at the last valley; positions are approximate",
                      RuntimeWarning, stacklevel=2)
    return ZeroPositions(xs, approximate, sh)


def zero_spacing(t, p):
    return math.pi * t / (p.mass * p.x0)


def persistence_scale(w, q0):
    if not (w > 0 and q0 > 0):
        raise InvalidInputError("w and q0 must be > 0")
    return math.sqrt(w / q0)


def persists(sigma, w, q0, safety=1.0):
    """True when the multi-peak backward train survives: sigma < safety*sqrt(w/q0)."""
    return bool(sigma < safety * persistence_scale(w, q0))


def slit_persists(sigma1, a, q0, safety=1.0):
    """:func:`persists` with the screen thickness ``2a`` as the range ``w``."""
    return persists(sigma1, 2.0 * a, q0, safety)
