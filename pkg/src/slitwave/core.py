"""Domain types, grids, the initial Gaussian packet and the slit screen.

Units have hbar = 1 throughout.  The screen is centred on ``x = 0`` and
occupies ``|x| <= a``; openings are intervals in ``y``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .exceptions import GridError, InvalidInputError

#: Largest probability allowed outside the box at t = 0.
TAIL_MASS_LIMIT = 1e-9


def _require(condition, message):
    if not condition:
        raise InvalidInputError(message)


@dataclass(frozen=True)
class PacketParams:
    """Minimal-uncertainty Gaussian packet: centre, velocity, widths, mass."""

    x0: float
    y0: float
    vx: float
    vy: float
    sigma1: float
    sigma2: float
    mass: float

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "mass"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value > 0, f"packet.{name} must be > 0, got {value!r}")
        for name in ("x0", "y0", "vx", "vy"):
            _require(math.isfinite(getattr(self, name)), f"packet.{name} must be finite")

    @property
    def qx(self):
        return self.mass * self.vx

    @property
    def qy(self):
        return self.mass * self.vy


class SlitKind(str, enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"


@dataclass(frozen=True)
class SlitGeometry:
    """Screen of half-thickness ``a`` with one or two openings of half-width ``b``.

    For the double slit ``d`` is the half-separation of the inner edges, so the
    openings are ``[d, d + 2b]`` and ``[-d - 2b, -d]``.
    """

    kind: SlitKind = SlitKind.SINGLE
    a: float = 2.0
    b: float = 3.0
    d: float = 0.0
    v_screen: float = 1e19

    def __post_init__(self):
        object.__setattr__(self, "kind", SlitKind(self.kind))
        _require(math.isfinite(self.a) and self.a > 0, f"geometry.a must be > 0, got {self.a!r}")
        _require(math.isfinite(self.b) and self.b > 0, f"geometry.b must be > 0, got {self.b!r}")
        _require(math.isfinite(self.d) and self.d >= 0, f"geometry.d must be >= 0, got {self.d!r}")
        _require(self.v_screen >= 0, "geometry.v_screen must be >= 0")

    @classmethod
    def single(cls, a, b, v_screen=1e19):
        return cls(SlitKind.SINGLE, a, b, 0.0, v_screen)

    @classmethod
    def double(cls, a, b, d, v_screen=1e19):
        return cls(SlitKind.DOUBLE, a, b, d, v_screen)


def opening_intervals(geom):
    """Return the openings of the screen as a list of ``(y_lo, y_hi)``."""
    if geom.kind is SlitKind.SINGLE:
        return [(-geom.b, geom.b)]
    return [(-geom.d - 2 * geom.b, -geom.d), (geom.d, geom.d + 2 * geom.b)]


def opening_centers(geom):
    return [0.5 * (lo + hi) for lo, hi in opening_intervals(geom)]


def screen_potential(geom, x, y):
    """Hard-wall screen potential, vectorised over ``x`` and ``y``.

    Returns ``geom.v_screen`` where ``|x| <= a`` and ``y`` lies in no opening,
    zero elsewhere.  Opening intervals are closed.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    in_opening = np.zeros(x.shape, dtype=bool)
    for lo, hi in opening_intervals(geom):
        in_opening |= (y >= lo) & (y <= hi)
    v = np.where((np.abs(x) <= geom.a) & ~in_opening, geom.v_screen, 0.0)
    return v[()] if v.ndim == 0 else v


@dataclass(frozen=True)
class Grid2D:
    """Uniform node-centred grid; edge nodes carry the Dirichlet boundary."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        _require(int(self.nx) == self.nx and self.nx >= 16, "grid.nx must be an integer >= 16")
        _require(int(self.ny) == self.ny and self.ny >= 16, "grid.ny must be an integer >= 16")
        _require(self.x_max > self.x_min, "grid.x_max must exceed grid.x_min")
        _require(self.y_max > self.y_min, "grid.y_max must exceed grid.y_min")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self):
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self):
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def shape(self):
        return (self.nx, self.ny)

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def refined(self):
        """Same box with the spacing halved in both directions."""
        return Grid2D(self.x_min, self.x_max, self.y_min, self.y_max, 2 * self.nx - 1, 2 * self.ny - 1)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Wavefunction samples on a grid at a given time.

    ``values`` has shape ``(nx, ny)`` and is stored read-only.
    """

    grid: Grid2D
    values: np.ndarray
    time: float = 0.0
    mass: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise InvalidInputError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def with_values(self, values, time=None):
        return ComplexField(self.grid, values, self.time if time is None else time, self.mass, dict(self.meta))

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def packet_tail_mass(p, g):
    """Continuum probability of the initial packet lying outside the box."""
    sx = math.sqrt(2.0) * p.sigma1
    sy = math.sqrt(2.0) * p.sigma2
    px = 0.5 * (erf((g.x_max - p.x0) / sx) - erf((g.x_min - p.x0) / sx))
    py = 0.5 * (erf((g.y_max - p.y0) / sy) - erf((g.y_min - p.y0) / sy))
    # 1 - px*py loses digits near 1; use the complementary pieces.
    return float((1.0 - px) + px * (1.0 - py))


def make_packet(p, g, geom=None, clip_threshold=1e6):
    """Sample the initial packet on ``g`` normalised to unit discrete norm.

    With ``geom``, nodes where the screen potential exceeds ``clip_threshold``
    are zeroed before normalising, so a packet launched against the screen
    carries no amplitude inside the (effectively infinite) barrier.

    Raises GridError when more than ``TAIL_MASS_LIMIT`` of the continuum
    probability falls outside the box.
    """
    tail = packet_tail_mass(p, g)
    if tail > TAIL_MASS_LIMIT:
        raise GridError(f"grid too small for packet: tail mass outside box {tail:.3e} > {TAIL_MASS_LIMIT:g}")
    X, Y = g.mesh()
    dxp = X - p.x0
    dyp = Y - p.y0
    w = 1j * p.qx * dxp + 1j * p.qy * dyp - dxp**2 / (4 * p.sigma1**2) - dyp**2 / (4 * p.sigma2**2)
    psi = np.exp(w)
    psi[0, :] = psi[-1, :] = 0.0
    psi[:, 0] = psi[:, -1] = 0.0
    if geom is not None:
        psi[screen_potential(geom, X, Y) > clip_threshold] = 0.0
    # The value at the centre is exactly A (zero phase).
    amp = 1.0 / math.sqrt(float(np.sum(np.abs(psi) ** 2)) * g.dx * g.dy)
    return ComplexField(g, amp * psi, 0.0, p.mass, {"packet": p})


def free_packet(p, x, y, t):
    """Closed-form free evolution of the continuum-normalised packet.

    Vectorised over ``x``, ``y`` and ``t``; ``t`` may be complex.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    t = np.asarray(t, dtype=complex)
    return _free_1d(x - p.x0, p.sigma1, p.qx, p.mass, t) * _free_1d(y - p.y0, p.sigma2, p.qy, p.mass, t)


def _free_1d(u, sigma, q, m, t):
    d = sigma**2 + 0.5j * t / m
    pref = (2 * np.pi) ** -0.25 * np.sqrt(sigma) / np.sqrt(d)
    return pref * np.exp(-((u - 2j * sigma**2 * q) ** 2) / (4 * d) - sigma**2 * q**2)


def free_packet_dx(p, x, y, t):
    """x-derivative of :func:`free_packet` divided by its value."""
    t = np.asarray(t, dtype=complex)
    d = p.sigma1**2 + 0.5j * t / p.mass
    return -(np.asarray(x) - p.x0 - 2j * p.sigma1**2 * p.qx) / (2 * d)
