import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitwave.core import (
    ComplexField,
    Grid2D,
    PacketParams,
    SlitGeometry,
    free_packet,
    free_packet_dx,
    make_packet,
    opening_intervals,
    packet_tail_mass,
    screen_potential,
)
from slitwave.exceptions import GridError, InvalidInputError

FIG2_PACKET = PacketParams(-10.0, 0.0, 0.05, 0.0, 1.0, 1.0, 20.0)
BOX = Grid2D(-48.0, 48.0, -40.0, 40.0, 512, 512)


def test_packet_norm_is_one():
    f = make_packet(FIG2_PACKET, BOX)
    norm = np.sum(np.abs(f.values) ** 2) * BOX.dx * BOX.dy
    assert abs(norm - 1.0) < 1e-12


def test_packet_centre_value_is_real_amplitude():
    g = Grid2D(-20.0, 0.0, -10.0, 10.0, 201, 201)
    f = make_packet(FIG2_PACKET, g)
    i = int(np.argmin(np.abs(g.x + 10.0)))
    j = int(np.argmin(np.abs(g.y)))
    centre = f.values[i, j]
    assert abs(centre.imag) < 1e-15
    assert centre.real == pytest.approx(np.max(np.abs(f.values)), rel=1e-14)


def test_packet_phase_gradient_is_momentum():
    g = Grid2D(-17.0, -3.0, -7.0, 7.0, 1001, 1001)
    h = g.dx
    f = make_packet(FIG2_PACKET, g)
    i = j = 500
    gx = np.angle(f.values[i + 1, j] / f.values[i - 1, j]) / (2 * h)
    gy = np.angle(f.values[i, j + 1] / f.values[i, j - 1]) / (2 * h)
    assert abs(gx - 1.0) < 1e-3
    assert abs(gy) < 1e-3


def test_packet_boundary_is_zero():
    f = make_packet(FIG2_PACKET, BOX)
    for edge in (f.values[0], f.values[-1], f.values[:, 0], f.values[:, -1]):
        assert np.all(edge == 0)


def test_packet_clipped_at_screen():
    geom = SlitGeometry.single(1.0, 1.0)
    p = PacketParams(-3.0, 0.0, 0.05, 0.0, 2.0, 2.0, 20.0)
    f = make_packet(p, BOX, geom)
    X, Y = BOX.mesh()
    assert np.all(f.values[screen_potential(geom, X, Y) > 0] == 0)
    assert np.sum(np.abs(f.values) ** 2) * BOX.dx * BOX.dy == pytest.approx(1.0, abs=1e-12)


def test_grid_too_small_for_packet():
    g = Grid2D(-12.0, 12.0, -10.0, 10.0, 64, 64)
    with pytest.raises(GridError):
        make_packet(PacketParams(-10.0, 0.0, 0.05, 0.0, 1.0, 1.0, 20.0), g)
    assert packet_tail_mass(FIG2_PACKET, BOX) < 1e-12


def test_packet_validation_names_field():
    with pytest.raises(InvalidInputError, match="packet.sigma1"):
        PacketParams(-10.0, 0.0, 0.05, 0.0, -1.0, 1.0, 20.0)
    with pytest.raises(InvalidInputError, match="packet.mass"):
        PacketParams(-10.0, 0.0, 0.05, 0.0, 1.0, 1.0, 0.0)


def test_screen_potential_examples():
    geom = SlitGeometry.single(2.0, 3.0)
    assert screen_potential(geom, 0.0, 0.0) == 0.0
    assert screen_potential(geom, 1.0, 5.0) == 1e19
    assert screen_potential(geom, 3.0, 5.0) == 0.0


def test_opening_intervals_examples():
    assert opening_intervals(SlitGeometry.single(2.0, 3.0)) == [(-3.0, 3.0)]
    assert opening_intervals(SlitGeometry.double(2.0, 2.0, 2.0)) == [(-6.0, -2.0), (2.0, 6.0)]
    assert opening_intervals(SlitGeometry.double(2.0, 2.0, 0.0)) == [(-4.0, -0.0), (0.0, 4.0)]


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.2, 5.0), b=st.floats(0.2, 5.0))
def test_touching_double_slit_has_single_slit_potential(a, b):
    X, Y = BOX.mesh()
    v_double = screen_potential(SlitGeometry.double(a, b, 0.0), X, Y)
    v_single = screen_potential(SlitGeometry.single(a, 2 * b), X, Y)
    assert np.array_equal(v_double, v_single)


def test_geometry_validation():
    with pytest.raises(InvalidInputError, match="geometry.a"):
        SlitGeometry.single(0.0, 3.0)
    with pytest.raises(InvalidInputError, match="geometry.d"):
        SlitGeometry.double(2.0, 2.0, -1.0)


def test_grid_spacing_and_refinement():
    assert BOX.dx == pytest.approx(96.0 / 511)
    r = BOX.refined()
    assert r.dx == pytest.approx(BOX.dx / 2)
    assert np.array_equal(r.x[::2], BOX.x)
    with pytest.raises(InvalidInputError):
        Grid2D(0.0, 1.0, 0.0, 1.0, 8, 32)


def test_field_is_read_only_and_checked():
    f = make_packet(FIG2_PACKET, BOX)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    with pytest.raises(InvalidInputError):
        ComplexField(BOX, np.zeros((3, 3)))
    with pytest.raises(InvalidInputError):
        ComplexField(BOX, np.full(BOX.shape, np.nan))
    doubled = 2 * f
    assert np.array_equal(doubled.values, 2 * f.values)


def test_free_packet_at_zero_matches_sampled_packet():
    f = make_packet(FIG2_PACKET, BOX)
    X, Y = BOX.mesh()
    exact = free_packet(FIG2_PACKET, X, Y, 0.0)
    inner = (slice(1, -1), slice(1, -1))
    assert np.max(np.abs(f.values[inner] - exact[inner])) < 1e-10


def test_free_packet_conserves_continuum_norm():
    p = PacketParams(-3.0, 1.0, 0.2, -0.1, 0.8, 1.3, 5.0)
    x = np.linspace(-60, 60, 1201)
    y = np.linspace(-60, 60, 1201)
    X, Y = np.meshgrid(x, y, indexing="ij")
    psi = free_packet(p, X, Y, 40.0)
    assert np.sum(np.abs(psi) ** 2) * (x[1] - x[0]) * (y[1] - y[0]) == pytest.approx(1.0, abs=1e-9)


def test_free_packet_solves_schroedinger():
    # i dpsi/dt = -(1/2m) laplacian psi, checked by central differences
    p = PacketParams(-2.0, 0.5, 0.1, 0.05, 1.0, 1.5, 3.0)
    h, k = 1e-3, 1e-3
    x, y, t = 0.3, -0.2, 7.0
    dt = (free_packet(p, x, y, t + k) - free_packet(p, x, y, t - k)) / (2 * k)
    lap = (free_packet(p, x + h, y, t) + free_packet(p, x - h, y, t) + free_packet(p, x, y + h, t)
           + free_packet(p, x, y - h, t) - 4 * free_packet(p, x, y, t)) / h**2
    assert abs(1j * dt + lap / (2 * p.mass)) < 1e-6 * abs(free_packet(p, x, y, t))


@pytest.mark.parametrize("t", [0.0, 50.0, 120.0 - 3.0j])
def test_free_packet_log_derivative(t):
    p = FIG2_PACKET
    h = 1e-5
    x, y = 0.0, 0.7
    fd = (free_packet(p, x + h, y, t) - free_packet(p, x - h, y, t)) / (2 * h)
    assert abs(fd / free_packet(p, x, y, t) - free_packet_dx(p, x, y, t)) < 1e-6


def test_free_packet_centre_moves_with_velocity():
    p = FIG2_PACKET
    x = np.linspace(-20, 20, 4001)
    amp = np.abs(free_packet(p, x, 0.0, 100.0))
    assert x[np.argmax(amp)] == pytest.approx(p.x0 + p.vx * 100.0, abs=0.01)
    width = math.sqrt(1 + (100.0 / (2 * p.mass * p.sigma1**2)) ** 2)
    half = x[amp >= amp.max() * math.exp(-0.25)]
    assert 0.5 * (half[-1] - half[0]) == pytest.approx(width, rel=2e-3)
