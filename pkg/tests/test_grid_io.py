import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbwave.grid import Grid, make_grid
from sbwave.io import dumps, fmt


@pytest.mark.parametrize("sigma,half_width", [(0.05, 179.0), (1.0, 40.0), (0.1, 127.0)])
def test_make_grid_half_width(sigma, half_width):
    g = make_grid(sigma)
    assert g.half_width == half_width
    assert g.spacing <= 0.05 / math.sqrt(sigma)
    assert g.n_points & (g.n_points - 1) == 0
    assert g.spacing * g.n_points == pytest.approx(2.0 * g.half_width)


def test_make_grid_spacing_drives_point_count():
    g = make_grid(0.05, points_per_width=16)
    assert g.spacing <= 0.05 / math.sqrt(0.05)
    assert g.spacing * 2 > 0.05 / math.sqrt(0.05)


def test_make_grid_explicit_points():
    assert make_grid(0.05, n_points=4096).n_points == 4096


@pytest.mark.parametrize("n", [0, 3, 6, 1000])
def test_grid_requires_power_of_two(n):
    with pytest.raises(ValueError):
        Grid(10.0, n)


def test_spectral_derivative_of_periodic_function():
    g = Grid(math.pi, 64)
    x = g.x
    f = np.sin(3 * x) + np.cos(x)
    assert np.allclose(g.diff(f), 3 * np.cos(3 * x) - np.sin(x), atol=1e-12)
    assert np.allclose(g.diff(f, 2), -9 * np.sin(3 * x) - np.cos(x), atol=1e-11)
    z = np.exp(2j * x)
    assert np.allclose(g.diff(z), 2j * z, atol=1e-12)


def test_derivative_of_real_is_real():
    g = Grid(5.0, 32)
    assert np.isrealobj(g.diff(np.exp(-g.x**2)))


def test_interpolation_is_exact_for_band_limited():
    g = Grid(math.pi, 32)
    f = np.cos(5 * g.x) + 0.3 * np.sin(2 * g.x)
    fine = g.refined(4)
    assert np.allclose(g.interpolate(f, 4), np.cos(5 * fine.x) + 0.3 * np.sin(2 * fine.x), atol=1e-13)


def test_quadrature_of_gaussian():
    g = Grid(20.0, 512)
    assert g.integrate(np.exp(-g.x**2)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert g.norm(np.exp(-g.x**2)) ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-14)


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_inner_product_is_bilinear(a, b):
    g = Grid(10.0, 64)
    f1, f2, h = np.exp(-g.x**2), g.x * np.exp(-g.x**2), np.cos(g.x) * np.exp(-(g.x**2) / 4)
    assert g.inner(a * f1 + b * f2, h) == pytest.approx(a * g.inner(f1, h) + b * g.inner(f2, h), abs=1e-12)


def test_fmt_is_seventeen_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(-0.0) == "0"
    assert fmt(float("nan")) == "nan"
    assert fmt(float("-inf")) == "-inf"
    assert float(fmt(1 / 3)) == 1 / 3


def test_dumps_sorted_and_handles_numpy():
    s = dumps({"b": np.float64(1.5), "a": np.arange(2), "c": np.bool_(True)})
    assert s == '{"a": [0, 1], "b": 1.5, "c": true}'
    assert json.loads(s)["b"] == 1.5
