"""Marching squares level sets and SVG output."""
import numpy as np
import pytest

from hylyap import presets
from hylyap.levelset import level_set, marching_squares, midpoint_convexity, render_svg

BOX = (-3, -3, 3, 3)


def closed(line):
    return np.allclose(line[0], line[-1])


def test_vm_level_one_is_closed_and_nonconvex():
    V = presets.clegg_VM()
    lines = level_set(V, 1.0, BOX, 400)
    assert len(lines) == 1 and closed(lines[0])
    convex, worst = midpoint_convexity(V, lines[0], 1.0)
    assert not convex and worst > 1


def test_vconv_level_one_is_convex():
    V = presets.clegg_Vconv()
    lines = level_set(V, 1.0, BOX, 400)
    assert len(lines) == 1 and closed(lines[0])
    assert midpoint_convexity(V, lines[0], 1.0)[0]


def test_unit_circle():
    lines = level_set(presets.quadratic_V(), 1.0, (-2, -2, 2, 2), 400)
    assert len(lines) == 1
    r = np.linalg.norm(lines[0], axis=1)
    assert np.abs(r - 1).max() < 1e-3


def test_open_contour_in_box():
    xs = ys = np.linspace(-1, 1, 21)
    Z = np.add.outer(ys, np.zeros_like(xs))
    lines = marching_squares(Z, xs, ys, 0.05)
    assert len(lines) == 1 and not closed(lines[0])
    np.testing.assert_allclose(lines[0][:, 1], 0.05)


def test_empty_level():
    assert level_set(presets.quadratic_V(), 100.0, (-1, -1, 1, 1), 50) == []


def test_svg_deterministic_and_structured():
    V = presets.clegg_VM()
    c = {1.0: level_set(V, 1.0, BOX, 200), 2.0: level_set(V, 2.0, BOX, 200)}
    a = render_svg(c, BOX, overlay=[np.array([[0.0, 0.0], [1.0, 1.0]])])
    b = render_svg(c, BOX, overlay=[np.array([[0.0, 0.0], [1.0, 1.0]])])
    assert a == b
    assert a.count('class="level"') == 2 and 'class="trajectory"' in a
    assert a.startswith("<svg") and a.rstrip().endswith("</svg>")


@pytest.mark.parametrize("level", [0.5, 1.0, 2.0])
def test_contour_points_lie_on_level(level):
    V = presets.clegg_Vmid()
    for line in level_set(V, level, BOX, 300):
        assert np.abs(V(line) / level - 1).max() < 0.05
