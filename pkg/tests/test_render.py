"""Raster escape fields: grid geometry, classification, components, artifacts.

The renderer is cross-checked pixel-by-pixel against the scalar escape test,
and its geometric/symmetry invariants are exercised on grids whose pixel
centers are exact dyadics so conjugation symmetry is bit-exact.
"""

import io

import numpy as np
import pytest

from juliaspec.dynamics import FiberedSystem, escape_classify
from juliaspec.errors import OriginEscapedError, OutOfRangeError
from juliaspec.numeration import BaseSequence
from juliaspec.render import (
    INSIDE_COLOR,
    EscapeField,
    GridSpec,
    component_of_zero,
    count_components,
    render_field,
    write_field_csv,
    write_image,
)
from juliaspec.sequences import constant


def shift_system():
    # p identically 1 turns every fiber map into plain squaring, whose
    # filled set is the closed unit disk.
    return FiberedSystem(BaseSequence(2), constant(1))


# -- grid geometry -----------------------------------------------------------


def test_grid_validation():
    good = dict(re_min=-1.0, re_max=1.0, im_min=-1.0, im_max=1.0, width=4, height=4, max_iter=10)
    GridSpec(**good)
    for bad in (
        dict(good, re_min=1.0),
        dict(good, im_max=-1.0),
        dict(good, width=0),
        dict(good, height=0),
        dict(good, max_iter=0),
        dict(good, radius=1.0),
        dict(good, radius=0.5),
    ):
        with pytest.raises(OutOfRangeError):
            GridSpec(**bad)


def test_pixel_center_roundtrip():
    grid = GridSpec(-1.37, 0.83, -0.61, 1.19, 11, 7, 25)
    assert grid.dx == pytest.approx(2.2 / 11)
    assert grid.dy == pytest.approx(1.8 / 7)
    for row in range(7):
        for col in range(11):
            z = grid.complex_at(row, col)
            assert grid.pixel_of(z) == (row, col)
    assert grid.complex_at(0, 0).imag > grid.complex_at(6, 0).imag  # row 0 on top
    for outside in (2.0, -1.4, complex(0, 1.2), complex(0.83, 0)):
        with pytest.raises(OutOfRangeError):
            grid.pixel_of(outside)


def test_field_shape_validation():
    grid = GridSpec(-1, 1, -1, 1, 4, 3, 10)
    with pytest.raises(OutOfRangeError):
        EscapeField(grid, np.zeros((4, 4), dtype=np.int32))


# -- rendering ---------------------------------------------------------------


def test_render_agrees_with_scalar_escape_test(systems):
    grid = GridSpec(-1.3, 0.9, -0.8, 1.1, 9, 7, 30)
    for name in ("ternary-p12", "binary-geometric"):
        sys = systems[name]
        field = render_field(sys, grid)
        for row in range(7):
            for col in range(9):
                out = escape_classify(sys, grid.complex_at(row, col), 30)
                if out.escaped:
                    assert field.steps[row, col] == out.step, (name, row, col)
                else:
                    assert field.steps[row, col] == 0, (name, row, col)


def test_budget_extension_preserves_early_escapes(systems):
    sys = systems["ternary-p12"]
    short = render_field(sys, GridSpec(-1.2, 1.2, -1.2, 1.2, 16, 16, 6))
    long = render_field(sys, GridSpec(-1.2, 1.2, -1.2, 1.2, 16, 16, 40))
    esc = short.steps > 0
    assert np.array_equal(long.steps[esc], short.steps[esc])
    rest = long.steps[~esc]
    assert np.all((rest == 0) | (rest > 6))


def test_conjugation_symmetry_is_exact(systems):
    # Dyadic window: pixel-center heights are exact negatives of each other,
    # and the iteration has real coefficients, so the field mirrors exactly.
    grid = GridSpec(-1.0, 1.0, -1.0, 1.0, 8, 4, 30)
    field = render_field(systems["mixed23-harmonic"], grid)
    assert np.array_equal(field.steps, field.steps[::-1, :])


def test_shift_field_is_unit_disk_indicator():
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 64, 64, 60)
    field = render_field(shift_system(), grid)
    centers = np.array(
        [[grid.complex_at(r, c) for c in range(64)] for r in range(64)]
    )
    mod = np.abs(centers)
    assert np.all(field.inside[mod <= 0.99])
    assert np.all(~field.inside[mod >= 1.01])
    assert field.inside_fraction() == pytest.approx(np.pi / 9, rel=0.05)


def test_render_is_deterministic(systems):
    grid = GridSpec(-1.1, 1.1, -1.1, 1.1, 12, 12, 20)
    a = render_field(systems["binary-geometric"], grid)
    b = render_field(systems["binary-geometric"], grid)
    assert np.array_equal(a.steps, b.steps)


# -- components --------------------------------------------------------------


def test_component_of_zero_is_whole_disk_for_shift():
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 64, 64, 60)
    field = render_field(shift_system(), grid)
    assert count_components(field) == 1
    mask = component_of_zero(field)
    assert np.array_equal(mask, field.inside)


def test_component_of_zero_rejects_escaped_origin():
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 16, 16, 20)
    field = render_field(shift_system(), grid)
    doctored = field.steps.copy()
    row, col = grid.pixel_of(0j)
    doctored[row, col] = 5
    with pytest.raises(OriginEscapedError):
        component_of_zero(EscapeField(grid, doctored))


def test_component_of_zero_needs_origin_in_window():
    grid = GridSpec(1.0, 2.0, 1.0, 2.0, 4, 4, 5)
    field = render_field(shift_system(), grid)
    with pytest.raises(OutOfRangeError):
        component_of_zero(field)


def test_count_components_synthetic():
    grid = GridSpec(-1, 1, -1, 1, 5, 5, 9)
    steps = np.ones((5, 5), dtype=np.int32)
    steps[0, 0] = 0
    steps[4, 4] = 0
    assert count_components(EscapeField(grid, steps)) == 2
    # Diagonal contact does not merge components under 4-connectivity, so the
    # new pixel touching (0, 0) corner-to-corner counts separately.
    steps[1, 1] = 0
    assert count_components(EscapeField(grid, steps)) == 3


# -- artifacts ---------------------------------------------------------------


def test_ppm_golden_inside_and_escaped():
    grid = GridSpec(0, 1, 0, 1, 2, 1, 7)
    field = EscapeField(grid, np.array([[0, 7]], dtype=np.int32))
    buf = io.BytesIO()
    write_image(field, buf)
    body = bytes(INSIDE_COLOR) + bytes((255, 220, 0))  # t = 1 ramp endpoint
    assert buf.getvalue() == b"P6\n2 1\n255\n" + body


def test_ppm_palette_midpoint():
    grid = GridSpec(0, 1, 0, 1, 1, 1, 12)
    field = EscapeField(grid, np.array([[3]], dtype=np.int32))  # t = 1/4
    buf = io.BytesIO()
    write_image(field, buf)
    assert buf.getvalue() == b"P6\n1 1\n255\n" + bytes((127, 100, 191))


def test_ppm_overlay_markers_clip_and_skip():
    grid = GridSpec(0, 3, 0, 3, 3, 3, 5)
    field = EscapeField(grid, np.zeros((3, 3), dtype=np.int32))
    red = (255, 0, 0)

    buf = io.BytesIO()
    write_image(field, buf, overlays=[((1.5 + 1.5j,), red)])
    assert buf.getvalue()[11:] == bytes(red) * 9  # centered 3x3 covers all

    buf = io.BytesIO()
    write_image(field, buf, overlays=[((0.2 + 2.7j,), red)])
    img = np.frombuffer(buf.getvalue()[11:], dtype=np.uint8).reshape(3, 3, 3)
    marked = (img == np.array(red, dtype=np.uint8)).all(axis=2)
    assert np.array_equal(marked, np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]], bool))

    buf = io.BytesIO()
    write_image(field, buf, overlays=[((5 + 5j,), red)])
    assert buf.getvalue()[11:] == bytes(INSIDE_COLOR) * 9  # skipped, untouched


def test_image_bytes_deterministic(systems):
    grid = GridSpec(-1.2, 1.2, -1.2, 1.2, 10, 10, 15)
    field = render_field(systems["dendrite"], grid)
    a, b = io.BytesIO(), io.BytesIO()
    write_image(field, a, overlays=[(((0.5 + 0j),), (255, 0, 0))])
    write_image(field, b, overlays=[(((0.5 + 0j),), (255, 0, 0))])
    assert a.getvalue() == b.getvalue()


def test_field_csv_golden():
    grid = GridSpec(0, 1, 0, 1, 2, 1, 7)
    field = EscapeField(grid, np.array([[0, 3]], dtype=np.int32))
    buf = io.StringIO()
    write_field_csv(field, buf)
    assert buf.getvalue() == (
        "re,im,verdict,step\n"
        "0.25,0.5,inside,7\n"
        "0.75,0.5,escaped,3\n"
    )
