"""Raster classification of the filled set over complex-plane grids.

Pixels are sampled at their centers (no anti-aliasing: verdicts are
set-membership claims, and averaging would blur certified escapes).  The
whole grid is iterated in lockstep with numpy, compacting away pixels as
they escape; that makes rendering deterministic and fast without any
threading.  Connected-component analysis of the inside set uses
4-connectivity, a conservative under-approximation of topological
connectivity — raster results are evidence, not proofs.

Escape steps are recorded 1-based; step 0 means the pixel never escaped
within the budget ("inside at budget").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .dynamics import FiberedSystem
from .errors import OriginEscapedError, OutOfRangeError

__all__ = [
    "GridSpec",
    "EscapeField",
    "render_field",
    "component_of_zero",
    "count_components",
    "write_image",
    "write_field_csv",
    "INSIDE_COLOR",
]

# Fixed palette: solid color for inside pixels, a warm-to-dark ramp over
# escape-step/budget ratio for escaped ones.
INSIDE_COLOR = (18, 26, 92)

# 4-connectivity: share an edge, not just a corner.
_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class GridSpec:
    """A complex-plane raster window with an iteration budget.

    Row 0 is the top of the image (largest imaginary part), matching image
    conventions; pixel (row, col) samples the center of its cell.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    width: int
    height: int
    max_iter: int
    radius: float = 1.0 + 1e-9

    def __post_init__(self):
        if not (self.re_min < self.re_max):
            raise OutOfRangeError(f"need re_min < re_max, got [{self.re_min}, {self.re_max}]")
        if not (self.im_min < self.im_max):
            raise OutOfRangeError(f"need im_min < im_max, got [{self.im_min}, {self.im_max}]")
        if self.width < 1 or self.height < 1:
            raise OutOfRangeError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if self.max_iter < 1:
            raise OutOfRangeError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (self.radius > 1.0):
            raise OutOfRangeError(
                f"escape radius must exceed 1 (growth past 1 is the certificate), got {self.radius}"
            )

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / self.width

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / self.height

    def complex_at(self, row: int, col: int) -> complex:
        """Center of pixel (row, col)."""
        x = self.re_min + (col + 0.5) * self.dx
        y = self.im_max - (row + 0.5) * self.dy
        return complex(x, y)

    def pixel_of(self, z: complex) -> tuple[int, int]:
        """(row, col) of the pixel whose cell contains z; raises if outside."""
        z = complex(z)
        col = int(np.floor((z.real - self.re_min) / self.dx))
        row = int(np.floor((self.im_max - z.imag) / self.dy))
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise OutOfRangeError(f"point {z} lies outside the grid window")
        return row, col


@dataclass(frozen=True)
class EscapeField:
    """Escape verdicts for every pixel of a grid.

    steps has shape (height, width), dtype int32: 0 for pixels still bounded
    at the budget, otherwise the 1-based index of the first composition whose
    modulus exceeded the escape radius.
    """

    grid: GridSpec
    steps: np.ndarray

    def __post_init__(self):
        if self.steps.shape != (self.grid.height, self.grid.width):
            raise OutOfRangeError(
                f"steps shape {self.steps.shape} does not match grid "
                f"{self.grid.height}x{self.grid.width}"
            )

    @property
    def inside(self) -> np.ndarray:
        """Boolean mask of pixels bounded through the whole budget."""
        return self.steps == 0

    def inside_fraction(self) -> float:
        return float(self.inside.mean())


def render_field(sys: FiberedSystem, grid: GridSpec) -> EscapeField:
    """Classify every pixel center by iterating the fiber compositions.

    The active pixel set is compacted after every level, so late iterations
    only touch the still-bounded points.
    """
    xs = grid.re_min + (np.arange(grid.width) + 0.5) * grid.dx
    ys = grid.im_max - (np.arange(grid.height) + 0.5) * grid.dy
    z = (xs[None, :] + 1j * ys[:, None]).ravel()

    steps = np.zeros(z.size, dtype=np.int32)
    active = np.arange(z.size)
    w = z
    for j in range(1, grid.max_iter + 1):
        p = sys.p_float(j)
        d = sys.digit_base(j)
        w = ((w - (1.0 - p)) / p) ** d
        escaped = np.abs(w) > grid.radius
        if escaped.any():
            steps[active[escaped]] = j
            keep = ~escaped
            active = active[keep]
            w = w[keep]
            if active.size == 0:
                break
    return EscapeField(grid=grid, steps=steps.reshape(grid.height, grid.width))


def component_of_zero(field: EscapeField) -> np.ndarray:
    """Boolean mask of the 4-connected inside component containing the origin.

    This raster component is the proxy for the candidate point-spectrum
    region (the interior component of the filled set around 0).  Raises
    OriginEscapedError when the pixel holding 0 was classified escaped —
    with a sane budget that can only mean the grid or budget is misconfigured,
    since the orbit of 0 never leaves the closed unit disk.
    """
    row, col = field.grid.pixel_of(0j)
    if not field.inside[row, col]:
        raise OriginEscapedError(
            f"pixel containing the origin escaped at step {int(field.steps[row, col])}"
        )
    labels, _ = ndimage.label(field.inside, structure=_CROSS)
    return labels == labels[row, col]


def count_components(field: EscapeField) -> int:
    """Number of 4-connected components of the inside set."""
    _, n = ndimage.label(field.inside, structure=_CROSS)
    return int(n)


# -- artifact output ---------------------------------------------------------


def _palette(steps: np.ndarray, max_iter: int) -> np.ndarray:
    """RGB image: fixed inside color, escape-ratio ramp elsewhere."""
    h, w = steps.shape
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[..., 0], img[..., 1], img[..., 2] = INSIDE_COLOR
    esc = steps > 0
    if esc.any():
        t = steps[esc].astype(np.float64) / float(max_iter)
        img[esc, 0] = np.clip(255.0 * np.sqrt(t), 0, 255).astype(np.uint8)
        img[esc, 1] = np.clip(60.0 + 160.0 * t, 0, 255).astype(np.uint8)
        img[esc, 2] = np.clip(255.0 * (1.0 - t), 0, 255).astype(np.uint8)
    return img


def write_image(field: EscapeField, fileobj, overlays=None) -> None:
    """Write a binary P6 portable pixmap, with optional 3×3 point markers.

    overlays is an iterable of (points, rgb) layers; each point is drawn as
    a 3×3 square centered at its pixel, clipped at the borders, and points
    outside the window are skipped.  Output is byte-identical for identical
    inputs.
    """
    grid = field.grid
    img = _palette(field.steps, grid.max_iter)
    for points, rgb in overlays or ():
        color = np.asarray(rgb, dtype=np.uint8)
        for z in points:
            try:
                row, col = grid.pixel_of(complex(z))
            except OutOfRangeError:
                continue
            r0, r1 = max(row - 1, 0), min(row + 2, grid.height)
            c0, c1 = max(col - 1, 0), min(col + 2, grid.width)
            img[r0:r1, c0:c1] = color
    fileobj.write(b"P6\n%d %d\n255\n" % (grid.width, grid.height))
    fileobj.write(img.tobytes())


def write_field_csv(field: EscapeField, fileobj) -> None:
    """Dump per-pixel verdicts: re,im,verdict,step (step = budget when inside)."""
    grid = field.grid
    fileobj.write("re,im,verdict,step\n")
    for row in range(grid.height):
        for col in range(grid.width):
            z = grid.complex_at(row, col)
            s = int(field.steps[row, col])
            if s == 0:
                fileobj.write(f"{z.real!r},{z.imag!r},inside,{grid.max_iter}\n")
            else:
                fileobj.write(f"{z.real!r},{z.imag!r},escaped,{s}\n")
