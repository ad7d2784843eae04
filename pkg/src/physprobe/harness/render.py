"""PNG rendering for visual episodes and the CLI render command."""

import io

import numpy as np
from PIL import Image, ImageDraw

from ..errors import ConfigurationError

# fixed object palette so the same body keeps its color across frames
PALETTE = [
    (214, 39, 40),
    (31, 119, 180),
    (44, 160, 44),
    (255, 127, 14),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
]

BORDER = (40, 40, 40)
BACKGROUND = (255, 255, 255)


def render_classical(positions, radii, box_lo, box_hi, image_size: int = 512) -> bytes:
    """Draw the bodies as filled disks inside the box; returns PNG bytes."""
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise ConfigurationError("rendering supports 2-dimensional scenes only")
    radii = np.asarray(radii, dtype=np.float64)
    lo = np.broadcast_to(np.asarray(box_lo, dtype=np.float64), (2,))
    hi = np.broadcast_to(np.asarray(box_hi, dtype=np.float64), (2,))
    span = hi - lo
    scale = (image_size - 1) / span

    image = Image.new("RGB", (image_size, image_size), BACKGROUND)
    draw = ImageDraw.Draw(image)
    draw.rectangle([0, 0, image_size - 1, image_size - 1], outline=BORDER, width=2)

    def to_pixel(point):
        px = (point[0] - lo[0]) * scale[0]
        py = (hi[1] - point[1]) * scale[1]  # image y grows downward
        return px, py

    for index, (pos, radius) in enumerate(zip(positions, radii)):
        px, py = to_pixel(pos)
        # pixel radius: world radius scaled by image_size / box extent, rounded
        rx = round(radius * image_size / span[0])
        ry = round(radius * image_size / span[1])
        color = PALETTE[index % len(PALETTE)]
        draw.ellipse(
            [px - rx, py - ry, px + rx, py + ry],
            fill=color,
            outline=BORDER,
        )

    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def _diverging_rgb(values: np.ndarray) -> np.ndarray:
    """Map values in [-1, 1] to a blue-white-red ramp, shape (..., 3) uint8."""
    v = np.clip(values, -1.0, 1.0)
    r = np.where(v >= 0, 255, (1 + v) * 255)
    b = np.where(v <= 0, 255, (1 - v) * 255)
    g = (1 - np.abs(v)) * 255
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


def render_fluid(vorticity, image_size: int = 512) -> bytes:
    """Vorticity heatmap (blue negative, red positive); returns PNG bytes."""
    w = np.asarray(vorticity, dtype=np.float64)
    if w.ndim != 2:
        raise ConfigurationError("expected a 2D vorticity field")
    peak = np.max(np.abs(w))
    if peak == 0:
        peak = 1.0
    rgb = _diverging_rgb(w / peak)
    # transpose so x runs left-right and y bottom-up
    rgb = rgb.transpose(1, 0, 2)[::-1]
    image = Image.fromarray(rgb, mode="RGB")
    image = image.resize((image_size, image_size), Image.NEAREST)
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def render_quantum(marginal, image_size: int = 512) -> bytes:
    """Single-particle position density as a white-to-violet ramp."""
    density = np.asarray(marginal, dtype=np.float64)
    if density.ndim != 2:
        raise ConfigurationError("expected a 2D marginal density")
    peak = density.max()
    if peak == 0:
        peak = 1.0
    v = density / peak
    r = (255 - 113 * v).astype(np.uint8)
    g = (255 - 225 * v).astype(np.uint8)
    b = (255 - 66 * v).astype(np.uint8)
    rgb = np.stack([r, g, b], axis=-1).transpose(1, 0, 2)[::-1]
    image = Image.fromarray(rgb, mode="RGB")
    image = image.resize((image_size, image_size), Image.NEAREST)
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()
