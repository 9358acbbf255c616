"""Image rasters and projective warping.

Samples are stored as float64 in [0, 1], shape (height, width) for
grayscale or (height, width, 3) for RGB. Pixel centers sit at integer
coordinates with (0, 0) the top-left pixel, x right, y down.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatch
from .geometry import Homography


@dataclass(frozen=True, eq=False)
class ImageRaster:
    """Raster with float samples in [0, 1] and a per-pixel validity mask."""

    samples: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 3 and s.shape[2] == 1:
            s = s[:, :, 0]
        if s.ndim not in (2, 3) or (s.ndim == 3 and s.shape[2] != 3):
            raise ValueError(f"unsupported raster shape {s.shape}")
        v = np.asarray(self.valid, dtype=bool)
        if v.shape != s.shape[:2]:
            raise SizeMismatch(f"mask shape {v.shape} != image shape {s.shape[:2]}")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "valid", v)

    @staticmethod
    def from_array(samples: np.ndarray) -> "ImageRaster":
        s = np.asarray(samples, dtype=float)
        shape = s.shape[:2]
        return ImageRaster(s, np.ones(shape, dtype=bool))

    @staticmethod
    def from_uint8(samples: np.ndarray) -> "ImageRaster":
        return ImageRaster.from_array(np.asarray(samples, dtype=float) / 255.0)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.samples.ndim == 2 else self.samples.shape[2]

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.rint(self.samples * 255.0), 0, 255).astype(np.uint8)

    def luma(self) -> np.ndarray:
        """Rec.601 grayscale as float64."""
        if self.samples.ndim == 2:
            return self.samples
        r, g, b = self.samples[..., 0], self.samples[..., 1], self.samples[..., 2]
        return 0.299 * r + 0.587 * g + 0.114 * b


def warp_image(src: ImageRaster, h: Homography,
               out_size: tuple[int, int] | None = None) -> ImageRaster:
    """Warp src by the map h (src frame -> output frame).

    Inverse mapping with bilinear sampling: every output pixel looks up
    h^-1 of its own center. Pixels whose sample point leaves the source
    (or touches an invalid source pixel) are zero and marked invalid.
    The identity map is bit-exact on 8-bit data.
    """
    if out_size is None:
        out_w, out_h = src.width, src.height
    else:
        out_w, out_h = int(out_size[0]), int(out_size[1])
    hinv = np.linalg.inv(h.H)

    xs, ys = np.meshgrid(np.arange(out_w, dtype=float),
                         np.arange(out_h, dtype=float))
    ones = np.ones_like(xs)
    denom = hinv[2, 0] * xs + hinv[2, 1] * ys + hinv[2, 2] * ones
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = (hinv[0, 0] * xs + hinv[0, 1] * ys + hinv[0, 2]) / denom
        sy = (hinv[1, 0] * xs + hinv[1, 1] * ys + hinv[1, 2]) / denom
    finite = np.isfinite(sx) & np.isfinite(sy) & (np.abs(denom) > 1e-12)

    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    inside = finite & (sx >= 0) & (sy >= 0) & (sx <= src.width - 1) & (sy <= src.height - 1)

    # clamp corner indices; weights of out-of-range corners are zero there
    x0i = np.clip(x0, 0, src.width - 1).astype(int)
    y0i = np.clip(y0, 0, src.height - 1).astype(int)
    x1i = np.clip(x0i + 1, 0, src.width - 1)
    y1i = np.clip(y0i + 1, 0, src.height - 1)

    w00 = (1 - fx) * (1 - fy)
    w10 = fx * (1 - fy)
    w01 = (1 - fx) * fy
    w11 = fx * fy

    def gather(img):
        return (w00 * img[y0i, x0i] + w10 * img[y0i, x1i]
                + w01 * img[y1i, x0i] + w11 * img[y1i, x1i])

    if src.samples.ndim == 2:
        out = gather(src.samples)
    else:
        out = np.stack([gather(src.samples[..., c]) for c in range(3)], axis=-1)

    src_valid = src.valid.astype(float)
    valid = inside & (gather(src_valid) >= 1.0 - 1e-12)
    out[~valid] = 0.0
    return ImageRaster(out, valid)


def psnr(a: ImageRaster, b: ImageRaster) -> float:
    """Peak signal-to-noise ratio over the jointly valid region."""
    if (a.width, a.height) != (b.width, b.height):
        raise SizeMismatch("rasters differ in size")
    both = a.valid & b.valid
    if not both.any():
        raise SizeMismatch("no jointly valid pixels")
    da = a.samples[both]
    db = b.samples[both]
    mse = float(np.mean((da - db) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))
