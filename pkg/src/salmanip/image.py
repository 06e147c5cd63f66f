"""Pixel containers, color conversion, resampling, pyramids and gradients.

Images are plain numpy arrays: 8-bit sRGB is uint8 of shape (H, W, 3),
the working representation is CIELAB float64 of shape (H, W, 3) with
L in [0, 100] and a, b roughly in [-128, 127]. Masks are bool (H, W).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np
from scipy.ndimage import correlate1d

# sRGB <-> XYZ (D65, 2 degree observer)
_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ2RGB = np.linalg.inv(_RGB2XYZ)
# white point taken from the matrix itself so neutral grays land on a = b = 0
_WHITE_D65 = _RGB2XYZ.sum(axis=1)

# binomial 5-tap pre-blur for 2x decimation
_PYR_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

DEFAULT_COARSE_WIDTH = 150


def _check_rgb(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected uint8 (H, W, 3) sRGB image, got {img.dtype} {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")


def _check_lab(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) Lab image, got shape {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError("Lab image contains NaN/Inf")


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIELAB (D65)."""
    _check_rgb(img)
    c = img.astype(np.float64) / 255.0
    lin = np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)
    xyz = lin @ _RGB2XYZ.T
    t = xyz / _WHITE_D65
    f = np.where(t > (6.0 / 29.0) ** 3, np.cbrt(t), t / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_to_rgb(img: np.ndarray) -> np.ndarray:
    """Convert CIELAB back to 8-bit sRGB; out-of-gamut values clamp."""
    _check_lab(img)
    fy = (img[..., 0] + 16.0) / 116.0
    fx = fy + img[..., 1] / 500.0
    fz = fy - img[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    t = np.where(f > 6.0 / 29.0, f ** 3, 3.0 * (6.0 / 29.0) ** 2 * (f - 4.0 / 29.0))
    lin = (t * _WHITE_D65) @ _XYZ2RGB.T
    lin = np.clip(lin, 0.0, None)
    c = np.where(lin > 0.0031308, 1.055 * lin ** (1.0 / 2.4) - 0.055, 12.92 * lin)
    return (np.clip(c, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward-difference gradients per channel.

    Returns (dx, dy), each shaped like the input, zero at the last
    column / last row respectively.
    """
    _check_lab(img)
    dx = np.zeros_like(img)
    dy = np.zeros_like(img)
    dx[:, :-1] = img[:, 1:] - img[:, :-1]
    dy[:-1, :] = img[1:, :] - img[:-1, :]
    return dx, dy


def resample_to(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resample to (width, height): area-weighted when shrinking, bilinear when growing."""
    if width < 1 or height < 1:
        raise ValueError("target size must be at least 1x1")
    h, w = img.shape[:2]
    if (w, h) == (width, height):
        return img.copy()
    interp = cv2.INTER_AREA if width * height < w * h else cv2.INTER_LINEAR
    out = cv2.resize(img, (width, height), interpolation=interp)
    if img.ndim == 3 and out.ndim == 2:
        out = out[:, :, None]
    return out


def resample_mask(mask: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resample a boolean mask with the image geometry, re-thresholded at 0.5."""
    if mask.shape == (height, width):
        return mask.copy()
    frac = resample_to(mask.astype(np.float64), width, height)
    return frac >= 0.5


@dataclass
class Pyramid:
    """Gaussian pyramid, levels ordered coarsest to finest (finest = original)."""

    levels: list[np.ndarray] = field(default_factory=list)
    scale_gap: float = 0.5
    coarsest_width: int = DEFAULT_COARSE_WIDTH

    def __len__(self) -> int:
        return len(self.levels)


def _blur_for_decimation(img: np.ndarray) -> np.ndarray:
    out = correlate1d(img, _PYR_KERNEL, axis=0, mode="mirror")
    out = correlate1d(out, _PYR_KERNEL, axis=1, mode="mirror")
    return out


def build_pyramid(img: np.ndarray, coarsest_width: int = DEFAULT_COARSE_WIDTH) -> Pyramid:
    """Build a Gaussian pyramid with 0.5 scale gaps.

    Halving stops as soon as the next level would drop below
    `coarsest_width` pixels wide; images already narrower than that give
    a single-level pyramid.
    """
    _check_lab(img)
    levels = [img]
    cur = img
    # floor keeps the level count at floor(log2(w / coarsest_width)) + 1
    while cur.shape[1] // 2 >= coarsest_width:
        w = cur.shape[1] // 2
        h = max(1, cur.shape[0] // 2)
        cur = resample_to(_blur_for_decimation(cur), w, h)
        levels.append(cur)
    return Pyramid(levels=levels[::-1], coarsest_width=coarsest_width)
