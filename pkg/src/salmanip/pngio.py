"""PNG file I/O. 8-bit RGB and 8-bit grayscale only."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image


def read_rgb(path_or_bytes) -> np.ndarray:
    """Read a PNG as uint8 (H, W, 3); grayscale and RGBA inputs are converted."""
    img = _open(path_or_bytes).convert("RGB")
    return np.asarray(img, dtype=np.uint8)


def read_gray(path_or_bytes) -> np.ndarray:
    """Read a PNG as uint8 (H, W) grayscale."""
    img = _open(path_or_bytes).convert("L")
    return np.asarray(img, dtype=np.uint8)


def read_mask(path_or_bytes) -> np.ndarray:
    """Read a grayscale mask PNG; values >= 128 are inside the region."""
    return read_gray(path_or_bytes) >= 128


def write_rgb(path, img: np.ndarray) -> None:
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected uint8 (H, W, 3)")
    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def write_gray(path, plane: np.ndarray) -> None:
    if plane.dtype != np.uint8 or plane.ndim != 2:
        raise ValueError("expected uint8 (H, W)")
    Image.fromarray(plane, mode="L").save(path, format="PNG")


def saliency_to_gray(s: np.ndarray) -> np.ndarray:
    """Quantize a [0, 1] saliency plane to 8-bit grayscale."""
    return np.clip(np.round(s * 255.0), 0, 255).astype(np.uint8)


def encode_rgb(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    write_rgb(buf, img)
    return buf.getvalue()


def encode_gray(plane: np.ndarray) -> bytes:
    buf = io.BytesIO()
    write_gray(buf, plane)
    return buf.getvalue()


def _open(path_or_bytes) -> Image.Image:
    if isinstance(path_or_bytes, (bytes, bytearray)):
        return Image.open(io.BytesIO(path_or_bytes))
    return Image.open(path_or_bytes)
