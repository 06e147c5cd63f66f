"""Per-pixel saliency estimation and the region contrast function.

The default estimator scores how distinct each small Lab patch is from
the image's mean patch, measured as the L1 norm of its coordinates in
the patch set's principal-component basis. Scores are min-max
normalized to [0, 1]. No center prior is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_CONST_EPS = 1e-12


@dataclass
class SaliencyConfig:
    patch_size: int = 5
    use_center_prior: bool = False
    variance_keep: float = 0.97  # fraction of variance retained in the PCA basis

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if self.use_center_prior:
            raise ValueError("center prior is intentionally unsupported")


@dataclass
class ContrastParams:
    beta_top: float = 0.20

    def __post_init__(self):
        if not 0.0 < self.beta_top <= 1.0:
            raise ValueError("beta_top must be in (0, 1]")


def _patch_matrix(img: np.ndarray, p: int) -> tuple[np.ndarray, int, int]:
    """All overlapping p x p patches as rows of a (n, p*p*3) matrix."""
    win = np.lib.stride_tricks.sliding_window_view(img, (p, p), axis=(0, 1))
    # win: (H-p+1, W-p+1, 3, p, p) -> rows ordered by patch center, row-major
    n_y, n_x = win.shape[:2]
    return win.reshape(n_y * n_x, 3 * p * p), n_y, n_x


def compute_saliency(img: np.ndarray, cfg: SaliencyConfig | None = None) -> np.ndarray:
    """Patch-distinctness saliency map in [0, 1], same grid as the image."""
    cfg = cfg or SaliencyConfig()
    p = cfg.patch_size
    h, w = img.shape[:2]
    if h < p or w < p:
        raise ValueError("image too small for saliency patch")

    patches, n_y, n_x = _patch_matrix(np.ascontiguousarray(img, dtype=np.float64), p)
    centered = patches - patches.mean(axis=0)

    cov = (centered.T @ centered) / max(len(centered) - 1, 1)
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval)[::-1]
    eigval = np.clip(eigval[order], 0.0, None)
    eigvec = eigvec[:, order]

    total = eigval.sum()
    if total <= _CONST_EPS:
        return np.zeros((h, w))
    k = int(np.searchsorted(np.cumsum(eigval) / total, cfg.variance_keep) + 1)
    k = min(k, eigvec.shape[1])

    distinct = np.abs(centered @ eigvec[:, :k]).sum(axis=1).reshape(n_y, n_x)

    half = p // 2
    full = np.empty((h, w))
    full[half:half + n_y, half:half + n_x] = distinct
    # border pixels inherit the nearest interior patch score
    full[:half, half:half + n_x] = distinct[0]
    full[half + n_y:, half:half + n_x] = distinct[-1]
    full[:, :half] = full[:, half:half + 1]
    full[:, half + n_x:] = full[:, half + n_x - 1:half + n_x]

    lo, hi = full.min(), full.max()
    if hi - lo < _CONST_EPS:
        return np.zeros((h, w))
    return (full - lo) / (hi - lo)


def _top_mean(values: np.ndarray, beta_top: float) -> float:
    k = math.ceil(beta_top * values.size)
    if k >= values.size:
        return float(values.mean())
    top = np.partition(values, values.size - k)[values.size - k:]
    return float(top.mean())


def contrast_psi(s: np.ndarray, region: np.ndarray, params: ContrastParams | None = None) -> float:
    """Mean of the top beta_top saliency values inside the region minus the
    same statistic outside it. Result in [-1, 1]."""
    params = params or ContrastParams()
    if region.shape != s.shape:
        raise ValueError("region mask must match saliency map dimensions")
    region = region.astype(bool)
    n_in = int(region.sum())
    if n_in == 0 or n_in == region.size:
        raise ValueError("degenerate region")
    return _top_mean(s[region], params.beta_top) - _top_mean(s[~region], params.beta_top)


def saliency_energy(s: np.ndarray, region: np.ndarray, delta_s: float,
                    params: ContrastParams | None = None) -> float:
    """|psi(s, region) - delta_s|; zero exactly at the requested contrast."""
    return abs(contrast_psi(s, region, params) - delta_s)
