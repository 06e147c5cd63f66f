"""Evaluation metrics comparing a saliency map against a ground-truth mask.

Two scores: the sample Pearson correlation over all pixels, and a
weighted F-measure for continuous foreground maps in which errors are
dependency-weighted by a Gaussian neighborhood of the nearest foreground
pixel and importance-weighted by distance from the foreground.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve, distance_transform_edt

from . import pngio

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


@dataclass
class WfbConfig:
    sigma: float = 5.0          # dependency kernel width
    kernel_support: int = 7     # dependency kernel size (odd)
    decay: float = math.log(0.5) / 5.0  # importance falloff per pixel of distance
    beta_sq: float = 1.0


def pearson_cc(predicted: np.ndarray, ground_truth: np.ndarray) -> float:
    """Sample Pearson correlation over all pixels, in [-1, 1]."""
    if predicted.shape != ground_truth.shape:
        raise ValueError("prediction and ground truth dimensions differ")
    p = predicted.astype(np.float64).ravel()
    g = ground_truth.astype(np.float64).ravel()
    pd = p - p.mean()
    gd = g - g.mean()
    denom = math.sqrt(float((pd * pd).sum()) * float((gd * gd).sum()))
    if denom == 0.0:
        raise ValueError("undefined correlation for constant input")
    return float((pd * gd).sum() / denom)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    r = size // 2
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    k = np.exp(-(xx ** 2 + yy ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def weighted_fbeta(predicted: np.ndarray, ground_truth: np.ndarray,
                   cfg: WfbConfig | None = None) -> float:
    """Weighted F-beta between a [0, 1] map and a binary mask, in [0, 1]."""
    cfg = cfg or WfbConfig()
    gt = ground_truth.astype(bool)
    if predicted.shape != gt.shape:
        raise ValueError("prediction and ground truth dimensions differ")
    if not gt.any():
        raise ValueError("empty foreground")
    fg = predicted.astype(np.float64)

    err = np.abs(fg - gt.astype(np.float64))

    # background errors borrow the error of the nearest foreground pixel
    dist, (iy, ix) = distance_transform_edt(~gt, return_indices=True)
    err_t = err.copy()
    err_t[~gt] = err[iy[~gt], ix[~gt]]

    smoothed = convolve(err_t, _gaussian_kernel(cfg.kernel_support, cfg.sigma),
                        mode="constant", cval=0.0)
    # foreground counts its own error unless the neighborhood says better
    min_err = err.copy()
    take = gt & (smoothed < err)
    min_err[take] = smoothed[take]

    importance = np.ones_like(fg)
    importance[~gt] = 2.0 - np.exp(cfg.decay * dist[~gt])
    weighted_err = min_err * importance

    n_fg = float(gt.sum())
    tp_w = n_fg - float(weighted_err[gt].sum())
    fp_w = float(weighted_err[~gt].sum())
    recall = 1.0 - float(weighted_err[gt].mean())
    precision = tp_w / (tp_w + fp_w + _EPS)
    if precision + recall <= 0.0:
        return 0.0
    q = ((1.0 + cfg.beta_sq) * precision * recall
         / (cfg.beta_sq * precision + recall + _EPS))
    return float(np.clip(q, 0.0, 1.0))


METRICS = {
    "cc": pearson_cc,
    "wfb": weighted_fbeta,
}


def evaluate_corpus(pred_dir, gt_dir, metric: str) -> list[tuple[str, float]]:
    """Score every prediction PNG against the same-named ground-truth PNG.

    Returns (image_id, score) pairs sorted by id; unmatched files on
    either side are reported and skipped.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric: {metric}")
    score = METRICS[metric]
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    preds = {p.stem: p for p in sorted(pred_dir.glob("*.png"))}
    gts = {p.stem: p for p in sorted(gt_dir.glob("*.png"))}
    for stem in sorted(set(preds) ^ set(gts)):
        side = "ground truth" if stem in preds else "prediction"
        logger.warning("no matching %s for '%s'; skipped", side, stem)

    rows = []
    for stem in sorted(set(preds) & set(gts)):
        pred = pngio.read_gray(preds[stem]).astype(np.float64) / 255.0
        gt = pngio.read_mask(gts[stem])
        rows.append((stem, float(score(pred, gt))))
    return rows


def write_report(rows: list[tuple[str, float]], metric: str, path) -> None:
    """CSV report with one row per image plus a mean row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "metric", "score"])
        for image_id, value in rows:
            writer.writerow([image_id, metric, f"{value:.6f}"])
        if rows:
            mean = sum(v for _, v in rows) / len(rows)
            writer.writerow(["mean", metric, f"{mean:.6f}"])
