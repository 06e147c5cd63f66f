"""Search-and-vote synthesis: PatchMatch nearest-neighbor fields from the
working image into a patch database, then overlap-averaged voting.

Translation-only PatchMatch. A source patch is admissible iff its center
pixel is valid in the database and the patch lies fully inside the
image. Target patches are seeded with their own location when that is
admissible (which makes wide-open databases an exact identity), random
admissible patches otherwise, then refined by alternating scan-order
propagation and an exponentially decaying random search. A candidate
only ever replaces the current match when it strictly improves the SSD,
so per-patch distances never increase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit

from .patchdb import PatchDatabase

logger = logging.getLogger(__name__)


@dataclass
class SynthesisConfig:
    patch_size: int = 7
    pm_iterations: int = 5
    random_search_decay: float = 0.5

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd")
        if self.pm_iterations < 1:
            raise ValueError("pm_iterations must be >= 1")
        if not 0.0 < self.random_search_decay < 1.0:
            raise ValueError("random_search_decay must be in (0, 1)")


@dataclass
class NNField:
    """Best source match per target patch center.

    nn_y/nn_x are -1 and dist is +inf where `valid` is False (the center
    is not part of this field). iteration_totals[k] is the summed field
    distance after k PatchMatch iterations (index 0 = after seeding).
    """

    nn_y: np.ndarray
    nn_x: np.ndarray
    dist: np.ndarray
    valid: np.ndarray
    iteration_totals: np.ndarray


def patch_ssd(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of squared differences over all pixels and channels."""
    if a.shape != b.shape:
        raise ValueError("patch shapes differ")
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float((d * d).sum())


@njit(cache=True, inline="always")
def _ssd_bounded(tgt, ty, tx, src, sy, sx, half, best):
    """SSD of the two patches; bails out early once it can no longer win."""
    acc = 0.0
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            for c in range(3):
                d = tgt[ty + dy, tx + dx, c] - src[sy + dy, sx + dx, c]
                acc += d * d
        if acc >= best:
            return acc
    return acc


@njit(cache=True)
def _pm_kernel(target, source, src_ok, tgt_ok, half, n_iters, decay, seed,
               src_ys, src_xs):
    h, w = target.shape[:2]
    sh, sw = source.shape[:2]
    nn_y = np.full((h, w), -1, np.int32)
    nn_x = np.full((h, w), -1, np.int32)
    dist = np.full((h, w), np.inf, np.float64)
    totals = np.zeros(n_iters + 1, np.float64)

    np.random.seed(seed)
    n_src = len(src_ys)
    same_grid = h == sh and w == sw

    for y in range(half, h - half):
        for x in range(half, w - half):
            if not tgt_ok[y, x]:
                continue
            if same_grid and src_ok[y, x]:
                sy, sx = y, x
            else:
                i = np.random.randint(0, n_src)
                sy, sx = src_ys[i], src_xs[i]
            nn_y[y, x] = sy
            nn_x[y, x] = sx
            dist[y, x] = _ssd_bounded(target, y, x, source, sy, sx, half, np.inf)
            totals[0] += dist[y, x]

    max_radius = float(max(sh, sw))
    for it in range(n_iters):
        forward = it % 2 == 0
        step = 1 if forward else -1
        y0, y1 = (half, h - half) if forward else (h - half - 1, half - 1)
        x0, x1 = (half, w - half) if forward else (w - half - 1, half - 1)
        for y in range(y0, y1, step):
            for x in range(x0, x1, step):
                if not tgt_ok[y, x]:
                    continue
                best = dist[y, x]
                by = nn_y[y, x]
                bx = nn_x[y, x]

                # propagate the already-visited horizontal / vertical neighbor
                px = x - step
                if half <= px < w - half and tgt_ok[y, px]:
                    cy = nn_y[y, px]
                    cx = nn_x[y, px] + step
                    if half <= cx < sw - half and src_ok[cy, cx]:
                        d = _ssd_bounded(target, y, x, source, cy, cx, half, best)
                        if d < best:
                            best, by, bx = d, cy, cx
                py = y - step
                if half <= py < h - half and tgt_ok[py, x]:
                    cy = nn_y[py, x] + step
                    cx = nn_x[py, x]
                    if half <= cy < sh - half and src_ok[cy, cx]:
                        d = _ssd_bounded(target, y, x, source, cy, cx, half, best)
                        if d < best:
                            best, by, bx = d, cy, cx

                # random search around the current best, shrinking window
                radius = max_radius
                while radius >= 1.0:
                    r = int(radius)
                    cy = by + np.random.randint(-r, r + 1)
                    cx = bx + np.random.randint(-r, r + 1)
                    radius *= decay
                    if cy < half:
                        cy = half
                    elif cy > sh - half - 1:
                        cy = sh - half - 1
                    if cx < half:
                        cx = half
                    elif cx > sw - half - 1:
                        cx = sw - half - 1
                    if not src_ok[cy, cx]:
                        continue
                    d = _ssd_bounded(target, y, x, source, cy, cx, half, best)
                    if d < best:
                        best, by, bx = d, cy, cx

                dist[y, x] = best
                nn_y[y, x] = by
                nn_x[y, x] = bx

        total = 0.0
        for y in range(half, h - half):
            for x in range(half, w - half):
                if tgt_ok[y, x]:
                    total += dist[y, x]
        totals[it + 1] = total

    return nn_y, nn_x, dist, totals


@njit(cache=True)
def _vote_kernel(source, nn_y, nn_x, tgt_ok, half, acc, cnt):
    h, w = tgt_ok.shape
    for y in range(half, h - half):
        for x in range(half, w - half):
            if not tgt_ok[y, x]:
                continue
            sy = nn_y[y, x]
            sx = nn_x[y, x]
            for dy in range(-half, half + 1):
                for dx in range(-half, half + 1):
                    for c in range(3):
                        acc[y + dy, x + dx, c] += source[sy + dy, sx + dx, c]
                    cnt[y + dy, x + dx] += 1


def admissible_centers(db: PatchDatabase, patch_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Centers whose source patch is fully inside the image and valid."""
    half = patch_size // 2
    ok = np.zeros_like(db.valid, dtype=np.bool_)
    if db.valid.shape[0] > 2 * half and db.valid.shape[1] > 2 * half:
        interior = db.valid[half:db.valid.shape[0] - half, half:db.valid.shape[1] - half]
        ok[half:db.valid.shape[0] - half, half:db.valid.shape[1] - half] = interior
    ys, xs = np.nonzero(ok)
    return ys.astype(np.int64), xs.astype(np.int64)


def nn_search(target: np.ndarray, target_valid: np.ndarray, db: PatchDatabase,
              cfg: SynthesisConfig, seed: int) -> NNField:
    """PatchMatch from the target's patches into the database's admissible
    patches. Deterministic for a fixed seed."""
    half = cfg.patch_size // 2
    h, w = target.shape[:2]
    if target_valid.shape != (h, w):
        raise ValueError("target_valid must match target dimensions")

    src_ys, src_xs = admissible_centers(db, cfg.patch_size)
    if len(src_ys) == 0:
        raise ValueError("empty database")
    src_ok = np.zeros(db.valid.shape, dtype=np.bool_)
    src_ok[src_ys, src_xs] = True

    tgt_ok = np.zeros((h, w), dtype=np.bool_)
    tgt_ok[half:h - half, half:w - half] = target_valid[half:h - half, half:w - half]
    if not tgt_ok.any():
        raise ValueError("no valid target patch")

    nn_y, nn_x, dist, totals = _pm_kernel(
        np.ascontiguousarray(target, dtype=np.float64),
        np.ascontiguousarray(db.source, dtype=np.float64),
        src_ok, tgt_ok, half, cfg.pm_iterations, cfg.random_search_decay,
        np.uint32(seed & 0xFFFFFFFF), src_ys, src_xs)
    return NNField(nn_y=nn_y, nn_x=nn_x, dist=dist, valid=tgt_ok, iteration_totals=totals)


def vote(fields: list[tuple[NNField, PatchDatabase]], keep: np.ndarray,
         original: np.ndarray, cfg: SynthesisConfig) -> np.ndarray:
    """Blend matched source patches into a new image.

    Every covered pixel takes the mean color of all source patches voting
    for it; pixels under the keep mask (and any uncovered pixel, with a
    warning) copy the original color.
    """
    half = cfg.patch_size // 2
    h, w = keep.shape
    keep = keep.astype(bool)
    acc = np.zeros((h, w, 3), dtype=np.float64)
    cnt = np.zeros((h, w), dtype=np.int64)
    for f, db in fields:
        _vote_kernel(np.ascontiguousarray(db.source, dtype=np.float64),
                     f.nn_y, f.nn_x, f.valid, half, acc, cnt)

    covered = cnt > 0
    out = np.where((covered & ~keep)[..., None], acc / np.maximum(cnt, 1)[..., None],
                   original.astype(np.float64))
    uncovered = int((~covered & ~keep).sum())
    if uncovered:
        logger.warning("%d non-keep pixels had no overlapping patch; kept original colors",
                       uncovered)
    return out
