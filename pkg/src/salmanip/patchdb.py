"""Salient / non-salient patch databases and the greedy threshold search.

The two databases are masked copies of the source image: a patch belongs
to the high-saliency database when the saliency at its center is >=
tau_plus, and to the low-saliency database when it is <= tau_minus. The
thresholds start wide open at (0, 1), so initially every patch is in
both databases and re-synthesis is an identity, and are then tightened
by a step proportional to the remaining contrast residual.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .saliency import ContrastParams, contrast_psi

logger = logging.getLogger(__name__)

# smallest admissible database, as a fraction of image pixels
MIN_DB_FRACTION = 0.01
MAX_DB_UPDATE_ITERATIONS = 30


class Polarity(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass
class Thresholds:
    tau_plus: float
    tau_minus: float

    def __post_init__(self):
        self.tau_plus = float(np.clip(self.tau_plus, 0.0, 1.0))
        self.tau_minus = float(np.clip(self.tau_minus, 0.0, 1.0))


@dataclass
class SearchSchedule:
    eta: float = 0.1
    epsilon: float = 0.05
    stall_tol: float = 1e-4

    def __post_init__(self):
        if self.eta <= 0 or self.epsilon <= 0:
            raise ValueError("eta and epsilon must be > 0")


@dataclass
class PatchDatabase:
    source: np.ndarray   # Lab image the patches are drawn from
    valid: np.ndarray    # bool plane: source patch centered here is admissible
    polarity: Polarity


def init_thresholds() -> Thresholds:
    """Open thresholds: every patch starts in both databases."""
    return Thresholds(tau_plus=0.0, tau_minus=1.0)


def build_databases(img: np.ndarray, s_img: np.ndarray,
                    t: Thresholds) -> tuple[PatchDatabase, PatchDatabase]:
    """Build the (plus, minus) databases from the image and its saliency map.

    If a threshold would leave fewer than MIN_DB_FRACTION of the pixels
    valid, it is relaxed to the quantile that achieves that floor (the
    search state in `t` is not modified).
    """
    if s_img.shape != img.shape[:2]:
        raise ValueError("saliency map must match image dimensions")
    n_min = max(1, int(np.ceil(MIN_DB_FRACTION * s_img.size)))
    flat = np.sort(s_img, axis=None)

    tau_plus = t.tau_plus
    if (s_img >= tau_plus).sum() < n_min:
        tau_plus = float(flat[-n_min])
        logger.warning("plus database under %d pixels; relaxing tau_plus %.4f -> %.4f",
                       n_min, t.tau_plus, tau_plus)
    tau_minus = t.tau_minus
    if (s_img <= tau_minus).sum() < n_min:
        tau_minus = float(flat[n_min - 1])
        logger.warning("minus database under %d pixels; relaxing tau_minus %.4f -> %.4f",
                       n_min, t.tau_minus, tau_minus)

    plus = PatchDatabase(source=img, valid=s_img >= tau_plus, polarity=Polarity.PLUS)
    minus = PatchDatabase(source=img, valid=s_img <= tau_minus, polarity=Polarity.MINUS)
    return plus, minus


def update_thresholds(t: Thresholds, s_j: np.ndarray, region: np.ndarray, delta_s: float,
                      sched: SearchSchedule, params: ContrastParams | None = None) -> Thresholds:
    """One greedy step: raise tau_plus by eta * |psi(S_J, R) - dS| and lower
    tau_minus by eta * |psi(S_J, ~R) - dS|, clamped to [0, 1]."""
    params = params or ContrastParams()
    res_plus = abs(contrast_psi(s_j, region, params) - delta_s)
    res_minus = abs(contrast_psi(s_j, ~region.astype(bool), params) - delta_s)
    return Thresholds(tau_plus=t.tau_plus + sched.eta * res_plus,
                      tau_minus=t.tau_minus - sched.eta * res_minus)


def converged(s_j: np.ndarray, region: np.ndarray, delta_s: float, sched: SearchSchedule,
              params: ContrastParams | None = None,
              threshold_deltas: tuple[float, float] | None = None) -> bool:
    """True when the contrast residual is under epsilon, or when the latest
    threshold update moved both thresholds by less than stall_tol."""
    if abs(contrast_psi(s_j, region, params) - delta_s) < sched.epsilon:
        return True
    if threshold_deltas is not None:
        dp, dm = threshold_deltas
        return abs(dp) < sched.stall_tol and abs(dm) < sched.stall_tol
    return False
