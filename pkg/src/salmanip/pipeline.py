"""End-to-end saliency manipulation.

Coarse-to-fine schedule: at the coarsest pyramid level the image update
(search-and-vote plus screened Poisson) alternates with the greedy
threshold search until the requested contrast is reached or the
thresholds stall; finer levels then re-run image updates only, with the
databases rebuilt from the rescaled input at the frozen thresholds.
"""

from __future__ import annotations

import enum
import json
import logging
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .image import (build_pyramid, gradients, lab_to_rgb, resample_mask, resample_to,
                    rgb_to_lab, DEFAULT_COARSE_WIDTH)
from .patchdb import (MAX_DB_UPDATE_ITERATIONS, SearchSchedule, build_databases,
                      init_thresholds, update_thresholds)
from .poisson import ScreenedPoissonProblem, solve_screened_poisson
from .saliency import ContrastParams, SaliencyConfig, compute_saliency, contrast_psi
from .synthesis import SynthesisConfig, nn_search, vote

logger = logging.getLogger(__name__)


class Label(enum.IntEnum):
    KEEP = 0
    INCREASE = 1
    DECREASE = 2


class Mode(enum.Enum):
    ENHANCE = "enhance"
    ATTENUATE = "attenuate"
    DECLUTTER = "declutter"


class Termination(enum.Enum):
    CONVERGED = "converged"
    THRESHOLD_STALL = "threshold_stall"
    ITERATION_CAP = "iteration_cap"


@dataclass
class ManipulationConfig:
    delta_s: float = 0.6
    lam: float = 5.0
    eta: float = 0.1
    epsilon: float = 0.05
    beta_top: float = 0.2
    synth: SynthesisConfig = field(default_factory=SynthesisConfig)
    sal: SaliencyConfig = field(default_factory=SaliencyConfig)
    coarse_width: int = DEFAULT_COARSE_WIDTH
    iters_coarse: int = 20
    iters_fine: int = 5
    seed: int = 0
    pin_thresholds: bool = False  # debug: freeze thresholds at their open start values
    poisson_tol: float = 1e-8
    stall_tol: float = 1e-4

    def __post_init__(self):
        if not 0.0 <= self.delta_s <= 1.0:
            raise ValueError("delta-s must be in [0,1]")
        if self.iters_coarse < 1 or self.iters_fine < 1:
            raise ValueError("iteration counts must be >= 1")

    def schedule(self) -> SearchSchedule:
        return SearchSchedule(eta=self.eta, epsilon=self.epsilon, stall_tol=self.stall_tol)

    def contrast(self) -> ContrastParams:
        return ContrastParams(beta_top=self.beta_top)


@dataclass
class IterationStats:
    iteration: int
    tau_plus: float
    tau_minus: float
    psi: float
    e_sal: float


@dataclass
class RunReport:
    trace: list[IterationStats]
    termination: str
    final_psi: float
    wall_time_s: float
    levels: list[tuple[int, int]]          # (width, height) coarse to fine
    level_iterations: list[int]
    keep_mad: float | None = None          # mean |Lab deviation| on Keep pixels
    nonkeep_mad: float | None = None

    def to_dict(self, include_timing: bool = True) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("wall_time_s")
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2)

    def trace_csv(self) -> str:
        lines = ["iteration,tau_plus,tau_minus,psi,e_sal"]
        for e in self.trace:
            lines.append(f"{e.iteration},{e.tau_plus:.6f},{e.tau_minus:.6f},"
                         f"{e.psi:.6f},{e.e_sal:.6f}")
        return "\n".join(lines) + "\n"


def build_setup(mask: np.ndarray, mode: Mode) -> np.ndarray:
    """Ternary label plane realizing the three mask setups."""
    mask = mask.astype(bool)
    n = int(mask.sum())
    if n == 0 or n == mask.size:
        raise ValueError("degenerate region")
    setup = np.full(mask.shape, Label.KEEP.value, dtype=np.uint8)
    if mode == Mode.ENHANCE:
        setup[mask] = Label.INCREASE.value
        setup[~mask] = Label.DECREASE.value
    elif mode == Mode.ATTENUATE:
        setup[mask] = Label.DECREASE.value
    elif mode == Mode.DECLUTTER:
        setup[~mask] = Label.DECREASE.value
    else:
        raise ValueError(f"unknown mode: {mode}")
    return setup


def region_of_setup(setup: np.ndarray) -> np.ndarray:
    """Contrast region for a raw ternary setup: the Increase pixels when any
    exist, otherwise the Decrease pixels."""
    inc = setup == Label.INCREASE.value
    if inc.any():
        return inc
    dec = setup == Label.DECREASE.value
    if not dec.any():
        raise ValueError("setup mask has no Increase or Decrease pixels")
    return dec


def _resample_setup(setup: np.ndarray, width: int, height: int) -> np.ndarray:
    if setup.shape == (height, width):
        return setup.copy()
    planes = [resample_to((setup == lab.value).astype(np.float64), width, height)
              for lab in (Label.INCREASE, Label.DECREASE, Label.KEEP)]
    choice = np.argmax(np.stack(planes, axis=0), axis=0)
    out = np.full((height, width), Label.KEEP.value, dtype=np.uint8)
    out[choice == 0] = Label.INCREASE.value
    out[choice == 1] = Label.DECREASE.value
    return out


def _seed_for(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=base_seed, spawn_key=(index,))
               .generate_state(1)[0])


def _has_targets(mask: np.ndarray, patch_size: int) -> bool:
    half = patch_size // 2
    if mask.shape[0] <= 2 * half or mask.shape[1] <= 2 * half:
        return False
    return bool(mask[half:mask.shape[0] - half, half:mask.shape[1] - half].any())


def _image_update(j: np.ndarray, i_scaled: np.ndarray, setup: np.ndarray, dbs,
                  grads_i, cfg: ManipulationConfig, seeds: list[int]) -> np.ndarray:
    """One minimization pass over J: NN search per polarity, vote, Poisson."""
    plus_db, minus_db = dbs
    fields = []
    inc = setup == Label.INCREASE.value
    dec = setup == Label.DECREASE.value
    if _has_targets(inc, cfg.synth.patch_size):
        fields.append((nn_search(j, inc, plus_db, cfg.synth, seeds[0]), plus_db))
    if _has_targets(dec, cfg.synth.patch_size):
        fields.append((nn_search(j, dec, minus_db, cfg.synth, seeds[1]), minus_db))
    v = vote(fields, setup == Label.KEEP.value, i_scaled, cfg.synth)
    problem = ScreenedPoissonProblem(data_term=v, gradient_target=grads_i, lam=cfg.lam)
    return solve_screened_poisson(problem, cfg.poisson_tol)


def _level_iterations(n_levels: int, cfg: ManipulationConfig) -> list[int]:
    if n_levels == 1:
        return [min(cfg.iters_coarse, MAX_DB_UPDATE_ITERATIONS)]
    span = n_levels - 1
    counts = [round(cfg.iters_coarse + (cfg.iters_fine - cfg.iters_coarse) * l / span)
              for l in range(n_levels)]
    counts[0] = min(counts[0], MAX_DB_UPDATE_ITERATIONS)
    return counts


def run_manipulation(img: np.ndarray, mask: np.ndarray | None, mode: Mode | None,
                     cfg: ManipulationConfig | None = None,
                     setup: np.ndarray | None = None,
                     on_iteration=None) -> tuple[np.ndarray, RunReport]:
    """Manipulate the image so the masked region's saliency contrast moves
    toward cfg.delta_s. Returns the sRGB result and a run report.

    Either give a binary region mask plus a mode, or a full ternary setup
    plane (advanced multi-region path).
    """
    cfg = cfg or ManipulationConfig()
    started = time.perf_counter()

    lab = rgb_to_lab(img)
    h, w = lab.shape[:2]
    if setup is not None:
        if setup.shape != (h, w):
            raise ValueError("setup mask size mismatch")
        region_full = region_of_setup(setup)
        setup_full = setup.astype(np.uint8)
    else:
        if mask is None or mode is None:
            raise ValueError("either a setup plane or mask + mode is required")
        if mask.shape != (h, w):
            raise ValueError("mask size mismatch")
        setup_full = build_setup(mask, mode)
        region_full = mask.astype(bool)

    params = cfg.contrast()
    sched = cfg.schedule()
    pyramid = build_pyramid(lab, cfg.coarse_width)
    levels = pyramid.levels
    n_levels = len(levels)
    level_iters = _level_iterations(n_levels, cfg)
    level_shapes = [(lvl.shape[1], lvl.shape[0]) for lvl in levels]

    regions, setups = [], []
    for lvl in levels:
        lw, lh = lvl.shape[1], lvl.shape[0]
        r = resample_mask(region_full, lw, lh)
        if setup is None:
            n = int(r.sum())
            if n == 0 or n == r.size:
                raise ValueError("degenerate region")
            regions.append(r)
            setups.append(build_setup(r, mode))
        else:
            s = _resample_setup(setup_full, lw, lh)
            regions.append(region_of_setup(s))
            setups.append(s)

    i0 = levels[0]
    s_i0 = compute_saliency(i0, cfg.sal)
    psi_init = contrast_psi(s_i0, regions[0], params)

    if abs(psi_init - cfg.delta_s) < cfg.epsilon:
        trace = [IterationStats(0, 0.0, 1.0, psi_init, abs(psi_init - cfg.delta_s))]
        report = RunReport(trace=trace, termination=Termination.CONVERGED.value,
                           final_psi=psi_init,
                           wall_time_s=time.perf_counter() - started,
                           levels=level_shapes, level_iterations=level_iters,
                           keep_mad=0.0 if (setup_full == Label.KEEP.value).any() else None,
                           nonkeep_mad=0.0)
        return img.copy(), report

    t = init_thresholds()
    j = i0.copy()
    grads_i0 = gradients(i0)
    trace: list[IterationStats] = []
    termination = Termination.ITERATION_CAP
    seed_idx = 0

    for it in range(1, level_iters[0] + 1):
        dbs = build_databases(i0, s_i0, t)
        j = _image_update(j, i0, setups[0], dbs, grads_i0, cfg,
                          [_seed_for(cfg.seed, seed_idx), _seed_for(cfg.seed, seed_idx + 1)])
        seed_idx += 2
        s_j = compute_saliency(j, cfg.sal)
        psi = contrast_psi(s_j, regions[0], params)
        e_sal = abs(psi - cfg.delta_s)
        entry = IterationStats(it, t.tau_plus, t.tau_minus, psi, e_sal)
        trace.append(entry)
        if on_iteration is not None:
            on_iteration(entry)
        if e_sal < sched.epsilon:
            termination = Termination.CONVERGED
            break
        if cfg.pin_thresholds:
            deltas = (0.0, 0.0)
        else:
            t_next = update_thresholds(t, s_j, regions[0], cfg.delta_s, sched, params)
            deltas = (t_next.tau_plus - t.tau_plus, t_next.tau_minus - t.tau_minus)
            t = t_next
        if abs(deltas[0]) < sched.stall_tol and abs(deltas[1]) < sched.stall_tol:
            termination = Termination.THRESHOLD_STALL
            break

    final_psi = trace[-1].psi

    # fine-scale refinement: thresholds frozen, image updates only
    for lvl in range(1, n_levels):
        i_l = levels[lvl]
        lh, lw = i_l.shape[:2]
        j = resample_to(j, lw, lh)
        s_il = compute_saliency(i_l, cfg.sal)
        dbs = build_databases(i_l, s_il, t)
        grads_il = gradients(i_l)
        for _ in range(level_iters[lvl]):
            j = _image_update(j, i_l, setups[lvl], dbs, grads_il, cfg,
                              [_seed_for(cfg.seed, seed_idx), _seed_for(cfg.seed, seed_idx + 1)])
            seed_idx += 2

    out = lab_to_rgb(j)
    keep = setup_full == Label.KEEP.value
    dev = np.abs(j - levels[-1]).mean(axis=2)
    keep_mad = float(dev[keep].mean()) if keep.any() else None
    nonkeep_mad = float(dev[~keep].mean()) if (~keep).any() else None

    report = RunReport(trace=trace, termination=termination.value, final_psi=final_psi,
                       wall_time_s=time.perf_counter() - started, levels=level_shapes,
                       level_iterations=level_iters, keep_mad=keep_mad,
                       nonkeep_mad=nonkeep_mad)
    return out, report


def compute_saliency_rgb(img: np.ndarray, cfg: SaliencyConfig | None = None) -> np.ndarray:
    """Saliency map of an sRGB image (converts to Lab first)."""
    return compute_saliency(rgb_to_lab(img), cfg)
