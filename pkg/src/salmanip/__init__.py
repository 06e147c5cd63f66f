"""Saliency-driven image manipulation.

Re-synthesizes an image from its own salient / non-salient patch
databases so that a user-marked region becomes more or less visually
salient by a controlled amount.
"""

from .image import (build_pyramid, gradients, lab_to_rgb, resample_mask, resample_to,
                    rgb_to_lab, Pyramid)
from .metrics import evaluate_corpus, pearson_cc, weighted_fbeta, WfbConfig
from .patchdb import (PatchDatabase, Polarity, SearchSchedule, Thresholds,
                      build_databases, converged, init_thresholds, update_thresholds)
from .pipeline import (IterationStats, Label, ManipulationConfig, Mode, RunReport,
                       Termination, build_setup, compute_saliency_rgb, run_manipulation)
from .poisson import PoissonConvergenceError, ScreenedPoissonProblem, solve_screened_poisson
from .saliency import (ContrastParams, SaliencyConfig, compute_saliency, contrast_psi,
                       saliency_energy)
from .synthesis import NNField, SynthesisConfig, nn_search, patch_ssd, vote

__version__ = "0.1.0"

__all__ = [
    "build_pyramid", "gradients", "lab_to_rgb", "resample_mask", "resample_to",
    "rgb_to_lab", "Pyramid",
    "evaluate_corpus", "pearson_cc", "weighted_fbeta", "WfbConfig",
    "PatchDatabase", "Polarity", "SearchSchedule", "Thresholds",
    "build_databases", "converged", "init_thresholds", "update_thresholds",
    "IterationStats", "Label", "ManipulationConfig", "Mode", "RunReport",
    "Termination", "build_setup", "compute_saliency_rgb", "run_manipulation",
    "PoissonConvergenceError", "ScreenedPoissonProblem", "solve_screened_poisson",
    "ContrastParams", "SaliencyConfig", "compute_saliency", "contrast_psi",
    "saliency_energy",
    "NNField", "SynthesisConfig", "nn_search", "patch_ssd", "vote",
    "__version__",
]
