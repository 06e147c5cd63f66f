import numpy as np
import pytest

from salmanip.image import rgb_to_lab
from salmanip.pipeline import (Label, ManipulationConfig, Mode, Termination,
                               build_setup, compute_saliency_rgb, region_of_setup,
                               run_manipulation)
from salmanip.saliency import ContrastParams, contrast_psi

from synth_images import center_mask, make_synthetic, textured_image


def small_cfg(**kw):
    kw.setdefault("iters_coarse", 6)
    kw.setdefault("iters_fine", 2)
    kw.setdefault("seed", 0)
    return ManipulationConfig(**kw)


class TestBuildSetup:
    def setup_method(self):
        self.mask = np.zeros((8, 8), dtype=bool)
        self.mask[:4] = True

    def test_enhance(self):
        setup = build_setup(self.mask, Mode.ENHANCE)
        assert (setup[:4] == Label.INCREASE.value).all()
        assert (setup[4:] == Label.DECREASE.value).all()

    def test_attenuate(self):
        setup = build_setup(self.mask, Mode.ATTENUATE)
        assert (setup[:4] == Label.DECREASE.value).all()
        assert (setup[4:] == Label.KEEP.value).all()

    def test_declutter(self):
        setup = build_setup(self.mask, Mode.DECLUTTER)
        assert (setup[:4] == Label.KEEP.value).all()
        assert (setup[4:] == Label.DECREASE.value).all()

    def test_degenerate_masks(self):
        with pytest.raises(ValueError, match="degenerate"):
            build_setup(np.zeros((4, 4), dtype=bool), Mode.ENHANCE)
        with pytest.raises(ValueError, match="degenerate"):
            build_setup(np.ones((4, 4), dtype=bool), Mode.ENHANCE)

    def test_region_of_setup(self):
        setup = build_setup(self.mask, Mode.ENHANCE)
        assert np.array_equal(region_of_setup(setup), self.mask)
        setup_att = build_setup(self.mask, Mode.ATTENUATE)
        assert np.array_equal(region_of_setup(setup_att), self.mask)


class TestPinnedThresholdsIdentity:
    def test_output_equals_input_within_one_step(self):
        img = textured_image(0, size=160)
        mask = center_mask(160)
        cfg = small_cfg(pin_thresholds=True)
        out, report = run_manipulation(img, mask, Mode.ENHANCE, cfg)
        assert report.termination == Termination.THRESHOLD_STALL.value
        assert len(report.trace) == 1
        assert np.abs(out.astype(int) - img.astype(int)).max() <= 1


class TestRunManipulation:
    def test_enhancement_raises_contrast(self):
        img, mask, psi_in = make_synthetic(0, size=192)
        out, report = run_manipulation(img, mask, Mode.ENHANCE,
                                       ManipulationConfig(delta_s=0.6, seed=0))
        psi_out = contrast_psi(compute_saliency_rgb(out), mask, ContrastParams())
        assert psi_out > psi_in
        assert abs(psi_out - 0.6) < abs(psi_in - 0.6)

    def test_deterministic_under_seed(self):
        img, mask, _ = make_synthetic(1, size=160)
        cfg = small_cfg(delta_s=0.6)
        out1, rep1 = run_manipulation(img, mask, Mode.ENHANCE, cfg)
        out2, rep2 = run_manipulation(img, mask, Mode.ENHANCE, cfg)
        assert np.array_equal(out1, out2)
        assert rep1.to_dict(include_timing=False) == rep2.to_dict(include_timing=False)

    def test_trace_monotone_thresholds(self):
        img, mask, _ = make_synthetic(2, size=160)
        _, report = run_manipulation(img, mask, Mode.ENHANCE, small_cfg(delta_s=0.9))
        taus_p = [e.tau_plus for e in report.trace]
        taus_m = [e.tau_minus for e in report.trace]
        assert all(b >= a for a, b in zip(taus_p, taus_p[1:]))
        assert all(b <= a for a, b in zip(taus_m, taus_m[1:]))
        assert all(0.0 <= t <= 1.0 for t in taus_p + taus_m)
        assert report.termination in {t.value for t in Termination}

    def test_converged_at_initialization_returns_input(self):
        img, mask, psi_in = make_synthetic(3, size=160)
        cfg = small_cfg(delta_s=round(psi_in, 3))
        out, report = run_manipulation(img, mask, Mode.ENHANCE, cfg)
        assert np.array_equal(out, img)
        assert report.termination == Termination.CONVERGED.value
        assert len(report.trace) == 1
        assert report.trace[0].iteration == 0

    def test_keep_region_fidelity_attenuate(self):
        img, mask, _ = make_synthetic(4, size=192)
        cfg = ManipulationConfig(delta_s=0.05, iters_coarse=8, iters_fine=2, seed=0)
        out, report = run_manipulation(img, mask, Mode.ATTENUATE, cfg)
        assert report.keep_mad is not None and report.nonkeep_mad is not None
        assert report.keep_mad < report.nonkeep_mad

    def test_on_iteration_callback(self):
        img, mask, _ = make_synthetic(5, size=160)
        seen = []
        run_manipulation(img, mask, Mode.ENHANCE, small_cfg(delta_s=0.9),
                         on_iteration=seen.append)
        assert [e.iteration for e in seen] == list(range(1, len(seen) + 1))

    def test_ternary_setup_path(self):
        img, mask, _ = make_synthetic(6, size=160)
        setup = build_setup(mask, Mode.ENHANCE)
        out_direct, _ = run_manipulation(img, None, None, small_cfg(), setup=setup)
        out_mode, _ = run_manipulation(img, mask, Mode.ENHANCE, small_cfg())
        assert np.array_equal(out_direct, out_mode)

    def test_mask_size_mismatch(self):
        img = textured_image(1, size=160)
        with pytest.raises(ValueError, match="mismatch"):
            run_manipulation(img, np.zeros((10, 10), dtype=bool), Mode.ENHANCE,
                             small_cfg())

    def test_multi_level_schedule(self):
        # 320 px wide -> two pyramid levels
        img = textured_image(2, size=320)
        mask = center_mask(320)
        cfg = small_cfg(iters_coarse=4, iters_fine=2)
        _, report = run_manipulation(img, mask, Mode.ENHANCE, cfg)
        assert report.levels == [(160, 160), (320, 320)]
        assert report.level_iterations == [4, 2]

    def test_report_serialization(self):
        img, mask, _ = make_synthetic(7, size=160)
        _, report = run_manipulation(img, mask, Mode.ENHANCE, small_cfg(delta_s=0.9))
        d = report.to_dict()
        assert "wall_time_s" in d and d["trace"]
        assert "wall_time_s" not in report.to_dict(include_timing=False)
        csv_text = report.trace_csv()
        assert csv_text.startswith("iteration,tau_plus,tau_minus,psi,e_sal")
        assert len(csv_text.strip().splitlines()) == len(report.trace) + 1


class TestConfigValidation:
    def test_delta_s_range(self):
        with pytest.raises(ValueError, match="delta-s"):
            ManipulationConfig(delta_s=1.5)

    def test_iteration_counts(self):
        with pytest.raises(ValueError):
            ManipulationConfig(iters_coarse=0)
