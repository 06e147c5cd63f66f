import numpy as np
import pytest

from salmanip.image import (build_pyramid, gradients, lab_to_rgb, resample_mask,
                            resample_to, rgb_to_lab)


def solid_rgb(r, g, b, h=4, w=4):
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[..., 0], img[..., 1], img[..., 2] = r, g, b
    return img


class TestLabConversion:
    def test_black_maps_to_zero(self):
        lab = rgb_to_lab(solid_rgb(0, 0, 0))
        assert np.allclose(lab, 0.0, atol=1e-9)

    def test_white_point(self):
        lab = rgb_to_lab(solid_rgb(255, 255, 255))
        assert np.allclose(lab[..., 0], 100.0, atol=1e-3)
        assert np.abs(lab[..., 1]).max() < 0.01
        assert np.abs(lab[..., 2]).max() < 0.01

    def test_mid_gray_reference(self):
        # reference value from a high-precision evaluation of the standard
        # sRGB -> XYZ(D65) -> CIELAB formulas, computed independently
        lab = rgb_to_lab(solid_rgb(119, 119, 119))
        assert np.allclose(lab[..., 0], 50.03443879, atol=1e-6)
        assert np.abs(lab[..., 1]).max() < 1e-9
        assert np.abs(lab[..., 2]).max() < 1e-9

    def test_round_trip_within_one_step(self):
        # exhaustive-ish grid over the sRGB cube
        vals = np.arange(0, 256, 15, dtype=np.uint8)  # includes 0 and 255
        r, g, b = np.meshgrid(vals, vals, vals, indexing="ij")
        img = np.stack([r, g, b], axis=-1).reshape(1, -1, 3)
        back = lab_to_rgb(rgb_to_lab(img))
        assert np.abs(back.astype(int) - img.astype(int)).max() <= 1

    def test_round_trip_random(self):
        rng = np.random.default_rng(7)
        img = rng.integers(0, 256, size=(32, 41, 3), dtype=np.uint8)
        back = lab_to_rgb(rgb_to_lab(img))
        assert np.abs(back.astype(int) - img.astype(int)).max() <= 1

    def test_lab_zero_is_black(self):
        assert (lab_to_rgb(np.zeros((2, 2, 3))) == 0).all()

    def test_out_of_range_clamps(self):
        lab = np.zeros((1, 1, 3))
        lab[..., 0] = 200.0
        out = lab_to_rgb(lab)  # no error
        assert out.shape == (1, 1, 3)
        assert (out == 255).all()

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            rgb_to_lab(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            lab_to_rgb(np.full((2, 2, 3), np.nan))


class TestGradients:
    def test_constant_is_zero(self):
        dx, dy = gradients(np.full((5, 7, 3), 3.25))
        assert not dx.any() and not dy.any()

    def test_horizontal_ramp(self):
        img = np.zeros((4, 6, 3))
        img[..., 0] = np.arange(6)[None, :]
        dx, dy = gradients(img)
        assert np.allclose(dx[:, :-1, 0], 1.0)
        assert not dx[:, -1].any()
        assert not dy.any()

    def test_matches_direct_subtraction(self):
        rng = np.random.default_rng(3)
        img = rng.normal(size=(5, 5, 3))
        dx, dy = gradients(img)
        for y in range(5):
            for x in range(5):
                for c in range(3):
                    want_dx = img[y, x + 1, c] - img[y, x, c] if x < 4 else 0.0
                    want_dy = img[y + 1, x, c] - img[y, x, c] if y < 4 else 0.0
                    assert dx[y, x, c] == want_dx
                    assert dy[y, x, c] == want_dy

    def test_linearity(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(6, 6, 3))
        b = rng.normal(size=(6, 6, 3))
        ga = gradients(a)
        gb = gradients(b)
        gc = gradients(2.5 * a - 1.25 * b)
        for mixed, pa, pb in zip(gc, ga, gb):
            assert np.abs(mixed - (2.5 * pa - 1.25 * pb)).max() < 1e-9


class TestResample:
    def test_same_size_identity(self):
        rng = np.random.default_rng(5)
        img = rng.normal(size=(8, 9, 3))
        assert np.array_equal(resample_to(img, 9, 8), img)

    def test_constant_stays_constant(self):
        img = np.full((10, 12, 3), 42.0)
        for w, h in [(5, 4), (24, 20), (7, 11)]:
            out = resample_to(img, w, h)
            assert out.shape == (h, w, 3)
            assert np.allclose(out, 42.0)

    def test_checkerboard_block_mean(self):
        img = np.zeros((4, 4, 3))
        img[::2, 1::2] = 1.0
        img[1::2, ::2] = 1.0
        out = resample_to(img, 2, 2)
        # each output pixel is the mean of its 2x2 block
        assert np.allclose(out, 0.5)

    def test_mask_rethreshold(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[:, :4] = True
        small = resample_mask(mask, 4, 4)
        assert small.shape == (4, 4)
        assert small[:, :2].all() and not small[:, 2:].any()


class TestPyramid:
    def test_level_widths_1200(self):
        img = np.zeros((60, 1200, 3))
        pyr = build_pyramid(img)
        assert [lvl.shape[1] for lvl in pyr.levels] == [150, 300, 600, 1200]

    def test_narrow_image_single_level(self):
        img = np.zeros((20, 160, 3))
        pyr = build_pyramid(img)
        assert len(pyr) == 1
        assert pyr.levels[0].shape[1] == 160

    def test_level_count_formula(self):
        for width in [150, 151, 299, 300, 600, 640, 1200]:
            img = np.zeros((16, width, 3))
            expect = int(np.floor(np.log2(width / 150))) + 1
            assert len(build_pyramid(img)) == expect, width

    def test_constant_preserved_across_levels(self):
        img = np.full((40, 600, 3), 7.5)
        pyr = build_pyramid(img)
        assert len(pyr) == 3
        for lvl in pyr.levels:
            assert np.allclose(lvl, 7.5)

    def test_coarse_to_fine_order(self):
        img = np.zeros((64, 640, 3))
        pyr = build_pyramid(img)
        widths = [lvl.shape[1] for lvl in pyr.levels]
        assert widths == sorted(widths)
        assert widths[-1] == 640
