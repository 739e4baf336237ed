import numpy as np
import pytest

from conftest import masked_example
from ctxaug.compose import (
    BackgroundImage,
    BackgroundSetup,
    ForegroundLayer,
    MaskedExample,
    composite,
    enumerate_pairs,
    extract_layers,
    gray_background,
    mean_background,
    uniform_background,
)
from ctxaug.errors import DimensionMismatch, EmptyMask, FullMask, MissingCategory
from ctxaug.imaging import mean_color
from ctxaug.inpaint import InpaintParams


def small_params(seed=0):
    return InpaintParams(patch_size=3, iterations=3, pyramid_levels=1, rng_seed=seed)


class Ref:
    def __init__(self, source_id, label):
        self.source_id = source_id
        self.label = label


class TestExtractAndComposite:
    def test_reconstruction_identity(self, demo_example):
        fg, bg = extract_layers(demo_example, small_params())
        assert np.array_equal(composite(fg, bg.image), demo_example.image)

    def test_background_keeps_original_outside_mask(self, demo_example):
        _, bg = extract_layers(demo_example, small_params())
        keep = demo_example.mask == 0
        assert np.array_equal(bg.image[keep], demo_example.image[keep])

    def test_single_pixel_hole_in_constant_image(self):
        img = np.full((10, 10, 3), 33, dtype=np.uint8)
        mask = np.zeros((10, 10), np.uint8)
        mask[4, 4] = 1
        _, bg = extract_layers(MaskedExample(img, mask, 0, "c"), small_params())
        assert np.array_equal(bg.image, img)

    def test_hole_pixels_differ_but_pass_distance_bound(self, demo_example):
        # The filled region must sit close to real texture: patch distances on
        # the infilled background stay within 1.5x of the exhaustive optimum.
        from ctxaug.inpaint import nnf_init, nnf_iterate
        from ctxaug.inpaint._core import patch_maps
        from test_inpaint import scalar_patch_distance

        params = small_params(3)
        fg, bg = extract_layers(demo_example, params)
        hole = demo_example.mask
        assert (bg.image[hole == 1] != demo_example.image[hole == 1]).any()
        work = bg.image.astype(np.float64)
        _, _, targets, sources = patch_maps(hole, params.patch_size)
        optimum = [min(scalar_patch_distance(work, ty, tx, sy, sx, params.patch_size)
                       for sy, sx in sources) for ty, tx in targets]
        field = nnf_init(bg.image, hole, params)
        for it in range(params.iterations):
            nnf_iterate(field, bg.image, hole, params, it)
        achieved = field.dist[field.targets[:, 0], field.targets[:, 1]]
        assert achieved.mean() <= 1.5 * max(np.mean(optimum), 1e-12)

    def test_empty_and_full_mask_rejected(self, demo_image):
        empty = np.zeros(demo_image.shape[:2], np.uint8)
        with pytest.raises(EmptyMask):
            extract_layers(MaskedExample(demo_image, empty, 0, "e"), small_params())
        full = np.ones(demo_image.shape[:2], np.uint8)
        with pytest.raises(FullMask):
            extract_layers(MaskedExample(demo_image, full, 0, "f"), small_params())

    def test_composite_pixel_partition(self, demo_example, rng):
        fg, _ = extract_layers(demo_example, small_params())
        other = rng.integers(0, 256, demo_example.image.shape).astype(np.uint8)
        out = composite(fg, other)
        on = demo_example.mask == 1
        assert np.array_equal(out[on], demo_example.image[on])
        assert np.array_equal(out[~on], other[~on])

    def test_composite_full_mask_layer_returns_foreground(self, demo_image, rng):
        full = np.ones(demo_image.shape[:2], np.uint8)
        layer = ForegroundLayer(demo_image, full, 0, "x")
        other = rng.integers(0, 256, demo_image.shape).astype(np.uint8)
        assert np.array_equal(composite(layer, other), demo_image)

    def test_composite_dimension_mismatch(self, demo_example):
        fg, _ = extract_layers(demo_example, small_params())
        with pytest.raises(DimensionMismatch):
            composite(fg, np.zeros((8, 8, 3), dtype=np.uint8))


class TestUniformBackgrounds:
    def test_gray_background_rule(self, demo_example):
        fg = ForegroundLayer(demo_example.image, demo_example.mask, 0, "g")
        out = gray_background(fg)
        on = demo_example.mask == 1
        assert np.array_equal(out[on], demo_example.image[on])
        assert (out[~on] == 128).all()

    def test_gray_matches_composite_definition(self, demo_example):
        fg = ForegroundLayer(demo_example.image, demo_example.mask, 0, "g")
        gray = uniform_background(fg.mask.shape, (128, 128, 128))
        assert np.array_equal(gray_background(fg), composite(fg, gray))

    def test_mean_background_blue_sky(self):
        img = np.zeros((10, 10, 3), dtype=np.uint8)
        img[..., 2] = 220  # uniform blue sky
        mask = np.zeros((10, 10), np.uint8)
        mask[3:7, 3:7] = 1
        img[mask == 1] = (90, 90, 90)  # the plane
        fg = ForegroundLayer(img, mask, 0, "plane")
        out = mean_background(fg, img)
        assert (out[mask == 0] == np.array([0, 0, 220], dtype=np.uint8)).all()

    def test_mean_background_rounding(self):
        img = np.zeros((1, 3, 3), dtype=np.uint8)
        img[0, 0] = (0, 0, 0)
        img[0, 1] = (255, 255, 255)
        img[0, 2] = (10, 20, 30)
        mask = np.array([[0, 0, 1]], dtype=np.uint8)
        fg = ForegroundLayer(img, mask, 0, "r")
        out = mean_background(fg, img)
        assert tuple(out[0, 0]) == (128, 128, 128)
        assert tuple(out[0, 2]) == (10, 20, 30)

    def test_mean_matches_definition(self, demo_example):
        fg = ForegroundLayer(demo_example.image, demo_example.mask, 0, "m")
        color = mean_color(demo_example.image, fg.mask, "background")
        expected = composite(fg, uniform_background(fg.mask.shape, color))
        assert np.array_equal(mean_background(fg, demo_example.image), expected)


class TestEnumeratePairs:
    def refs(self, n_per_class, classes, prefix):
        return [Ref(f"{prefix}{c}_{i:03d}", c) for c in range(classes) for i in range(n_per_class)]

    def test_same_category_paper_counts(self):
        fgs = self.refs(50, 10, "f")
        bgs = self.refs(50, 10, "b")
        plan = enumerate_pairs(BackgroundSetup.SAME_CATEGORY_BG_WITH_FG, fgs, bgs)
        assert len(plan) == 25000

    def test_all_categories_paper_counts(self):
        fgs = self.refs(50, 10, "f")
        bgs = self.refs(50, 10, "b")
        plan = enumerate_pairs(BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG, fgs, bgs)
        assert len(plan) == 250000

    def test_same_category_tiny(self):
        fgs = self.refs(1, 10, "f")
        bgs = self.refs(1, 10, "b")
        plan = enumerate_pairs(BackgroundSetup.SAME_CATEGORY_BG_WITH_FG, fgs, bgs)
        entries = list(plan)
        assert len(entries) == 10
        for e in entries:
            assert e.fg_id.split("_")[0][1:] == e.bg_id.split("_")[0][1:]

    def test_same_category_labels_match(self):
        fgs = self.refs(2, 3, "f")
        bgs = self.refs(2, 3, "b")
        plan = enumerate_pairs(BackgroundSetup.SAME_CATEGORY_BG_WITH_FG, fgs, bgs)
        label_of = {r.source_id: r.label for r in fgs + bgs}
        count = 0
        for e in plan:
            assert label_of[e.fg_id] == label_of[e.bg_id] == e.label
            count += 1
        assert count == len(plan) == 12

    def test_all_categories_label_is_foreground_label(self):
        fgs = self.refs(2, 3, "f")
        bgs = self.refs(2, 3, "b")
        plan = enumerate_pairs(BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG, fgs, bgs)
        fg_label = {r.source_id: r.label for r in fgs}
        entries = list(plan)
        assert len(entries) == 36
        assert all(e.label == fg_label[e.fg_id] for e in entries)

    def test_only_bg_labels(self):
        bgs = self.refs(2, 2, "b")
        plan = enumerate_pairs(BackgroundSetup.ONLY_BG, [], bgs)
        entries = list(plan)
        assert [e.bg_id for e in entries] == sorted(r.source_id for r in bgs)
        assert all(e.fg_id is None for e in entries)
        bg_label = {r.source_id: r.label for r in bgs}
        assert all(e.label == bg_label[e.bg_id] for e in entries)

    def test_gray_and_mean_one_entry_per_fg(self):
        fgs = self.refs(3, 2, "f")
        for setup in (BackgroundSetup.GRAY_BG_WITH_FG, BackgroundSetup.MEAN_BG_WITH_FG):
            plan = enumerate_pairs(setup, fgs, [])
            entries = list(plan)
            assert len(entries) == 6
            assert all(e.bg_id is None for e in entries)

    def test_missing_category(self):
        fgs = self.refs(1, 3, "f")
        bgs = self.refs(1, 2, "b")
        with pytest.raises(MissingCategory):
            enumerate_pairs(BackgroundSetup.SAME_CATEGORY_BG_WITH_FG, fgs, bgs)

    def test_ordering_fg_major_bg_minor(self):
        fgs = [Ref("f1", 0), Ref("f0", 0)]
        bgs = [Ref("b1", 0), Ref("b0", 0)]
        plan = enumerate_pairs(BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG, fgs, bgs)
        assert [(e.fg_id, e.bg_id) for e in plan] == [
            ("f0", "b0"), ("f0", "b1"), ("f1", "b0"), ("f1", "b1")]

    def test_reconstruction_identity_over_random_examples(self):
        for seed in range(6):
            ex = masked_example(seed, label=seed % 3)
            fg, bg = extract_layers(ex, small_params(seed))
            assert np.array_equal(composite(fg, bg.image), ex.image)
