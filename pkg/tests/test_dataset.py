import numpy as np
import pytest

from hdrenc import (
    BlurParams,
    ContractError,
    DisplayModel,
    ExposureAugmentSpec,
    NoiseParams,
    SplitSpec,
    augment_exposures,
    extract_patches,
    get_condition,
    materialize_pairs,
    normalize_exposure,
    split_dataset,
)
from hdrenc.dataset import derive_seed, draw_exposure_coeffs, mean_luminance_nits
from hdrenc.degrade import gaussian_blur
from hdrenc.transfer import decode_image

DISPLAY = DisplayModel(black_level=0.005, peak=4000.0)


def rand_img(seed, shape=(16, 16, 3), lo=0.0, hi=1.0):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.uniform(lo, hi, size=shape).astype(np.float32)


class TestSplit:
    def test_sizes_ten(self):
        ids = [f"i{k}" for k in range(10)]
        train, val, test = split_dataset(ids, SplitSpec(seed=1))
        assert (len(train), len(val), len(test)) == (6, 2, 2)

    def test_sizes_122(self):
        ids = [f"i{k:03d}" for k in range(122)]
        train, val, test = split_dataset(ids, SplitSpec(seed=2))
        assert (len(train), len(val), len(test)) == (73, 24, 25)

    def test_partition_no_overlap(self):
        ids = [f"i{k}" for k in range(37)]
        train, val, test = split_dataset(ids, SplitSpec(seed=3))
        assert sorted(train + val + test) == sorted(ids)

    def test_deterministic(self):
        ids = [f"i{k}" for k in range(20)]
        assert split_dataset(ids, SplitSpec(seed=4)) == split_dataset(ids, SplitSpec(seed=4))
        assert split_dataset(ids, SplitSpec(seed=4)) != split_dataset(ids, SplitSpec(seed=5))

    def test_order_insensitive(self):
        ids = [f"i{k}" for k in range(11)]
        shuffled = list(reversed(ids))
        assert split_dataset(ids, SplitSpec(seed=6)) == split_dataset(shuffled, SplitSpec(seed=6))

    def test_too_few_ids(self):
        with pytest.raises(ContractError):
            split_dataset(["a", "b"], SplitSpec(seed=0))

    def test_bad_fractions(self):
        with pytest.raises(ContractError):
            SplitSpec(train_frac=0.5, val_frac=0.2, test_frac=0.2)


class TestNormalizeExposure:
    def test_scale_by_half(self):
        img = rand_img(7, lo=0.1, hi=0.9)
        current = mean_luminance_nits(img, DISPLAY)
        out = normalize_exposure(img, current / 2.0, DISPLAY)
        np.testing.assert_allclose(out, img * 0.5, rtol=1e-6)

    def test_hits_target_exactly(self):
        img = rand_img(8, lo=0.01, hi=1.0)
        out = normalize_exposure(img, 20.0, DISPLAY)
        assert mean_luminance_nits(out, DISPLAY) == pytest.approx(20.0, rel=1e-6)

    def test_already_at_target_unchanged(self):
        img = rand_img(9, lo=0.1, hi=0.9)
        target = mean_luminance_nits(img, DISPLAY)
        out = normalize_exposure(img, target, DISPLAY)
        np.testing.assert_allclose(out, img, rtol=1e-6)

    def test_all_black_rejected(self):
        with pytest.raises(ContractError):
            normalize_exposure(np.zeros((4, 4, 3), dtype=np.float32), 20.0, DISPLAY)


class TestExposureAugment:
    def test_count_plus_original(self):
        out = augment_exposures(rand_img(10), ExposureAugmentSpec(count=5, seed=1))
        assert len(out) == 6

    def test_coefficients_in_range(self):
        spec = ExposureAugmentSpec(count=200, seed=2)
        coeffs = draw_exposure_coeffs(spec)
        assert np.all(coeffs >= 0.1) and np.all(coeffs <= 0.9)

    def test_copies_are_exact_scalings(self):
        img = rand_img(11)
        spec = ExposureAugmentSpec(count=3, seed=3)
        out = augment_exposures(img, spec)
        coeffs = draw_exposure_coeffs(spec)
        np.testing.assert_array_equal(out[0], img)
        for k, c in enumerate(coeffs):
            np.testing.assert_array_equal(out[k + 1], (img * np.float32(c)).astype(np.float32))

    def test_deterministic(self):
        img = rand_img(12)
        spec = ExposureAugmentSpec(count=4, seed=4)
        a = augment_exposures(img, spec)
        b = augment_exposures(img, spec)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_bad_range(self):
        with pytest.raises(ContractError):
            ExposureAugmentSpec(low=0.0, high=0.9)


class TestMaterializePairs:
    def test_denoise_linear_condition(self):
        clean = rand_img(13)
        cond = get_condition("Linear-L1")
        pair = materialize_pairs("denoise", clean, cond, DISPLAY,
                                 noise=NoiseParams(seed=5), image_id="img0")
        assert pair.condition_label == "Linear-L1"
        assert pair.input.encoding.name == "linear"
        assert pair.input.data.shape == pair.target.data.shape
        np.testing.assert_array_equal(pair.target.data, clean)  # identity encoding
        assert not np.array_equal(pair.input.data, clean)  # noise applied

    def test_superres_dimensions(self):
        clean = rand_img(14, shape=(256, 256, 3))
        cond = get_condition("PU21-L1")
        pair = materialize_pairs("superres4x", clean, cond, DISPLAY)
        assert pair.input.data.shape == (64, 64, 3)
        assert pair.target.data.shape == (256, 256, 3)
        assert pair.input.encoding.name == "pu21"

    def test_deblur_pq_round_trips_to_blurred(self):
        clean = rand_img(15, shape=(32, 32, 3), lo=0.01, hi=1.0)
        cond = get_condition("PQ-L1")
        blur = BlurParams(sigma=2.0)
        pair = materialize_pairs("deblur", clean, cond, DISPLAY, blur=blur)
        blurred = gaussian_blur(clean, blur)
        back = decode_image(pair.input, DISPLAY)
        np.testing.assert_allclose(back, blurred, rtol=1e-4, atol=1e-6)

    def test_superres_requires_divisible_dims(self):
        with pytest.raises(ContractError):
            materialize_pairs("superres4x", rand_img(16, shape=(30, 32, 3)),
                              get_condition("Linear-L1"), DISPLAY)

    def test_unknown_task(self):
        with pytest.raises(ContractError):
            materialize_pairs("sharpen", rand_img(17), get_condition("Linear-L1"), DISPLAY)

    def test_encoded_values_in_range(self):
        clean = rand_img(18, hi=1.5)  # deliberately over-range
        for label in ("Linear-L1", "Mu-L1", "PQ-L1", "PU21-L1"):
            cond = get_condition(label)
            pair = materialize_pairs("denoise", clean, cond, DISPLAY,
                                     noise=NoiseParams(seed=6))
            for buf in (pair.input.data, pair.target.data):
                assert np.all(buf >= 0.0)
                assert np.all(buf <= 1.0)


class TestPatchesAndSeeds:
    def test_patch_shape_and_determinism(self):
        img = rand_img(19, shape=(100, 80, 3))
        a = extract_patches(img, size=32, count=5, seed=7)
        b = extract_patches(img, size=32, count=5, seed=7)
        assert len(a) == 5
        for x, y in zip(a, b):
            assert x.shape == (32, 32, 3)
            np.testing.assert_array_equal(x, y)

    def test_patch_too_large(self):
        with pytest.raises(ContractError):
            extract_patches(rand_img(20, shape=(16, 16, 3)), size=32)

    def test_derive_seed_stable_and_distinct(self):
        assert derive_seed(1, "noise", "img0", 0) == derive_seed(1, "noise", "img0", 0)
        assert derive_seed(1, "noise", "img0", 0) != derive_seed(1, "noise", "img0", 1)
        assert derive_seed(1, "noise", "img0", 0) != derive_seed(2, "noise", "img0", 0)
        assert derive_seed(1, "split") != derive_seed(1, "exposure")
