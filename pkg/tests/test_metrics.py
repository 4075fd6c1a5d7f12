import math

import numpy as np
import pytest

from hdrenc import ContractError, DisplayModel, pu_psnr, pu_ssim

DISPLAY = DisplayModel(black_level=0.005, peak=4000.0)


# ---------------------------------------------------------------------------
# Independent oracle: direct-formula evaluation with explicit loops, no reuse
# of the library's encoding or windowing code.
# ---------------------------------------------------------------------------

def oracle_pu21_encode(img, display):
    a, b = 0.001908, 0.0078
    lmin = math.log2(0.005)
    out = np.empty_like(img, dtype=np.float64)
    flat_in = img.reshape(-1)
    flat_out = out.reshape(-1)
    for i, v in enumerate(flat_in):
        lum = min(max(float(v) * display.peak, display.black_level), display.peak)
        x = math.log2(lum) - lmin
        flat_out[i] = a * x * x + b * x
    return out


def oracle_pu_psnr(test, ref, display):
    et = oracle_pu21_encode(np.asarray(test, dtype=np.float64), display)
    er = oracle_pu21_encode(np.asarray(ref, dtype=np.float64), display)
    # the library stores encoded buffers as float32; mirror that quantization
    et = et.astype(np.float32).astype(np.float64)
    er = er.astype(np.float32).astype(np.float64)
    mse = float(np.mean((et - er) ** 2))
    if mse == 0.0:
        return 120.0
    return min(10.0 * math.log10(1.0 / mse), 120.0)


def oracle_pu_ssim(test, ref, display):
    et = oracle_pu21_encode(np.asarray(test, dtype=np.float64), display)
    er = oracle_pu21_encode(np.asarray(ref, dtype=np.float64), display)
    et = et.astype(np.float32).astype(np.float64)
    er = er.astype(np.float32).astype(np.float64)
    la = 0.2126 * et[..., 0] + 0.7152 * et[..., 1] + 0.0722 * et[..., 2]
    lb = 0.2126 * er[..., 0] + 0.7152 * er[..., 1] + 0.0722 * er[..., 2]
    h, w = la.shape
    win = min(11, h, w)
    if win % 2 == 0:
        win -= 1
    r = win // 2
    xs = np.arange(-r, r + 1, dtype=np.float64)
    g1 = np.exp(-xs * xs / (2 * 1.5 * 1.5))
    g1 /= g1.sum()
    weights = np.outer(g1, g1)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    values = []
    for i in range(r, h - r):
        for j in range(r, w - r):
            pa = la[i - r:i + r + 1, j - r:j + r + 1]
            pb = lb[i - r:i + r + 1, j - r:j + r + 1]
            mu_a = float((weights * pa).sum())
            mu_b = float((weights * pb).sum())
            var_a = float((weights * pa * pa).sum()) - mu_a * mu_a
            var_b = float((weights * pb * pb).sum()) - mu_b * mu_b
            cov = float((weights * pa * pb).sum()) - mu_a * mu_b
            values.append(
                ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(values))


def rand_pair(seed, shape=(8, 8, 3)):
    rng = np.random.Generator(np.random.Philox(key=seed))
    a = rng.uniform(0.0, 1.0, size=shape).astype(np.float32)
    b = np.clip(a + rng.normal(0, 0.1, size=shape), 0, 1).astype(np.float32)
    return a, b


class TestAgainstOracle:
    def test_psnr_matches_on_random_pairs(self):
        for seed in range(20):
            test, ref = rand_pair(100 + seed)
            want = oracle_pu_psnr(test, ref, DISPLAY)
            assert pu_psnr(test, ref, DISPLAY) == pytest.approx(want, abs=1e-6)

    def test_ssim_matches_on_random_pairs(self):
        for seed in range(20):
            test, ref = rand_pair(200 + seed)
            want = oracle_pu_ssim(test, ref, DISPLAY)
            assert pu_ssim(test, ref, DISPLAY) == pytest.approx(want, abs=1e-6)

    def test_ssim_matches_on_full_window_images(self):
        for seed in range(5):
            test, ref = rand_pair(300 + seed, shape=(16, 13, 3))
            want = oracle_pu_ssim(test, ref, DISPLAY)
            assert pu_ssim(test, ref, DISPLAY) == pytest.approx(want, abs=1e-6)


class TestPuPsnr:
    def test_identical_images_hit_cap(self):
        img, _ = rand_pair(1)
        assert pu_psnr(img, img, DISPLAY) == 120.0

    def test_known_uniform_difference(self):
        # an encoded-value gap of exactly 0.1 everywhere gives 20 dB
        from hdrenc import decode_pu21, encode_pu21

        ref = np.full((4, 4, 3), 0.2, dtype=np.float64)
        coded = encode_pu21(ref * DISPLAY.peak) + 0.1
        test = decode_pu21(coded) / DISPLAY.peak
        got = pu_psnr(test.astype(np.float64), ref, DISPLAY)
        assert got == pytest.approx(20.0, abs=1e-3)

    def test_monotone_in_noise_level(self):
        rng = np.random.Generator(np.random.Philox(key=41))
        ref = rng.uniform(0.1, 0.9, size=(32, 32, 3)).astype(np.float32)
        scores = []
        for amp in (0.01, 0.05, 0.2):
            noise = rng.normal(0, amp, size=ref.shape)
            scores.append(pu_psnr(np.clip(ref + noise, 0, 1), ref, DISPLAY))
        assert scores[0] > scores[1] > scores[2]

    def test_shape_mismatch(self):
        with pytest.raises(ContractError):
            pu_psnr(np.zeros((4, 4, 3)), np.zeros((5, 4, 3)), DISPLAY)


class TestPuSsim:
    def test_identical_images_exactly_one(self):
        img, _ = rand_pair(2, shape=(16, 16, 3))
        assert pu_ssim(img, img, DISPLAY) == 1.0

    def test_symmetry(self):
        a, b = rand_pair(3, shape=(16, 16, 3))
        assert pu_ssim(a, b, DISPLAY) == pu_ssim(b, a, DISPLAY)

    def test_structural_inversion_scores_low(self):
        rng = np.random.Generator(np.random.Philox(key=43))
        base = rng.uniform(0, 1, size=(32, 32, 1))
        ref = np.repeat(base, 3, axis=2).astype(np.float32)
        inverted = (1.0 - ref).astype(np.float32)
        assert pu_ssim(inverted, ref, DISPLAY) < 0.2

    def test_bounded(self):
        for seed in range(5):
            a, b = rand_pair(50 + seed, shape=(16, 16, 3))
            v = pu_ssim(a, b, DISPLAY)
            assert -1.0 <= v <= 1.0

    def test_too_small_rejected(self):
        tiny = np.zeros((2, 2, 3), dtype=np.float32)
        with pytest.raises(ContractError):
            pu_ssim(tiny, tiny, DISPLAY)
