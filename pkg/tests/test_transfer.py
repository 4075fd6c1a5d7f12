import math

import numpy as np
import pytest

from hdrenc import (
    LINEAR,
    MULAW,
    PQ,
    PU21,
    ContractError,
    DisplayModel,
    DomainError,
    EncodedImage,
    Encoding,
    decode_image,
    decode_mulaw,
    decode_pq,
    decode_pu21,
    derivative,
    encode_image,
    encode_mulaw,
    encode_pq,
    encode_pu21,
    parse_encoding,
)
from hdrenc.transfer import PU21_VMAX, encoding_curve_table

# Frozen expectations, evaluated independently with the closed forms in
# float64 (see the module formulas; these are not copied from the library).
MULAW_HALF = math.log(2501.0) / math.log(5001.0)  # 0.9186432718796463
PU21_AT_100 = 0.5009408439381996
PU21_AT_4000 = 0.8866536988165742
PU21_AT_10000 = 0.9992193486103145
PQ_AT_10000 = 1.0
PQ_AT_4000 = 0.9025723933109373
PQ_AT_0005 = 0.015076399042367938
PU21_DERIV_AT_FLOOR = 0.0078 / (0.005 * math.log(2.0))
MULAW_DERIV_AT_0 = 5000.0 / math.log(5001.0)


class TestScalarFixedPoints:
    def test_mulaw_endpoints(self):
        assert encode_mulaw(0.0) == 0.0
        assert encode_mulaw(1.0) == 1.0

    def test_mulaw_midpoint(self):
        assert encode_mulaw(0.5) == pytest.approx(MULAW_HALF, rel=1e-12)

    def test_pu21_floor_is_zero(self):
        assert encode_pu21(0.005) == 0.0

    def test_pu21_known_points(self):
        assert encode_pu21(100.0) == pytest.approx(PU21_AT_100, rel=1e-12)
        assert encode_pu21(4000.0) == pytest.approx(PU21_AT_4000, rel=1e-12)
        assert encode_pu21(10000.0) == pytest.approx(PU21_AT_10000, rel=1e-12)

    def test_pq_ceiling_exact(self):
        assert encode_pq(10000.0) == pytest.approx(1.0, abs=1e-12)

    def test_pq_floor_positive(self):
        v = encode_pq(0.005)
        assert v > 0.0
        assert v == pytest.approx(PQ_AT_0005, rel=1e-12)

    def test_pq_working_peak(self):
        assert encode_pq(4000.0) == pytest.approx(PQ_AT_4000, rel=1e-12)

    def test_pq_never_reaches_zero(self):
        assert encode_pq(0.0) > 0.0


class TestScalarInverses:
    def test_mulaw_round_trip(self):
        l = np.linspace(0.0, 1.0, 1001)
        back = decode_mulaw(encode_mulaw(l))
        np.testing.assert_allclose(back, l, rtol=1e-6, atol=1e-12)

    def test_mulaw_decode_examples(self):
        assert decode_mulaw(0.0) == 0.0
        assert decode_mulaw(1.0) == pytest.approx(1.0, rel=1e-12)
        assert decode_mulaw(MULAW_HALF) == pytest.approx(0.5, rel=1e-9)

    def test_pu21_round_trip_log_spaced(self):
        L = np.logspace(math.log10(0.005), 4, 10000)
        L[0], L[-1] = 0.005, 10000.0
        np.testing.assert_allclose(decode_pu21(encode_pu21(L)), L, rtol=1e-5)

    def test_pu21_decode_fixed_points(self):
        assert decode_pu21(0.0) == pytest.approx(0.005, rel=1e-9)
        assert decode_pu21(PU21_AT_10000) == pytest.approx(10000.0, rel=1e-5)

    def test_pq_round_trip_log_spaced(self):
        L = np.logspace(math.log10(0.005), 4, 10000)
        L[0], L[-1] = 0.005, 10000.0
        np.testing.assert_allclose(decode_pq(encode_pq(L)), L, rtol=1e-5)

    def test_pq_decode_fixed_points(self):
        assert decode_pq(1.0) == pytest.approx(10000.0, rel=1e-9)
        assert decode_pq(PQ_AT_0005) == pytest.approx(0.005, rel=1e-6)
        assert decode_pq(encode_pq(500.0)) == pytest.approx(500.0, rel=1e-5)


class TestMonotonicity:
    @pytest.mark.parametrize("enc", [MULAW, LINEAR])
    def test_relative_domain(self, enc):
        l = np.linspace(0.0, 1.0, 2000)
        v = encode_mulaw(l) if enc.name == "mulaw" else l
        assert np.all(np.diff(v) > 0)

    def test_pu21_strictly_increasing(self):
        L = np.logspace(math.log10(0.005), 4, 2000)
        L[0] = 0.005
        assert np.all(np.diff(encode_pu21(L)) > 0)

    def test_pq_strictly_increasing(self):
        L = np.logspace(math.log10(0.005), 4, 2000)
        assert np.all(np.diff(encode_pq(L)) > 0)


class TestDomains:
    def test_mulaw_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            encode_mulaw(-0.01)
        with pytest.raises(DomainError):
            encode_mulaw(1.01)
        with pytest.raises(DomainError):
            encode_mulaw(0.5, mu=0.0)
        with pytest.raises(DomainError):
            decode_mulaw(1.5)

    def test_pu21_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            encode_pu21(0.004)
        with pytest.raises(DomainError):
            encode_pu21(10001.0)
        with pytest.raises(DomainError):
            decode_pu21(PU21_VMAX + 0.01)
        with pytest.raises(DomainError):
            decode_pu21(-0.1)

    def test_pq_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            encode_pq(-1.0)
        with pytest.raises(DomainError):
            encode_pq(10000.5)
        with pytest.raises(DomainError):
            decode_pq(0.0)
        with pytest.raises(DomainError):
            decode_pq(1.0001)

    def test_display_model_invariants(self):
        with pytest.raises(ContractError):
            DisplayModel(black_level=0.0, peak=4000.0)
        with pytest.raises(ContractError):
            DisplayModel(black_level=5000.0, peak=4000.0)
        with pytest.raises(ContractError):
            DisplayModel(black_level=0.005, peak=20000.0)

    def test_unknown_encoding_rejected(self):
        with pytest.raises(ContractError):
            Encoding("gamma22")
        with pytest.raises(ContractError):
            parse_encoding("hlg")


class TestDerivatives:
    def test_pu21_closed_form_at_floor(self):
        assert derivative(PU21, 0.005) == pytest.approx(PU21_DERIV_AT_FLOOR, rel=1e-12)

    def test_mulaw_closed_form_at_zero(self):
        assert derivative(MULAW, 0.0) == pytest.approx(MULAW_DERIV_AT_0, rel=1e-12)

    @pytest.mark.parametrize("enc,lo,hi", [
        (MULAW, 1e-4, 0.999),
        (PU21, 0.0051, 9990.0),
        (PQ, 0.0051, 9990.0),
    ])
    def test_matches_central_finite_difference(self, enc, lo, hi):
        xs = np.logspace(math.log10(lo), math.log10(hi), 100)
        for x in xs:
            h = 1e-4 * x
            if enc.name == "mulaw":
                fd = (encode_mulaw(x + h) - encode_mulaw(x - h)) / (2 * h)
            elif enc.name == "pu21":
                fd = (encode_pu21(x + h) - encode_pu21(x - h)) / (2 * h)
            else:
                fd = (encode_pq(x + h) - encode_pq(x - h)) / (2 * h)
            assert derivative(enc, x) == pytest.approx(fd, rel=1e-4)

    def test_all_derivatives_positive(self):
        xs = np.logspace(math.log10(0.0051), math.log10(9999.0), 50)
        assert np.all(derivative(PQ, xs) > 0)
        assert np.all(derivative(PU21, xs) > 0)
        assert np.all(derivative(MULAW, np.linspace(0, 1, 50)) > 0)

    def test_visibility_ratio_exceeds_150(self):
        # A unit luminance step near darkness is far more visible than at
        # 100 cd/m^2; the pq slope ratio quantifies it.
        assert derivative(PQ, 0.005) / derivative(PQ, 100.0) > 150.0

    def test_pq_derivative_singular_at_zero(self):
        with pytest.raises(DomainError):
            derivative(PQ, 0.0)


class TestImageLevel:
    def setup_method(self):
        self.display = DisplayModel(black_level=0.005, peak=4000.0)
        rng = np.random.Generator(np.random.Philox(key=7))
        self.img = rng.uniform(0.0, 1.0, size=(4, 4, 3)).astype(np.float32)

    def test_constant_one_pq(self):
        img = np.ones((3, 3, 3), dtype=np.float32)
        enc = encode_image(img, PQ, self.display)
        np.testing.assert_allclose(enc.data, PQ_AT_4000, rtol=1e-6)

    def test_constant_zero_pu21_hits_floor(self):
        img = np.zeros((3, 3, 3), dtype=np.float32)
        enc = encode_image(img, PU21, self.display)
        np.testing.assert_array_equal(enc.data, 0.0)

    def test_linear_is_identity_after_clamp(self):
        img = np.array([[[0.25, 0.5, 1.5]]], dtype=np.float32)
        enc = encode_image(img, LINEAR, self.display)
        np.testing.assert_array_equal(enc.data, [[[0.25, 0.5, 1.0]]])

    @pytest.mark.parametrize("enc", [LINEAR, MULAW, PQ, PU21])
    def test_matches_scalar_elementwise(self, enc):
        encoded = encode_image(self.img, enc, self.display).data
        for i in range(4):
            for j in range(4):
                for c in range(3):
                    v = float(self.img[i, j, c])
                    if enc.name in ("pq", "pu21"):
                        absolute = min(max(v * 4000.0, 0.005), 4000.0)
                        want = encode_pq(absolute) if enc.name == "pq" else encode_pu21(absolute)
                    else:
                        rel = min(max(v, 0.0), 1.0)
                        want = encode_mulaw(rel) if enc.name == "mulaw" else rel
                    assert encoded[i, j, c] == np.float32(want)

    @pytest.mark.parametrize("enc", [LINEAR, MULAW, PQ, PU21])
    def test_round_trip_random_pixels(self, enc):
        rng = np.random.Generator(np.random.Philox(key=11))
        img = rng.uniform(0.005 / 4000.0, 1.0, size=(10, 100, 3)).astype(np.float32)
        back = decode_image(encode_image(img, enc, self.display), self.display)
        np.testing.assert_allclose(back, img, rtol=1e-5)

    def test_pq_decode_of_full_code_is_ceiling(self):
        coded = EncodedImage(np.ones((2, 2, 3), dtype=np.float32), PQ)
        linear = decode_image(coded, self.display)
        np.testing.assert_allclose(linear, 2.5, rtol=1e-6)  # 10000 / 4000

    def test_negative_pixels_clamped_not_rejected(self):
        img = np.array([[[-0.5, 0.2, 0.4]]], dtype=np.float32)
        enc = encode_image(img, PU21, self.display)
        ref = encode_image(np.array([[[0.0, 0.2, 0.4]]], dtype=np.float32), PU21, self.display)
        np.testing.assert_array_equal(enc.data, ref.data)

    def test_bad_shape_rejected(self):
        with pytest.raises(ContractError):
            encode_image(np.zeros((4, 4)), PQ, self.display)


class TestCurveTable:
    def test_columns_and_range(self):
        lum, cols = encoding_curve_table(points=64)
        assert lum[0] == pytest.approx(0.005)
        assert lum[-1] == 10000.0
        assert set(cols) == {"linear", "mulaw", "pq", "pu21"}
        # relative-domain curves are fed luminance / 10000
        assert cols["linear"][-1] == pytest.approx(1.0)
        assert cols["mulaw"][-1] == pytest.approx(1.0)
        assert cols["pu21"][-1] == pytest.approx(PU21_AT_10000, rel=1e-9)
        for key in cols:
            assert np.all(np.diff(cols[key]) > 0)
