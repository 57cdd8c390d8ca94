import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from msas.color import make_linear_gray_colormap
from msas.image import ImagePair, quantize
from msas.metrics import (C1, C2, METRIC_FIELDS, REPORT_COLUMNS, evaluate_pair,
                          fused_to_perceptual_gray, mse, ncc, ssim_global, write_report_csv)

pairs = st.integers(2, 8).flatmap(
    lambda n: st.tuples(arrays(np.float64, (n, n), elements=st.floats(0, 1)),
                        arrays(np.float64, (n, n), elements=st.floats(0, 1))))


def _varied(a):
    return np.ptp(a) > 1e-3


class TestPerceptualGray:
    @pytest.mark.parametrize("v, expected", [(1.0, 1.0), (0.0, 0.0)])
    def test_extremes(self, v, expected):
        np.testing.assert_allclose(fused_to_perceptual_gray(np.full((2, 2, 3), v)), expected, atol=1e-9)

    def test_mid_gray(self):
        expected = oracles.srgb_to_lab_scalar(0.5, 0.5, 0.5)[0] / 100
        g = fused_to_perceptual_gray(np.full((1, 1, 3), 0.5))
        assert g[0, 0] == pytest.approx(expected, abs=1e-12)
        assert g[0, 0] == pytest.approx(0.5339, abs=1e-4)

    def test_rejects_gray(self):
        with pytest.raises(ValueError):
            fused_to_perceptual_gray(np.zeros((2, 2)))


class TestOracles:
    def test_ncc(self, rng):
        f, g = rng.random((8, 8)), rng.random((8, 8))
        assert ncc(f, g) == pytest.approx(oracles.ncc_sum(f, g), abs=1e-9)

    def test_mse(self, rng):
        f, g = rng.random((8, 8)), rng.random((8, 8))
        assert mse(f, g) == pytest.approx(oracles.mse_sum(f, g), abs=1e-12)

    def test_ssim(self, rng):
        f, g = rng.random((8, 8)), rng.random((8, 8))
        assert ssim_global(f, g) == pytest.approx(oracles.ssim_sum(f, g), abs=1e-9)

    def test_constants(self):
        assert C1 == pytest.approx(1e-4) and C2 == pytest.approx(9e-4)


class TestExamples:
    def test_self(self, rng):
        f = rng.random((5, 5))
        assert ncc(f, f) == pytest.approx(1.0, abs=1e-12)
        assert ssim_global(f, f) == pytest.approx(1.0, abs=1e-12)
        assert mse(f, f) == 0.0

    def test_anticorrelation(self, rng):
        f = rng.random((5, 5))
        assert ncc(f, 1 - f) == pytest.approx(-1.0, abs=1e-12)

    def test_constant_offset(self):
        assert mse(np.zeros((3, 3)), np.full((3, 3), 0.3)) == pytest.approx(0.09)

    def test_constant_ssim(self):
        assert ssim_global(np.full((3, 3), 0.5), np.full((3, 3), 0.5)) == pytest.approx(1.0)

    def test_constant_ncc_warns(self, rng):
        with pytest.warns(UserWarning, match="constant"):
            assert ncc(np.full((4, 4), 0.2), rng.random((4, 4))) == 0.0

    def test_mismatch(self):
        for fn in (ncc, mse, ssim_global):
            with pytest.raises(ValueError):
                fn(np.zeros((2, 2)), np.zeros((3, 2)))


class TestProperties:
    @given(pairs)
    def test_symmetric(self, fg):
        f, g = fg
        assert mse(f, g) == pytest.approx(mse(g, f), abs=1e-15)
        assert ssim_global(f, g) == pytest.approx(ssim_global(g, f), abs=1e-12)
        if _varied(f) and _varied(g):
            assert ncc(f, g) == pytest.approx(ncc(g, f), abs=1e-12)

    @given(pairs)
    def test_bounds(self, fg):
        f, g = fg
        assert mse(f, g) >= 0
        assert abs(ssim_global(f, g)) <= 1 + 1e-12
        if _varied(f) and _varied(g):
            assert abs(ncc(f, g)) <= 1

    @given(pairs, st.floats(0.1, 10), st.floats(-5, 5))
    def test_ncc_affine_invariant(self, fg, a, b):
        f, g = fg
        if _varied(f) and _varied(g):
            assert ncc(f, a * g + b) == pytest.approx(ncc(f, g), abs=1e-9)
            assert ncc(a * f + b, g) == pytest.approx(ncc(f, g), abs=1e-9)

    # 16-bit intensity levels; arbitrary floats let tiny differences square to 0.
    @given(st.integers(2, 8).flatmap(lambda n: st.tuples(
        *[arrays(np.float64, (n, n), elements=st.integers(0, 65535).map(lambda v: v / 65535))] * 2)))
    def test_mse_zero_iff_equal(self, fg):
        f, g = fg
        assert (mse(f, g) == 0) == np.array_equal(f, g)


class TestEvaluatePair:
    def test_gray_rendering_of_hf(self, rng):
        from scipy import ndimage

        hf = ndimage.gaussian_filter(rng.random((32, 32)), 2)
        hf = (hf - hf.min()) / np.ptp(hf)
        lf = rng.random((32, 32))
        fused = make_linear_gray_colormap()(quantize(hf))
        report = evaluate_pair(ImagePair(hf, lf, 1.0), fused)
        assert report.ssim_hf >= 0.99
        assert report.baseline_ssim == pytest.approx(ssim_global(hf, lf))

    def test_identical_bands(self, rng):
        f = rng.random((8, 8))
        report = evaluate_pair(ImagePair(f, f, 1.0), np.repeat(f[..., None], 3, axis=2))
        assert report.baseline_ssim == pytest.approx(1.0)
        assert report.baseline_ncc == pytest.approx(1.0)
        assert report.baseline_mse == 0.0

    def test_shape_check(self):
        with pytest.raises(ValueError):
            evaluate_pair(ImagePair(np.zeros((4, 4)), np.zeros((4, 4)), 1.0), np.zeros((3, 4, 3)))


def test_report_csv(tmp_path, rng):
    f, g = rng.random((8, 8)), rng.random((8, 8))
    rep = evaluate_pair(ImagePair(f, g, 1.0), np.repeat(f[..., None], 3, axis=2))
    path = tmp_path / "m.csv"
    write_report_csv([("a", "x", rep), ("b", "x", rep)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(REPORT_COLUMNS) == 2 + len(METRIC_FIELDS) == 11
    assert [ln.split(",")[0] for ln in lines[1:]] == ["a", "b", "mean"]
    assert lines[1].split(",")[2:] == lines[3].split(",")[2:]
