import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from msas.image import (ImagePair, condition, drc_schlick, load_gray, normalize, quantize,
                        save_gray, save_rgb)

unit_images = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
                     elements=st.floats(0, 1, allow_nan=False))
any_images = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
                    elements=st.floats(-1e3, 1e3, allow_nan=False))


def _write_png(path, arr):
    Image.fromarray(arr).save(path)


class TestLoadGray:
    def test_8bit_extremes(self, tmp_path):
        p = tmp_path / "a.png"
        _write_png(p, np.array([[0, 255]], dtype=np.uint8))
        np.testing.assert_array_equal(load_gray(p), [[0.0, 1.0]])

    def test_16bit_ratio(self, tmp_path):
        p = tmp_path / "b.png"
        _write_png(p, np.array([[32768, 65535]], dtype=np.uint16))
        img = load_gray(p)
        assert img[0, 0] == pytest.approx(32768 / 65535)
        assert img[0, 0] == pytest.approx(0.50001, abs=1e-5)
        assert img[0, 1] == 1.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.png"):
            load_gray(tmp_path / "nope.png")

    def test_rgb_rejected(self, tmp_path):
        p = tmp_path / "c.png"
        _write_png(p, np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(ValueError, match="single-channel"):
            load_gray(p)

    def test_non_png_rejected(self, tmp_path):
        p = tmp_path / "d.bmp"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8)).save(p)
        with pytest.raises(ValueError, match="PNG"):
            load_gray(p)


class TestNormalize:
    def test_affine(self):
        np.testing.assert_allclose(normalize([[2.0, 4.0, 6.0]]), [[0.0, 0.5, 1.0]])

    def test_constant_is_zero(self):
        np.testing.assert_array_equal(normalize(np.full((3, 3), 7.0)), np.zeros((3, 3)))

    def test_already_unit(self):
        np.testing.assert_array_equal(normalize([[0.0, 1.0]]), [[0.0, 1.0]])

    @given(any_images)
    def test_idempotent(self, img):
        once = normalize(img)
        np.testing.assert_allclose(normalize(once), once, atol=1e-12)
        assert once.min() >= 0 and once.max() <= 1

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            normalize(np.zeros((0, 3)))


class TestSchlick:
    @pytest.mark.parametrize("p", [1.0, 2.0, 5.0, 100.0])
    def test_endpoints(self, p):
        np.testing.assert_array_equal(drc_schlick([[0.0, 1.0]], p), [[0.0, 1.0]])

    @given(unit_images)
    def test_identity_at_p1(self, img):
        np.testing.assert_array_equal(drc_schlick(img, 1.0), img)

    def test_known_value(self):
        # 5 * 0.2 / (1 - 0.2 + 1)
        assert drc_schlick([[0.2]], 5.0)[0, 0] == pytest.approx(1.0 / 1.8)

    @given(st.floats(1.0001, 50), st.lists(st.floats(0, 1), min_size=2, max_size=20))
    def test_monotone(self, p, xs):
        xs = np.sort(np.array(xs))[None, :]
        out = drc_schlick(xs, p)
        assert np.all(np.diff(out) >= 0)
        assert out.min() >= 0 and out.max() <= 1

    def test_strictly_monotone_interior(self):
        x = np.linspace(0.001, 0.999, 500)[None, :]
        assert np.all(np.diff(drc_schlick(x, 5.0)) > 0)

    def test_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            drc_schlick([[0.5]], 0.5)

    def test_condition_chain(self):
        img = np.array([[10.0, 20.0, 30.0]])
        np.testing.assert_allclose(condition(img, 5.0), drc_schlick(normalize(img), 5.0))


class TestSaveRgb:
    @pytest.mark.parametrize("v, byte", [(1.0, 255), (0.0, 0), (0.5, 128)])
    def test_encoding(self, tmp_path, v, byte):
        p = tmp_path / "x.png"
        save_rgb(np.full((1, 1, 3), v), p)
        with Image.open(p) as im:
            assert im.mode == "RGB"
            assert tuple(np.asarray(im)[0, 0]) == (byte, byte, byte)

    def test_round_half_up(self):
        np.testing.assert_array_equal(quantize([0.5, 1.5 / 255, 2.5 / 255]), [128, 2, 3])

    def test_out_of_range_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            save_rgb(np.full((1, 1, 3), 1.5), tmp_path / "x.png")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            save_rgb(np.zeros((1, 1, 3)), tmp_path / "missing_dir" / "x.png")

    def test_round_trip_8bit(self, tmp_path, rng):
        img = rng.random((6, 7))
        p = tmp_path / "g.png"
        save_gray(img, p)
        assert np.abs(load_gray(p) - img).max() <= 1 / 255

    def test_round_trip_16bit(self, tmp_path, rng):
        img = rng.random((6, 7))
        p = tmp_path / "g16.png"
        save_gray(img, p, bits=16)
        assert np.abs(load_gray(p) - img).max() <= 1 / 65535


class TestImagePair:
    def test_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            ImagePair(np.zeros((4, 4)), np.zeros((4, 5)), 0.1)

    def test_resolution_positive(self):
        with pytest.raises(ValueError):
            ImagePair(np.zeros((4, 4)), np.zeros((4, 4)), 0.0)
