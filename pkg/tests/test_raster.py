"""Raster container and homography warping."""
import numpy as np
import pytest

from geoforge.errors import SizeMismatch
from geoforge.geometry import Homography
from geoforge.raster import ImageRaster, psnr, warp_image
from geoforge.synth import smooth_texture


def test_uint8_roundtrip_exact():
    rng = np.random.default_rng(3)
    raw = rng.integers(0, 256, size=(40, 30, 3), dtype=np.uint8)
    img = ImageRaster.from_uint8(raw)
    assert np.array_equal(img.to_uint8(), raw)


def test_luma_weights():
    # Rec.601 on pure primaries
    red = ImageRaster.from_array(np.tile([1.0, 0.0, 0.0], (4, 4, 1)))
    green = ImageRaster.from_array(np.tile([0.0, 1.0, 0.0], (4, 4, 1)))
    blue = ImageRaster.from_array(np.tile([0.0, 0.0, 1.0], (4, 4, 1)))
    assert np.allclose(red.luma(), 0.299)
    assert np.allclose(green.luma(), 0.587)
    assert np.allclose(blue.luma(), 0.114)


def test_luma_of_gray_is_identity():
    rng = np.random.default_rng(4)
    img = ImageRaster.from_array(rng.uniform(size=(8, 9)))
    assert np.array_equal(img.luma(), img.samples)


def test_valid_mask_shape_checked():
    with pytest.raises(SizeMismatch):
        ImageRaster(np.zeros((4, 4)), np.ones((4, 5), dtype=bool))


def test_psnr_identical_is_infinite():
    img = ImageRaster.from_array(np.full((6, 6), 0.5))
    assert psnr(img, img) == float("inf")


def test_psnr_constant_offset():
    # mse = 0.01 -> 10 log10(1/0.01) = 20 dB
    a = ImageRaster.from_array(np.zeros((10, 10)))
    b = ImageRaster.from_array(np.full((10, 10), 0.1))
    assert psnr(a, b) == pytest.approx(20.0, abs=1e-12)


def test_warp_identity_bit_exact():
    rng = np.random.default_rng(5)
    raw = rng.integers(0, 256, size=(32, 48), dtype=np.uint8)
    img = ImageRaster.from_uint8(raw)
    out = warp_image(img, Homography.identity())
    assert np.array_equal(out.to_uint8(), raw)
    assert out.valid.all()


def test_warp_translation_invalidates_uncovered_strip():
    img = ImageRaster.from_array(np.ones((20, 30)))
    t = Homography(np.array([[1.0, 0.0, 10.0], [0.0, 1.0, 5.0], [0.0, 0.0, 1.0]]))
    out = warp_image(img, t)
    assert not out.valid[:, :10].any()
    assert not out.valid[:5, :].any()
    assert out.valid[6:, 11:].all()
    assert np.all(out.samples[~out.valid] == 0.0)


def test_warp_propagates_source_invalidity():
    img = ImageRaster(np.ones((20, 20)), np.ones((20, 20), dtype=bool))
    masked = ImageRaster(img.samples, img.valid.copy())
    masked.valid[5:10, 5:10] = False
    out = warp_image(masked, Homography.identity())
    assert not out.valid[5:10, 5:10].any()
    assert out.valid[:4, :].all()


def test_warp_roundtrip_is_faithful(rng):
    src = smooth_texture(160, 120, rng)
    h = Homography(np.array([
        [0.95, 0.08, 6.0],
        [-0.05, 1.02, 3.0],
        [1e-4, -8e-5, 1.0],
    ]))
    once = warp_image(src, h)
    back = warp_image(once, h.inverse())
    assert back.valid.sum() > 0.5 * src.valid.size
    assert psnr(back, src) > 40.0


def test_warp_out_size():
    img = ImageRaster.from_array(np.ones((10, 12)))
    out = warp_image(img, Homography.identity(), out_size=(20, 7))
    assert out.width == 20 and out.height == 7
    assert out.valid[:, :12].all()
    assert not out.valid[:, 12:].any()
