import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ganmimic.images import (
    ImageFormatError,
    decode_image_bytes,
    encode_png,
    from_uint8,
    gaussian_blur,
    image_digest,
    load_image,
    luma,
    quantize,
    resize,
    save_image,
    to_uint8,
    validate_image,
)


class TestValidate:
    def test_accepts_rgb(self, small_image):
        out = validate_image(small_image)
        assert out.shape == (16, 16, 3)

    def test_accepts_single_channel(self, rng):
        validate_image(rng.random((8, 8, 1)))

    def test_rejects_2d(self, rng):
        with pytest.raises(ImageFormatError):
            validate_image(rng.random((8, 8)))

    def test_rejects_bad_channels(self, rng):
        with pytest.raises(ImageFormatError):
            validate_image(rng.random((8, 8, 4)))

    def test_rejects_out_of_range(self, rng):
        img = rng.random((8, 8, 3)) + 0.5
        with pytest.raises(ImageFormatError):
            validate_image(img)

    def test_rejects_nan(self):
        img = np.full((8, 8, 3), np.nan)
        with pytest.raises(ImageFormatError):
            validate_image(img)

    def test_rejects_uint8_input(self):
        img = np.zeros((8, 8, 3), dtype=np.uint8)
        with pytest.raises(ImageFormatError):
            validate_image(img)


class TestQuantization:
    def test_endpoints_exact(self):
        img = np.array([[[0.0], [1.0]]])
        assert to_uint8(img).tolist() == [[[0], [255]]]

    def test_quantize_idempotent(self, small_image):
        once = quantize(small_image)
        twice = quantize(once)
        assert np.array_equal(once, twice)

    def test_roundtrip_error_bounded(self, small_image):
        back = quantize(small_image)
        assert np.abs(back - small_image).max() <= 0.5 / 255.0 + 1e-7

    @given(st.integers(min_value=0, max_value=255))
    def test_uint8_roundtrip_identity(self, v):
        arr = np.full((2, 2, 1), v, dtype=np.uint8)
        assert np.array_equal(to_uint8(from_uint8(arr)), arr)


class TestFileIO:
    def test_png_roundtrip(self, tmp_path, small_image):
        p = tmp_path / "img.png"
        save_image(p, small_image)
        back = load_image(p)
        assert back.shape == small_image.shape
        assert np.array_equal(back, quantize(small_image))

    def test_grayscale_roundtrip(self, tmp_path, rng):
        img = rng.random((10, 12, 1))
        p = tmp_path / "g.png"
        save_image(p, img)
        back = load_image(p)
        assert back.shape == (10, 12, 1)

    def test_encode_decode_bytes(self, small_image):
        payload = encode_png(small_image)
        assert payload[:8] == b"\x89PNG\r\n\x1a\n"
        back = decode_image_bytes(payload)
        assert np.array_equal(back, quantize(small_image))

    def test_decode_garbage_raises(self):
        with pytest.raises(ImageFormatError):
            decode_image_bytes(b"not an image at all")

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")


class TestDigest:
    def test_stable_across_encode(self, small_image):
        d1 = image_digest(small_image)
        d2 = image_digest(decode_image_bytes(encode_png(small_image)))
        assert d1 == d2

    def test_distinguishes_images(self, rng):
        a = rng.random((8, 8, 3))
        b = a.copy()
        b[0, 0, 0] = 1.0 - b[0, 0, 0]
        assert image_digest(a) != image_digest(b)

    def test_shape_matters(self):
        flat = np.zeros((4, 16, 1))
        tall = np.zeros((16, 4, 1))
        assert image_digest(flat) != image_digest(tall)


class TestResize:
    def test_identity_at_same_size(self, small_image):
        out = resize(small_image, (16, 16))
        assert np.allclose(out, small_image, atol=1e-6)

    def test_output_shape(self, small_image):
        assert resize(small_image, (8, 24)).shape == (8, 24, 3)

    def test_constant_preserved(self):
        img = np.full((16, 16, 3), 0.25, dtype=np.float64)
        for kernel in ("bicubic", "bilinear"):
            up = resize(img, (32, 32), kernel=kernel)
            down = resize(img, (4, 4), kernel=kernel)
            assert np.allclose(up, 0.25, atol=1e-6)
            assert np.allclose(down, 0.25, atol=1e-6)

    def test_range_clipped(self, rng):
        img = rng.random((16, 16, 3))
        out = resize(img, (64, 64))
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_downscale_averages(self):
        # checkerboard downscaled 2x with antialiasing lands near the mean
        img = np.indices((16, 16)).sum(axis=0) % 2
        img = img[:, :, None].astype(np.float64)
        out = resize(img, (8, 8))
        assert abs(float(out.mean()) - 0.5) < 0.05

    def test_down_up_recovers_smooth_image(self):
        yy, xx = np.mgrid[0:32, 0:32] / 31.0
        img = (0.5 + 0.4 * np.sin(2 * np.pi * yy) * np.cos(2 * np.pi * xx))[:, :, None]
        rec = resize(resize(img, (16, 16)), (32, 32))
        assert float(np.abs(rec - img).mean()) < 0.02

    @settings(max_examples=25, deadline=None)
    @given(
        h=st.integers(min_value=4, max_value=24),
        w=st.integers(min_value=4, max_value=24),
    )
    def test_arbitrary_sizes_stay_in_range(self, h, w):
        rng = np.random.default_rng(h * 100 + w)
        img = rng.random((12, 12, 1))
        out = resize(img, (h, w))
        assert out.shape == (h, w, 1)
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestBlurAndLuma:
    def test_blur_preserves_constant(self):
        img = np.full((12, 12, 3), 0.7)
        out = gaussian_blur(img, sigma=2.0, radius=4)
        assert np.allclose(out, 0.7, atol=1e-6)

    def test_blur_reduces_variance(self, rng):
        img = rng.random((24, 24, 1))
        out = gaussian_blur(img, sigma=2.0, radius=4)
        assert out.var() < img.var()

    def test_luma_weights(self):
        img = np.zeros((2, 2, 3))
        img[:, :, 0] = 1.0
        assert np.allclose(luma(img), 0.299)
        img = np.ones((2, 2, 3))
        assert np.allclose(luma(img), 1.0, atol=1e-12)

    def test_luma_single_channel_passthrough(self, rng):
        img = rng.random((4, 4, 1))
        assert np.array_equal(luma(img), img[:, :, 0])
