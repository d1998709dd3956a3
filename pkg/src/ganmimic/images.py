"""Image array handling: validation, file I/O, PNG codecs, and resampling.

Images are numpy float arrays of shape (H, W, C) with C in {1, 3} and values
in [0, 1]. 8-bit files map to floats via v / 255; writing quantizes with
round(v * 255).
"""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "validate_image",
    "clip01",
    "to_uint8",
    "from_uint8",
    "load_image",
    "save_image",
    "encode_png",
    "decode_image_bytes",
    "image_digest",
    "resize",
    "gaussian_blur",
    "luma",
]


class ImageFormatError(ValueError):
    """Raised for arrays or byte payloads that are not valid images."""


def validate_image(img: np.ndarray) -> np.ndarray:
    """Check the (H, W, C) / [0, 1] contract and return a float32 view or copy."""
    arr = np.asarray(img)
    if arr.ndim != 3:
        raise ImageFormatError(f"expected a (H, W, C) array, got shape {arr.shape}")
    if arr.shape[2] not in (1, 3):
        raise ImageFormatError(f"channels must be 1 or 3, got {arr.shape[2]}")
    if not np.issubdtype(arr.dtype, np.floating):
        raise ImageFormatError(f"expected floating dtype, got {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise ImageFormatError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ImageFormatError("image values outside [0, 1]")
    return arr.astype(np.float32, copy=False)


def clip01(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize [0, 1] floats to uint8 with round-half-away semantics of np.rint."""
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(arr: np.ndarray) -> np.ndarray:
    return (arr.astype(np.float32) / 255.0).astype(np.float32)


def quantize(img: np.ndarray) -> np.ndarray:
    """Round-trip through the 8-bit wire representation."""
    return from_uint8(to_uint8(img))


def _pil_to_array(im: Image.Image) -> np.ndarray:
    if im.mode in ("L", "I;16"):
        im = im.convert("L")
        arr = np.asarray(im, dtype=np.uint8)[:, :, None]
    else:
        im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.uint8)
    return from_uint8(arr)


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG/JPEG file to a float image in [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            return _pil_to_array(im)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"cannot decode image file {path}: {exc}") from exc


def save_image(path: str | Path, img: np.ndarray) -> None:
    path = Path(path)
    arr = to_uint8(validate_image(img))
    if arr.shape[2] == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode="RGB")
    pil.save(path)


def encode_png(img: np.ndarray) -> bytes:
    arr = to_uint8(validate_image(img))
    if arr.shape[2] == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def decode_image_bytes(payload: bytes) -> np.ndarray:
    """Decode PNG or JPEG bytes to a float image in [0, 1]."""
    try:
        with Image.open(io.BytesIO(payload)) as im:
            return _pil_to_array(im)
    except Exception as exc:
        raise ImageFormatError(f"cannot decode image payload: {exc}") from exc


def image_digest(img: np.ndarray) -> str:
    """Content hash of an image: SHA-256 over dims plus the 8-bit pixel bytes.

    Defined over the quantized wire representation so that the digest agrees
    between in-process float arrays and images decoded from PNG payloads.
    """
    arr = to_uint8(np.asarray(img))
    h = hashlib.sha256()
    h.update(np.asarray(arr.shape, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


# --- resampling -------------------------------------------------------------

_CUBIC_A = -0.5  # Catmull-Rom


def _cubic_kernel(x: np.ndarray) -> np.ndarray:
    a = _CUBIC_A
    x = np.abs(x)
    x2 = x * x
    x3 = x2 * x
    out = np.where(
        x <= 1.0,
        (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0,
        np.where(x < 2.0, a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a, 0.0),
    )
    return out


def _linear_kernel(x: np.ndarray) -> np.ndarray:
    x = np.abs(x)
    return np.where(x < 1.0, 1.0 - x, 0.0)


_KERNELS = {"bicubic": (_cubic_kernel, 2.0), "bilinear": (_linear_kernel, 1.0)}


def _axis_weights(n_in: int, n_out: int, kernel: str, antialias: bool) -> np.ndarray:
    """Dense (n_out, n_in) resampling matrix with replicate edge handling."""
    kfun, base_support = _KERNELS[kernel]
    scale = n_out / n_in
    filt_scale = min(scale, 1.0) if antialias else 1.0
    support = base_support / filt_scale
    weights = np.zeros((n_out, n_in), dtype=np.float64)
    for i in range(n_out):
        center = (i + 0.5) / scale - 0.5
        lo = int(np.floor(center - support)) + 1
        hi = int(np.ceil(center + support))
        taps = np.arange(lo, hi + 1)
        w = kfun((taps - center) * filt_scale)
        taps = np.clip(taps, 0, n_in - 1)
        np.add.at(weights[i], taps, w)
        weights[i] /= weights[i].sum()
    return weights


def resize(
    img: np.ndarray,
    out_hw: tuple[int, int],
    kernel: str = "bicubic",
    antialias: bool = True,
) -> np.ndarray:
    """Separable resampling to (H, W), clipped back to [0, 1].

    Downscaling widens the kernel support (anti-aliasing) unless disabled;
    the bicubic kernel uses the Catmull-Rom coefficient.
    """
    if kernel not in _KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    arr = np.asarray(img, dtype=np.float64)
    h_in, w_in = arr.shape[:2]
    h_out, w_out = out_hw
    if h_out < 1 or w_out < 1:
        raise ValueError(f"invalid output size {out_hw}")
    if h_out != h_in:
        wh = _axis_weights(h_in, h_out, kernel, antialias)
        arr = np.tensordot(wh, arr, axes=(1, 0))
    if w_out != w_in:
        ww = _axis_weights(w_in, w_out, kernel, antialias)
        arr = np.moveaxis(np.tensordot(ww, arr, axes=(1, 1)), 0, 1)
    return clip01(arr).astype(np.float32)


def gaussian_blur(img: np.ndarray, sigma: float, radius: int) -> np.ndarray:
    """Separable Gaussian blur with a (2*radius+1) kernel and replicate edges."""
    from scipy.ndimage import correlate1d

    taps = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (taps / sigma) ** 2)
    k /= k.sum()
    arr = np.asarray(img, dtype=np.float64)
    arr = correlate1d(arr, k, axis=0, mode="nearest")
    arr = correlate1d(arr, k, axis=1, mode="nearest")
    return clip01(arr).astype(np.float32)


_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


def luma(img: np.ndarray) -> np.ndarray:
    """Single-channel luminance of an RGB image, shape (H, W)."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.shape[2] == 1:
        return arr[:, :, 0]
    return arr @ _LUMA_WEIGHTS
