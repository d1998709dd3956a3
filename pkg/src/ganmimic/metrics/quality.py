"""Full-reference image quality metrics: windowed structural similarity and
peak signal-to-noise ratio.

Structural similarity is computed per N x N window as

    (2*mu_x*mu_y + c1) * (2*cov_xy + c2)
    ------------------------------------
    (mu_x^2 + mu_y^2 + c1) * (var_x + var_y + c2)

with c1 = (k1 * MAX)^2 and c2 = (k2 * MAX)^2, then averaged over all valid
windows (stride 1, fully inside the image) and channels. Identical images
score exactly 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["WindowConfig", "ssim", "psnr"]


@dataclass(frozen=True)
class WindowConfig:
    window: int = 11
    weighting: str = "gaussian"  # gaussian | uniform
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    max_value: float = 1.0

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.weighting not in ("gaussian", "uniform"):
            raise ValueError(f"unknown weighting {self.weighting!r}")


def window_kernel(cfg: WindowConfig) -> np.ndarray:
    """Normalized (window, window) weighting kernel."""
    n = cfg.window
    if cfg.weighting == "uniform":
        k = np.full((n, n), 1.0 / (n * n), dtype=np.float64)
        return k
    half = (n - 1) / 2.0
    coords = np.arange(n, dtype=np.float64) - half
    g = np.exp(-0.5 * (coords / cfg.sigma) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def _channel_ssim(x: np.ndarray, y: np.ndarray, kernel: np.ndarray, c1: float, c2: float) -> np.ndarray:
    n = kernel.shape[0]
    xw = np.lib.stride_tricks.sliding_window_view(x, (n, n))
    yw = np.lib.stride_tricks.sliding_window_view(y, (n, n))
    mu_x = np.tensordot(xw, kernel, axes=([2, 3], [0, 1]))
    mu_y = np.tensordot(yw, kernel, axes=([2, 3], [0, 1]))
    e_xx = np.tensordot(xw * xw, kernel, axes=([2, 3], [0, 1]))
    e_yy = np.tensordot(yw * yw, kernel, axes=([2, 3], [0, 1]))
    e_xy = np.tensordot(xw * yw, kernel, axes=([2, 3], [0, 1]))
    var_x = e_xx - mu_x * mu_x
    var_y = e_yy - mu_y * mu_y
    cov_xy = e_xy - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return num / den


def ssim(x: np.ndarray, y: np.ndarray, cfg: WindowConfig = WindowConfig()) -> float:
    """Mean windowed structural similarity over all valid windows and channels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim == 2:
        x = x[:, :, None]
        y = y[:, :, None]
    h, w, channels = x.shape
    if cfg.window > h or cfg.window > w:
        raise ValueError(f"window {cfg.window} larger than image {h}x{w}")
    kernel = window_kernel(cfg)
    c1 = (cfg.k1 * cfg.max_value) ** 2
    c2 = (cfg.k2 * cfg.max_value) ** 2
    maps = [
        _channel_ssim(x[:, :, c], y[:, :, c], kernel, c1, c2) for c in range(channels)
    ]
    return float(np.mean(maps))


def psnr(x: np.ndarray, y: np.ndarray, max_value: float = 1.0) -> float:
    """20 * log10(MAX / sqrt(MSE)) in dB; identical inputs give +inf.

    MSE is the mean squared pixel difference between the reference x and the
    distorted y. MAX is 1.0 in the float convention or 2^b - 1 for b-bit data.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(max_value / math.sqrt(mse))
