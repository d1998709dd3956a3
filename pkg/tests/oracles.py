"""Slow, direct reference implementations used to cross-check the package.

Everything here favors obviousness over speed: explicit window loops and
textbook formulas, no shared code with the library under test.
"""

import math

import numpy as np


def ssim_reference(x, y, window=11, sigma=1.5, k1=0.01, k2=0.03,
                   max_value=1.0, weighting="gaussian"):
    """Mean SSIM over valid windows via an explicit double loop.

    x, y: float arrays (H, W) or (H, W, C) in [0, max_value].
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
        y = y[:, :, None]
    h, w, channels = x.shape
    if weighting == "gaussian":
        half = (window - 1) / 2.0
        coords = np.arange(window) - half
        g = np.exp(-(coords**2) / (2.0 * sigma**2))
        kern = np.outer(g, g)
        kern = kern / kern.sum()
    else:
        kern = np.full((window, window), 1.0 / (window * window))
    c1 = (k1 * max_value) ** 2
    c2 = (k2 * max_value) ** 2
    per_channel = []
    for c in range(channels):
        vals = []
        for i in range(h - window + 1):
            for j in range(w - window + 1):
                px = x[i:i + window, j:j + window, c]
                py = y[i:i + window, j:j + window, c]
                mx = (kern * px).sum()
                my = (kern * py).sum()
                vx = (kern * px * px).sum() - mx * mx
                vy = (kern * py * py).sum() - my * my
                cxy = (kern * px * py).sum() - mx * my
                num = (2 * mx * my + c1) * (2 * cxy + c2)
                den = (mx * mx + my * my + c1) * (vx + vy + c2)
                vals.append(num / den)
        per_channel.append(np.mean(vals))
    return float(np.mean(per_channel))


def psnr_reference(x, y, max_value=1.0):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(max_value / math.sqrt(mse))


def frechet_1d(mean_a, var_a, mean_b, var_b):
    """Closed form for univariate Gaussians."""
    return (mean_a - mean_b) ** 2 + var_a + var_b - 2.0 * math.sqrt(var_a * var_b)


def frechet_diagonal(mu_a, diag_a, mu_b, diag_b):
    """Closed form when both covariances are diagonal (they commute)."""
    mu_a = np.asarray(mu_a, dtype=np.float64)
    mu_b = np.asarray(mu_b, dtype=np.float64)
    da = np.asarray(diag_a, dtype=np.float64)
    db = np.asarray(diag_b, dtype=np.float64)
    return float(
        np.sum((mu_a - mu_b) ** 2)
        + np.sum(da + db - 2.0 * np.sqrt(da * db))
    )


def welch_reference(a, b):
    """Welch t, df via textbook formulas (p left to the frozen fixtures)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.size, b.size
    va = a.var(ddof=1) / na
    vb = b.var(ddof=1) / nb
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (na - 1) + vb**2 / (nb - 1))
    return t, df
