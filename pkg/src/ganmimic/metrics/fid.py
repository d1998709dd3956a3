"""Frechet distance between Gaussian fits of deep feature distributions.

d^2 = ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2))

The matrix square root is taken through an eigendecomposition of the
symmetrized product sqrt(S_a) S_b sqrt(S_a); small negative eigenvalues
(above -1e-6) are clipped to zero, and a symmetric jitter of 1e-6 * I is
added to both covariances and the computation retried if the decomposition
still misbehaves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GaussianSummary", "fit_gaussian", "frechet_distance", "fid"]

_EIG_CLIP = -1e-6
_JITTER = 1e-6


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"inconsistent summary shapes: mean {mean.shape}, cov {cov.shape}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


def fit_gaussian(features) -> GaussianSummary:
    """Sample mean and unbiased sample covariance of feature vectors."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] < 2:
        raise ValueError(f"need at least 2 feature vectors, got {arr.shape[0]}")
    mean = arr.mean(axis=0)
    cov = np.atleast_2d(np.cov(arr, rowvar=False))
    return GaussianSummary(mean=mean, covariance=cov)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    if vals.min() < _EIG_CLIP:
        raise np.linalg.LinAlgError(
            f"matrix is not positive semi-definite (min eigenvalue {vals.min():.3e})"
        )
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def _sqrt_product_trace(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    root_a = _psd_sqrt(cov_a)
    inner = root_a @ cov_b @ root_a
    inner = (inner + inner.T) / 2.0
    vals = np.linalg.eigvalsh(inner)
    if vals.min() < _EIG_CLIP:
        raise np.linalg.LinAlgError(
            f"product has negative spectrum (min eigenvalue {vals.min():.3e})"
        )
    return float(np.sqrt(np.clip(vals, 0.0, None)).sum())


def frechet_distance(a: GaussianSummary, b: GaussianSummary) -> float:
    """Frechet distance between two Gaussian summaries of equal dimension."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    for summary in (a, b):
        if not (np.all(np.isfinite(summary.mean)) and np.all(np.isfinite(summary.covariance))):
            raise ValueError("non-finite values in Gaussian summary")
    diff = a.mean - b.mean
    mean_term = float(diff @ diff)
    try:
        cross = _sqrt_product_trace(a.covariance, b.covariance)
    except np.linalg.LinAlgError:
        eye = np.eye(a.dim)
        cross = _sqrt_product_trace(a.covariance + _JITTER * eye, b.covariance + _JITTER * eye)
    value = mean_term + float(np.trace(a.covariance) + np.trace(b.covariance)) - 2.0 * cross
    if value < 0.0:
        if value < -1e-6:
            raise ArithmeticError(f"frechet distance turned negative: {value}")
        value = 0.0
    return value


def fid(set_a, set_b, extractor) -> float:
    """Distance between the feature distributions of two image sets."""
    feats_a = extractor.extract(set_a)
    feats_b = extractor.extract(set_b)
    return frechet_distance(fit_gaussian(feats_a), fit_gaussian(feats_b))
