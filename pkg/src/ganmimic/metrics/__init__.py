"""Image-quality and distribution-distance metrics."""

from .fid import GaussianSummary, fid, fit_gaussian, frechet_distance
from .features import FrozenRandomExtractor, InceptionPoolExtractor, make_extractor
from .quality import WindowConfig, psnr, ssim
from .report import METRIC_COLUMNS, MetricReport, summarize_scores

__all__ = [
    "METRIC_COLUMNS",
    "MetricReport",
    "summarize_scores",
    "GaussianSummary",
    "fid",
    "fit_gaussian",
    "frechet_distance",
    "FrozenRandomExtractor",
    "InceptionPoolExtractor",
    "make_extractor",
    "WindowConfig",
    "psnr",
    "ssim",
]
