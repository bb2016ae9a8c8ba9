"""Temporal ghost imaging with superbunching (cascaded-exponential) light."""

__version__ = "0.1.0"

from .analysis import (
    HistogramResult,
    StudyConfig,
    StudyResult,
    VisibilityResult,
    g2_zero_estimate,
    histogram,
    sd_vs_n_study,
    visibility,
    visibility_across_seeds,
)
from .imaging import (
    CorrelationAccumulator,
    DegenerateObjectError,
    GeometryError,
    GhostImage,
    NormalizationError,
    SimulationConfig,
    TemporalObject,
    default_double_slit,
    make_double_slit,
    normalize,
    object_from_segments,
    run_period,
    simulate,
)
from .source import (
    IntensityBlock,
    QuadratureError,
    SourceConfig,
    cdf,
    pdf,
    sample_block,
    sample_intensities,
    sample_intensity,
    theoretical_g2_zero,
)
from .theory import (
    BandwidthSet,
    TheoryCurve,
    bandwidths_for_bin_width,
    g2_kernel,
    predicted_visibility,
    theoretical_image,
    white_noise_image,
)

__all__ = [
    "__version__",
    "SourceConfig",
    "IntensityBlock",
    "QuadratureError",
    "sample_intensity",
    "sample_intensities",
    "sample_block",
    "pdf",
    "cdf",
    "theoretical_g2_zero",
    "TemporalObject",
    "SimulationConfig",
    "CorrelationAccumulator",
    "GhostImage",
    "GeometryError",
    "DegenerateObjectError",
    "NormalizationError",
    "make_double_slit",
    "object_from_segments",
    "default_double_slit",
    "run_period",
    "simulate",
    "normalize",
    "BandwidthSet",
    "TheoryCurve",
    "g2_kernel",
    "bandwidths_for_bin_width",
    "theoretical_image",
    "white_noise_image",
    "predicted_visibility",
    "VisibilityResult",
    "StudyConfig",
    "StudyResult",
    "HistogramResult",
    "g2_zero_estimate",
    "visibility",
    "visibility_across_seeds",
    "sd_vs_n_study",
    "histogram",
]
