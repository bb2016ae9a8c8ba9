"""Estimators and study drivers for the intensity statistics.

Covers the zero-delay coherence estimator <I^2>/<I>^2, image visibility,
the mean/SD-of-estimate studies over stage count and sample count, and
intensity histograms with an explicit overflow bucket.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .imaging import GhostImage, SimulationConfig, TemporalObject, normalize, simulate
from .source import IntensityBlock, SourceConfig, sample_intensities

__all__ = [
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


@dataclass(frozen=True)
class VisibilityResult:
    g2_max: float
    g2_min: float
    visibility: float
    spread: float = float("nan")  # SD across repeated seeds, filled by the driver
    seeds_used: int = 1


@dataclass(frozen=True)
class StudyConfig:
    """Grid for the estimator studies: stage counts x samples-per-run."""

    rg_counts: Sequence[int]
    samples_per_run: Sequence[int]
    runs: int
    seed: int = 0
    mean_intensity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rg_counts", tuple(int(n) for n in self.rg_counts))
        object.__setattr__(
            self, "samples_per_run", tuple(int(n) for n in self.samples_per_run)
        )
        if not self.rg_counts or any(n < 1 for n in self.rg_counts):
            raise ValueError("rg_counts must be a nonempty list of integers >= 1")
        if not self.samples_per_run or any(n < 2 for n in self.samples_per_run):
            raise ValueError("samples_per_run entries must be >= 2")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")


@dataclass(frozen=True)
class StudyResult:
    """One row per (rg_count, samples_per_run) cell."""

    rows: tuple  # of (rg_count, samples_per_run, mean_g2, sd_g2, runs, theory_g2)

    def cell(self, rg_count: int, samples_per_run: int):
        for row in self.rows:
            if row[0] == rg_count and row[1] == samples_per_run:
                return row
        raise KeyError((rg_count, samples_per_run))


@dataclass(frozen=True)
class HistogramResult:
    bin_edges: np.ndarray
    probabilities: np.ndarray
    overflow: float
    sample_count: int
    config: SourceConfig


def g2_zero_estimate(samples) -> float:
    """Zero-delay coherence estimate <I^2>/<I>^2 from one block of intensities."""
    if isinstance(samples, IntensityBlock):
        samples = samples.samples
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least 2 samples")
    mean = samples.mean()
    if mean <= 0:
        raise ValueError("degenerate block: mean intensity is not positive")
    return float((samples**2).mean() / mean**2)


def visibility(image: GhostImage, peak_bins, background_bins) -> VisibilityResult:
    """Image contrast (g2_max - g2_min)/(g2_max + g2_min).

    g2_max averages the peak bins, g2_min the background bins.
    """
    peak = np.asarray(sorted(peak_bins), dtype=int)
    back = np.asarray(sorted(background_bins), dtype=int)
    if peak.size == 0 or back.size == 0:
        raise ValueError("peak and background bin sets must be nonempty")
    if np.intersect1d(peak, back).size:
        raise ValueError("peak and background bin sets overlap")
    g2_max = float(image.g2[peak].mean())
    g2_min = float(image.g2[back].mean())
    return VisibilityResult(
        g2_max=g2_max,
        g2_min=g2_min,
        visibility=(g2_max - g2_min) / (g2_max + g2_min),
    )


def default_bin_sets(obj: TemporalObject):
    """Peak = bins of the highest-amplitude slit; background = bins where O = 0."""
    peak_amp = obj.amplitude.max()
    peak = np.flatnonzero(obj.amplitude == peak_amp)
    back = np.flatnonzero(obj.amplitude == 0)
    return peak, back


def visibility_across_seeds(
    source: SourceConfig,
    obj: TemporalObject,
    periods: int,
    seeds: Sequence[int],
    peak_bins=None,
    background_bins=None,
    workers: int = 1,
) -> VisibilityResult:
    """Repeat the imaging run per seed and report mean visibility and seed spread."""
    if peak_bins is None or background_bins is None:
        peak_default, back_default = default_bin_sets(obj)
        peak_bins = peak_default if peak_bins is None else peak_bins
        background_bins = back_default if background_bins is None else background_bins
    values = []
    maxes = []
    mins = []
    for seed in seeds:
        image = normalize(
            simulate(SimulationConfig(source, obj, periods, seed=seed, workers=workers))
        )
        res = visibility(image, peak_bins, background_bins)
        values.append(res.visibility)
        maxes.append(res.g2_max)
        mins.append(res.g2_min)
    values = np.asarray(values)
    return VisibilityResult(
        g2_max=float(np.mean(maxes)),
        g2_min=float(np.mean(mins)),
        visibility=float(values.mean()),
        spread=float(values.std(ddof=1)) if len(values) > 1 else float("nan"),
        seeds_used=len(values),
    )


def sd_vs_n_study(config: StudyConfig) -> StudyResult:
    """Mean and SD of the coherence estimate over independent runs, per grid cell.

    Each cell draws `runs` fresh blocks of `samples_per_run` intensities from
    a cell-specific child seed, so the whole table is deterministic in `seed`.
    """
    cells = [(n, count) for n in config.rg_counts for count in config.samples_per_run]
    children = np.random.SeedSequence(config.seed).spawn(len(cells))
    rows = []
    for (rg_count, count), child in zip(cells, children):
        rng = np.random.default_rng(child)
        src = SourceConfig(rg_count, config.mean_intensity)
        draws = sample_intensities(src, config.runs * count, rng)
        draws = draws.reshape(config.runs, count)
        m1 = draws.mean(axis=1)
        m2 = (draws**2).mean(axis=1)
        estimates = m2 / m1**2
        sd = float(estimates.std(ddof=1)) if config.runs > 1 else 0.0
        rows.append(
            (
                rg_count,
                count,
                float(estimates.mean()),
                sd,
                config.runs,
                float(2**rg_count),
            )
        )
    return StudyResult(rows=tuple(rows))


def histogram(
    samples, bin_count: int = 50, range_max: float | None = None
) -> HistogramResult:
    """Uniform-bin intensity histogram over [0, range_max] plus an overflow bucket.

    Probabilities are normalized over all samples, so bin probabilities and
    the overflow fraction sum to 1. By default the range covers the bulk of
    the observed samples (their 99.95th percentile); the heavy tail beyond it
    lands in the overflow bucket. A data-independent range can be forced via
    range_max.
    """
    config = samples.config if isinstance(samples, IntensityBlock) else None
    if isinstance(samples, IntensityBlock):
        samples = samples.samples
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("no samples to histogram")
    if bin_count < 2:
        raise ValueError(f"bin_count must be >= 2, got {bin_count}")
    if range_max is None:
        range_max = float(np.quantile(samples, 0.9995))
        if range_max <= 0:
            raise ValueError("degenerate samples: bulk quantile is not positive")
    if not range_max > 0:
        raise ValueError(f"range_max must be > 0, got {range_max}")
    edges = np.linspace(0.0, range_max, bin_count + 1)
    counts, _ = np.histogram(samples[samples <= range_max], bins=edges)
    overflow = int((samples > range_max).sum())
    total = samples.size
    return HistogramResult(
        bin_edges=edges,
        probabilities=counts / total,
        overflow=overflow / total,
        sample_count=total,
        config=config,
    )
