"""Temporal ghost-imaging engine.

One period: draw T fresh intensities, modulate the signal copy by the
temporal object, integrate it into a bucket value, and correlate the bucket
with the per-bin reference copy. Signal and reference share the identical
intensity sequence. Repeating over many periods and normalizing the
accumulated sums by the background yields the retrieved image g2(t).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .source import SourceConfig

__all__ = [
    "GeometryError",
    "DegenerateObjectError",
    "NormalizationError",
    "TemporalObject",
    "SimulationConfig",
    "CorrelationAccumulator",
    "ImageMeta",
    "GhostImage",
    "make_double_slit",
    "object_from_segments",
    "default_double_slit",
    "run_period",
    "simulate",
    "normalize",
]

# Periods per vectorized chunk. The chunking (and hence the random stream
# layout) is fixed by the period count alone, so results are bit-identical
# for any worker count.
_CHUNK_PERIODS = 4096


class GeometryError(ValueError):
    """Slit placement is degenerate, overlapping, or out of range."""


class DegenerateObjectError(ValueError):
    """Object transmits nothing; the bucket signal is permanently zero."""


class NormalizationError(ValueError):
    """A normalizing sum is zero; names the offending quantity."""


@dataclass(frozen=True)
class TemporalObject:
    """Periodic transmission profile O(t) on a discrete grid of T bins."""

    period_bins: int
    amplitude: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=float)
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)
        if self.period_bins < 1:
            raise ValueError(f"period_bins must be >= 1, got {self.period_bins}")
        if amp.shape != (self.period_bins,):
            raise ValueError(
                f"amplitude length {amp.shape} does not match "
                f"period_bins={self.period_bins}"
            )
        if np.any(amp < 0) or np.any(amp > 1):
            raise ValueError("amplitude values must lie in [0, 1]")

    @property
    def object_sum(self) -> float:
        return float(self.amplitude.sum())


def object_from_segments(period_bins: int, segments) -> TemporalObject:
    """Build an object from (start, width, height) segments; zero elsewhere.

    Segments must fit within one period and must not overlap.
    """
    amp = np.zeros(period_bins)
    covered = np.zeros(period_bins, dtype=bool)
    for start, width, height in segments:
        start, width = int(start), int(width)
        if width < 1:
            raise GeometryError(f"zero-width segment at start={start}")
        if start < 0 or start + width > period_bins:
            raise GeometryError(
                f"segment [{start}, {start + width}) exceeds period of "
                f"{period_bins} bins"
            )
        if not 0 <= height <= 1:
            raise GeometryError(f"segment height {height} outside [0, 1]")
        sl = slice(start, start + width)
        if covered[sl].any():
            raise GeometryError(f"segment [{start}, {start + width}) overlaps another")
        covered[sl] = True
        amp[sl] = height
    return TemporalObject(period_bins=period_bins, amplitude=amp)


def make_double_slit(period_bins: int, slit1, slit2) -> TemporalObject:
    """Double-slit object from two (start, width, height) triples."""
    return object_from_segments(period_bins, [slit1, slit2])


def default_double_slit(period_bins: int = 100) -> TemporalObject:
    """Canonical test object: slits of width 10/height 0.5 and width 5/height 1."""
    return make_double_slit(period_bins, (20, 10, 0.5), (60, 5, 1.0))


@dataclass(frozen=True)
class SimulationConfig:
    source: SourceConfig
    object: TemporalObject
    periods: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.periods < 1:
            raise ValueError(f"periods must be >= 1, got {self.periods}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class ImageMeta:
    source: SourceConfig
    periods: int
    seed: int
    workers: int = 1


@dataclass
class CorrelationAccumulator:
    """Running sums over periods for the correlation estimator.

    Beyond the first-order sums needed for g2 itself, second-order sums are
    kept so `normalize` can attach a per-bin delta-method standard error.
    All fields merge by addition.
    """

    sum_bucket_ref: np.ndarray  # sum of B * I(t), per bin
    sum_bucket: float  # sum of B
    sum_ref: np.ndarray  # sum of I(t), per bin
    period_count: int
    sum_bucket_ref_sq: np.ndarray  # sum of (B * I(t))^2
    sum_bucket_sq: float  # sum of B^2
    sum_ref_sq: np.ndarray  # sum of I(t)^2
    sum_b2_ref: np.ndarray  # sum of B^2 * I(t)
    sum_b_ref2: np.ndarray  # sum of B * I(t)^2
    meta: ImageMeta | None = field(default=None, compare=False)

    @classmethod
    def zeros(cls, period_bins: int) -> "CorrelationAccumulator":
        z = lambda: np.zeros(period_bins)
        return cls(z(), 0.0, z(), 0, z(), 0.0, z(), z(), z())

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        if self.sum_ref.shape != other.sum_ref.shape:
            raise ValueError("cannot merge accumulators of different bin counts")
        return CorrelationAccumulator(
            self.sum_bucket_ref + other.sum_bucket_ref,
            self.sum_bucket + other.sum_bucket,
            self.sum_ref + other.sum_ref,
            self.period_count + other.period_count,
            self.sum_bucket_ref_sq + other.sum_bucket_ref_sq,
            self.sum_bucket_sq + other.sum_bucket_sq,
            self.sum_ref_sq + other.sum_ref_sq,
            self.sum_b2_ref + other.sum_b2_ref,
            self.sum_b_ref2 + other.sum_b_ref2,
            meta=self.meta or other.meta,
        )


@dataclass(frozen=True)
class GhostImage:
    """Background-normalized correlation curve with per-bin standard errors."""

    g2: np.ndarray
    stderr: np.ndarray
    meta: ImageMeta | None = None


def _draw_periods(
    source: SourceConfig, periods: int, bins: int, rng: np.random.Generator
) -> np.ndarray:
    out = rng.standard_exponential((periods, bins))
    for _ in range(source.rg_count - 1):
        out *= rng.standard_exponential((periods, bins))
    out *= source.mean_intensity
    return out


def _accumulate(
    obj: TemporalObject,
    source: SourceConfig,
    periods: int,
    rng: np.random.Generator,
) -> CorrelationAccumulator:
    intens = _draw_periods(source, periods, obj.period_bins, rng)
    bucket = intens @ obj.amplitude  # (periods,)
    y = intens * bucket[:, None]  # B * I(t)
    return CorrelationAccumulator(
        y.sum(axis=0),
        float(bucket.sum()),
        intens.sum(axis=0),
        periods,
        (y * y).sum(axis=0),
        float((bucket * bucket).sum()),
        (intens * intens).sum(axis=0),
        (y * bucket[:, None]).sum(axis=0),
        (y * intens).sum(axis=0),
    )


def run_period(
    obj: TemporalObject,
    source: SourceConfig,
    rng: np.random.Generator,
    acc: CorrelationAccumulator,
) -> CorrelationAccumulator:
    """Advance the accumulator by one period drawn from `rng`."""
    if acc.sum_ref.shape != (obj.period_bins,):
        raise ValueError("accumulator bin count does not match object")
    return acc.merge(_accumulate(obj, source, 1, rng))


def simulate(config: SimulationConfig) -> CorrelationAccumulator:
    """Run the full protocol over `periods` repetitions.

    Periods are split into fixed-size chunks, each seeded from a child of
    SeedSequence(seed); workers only schedule chunks, so the merged sums are
    bit-identical for any worker count.
    """
    obj = config.object
    if obj.object_sum == 0:
        raise DegenerateObjectError(
            "object transmits nothing (sum of amplitudes is 0)"
        )
    n_chunks = -(-config.periods // _CHUNK_PERIODS)
    children = np.random.SeedSequence(config.seed).spawn(n_chunks)
    sizes = [
        min(_CHUNK_PERIODS, config.periods - i * _CHUNK_PERIODS)
        for i in range(n_chunks)
    ]

    def one_chunk(args):
        size, child = args
        return _accumulate(obj, config.source, size, np.random.default_rng(child))

    if config.workers == 1:
        parts = map(one_chunk, zip(sizes, children))
        acc = CorrelationAccumulator.zeros(obj.period_bins)
        for part in parts:
            acc = acc.merge(part)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(one_chunk, zip(sizes, children)))
        acc = CorrelationAccumulator.zeros(obj.period_bins)
        for part in parts:
            acc = acc.merge(part)
    acc.meta = ImageMeta(
        source=config.source,
        periods=config.periods,
        seed=config.seed,
        workers=config.workers,
    )
    return acc


def normalize(acc: CorrelationAccumulator) -> GhostImage:
    """Background-normalize the accumulated sums into a ghost image.

    g2(t) = <B I(t)> / (<B> <I(t)>); bins where the object is zero then
    average to 1 in expectation. The standard error comes from the delta
    method on the three sample means entering the ratio.
    """
    m = acc.period_count
    if m < 1:
        raise NormalizationError("no periods accumulated")
    if acc.sum_bucket <= 0:
        raise NormalizationError("sum_bucket is zero; bucket never fired")
    if np.any(acc.sum_ref <= 0):
        bad = int(np.argmin(acc.sum_ref))
        raise NormalizationError(f"sum_ref is zero at bin {bad}")

    m_y = acc.sum_bucket_ref / m
    m_b = acc.sum_bucket / m
    m_i = acc.sum_ref / m
    g2 = m_y / (m_b * m_i)

    # Per-period (co)variances of y = B*I(t), B, and I(t).
    var_y = acc.sum_bucket_ref_sq / m - m_y**2
    var_b = acc.sum_bucket_sq / m - m_b**2
    var_i = acc.sum_ref_sq / m - m_i**2
    cov_yb = acc.sum_b2_ref / m - m_y * m_b
    cov_yi = acc.sum_b_ref2 / m - m_y * m_i
    cov_bi = m_y - m_b * m_i
    rel_var = (
        var_y / m_y**2
        + var_b / m_b**2
        + var_i / m_i**2
        - 2 * cov_yb / (m_y * m_b)
        - 2 * cov_yi / (m_y * m_i)
        + 2 * cov_bi / (m_b * m_i)
    )
    stderr = g2 * np.sqrt(np.maximum(rel_var, 0.0) / m)
    return GhostImage(g2=g2, stderr=stderr, meta=acc.meta)
