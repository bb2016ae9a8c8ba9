"""Superbunching pseudothermal light source.

Intensity after N cascaded scattering stages: the first stage draws from a
negative-exponential distribution with mean mu, each later stage draws from a
negative-exponential distribution whose mean is the previous stage's output.
The result equals mu times a product of N independent unit exponentials, so
``<I^k> = (k!)^N mu^k`` and the zero-delay second-order coherence is 2^N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

__all__ = [
    "SourceConfig",
    "IntensityBlock",
    "QuadratureError",
    "sample_intensity",
    "sample_intensities",
    "sample_block",
    "pdf",
    "cdf",
    "theoretical_g2_zero",
]

# Log-intensity truncation for the recursive quadrature (in units of mu).
# The integrand spans many decades and diverges logarithmically near zero.
_TRUNC_LO = 1e-12
_TRUNC_HI_PER_STAGE = 1e3
_QUAD_ORDER = 400


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested relative tolerance."""

    def __init__(self, requested: float, achieved: float):
        self.requested = requested
        self.achieved = achieved
        super().__init__(
            f"quadrature reached relative tolerance {achieved:.3e}, "
            f"requested {requested:.3e}"
        )


@dataclass(frozen=True)
class SourceConfig:
    """Number of cascade stages and mean intensity of the light source."""

    rg_count: int
    mean_intensity: float = 1.0

    def __post_init__(self):
        if self.rg_count < 1:
            raise ValueError(f"rg_count must be >= 1, got {self.rg_count}")
        if not self.mean_intensity > 0:
            raise ValueError(
                f"mean_intensity must be > 0, got {self.mean_intensity}"
            )


@dataclass(frozen=True)
class IntensityBlock:
    """A reproducible block of sampled intensities."""

    samples: np.ndarray
    config: SourceConfig
    seed: int

    def __len__(self) -> int:
        return len(self.samples)


def sample_intensity(config: SourceConfig, rng: np.random.Generator) -> float:
    """Draw one intensity from the N-stage cascade."""
    x = rng.standard_exponential()
    for _ in range(config.rg_count - 1):
        x *= rng.standard_exponential()
    return x * config.mean_intensity


def sample_intensities(
    config: SourceConfig, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw `count` intensities, one full stage at a time (vectorized)."""
    out = rng.standard_exponential(count)
    for _ in range(config.rg_count - 1):
        out *= rng.standard_exponential(count)
    out *= config.mean_intensity
    return out


def sample_block(config: SourceConfig, count: int, seed: int) -> IntensityBlock:
    """Deterministic block of samples: identical for identical (config, seed, count)."""
    if count < 1:
        raise ValueError(f"requested an empty block (count={count})")
    rng = np.random.default_rng(seed)
    samples = sample_intensities(config, count, rng)
    samples.setflags(write=False)
    return IntensityBlock(samples=samples, config=config, seed=seed)


@lru_cache(maxsize=32)
def _legendre_rule(order: int, lo: float, hi: float):
    nodes, weights = roots_legendre(order)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def _product_exp_pdf(stages: int, z: np.ndarray, order: int) -> np.ndarray:
    """Density at z of a product of `stages` unit-mean exponentials.

    Evaluated through the recursion p_n(z) = int (1/x) exp(-z/x) p_{n-1}(x) dx,
    with the integral taken in log-x coordinates over a truncated domain.
    """
    if stages == 1:
        return np.exp(-z)
    u, w = _legendre_rule(
        order, math.log(_TRUNC_LO), math.log(_TRUNC_HI_PER_STAGE * stages)
    )
    x = np.exp(u)
    inner = w * _product_exp_pdf(stages - 1, x, order)
    return np.exp(-np.divide.outer(z, x)) @ inner


def _product_exp_cdf(stages: int, z: np.ndarray, order: int) -> np.ndarray:
    """CDF companion to `_product_exp_pdf`, same recursion one level up."""
    if stages == 1:
        return -np.expm1(-z)
    u, w = _legendre_rule(
        order, math.log(_TRUNC_LO), math.log(_TRUNC_HI_PER_STAGE * stages)
    )
    x = np.exp(u)
    inner = w * x * _product_exp_pdf(stages - 1, x, order)
    return -np.expm1(-np.divide.outer(z, x)) @ inner


def _adaptive(kernel, stages: int, z: np.ndarray, rel_tol: float) -> np.ndarray:
    coarse = kernel(stages, z, _QUAD_ORDER)
    fine = kernel(stages, z, 2 * _QUAD_ORDER)
    achieved = float(
        np.max(np.abs(fine - coarse) / np.maximum(np.abs(fine), 1e-12))
    )
    if achieved > rel_tol:
        raise QuadratureError(requested=rel_tol, achieved=achieved)
    return fine


def pdf(config: SourceConfig, intensity, rel_tol: float = 1e-6):
    """Probability density of the cascade output at the given intensity.

    Closed form for one stage; adaptive quadrature of the recursive
    mixture integral otherwise. The density diverges as intensity -> 0+
    for two or more stages, so intensity must be strictly positive.
    """
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity <= 0):
        raise ValueError("pdf requires intensity > 0")
    mu = config.mean_intensity
    z = intensity / mu
    if config.rg_count == 1:
        out = np.exp(-z) / mu
    else:
        out = _adaptive(_product_exp_pdf, config.rg_count, z, rel_tol) / mu
    return out if out.ndim else float(out)


def cdf(config: SourceConfig, intensity, rel_tol: float = 1e-6):
    """Cumulative distribution of the cascade output (numerically integrated)."""
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity < 0):
        raise ValueError("cdf requires intensity >= 0")
    z = intensity / config.mean_intensity
    if config.rg_count == 1:
        out = -np.expm1(-z)
    else:
        out = _adaptive(_product_exp_cdf, config.rg_count, z, rel_tol)
    return out if out.ndim else float(out)


def theoretical_g2_zero(rg_count: int) -> float:
    """Zero-delay second-order coherence of the N-stage cascade: 2^N."""
    if rg_count < 1:
        raise ValueError(f"rg_count must be >= 1, got {rg_count}")
    return float(2**rg_count)
