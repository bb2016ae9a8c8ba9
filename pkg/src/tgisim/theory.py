"""Theoretical predictions for the retrieved image.

Two routes: numerical quadrature of the correlation kernel (a product of
1 + sinc^2 factors, one per cascade stage) against the object profile, and
an independent closed form valid when intensities in different time bins
are uncorrelated (white noise in time). The closed form follows in two
lines from the correlation integral: with <I(t2)I(t1)> = <I>^2 for t2 != t1
and <I^2> = 2^N <I>^2 at t2 = t1, the integral splits into a flat term
proportional to sum(O) and a single-bin term (2^N - 1) O(t2), giving
g2(t) = 1 + (2^N - 1) O(t) / sum(O) after background normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import TemporalObject

__all__ = [
    "BandwidthSet",
    "TheoryCurve",
    "g2_kernel",
    "theoretical_image",
    "white_noise_image",
    "predicted_visibility",
    "bandwidths_for_bin_width",
]


@dataclass(frozen=True)
class BandwidthSet:
    """Angular-frequency bandwidths of the cascade stages (rad per time unit)."""

    bandwidths: np.ndarray

    def __post_init__(self):
        bw = np.atleast_1d(np.asarray(self.bandwidths, dtype=float))
        bw.setflags(write=False)
        object.__setattr__(self, "bandwidths", bw)
        if bw.size < 1 or np.any(bw <= 0):
            raise ValueError("bandwidths must be a nonempty list of positive reals")

    @property
    def rg_count(self) -> int:
        return self.bandwidths.size


@dataclass(frozen=True)
class TheoryCurve:
    g2: np.ndarray
    provenance: dict


def _sinc(x: np.ndarray) -> np.ndarray:
    # sin(x)/x with sinc(0) = 1; np.sinc uses the normalized convention.
    return np.sinc(np.asarray(x) / np.pi)


def g2_kernel(tau, bands: BandwidthSet):
    """Second-order correlation vs time difference: prod_j [1 + sinc^2(dw_j tau / 2)]."""
    tau = np.asarray(tau, dtype=float)
    arg = 0.5 * np.multiply.outer(tau, bands.bandwidths)
    out = np.prod(1.0 + _sinc(arg) ** 2, axis=-1)
    return out if out.ndim else float(out)


def bandwidths_for_bin_width(rg_count: int, bin_width: float = 1.0) -> BandwidthSet:
    """Equal bandwidths whose single-stage sinc^2 FWHM is one time bin.

    sinc^2(x) falls to 1/2 at x ~ 1.39156, so dw = 4 * 1.39156 / bin_width.
    """
    if rg_count < 1:
        raise ValueError(f"rg_count must be >= 1, got {rg_count}")
    half_point = 1.39155737825151
    return BandwidthSet(np.full(rg_count, 4.0 * half_point / bin_width))


def _image_on_grid(
    obj: TemporalObject, bands: BandwidthSet, n_sub: int, periodic: bool
) -> np.ndarray:
    period = float(obj.period_bins)
    h = 1.0 / n_sub
    # Midpoint rule over one period; the object is piecewise constant per bin.
    t1 = (np.arange(obj.period_bins * n_sub) + 0.5) * h
    o1 = np.repeat(obj.amplitude, n_sub)
    t2 = np.arange(obj.period_bins) + 0.5
    tau = t2[:, None] - t1[None, :]
    if periodic:
        tau = (tau + period / 2.0) % period - period / 2.0
    return (g2_kernel(tau, bands) * o1[None, :]).sum(axis=1) * h


def theoretical_image(
    obj: TemporalObject,
    bands: BandwidthSet,
    quadrature_step: float = 1.0,
    periodic: bool = True,
) -> TheoryCurve:
    """Quadrature of the kernel-object correlation integral, background-normalized.

    The curve is divided by sum(O) so bins far from every slit sit at 1.
    The reported error estimate compares the requested step with step/2.

    The default step of one bin samples the kernel at bin-center differences,
    the discrete analogue of the bin-resolved simulation (the same-bin term is
    picked up at tau = 0 exactly). Use a finer step only when the kernel is
    wide enough to be resolved by it.
    """
    if obj.object_sum == 0:
        raise ValueError("object transmits nothing; nothing to normalize against")
    n_sub = round(1.0 / quadrature_step)
    if n_sub < 1 or abs(n_sub * quadrature_step - 1.0) > 1e-9:
        raise ValueError(
            f"quadrature_step {quadrature_step} must divide the bin width evenly"
        )
    coarse = _image_on_grid(obj, bands, n_sub, periodic)
    fine = _image_on_grid(obj, bands, 2 * n_sub, periodic)
    g2 = coarse / obj.object_sum
    err = float(np.max(np.abs(fine - coarse))) / obj.object_sum
    return TheoryCurve(
        g2=g2,
        provenance={
            "kind": "kernel_quadrature",
            "bandwidths": bands.bandwidths.tolist(),
            "quadrature_step": quadrature_step,
            "periodic": periodic,
            "error_estimate": err,
        },
    )


def white_noise_image(obj: TemporalObject, rg_count: int) -> TheoryCurve:
    """Closed-form image for bin-to-bin uncorrelated light: 1 + (2^N - 1) O / sum(O)."""
    if rg_count < 1:
        raise ValueError(f"rg_count must be >= 1, got {rg_count}")
    if obj.object_sum == 0:
        raise ValueError("object transmits nothing; image undefined")
    g2 = 1.0 + (2.0**rg_count - 1.0) * obj.amplitude / obj.object_sum
    return TheoryCurve(
        g2=g2, provenance={"kind": "white_noise", "rg_count": rg_count}
    )


def predicted_visibility(obj: TemporalObject, rg_count: int, peak_bins) -> float:
    """Visibility of the closed-form image at the given peak bins.

    V = d / (2 + d) with d = (2^N - 1) O_peak / sum(O).
    """
    peak_bins = np.asarray(list(peak_bins), dtype=int)
    if peak_bins.size == 0:
        raise ValueError("peak_bins must be nonempty")
    amps = obj.amplitude[peak_bins]
    if not np.all(amps == amps[0]):
        raise ValueError("peak_bins mix different object amplitudes")
    delta = (2.0**rg_count - 1.0) * amps[0] / obj.object_sum
    return delta / (2.0 + delta)
