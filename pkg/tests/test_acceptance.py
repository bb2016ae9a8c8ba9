"""Acceptance battery.

One test per exit criterion; each prints a PASS line once its assertions
hold. Expensive simulations are shared through session fixtures.
"""

import filecmp
import time

import numpy as np
import pytest

from tgisim import (
    SourceConfig,
    StudyConfig,
    default_double_slit,
    normalize,
    predicted_visibility,
    sample_intensities,
    sd_vs_n_study,
    simulate,
    visibility_across_seeds,
    white_noise_image,
)
from tgisim.analysis import default_bin_sets
from tgisim.imaging import SimulationConfig
from tgisim.cli import main
from tgisim.theory import BandwidthSet, g2_kernel

PERIODS = 100_000
SEEDS = range(10)


def report(criterion, detail):
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


@pytest.fixture(scope="session")
def visibility_by_stage():
    """Mean visibility over 10 seeds for N = 1..6, with per-N wall time."""
    obj = default_double_slit()
    peak, back = default_bin_sets(obj)
    out = {}
    for rg_count in range(1, 7):
        start = time.perf_counter()
        res = visibility_across_seeds(
            SourceConfig(rg_count), obj, PERIODS, SEEDS, peak, back
        )
        out[rg_count] = (res, time.perf_counter() - start)
    return out


@pytest.fixture(scope="session")
def coherence_study():
    """n = 2e4, 50 runs per stage count."""
    return sd_vs_n_study(
        StudyConfig(rg_counts=range(1, 7), samples_per_run=[20000], runs=50, seed=11)
    )


def test_criterion_1_visibility_thermal(visibility_by_stage):
    res, elapsed = visibility_by_stage[1]
    assert 0.042 <= res.visibility <= 0.052
    assert elapsed < 10.0
    report(1, f"visibility N=1 {res.visibility:.4f}, {elapsed:.1f}s")


def test_criterion_2_visibility_six_stages(visibility_by_stage):
    res, elapsed = visibility_by_stage[6]
    assert 0.67 <= res.visibility <= 0.83
    assert elapsed < 10.0
    report(2, f"visibility N=6 {res.visibility:.3f}, {elapsed:.1f}s")


def test_criterion_3_visibility_monotone(visibility_by_stage):
    obj = default_double_slit()
    peak, _ = default_bin_sets(obj)
    values = [visibility_by_stage[n][0].visibility for n in range(1, 7)]
    assert all(a < b for a, b in zip(values, values[1:]))
    for rg_count in range(1, 5):
        res, _ = visibility_by_stage[rg_count]
        predicted = predicted_visibility(obj, rg_count, peak)
        assert abs(res.visibility - predicted) < 3 * res.spread
    report(3, "visibility strictly increasing, N<=4 within 3 seed SDs of theory")


def test_criterion_4_image_oracle_equivalence():
    obj = default_double_slit()
    fractions = []
    for rg_count in range(1, 5):
        image = normalize(
            simulate(SimulationConfig(SourceConfig(rg_count), obj, PERIODS, seed=40 + rg_count))
        )
        prediction = white_noise_image(obj, rg_count).g2
        within = np.abs(image.g2 - prediction) < 3 * image.stderr
        fractions.append(within.mean())
        assert within.mean() >= 0.95
    report(4, f"bin fractions within 3 SE: {[f'{f:.2f}' for f in fractions]}")


def test_criterion_5_g2_zero_scaling(coherence_study):
    for row in coherence_study.rows:
        rg_count, _, mean_g2, sd_g2, runs, theory_g2 = row
        if rg_count <= 3:
            assert abs(mean_g2 - theory_g2) < 3 * sd_g2 / np.sqrt(runs)
        else:
            assert abs(mean_g2 - theory_g2) < 3 * sd_g2
    wide = sd_vs_n_study(StudyConfig([6], [20000], runs=1000, seed=12))
    mean_g2 = wide.rows[0][2]
    assert abs(mean_g2 - 64.0) / 64.0 < 0.20
    report(5, f"2^N inside error bands; N=6 mean over 1000 runs {mean_g2:.1f}")


def test_criterion_6_sd_growth(coherence_study):
    sds = [row[3] for row in coherence_study.rows]
    assert all(a < b for a, b in zip(sds, sds[1:]))
    report(6, f"SD grows {sds[0]:.3f} -> {sds[-1]:.1f}")


def test_criterion_7_sd_vs_sample_count():
    start = time.perf_counter()
    counts = [100, 200, 500, 1000, 2000, 5000, 10000, 20000]
    low = sd_vs_n_study(StudyConfig([1, 2], counts, runs=1000, seed=13))
    for rg_count in (1, 2):
        sds = [low.cell(rg_count, c)[3] for c in counts]
        assert all(a > b for a, b in zip(sds, sds[1:]))
    high = sd_vs_n_study(StudyConfig([5, 6], [100, 5000], runs=1000, seed=14))
    for rg_count in (5, 6):
        assert high.cell(rg_count, 5000)[3] > high.cell(rg_count, 100)[3]
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    report(7, f"SD monotone down for N=1,2 and up (100->5000) for N=5,6; {elapsed:.0f}s")


def test_criterion_8_histogram_concentration():
    from tgisim import histogram, sample_block

    first_bins = []
    for rg_count in range(1, 7):
        block = sample_block(SourceConfig(rg_count, 5000.0), 50000, seed=80 + rg_count)
        first_bins.append(float(histogram(block).probabilities[0]))
    assert first_bins[5] >= 0.9
    assert all(a < b for a, b in zip(first_bins, first_bins[1:]))
    report(8, f"first-bin probabilities {[f'{p:.3f}' for p in first_bins]}")


def test_criterion_9_moment_invariants():
    for rg_count in range(1, 7):
        draws = sample_intensities(
            SourceConfig(rg_count, 3.0), 10**6, np.random.default_rng(90 + rg_count)
        )
        sem = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - 3.0) < 3 * sem
    base = sample_intensities(SourceConfig(3), 10**5, np.random.default_rng(99))
    ratio = lambda x: (x**2).mean() / x.mean() ** 2
    assert ratio(base * 1e4) == pytest.approx(ratio(base), rel=1e-12)
    report(9, "means at mu within 3 SEM for N=1..6; <I^2>/<I>^2 scale-invariant")


def test_criterion_10_kernel_properties():
    taus = np.linspace(-40.0, 40.0, 4001)
    for rg_count in range(1, 7):
        bands = BandwidthSet(np.linspace(0.7, 1.9, rg_count))
        assert g2_kernel(0.0, bands) == 2.0**rg_count
        values = g2_kernel(taus, bands)
        np.testing.assert_allclose(values, values[::-1], rtol=1e-12)
        assert np.all(values >= 1.0)
        assert np.all(values <= 2.0**rg_count)
    report(10, "kernel(0)=2^N exact, symmetric, bounded in [1, 2^N]")


def test_criterion_11_reproduce_determinism(tmp_path):
    dirs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        main(
            [
                "reproduce",
                "--seed",
                "21",
                "--workers",
                "4",
                "--out-dir",
                str(out_dir),
                "--periods",
                "5000",
                "--image-seeds",
                "3",
                "--study-runs",
                "10",
                "--sd-runs",
                "20",
            ]
        )
        dirs.append(out_dir)
    files = sorted(p.name for p in dirs[0].iterdir())
    assert files == sorted(p.name for p in dirs[1].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], files, shallow=False)
    assert mismatch == [] and errors == []
    report(11, f"{len(files)} files byte-identical across invocations")
