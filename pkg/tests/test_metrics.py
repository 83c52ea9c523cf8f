"""PSNR and SSIM oracles."""

import csv
import math

import numpy as np
import pytest

from ccid import ImagePlane, MetricReport, compare, compare_8bit, psnr, ssim
from ccid.metrics import write_metrics_csv

from conftest import make_rng, random_plane


# ---------------------------------------------------------------------------
# PSNR
# ---------------------------------------------------------------------------

def test_psnr_identical_is_infinite(rng):
    img = random_plane(rng, 16, 16)
    assert psnr(img, img) == math.inf


def test_psnr_closed_form_offsets(rng):
    img = random_plane(rng, 32, 32)
    # Constant offset d gives MSE = d^2, so PSNR = 20 log10(255 / d).
    for offset, expected in [(25.5, 20.0), (2.55, 40.0)]:
        shifted = ImagePlane(img.pixels + offset)
        assert abs(psnr(img, shifted) - expected) < 1e-9


def test_psnr_symmetry(rng):
    for _ in range(10):
        a = random_plane(rng, 16, 24)
        b = random_plane(rng, 16, 24)
        assert psnr(a, b) == psnr(b, a)


def test_psnr_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        psnr(random_plane(rng, 8, 8), random_plane(rng, 8, 9))


def test_psnr_infinite_iff_identical(rng):
    a = random_plane(rng, 12, 12)
    b = ImagePlane(a.pixels + 1e-9)
    assert psnr(a, b) != math.inf


# ---------------------------------------------------------------------------
# SSIM
# ---------------------------------------------------------------------------

def test_ssim_self_similarity(rng):
    for _ in range(5):
        img = random_plane(rng, 16, 32)
        assert ssim(img, img) == 1.0


def test_ssim_constant_images_closed_form():
    # For constant images all variances vanish: SSIM reduces to the
    # luminance term (2 mx my + c1) / (mx^2 + my^2 + c1) times c2/c2 = 1.
    a = ImagePlane(np.full((16, 16), 100.0))
    b = ImagePlane(np.full((16, 16), 150.0))
    c1 = (0.01 * 255.0) ** 2
    expected = (2.0 * 100.0 * 150.0 + c1) / (100.0**2 + 150.0**2 + c1)
    assert abs(ssim(a, b) - expected) < 1e-12


def test_ssim_independent_noise_is_low():
    g1 = make_rng(901)
    g2 = make_rng(902)
    a = ImagePlane(g1.random((256, 256)) * 255.0)
    b = ImagePlane(g2.random((256, 256)) * 255.0)
    assert ssim(a, b) < 0.05


def test_ssim_requires_min_size(rng):
    with pytest.raises(ValueError):
        ssim(random_plane(rng, 10, 16), random_plane(rng, 10, 16))


def test_ssim_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        ssim(random_plane(rng, 16, 16), random_plane(rng, 16, 17))


def test_ssim_in_range(rng):
    for _ in range(10):
        a = random_plane(rng, 20, 20)
        b = random_plane(rng, 20, 20)
        s = ssim(a, b)
        assert -1.0 <= s <= 1.0


def test_ssim_matches_reference_implementation(rng):
    skimage_metrics = pytest.importorskip("skimage.metrics")
    for _ in range(3):
        a = random_plane(rng, 64, 64)
        b = ImagePlane(a.pixels + make_rng(17).normal(0, 20, (64, 64)))
        ours = ssim(a, b)
        theirs = skimage_metrics.structural_similarity(
            a.pixels,
            b.pixels,
            gaussian_weights=True,
            sigma=1.5,
            use_sample_covariance=False,
            data_range=255.0,
        )
        assert abs(ours - theirs) < 1e-7


# ---------------------------------------------------------------------------
# Reports and CSV export
# ---------------------------------------------------------------------------

def test_compare_returns_both_metrics(rng):
    a = random_plane(rng, 16, 16)
    b = ImagePlane(a.pixels + 2.55)
    report = compare(a, b)
    assert isinstance(report, MetricReport)
    assert abs(report.psnr_db - 40.0) < 1e-9
    assert report.ssim == ssim(a, b)


def test_compare_8bit_quantizes_candidate(rng):
    a = ImagePlane(np.floor(random_plane(rng, 16, 16).pixels))
    b = ImagePlane(a.pixels + 0.2)  # rounds back onto a exactly
    report = compare_8bit(a, b)
    assert report.psnr_db == math.inf
    assert report.ssim == 1.0


def test_metrics_csv_roundtrip(tmp_path):
    rows = [("img1", 20.0, 0.5), ("img2", math.inf, 1.0)]
    path = tmp_path / "metrics.csv"
    write_metrics_csv(path, rows)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        parsed = [(name, float(p), float(s)) for name, p, s in reader]
    assert header == ["image", "psnr_db", "ssim"]
    assert parsed[0] == ("img1", 20.0, 0.5)
    assert parsed[1][1] == math.inf
