"""Fusion mask law, band schedules, endpoints, and confidence guidance."""

import numpy as np
import pytest

from ccid import (
    ConfidenceMap,
    FusionParams,
    ImagePlane,
    dct2,
    dct_fusion_mask,
    fuse,
    fuse_dct,
    fuse_dwt,
    fuse_dwt_confidence,
    fuse_dwt_tiled,
    region_weight,
)
from ccid.fusion import band_ranks, mask_scale, _band_weights
from ccid.transforms import dwt2_array

from conftest import make_rng, random_plane


def fusion_pair(rng, h=40, w=48):
    return random_plane(rng, h, w), random_plane(rng, h, w)


# ---------------------------------------------------------------------------
# Parameter validation
# ---------------------------------------------------------------------------

def test_params_validation():
    FusionParams(w=0.5)  # defaults are legal
    with pytest.raises(ValueError):
        FusionParams(w=-0.1)
    with pytest.raises(ValueError):
        FusionParams(w=1.1)
    with pytest.raises(ValueError):
        FusionParams(w=0.5, a=0.0)
    with pytest.raises(ValueError):
        FusionParams(w=0.5, eps=0.0)
    with pytest.raises(ValueError):
        FusionParams(w=0.5, t=1.0)
    with pytest.raises(ValueError):
        FusionParams(w=0.5, mode="fft")
    with pytest.raises(ValueError):
        FusionParams(w=0.5, dwt_schedule="high_first")


# ---------------------------------------------------------------------------
# Mask law
# ---------------------------------------------------------------------------

def test_mask_scale_half_weight():
    # Independent arithmetic: s = a (w - eps) / (1 - w + eps)
    # = 0.1 * 0.499 / 0.501 at w = 0.5.
    s = mask_scale(0.5, 0.1, 1e-3)
    assert abs(s - 0.1 * 0.499 / 0.501) < 1e-12
    assert abs(s - 0.0996008) < 1e-7


def test_mask_scale_clamps_tiny_weights():
    # Below w = eps the raw formula goes negative; the clamp keeps s > 0.
    assert mask_scale(0.0005, 0.1, 1e-3) == 1e-12


def test_mask_endpoints():
    p0 = FusionParams(w=0.0)
    p1 = FusionParams(w=1.0)
    assert np.all(dct_fusion_mask(16, 12, p0).values == 0.0)
    assert np.all(dct_fusion_mask(16, 12, p1).values == 1.0)


def test_mask_dc_is_one_for_interior_weights():
    for w in (0.01, 0.3, 0.5, 0.77, 0.99):
        mask = dct_fusion_mask(32, 32, FusionParams(w=w))
        assert mask.values[0, 0] == 1.0


def test_mask_value_at_half_weight():
    mask = dct_fusion_mask(32, 32, FusionParams(w=0.5)).values
    s = mask_scale(0.5, 0.1, 1e-3)
    fx = 5.0 / 31.0
    fy = 3.0 / 31.0
    assert abs(mask[3, 5] - np.exp(-(fx**2 + fy**2) / (2 * s))) < 1e-12


def test_mask_monotone_in_weight():
    # Non-decreasing in w at every coefficient, over the full grid of 101.
    weights = np.linspace(0.0, 1.0, 101)
    prev = dct_fusion_mask(32, 32, FusionParams(w=0.0)).values
    for w in weights[1:]:
        cur = dct_fusion_mask(32, 32, FusionParams(w=float(w))).values
        assert np.all(cur >= prev - 1e-15)
        prev = cur


def test_mask_radially_non_increasing():
    mask = dct_fusion_mask(24, 24, FusionParams(w=0.6)).values
    assert np.all(np.diff(mask, axis=0) <= 1e-15)
    assert np.all(np.diff(mask, axis=1) <= 1e-15)
    assert np.all((mask >= 0.0) & (mask <= 1.0))


def test_mask_handles_degenerate_single_column():
    mask = dct_fusion_mask(1, 8, FusionParams(w=0.5))
    assert mask.values.shape == (8, 1)
    assert mask.values[0, 0] == 1.0


# ---------------------------------------------------------------------------
# Endpoint identity for every engine
# ---------------------------------------------------------------------------

def _engines(conf):
    return [
        ("dct", lambda d, r, p: fuse_dct(d, r, p)),
        ("dwt_uniform", lambda d, r, p: fuse_dwt(d, r, FusionParams(w=p.w, dwt_schedule="uniform"))),
        ("dwt_low_first", lambda d, r, p: fuse_dwt(d, r, p)),
        ("dwt_tiled", lambda d, r, p: fuse_dwt_tiled(d, r, p)),
        ("dwt_conf", lambda d, r, p: fuse_dwt_confidence(d, r, conf, p)),
    ]


def test_endpoint_identity_all_engines(rng):
    for _ in range(5):
        deep, reliable = fusion_pair(rng)
        conf = ConfidenceMap(make_rng(11).random((5, 6)))
        for name, engine in _engines(conf):
            out0 = engine(deep, reliable, FusionParams(w=0.0))
            out1 = engine(deep, reliable, FusionParams(w=1.0))
            assert np.abs(out0.pixels - reliable.pixels).max() < 1e-6, name
            assert np.abs(out1.pixels - deep.pixels).max() < 1e-6, name


def test_fuse_equal_inputs_fixed_point(rng):
    img = random_plane(rng, 32, 32)
    for w in (0.0, 0.25, 0.5, 0.75, 1.0):
        out = fuse_dct(img, img, FusionParams(w=w))
        assert np.abs(out.pixels - img.pixels).max() < 1e-6
        out = fuse_dwt(img, img, FusionParams(w=w))
        assert np.abs(out.pixels - img.pixels).max() < 1e-6


# ---------------------------------------------------------------------------
# DCT fusion spectrum checks
# ---------------------------------------------------------------------------

def test_dct_fusion_low_weight_spectrum(rng):
    deep, reliable = fusion_pair(rng, 32, 32)
    params = FusionParams(w=0.1)
    fused = fuse_dct(deep, reliable, params)
    spec = dct2(fused).coeffs
    # DC comes from the deep image (mask is exactly 1 there).
    assert abs(spec[0, 0] - dct2(deep).coeffs[0, 0]) < 1e-9
    # The highest-frequency corner keeps the reliable value: the mask
    # there is far below 1e-4 at w = 0.1.
    mask = dct_fusion_mask(32, 32, params).values
    assert mask[-1, -1] < 1e-4
    assert abs(spec[-1, -1] - dct2(reliable).coeffs[-1, -1]) < 1e-6


def test_dct_fusion_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        fuse_dct(random_plane(rng, 16, 16), random_plane(rng, 16, 24), FusionParams(w=0.5))


# ---------------------------------------------------------------------------
# DWT band schedules
# ---------------------------------------------------------------------------

def test_uniform_schedule_is_alpha_blend(rng):
    deep, reliable = fusion_pair(rng, 64, 64)
    for w in (0.2, 0.5, 0.8):
        params = FusionParams(w=w, dwt_schedule="uniform")
        fused = fuse_dwt(deep, reliable, params)
        blend = w * deep.pixels + (1.0 - w) * reliable.pixels
        assert np.abs(fused.pixels - blend).max() < 1e-6


def test_band_ranks_ordering():
    ranks = band_ranks(3)
    assert ranks[0] == 0.0  # approximation
    assert ranks[1] == 1.0  # level 1 = finest detail
    assert ranks[2] == pytest.approx(2.0 / 3.0)
    assert ranks[3] == pytest.approx(1.0 / 3.0)


def test_low_first_weights_ordered_by_rank():
    params = FusionParams(w=0.4)
    weights = _band_weights(np.float64(0.4), params, 3)
    approx_w, finest, mid, coarsest = (float(np.asarray(v)) for v in weights)
    assert approx_w == 1.0
    assert coarsest > mid > finest  # low frequencies adopted first
    assert 0.0 < finest < 1.0


def test_low_first_weights_monotone_in_w():
    params = FusionParams(w=0.5)
    grid = np.linspace(0.0, 1.0, 51)
    stacked = [_band_weights(grid, params, 3)[b] for b in range(4)]
    for band in stacked:
        assert np.all(np.diff(band) >= -1e-15)
        assert band[0] == 0.0 and band[-1] == 1.0


def test_low_first_low_weight_band_content(rng):
    deep, reliable = fusion_pair(rng, 64, 64)
    params = FusionParams(w=0.1)
    fused = fuse_dwt(deep, reliable, params)
    levels = 4
    fa, fd = dwt2_array(fused.pixels, levels, "haar")
    da, _ = dwt2_array(deep.pixels, levels, "haar")
    _, rd = dwt2_array(reliable.pixels, levels, "haar")
    # Approximation comes from the deep image; the finest detail band
    # stays with the reliable image at this low weight.
    assert np.abs(fa - da).max() < 1e-9
    for fused_band, rel_band in zip(fd[0], rd[0]):
        assert np.abs(fused_band - rel_band).max() < 1e-6


def test_fuse_dwt_respects_levels_param(rng):
    deep, reliable = fusion_pair(rng, 16, 16)
    out = fuse_dwt(deep, reliable, FusionParams(w=0.5, levels=1))
    assert out.shape == (16, 16)
    with pytest.raises(ValueError):
        fuse_dwt(deep, reliable, FusionParams(w=0.5, levels=6))


# ---------------------------------------------------------------------------
# Region weight law
# ---------------------------------------------------------------------------

def test_region_weight_hand_computed_grid():
    # w * (1 + c - t) clamped to [0,1]; includes both clamp boundaries.
    cases = [
        (0.5, 0.8, 0.8, 0.5),
        (0.5, 0.9, 0.8, 0.55),
        (0.9, 1.0, 0.8, 1.0),
        (0.5, 0.0, 0.8, 0.1),
        (0.0, 0.5, 0.8, 0.0),
        (1.0, 0.8, 0.8, 1.0),
        (1.0, 0.0, 0.8, 0.2),
        (0.2, 0.1, 0.8, 0.06),
        (0.5, 1.0, 0.8, 0.6),
        (0.5, 0.3, 0.5, 0.4),
        (0.7, 0.95, 0.8, 0.805),
        (0.85, 1.0, 0.8, 1.0),
        (0.3, 0.2, 0.9, 0.09),
        (0.6, 0.45, 0.8, 0.39),
        (0.4, 0.75, 0.8, 0.38),
        (1.0, 1.0, 0.8, 1.0),
        (0.95, 0.9, 0.8, 1.0),
        (0.05, 0.05, 0.8, 0.0125),
        (0.25, 0.6, 0.2, 0.35),
        (0.1, 0.0, 0.95, 0.005),
    ]
    assert len(cases) == 20
    for w, c, t, expected in cases:
        assert abs(region_weight(w, c, t) - expected) < 1e-12, (w, c, t)


def test_region_weight_clamp_totality():
    g = make_rng(13)
    w = g.random(1000)
    c = g.random(1000)
    out = region_weight(w, c, 0.8)
    assert np.all((out >= 0.0) & (out <= 1.0))


def test_region_weight_at_threshold_is_identity():
    for w in np.linspace(0.0, 1.0, 11):
        assert region_weight(float(w), 0.8, 0.8) == pytest.approx(float(w), abs=1e-15)


# ---------------------------------------------------------------------------
# Confidence-guided fusion
# ---------------------------------------------------------------------------

def test_conf_at_threshold_equals_unguided(rng):
    deep, reliable = fusion_pair(rng)
    conf = ConfidenceMap(np.full((5, 6), 0.8))
    for schedule in ("uniform", "low_first"):
        params = FusionParams(w=0.37, dwt_schedule=schedule)
        guided = fuse_dwt_confidence(deep, reliable, conf, params)
        unguided = fuse_dwt_tiled(deep, reliable, params)
        assert np.abs(guided.pixels - unguided.pixels).max() < 1e-6


def test_conf_zero_weight_ignores_confidence(rng):
    deep, reliable = fusion_pair(rng)
    conf = ConfidenceMap(make_rng(15).random((5, 6)))
    out = fuse_dwt_confidence(deep, reliable, conf, FusionParams(w=0.0))
    assert np.array_equal(out.pixels, reliable.pixels)


def test_conf_monotone_toward_deep(rng):
    # Raising one region's confidence must not move that tile away from
    # the deep image.
    deep, reliable = fusion_pair(rng, 24, 24)
    base = np.full((3, 3), 0.5)
    for schedule in ("uniform", "low_first"):
        params = FusionParams(w=0.5, dwt_schedule=schedule)
        prev = None
        for c in np.linspace(0.5, 1.0, 6):
            grid = base.copy()
            grid[1, 1] = c
            out = fuse_dwt_confidence(deep, reliable, ConfidenceMap(grid), params)
            tile = out.pixels[8:16, 8:16]
            dist = np.sqrt(((tile - deep.pixels[8:16, 8:16]) ** 2).sum())
            if prev is not None:
                assert dist <= prev + 1e-9
            prev = dist


def test_conf_grid_mismatch_rejected(rng):
    deep, reliable = fusion_pair(rng, 24, 24)
    with pytest.raises(ValueError):
        fuse_dwt_confidence(deep, reliable, ConfidenceMap(np.full((2, 3), 0.5)), FusionParams(w=0.5))


def test_conf_requires_divisible_dims(rng):
    deep = random_plane(rng, 20, 24)
    reliable = random_plane(rng, 20, 24)
    with pytest.raises(ValueError):
        fuse_dwt_confidence(deep, reliable, ConfidenceMap(np.full((2, 3), 0.5)), FusionParams(w=0.5))


# ---------------------------------------------------------------------------
# Dispatch and determinism
# ---------------------------------------------------------------------------

def test_fuse_dispatch(rng):
    deep, reliable = fusion_pair(rng)
    conf = ConfidenceMap(make_rng(21).random((5, 6)))
    a = fuse(deep, reliable, FusionParams(w=0.5, mode="dct"))
    assert np.array_equal(a.pixels, fuse_dct(deep, reliable, FusionParams(w=0.5, mode="dct")).pixels)
    b = fuse(deep, reliable, FusionParams(w=0.5, mode="dwt_global"))
    assert np.array_equal(
        b.pixels, fuse_dwt(deep, reliable, FusionParams(w=0.5, mode="dwt_global")).pixels
    )
    c = fuse(deep, reliable, FusionParams(w=0.5, mode="dwt_confidence"), conf)
    assert np.array_equal(
        c.pixels,
        fuse_dwt_confidence(deep, reliable, conf, FusionParams(w=0.5, mode="dwt_confidence")).pixels,
    )
    with pytest.raises(ValueError):
        fuse(deep, reliable, FusionParams(w=0.5, mode="dwt_confidence"))


def test_fusion_deterministic(rng):
    deep, reliable = fusion_pair(rng)
    conf = ConfidenceMap(make_rng(23).random((5, 6)))
    params = FusionParams(w=0.43)
    for engine in (fuse_dct, fuse_dwt, fuse_dwt_tiled):
        assert np.array_equal(
            engine(deep, reliable, params).pixels, engine(deep, reliable, params).pixels
        )
    assert np.array_equal(
        fuse_dwt_confidence(deep, reliable, conf, params).pixels,
        fuse_dwt_confidence(deep, reliable, conf, params).pixels,
    )
