"""Transform oracles: naive DCT double-sum, hand-rolled Haar, round-trips."""

import math

import numpy as np
import pytest

from ccid import ImagePlane, DctSpectrum, dct2, idct2, dwt2, idwt2, tile8, stitch8
from ccid.transforms import (
    TILE,
    TileGrid,
    WaveletPyramid,
    as_tile_stack,
    dwt2_array,
    from_tile_stack,
    idwt2_array,
)

from conftest import make_rng, random_plane


def naive_dct2(pixels: np.ndarray) -> np.ndarray:
    """Direct O(N^4) orthonormal DCT-II double summation."""
    h, w = pixels.shape
    out = np.zeros((h, w))
    for u in range(h):
        for v in range(w):
            total = 0.0
            for i in range(h):
                for j in range(w):
                    total += (
                        pixels[i, j]
                        * math.cos(math.pi * (2 * i + 1) * u / (2 * h))
                        * math.cos(math.pi * (2 * j + 1) * v / (2 * w))
                    )
            au = math.sqrt((1 if u == 0 else 2) / h)
            av = math.sqrt((1 if v == 0 else 2) / w)
            out[u, v] = au * av * total
    return out


def haar_level1_bands(pixels: np.ndarray):
    """Hand-rolled one-level 2x2 Haar: block sums and differences over 2."""
    p00 = pixels[0::2, 0::2]
    p01 = pixels[0::2, 1::2]
    p10 = pixels[1::2, 0::2]
    p11 = pixels[1::2, 1::2]
    ll = (p00 + p01 + p10 + p11) / 2.0
    h_band = (p00 + p01 - p10 - p11) / 2.0
    v_band = (p00 - p01 + p10 - p11) / 2.0
    d_band = (p00 - p01 - p10 + p11) / 2.0
    return ll, h_band, v_band, d_band


# ---------------------------------------------------------------------------
# DCT
# ---------------------------------------------------------------------------

def test_dct_constant_image():
    spec = dct2(ImagePlane(np.ones((8, 8))))
    assert abs(spec.coeffs[0, 0] - 8.0) < 1e-12
    rest = spec.coeffs.copy()
    rest[0, 0] = 0.0
    assert np.abs(rest).max() < 1e-12


def test_dct_matches_naive_oracle(rng):
    for _ in range(5):
        img = random_plane(rng, 8, 8)
        assert np.abs(dct2(img).coeffs - naive_dct2(img.pixels)).max() < 1e-9


def test_dct_naive_oracle_rectangular(rng):
    img = random_plane(rng, 4, 8)
    assert np.abs(dct2(img).coeffs - naive_dct2(img.pixels)).max() < 1e-9


def test_idct_unit_impulse_at_dc():
    coeffs = np.zeros((8, 8))
    coeffs[0, 0] = 1.0
    img = idct2(DctSpectrum(coeffs))
    assert np.abs(img.pixels - 1.0 / 8.0).max() < 1e-12


def test_idct_zero_spectrum():
    img = idct2(DctSpectrum(np.zeros((8, 8))))
    assert np.all(img.pixels == 0.0)


def test_dct_roundtrips(rng):
    for _ in range(20):
        img = random_plane(rng, 64, 64)
        assert np.abs(idct2(dct2(img)).pixels - img.pixels).max() < 1e-6
        spec = dct2(img)
        again = dct2(idct2(spec))
        assert np.abs(again.coeffs - spec.coeffs).max() < 1e-6


def test_dct_parseval(rng):
    for _ in range(5):
        img = random_plane(rng, 32, 48)
        pix_energy = (img.pixels**2).sum()
        coef_energy = (dct2(img).coeffs ** 2).sum()
        assert abs(coef_energy - pix_energy) / pix_energy < 1e-6


def test_dct_linearity(rng):
    for _ in range(5):
        x = random_plane(rng, 24, 24)
        y = random_plane(rng, 24, 24)
        alpha, beta = rng.random(2) * 4.0 - 2.0
        lhs = dct2(ImagePlane(alpha * x.pixels + beta * y.pixels)).coeffs
        rhs = alpha * dct2(x).coeffs + beta * dct2(y).coeffs
        assert np.abs(lhs - rhs).max() < 1e-6


# ---------------------------------------------------------------------------
# DWT
# ---------------------------------------------------------------------------

def test_haar_level1_matches_hand_oracle(rng):
    for _ in range(5):
        img = random_plane(rng, 16, 24)
        ll, h_ref, v_ref, d_ref = haar_level1_bands(img.pixels)
        pyr = dwt2(img, 1, "haar")
        h_band, v_band, d_band = pyr.details[0]
        assert np.abs(pyr.approximation - ll).max() < 1e-9
        assert np.abs(h_band - h_ref).max() < 1e-9
        assert np.abs(v_band - v_ref).max() < 1e-9
        assert np.abs(d_band - d_ref).max() < 1e-9


def test_haar_constant_block():
    c = 3.5
    pyr = dwt2(ImagePlane(np.full((2, 2), c)), 1, "haar")
    assert abs(pyr.approximation[0, 0] - 2.0 * c) < 1e-12
    assert all(abs(b[0, 0]) < 1e-12 for b in pyr.details[0])


def test_dwt_8x8_three_levels_shape(rng):
    pyr = dwt2(random_plane(rng, 8, 8), 3, "haar")
    assert pyr.approximation.shape == (1, 1)
    assert pyr.details[0][0].shape == (4, 4)  # finest first
    assert pyr.details[1][0].shape == (2, 2)
    assert pyr.details[2][0].shape == (1, 1)


@pytest.mark.parametrize("wavelet", ["haar", "db2"])
def test_dwt_roundtrips(rng, wavelet):
    for _ in range(20):
        img = random_plane(rng, 64, 64)
        pyr = dwt2(img, 3, wavelet)
        assert np.abs(idwt2(pyr).pixels - img.pixels).max() < 1e-6


@pytest.mark.parametrize("wavelet", ["haar", "db2"])
def test_dwt_roundtrip_odd_sizes(rng, wavelet):
    for shape in [(33, 47), (17, 9), (11, 8)]:
        img = random_plane(rng, *shape)
        pyr = dwt2(img, 2, wavelet)
        assert np.abs(idwt2(pyr).pixels - img.pixels).max() < 1e-6


@pytest.mark.parametrize("wavelet", ["haar", "db2"])
def test_dwt_energy_preserved(rng, wavelet):
    # Periodized orthonormal filters preserve energy on even sizes.
    img = random_plane(rng, 64, 64)
    pyr = dwt2(img, 3, wavelet)
    energy = (pyr.approximation**2).sum() + sum(
        (band**2).sum() for level in pyr.details for band in level
    )
    pix_energy = (img.pixels**2).sum()
    assert abs(energy - pix_energy) / pix_energy < 1e-6


def test_dwt_linearity(rng):
    x = random_plane(rng, 32, 32)
    y = random_plane(rng, 32, 32)
    alpha, beta = 1.7, -0.6
    combo = ImagePlane(alpha * x.pixels + beta * y.pixels)
    pc = dwt2(combo, 2, "db2")
    px = dwt2(x, 2, "db2")
    py = dwt2(y, 2, "db2")
    assert np.abs(pc.approximation - (alpha * px.approximation + beta * py.approximation)).max() < 1e-6
    for lc, lx, ly in zip(pc.details, px.details, py.details):
        for bc, bx, by in zip(lc, lx, ly):
            assert np.abs(bc - (alpha * bx + beta * by)).max() < 1e-6


def test_dwt_band_linearity_to_image(rng):
    # Band-wise sum of two pyramids inverts to the image sum.
    x = random_plane(rng, 32, 32)
    y = random_plane(rng, 32, 32)
    px = dwt2(x, 2, "haar")
    py = dwt2(y, 2, "haar")
    approx = px.approximation + py.approximation
    details = [
        tuple(bx + by for bx, by in zip(lx, ly)) for lx, ly in zip(px.details, py.details)
    ]
    merged = idwt2_array(approx, details, "haar", 32, 32)
    assert np.abs(merged - (x.pixels + y.pixels)).max() < 1e-6


def test_dwt_zero_pyramid_inverts_to_zero():
    approx = np.zeros((8, 8))
    details = [(np.zeros((16, 16)),) * 3, (np.zeros((8, 8)),) * 3]
    out = idwt2_array(approx, details, "haar", 32, 32)
    assert np.all(out == 0.0)


def test_dwt_level_validation(rng):
    img = random_plane(rng, 16, 16)
    with pytest.raises(ValueError):
        dwt2(img, 0, "haar")
    with pytest.raises(ValueError):
        dwt2(img, 5, "haar")  # 2^5 = 32 > 16


def test_dwt_unknown_wavelet(rng):
    with pytest.raises(ValueError):
        dwt2(random_plane(rng, 8, 8), 1, "sym4")


def test_pyramid_consistency_check(rng):
    img = random_plane(rng, 16, 16)
    pyr = dwt2(img, 2, "haar")
    bad = WaveletPyramid(
        wavelet="haar",
        levels=2,
        height=16,
        width=16,
        approximation=pyr.approximation,
        details=(pyr.details[0], (np.zeros((3, 3)),) * 3),
    )
    with pytest.raises(ValueError):
        idwt2(bad)


def test_db2_filter_orthonormality():
    from ccid.transforms import _filters

    lo, hi = _filters("db2")
    assert abs((lo**2).sum() - 1.0) < 1e-12
    assert abs(lo.sum() - math.sqrt(2.0)) < 1e-12
    assert abs((lo[:2] * lo[2:]).sum()) < 1e-12  # shift-by-2 orthogonality
    assert abs((lo * hi).sum()) < 1e-12


# ---------------------------------------------------------------------------
# Batched tile stacks
# ---------------------------------------------------------------------------

def test_batched_dwt_matches_per_tile(rng):
    stack = rng.random((3, 4, 8, 8)) * 255.0
    approx, details = dwt2_array(stack, 3, "haar")
    for i in range(3):
        for j in range(4):
            pyr = dwt2(ImagePlane(stack[i, j]), 3, "haar")
            assert np.abs(approx[i, j] - pyr.approximation).max() < 1e-12
            for level, (h_b, v_b, d_b) in enumerate(details):
                ref_h, ref_v, ref_d = pyr.details[level]
                assert np.abs(h_b[i, j] - ref_h).max() < 1e-12
                assert np.abs(v_b[i, j] - ref_v).max() < 1e-12
                assert np.abs(d_b[i, j] - ref_d).max() < 1e-12


def test_tile_stack_roundtrip(rng):
    img = random_plane(rng, 24, 40)
    stack = as_tile_stack(img)
    assert stack.shape == (3, 5, 8, 8)
    back = from_tile_stack(stack)
    assert np.array_equal(back.pixels, img.pixels)


# ---------------------------------------------------------------------------
# Tiling
# ---------------------------------------------------------------------------

def test_tile8_16x16_gives_four_tiles(rng):
    img = random_plane(rng, 16, 16)
    grid = tile8(img)
    assert (grid.grid_height, grid.grid_width) == (2, 2)
    assert len(grid.tiles) == 4
    assert np.array_equal(grid.tiles[0].pixels, img.pixels[:8, :8])
    assert np.array_equal(grid.tiles[1].pixels, img.pixels[:8, 8:])
    assert np.array_equal(stitch8(grid).pixels, img.pixels)


def test_tile8_single_tile(rng):
    img = random_plane(rng, 8, 8)
    grid = tile8(img)
    assert len(grid.tiles) == 1
    assert np.array_equal(grid.tiles[0].pixels, img.pixels)


def test_tile8_rejects_ragged(rng):
    with pytest.raises(ValueError):
        tile8(random_plane(rng, 12, 16))


def test_tilegrid_validates_tiles(rng):
    good = tile8(random_plane(rng, 16, 16))
    with pytest.raises(ValueError):
        TileGrid(grid_height=2, grid_width=2, tiles=good.tiles[:3])
    with pytest.raises(ValueError):
        TileGrid(grid_height=1, grid_width=1, tiles=(random_plane(rng, 4, 4),))


def test_tile_values_bit_exact(rng):
    img = random_plane(rng, 16, 24)
    grid = tile8(img)
    for i in range(grid.grid_height):
        for j in range(grid.grid_width):
            tile = grid.tiles[i * grid.grid_width + j]
            assert np.array_equal(tile.pixels, img.pixels[i * 8 : i * 8 + 8, j * 8 : j * 8 + 8])
    assert TILE == 8
