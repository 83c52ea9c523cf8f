#!/usr/bin/env python3
"""Regenerate the checked-in fixture images.

Every image is a pure function of pixel coordinates (plus one fixed-seed
noise texture), so rerunning this script reproduces the committed files
byte for byte. The std set mixes smooth regions, hard edges, and periodic
texture; the textures set is denser, for domain-shift experiments.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from ccid import ImagePlane, save_image

SIZE = 128


def _grid(size: int = SIZE) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    return yy, xx


def shapes() -> np.ndarray:
    yy, xx = _grid()
    img = 60.0 + 120.0 * xx / SIZE
    disk = (xx - 44) ** 2 + (yy - 42) ** 2 < 26**2
    img[disk] = 215.0
    img[80:112, 20:72] = 35.0
    band = np.abs(yy - (0.35 * xx + 20.0)) < 2.5
    img[band] = 240.0
    return img


def checker() -> np.ndarray:
    yy, xx = _grid()
    coarse = ((xx // 16 + yy // 16) % 2) * 130.0 + 50.0
    fine = ((xx // 4 + yy // 4) % 2) * 60.0
    quadrant = (xx >= 64).astype(np.float64)
    img = coarse + fine * quadrant
    vignette = 1.0 - 0.25 * (((xx - 64) ** 2 + (yy - 64) ** 2) / (64.0**2))
    return img * vignette


def waves() -> np.ndarray:
    yy, xx = _grid()
    img = (
        128.0
        + 45.0 * np.sin(2 * np.pi * (0.055 * xx + 0.020 * yy))
        + 30.0 * np.sin(2 * np.pi * (0.012 * xx - 0.065 * yy) + 0.7)
        + 18.0 * np.sin(2 * np.pi * 0.15 * (xx + yy) / np.sqrt(2.0))
    )
    return img


def blobs() -> np.ndarray:
    yy, xx = _grid()
    img = np.full((SIZE, SIZE), 30.0)
    for cx, cy, amp, width in [
        (30, 35, 160.0, 18.0),
        (92, 40, 120.0, 14.0),
        (64, 95, 190.0, 24.0),
        (110, 105, 90.0, 10.0),
    ]:
        img += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * width**2))
    return img


def bars() -> np.ndarray:
    yy, xx = _grid()
    img = np.full((SIZE, SIZE), 128.0)
    # Step wedge on top, frequency sweep below.
    img[:48] = (xx[:48] // 16) * 32.0 + 16.0
    sweep = 127.0 + 110.0 * np.sign(np.sin(2 * np.pi * (xx**2) / 1400.0))
    img[48:] = sweep[48:]
    img[44:52] = 128.0  # neutral gap between halves
    return img


def grain() -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(424242))
    rough = rng.random((SIZE, SIZE)) * 255.0
    # Cheap separable smoothing keeps mid-frequency grain.
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0])
    kernel /= kernel.sum()
    padded = np.pad(rough, 2, mode="symmetric")
    rows = sum(k * padded[i : i + SIZE, 2:-2] for i, k in enumerate(kernel))
    out = sum(k * np.pad(rows, ((0, 0), (2, 2)), mode="symmetric")[:, i : i + SIZE]
              for i, k in enumerate(kernel))
    return 40.0 + 0.7 * out


def weave() -> np.ndarray:
    yy, xx = _grid()
    img = (
        120.0
        + 55.0 * np.sin(2 * np.pi * xx / 7.0) * np.sin(2 * np.pi * yy / 7.0)
        + 35.0 * np.sin(2 * np.pi * (xx + yy) / 23.0)
    )
    return img


def spots() -> np.ndarray:
    yy, xx = _grid()
    img = np.full((SIZE, SIZE), 200.0)
    phase = 3.0 * np.sin(2 * np.pi * yy / 40.0)
    lattice = np.sin(2 * np.pi * (xx + phase) / 11.0) * np.sin(2 * np.pi * yy / 11.0)
    img -= 150.0 * (lattice > 0.45)
    return img


STD = {
    "img01_shapes": shapes,
    "img02_checker": checker,
    "img03_waves": waves,
    "img04_blobs": blobs,
    "img05_bars": bars,
}

TEXTURES = {
    "tex01_grain": grain,
    "tex02_weave": weave,
    "tex03_spots": spots,
}


def write_set(directory: Path, images: dict) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, fn in images.items():
        plane = ImagePlane(np.clip(fn(), 0.0, 255.0))
        save_image(plane, directory / f"{name}.png")
        print(f"wrote {directory / f'{name}.png'}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default=str(Path(__file__).resolve().parent.parent / "fixtures")
    )
    args = parser.parse_args()
    root = Path(args.out)
    write_set(root / "std", STD)
    write_set(root / "textures", TEXTURES)


if __name__ == "__main__":
    main()
