"""Seeded synthetic noise for grayscale planes.

Reproducibility contract: all draws come from numpy's PCG64 generator seeded
with the spec's 64-bit seed. Gaussian samples are produced by an explicit
Box-Muller transform of uniform draws rather than the generator's native
normal sampler, so the byte stream of outputs depends only on PCG64 and
elementary float arithmetic. Identical (image, spec) pairs give bit-identical
outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import ImagePlane

SIGMA_MAX = 100.0  # highest supported gaussian noise level


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model selector.

    kind 'gaussian' uses sigma (intensity units, 0..100); kind 'poisson'
    uses peak, the expected photon count at intensity 255.
    """

    kind: str
    sigma: float = 0.0
    peak: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian", "poisson"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and not 0.0 <= self.sigma <= SIGMA_MAX:
            raise ValueError(f"gaussian sigma must be in [0, {SIGMA_MAX:g}], got {self.sigma}")
        if self.kind == "poisson" and not self.peak > 0:
            raise ValueError(f"poisson peak must be positive, got {self.peak}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _standard_normal(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    # Box-Muller on two full uniform arrays, drawn in a fixed order.
    # 1 - random() maps [0, 1) to (0, 1] so the log is always finite.
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def add_awgn(img: ImagePlane, spec: NoiseSpec) -> ImagePlane:
    """Add i.i.d. zero-mean gaussian noise with spec.sigma, unclamped."""
    if spec.kind != "gaussian":
        raise ValueError(f"add_awgn requires a gaussian spec, got {spec.kind!r}")
    if spec.sigma == 0.0:
        return img
    noise = spec.sigma * _standard_normal(_rng(spec.seed), img.shape)
    return ImagePlane(img.pixels + noise)


def add_poisson(img: ImagePlane, spec: NoiseSpec) -> ImagePlane:
    """Poisson (shot) noise: k ~ Poisson(y * peak / 255), output k * 255 / peak."""
    if spec.kind != "poisson":
        raise ValueError(f"add_poisson requires a poisson spec, got {spec.kind!r}")
    if np.any(img.pixels < 0):
        raise ValueError("add_poisson requires non-negative intensities")
    rate = img.pixels * (spec.peak / 255.0)
    counts = _rng(spec.seed).poisson(rate)
    return ImagePlane(counts * (255.0 / spec.peak))


def apply_noise(img: ImagePlane, spec: NoiseSpec) -> ImagePlane:
    """Dispatch on spec.kind."""
    if spec.kind == "gaussian":
        return add_awgn(img, spec)
    return add_poisson(img, spec)


def with_seed(spec: NoiseSpec, seed: int) -> NoiseSpec:
    """Copy of spec with a different seed."""
    return NoiseSpec(kind=spec.kind, sigma=spec.sigma, peak=spec.peak, seed=seed)


def derive_seed(base_seed: int, *indices: int) -> int:
    """Stable per-item seed for dataset runs (SeedSequence of base and indices)."""
    entropy = [base_seed, *indices]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
