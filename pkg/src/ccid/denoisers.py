"""Denoisers: the reliable Gaussian filter and adapters for deep models.

The deep branch is an adapter, not a network: it loads a precomputed
output file, shells out to an external command, or synthesizes a mock
output for tests. Every denoiser also yields a residual noise map
defined as noisy - denoised.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage as _ndi

from .image import ImagePlane, load_image, require_same_shape, save_image

KINDS = ("gaussian_filter", "external_file", "external_command", "mock")
MOCK_MODES = ("identity", "box3", "corrupt_half")

# corrupt_half constants: the left half is a lightly smoothed version of
# the input, the right half keeps the input and adds a fixed sinusoid.
_CORRUPT_SIGMA = 1.5
_ARTIFACT_AMPLITUDE = 20.0
_ARTIFACT_PERIOD = 8.0


class ExternalDenoiserError(RuntimeError):
    """External adapter failure; carries the tool's stderr when available."""

    def __init__(self, message: str, stderr: str = ""):
        if stderr:
            message = f"{message}\nstderr:\n{stderr.rstrip()}"
        super().__init__(message)
        self.stderr = stderr


@dataclass(frozen=True)
class DenoiserSpec:
    """One denoiser configuration; fields beyond the kind's own are unused."""

    kind: str
    filter_sigma: float = 0.0
    path: str = ""
    command: str = ""
    mock_mode: str = "identity"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown denoiser kind {self.kind!r}, expected one of {KINDS}")
        if self.kind == "gaussian_filter" and not self.filter_sigma > 0:
            raise ValueError(f"filter_sigma must be > 0, got {self.filter_sigma}")
        if self.kind == "external_file" and not self.path:
            raise ValueError("external_file requires a path")
        if self.kind == "external_command":
            if "{in}" not in self.command or "{out}" not in self.command:
                raise ValueError("command template must contain {in} and {out} placeholders")
        if self.kind == "mock" and self.mock_mode not in MOCK_MODES:
            raise ValueError(f"unknown mock mode {self.mock_mode!r}, expected one of {MOCK_MODES}")


def parse_denoiser_spec(text: str) -> DenoiserSpec:
    """Parse CLI shorthand: gaussian:4, file:PATH, cmd:"...", mock:identity."""
    head, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"denoiser spec {text!r} needs the form kind:argument")
    if head == "gaussian":
        return DenoiserSpec(kind="gaussian_filter", filter_sigma=float(rest))
    if head == "file":
        return DenoiserSpec(kind="external_file", path=rest)
    if head == "cmd":
        return DenoiserSpec(kind="external_command", command=rest.strip('"'))
    if head == "mock":
        return DenoiserSpec(kind="mock", mock_mode=rest)
    raise ValueError(f"unknown denoiser shorthand {head!r} in {text!r}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps with radius ceil(3*sigma), normalized to sum 1."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_filter(img: ImagePlane, sigma: float) -> ImagePlane:
    """Separable Gaussian blur with reflect padding; preserves the mean."""
    kernel = gaussian_kernel(sigma)
    out = _ndi.correlate1d(img.pixels, kernel, axis=0, mode="reflect")
    out = _ndi.correlate1d(out, kernel, axis=1, mode="reflect")
    return ImagePlane(out)


def _box3(img: ImagePlane) -> ImagePlane:
    return ImagePlane(_ndi.uniform_filter(img.pixels, size=3, mode="reflect"))


def _corrupt_half(img: ImagePlane) -> ImagePlane:
    """Good left half, bad right half; exercises region-level confidence."""
    out = gaussian_filter(img, _CORRUPT_SIGMA).pixels.copy()
    split = img.width // 2
    cols = np.arange(split, img.width, dtype=np.float64)
    artifact = _ARTIFACT_AMPLITUDE * np.sin(2.0 * np.pi * cols / _ARTIFACT_PERIOD)
    out[:, split:] = img.pixels[:, split:] + artifact
    return ImagePlane(out)


def _run_mock(mode: str, noisy: ImagePlane) -> ImagePlane:
    if mode == "identity":
        return noisy
    if mode == "box3":
        return _box3(noisy)
    return _corrupt_half(noisy)


def _run_external_file(path: str, noisy: ImagePlane) -> ImagePlane:
    target = Path(path)
    if not target.is_file():
        raise ExternalDenoiserError(f"precomputed output not found: {target}")
    out = load_image(target)
    if out.shape != noisy.shape:
        raise ExternalDenoiserError(
            f"precomputed output {target} is {out.width}x{out.height}, "
            f"input is {noisy.width}x{noisy.height}"
        )
    return out


def _run_external_command(template: str, noisy: ImagePlane) -> ImagePlane:
    with tempfile.TemporaryDirectory(prefix="ccid-deep-") as workdir:
        in_path = Path(workdir) / "in.pgm"
        out_path = Path(workdir) / "out.pgm"
        save_image(noisy, in_path)
        argv = [
            arg.replace("{in}", str(in_path)).replace("{out}", str(out_path))
            for arg in shlex.split(template)
        ]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=300)
        except OSError as exc:
            raise ExternalDenoiserError(f"could not launch {argv[0]!r}: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise ExternalDenoiserError(f"denoiser command timed out: {template}") from exc
        if proc.returncode != 0:
            raise ExternalDenoiserError(
                f"denoiser command exited with status {proc.returncode}", stderr=proc.stderr
            )
        if not out_path.is_file():
            raise ExternalDenoiserError(
                f"denoiser command wrote no output file {out_path}", stderr=proc.stderr
            )
        out = load_image(out_path)
    if out.shape != noisy.shape:
        raise ExternalDenoiserError(
            f"denoiser command returned {out.width}x{out.height}, "
            f"input is {noisy.width}x{noisy.height}"
        )
    return out


def apply_denoiser(spec: DenoiserSpec, noisy: ImagePlane) -> ImagePlane:
    """Run any denoiser kind on a noisy plane."""
    if spec.kind == "gaussian_filter":
        return gaussian_filter(noisy, spec.filter_sigma)
    if spec.kind == "mock":
        return _run_mock(spec.mock_mode, noisy)
    if spec.kind == "external_file":
        return _run_external_file(spec.path, noisy)
    return _run_external_command(spec.command, noisy)


def run_deep_denoiser(spec: DenoiserSpec, noisy: ImagePlane) -> tuple[ImagePlane, ImagePlane]:
    """Returns (denoised, noise_map) with noise_map = noisy - denoised."""
    denoised = apply_denoiser(spec, noisy)
    require_same_shape(noisy, denoised, what="noisy and denoised planes")
    noise_map = ImagePlane(noisy.pixels - denoised.pixels)
    return denoised, noise_map


def resolve_precomputed(directory: str | Path, stem: str) -> Path:
    """Find DIRECTORY/STEM.(png|pgm) for per-image precomputed outputs."""
    base = Path(directory)
    for ext in (".png", ".pgm", ".PNG", ".PGM"):
        candidate = base / f"{stem}{ext}"
        if candidate.is_file():
            return candidate
    raise ExternalDenoiserError(f"no precomputed output for {stem!r} under {base}")
