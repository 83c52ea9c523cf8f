"""Figure rendering for harness reports.

Renders with the Agg backend so runs are headless and deterministic: the
same rows produce byte-identical PNGs. Infinite PSNR values (exact
reconstruction) are plotted as gaps rather than clipped to a fake ceiling.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 110


def _finite(values: list[float]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    return np.where(np.isfinite(arr), arr, np.nan)


def render_sweep(rows, out_path: str | Path) -> None:
    """PSNR and SSIM versus weight, one line per fusion mode."""
    modes = []
    for row in rows:
        if row.mode not in modes:
            modes.append(row.mode)
    fig, (ax_psnr, ax_ssim) = plt.subplots(2, 1, figsize=(7, 8), dpi=_DPI, sharex=True)
    for mode in modes:
        subset = [r for r in rows if r.mode == mode]
        ws = [r.w for r in subset]
        ax_psnr.plot(ws, _finite([r.psnr_db for r in subset]), marker="o", label=mode)
        ax_ssim.plot(ws, _finite([r.ssim for r in subset]), marker="o", label=mode)
    ax_psnr.set_ylabel("PSNR (dB)")
    ax_ssim.set_ylabel("SSIM")
    ax_ssim.set_xlabel("weight w")
    for ax in (ax_psnr, ax_ssim):
        ax.grid(True, alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_ood(rows, out_path: str | Path) -> None:
    """Grouped PSNR bars per robustness case."""
    labels = [r.label for r in rows]
    methods = (
        ("reliable", [r.reliable_psnr for r in rows]),
        ("deep", [r.deep_psnr for r in rows]),
        ("ccid_d", [r.ccid_d_psnr for r in rows]),
        ("ccid", [r.ccid_psnr for r in rows]),
    )
    x = np.arange(len(labels), dtype=np.float64)
    width = 0.2
    fig, ax = plt.subplots(figsize=(1.8 * max(4, len(labels)), 4.5), dpi=_DPI)
    for offset, (name, values) in enumerate(methods):
        ax.bar(x + (offset - 1.5) * width, _finite(values), width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=15, ha="right")
    ax.set_ylabel("PSNR (dB)")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_confidence_report(hist_rows, mean_rows, out_path: str | Path) -> None:
    """Mean confidence versus sigma plus region histograms at three sigmas."""
    denoisers = []
    for row in mean_rows:
        if row.denoiser not in denoisers:
            denoisers.append(row.denoiser)
    sigmas = sorted({r.sigma for r in mean_rows})
    picks = [sigmas[0], sigmas[len(sigmas) // 2], sigmas[-1]] if sigmas else []

    fig, axes = plt.subplots(1, 1 + len(picks), figsize=(4.5 * (1 + len(picks)), 4), dpi=_DPI)
    axes = np.atleast_1d(axes)
    ax_mean = axes[0]
    for name in denoisers:
        subset = [r for r in mean_rows if r.denoiser == name]
        ax_mean.plot(
            [r.sigma for r in subset],
            [r.mean_confidence for r in subset],
            marker="o",
            label=name,
        )
    ax_mean.set_xlabel("noise sigma")
    ax_mean.set_ylabel("mean confidence")
    ax_mean.set_ylim(-0.02, 1.02)
    ax_mean.grid(True, alpha=0.3)
    ax_mean.legend()

    for ax, sigma in zip(axes[1:], picks):
        for name in denoisers:
            subset = [
                r
                for r in hist_rows
                if r.denoiser == name and r.sigma == sigma and r.granularity == "region"
            ]
            centers = [(r.bin_lo + r.bin_hi) / 2.0 for r in subset]
            counts = [r.count for r in subset]
            ax.step(centers, counts, where="mid", label=name)
        ax.set_title(f"sigma = {sigma:g}")
        ax.set_xlabel("confidence")
        ax.set_ylabel("region count")
        ax.grid(True, alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
