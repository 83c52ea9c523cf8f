#!/usr/bin/env python3
"""Regenerate the bundled confidence surrogate.

Trains on the committed std fixtures across three gaussian noise levels
with the box3 mock standing in for the deep denoiser, then writes the
model JSON into the package data directory. Fully seeded, so the output
file is reproducible.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parent.parent

from ccid.confidence import fit_confidence_model, ground_truth_confidence, region_features, save_model
from ccid.denoisers import parse_denoiser_spec
from ccid.harness import ExperimentSpec, list_dataset, prepare_image
from ccid.image import ImagePlane
from ccid.noise import NoiseSpec

OUT = REPO_ROOT / "src" / "ccid" / "data" / "default_confidence_model.json"
SIGMAS = (10.0, 25.0, 50.0)
BASE_SEED = 20240901


def main() -> int:
    features = []
    targets = []
    for s_index, sigma in enumerate(SIGMAS):
        spec = ExperimentSpec(
            dataset=str(REPO_ROOT / "fixtures" / "std"),
            reliable=parse_denoiser_spec("gaussian:4"),
            deep=parse_denoiser_spec("mock:box3"),
            noise=NoiseSpec(kind="gaussian", sigma=sigma, seed=BASE_SEED + s_index),
        )
        for index, path in enumerate(list_dataset(spec.dataset)):
            item = prepare_image(spec, path, index)
            noise_map = ImagePlane(item.noisy_p.pixels - item.deep_p.pixels)
            features.append(region_features(item.noisy_p, item.reliable_p, noise_map))
            targets.append(ground_truth_confidence(item.clean_p, item.deep_p))

    model = fit_confidence_model(features, targets)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, OUT)

    from ccid.confidence import predict_confidence

    errors = [
        float(np.abs(predict_confidence(model, f).values - t.values).mean())
        for f, t in zip(features, targets)
    ]
    print(f"wrote {OUT}")
    print(f"training MAE {np.mean(errors):.4f} over {len(features)} image/noise pairs")
    return 0


if __name__ == "__main__":
    sys.exit(main())
