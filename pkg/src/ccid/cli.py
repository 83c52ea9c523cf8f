"""Command-line interface.

Subcommands map one-to-one onto harness entry points: sweep, ood,
conf-dist, train-conf, plus serve for the HTTP service. All experiment
outputs land in --out as CSV, PNG, and CMAP files; stdout only reports
where they went. Runs are reproducible from the flag values and --seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .denoisers import ExternalDenoiserError, parse_denoiser_spec
from .fusion import SCHEDULES, FusionParams
from .harness import (
    METRIC_MODES,
    MODE_BY_TOKEN,
    OOD_KINDS,
    ConfidenceSource,
    ExperimentSpec,
    confidence_distribution,
    ood_eval,
    train_confidence_model,
    weight_sweep,
)
from .noise import NoiseSpec

DEFAULT_PORT = 8787


def parse_noise(text: str, seed: int) -> NoiseSpec | None:
    """'gaussian:25', 'poisson:30', or 'none'."""
    if text == "none":
        return None
    kind, sep, level = text.partition(":")
    if not sep:
        raise ValueError(f"noise spec {text!r} must look like gaussian:25 or poisson:30")
    try:
        value = float(level)
    except ValueError as exc:
        raise ValueError(f"bad noise level in {text!r}") from exc
    if kind == "gaussian":
        return NoiseSpec(kind="gaussian", sigma=value, seed=seed)
    if kind == "poisson":
        return NoiseSpec(kind="poisson", peak=value, seed=seed)
    raise ValueError(f"unknown noise kind {kind!r}")


def parse_grid(text: str) -> tuple[float, ...]:
    """'START:STOP:STEP' inclusive of STOP when it lands on the grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} must look like 0:1:0.05")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"bad number in grid {text!r}") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"grid {text!r} must have positive step and stop >= start")
    values = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9:
            break
        values.append(round(value, 10))
        k += 1
    return tuple(values)


def parse_conf(text: str) -> ConfidenceSource:
    """'oracle', 'model[:PATH]', 'file:DIR', or 'none'."""
    kind, sep, path = text.partition(":")
    if kind in ("oracle", "none"):
        if sep:
            raise ValueError(f"confidence source {kind!r} takes no path")
        return ConfidenceSource(kind)
    if kind == "model":
        return ConfidenceSource("model", path)
    if kind == "file":
        if not path:
            raise ValueError("file confidence source needs a directory")
        return ConfidenceSource("external", path)
    raise ValueError(f"unknown confidence source {text!r}")


def parse_modes(text: str) -> tuple[str, ...]:
    """Comma-separated mode tokens: dct, dwt, dwt-conf."""
    modes = []
    for token in text.split(","):
        token = token.strip()
        if token not in MODE_BY_TOKEN:
            raise ValueError(f"unknown mode {token!r} (expected dct, dwt, or dwt-conf)")
        modes.append(MODE_BY_TOKEN[token])
    return tuple(modes)


def parse_case(text: str) -> tuple[str, str, str]:
    """'KIND=NOISE[,DATASET]' for one robustness case."""
    kind, sep, rest = text.partition("=")
    if not sep or kind not in OOD_KINDS:
        raise ValueError(
            f"case {text!r} must look like KIND=NOISE[,DATASET] with KIND one of {OOD_KINDS}"
        )
    noise_text, _, dataset = rest.partition(",")
    if not noise_text:
        raise ValueError(f"case {text!r} is missing its noise spec")
    return kind, noise_text, dataset


def _add_common(parser: argparse.ArgumentParser, *, with_fusion: bool) -> None:
    parser.add_argument("--dataset", required=True, help="directory of .png/.pgm images")
    parser.add_argument("--reliable", default="gaussian:4", help="reliable denoiser spec")
    parser.add_argument("--deep", default="mock:identity", help="deep denoiser spec")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    if with_fusion:
        parser.add_argument("--noise", default="none", help="noise spec, e.g. gaussian:25")
        parser.add_argument("--mode", default="dct", help="fusion modes, comma separated")
        parser.add_argument("--grid", default="0:1:0.05", help="weight grid START:STOP:STEP")
        parser.add_argument("--conf", default="none", help="confidence source")
        parser.add_argument("--schedule", default="low_first", choices=SCHEDULES)
        parser.add_argument("--wavelet", default="haar", choices=("haar", "db2"))
        parser.add_argument("--levels", type=int, default=None, help="dwt decomposition depth")
        parser.add_argument("--threshold", type=float, default=0.8, help="confidence threshold t")
        parser.add_argument("--metrics", default="quantized", choices=METRIC_MODES)


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    return ExperimentSpec(
        dataset=args.dataset,
        reliable=parse_denoiser_spec(args.reliable),
        deep=parse_denoiser_spec(args.deep),
        noise=parse_noise(args.noise, args.seed),
        modes=parse_modes(args.mode),
        params=FusionParams(
            w=0.5,
            t=args.threshold,
            dwt_schedule=args.schedule,
            wavelet=args.wavelet,
            levels=args.levels,
        ),
        weights=parse_grid(args.grid),
        confidence=parse_conf(args.conf),
        metric_mode=args.metrics,
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    rows = weight_sweep(spec, args.out)
    print(f"wrote {Path(args.out) / 'sweep.csv'} ({len(rows)} rows)")
    print(f"wrote fused images under {Path(args.out) / 'fused'}")
    return 0


def _cmd_ood(args: argparse.Namespace) -> int:
    base = _spec_from_args(args)
    specs = []
    for case_text in args.case:
        kind, noise_text, dataset = parse_case(case_text)
        specs.append(
            dataclasses.replace(
                base,
                dataset=dataset or base.dataset,
                noise=parse_noise(noise_text, args.seed),
                ood_kind=kind,
                label=case_text,
            )
        )
    rows = ood_eval(specs, args.out)
    print(f"wrote {Path(args.out) / 'ood.csv'} ({len(rows)} cases)")
    return 0


def _cmd_conf_dist(args: argparse.Namespace) -> int:
    spec = ExperimentSpec(
        dataset=args.dataset,
        reliable=parse_denoiser_spec(args.reliable),
        deep=parse_denoiser_spec(args.deep),
        noise=NoiseSpec(kind="gaussian", sigma=0.0, seed=args.seed),
    )
    hist_rows, mean_rows = confidence_distribution(spec, args.out)
    print(f"wrote {Path(args.out) / 'conf_hist.csv'} ({len(hist_rows)} rows)")
    print(f"wrote {Path(args.out) / 'conf_mean.csv'} ({len(mean_rows)} rows)")
    return 0


def _cmd_train_conf(args: argparse.Namespace) -> int:
    spec = ExperimentSpec(
        dataset=args.dataset,
        reliable=parse_denoiser_spec(args.reliable),
        deep=parse_denoiser_spec(args.deep),
        noise=parse_noise(args.noise, args.seed),
    )
    _, mae = train_confidence_model(spec, args.out_model)
    print(f"wrote {args.out_model} (training MAE {mae:.4f})")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_sessions=args.max_sessions, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="weight sweep over a dataset")
    _add_common(p_sweep, with_fusion=True)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ood = sub.add_parser("ood", help="robustness table over shifted conditions")
    _add_common(p_ood, with_fusion=True)
    p_ood.add_argument(
        "--case",
        action="append",
        required=True,
        help="KIND=NOISE[,DATASET], KIND one of data_domain, noise_level, noise_type",
    )
    p_ood.set_defaults(func=_cmd_ood)

    p_dist = sub.add_parser("conf-dist", help="confidence distribution versus noise level")
    _add_common(p_dist, with_fusion=False)
    p_dist.set_defaults(func=_cmd_conf_dist)

    p_train = sub.add_parser("train-conf", help="fit the confidence surrogate")
    p_train.add_argument("--dataset", required=True)
    p_train.add_argument("--noise", default="gaussian:25")
    p_train.add_argument("--reliable", default="gaussian:4")
    p_train.add_argument("--deep", default="mock:box3")
    p_train.add_argument("--out-model", required=True, help="where to write the model JSON")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=_cmd_train_conf)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument(
        "--port", type=int, default=int(os.environ.get("CCID_PORT", DEFAULT_PORT))
    )
    p_serve.add_argument("--max-sessions", type=int, default=16)
    p_serve.add_argument("--frontend", default=None, help="static UI directory for /app")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ExternalDenoiserError) as exc:
        print(f"ccid: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
