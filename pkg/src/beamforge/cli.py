"""Command-line interface.

One binary, six subcommands: generate channels, render targets, synthesize
beamformers (directly or through a decoder), train a decoder, sweep
spectral efficiency, and export patterns.  All randomness flows from
explicit seeds; reruns with identical inputs write identical bytes.
Wall-clock timings only enter report files behind ``--timing``.

Runtime failures print a one-line JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .arrays import ArrayConfig, compute_pattern
from .beamformers import load_beamformer, realize, save_beamformer
from .channels import ChannelModelConfig, generate_channels, load_channels, save_channels
from .errors import BeamforgeError
from .evaluate import DEFAULT_SNR_DB, EvalConfig, run_sweep
from .objective import loss_of_beamformer
from .patterns import (
    TargetSpec,
    default_grid,
    load_target,
    make_target,
    save_pattern_csv,
    save_pattern_pgm,
    save_target,
    segment_regions,
)
from .synthesis import (
    SynthesisConfig,
    decode,
    load_decoder,
    save_decoder,
    synthesize_direct,
    train_decoder,
)


def _load_json_arg(value: str):
    """Accept either inline JSON or a path to a JSON file."""
    text = value.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    with open(value) as fh:
        return json.load(fh)


def _array_config(args) -> ArrayConfig:
    if getattr(args, "array", None) is None:
        return ArrayConfig.default()
    data = _load_json_arg(args.array)
    if "spacing" in data and "wavelength" in data:
        return ArrayConfig(n_y=data["n_y"], n_z=data["n_z"],
                           spacing=data["spacing"],
                           wavelength=data["wavelength"],
                           n_rf=data.get("n_rf", 1))
    return ArrayConfig.half_wavelength(
        data["n_y"], data["n_z"],
        frequency_hz=data.get("frequency_hz", 28e9),
        n_rf=data.get("n_rf", 1),
    )


def _synthesis_config(args, architecture: str | None = None) -> SynthesisConfig:
    data = {}
    if getattr(args, "config", None) is not None:
        data = dict(_load_json_arg(args.config))
    if architecture is not None:
        data["architecture"] = architecture
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if "betas" in data:
        data["betas"] = tuple(data["betas"])
    return SynthesisConfig(**data)


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_gen_channels(args) -> int:
    cfg = _array_config(args)
    data = dict(_load_json_arg(args.config)) if args.config else {}
    data["seed"] = args.seed
    model = ChannelModelConfig.from_json_dict(data)
    channels = generate_channels(cfg, model, args.count)
    save_channels(channels, args.out, sidecar_path=args.sidecar)
    return 0


def _cmd_gen_target(args) -> int:
    params = dict(_load_json_arg(args.params)) if args.params else {}
    spec = TargetSpec(kind=args.shape, **params)
    pattern = make_target(spec, default_grid())
    save_target(pattern, args.out, spec=spec, sidecar_path=args.sidecar)
    if args.pgm:
        save_pattern_pgm(pattern, args.pgm)
    return 0


def _cmd_synth(args) -> int:
    cfg = _array_config(args)
    target, _ = load_target(args.target, default_grid())
    syn = _synthesis_config(args, architecture=args.arch)

    if args.mode == "direct":
        result = synthesize_direct(target, cfg, syn)
        bf = result.beamformer
        report = {
            "mode": "direct",
            "architecture": syn.architecture,
            "config": {
                "learning_rate": syn.learning_rate,
                "epochs": syn.epochs,
                "betas": list(syn.betas),
                "epsilon": syn.epsilon,
                "seed": syn.seed,
                "restarts": syn.restarts,
            },
            "loss": result.loss.to_json_dict(),
            "trajectory": list(result.trajectory),
            "seconds": result.seconds if args.timing else None,
        }
    else:
        # decoder mode: use a stored decoder when given, otherwise fit one
        # to this single target on the spot
        head = "hybrid" if syn.architecture == "analog" else syn.architecture
        if args.decoder:
            dec = load_decoder(args.decoder)
        else:
            dec = train_decoder([target], cfg, replace(syn, architecture=head))
        bf = decode(dec, target, cfg, architecture=syn.architecture)
        loss = loss_of_beamformer(cfg, target.grid, target,
                                  segment_regions(target), bf)
        report = {
            "mode": "decoder",
            "architecture": syn.architecture,
            "decoder": args.decoder or "trained in place",
            "loss": loss.to_json_dict(),
            "trajectory": list(dec.trajectory),
            "seconds": None,
        }

    save_beamformer(bf, args.out)
    if args.report:
        _write_json(args.report, report)
    return 0


def _cmd_train_decoder(args) -> int:
    cfg = _array_config(args)
    syn = _synthesis_config(args, architecture=args.arch)
    files = sorted(Path(args.targets).glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no target CSV files under {args.targets}")
    targets = [load_target(f, default_grid())[0] for f in files]
    dec = train_decoder(targets, cfg, syn)
    save_decoder(dec, args.out)
    return 0


def _parse_snr(text: str) -> tuple[float, ...]:
    if ":" in text:
        lo, step, hi = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(round((hi - lo) / step)) + 1
        return tuple(lo + step * k for k in range(n))
    return tuple(float(v) for v in text.split(","))


def _synthesis_from_dict(data) -> SynthesisConfig | None:
    if data is None:
        return None
    data = dict(data)
    if "betas" in data:
        data["betas"] = tuple(data["betas"])
    return SynthesisConfig(**data)


def _cmd_eval(args) -> int:
    cfg = _array_config(args)
    channels = load_channels(args.channels, cfg, sidecar_path=args.sidecar)
    extra = dict(_load_json_arg(args.config)) if args.config else {}
    omp_size = extra.pop("omp_dictionary_size", 4096)
    analog_syn = _synthesis_from_dict(extra.pop("analog_synthesis", None))
    hybrid_syn = _synthesis_from_dict(extra.pop("hybrid_synthesis", None))
    syn = _synthesis_from_dict(extra) or SynthesisConfig()
    eval_cfg = EvalConfig(
        snr_db=_parse_snr(args.snr) if args.snr else DEFAULT_SNR_DB,
        methods=tuple(args.methods.split(",")),
        seed=args.seed,
        synthesis=syn,
        analog_synthesis=analog_syn,
        hybrid_synthesis=hybrid_syn,
        omp_dictionary_size=omp_size,
    )
    report = run_sweep(cfg, eval_cfg, channels)
    _write_json(args.report, report.to_json_dict(include_timing=args.timing))
    if args.plots:
        _write_plots(report, args.plots)
    return 0


def _write_plots(report, plots_dir) -> None:
    out = Path(plots_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = "snr_db," + ",".join(report.methods)
    rows = [header]
    for k, s in enumerate(report.snr_db):
        cells = [repr(float(s))]
        cells += [repr(float(report.mean_se[m][k])) for m in report.methods]
        rows.append(",".join(cells))
    (out / "mean_spectral_efficiency.csv").write_text("\n".join(rows) + "\n")
    rows = [header]
    for k, s in enumerate(report.snr_db):
        cells = [repr(float(s))]
        cells += [repr(float(report.percent_of_optimal[m][k]))
                  for m in report.methods]
        rows.append(",".join(cells))
    (out / "percent_of_optimal.csv").write_text("\n".join(rows) + "\n")


def _cmd_pattern(args) -> int:
    cfg = _array_config(args)
    bf = load_beamformer(args.beamformer)
    pattern = compute_pattern(cfg, default_grid(), realize(bf, cfg))
    save_pattern_csv(pattern, args.out)
    if args.pgm:
        save_pattern_pgm(pattern, args.pgm)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamforge",
        description="Beam-pattern driven beamforming design toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-channels", help="generate clustered multipath channels")
    p.add_argument("--config", help="channel model JSON (inline or file)")
    p.add_argument("--out", required=True, help="output channel CSV")
    p.add_argument("--sidecar", help="optional JSON path-metadata sidecar")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--array", help="array geometry JSON (inline or file)")
    p.set_defaults(func=_cmd_gen_channels)

    p = sub.add_parser("gen-target", help="render a synthetic target pattern")
    p.add_argument("--shape", required=True,
                   choices=["pencil", "triangular", "flattop"])
    p.add_argument("--params", help="shape parameter JSON (inline or file)")
    p.add_argument("--out", required=True, help="output pattern CSV")
    p.add_argument("--sidecar", help="optional JSON target-spec sidecar")
    p.add_argument("--pgm", help="optional grayscale heatmap")
    p.set_defaults(func=_cmd_gen_target)

    p = sub.add_parser("synth", help="fit a beamformer to a target pattern")
    p.add_argument("--target", required=True, help="target pattern CSV")
    p.add_argument("--arch", required=True,
                   choices=["digital", "analog", "hybrid"])
    p.add_argument("--mode", default="direct", choices=["direct", "decoder"])
    p.add_argument("--config", help="synthesis config JSON (inline or file)")
    p.add_argument("--decoder", help="stored decoder JSON (decoder mode)")
    p.add_argument("--out", required=True, help="output beamformer JSON")
    p.add_argument("--report", help="optional synthesis report JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock seconds in the report")
    p.add_argument("--array", help="array geometry JSON (inline or file)")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train-decoder", help="fit a decoder on target patterns")
    p.add_argument("--targets", required=True,
                   help="directory of target CSV files")
    p.add_argument("--arch", required=True, choices=["digital", "hybrid"])
    p.add_argument("--config", help="synthesis config JSON (inline or file)")
    p.add_argument("--out", required=True, help="output decoder JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--array", help="array geometry JSON (inline or file)")
    p.set_defaults(func=_cmd_train_decoder)

    p = sub.add_parser("eval", help="spectral-efficiency sweep over channels")
    p.add_argument("--channels", required=True, help="channel CSV")
    p.add_argument("--sidecar", help="JSON path-metadata sidecar")
    p.add_argument("--methods", required=True,
                   help="comma-separated method names")
    p.add_argument("--snr", help="sweep as lo:step:hi or comma list, dB")
    p.add_argument("--report", required=True, help="output report JSON")
    p.add_argument("--plots", help="directory for CSV plot artifacts")
    p.add_argument("--config", help="synthesis overrides JSON (inline or file)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock seconds in the report")
    p.add_argument("--array", help="array geometry JSON (inline or file)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("pattern", help="export a beamformer's pattern")
    p.add_argument("--beamformer", required=True, help="beamformer JSON")
    p.add_argument("--out", required=True, help="output pattern CSV")
    p.add_argument("--pgm", help="optional grayscale heatmap")
    p.add_argument("--array", help="array geometry JSON (inline or file)")
    p.set_defaults(func=_cmd_pattern)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BeamforgeError, OSError, ValueError, KeyError, TypeError,
            json.JSONDecodeError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
