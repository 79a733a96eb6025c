"""Command-line interface.

Machine-readable output goes to stdout or ``--out``; diagnostics go to stderr.
Every run that writes to ``--out`` also writes a manifest that ``replay`` can
re-execute.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .entropy import as_bit_matrix, bic_sweep, estimate_entropy
from .errors import InsufficientData, ShakeKeyError
from .evaluation import (
    CRITERIA,
    DEFAULT_KS_GRID,
    DEFAULT_NB_GRID,
    PairDataset,
    calibrate_dataset_bounds,
    evaluate,
    grid_search,
    report,
)
from .features import FeatureBounds, normalize_features
from .io import load_dataset_dir, read_keys, write_dataset_dir, write_keys
from .keygen import generate_key
from .matching import MODES
from .pairsim import run_pairing_session
from .pipeline import PipelineConfig, derive_key, trace_features
from .preprocess import DEFAULT_SKIP, DEFAULT_THRESHOLD, DEFAULT_TRIM_LEN
from .signal import SynthConfig, load_trace_csv, synth_independent_pair, synth_shared_pair, synth_subject_shakes

log = logging.getLogger("shakekey")

REFERENCE_SUBJECTS, REFERENCE_SHAKES = 10, 15


class UsageError(Exception):
    pass


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    p.add_argument("--out", help="output file or directory, depending on the subcommand")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _pipeline_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--bounds", help="feature bounds JSON; calibrated from data when omitted")
    p.add_argument("--nb", type=int, default=4, help="bits per feature (default 4)")
    p.add_argument("--kernel-size", type=int, default=5, help="box filter width, 1 = raw (default 5)")
    p.add_argument("--mode", choices=MODES, default="relaxed")
    p.add_argument("--agree-fraction", type=float, default=0.9)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="bump threshold, m/s^2")
    p.add_argument("--skip", type=int, default=DEFAULT_SKIP, help="samples dropped after the bump")
    p.add_argument("--trim-len", type=int, default=DEFAULT_TRIM_LEN, help="samples kept after the skip")
    return p


def _synth_parser() -> argparse.ArgumentParser:
    d = SynthConfig()
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("synthetic motion")
    g.add_argument("--duration", type=float, default=d.duration)
    g.add_argument("--sample-rate", type=float, default=d.sample_rate)
    g.add_argument("--freq-range", type=float, nargs=2, default=d.base_freq_range, metavar=("LO", "HI"))
    g.add_argument("--amp-range", type=float, nargs=2, default=d.amp_range, metavar=("LO", "HI"))
    g.add_argument("--noise-std", type=float, default=d.device_noise_std)
    g.add_argument("--gain-jitter", type=float, default=d.device_gain_jitter)
    g.add_argument("--sync-offset-max", type=int, default=d.sync_offset_max)
    g.add_argument("--bump-amplitude", type=float, default=d.bump_amplitude)
    return p


def build_parser() -> argparse.ArgumentParser:
    common, pipe, synth = _common_parser(), _pipeline_parser(), _synth_parser()
    parser = argparse.ArgumentParser(prog="shakekey", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common, synth], help="generate a synthetic shake dataset")
    p.add_argument("--subjects", type=int, default=REFERENCE_SUBJECTS)
    p.add_argument("--shakes", type=int, default=REFERENCE_SHAKES, help="shakes per subject")
    p.add_argument("--count", type=int, help="number of pairs; shorthand for --subjects 1 --shakes COUNT")
    p.add_argument("--kind", choices=("shared", "independent"), default="shared")

    p = sub.add_parser("features", parents=[common, pipe], help="dump the features of one trace CSV")
    p.add_argument("trace")

    p = sub.add_parser("bounds", parents=[common, pipe], help="calibrate feature bounds from a dataset")
    p.add_argument("dataset")
    p.add_argument("--margin", type=float, default=0.1)

    p = sub.add_parser("pair", parents=[common, pipe, synth], help="simulate one pairing session")
    p.add_argument("traces", nargs="*", help="two trace CSVs (device 1, device 2)")
    p.add_argument("--synth", choices=("shared", "independent"), help="use a synthetic pair instead")

    p = sub.add_parser("evaluate", parents=[common, pipe], help="confusion matrix, accuracy and F1")
    p.add_argument("dataset")
    p.add_argument("--negatives", type=int, default=300)

    p = sub.add_parser("grid", parents=[common, pipe], help="exhaustive nb x kernel-size search")
    p.add_argument("dataset")
    p.add_argument("--negatives", type=int, default=300)
    p.add_argument("--nb-values", type=_int_list, default=list(DEFAULT_NB_GRID))
    p.add_argument("--ks-values", type=_int_list, default=list(DEFAULT_KS_GRID))
    p.add_argument("--criterion", choices=CRITERIA, default="accuracy")

    p = sub.add_parser("entropy", parents=[common, pipe], help="Bernoulli-mixture key entropy")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--keys", help="file with one bit string per line")
    src.add_argument("--dataset", help="dataset directory; keys derived from every trace")
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo sample count")
    p.add_argument("--keys-out", help="also write the derived keys here")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


def _pipeline_config(args, bounds=None) -> PipelineConfig:
    if bounds is None and getattr(args, "bounds", None):
        bounds = FeatureBounds.load(args.bounds)
    return PipelineConfig(
        nb=args.nb, kernel_size=args.kernel_size, threshold=args.threshold, skip=args.skip,
        trim_len=args.trim_len, bounds=bounds, mode=args.mode, agree_fraction=args.agree_fraction,
    )


def _synth_config(args) -> SynthConfig:
    return SynthConfig(
        duration=args.duration, sample_rate=args.sample_rate, base_freq_range=tuple(args.freq_range),
        amp_range=tuple(args.amp_range), device_noise_std=args.noise_std,
        device_gain_jitter=args.gain_jitter, sync_offset_max=args.sync_offset_max,
        bump_amplitude=args.bump_amplitude,
    )


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_manifest(path, args, argv, outputs, inputs=()) -> None:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "params": params,
        "seed": getattr(args, "seed", None),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sidecar(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def _load_dataset(path, n_negatives, seed) -> PairDataset:
    return PairDataset.from_recordings(load_dataset_dir(path), n_negatives, seed)


def _reference_bounds(config: PipelineConfig, seed: int) -> FeatureBounds:
    recordings = synth_subject_shakes(SynthConfig(), REFERENCE_SUBJECTS, REFERENCE_SHAKES, seed)
    return calibrate_dataset_bounds(PairDataset.from_recordings(recordings, 0), config)


def cmd_synth(args, argv) -> int:
    if not args.out:
        raise UsageError("--out DIR is required")
    config = _synth_config(args)
    subjects, shakes = (1, args.count) if args.count else (args.subjects, args.shakes)
    if args.kind == "shared":
        recordings = synth_subject_shakes(config, subjects, shakes, args.seed)
    else:
        pair = synth_independent_pair
        recordings = {(1, i): pair(config, args.seed * 100_003 + i) for i in range(1, subjects * shakes + 1)}
    paths = write_dataset_dir(recordings, args.out)
    _write_manifest(Path(args.out) / "manifest.json", args, argv, paths)
    log.info("wrote %d traces to %s", len(paths), args.out)
    return 0


def cmd_features(args, argv) -> int:
    trace = load_trace_csv(args.trace)
    config = _pipeline_config(args)
    fv = trace_features(trace, config)
    out = {"trace": args.trace, "kernel_size": config.kernel_size, "features": fv.as_dict()}
    if config.bounds is not None:
        nfv = normalize_features(fv, config.bounds)
        out["normalized"] = nfv.as_dict()
        out["key"] = generate_key(nfv, config.nb).bits
    _emit(out, args.out)
    if args.out:
        _write_manifest(_sidecar(args.out), args, argv, [args.out], [args.trace])
    return 0


def cmd_bounds(args, argv) -> int:
    config = _pipeline_config(args, bounds=None)
    dataset = _load_dataset(args.dataset, 0, args.seed)
    bounds = calibrate_dataset_bounds(dataset, config, args.margin)
    _emit(bounds.to_dict(), args.out)
    if args.out:
        _write_manifest(_sidecar(args.out), args, argv, [args.out], [args.dataset])
    return 0


def cmd_pair(args, argv) -> int:
    if args.synth:
        if args.traces:
            raise UsageError("give either two trace files or --synth, not both")
        make = synth_shared_pair if args.synth == "shared" else synth_independent_pair
        trace_a, trace_b = make(_synth_config(args), args.seed)
    elif len(args.traces) == 2:
        trace_a, trace_b = (load_trace_csv(p) for p in args.traces)
    else:
        raise UsageError("need two trace CSVs or --synth shared|independent")
    config = _pipeline_config(args)
    if config.bounds is None:
        log.warning("no --bounds given; using bounds calibrated on the reference synthetic corpus")
        config = replace(config, bounds=_reference_bounds(config, 0))
    outcome = run_pairing_session(trace_a, trace_b, config, session_id=f"session-{args.seed}")
    _emit(outcome.to_dict(), args.out)
    if args.out:
        _write_manifest(_sidecar(args.out), args, argv, [args.out], args.traces)
    return 0


def cmd_evaluate(args, argv) -> int:
    dataset = _load_dataset(args.dataset, args.negatives, args.seed)
    config = _pipeline_config(args)
    if config.bounds is None:
        config = replace(config, bounds=calibrate_dataset_bounds(dataset, config))
    cm = evaluate(dataset, config)
    out = report(cm, config)
    out["seed"] = args.seed
    out["dataset"] = str(args.dataset)
    _emit(out, args.out)
    if args.out:
        _write_manifest(_sidecar(args.out), args, argv, [args.out], [args.dataset])
    return 0


def cmd_grid(args, argv) -> int:
    if not args.out:
        raise UsageError("--out DIR is required")
    dataset = _load_dataset(args.dataset, args.negatives, args.seed)
    base = _pipeline_config(args)
    result = grid_search(dataset, args.nb_values, args.ks_values, args.criterion, args.mode, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    surface_path = out / "surface.csv"
    with open(surface_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nb", "ks", "accuracy", "f1"])
        for cell in result.surface:
            w.writerow([cell.nb, cell.kernel_size, repr(cell.accuracy), repr(cell.f1)])
    best = result.best_cell
    best_path = out / "best.json"
    _emit({
        "criterion": result.criterion,
        "mode": result.best.mode,
        "nb": best.nb,
        "ks": best.kernel_size,
        "accuracy": best.accuracy,
        "f1": best.f1,
        "confusion_matrix": best.cm.to_dict(),
        "seed": args.seed,
        "config": result.best.to_dict(),
    }, best_path)
    _write_manifest(out / "manifest.json", args, argv, [surface_path, best_path], [args.dataset])
    return 0


def cmd_entropy(args, argv) -> int:
    if args.keys:
        keys = read_keys(args.keys)
        source = args.keys
    else:
        dataset = _load_dataset(args.dataset, 0, args.seed)
        config = _pipeline_config(args)
        if config.bounds is None:
            config = replace(config, bounds=calibrate_dataset_bounds(dataset, config))
        keys = []
        for p in dataset.positives:
            for trace in (p.trace_a, p.trace_b):
                try:
                    keys.append(derive_key(trace, config))
                except ShakeKeyError as exc:
                    log.warning("subject %s shake %s: %s", p.subject, p.shake, exc)
        source = args.dataset
        if args.keys_out:
            write_keys(keys, args.keys_out)
    if len(keys) < 2:
        raise InsufficientData("need at least 2 keys")
    x = as_bit_matrix(keys)
    selection = bic_sweep(x, args.k_max, args.restarts, args.seed)
    est = estimate_entropy(selection.model, args.samples, args.seed)
    _emit({
        "source": str(source),
        "n_keys": len(x),
        "n_bits": x.shape[1],
        "selected_k": selection.k,
        "bic": [{"k": k, "bic": v} for k, v in sorted(selection.bic_table.items())],
        "entropy_bits": est.bits,
        "stderr_bits": est.stderr,
        "n_samples": est.n_samples,
        "seed": args.seed,
    }, args.out)
    if args.out:
        _write_manifest(_sidecar(args.out), args, argv, [args.out], [source])
    return 0


def cmd_replay(args, argv) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        recorded = json.load(fh)["argv"]
    return main(recorded)


COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "bounds": cmd_bounds,
    "pair": cmd_pair,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "entropy": cmd_entropy,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"shakekey {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ShakeKeyError, OSError, ValueError) as exc:
        print(f"shakekey {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
