#!/usr/bin/env python3
"""
Vehicle Classification System - command line entry point.

    python vehicleclassify.py train    --mode inter --data synth/inter --out car_van.esvc
    python vehicleclassify.py classify --model car_van.esvc img1.pgm img2.pgm
    python vehicleclassify.py eval     --mode intra --data synth/intra --protocol holdout --csv report.csv
    python vehicleclassify.py synth    --out synth --n-per-class 60

Exit codes: 0 success, 1 usage error, 2 data error, 3 some images failed.
"""
import argparse
import logging
import sys
from pathlib import Path

import console
from config import (EXIT_DATA, EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, K, MODES, PROTOCOLS,
                    SEED, TRAIN_PER_CLASS, Params)
from errors import ClassificationError, UnmatchedQueryError, VehicleClassifierError, failure_reason
from evaluation import evaluate, format_report, load_dataset, split, write_csv
from model_io import load_model, save_model
from pipeline import DebugDumps, classify_path, train_model
from synthetic import gen_synthetic


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage errors here exit with 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


# ========== Helpers ==========

def _params_from_args(args):
    if args.canny_low is not None and args.canny_high is not None and args.canny_low >= args.canny_high:
        raise _UsageError(f"--canny-low ({args.canny_low}) must be below --canny-high ({args.canny_high})")
    return Params().with_overrides(
        sigma=args.sigma, canny_low=args.canny_low, canny_high=args.canny_high,
        stride=args.stride, k=args.k, seed=args.seed,
    )


def _dumps_from_args(args):
    if args.dump_edges is None and args.dump_descriptors is None:
        return None
    return DebugDumps(edges_dir=args.dump_edges, descriptors_dir=args.dump_descriptors)


def _print_training_summary(summary, params):
    console.banner("📊 TRAINING SUMMARY:")
    console.kv("Mode", summary.mode, "🎯")
    for label, count in summary.images.items():
        console.info(f"   🚗 {label}: {count} images, {summary.descriptors[label]} descriptors")
    if summary.empty_images:
        console.warn(f"{summary.empty_images} training images produced no descriptors")
    console.kv("Clusters (k)", params.k, "🧩")
    console.kv("K-means iterations", summary.iterations, "🔄")
    console.kv("Inertia", f"{summary.inertia:.6f}")
    console.kv("Match threshold tau", f"{summary.tau:.6f} ({summary.tau_source})", "📏")


def _train_from_args(args):
    dataset = load_dataset(args.data)
    train_set = split(dataset, args.train_per_class, args.seed, "whole").train
    params = _params_from_args(args)
    console.info(f"🔍 Training {args.mode} model on {len(train_set)} images "
                 f"({args.train_per_class} per class, seed {args.seed})...")
    model, summary = train_model(train_set, args.mode, params, tau=args.tau,
                                 progress=not args.quiet, dumps=_dumps_from_args(args))
    _print_training_summary(summary, params)
    return dataset, model


# ========== Commands ==========

def cmd_train(args):
    console.banner(f"🚀 VEHICLE CLASSIFIER TRAINING ({args.mode})")
    _, model = _train_from_args(args)
    path = save_model(model, args.out)
    console.ok(f"Model written to {path}")
    return EXIT_OK


def _verdict_line(path, verdict):
    """path, label, score (inter) or distance (intra), matched clusters or Hamming count"""
    return f"{path}\t{verdict.label}\t{verdict.value!r}\t{verdict.detail}"


def cmd_classify(args):
    model = load_model(args.model)
    dumps = _dumps_from_args(args)
    console.info(f"🔍 Classifying {len(args.images)} images with {model.mode} model {args.model}")

    failures = 0
    for image_path in args.images:
        try:
            verdict = classify_path(model, image_path, dumps)
            line = _verdict_line(image_path, verdict)
        except UnmatchedQueryError:
            if args.on_unmatched == "unknown":
                line = f"{image_path}\tunknown\t0.0\t0"
            else:
                failures += 1
                line = f"{image_path}\tFAILED\t{UnmatchedQueryError.reason}"
        except ClassificationError as e:
            failures += 1
            line = f"{image_path}\tFAILED\t{e.reason}"
        except VehicleClassifierError as e:
            failures += 1
            console.fail(str(e))
            line = f"{image_path}\tFAILED\t{failure_reason(e)}"
        print(line, flush=True)

    if failures:
        console.warn(f"{failures} of {len(args.images)} images could not be classified")
        return EXIT_PARTIAL
    console.ok(f"Classified {len(args.images)} images")
    return EXIT_OK


def cmd_eval(args):
    if args.model is not None:
        model = load_model(args.model)
        dataset = load_dataset(args.data)
        console.info(f"📦 Using {model.mode} model {args.model}")
    else:
        if args.mode is None:
            raise _UsageError("eval needs either --model or --mode to train one")
        console.banner(f"🚀 VEHICLE CLASSIFIER EVALUATION ({args.mode})")
        dataset, model = _train_from_args(args)

    chosen = split(dataset, args.train_per_class, args.seed, args.protocol)
    console.info(f"🔍 Evaluating {len(chosen.eval)} images ({args.protocol} protocol)...")
    matrix = evaluate(model, chosen.eval, progress=not args.quiet)
    matrix.protocol = args.protocol

    sys.stdout.write(format_report(matrix, title=f"{model.mode.upper()}-CLASS CONFUSION MATRIX", seed=args.seed))
    if args.csv is not None:
        write_csv(matrix, args.csv)
        console.ok(f"Confusion matrix exported to {args.csv}")
    return EXIT_PARTIAL if matrix.failed.sum() else EXIT_OK


def cmd_synth(args):
    console.banner("🧪 GENERATING SYNTHETIC CORPORA")
    corpora = gen_synthetic(args.out, args.n_per_class, args.seed)
    for name, dataset in corpora.items():
        console.ok(f"{name}: classes {', '.join(dataset.classes)} ({len(dataset)} images) "
                   f"under {Path(args.out) / name}")
    return EXIT_OK


# ========== Argument Parsing ==========

def _add_feature_flags(parser):
    parser.add_argument("--sigma", type=_positive_float, help="Gaussian blur sigma (default 1.4)")
    parser.add_argument("--canny-low", type=_positive_float, help="absolute low threshold (default 0.1 x max gradient)")
    parser.add_argument("--canny-high", type=_positive_float, help="absolute high threshold (default 0.3 x max gradient)")
    parser.add_argument("--stride", type=_positive_int, help="dense anchor stride for intra mode (default 2)")


def _add_training_flags(parser, mode_required):
    parser.add_argument("--mode", choices=MODES, required=mode_required)
    parser.add_argument("--data", type=Path, required=True, help="dataset root, one sub-directory per class")
    parser.add_argument("--train-per-class", type=_positive_int, default=TRAIN_PER_CLASS)
    parser.add_argument("--k", type=_positive_int, default=K, help="codebook size (default 400)")
    parser.add_argument("--seed", type=_non_negative_int, default=SEED)
    parser.add_argument("--tau", type=_positive_float, help="cluster match threshold (default: auto)")
    _add_feature_flags(parser)


def _add_common_flags(parser):
    parser.add_argument("--dump-edges", type=Path, metavar="DIR", help="write Canny edge maps as PGM")
    parser.add_argument("--dump-descriptors", type=Path, metavar="DIR", help="write `x y v0..v127` descriptor dumps")
    parser.add_argument("--quiet", action="store_true", help="no progress bars or status lines")
    parser.add_argument("--verbose", action="store_true", help="debug logging")


def build_parser():
    parser = _Parser(prog="vehicleclassify", description="Image-based vehicle classification")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    train = commands.add_parser("train", help="train a model and write it to --out")
    _add_training_flags(train, mode_required=True)
    train.add_argument("--out", type=Path, required=True)
    _add_common_flags(train)
    train.set_defaults(func=cmd_train)

    classify = commands.add_parser("classify", help="classify images with a trained model")
    classify.add_argument("--model", type=Path, required=True)
    classify.add_argument("images", nargs="+", type=Path)
    classify.add_argument("--on-unmatched", choices=("unknown", "fail"), default="unknown",
                          help="what to print when no cluster matches an image")
    _add_common_flags(classify)
    classify.set_defaults(func=cmd_classify)

    evaluate_cmd = commands.add_parser("eval", help="split, (train,) classify and report a confusion matrix")
    _add_training_flags(evaluate_cmd, mode_required=False)
    evaluate_cmd.add_argument("--model", type=Path, help="evaluate an existing model instead of training")
    evaluate_cmd.add_argument("--protocol", choices=PROTOCOLS, default="whole")
    evaluate_cmd.add_argument("--csv", type=Path)
    _add_common_flags(evaluate_cmd)
    evaluate_cmd.set_defaults(func=cmd_eval)

    synth = commands.add_parser("synth", help="write the synthetic inter/intra corpora")
    synth.add_argument("--out", type=Path, required=True)
    synth.add_argument("--n-per-class", type=_positive_int, default=60)
    synth.add_argument("--seed", type=_non_negative_int, default=SEED)
    synth.add_argument("--quiet", action="store_true")
    synth.add_argument("--verbose", action="store_true")
    synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    console.setup(quiet=args.quiet)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _UsageError as e:
        parser.print_usage(sys.stderr)
        console.fail(str(e))
        return EXIT_USAGE
    except VehicleClassifierError as e:
        console.fail(str(e))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
