"""Single entry point: serve | simulate | extract | train | predict | evaluate | ablate.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys

from drowse import evaluation as ez
from drowse import events, features, synth
from drowse.models import fit_pipeline, load_pipeline, predict_pipeline, save_pipeline


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drowse",
        description="Office drowsiness monitoring: task-load host, feature extraction, KSS models.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="chatty progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the ingestion/task-load HTTP service")
    serve.add_argument("--addr", help="listen address host:port (env SERVICE_ADDR)")
    serve.add_argument("--storage-root", help="session log directory (env STORAGE_ROOT)")
    serve.add_argument("--config", help="JSON config file with addr/storage_root")

    simulate = sub.add_parser("simulate", help="generate synthetic session logs")
    simulate.add_argument("--spec", help="synthesis spec JSON file (defaults used if omitted)")
    simulate.add_argument("--out", required=True, help="output directory for .session.jsonl files")
    simulate.add_argument("--seed", type=int, help="override the spec seed")
    simulate.add_argument("--subjects", type=int, help="override the subject count")

    extract = sub.add_parser("extract", help="compute labeled feature windows from session logs")
    extract.add_argument("--in", dest="input", required=True, help="directory of .session.jsonl files")
    extract.add_argument("--out", required=True, help="output features CSV")

    train = sub.add_parser("train", help="fit a model on a features CSV")
    train.add_argument("--in", dest="input", required=True, help="features CSV")
    train.add_argument("--model", required=True, choices=ez.MODEL_KINDS)
    train.add_argument("--out", required=True, help="output model document")
    train.add_argument("--drop-feature", choices=features.FEATURE_NAMES, help="train without one feature")
    train.add_argument("--label", choices=ez.LABEL_MODES, default="diff", help="training label (default diff)")

    predict = sub.add_parser("predict", help="apply a trained model to a features CSV")
    predict.add_argument("--model", required=True, help="model document from `train`")
    predict.add_argument("--in", dest="input", required=True, help="features CSV")
    predict.add_argument("--out", required=True, help="output predictions CSV")

    evaluate = sub.add_parser("evaluate", help="full evaluation report on a features CSV")
    evaluate.add_argument("--in", dest="input", required=True, help="features CSV")
    evaluate.add_argument("--split", choices=("subjects", "pooled"), default="subjects")
    evaluate.add_argument("--label", choices=ez.LABEL_MODES, default="diff")
    evaluate.add_argument("--out", required=True, help="output report CSV")
    evaluate.add_argument("--test-fraction", type=float, default=0.25)
    evaluate.add_argument("--seed", type=int, default=0, help="pooled split seed")
    evaluate.add_argument("--ablation-model", choices=ez.MODEL_KINDS, default="ols")

    ablate = sub.add_parser("ablate", help="leave-one-feature-out retraining table")
    ablate.add_argument("--in", dest="input", required=True, help="features CSV")
    ablate.add_argument("--model", required=True, choices=ez.MODEL_KINDS)
    ablate.add_argument("--split", choices=("subjects", "pooled"), default="subjects")
    ablate.add_argument("--label", choices=ez.LABEL_MODES, default="diff")
    ablate.add_argument("--test-fraction", type=float, default=0.25)
    ablate.add_argument("--seed", type=int, default=0, help="pooled split seed")
    ablate.add_argument("--out", help="optional output CSV")

    return parser


def _split_spec(args) -> ez.SplitSpec:
    if args.split == "subjects":
        return ez.LeaveSubjectsOut(args.test_fraction)
    return ez.Pooled(args.test_fraction, seed=args.seed)


def _read_samples(path: str) -> list[features.LabeledSample]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return features.read_features_csv(fh)


def _cmd_serve(args) -> int:
    from drowse.service import ServiceConfig, load_service_config, serve

    config = load_service_config(args.config)
    config = ServiceConfig(
        addr=args.addr or config.addr,
        storage_root=args.storage_root or config.storage_root,
    )
    print(f"listening on {config.addr}, storing sessions in {config.storage_root}", flush=True)
    serve(config)
    return 0


def _cmd_simulate(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = synth.spec_from_dict(json.load(fh))
    else:
        spec = synth.SynthSpec()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.subjects is not None:
        overrides["subjects"] = args.subjects
    if overrides:
        from dataclasses import replace

        spec = replace(spec, **overrides)
    os.makedirs(args.out, exist_ok=True)
    total_events = 0
    for subject in range(spec.subjects):
        log = synth.generate_session(spec, subject)
        path = os.path.join(args.out, log.session_id + events.SESSION_FILE_SUFFIX)
        events.write_session_file(path, log)
        total_events += len(log.events)
        if args.verbose:
            print(f"wrote {path} ({len(log.events)} events)")
    print(f"simulated {spec.subjects} subjects, {total_events} events -> {args.out}")
    return 0


def _cmd_extract(args) -> int:
    paths = sorted(glob.glob(os.path.join(args.input, "*" + events.SESSION_FILE_SUFFIX)))
    if not paths:
        raise ValueError(f"no {events.SESSION_FILE_SUFFIX} files under {args.input}")
    samples: list[features.LabeledSample] = []
    dropped_missing = dropped_short = 0
    for path in paths:
        log = events.read_session_file(path)
        result = features.extract_samples(log)
        samples.extend(result.samples)
        dropped_missing += result.dropped_missing
        dropped_short += result.dropped_short
        if args.verbose:
            print(f"{path}: {len(result.samples)} samples")
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        features.write_features_csv(fh, samples)
    print(
        f"extracted {len(samples)} samples from {len(paths)} sessions "
        f"(dropped: {dropped_missing} missing, {dropped_short} short) -> {args.out}"
    )
    return 0


def _cmd_train(args) -> int:
    samples = _read_samples(args.input)
    if not samples:
        raise ValueError("features CSV has no rows")
    names = list(features.FEATURE_NAMES)
    if args.drop_feature:
        names.remove(args.drop_feature)
    import numpy as np

    X = np.array(
        [[getattr(s.features, name) for name in names] for s in samples], dtype=float
    )
    y = np.array(
        [s.kss_diff if args.label == "diff" else s.kss_raw for s in samples], dtype=float
    )
    pipeline = fit_pipeline(args.model, X, y, tuple(names))
    save_pipeline(args.out, pipeline)
    print(f"trained {args.model} on {len(samples)} samples ({args.label} labels) -> {args.out}")
    return 0


def _cmd_predict(args) -> int:
    import csv

    import numpy as np

    pipeline = load_pipeline(args.model)
    samples = _read_samples(args.input)
    X = np.array(
        [[getattr(s.features, name) for name in pipeline.feature_names] for s in samples],
        dtype=float,
    )
    predictions = predict_pipeline(pipeline, X) if samples else []
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject_id", "window_start_ms", "window_end_ms", "prediction"])
        for sample, value in zip(samples, predictions):
            writer.writerow(
                [sample.subject_id, sample.window_start_ms, sample.window_end_ms, repr(float(value))]
            )
    print(f"predicted {len(samples)} rows -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    samples = _read_samples(args.input)
    report = ez.run_full_report(
        samples, _split_spec(args), label_mode=args.label, ablation_kind=args.ablation_model
    )
    print(ez.format_report(report), end="")
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        ez.write_report_csv(fh, report)
    print(f"report -> {args.out}")
    return 0


def _cmd_ablate(args) -> int:
    samples = _read_samples(args.input)
    table = ez.ablate(samples, args.model, _split_spec(args), label_mode=args.label)
    width = max(len(name) for name, _ in table) + 10
    for removed, r in table:
        label = "full model" if removed == "(none)" else f"without {removed}"
        print(f"{label:<{width}} {r:.4f}")
    if args.out:
        import csv

        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["removed_feature", "r"])
            for removed, r in table:
                writer.writerow([removed, repr(r)])
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "simulate": _cmd_simulate,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "ablate": _cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
