"""Command-line entry points: synth, extract, screen, select, train-eval, report.

Every command echoes its effective configuration (flags > config file >
defaults) into the output directory; re-running from that file with the same
seed reproduces the outputs byte for byte.  Exit status is nonzero iff an
error was reported.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .evaluate import (nested_cv, write_fold_metrics, write_summary,
                       write_summary_extended)
from .features import (build_matrix, read_feature_table, write_feature_table,
                       write_sidecar)
from .io import load_manifest
from .metrics import write_roc
from .selection import (MrmrSelector, screen_features, write_screening,
                        write_screening_describe, write_trajectory)
from .synth import KINDS, CohortSpec, make_cohort

DEFAULT_MIX = (("healthy", 0.40), ("osa_mild", 0.15), ("osa_severe", 0.15),
               ("copd_like", 0.20), ("ovs_like", 0.10))


def _parse_mix(text):
    fractions = []
    for part in text.split(","):
        kind, _, frac = part.partition("=")
        kind = kind.strip()
        if kind not in KINDS:
            raise ValueError(f"unknown profile kind {kind!r}")
        fractions.append((kind, float(frac)))
    total = sum(f for _, f in fractions)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"profile fractions must sum to 1, got {total}")
    return tuple(fractions)


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_effective_config(args):
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    return load_config(args.config, overrides)


def cmd_synth(args) -> int:
    config = _load_effective_config(args)
    out = _out_dir(args.out)
    mix = _parse_mix(args.mix) if args.mix else DEFAULT_MIX
    spec = CohortSpec(n=args.n, duration_h=args.duration_h, fractions=mix,
                      seed=config.seed)
    make_cohort(spec, out)
    config.write(out / "config.txt")
    print(f"wrote {args.n} synthetic recordings to {out}")
    return 0


def cmd_extract(args) -> int:
    config = _load_effective_config(args)
    out = _out_dir(args.out)
    recordings = load_manifest(args.manifest)
    matrix = build_matrix(recordings, config.model_kind,
                          is_training=config.augment, config=config,
                          jobs=config.jobs)
    write_feature_table(matrix, out / "features.csv")
    write_sidecar(out / "features.meta", config)
    config.write(out / "config.txt")
    print(f"wrote {len(matrix)} rows x {len(matrix.columns)} features to {out}")
    return 0


def cmd_screen(args) -> int:
    config = _load_effective_config(args)
    out = _out_dir(args.out)
    matrix = read_feature_table(args.features, config.model_kind)
    report = screen_features(matrix)
    write_screening(report, out / "screening.csv")
    write_screening_describe(report, out / "screening_describe.csv")
    config.write(out / "config.txt")
    print(f"screened {len(report)} features (unit of analysis: window)")
    return 0


def cmd_select(args) -> int:
    config = _load_effective_config(args)
    out = _out_dir(args.out)
    matrix = read_feature_table(args.features, config.model_kind)
    k = args.k if args.k is not None else config.select_k()
    if k <= 0:
        raise ValueError(f"{config.model_kind} uses no selection; pass --k")
    selector = MrmrSelector(k=k, bins=config.mi_bins)
    selector.fit(matrix.X, matrix.y, feature_names=matrix.columns)
    write_trajectory(selector.trajectory_, out / "selection.csv")
    config.write(out / "config.txt")
    print(f"selected {k} features; trajectory in {out / 'selection.csv'}")
    return 0


def cmd_train_eval(args) -> int:
    config = _load_effective_config(args)
    out = _out_dir(args.out)
    recordings = load_manifest(args.manifest)
    report = nested_cv(recordings, config)
    write_summary(report, out / "summary.csv")
    write_summary_extended(report, out / "summary_extended.csv")
    write_fold_metrics(report, out / "metrics_folds.csv")
    for fold in report.folds:
        write_roc(fold.patient_metrics.roc, out / f"roc_patient_fold{fold.fold}.csv")
        write_roc(fold.window_metrics.roc, out / f"roc_window_fold{fold.fold}.csv")
        if fold.selection_trajectory:
            write_trajectory(fold.selection_trajectory,
                             out / f"selection_fold{fold.fold}.csv")
        fold.bundle.save(out / f"model_fold{fold.fold}.json")
    config.write(out / "config.txt")
    auroc = report.aggregates[("patient", "auroc")]
    print(f"{config.model_kind}/{config.classifier}: per-patient AUROC "
          f"median {auroc['median']:.3f} (sd {auroc['sd']:.3f}) over "
          f"{config.n_outer} outer folds")
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run)
    metrics_path = run_dir / "metrics_folds.csv"
    if not metrics_path.is_file():
        raise FileNotFoundError(f"no metrics_folds.csv under {run_dir}")
    values = {}
    with open(metrics_path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["level"], row["metric"])
            values.setdefault(key, []).append(float(row["value"]))
    lines = ["level,metric,median,iqr,mean,sd"]
    for (level, metric), vals in sorted(values.items()):
        arr = np.array(vals)
        q1, q3 = np.percentile(arr, [25, 75])
        lines.append(f"{level},{metric},{np.median(arr)!r},{q3 - q1!r},"
                     f"{arr.mean()!r},{arr.std()!r}")
    text = "\n".join(lines) + "\n"
    with open(run_dir / "report.csv", "w") as fh:
        fh.write(text)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oxiscreen",
        description="Overnight SpO2 biomarkers and COPD screening pipeline")
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--jobs", type=int, help="worker count (results are "
                        "identical for any value)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--duration-h", type=float, default=8.0)
    p.add_argument("--mix", help="kind=frac,... (fractions sum to 1)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="manifest -> feature table")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("screen", help="rank-sum screening of a feature table")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("select", help="mRMR selection trajectory")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train-eval", help="nested cross-validated evaluation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("report", help="summarise a train-eval output directory")
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # CLI boundary: report and signal failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
