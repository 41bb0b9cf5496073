"""Command line: evaluate one (scheme, sampling) cell or the full grid."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .data import load_dataset, load_timestamps
from .evaluate import SCHEMES, EvalConfig, run_eval
from .folds import OccConfig
from .report import format_significances, format_table, save_reports
from .sampling import SAMPLING_METHODS

log = logging.getLogger(__name__)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jiteval",
        description="Train and score random-forest bug prediction over a "
                    "mined commit dataset.",
    )
    parser.add_argument("--dataset", required=True, help="dataset CSV")
    parser.add_argument("--timestamps", help="committer-time sidecar CSV "
                                             "(required for the occ scheme)")
    parser.add_argument("--scheme", choices=SCHEMES, default="cv10")
    parser.add_argument("--sampling", choices=SAMPLING_METHODS, default="baseline")
    parser.add_argument("--trees", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--all", action="store_true",
                        help="run every scheme x sampling combination")
    parser.add_argument("--report", help="write the machine-readable report here")
    parser.add_argument("--occ-sgap", type=int)
    parser.add_argument("--occ-gap", type=int)
    parser.add_argument("--occ-egap", type=int)
    parser.add_argument("--occ-update", type=int)
    parser.add_argument("--occ-train-days", type=int)
    parser.add_argument("--occ-test-days", type=int)
    return parser


def _occ_config(args: argparse.Namespace) -> OccConfig:
    occ = OccConfig()
    overrides = {
        "sgap": args.occ_sgap,
        "gap": args.occ_gap,
        "egap": args.occ_egap,
        "update": args.occ_update,
        "train_days": args.occ_train_days,
        "test_days": args.occ_test_days,
    }
    updates = {k: v for k, v in overrides.items() if v is not None}
    return replace(occ, **updates) if updates else occ


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    dataset = load_dataset(args.dataset)
    timestamps = None
    if args.timestamps:
        timestamps = load_timestamps(args.timestamps, dataset.commits)
    occ = _occ_config(args)

    if args.all:
        combos = [(scheme, sampling) for scheme in SCHEMES
                  for sampling in SAMPLING_METHODS]
    else:
        combos = [(args.scheme, args.sampling)]

    reports = []
    for scheme, sampling in combos:
        if scheme == "occ" and timestamps is None:
            log.error("the occ scheme needs --timestamps")
            return 2
        config = EvalConfig(trees=args.trees, sampling=sampling, scheme=scheme,
                            occ=occ, seed=args.seed)
        log.info("evaluating %s / %s ...", scheme, sampling)
        reports.append(run_eval(dataset.X, dataset.y, timestamps, config))

    print(format_table(reports))
    if len(reports) == 1:
        print(format_significances(reports[0]))
    if args.report:
        save_reports(args.report, reports)
        log.info("wrote %s", args.report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
