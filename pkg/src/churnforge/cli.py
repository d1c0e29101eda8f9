"""Command-line entry point: ``churnforge <subcommand>``.

Exit codes: 0 success, 1 data/runtime error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .analysis import (
    UndefinedCorrelation,
    bin_dropout_correlation,
    bin_success_rates,
    bin_table_from_csv,
    bin_table_to_csv,
    degree_correlation,
    render_bin_table,
)
from .classify import gnb_fit, knn_fit
from .evaluation import (
    DEFAULT_RATIOS,
    EvaluationError,
    render_sweep,
    split_sweep,
    sweep_to_csv,
)
from .ingest import Format, SchemaError, finalize_log, read_events, serialize_events
from .label import (
    DEFAULT_PSI,
    label_by_threshold,
    label_counts,
    label_dataset,
    labels_from_csv,
    labels_to_csv,
    split_cut_time,
)
from .model import ConfigurationError, DropoutLabel, LabelMode, LabelRule, ValidationError
from .network import features_from_log, features_to_csv
from .synth import MarketConfig, coerce_config_values, default_config, generate_market, parse_config_text

log = logging.getLogger("churnforge")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
SEED_ENV = "CHURNFORGE_SEED"


class DataError(RuntimeError):
    pass


class UsageError(RuntimeError):
    pass


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_seed(flag: Optional[int]) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def parse_ratio(text: str) -> float:
    """``2:1`` means two thirds for training; a bare number is the fraction itself."""
    try:
        if ":" in text:
            a, b = (Fraction(p) for p in text.split(":", 1))
            value = a / (a + b)
        else:
            value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid ratio {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"ratio {text!r} must give a fraction in (0, 1)")
    return float(value)


def parse_ratios(text: str) -> List[int]:
    try:
        values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratio list {text!r}") from None
    if not values or any(not 0 < v < 100 for v in values):
        raise argparse.ArgumentTypeError("train percents must lie in (0, 100)")
    return values


class Run:
    """Collects parameters and outputs of one subcommand for its manifest."""

    def __init__(self, name: str, args: argparse.Namespace, out_dir: Path):
        self.name = name
        self.out_dir = out_dir
        self.started = time.perf_counter()
        self.params: Dict[str, object] = {}
        self.inputs: List[str] = []
        self.outputs: List[str] = []
        self.seed: Optional[int] = None
        self.quiet = args.quiet

    def write(self, path: Path, text: str) -> None:
        write_atomic(path, text)
        self.outputs.append(str(path))

    def say(self, text: str) -> None:
        if not self.quiet:
            print(text)

    def finish(self, manifest_dir: Optional[Path] = None) -> None:
        manifest = {
            "subcommand": self.name,
            "parameters": self.params,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "version": __version__,
            "duration_seconds": round(time.perf_counter() - self.started, 6),
        }
        where = (manifest_dir or self.out_dir) / f"manifest-{self.name}.json"
        write_atomic(where, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_log(path: str, fmt: Optional[str], horizon=None):
    events, report = read_events(path, fmt)
    if report.events_rejected:
        log.warning(report.summary())
    if not events:
        raise DataError(f"{path}: no valid events\n{report.summary()}")
    return finalize_log(events, horizon, report), report


def _labeled(args, log_):
    mode = LabelMode(args.label_mode)
    if mode is LabelMode.WINDOW_ABSENCE:
        cut = split_cut_time(log_, args.cut_ratio)
        return label_dataset(log_, cut), cut
    return label_by_threshold(log_, LabelRule(mode, args.psi)), None


# -- simulate ---------------------------------------------------------------

_SIM_FLAGS = {
    "n_workers": int, "n_tasks": int, "horizon_days": int, "task_rate": float,
    "worker_join_spread": float, "skill_alpha": float, "skill_beta": float,
    "base_participation_prob": float, "streak_hazard": float, "base_hazard": float,
}


def cmd_simulate(args) -> int:
    seed = resolve_seed(args.seed)
    settings: Dict[str, object] = {}
    if args.config:
        settings.update(parse_config_text(Path(args.config).read_text(encoding="utf-8")))
    settings.update({k: getattr(args, k) for k in _SIM_FLAGS if getattr(args, k) is not None})
    settings["seed"] = seed
    config = default_config(seed).replace(**coerce_config_values({k: str(v) for k, v in settings.items()}))

    fmt = Format(args.format)
    out = Path(args.out) if args.out else Path(args.out_dir) / f"events.{fmt.value}"
    run = Run("simulate", args, out.parent)
    run.seed = seed
    run.params = {"config": {k: getattr(config, k) for k in MarketConfig.__dataclass_fields__}, "format": fmt.value}

    event_log = generate_market(config)
    run.write(out, serialize_events(event_log.events, fmt))
    run.finish()
    run.say(f"wrote {len(event_log)} events over {len(event_log.task_ids)} tasks "
            f"and {len(event_log.worker_ids)} workers to {out}")
    return EXIT_OK


# -- ingest -----------------------------------------------------------------

def cmd_ingest(args) -> int:
    events, report = read_events(args.events, args.in_format)
    run = Run("ingest", args, Path(args.out_dir))
    run.inputs.append(args.events)
    horizon = tuple(args.horizon) if args.horizon else None
    if not events:
        raise DataError(f"{args.events}: no valid events\n{report.summary()}")
    event_log = finalize_log(events, horizon, report)
    fmt = Format(args.format)
    run.params = {"format": fmt.value, "horizon": [event_log.horizon_start, event_log.horizon_end]}
    run.write(Path(args.out_dir) / f"events.normalized.{fmt.value}", serialize_events(event_log.events, fmt))
    run.write(Path(args.out_dir) / "ingest-report.txt", report.summary() + "\n")
    run.finish()
    run.say(report.summary())
    return EXIT_OK


# -- analyze ----------------------------------------------------------------

def _corr_rows(items):
    rows = []
    for name, fn in items:
        try:
            res = fn()
            rows.append((name, repr(res.rho), res.n_points))
        except (UndefinedCorrelation, ValueError) as exc:
            log.warning("%s: %s", name, exc)
            rows.append((name, "undefined", 0))
    return rows


def _corr_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("metric", "rho", "n_points"))
    writer.writerows(rows)
    return buf.getvalue()


def _corr_text(rows) -> str:
    width = max(len(r[0]) for r in rows)
    lines = []
    for name, rho, n in rows:
        shown = rho if rho == "undefined" else f"{float(rho):+.4f}"
        lines.append(f"{name.ljust(width)}  rho={shown}  n={n}")
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir)
    run = Run("analyze", args, out_dir)
    if args.from_bins:
        run.inputs.append(args.from_bins)
        run.params = {"from_bins": args.from_bins}
        table = bin_table_from_csv(Path(args.from_bins).read_text(encoding="utf-8"))
        corr = [
            ("bin_rho_excluding_top", lambda: bin_dropout_correlation(table, True)),
            ("bin_rho_including_top", lambda: bin_dropout_correlation(table, False)),
        ]
    else:
        if not args.events:
            raise UsageError("analyze needs --events or --from-bins")
        run.inputs.append(args.events)
        event_log, _ = _load_log(args.events, args.in_format)
        labeled, cut = _labeled(args, event_log)
        run.params = {"cut_ratio": args.cut_ratio, "cut_time": cut, "psi": args.psi,
                      "label_mode": args.label_mode}
        full = features_from_log(event_log)
        table = bin_success_rates([lw.features for lw in labeled if lw.is_dropout])
        run.write(out_dir / "features.csv", features_to_csv(full))
        run.write(out_dir / "labels.csv", labels_to_csv(labeled))
        counts = label_counts(labeled)
        run.say(f"labeled {len(labeled)} workers: {counts[DropoutLabel.DROPOUT]} dropouts, "
                f"{counts[DropoutLabel.ACTIVE]} active")
        corr = [
            ("degree_rho", lambda: degree_correlation(full)),
            ("bin_rho_excluding_top", lambda: bin_dropout_correlation(table, True)),
            ("bin_rho_including_top", lambda: bin_dropout_correlation(table, False)),
        ]

    rows = _corr_rows(corr)
    run.write(out_dir / "table1.csv", bin_table_to_csv(table))
    run.write(out_dir / "table1.txt", render_bin_table(table))
    run.write(out_dir / "correlation.csv", _corr_csv(rows))
    run.write(out_dir / "correlation.txt", _corr_text(rows))
    run.finish()
    run.say(render_bin_table(table) + _corr_text(rows))
    return EXIT_OK


# -- evaluate ---------------------------------------------------------------

def cmd_evaluate(args) -> int:
    seed = resolve_seed(args.seed)
    out_dir = Path(args.out_dir)
    run = Run("evaluate", args, out_dir)
    run.seed = seed
    if args.labels:
        run.inputs.append(args.labels)
        labeled = labels_from_csv(Path(args.labels).read_text(encoding="utf-8"))
        cut = None
    elif args.events:
        run.inputs.append(args.events)
        event_log, _ = _load_log(args.events, args.in_format)
        labeled, cut = _labeled(args, event_log)
    else:
        raise UsageError("evaluate needs --events or --labels")
    run.params = {"ratios": list(args.ratios), "cut_ratio": args.cut_ratio, "cut_time": cut,
                  "psi": args.psi, "label_mode": args.label_mode, "scale": not args.no_scale}
    rows = split_sweep(labeled, args.ratios, seed, scale=not args.no_scale)
    run.write(out_dir / "table2.csv", sweep_to_csv(rows))
    run.write(out_dir / "table2.txt", render_sweep(rows))
    if args.dump_models:
        # fitted on the whole labeled pool; diagnostic only
        dumps = [knn_fit(labeled, k, scale=not args.no_scale).dump() for k in (1, 3)]
        dumps.append(gnb_fit(labeled).dump())
        run.write(out_dir / "models.txt", "\n\n".join(dumps) + "\n")
    run.finish()
    run.say(render_sweep(rows))
    return EXIT_OK


# -- report -----------------------------------------------------------------

def _csv_as_text(path: Path) -> str:
    rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    widths = [max(len(r[i]) for r in rows if i < len(r)) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


def cmd_report(args) -> int:
    out_dir = Path(args.out_dir)
    found = False
    for name, title in (("table1.csv", "Dropouts by success rate"),
                        ("correlation.csv", "Correlations"),
                        ("table2.csv", "Classification accuracy (%)")):
        path = out_dir / name
        if path.exists():
            found = True
            print(f"== {title} ({path})")
            print(_csv_as_text(path))
    if not found:
        raise DataError(f"no reports found in {out_dir}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _global_options(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default,
                        help=f"random seed (default: ${SEED_ENV}, else 0)")
    parser.add_argument("--format", choices=[f.value for f in Format],
                        default=argparse.SUPPRESS if suppress else "csv",
                        help="event file format for outputs (default: csv)")
    parser.add_argument("--out-dir", default=argparse.SUPPRESS if suppress else ".",
                        help="directory for outputs and manifests (default: .)")
    parser.add_argument("--quiet", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="suppress progress output")


def _labeling_options(parser):
    parser.add_argument("--in-format", choices=[f.value for f in Format], default=None,
                        help="input event format (default: guessed from extension)")
    parser.add_argument("--cut-ratio", type=parse_ratio, default=parse_ratio("2:1"),
                        help="task share before the labeling cut, as a:b or a fraction")
    parser.add_argument("--psi", type=int, default=DEFAULT_PSI,
                        help="threshold in seconds for the psi label modes")
    parser.add_argument("--label-mode", choices=[m.value for m in LabelMode],
                        default=LabelMode.WINDOW_ABSENCE.value, help="dropout labeling rule")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="churnforge", description=__doc__.splitlines()[0],
                                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic market event log", formatter_class=fmt)
    _global_options(p, suppress=True)
    p.add_argument("--config", help="key=value config file (flags win)")
    p.add_argument("--out", help="output path (default: OUT_DIR/events.FORMAT)")
    defaults = MarketConfig()
    for name, kind in _SIM_FLAGS.items():
        flag = "--participation-prob" if name == "base_participation_prob" else "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, type=kind, default=None,
                       help=f"(default: {getattr(defaults, name)})")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="validate and normalize an event log", formatter_class=fmt)
    _global_options(p, suppress=True)
    p.add_argument("--events", required=True, help="input event file")
    p.add_argument("--in-format", choices=[f.value for f in Format], default=None,
                   help="input event format (default: guessed from extension)")
    p.add_argument("--horizon", nargs=2, type=int, metavar=("START", "END"),
                   help="observation window in seconds (default: span of the events)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="degree features, labels, dropout table and correlations",
                       formatter_class=fmt)
    _global_options(p, suppress=True)
    p.add_argument("--events", help="input event file")
    p.add_argument("--from-bins", help="CSV of pre-binned rows (range,count,mean_success_rate_pct)")
    _labeling_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="classifier accuracy over train/test split ratios",
                       formatter_class=fmt)
    _global_options(p, suppress=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--events", help="input event file (labeled with the chosen rule)")
    src.add_argument("--labels", help="labels CSV written by analyze")
    p.add_argument("--ratios", type=parse_ratios, default=list(DEFAULT_RATIOS),
                   help="comma-separated train percents")
    p.add_argument("--no-scale", action="store_true", help="disable z-scoring for k-NN")
    p.add_argument("--dump-models", action="store_true",
                   help="also write models.txt with scaler stats and class moments")
    _labeling_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="print the CSV reports in OUT_DIR as aligned text",
                       formatter_class=fmt)
    _global_options(p, suppress=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, UsageError) as exc:
        print(f"churnforge: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, ValidationError, DataError, EvaluationError, OSError) as exc:
        print(f"churnforge: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"churnforge: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
