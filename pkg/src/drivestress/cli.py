"""Command-line front end.

    drivestress extract  --manifest M --out DIR
    drivestress evaluate --out DIR [--n 5]
    drivestress sweep    --manifest M --out DIR
    drivestress selftest

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dataset import build_samples, format_expanded_table
from .errors import DataError, DriveStressError, InvariantViolation
from .evaluate import config_digest, fig3_csv, sweep_n, table1_csv, table2_csv
from .features import extract_windows, format_feature_table, parse_feature_table
from .forest import dumps
from .ingest import infer_sample_rate, load_annotations, load_manifest, load_record, validate_drive_set
from .preprocess import preprocess_record, slice_windows

log = logging.getLogger("drivestress")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _update_run_meta(out: Path, command: str, meta: dict) -> None:
    path = out / "run_meta.json"
    doc = json.loads(path.read_text()) if path.exists() else {}
    doc["version"] = __version__
    doc[command] = meta
    write_atomic(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --- extract -----------------------------------------------------------------------


class DriveFailure(DataError):
    pass


def extract_drive(entry, cfg: RunConfig):
    """Features and log for one manifest entry."""
    try:
        rate = cfg.sample_rate_hz or infer_sample_rate(entry.record_path)
        record = load_record(entry.record_path, rate, drive_id=entry.drive_id)
        ann = load_annotations(entry.annotation_path)
        ((record, ann),) = validate_drive_set([record], [ann], max_mismatch_s=cfg.window_length_s)
        clean, warnings = preprocess_record(
            record, cfg.cutoffs(), cfg.filter_order, zero_phase=cfg.filter_pass == "zero-phase"
        )
        windows = slice_windows(clean, ann, cfg.window_length_s, cfg.window_hop_s)
        vectors, sections = extract_windows(windows, cfg.feature_params())
    except (DataError, OSError) as exc:
        raise DriveFailure(f"drive {entry.drive_id!r}: {type(exc).__name__}: {exc}") from exc
    meta = {
        "sample_rate_hz": rate,
        "samples": len(record),
        "warnings": warnings,
        "sections": [vars(s) for s in sections],
        "record_sha256": _sha256(entry.record_path),
        "annotation_sha256": _sha256(entry.annotation_path),
    }
    return vectors, meta


def _extract_job(args):
    entry, cfg = args
    try:
        return entry.drive_id, extract_drive(entry, cfg), None
    except DriveFailure as exc:
        if not cfg.skip_bad:
            raise
        return entry.drive_id, None, str(exc)


def cmd_extract(cfg: RunConfig) -> dict[str, list]:
    if not cfg.manifest or not cfg.out:
        raise UsageError("extract needs --manifest and --out")
    out = Path(cfg.out)
    entries = load_manifest(cfg.manifest)
    work = [(e, cfg) for e in entries]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_extract_job, work))
    else:
        results = [_extract_job(w) for w in work]

    tables, logs, skipped = {}, {}, {}
    for drive_id, result, error in results:
        if error is not None:
            log.error("skipping %s", error)
            skipped[drive_id] = error
            continue
        vectors, meta = result
        tables[drive_id] = vectors
        logs[drive_id] = meta
        write_atomic(out / "features" / f"{drive_id}.csv", format_feature_table(vectors))
        log.info("drive %s: %d feature windows", drive_id, len(vectors))
    write_atomic(
        out / "extraction_log.json",
        json.dumps({"drives": logs, "skipped": skipped}, indent=2, sort_keys=True) + "\n",
    )
    digest_cfg = cfg.digest_fields(
        "sample_rate_hz", "filter_order", "cutoff_ecg", "cutoff_resp", "cutoff_gsr", "filter_pass",
        "window_length_s", "window_hop_s", "gsr_min_prominence", "gsr_min_separation_s", "tachogram_rate_hz",
    )
    _update_run_meta(
        out,
        "extract",
        {
            "config": digest_cfg,
            "config_digest": config_digest(digest_cfg),
            "input_digests": {d: {"record": m["record_sha256"], "annotation": m["annotation_sha256"]} for d, m in logs.items()},
            "skipped": sorted(skipped),
            "seed": cfg.seed,
        },
    )
    return tables


# --- evaluate ----------------------------------------------------------------------


def load_feature_tables(directory: Path) -> list:
    files = sorted(directory.glob("*.csv"))
    if not files:
        raise DataError(f"no feature tables in {directory}")
    vectors = []
    for f in files:
        vectors.extend(parse_feature_table(f.read_text(), str(f)))
    return vectors


def cmd_evaluate(cfg: RunConfig, features_dir: str | None = None, table2_n: int | None = None):
    if not cfg.out:
        raise UsageError("evaluate needs --out")
    out = Path(cfg.out)
    src = Path(features_dir) if features_dir else out / "features"
    vectors = load_feature_tables(src)
    report = sweep_n(vectors, cfg.n_values, cfg.forest_config(), cfg.weights, cfg.jobs)
    if table2_n is not None and table2_n not in report.n_values:
        raise UsageError(f"--table2-n {table2_n} is not among the evaluated n values {report.n_values}")

    for n in report.n_values:
        write_atomic(out / "expanded" / f"n{n}.csv", format_expanded_table(build_samples(vectors, n, cfg.weights)))
    for (n, drive), model in sorted(report.models.items()):
        write_atomic(out / "models" / f"n{n}_{drive}.json", dumps(model) + "\n")
    write_atomic(out / "report.json", report.to_json())
    write_atomic(out / "table1.csv", table1_csv(report))
    write_atomic(out / "table2.csv", table2_csv(report, table2_n))
    write_atomic(out / "fig3.csv", fig3_csv(report))
    _update_run_meta(
        out,
        "evaluate",
        {
            "config_digest": report.metadata["config_digest"],
            "dataset_digest": report.metadata["dataset_digest"],
            "seed": cfg.seed,
            "n_values": report.n_values,
        },
    )
    return report


def _print_summary(report) -> None:
    for row in report.fig3():
        print(
            f"n={row['n']}: test accuracy {row['test_accuracy']:.3f}, weighted F1 {row['weighted_f1']:.3f}, "
            f"low F1 {row['low_f1']:.3f}, high F1 {row['high_f1']:.3f}"
        )


# --- argument parsing ----------------------------------------------------------------


def _n_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty n list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="drivestress", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"drivestress {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")

    ext = _Parser(add_help=False)
    ext.add_argument("--manifest", help="lines of <drive_id>,<record_csv>,<annotation>")
    ext.add_argument("--filter-pass", choices=("zero-phase", "single"))
    ext.add_argument("--skip-bad", action="store_true", default=None, help="skip drives that fail instead of stopping")

    ev = _Parser(add_help=False)
    ev.add_argument("--n", type=_n_list, help="window counts to sweep, e.g. 5 or 2,3,4,5")
    ev.add_argument("--features", help="feature table directory (default: OUT/features)")
    ev.add_argument("--table2-n", type=int, help="n reported in table2.csv (default: largest)")

    sub.add_parser("extract", parents=[common, ext], help="records -> per-drive feature tables")
    sub.add_parser("evaluate", parents=[common, ev], help="feature tables -> LOSO reports")
    sub.add_parser("sweep", parents=[common, ext, ev], help="extract then evaluate")
    sub.add_parser("selftest", help="analytic oracles and a synthetic end-to-end run")
    return p


def _config_from_args(args) -> RunConfig:
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    return load_config(
        args.config,
        manifest=getattr(args, "manifest", None),
        out=args.out,
        seed=args.seed,
        jobs=jobs,
        filter_pass=getattr(args, "filter_pass", None),
        skip_bad=getattr(args, "skip_bad", None),
        n_values=getattr(args, "n", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "selftest":
            from .selftest import run_selftest

            return EXIT_OK if run_selftest() else EXIT_INTERNAL
        cfg = _config_from_args(args)
        if cfg.manifest and not Path(cfg.manifest).exists():
            raise UsageError(f"manifest {cfg.manifest} does not exist")
        if args.command == "extract":
            tables = cmd_extract(cfg)
            print(f"extracted {len(tables)} drives into {Path(cfg.out) / 'features'}")
        elif args.command == "evaluate":
            _print_summary(cmd_evaluate(cfg, args.features, args.table2_n))
        elif args.command == "sweep":
            cmd_extract(cfg)
            _print_summary(cmd_evaluate(cfg, None, args.table2_n))
        return EXIT_OK
    except (UsageError, ConfigError) as exc:
        print(f"drivestress: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"drivestress: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (DataError, OSError) as exc:
        print(f"drivestress: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DriveStressError as exc:
        print(f"drivestress: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
