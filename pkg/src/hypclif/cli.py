"""Command-line harness: ``hypclif run | report | calibrate``.

Exit codes: 0 all checks pass, 1 at least one check failed, 2 invalid
configuration or unreadable input (nothing is written in that case).
Report files are bit-identical for the same configuration whatever
HYPCLIF_THREADS is set to: every experiment runs in its own worker process
with single-threaded BLAS and rows are assembled in a fixed order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import multiprocessing as mp
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .tolerances import VERSION

MAX_DIM = 6
FORMATS = ("csv", "json")
COLUMNS = ("experiment", "check", "n", "order", "param", "value", "tolerance", "pass")
BLAS_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class ConfigError(ValueError):
    pass


def _experiment_names():
    from .experiments import EXPERIMENTS

    return tuple(EXPERIMENTS)


@dataclass
class ExperimentConfig:
    dim: int = 3
    orders: list = field(default_factory=lambda: [16, 32, 64])
    seed: int = 0
    out: str = "hypclif_report.csv"
    format: str = "csv"
    experiments: list = field(default_factory=lambda: ["all"])
    tol_scale: float = 1.0

    def validate(self) -> "ExperimentConfig":
        if not isinstance(self.dim, int) or isinstance(self.dim, bool) or not 3 <= self.dim <= MAX_DIM:
            raise ConfigError(f"dim must be an integer in [3, {MAX_DIM}]")
        if not self.orders or any(not isinstance(o, int) or isinstance(o, bool) or o < 2 for o in self.orders):
            raise ConfigError("orders must be a non-empty list of integers >= 2")
        if list(self.orders) != sorted(set(self.orders)):
            raise ConfigError("orders must be strictly ascending")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if not (isinstance(self.tol_scale, (int, float)) and math.isfinite(self.tol_scale) and self.tol_scale > 0):
            raise ConfigError("tol-scale must be a positive number")
        known = _experiment_names()
        names = list(known) if "all" in self.experiments else list(self.experiments)
        bad = [e for e in names if e not in known]
        if bad or not names:
            raise ConfigError(f"unknown experiment(s) {bad}; known: {', '.join(known)}")
        # canonical order, duplicates dropped
        self.experiments = [e for e in known if e in names]
        parent = Path(self.out).resolve().parent
        if not parent.is_dir():
            raise ConfigError(f"output directory {parent} does not exist")
        return self


def _parse_orders(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"orders must be comma-separated integers, got {text!r}") from None


def build_config(args) -> ExperimentConfig:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if "experiment" in cfg:
            cfg["experiments"] = cfg.pop("experiment")
        if isinstance(cfg.get("experiments"), str):
            cfg["experiments"] = [s.strip() for s in cfg["experiments"].split(",")]
        if isinstance(cfg.get("orders"), str):
            cfg["orders"] = _parse_orders(cfg["orders"])
        unknown = set(cfg) - set(ExperimentConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if args.dim is not None:
        cfg["dim"] = args.dim
    if args.orders is not None:
        cfg["orders"] = _parse_orders(args.orders)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["out"] = args.out
    if args.format is not None:
        cfg["format"] = args.format
    if args.experiment is not None:
        cfg["experiments"] = [s.strip() for s in args.experiment.split(",") if s.strip()]
    if args.tol_scale is not None:
        cfg["tol_scale"] = args.tol_scale
    return ExperimentConfig(**cfg).validate()


def thread_cap() -> int:
    raw = os.environ.get("HYPCLIF_THREADS", "").strip()
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"HYPCLIF_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ConfigError("HYPCLIF_THREADS must be >= 1")
    return k


# workers


def _worker_init():
    for var in BLAS_VARS:
        os.environ[var] = "1"


def _run_one(name, dim, seed, orders, scale):
    from .experiments import run_experiment

    try:
        return run_experiment(name, dim, seed, orders, scale)
    except Exception as exc:  # reported as a failing row, the run continues
        msg = f"{type(exc).__name__}: {exc}"
        return [
            {"experiment": name, "check": "error", "n": dim, "order": 0, "param": msg,
             "value": float("nan"), "tolerance": 0.0, "pass": False}
        ]


def execute(cfg: ExperimentConfig, threads: int) -> list[dict]:
    for var in BLAS_VARS:
        os.environ[var] = "1"
    jobs = [(name, cfg.dim, cfg.seed, tuple(cfg.orders), float(cfg.tol_scale)) for name in cfg.experiments]
    ctx = mp.get_context("spawn")
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs)), mp_context=ctx, initializer=_worker_init) as pool:
        results = list(pool.map(_run_one, *zip(*jobs)))
    return [row for rows in results for row in rows]


# report files


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows, meta) -> str:
    clean = [{c: (None if isinstance(r[c], float) and math.isnan(r[c]) else r[c]) for c in COLUMNS} for r in rows]
    return json.dumps({"meta": meta, "columns": list(COLUMNS), "rows": clean}, indent=1, sort_keys=True) + "\n"


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(rows, cfg: ExperimentConfig) -> list[Path]:
    meta = {
        "dim": cfg.dim, "orders": list(cfg.orders), "seed": cfg.seed, "experiments": list(cfg.experiments),
        "tol_scale": cfg.tol_scale, "tolerance_table": VERSION,
    }
    out = Path(cfg.out)
    mirror = out.with_suffix(".json")
    texts = {}
    if cfg.format == "csv":
        texts[out] = rows_to_csv(rows)
        if mirror != out:
            texts[mirror] = rows_to_json(rows, meta)
    else:
        texts[out] = rows_to_json(rows, meta)
    for path, text in texts.items():
        _atomic_write(path, text)
    return list(texts)


def _parse_bool(v):
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("true", "1"):
        return True
    if str(v).lower() in ("false", "0"):
        return False
    raise ConfigError(f"bad pass value {v!r}")


def read_report(path) -> list[dict]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from None
    try:
        if p.suffix == ".json" or text.lstrip().startswith("{"):
            data = json.loads(text)
            rows = data["rows"] if isinstance(data, dict) else data
        else:
            reader = csv.DictReader(io.StringIO(text))
            if reader.fieldnames is None:
                return []
            if tuple(reader.fieldnames) != COLUMNS:
                raise ConfigError(f"{p}: unexpected columns {reader.fieldnames}")
            rows = list(reader)
        out = []
        for r in rows:
            value = r["value"]
            out.append(
                {
                    "experiment": str(r["experiment"]), "check": str(r["check"]), "n": int(r["n"]),
                    "order": int(r["order"]), "param": str(r["param"]),
                    "value": float("nan") if value in (None, "") else float(value),
                    "tolerance": float(r["tolerance"]), "pass": _parse_bool(r["pass"]),
                }
            )
        return out
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{p}: malformed report ({exc})") from None


def format_table(rows) -> str:
    """Aligned table, failures first, then grouped by experiment (stable within groups)."""
    head = ("status", "experiment", "check", "n", "order", "value", "tolerance", "param")
    order = {}
    for r in rows:
        order.setdefault(r["experiment"], len(order))
    srt = sorted(enumerate(rows), key=lambda ir: (ir[1]["pass"], order[ir[1]["experiment"]], ir[0]))
    body = [
        ("PASS" if r["pass"] else "FAIL", r["experiment"], r["check"], str(r["n"]), str(r["order"]),
         f"{r['value']:.3e}", f"{r['tolerance']:.1e}", r["param"])
        for _, r in srt
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head, *body]]
    return "\n".join(lines) + "\n"


# commands


def cmd_run(args) -> int:
    try:
        cfg = build_config(args)
        threads = thread_cap()
    except (ConfigError, TypeError) as exc:
        print(f"hypclif: invalid configuration: {exc}", file=sys.stderr)
        return 2
    rows = execute(cfg, threads)
    paths = write_report(rows, cfg)
    failed = [r for r in rows if not r["pass"]]
    if not args.quiet:
        sys.stdout.write(format_table(rows))
    print(f"{len(rows)} checks, {len(failed)} failed; report: {', '.join(map(str, paths))}", file=sys.stderr)
    if failed:
        sys.stderr.write("failing checks:\n" + format_table(failed))
        return 1
    return 0


def cmd_report(args) -> int:
    rows = []
    try:
        for p in args.files:
            rows.extend(read_report(p))
    except ConfigError as exc:
        print(f"hypclif: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(format_table(rows))
    return 0


def cmd_calibrate(args) -> int:
    from . import formulas as F
    from .tolerances import tol

    dim = 3 if args.dim is None else args.dim
    names = F.FORMULAS if args.formula in (None, "all") else tuple(s.strip() for s in args.formula.split(","))
    if not 3 <= dim <= MAX_DIM or any(nm not in F.FORMULAS for nm in names):
        print(f"hypclif: invalid configuration: dim in [3, {MAX_DIM}], formulas from {', '.join(F.FORMULAS)}", file=sys.stderr)
        return 2
    if args.out is not None and not Path(args.out).resolve().parent.is_dir():
        print("hypclif: invalid configuration: output directory does not exist", file=sys.stderr)
        return 2
    limit = tol("kappa.spread", 1.0 if args.tol_scale is None else args.tol_scale)
    results = [F.calibrate(nm, dim) for nm in names]
    head = ("formula", "kappa", "derived", "printed match", "spread")
    body = [
        (r.formula, f"{r.kappa:.15g}", r.derived[0], r.best_match + (f" [{r.note}]" if r.note else ""), f"{r.spread:.2e}")
        for r in results
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    for line in [head, *body]:
        print("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip())
    if args.out is not None:
        _atomic_write(Path(args.out), json.dumps([r.to_dict() for r in results], indent=1, sort_keys=True) + "\n")
    return 0 if all(r.spread <= limit for r in results) else 1


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypclif", description="Verification harness for hypermonogenic integral formulas.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run experiments and write a report")
    run.add_argument("--config", help="JSON config document; flags override it")
    run.add_argument("--dim", type=int)
    run.add_argument("--orders", help="comma-separated ascending quadrature orders")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="report path (a .json mirror is written next to a CSV report)")
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--experiment", help="comma-separated experiment names or 'all'")
    run.add_argument("--tol-scale", type=float, dest="tol_scale")
    run.add_argument("--quiet", action="store_true", help="do not print the table")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="print report files as a table")
    rep.add_argument("files", nargs="+")
    rep.set_defaults(func=cmd_report)

    cal = sub.add_parser("calibrate", help="measure formula constants")
    cal.add_argument("--dim", type=int)
    cal.add_argument("--formula", help="comma-separated formula names or 'all'")
    cal.add_argument("--out", help="write the results as JSON")
    cal.add_argument("--tol-scale", type=float, dest="tol_scale")
    cal.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    p = parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
