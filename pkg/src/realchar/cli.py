"""Command-line entry point: verification suites, single evaluations, scans.

Config file (JSON)::

    {
      "theta": 0.7,
      "x_values": [16384, 32768],
      "phi": "standard_bump",
      "w": {"kind": "shifted_power_bump", "params": [0.1, 0.8, 2], "scale": 1},
      "prime_cutoff": 100000,
      "a_max": 10000,
      "threads": null,
      "output": "scan.csv",
      "log": "scan.jsonl",
      "checkpoint": "scan.ckpt.jsonl",
      "calibrate_oracle_at": 16384
    }

``phi`` and ``w`` are required. ``log`` and ``checkpoint`` default to paths
next to ``output``. ``REALCHAR_THREADS`` overrides ``threads``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, charsum, euler
from .gauss import NAIVE_MAX_K, gauss_exact, gauss_naive
from .smoothfn import make_window
from .verify import SUITES, run_suite

log = logging.getLogger("realchar")

CSV_COLUMNS = ("X", "Y", "S", "term1", "term2", "predicted", "ratio", "d_count", "seconds")
THETA_RANGE = (0.5, 1.0)
DEFAULT_WINDOWS = {"phi": "standard_bump", "w": "standard_bump"}


class ConfigError(ValueError):
    pass


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _where(text: str, source: str, key: str) -> str:
    line = _line_of(text, key)
    if line is None:
        return source
    return f"{source}:{line}: {text.splitlines()[line - 1].strip()}"


@dataclass
class ExperimentConfig:
    theta: float
    x_values: list
    phi: dict
    w: dict
    prime_cutoff: int = euler.DEFAULT_PRIME_CUTOFF
    a_max: int = euler.DEFAULT_A_MAX
    threads: int | None = None
    output: str = "scan.csv"
    log: str | None = None
    checkpoint: str | None = None
    calibrate_oracle_at: float | None = None

    @classmethod
    def from_text(cls, text: str, source: str = "<config>", require_scan: bool = True) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            lines = text.splitlines()
            context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
            raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"{_where(text, source, unknown[0])}: unknown key {unknown[0]!r}")
        for key in ("phi", "w"):
            if key not in data:
                if require_scan:
                    raise ConfigError(f"{source}: missing window {key!r}")
                data[key] = DEFAULT_WINDOWS[key]
            try:
                data[key] = make_window(data[key]).describe()
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{_where(text, source, key)}: {exc}") from None
        if require_scan:
            for key in ("theta", "x_values"):
                if key not in data:
                    raise ConfigError(f"{source}: missing {key!r}")
        data.setdefault("theta", 0.7)
        data.setdefault("x_values", [])
        try:
            cfg = cls(**data)
            cfg.theta = float(cfg.theta)
            cfg.x_values = [float(x) for x in cfg.x_values]
            cfg.prime_cutoff = int(cfg.prime_cutoff)
            cfg.a_max = int(cfg.a_max)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: {exc}") from None
        if cfg.prime_cutoff < euler.MIN_PRIME_CUTOFF:
            raise ConfigError(f"{_where(text, source, 'prime_cutoff')}: must be >= {euler.MIN_PRIME_CUTOFF}")
        if cfg.a_max < 1:
            raise ConfigError(f"{_where(text, source, 'a_max')}: must be >= 1")
        return cfg

    @classmethod
    def load(cls, path, require_scan: bool = True) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, str(path), require_scan)

    def windows(self):
        return make_window(self.phi), make_window(self.w)

    def window_hash(self) -> str:
        blob = json.dumps({"phi": self.phi, "w": self.w}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def resolved_threads(self) -> int:
        env = os.environ.get("REALCHAR_THREADS")
        if env:
            return max(1, int(env))
        if self.threads:
            return max(1, int(self.threads))
        return charsum.default_threads()

    def paths(self) -> tuple[Path, Path, Path]:
        out = Path(self.output)
        log_path = Path(self.log) if self.log else out.with_suffix(".jsonl")
        ckpt = Path(self.checkpoint) if self.checkpoint else out.with_suffix(".ckpt.jsonl")
        return out, log_path, ckpt

    def points(self) -> list[tuple[float, float, float]]:
        """(X, raw X^theta, rounded Y) for every X, validated before any compute."""
        lo, hi = THETA_RANGE
        if not lo <= self.theta <= hi:
            raise euler.RegionError(
                f"theta = {self.theta} outside [{lo}, {hi}]: Y = X^theta would leave Y <= X <= Y^2"
            )
        pts = []
        for X in self.x_values:
            y_raw = X**self.theta
            Y = float(round(y_raw))
            euler.check_region(X, Y)
            pts.append((X, y_raw, Y))
        return pts

    def snapshot(self) -> dict:
        return asdict(self)


# -- helpers ---------------------------------------------------------------------


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(obj, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _constants_doc(cfg: ExperimentConfig, diagnostics: bool = True) -> dict:
    phi, w = cfg.windows()
    c = euler.constants(phi, w, cfg.prime_cutoff, cfg.a_max)
    doc = {
        "C1": c.C1,
        "C2": c.C2,
        "h1_tilde_half": c.h1_tilde_half,
        "z2": c.z2.to_dict(),
        "c2_sum": c.c2_sum,
        "c2_sum_direct": c.c2_sum_direct,
        "cutoffs": {"prime_cutoff": cfg.prime_cutoff, "a_max": cfg.a_max},
        "windows": {"phi": cfg.phi, "w": cfg.w},
        "version": __version__,
    }
    if diagnostics:
        d = euler.constants(phi, w, 2 * cfg.prime_cutoff, 2 * cfg.a_max)
        doc["convergence"] = {
            "doubled_cutoffs": {"prime_cutoff": 2 * cfg.prime_cutoff, "a_max": 2 * cfg.a_max},
            "C1_rel_change": abs(d.C1 - c.C1) / abs(c.C1),
            "C2_rel_change": abs(d.C2 - c.C2) / abs(c.C2),
            "c2_direct_vs_euler_rel": abs(c.c2_sum_direct - c.c2_sum) / abs(c.c2_sum),
        }
    return doc


# -- scan ------------------------------------------------------------------------


def _point_key(X: float, theta: float, whash: str) -> str:
    return json.dumps([X, theta, whash])


def load_checkpoint(path: Path) -> dict:
    """Completed records by key. A torn final line from an interruption is ignored."""
    done = {}
    if not path.exists():
        return done
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                log.warning("ignoring unreadable checkpoint line in %s", path)
                continue
            done.setdefault(entry["key"], entry["record"])
    return done


def _append_checkpoint(path: Path, key: str, record: dict) -> None:
    torn = path.exists() and path.stat().st_size and not path.read_bytes().endswith(b"\n")
    with path.open("a") as fh:
        if torn:
            fh.write("\n")
        fh.write(json.dumps({"key": key, "record": record}) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def _write_outputs(records: list[dict], csv_path: Path, log_path: Path) -> None:
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    with log_path.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def run_scan(cfg: ExperimentConfig, max_points: int | None = None) -> list[dict]:
    """Compute (or resume) every point of the scan; returns the completed records."""
    points = cfg.points()
    csv_path, log_path, ckpt_path = cfg.paths()
    for p in (csv_path, log_path, ckpt_path):
        p.parent.mkdir(parents=True, exist_ok=True)
    threads = cfg.resolved_threads()
    whash = cfg.window_hash()
    phi, w = cfg.windows()
    done = load_checkpoint(ckpt_path)

    consts = None
    computed = 0
    for X, y_raw, Y in points:
        key = _point_key(X, cfg.theta, whash)
        if key in done:
            log.info("X=%g already in checkpoint, skipping", X)
            continue
        if max_points is not None and computed >= max_points:
            break
        if consts is None:
            consts = euler.constants(phi, w, cfg.prime_cutoff, cfg.a_max)
        started = _now()
        res = charsum.mean_square(X, Y, phi, w, threads=threads)
        pred = euler.predict(consts.C1, consts.C2, X, Y)
        ratio = res.value / pred.total
        record = {
            "X": X,
            "Y": Y,
            "Y_raw": y_raw,
            "theta": cfg.theta,
            "S": res.value,
            "term1": pred.term1,
            "term2": pred.term2,
            "predicted": pred.total,
            "ratio": ratio,
            "d_count": res.d_count,
            "seconds": res.elapsed,
            "C1": consts.C1,
            "C2": consts.C2,
            "max_abs_inner": res.max_abs_inner,
            "backend": res.backend,
            "threads": threads,
            "window_hash": whash,
            "started": started,
            "finished": _now(),
            "version": __version__,
            "config": cfg.snapshot(),
        }
        if not (math.isfinite(ratio) and ratio > 0):
            log.warning("X=%g: ratio %r is not finite and positive", X, ratio)
        if cfg.calibrate_oracle_at is not None and X == float(cfg.calibrate_oracle_at):
            ref = charsum.mean_square_oracle(X, Y, phi, w)
            record["oracle"] = {
                "S": ref.value,
                "rel_diff": abs(ref.value - res.value) / abs(ref.value),
                "seconds": ref.elapsed,
                "ratio": ref.value / pred.total,
            }
        _append_checkpoint(ckpt_path, key, record)
        done[key] = record
        computed += 1
        log.info("X=%g Y=%g S=%r ratio=%.6f (%.1fs)", X, Y, res.value, ratio, res.elapsed)

    records = [done[k] for k in (_point_key(X, cfg.theta, whash) for X, _, _ in points) if k in done]
    _write_outputs(records, csv_path, log_path)
    return records


# -- commands --------------------------------------------------------------------


def cmd_verify(args) -> int:
    reports = run_suite(args.suite)
    doc = {"suite": args.suite, "passed": all(r.passed for r in reports), "reports": [r.to_dict() for r in reports]}
    if args.json == "-":
        _emit(doc)
    else:
        for r in reports:
            print(r.summary())
            for f in r.failures[:10]:
                print(f"    {f}")
        if args.json:
            Path(args.json).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0 if doc["passed"] else 1


def cmd_constants(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config, require_scan=False)
    else:
        cfg = ExperimentConfig.from_text("{}", "<defaults>", require_scan=False)
    doc = _constants_doc(cfg, diagnostics=not args.no_diagnostics)
    _emit(doc)
    if args.output:
        Path(args.output).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_scan(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    records = run_scan(cfg, max_points=args.max_points)
    for r in records:
        print(",".join(_fmt(r[c]) for c in CSV_COLUMNS))
    return 0


def cmd_poisson(args) -> int:
    w = make_window(json.loads(args.window) if args.window.startswith("{") else args.window)
    r = charsum.poisson_check(args.n, args.x, w, k_max=args.k_max)
    _emit(asdict(r))
    return 0


def cmd_gauss(args) -> int:
    g = gauss_exact(args.m, args.k)
    doc = {"m": args.m, "k": args.k, "coefficient": g.coefficient, "radicand": g.radicand, "value": float(g)}
    if args.k <= NAIVE_MAX_K:
        z = gauss_naive(args.m, args.k)
        doc["naive"] = [z.real, z.imag]
    _emit(doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="realchar", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout only)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("constants", help="evaluate C1 and C2")
    p.add_argument("--config", help="JSON config (windows and cutoffs)")
    p.add_argument("--output", help="also write the JSON document here")
    p.add_argument("--no-diagnostics", action="store_true", help="skip the doubled-cutoff rerun")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("scan", help="mean square against the prediction over x_values")
    p.add_argument("config")
    p.add_argument("--max-points", type=int, help="stop after computing this many new points")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("poisson", help="both sides of the Poisson formula for one modulus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--window", default="standard_bump", help="window name or JSON spec")
    p.add_argument("--k-max", type=int)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("gauss", help="exact and direct G_m(k)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_gauss)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ValueError as exc:
        # ConfigError and RegionError included
        print(f"realchar {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
