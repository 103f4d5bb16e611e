"""Command-line runner: ``thermal-machines <subcommand> --config run.json``.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 a
thermodynamic law check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import runners
from .config import PRESETS, ConfigError, load_config, load_preset
from .dynamics import SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_LAWS = 4

log = logging.getLogger("thermal_machines")

_MODE_OF = {
    "steady": "steady",
    "fridge-sweep": "sweep",
    "transient": "transient",
    "engine": "engine_walk",
    "clock": "clock",
}


def format_value(v) -> str:
    """Shortest round-trip text for floats; 1/0 for flags; empty for missing."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def write_csv(stream, cfg, columns, rows):
    stream.write(f"# config_sha256={cfg.digest()} seed={cfg.seed}\n")
    stream.write(",".join(columns) + "\n")
    for r in rows:
        stream.write(",".join(format_value(r.get(c)) for c in columns) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def summary_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".summary.json")


def _load(args):
    if args.preset and args.config:
        raise ConfigError("", "give either --config or --preset, not both")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise ConfigError("", f"cannot read config: {exc}") from exc
    else:
        raise ConfigError("", "a --config or --preset is required")
    return cfg.with_overrides(seed=args.seed, output=args.output)


def _dispatch(cmd, cfg, threads):
    want = _MODE_OF[cmd]
    if cfg.mode != want:
        raise ConfigError("/run/mode", f"subcommand {cmd!r} needs mode {want!r}, config has {cfg.mode!r}")
    if cmd == "steady":
        return None, None, runners.run_steady(cfg)
    fn = {
        "fridge-sweep": runners.run_fridge_sweep,
        "transient": lambda c, threads: runners.run_transient(c),
        "engine": runners.run_engine,
        "clock": runners.run_clock,
    }[cmd]
    return fn(cfg, threads=threads)


def _emit(cfg, columns, rows, summary):
    summary = _jsonable(dict(summary, config_sha256=cfg.digest(), seed=cfg.seed))
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    out = cfg.output
    if columns is None:
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, cfg, columns, rows)
        summary_path(out).write_text(text, encoding="utf-8")
    else:
        write_csv(sys.stdout, cfg, columns, rows)
        sys.stderr.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermal-machines", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(_MODE_OF) + ["validate-config"]:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", choices=PRESETS, help="shipped figure configuration")
        p.add_argument("--output", help="CSV (or JSON for steady) output path; summary goes next to it")
        p.add_argument("--seed", type=int, help="master seed, overrides the config")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _load(args)
        if args.command == "validate-config":
            sys.stdout.write(cfg.serialize())
            return EXIT_OK
        columns, rows, summary = _dispatch(args.command, cfg, args.threads)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (SolverError, OverflowError, RuntimeError, ValueError) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    _emit(cfg, columns, rows, summary)
    if not summary.get("law_checks_ok", True):
        sys.stderr.write("law check failed\n")
        return EXIT_LAWS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
