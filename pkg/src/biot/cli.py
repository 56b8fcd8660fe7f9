"""Command line entry point: ``biot <command> --config run.json [--resume] [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_raw, parse_config
from .drivers import COMMANDS
from .linalg import LinearSolveError

log = logging.getLogger("biot")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biot", description="Monolithic and decoupled solvers for the three-field Biot model, with optional POD acceleration.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--resume", action="store_true", help="continue from <outdir>/checkpoint")
        p.add_argument("--outdir", type=Path, help="override the configured output directory")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name in ("git-rom", "compare-index-sets"):
            p.add_argument("--nr", type=int, help="reduced basis dimension")
            p.add_argument("--enrich-initial", action="store_true", default=None, help="prepend the initial states to the snapshot set")
        if name == "git-rom":
            p.add_argument("--index-set", help="full | stride:<s> | legendre[:<degree>]")
            p.add_argument("--validate-rom-error", action="store_true", default=None, help="full-order Stokes at every step for eps_ROM")
    return ap


def run_from_config(command: str, path, resume: bool = False, outdir=None, overrides=None) -> int:
    """Validate the configuration (with ``rom`` overrides applied), run ``command`` and return an exit status."""
    try:
        raw = load_raw(path)
        if overrides:
            if not isinstance(raw, dict):
                raise ConfigError("", "configuration must be a JSON object")
            rom = raw.setdefault("rom", {})
            if not isinstance(rom, dict):
                raise ConfigError("rom", "expected an object")
            rom.update(overrides)
        cfg = parse_config(raw)
    except (ConfigError, OSError) as exc:
        print(f"biot: configuration error: {exc}", file=sys.stderr)
        return 2
    out = Path(outdir) if outdir is not None else Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    try:
        COMMANDS[command](cfg, out, resume)
    except LinearSolveError as exc:
        print(f"biot {command}: solver failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, NotImplementedError) as exc:
        print(f"biot {command}: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(asctime)s %(name)s: %(message)s")
    overrides = {}
    if getattr(args, "nr", None) is not None:
        overrides["nr"] = args.nr
    if getattr(args, "index_set", None) is not None:
        overrides["index_set"] = args.index_set
    if getattr(args, "validate_rom_error", None):
        overrides["validate"] = True
    if getattr(args, "enrich_initial", None):
        overrides["enrich_initial"] = True
    return run_from_config(args.command, args.config, args.resume, args.outdir, overrides)


if __name__ == "__main__":
    sys.exit(main())
