"""Command-line front end: ``rmflab <experiment> --config --seed --workers --out``.

Each run writes a CSV with a fixed header and a ``<out>.manifest.json`` side
file. The manifest echoes the full configuration, so passing it back through
``--config`` reproduces the CSV."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from . import __version__
from . import experiments as ex
from .errors import BudgetExceeded, DomainError
from .sampler import resolve_workers

DEFAULTS: dict[str, dict[str, Any]] = {
    "harper_ratio": {"x_grid": [10**4, 10**6], "trials": 40_000},
    "threshold": {"x": 10**6, "R_grid": [2, 10, 100, 1000], "trials": 20_000},
    "interval": {"x": 10**6, "y_grid": [10**3, 10**4, 10**5], "trials": 10_000},
    "reduction": {"x": 10**5, "R": 11, "trials": 2000},
    "correlation": {"x": 10**6, "R": 11, "V": 2.0, "samples": 200, "M": 256, "B": 2},
    "geometric": {"p": 2, "K_grid": [1, 2, 10, 100, 1000]},
    "clt_energy": {"N_grid": [1, 500, 1000, 2000], "theta": math.sqrt(2)},
}

_RANDOM = {"harper_ratio", "threshold", "interval", "reduction", "correlation"}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        unknown = set(self.params) - set(DEFAULTS[self.experiment])
        if unknown:
            raise DomainError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")

    def resolved(self) -> dict[str, Any]:
        return {**DEFAULTS[self.experiment], **self.params}

    def to_toml(self) -> str:
        data: dict[str, Any] = {"experiment": self.experiment}
        if self.seed is not None:
            data["seed"] = self.seed
        data["params"] = self.resolved()
        return tomli_w.dumps(data)

    @classmethod
    def from_toml(cls, text: str) -> ExperimentConfig:
        data = tomli.loads(text)
        return cls(data["experiment"], dict(data.get("params", {})), data.get("seed"))

    @classmethod
    def load(cls, path: str | Path, experiment: str) -> ExperimentConfig:
        """Read a TOML config or a manifest JSON from an earlier run."""
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            data = json.loads(text)
            cfg = cls(data["experiment"], dict(data["config"]), data.get("master_seed"))
        else:
            data = tomli.loads(text)
            # a bare key-value table is taken to be the parameters
            params = data.get("params", {k: v for k, v in data.items()
                                         if k not in ("experiment", "seed")})
            cfg = cls(data.get("experiment", experiment), dict(params), data.get("seed"))
        if cfg.experiment != experiment:
            raise DomainError(f"config is for {cfg.experiment!r}, not {experiment!r}")
        return cfg


@dataclass
class RunManifest:
    experiment: str
    config: dict[str, Any]
    master_seed: int
    workers: int
    version: str
    started_at: str
    wall_clock_seconds: float
    seed_rule: str
    seed_ledger: list[dict[str, Any]]
    diagnostics: list[dict[str, Any]]
    csv_sha256: str

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


def run_experiment(cfg: ExperimentConfig, seed: int, workers: int | None = None,
                   force: bool = False) -> ex.ExperimentResult:
    p = cfg.resolved()
    name = cfg.experiment
    if name == "harper_ratio":
        return ex.exp_harper_ratio(p["x_grid"], p["trials"], seed, workers, force)
    if name == "threshold":
        return ex.exp_threshold(p["x"], p["R_grid"], p["trials"], seed, workers, force)
    if name == "interval":
        return ex.exp_interval(p["x"], p["y_grid"], p["trials"], seed, workers, force)
    if name == "reduction":
        return ex.exp_reduction(p["x"], p["R"], p["trials"], seed, workers, force=force)
    if name == "correlation":
        return ex.exp_correlation(p["x"], p["R"], p["V"], p["samples"], seed,
                                  M=p["M"], B=p["B"], force=force)
    if name == "geometric":
        return ex.exp_geometric(p["p"], p["K_grid"])
    return ex.exp_clt_energy(p["N_grid"], p["theta"], force)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def render_csv(result: ex.ExperimentResult) -> str:
    rows = sorted(result.rows, key=lambda r: tuple(_sort_key(r[c]) for c in result.columns))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in result.columns])
    return buf.getvalue()


def _sort_key(v):
    v = float(v)
    return (math.isnan(v), 0.0 if math.isnan(v) else v)


def _defaults_help() -> str:
    lines = ["experiments and their default parameters:"]
    for name, d in DEFAULTS.items():
        lines.append(f"  {name}: " + ", ".join(f"{k}={v}" for k, v in d.items()))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rmflab",
        description="Numerical experiments on random multiplicative functions.",
        epilog=_defaults_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("experiment", choices=sorted(DEFAULTS))
    ap.add_argument("--config", help="TOML parameter table, or a manifest JSON from a previous run")
    ap.add_argument("--seed", type=int, default=None,
                    help="64-bit master seed (default: the config's seed, else 0)")
    ap.add_argument("--workers", type=int, default=None,
                    help="worker threads (default: $RMFLAB_WORKERS, else 1)")
    ap.add_argument("--out", required=True, help="CSV output path")
    ap.add_argument("--force", action="store_true", help="run past the work budget")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        workers = resolve_workers(args.workers)
        if args.config:
            cfg = ExperimentConfig.load(args.config, args.experiment)
        else:
            cfg = ExperimentConfig(args.experiment)
        seed = args.seed if args.seed is not None else (cfg.seed or 0)
        if not 0 <= seed < 2**64:
            raise DomainError("--seed must be an unsigned 64-bit integer")
        started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        t0 = time.perf_counter()
        result = run_experiment(cfg, seed, workers, args.force)
        elapsed = time.perf_counter() - t0
    except BudgetExceeded as e:
        print(f"rmflab: {e}", file=sys.stderr)
        return 2
    except (DomainError, ValueError, KeyError, OSError) as e:
        print(f"rmflab: {e}", file=sys.stderr)
        return 1

    text = render_csv(result)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest = RunManifest(
        experiment=cfg.experiment, config=cfg.resolved(), master_seed=seed,
        workers=workers, version=__version__, started_at=started,
        wall_clock_seconds=elapsed, seed_rule=ex.SEED_RULE if cfg.experiment in _RANDOM else "",
        seed_ledger=result.ledger, diagnostics=result.diagnostics,
        csv_sha256=hashlib.sha256(text.encode()).hexdigest(),
    )
    manifest_path(out).write_text(manifest.to_json())
    return 0


def manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


if __name__ == "__main__":
    sys.exit(main())
