"""Command-line front end.

    cglmp ideal-scan --nmax 12
    cglmp noisy-scan --fidelity 0.982 --nmax 12
    cglmp simulate   --fidelity 0.982 --nmax 4 --events 100000 --seed 7
    cglmp tomo       --fidelity 0.982 --nmax 12 --resamples 50
    cglmp witness    --fidelity 0.982 --nmax 12
    cglmp angles     --d 16
    cglmp lhv-bound  --d 3

Results go to ``<output dir>/<command>.<format>`` unless ``--output`` is
given; the output directory defaults to the working directory and can be
overridden with the CGLMP_OUTPUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import engine, experiment, export, measurements, witness
from .qstate import NoiseModel, werner_from_fidelity

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
OUTPUT_ENV = "CGLMP_OUTPUT_DIR"
COMMANDS = ("ideal-scan", "noisy-scan", "simulate", "witness", "angles", "lhv-bound", "tomo")
DEFAULT_SEED = 20151


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    fidelity: float = 0.982
    nmax: int = 4
    d: int = 2
    events: int = 100_000
    seed: int = DEFAULT_SEED
    jitter: float = 0.0
    resamples: int = 200
    output: str | None = None
    format: str = "csv"
    record: str | None = None
    input: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.command in ("noisy-scan", "simulate", "tomo") and not 0.25 <= self.fidelity <= 1:
            raise UsageError("--fidelity must lie in [0.25, 1]")
        if self.command == "witness" and not 0 <= self.fidelity <= 1:
            raise UsageError("--fidelity must lie in [0, 1]")
        if not 1 <= self.nmax <= 12:
            raise UsageError("--nmax must lie in [1, 12]")
        if self.events < 1:
            raise UsageError("--events must be >= 1")
        if self.jitter < 0:
            raise UsageError("--jitter must be >= 0")
        if self.resamples < 2:
            raise UsageError("--resamples must be >= 2")
        if self.command == "lhv-bound" and not 2 <= self.d <= engine.LRT_CAP:
            raise UsageError(f"--d must lie in [2, {engine.LRT_CAP}]")
        if self.command == "angles" and (self.d < 2 or self.d & (self.d - 1) or self.d > 2**12):
            raise UsageError("--d must be a power of two in [2, 4096]")

    def effective(self) -> dict:
        keys = {
            "ideal-scan": ["nmax"],
            "noisy-scan": ["fidelity", "nmax"],
            "simulate": ["fidelity", "nmax", "events", "seed", "jitter", "resamples"],
            "tomo": ["fidelity", "nmax", "events", "seed", "resamples", "input"],
            "witness": ["fidelity", "nmax"],
            "angles": ["d"],
            "lhv-bound": ["d"],
        }[self.command]
        full = asdict(self)
        return {"command": self.command, **{k: full[k] for k in keys}}

    def output_path(self) -> Path:
        base = Path(os.environ.get(OUTPUT_ENV, "."))
        if self.output:
            out = Path(self.output)
            return out if out.is_absolute() else base / out
        return base / f"{self.command}.{self.format}"


def _experiment_config(cfg: RunConfig) -> experiment.ExperimentConfig:
    return experiment.ExperimentConfig(
        NoiseModel.from_fidelity(cfg.fidelity), cfg.events, cfg.seed, cfg.jitter, cfg.resamples
    )


def _reports(cfg: RunConfig, say):
    if cfg.command == "ideal-scan":
        reports = engine.scan_dimensions(werner_from_fidelity(1.0), cfg.nmax)
    elif cfg.command == "noisy-scan":
        reports = engine.scan_dimensions(werner_from_fidelity(cfg.fidelity), cfg.nmax)
    elif cfg.command == "simulate":
        reports = experiment.measured_scan(_experiment_config(cfg), cfg.nmax)
    else:
        reports = _tomo(cfg, say)
    for r in reports:
        err = "" if r.stderr is None else f" +- {r.stderr:.4f}"
        say(f"d={r.d:<5d} I_d={r.value:.6f}{err} violation={r.violation}")
    return reports


def _tomo(cfg: RunConfig, say):
    ecfg = _experiment_config(cfg)
    if cfg.input:
        record = experiment.TomographyRecord.from_csv(Path(cfg.input).read_text())
        pair = experiment.reconstruct_state(record)
        return engine.scan_dimensions(pair, cfg.nmax)
    if cfg.record:
        rec = experiment.simulated_tomography_record(ecfg)
        export.write_atomic(cfg.record, rec.to_csv())
        say(f"tomography record written to {cfg.record}")
    return experiment.tomography_scan(ecfg, cfg.nmax)


def run(cfg: RunConfig, out=None) -> int:
    cfg.validate()
    out = sys.stdout if out is None else out
    say = lambda line: print(line, file=out)  # noqa: E731
    meta = cfg.effective()
    if cfg.command in ("ideal-scan", "noisy-scan", "simulate", "tomo"):
        reports = _reports(cfg, say)
        text = (export.reports_csv if cfg.format == "csv" else export.reports_json)(reports, meta)
    elif cfg.command == "witness":
        results = witness.witness_sweep(cfg.fidelity, cfg.nmax)
        for w in results:
            say(f"d={w.d:<5d} F={w.fidelity:.6f} S_L={w.bound}")
        text = (export.witness_csv if cfg.format == "csv" else export.witness_json)(results, meta)
    elif cfg.command == "angles":
        rows = measurements.angle_schedule(cfg.d)
        say(f"d={cfg.d} waveplate settings: {len(rows)} rows, "
            f"{measurements.settings_count(cfg.d)} per operator pair")
        text = (export.angles_csv if cfg.format == "csv" else export.angles_json)(rows, meta)
    else:
        value, best = engine.lrt_max(cfg.d)
        say(f"max = {value:.6f}")
        say(f"strategy: A1={best.A1} A2={best.A2} B1={best.B1} B2={best.B2}")
        result = {"d": cfg.d, "max": value, "strategy": asdict(best)}
        if cfg.format == "csv":
            row = (cfg.d, value, best.A1, best.A2, best.B1, best.B2)
            text = export.csv_table(meta, ["d", "max", "A1", "A2", "B1", "B2"], [row])
        else:
            text = export.json_document(meta, [result])
    path = export.write_atomic(cfg.output_path(), text)
    say(f"wrote {path}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cglmp", description="CGLMP Bell tests on qudits made of qubit pairs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name in ("angles", "lhv-bound"):
            p.add_argument("--d", type=int, default=2 if name == "lhv-bound" else 4)
            continue
        p.add_argument("--nmax", type=int, default=4)
        if name != "ideal-scan":
            p.add_argument("--fidelity", type=float, default=0.982)
        if name in ("simulate", "tomo"):
            p.add_argument("--events", type=int, default=100_000)
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
            p.add_argument("--resamples", type=int, default=200)
        if name == "simulate":
            p.add_argument("--jitter", type=float, default=0.0, help="HWP angle jitter (rad)")
        if name == "tomo":
            p.add_argument("--record", help="also write the simulated tomography record here")
            p.add_argument("--input", help="reconstruct from this tomography record CSV instead")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    cfg = RunConfig(**{k: v for k, v in args.items() if v is not None})
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"cglmp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"cglmp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
