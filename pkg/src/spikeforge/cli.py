"""Deterministic command-line experiment runner.

``spikeforge run`` executes one named experiment per invocation and
writes its artifacts (raster/curve CSVs, metrics JSON, figures) plus a
checksummed run manifest into the output directory.  ``spikeforge
list`` prints the registry and ``spikeforge validate`` schema-checks a
configuration file without launching any simulation.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from pathlib import Path

import click

from . import __version__
from .experiments import EXPERIMENTS, resolve_config, validate_config

__all__ = ["main"]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            config = json.load(f)
    except OSError as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"config {path} is not valid JSON: {exc}")
    if not isinstance(config, dict):
        raise click.ClickException("config root must be a JSON object")
    return config


def _write_manifest(out: Path, config: dict, wall_time: float):
    """Checksum every artifact and write the manifest last, atomically."""
    artifacts = {
        p.name: _sha256(p)
        for p in sorted(out.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    manifest = {
        "engine_version": __version__,
        "config_sha256": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "wall_time_s": wall_time,
        "artifacts": artifacts,
    }
    tmp = out / "manifest.json.tmp"
    with open(tmp, "w", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, out / "manifest.json")


@click.group()
@click.version_option(__version__)
def main():
    """Spiking-network experiment runner."""


@main.command("list")
def list_cmd():
    """List the available experiments."""
    for name in sorted(EXPERIMENTS):
        click.echo(f"{name}: {EXPERIMENTS[name].description}")


@main.command("validate")
@click.argument("path", type=click.Path())
def validate_cmd(path):
    """Schema-check a config file without running anything."""
    config = _load_json(path)
    name = config.get("experiment")
    if name not in EXPERIMENTS:
        raise click.ClickException(
            f"experiment: must name one of {sorted(EXPERIMENTS)}, "
            f"got {name!r}")
    violations = validate_config(EXPERIMENTS[name], config)
    if violations:
        for v in violations:
            click.echo(f"violation: {v}", err=True)
        sys.exit(1)
    click.echo("ok")


@main.command("run")
@click.argument("experiment")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file (strict schema).")
@click.option("--seed", type=int, default=None, help="Override the run seed.")
@click.option("--steps", type=int, default=None,
              help="Override the experiment's step/episode count.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Deterministic intra-experiment parallelism.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (default: $SPIKE_ENGINE_OUT or cwd).")
def run_cmd(experiment, config_path, seed, steps, workers, out_dir):
    """Run one experiment and write its artifacts."""
    if experiment not in EXPERIMENTS:
        raise click.ClickException(
            f"unknown experiment {experiment!r}; valid names: "
            f"{', '.join(sorted(EXPERIMENTS))}")
    spec = EXPERIMENTS[experiment]
    config = _load_json(config_path) if config_path else {}
    if seed is not None:
        config["seed"] = seed
    if steps is not None:
        config[spec.steps_key] = steps
    if workers < 1:
        raise click.ClickException("workers: must satisfy workers >= 1")
    violations = validate_config(spec, config)
    if violations:
        for v in violations:
            click.echo(f"violation: {v}", err=True)
        sys.exit(1)
    resolved = resolve_config(spec, config)
    out = Path(out_dir or os.environ.get("SPIKE_ENGINE_OUT") or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise click.ClickException(f"cannot create output dir {out}: {exc}")
    if not os.access(out, os.W_OK):
        raise click.ClickException(f"output dir {out} is not writable")
    t0 = time.perf_counter()
    try:
        spec.runner(resolved, out, workers)
    except Exception as exc:
        raise click.ClickException(f"experiment failed: {exc}")
    _write_manifest(out, resolved, time.perf_counter() - t0)
    click.echo(f"wrote artifacts to {out}")


if __name__ == "__main__":
    main()
