"""Command-line interface: one verb per pipeline stage plus `run`."""

from __future__ import annotations

import logging
import sys

import click

from stackcast.pipeline import (
    STAGE_ORDER,
    RunConfig,
    RunManifest,
    StageError,
    run_pipeline,
    run_stage,
)


def _load_config(config, seed, out) -> RunConfig:
    cfg = RunConfig.from_yaml(config)
    if seed is not None or out is not None:
        cfg = cfg.with_overrides(seed=seed, output_dir=out)
    return cfg


def _common(fn):
    fn = click.option("--config", required=True, type=click.Path(exists=True),
                      help="Run configuration (YAML) or a previous manifest.json.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the master seed.")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="Override the output directory.")(fn)
    return fn


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log stage progress.")
def main(verbose):
    """Direction-of-move classification pipeline over daily OHLCV bars."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _run_single(stage: str, config, seed, out):
    try:
        cfg = _load_config(config, seed, out)
        artifacts = run_stage(cfg, stage)
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    except Exception as exc:
        click.echo(f"[{stage}] {exc}", err=True)
        sys.exit(1)
    for artifact in artifacts:
        click.echo(str(artifact))


def _make_stage_command(stage: str):
    @main.command(name=stage, help=f"Run only the {stage!r} stage.")
    @_common
    def command(config, seed, out, _stage=stage):
        _run_single(_stage, config, seed, out)

    return command


for _stage in STAGE_ORDER:
    _make_stage_command(_stage)


@main.command(name="run")
@_common
def run_all(config, seed, out):
    """Run the full pipeline and write a manifest."""
    try:
        cfg = _load_config(config, seed, out)
        manifest = run_pipeline(cfg)
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    except Exception as exc:
        click.echo(f"[config] {exc}", err=True)
        sys.exit(1)
    click.echo(str(manifest.out_dir / "manifest.json"))


if __name__ == "__main__":
    main()
