"""Command-line entry point.

Seven subcommands, one per pipeline stage, sharing --config/--seed/--out.
Exit codes: 0 success, 2 bad config, 3 missing or bad data, 4 numeric or
training failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .errors import ConfigError, DataError, ShapeError, TrainingError
from .pipeline import stages
from .pipeline.config import PipelineConfig

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4

log = logging.getLogger(__name__)


def _load_config(config_path, seed, out) -> PipelineConfig:
    return PipelineConfig.load(config_path, seed=seed, workdir=out)


def _run_stage(name: str, config_path, seed, out) -> Path:
    try:
        cfg = _load_config(config_path, seed, out)
        return stages.STAGE_FUNCS[name](cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (DataError, ShapeError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except TrainingError as exc:
        click.echo(f"training error: {exc}", err=True)
        sys.exit(EXIT_TRAINING)


def _stage_options(fn):
    fn = click.option(
        "--config", "config_path", required=True, type=click.Path(), help="Pipeline YAML."
    )(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the config seed.")(fn)
    fn = click.option(
        "--out", type=click.Path(), default=None, help="Override the config workdir."
    )(fn)
    return fn


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log stage progress.")
def main(verbose: bool):
    """Wheat-head segmentation pipeline: synthesize, translate, train, curate."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _simple_stage(name: str, help_text: str):
    @main.command(name=name, help=help_text)
    @_stage_options
    def _cmd(config_path, seed, out):
        click.echo(str(_run_stage(name, config_path, seed, out)))

    return _cmd


_simple_stage("synth", "Synthesize an annotated dataset from one labeled frame.")
_simple_stage("train-gan", "Train the synthetic-to-real translation model.")
_simple_stage("translate", "Translate the synthetic dataset; masks pass through.")
_simple_stage("train-seg", "Train the segmentation model on translated data.")
_simple_stage("finetune", "Fine-tune segmentation on accepted pseudo-labels.")
_simple_stage("eval", "Evaluate a trained model and write report.json.")


@main.command(name="curate", help="Generate pseudo-label candidates; optionally serve review UI.")
@_stage_options
@click.option("--serve", is_flag=True, help="Start the review HTTP service after generating.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option(
    "--ui-dir",
    type=click.Path(),
    default=None,
    help="Static UI bundle to mount at /ui (defaults to ./frontend/dist when present).",
)
def curate(config_path, seed, out, serve, host, port, ui_dir):
    store_dir = _run_stage("curate", config_path, seed, out)
    click.echo(str(store_dir))
    if not serve:
        return
    from .curation.server import serve as run_server
    from .curation.store import CurationStore

    if ui_dir is None:
        default_ui = Path.cwd() / "frontend" / "dist"
        ui_dir = default_ui if default_ui.is_dir() else None
    click.echo(f"serving curation review on http://{host}:{port}")
    run_server(CurationStore(store_dir), host=host, port=port, static_dir=ui_dir)


if __name__ == "__main__":
    main()
