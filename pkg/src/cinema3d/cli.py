"""Command-line interface.

Exit codes: 0 success, 2 config error, 3 asset error, 4 render error.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path

import click

from .assets import load_color, save_flow
from .config import TRAJECTORY_PRESETS, validate_config
from .errors import AssetError, ConfigError

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_ASSET = 3
EXIT_RENDER = 4


def _exit_codes(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except AssetError as exc:
            click.echo(f"asset error: {exc}", err=True)
            sys.exit(EXIT_ASSET)
        except Exception as exc:
            click.echo(f"render error: {exc}", err=True)
            sys.exit(EXIT_RENDER)

    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info logging.")
def main(verbose: bool):
    """3D cinemagraphs: loop an animated scene under camera parallax."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _absolute(path: str | None) -> str | None:
    return None if path is None else str(Path(path).absolute())


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="Job JSON document.")
@click.option("--image", type=click.Path(), help="Input RGB PNG.")
@click.option("--depth", type=click.Path(), help="Input depth (PFM or 16-bit PNG).")
@click.option("--flow", type=click.Path(), help="Eulerian flow field (.flo).")
@click.option("--hints", type=click.Path(), help="Mask + motion hints JSON.")
@click.option("--trajectory", type=click.Choice(TRAJECTORY_PRESETS), help="Camera preset.")
@click.option("--frames", type=int, help="Loop length N.")
@click.option("--amplitude", type=float, help="Camera motion amplitude.")
@click.option("--out", type=click.Path(), help="Output directory.")
@click.option("--workers", type=int, default=1, show_default=True, help="Render worker threads.")
@click.option("--report/--no-report", default=None, help="Write figures + stats CSV.")
@click.option("--dump-layers", is_flag=True, default=None, help="Dump LDI layers for inspection.")
@_exit_codes
def render(config_path, image, depth, flow, hints, trajectory, frames, amplitude, out,
           workers, report, dump_layers):
    """Render a looping frame sequence from one image + depth."""
    from .pipeline import render_cinemagraph

    if config_path:
        document = _read_config_document(config_path)
        base_dir = Path(config_path).absolute().parent
    else:
        document = {}
        base_dir = Path.cwd()
    overrides = {
        "image": _absolute(image),
        "depth": _absolute(depth),
        "flow": _absolute(flow),
        "hints": _absolute(hints),
        "trajectory": trajectory,
        "frames": frames,
        "amplitude": amplitude,
        "out": _absolute(out),
        "report": report,
        "dump_layers": dump_layers,
    }
    document.update({k: v for k, v in overrides.items() if v is not None})
    job = validate_config(document, base_dir=base_dir)
    paths = render_cinemagraph(job, workers=workers)
    click.echo(f"wrote {len(paths)} frames to {job.out}")


def _read_config_document(config_path) -> dict:
    import json

    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid config JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    return document


@main.command()
@click.option("--image", type=click.Path(), required=True, help="Image defining W x H.")
@click.option("--hints", "hints_path", type=click.Path(), required=True, help="Hints JSON.")
@click.option("--out", type=click.Path(), required=True, help="Output .flo path.")
@_exit_codes
def motion(image, hints_path, out):
    """Solve the dense motion field from hints and write it as .flo."""
    from . import motion as motion_mod

    color = load_color(image)
    mask, hints, speed = motion_mod.load_hints_document(hints_path)
    field, info = motion_mod.solve_hint_field(mask, hints, (color.width, color.height))
    if speed != 1.0:
        field = motion_mod.scale_flow(field, speed)
    save_flow(field, out)
    click.echo(f"wrote {field.width}x{field.height} field to {out} "
               f"({info.iterations} solver iterations)")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--assets", "assets_dir", type=click.Path(), default=None,
              help="Static directory for the browser UI.")
@_exit_codes
def serve(port, host, assets_dir):
    """Start the authoring HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=assets_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
