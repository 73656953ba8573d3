"""CLI subcommands and exit codes."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from cinema3d import FlowField, MaskImage, load_flow
from cinema3d.assets import save_flow, save_frame, save_mask, save_pfm
from cinema3d.cli import main

from tests.conftest import smooth_texture, two_plane_depth


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path, rng):
    color = smooth_texture(rng, 12, 12)
    depth = two_plane_depth(rng, 12, 12)
    save_frame(color, tmp_path / "image.png")
    save_pfm(depth.data, tmp_path / "depth.pfm")
    save_flow(FlowField(np.zeros((12, 12, 2))), tmp_path / "flow.flo")
    mask = np.zeros((12, 12), dtype=np.uint8)
    mask[4:10, 2:10] = 1
    save_mask(MaskImage(mask), tmp_path / "mask.png")
    hints = {
        "mask": "mask.png",
        "hints": [{"x": 5, "y": 6, "dx": 1.0, "dy": 0.0}],
        "speed": 1.0,
    }
    (tmp_path / "hints.json").write_text(json.dumps(hints))
    return tmp_path


class TestRenderCommand:
    def test_render_with_config(self, runner, workdir):
        config = {
            "image": "image.png",
            "depth": "depth.pfm",
            "flow": "flow.flo",
            "out": "frames",
            "trajectory": "still",
            "frames": 2,
            "splat": {"mode": "nearest"},
        }
        (workdir / "job.json").write_text(json.dumps(config))
        result = runner.invoke(main, ["render", "--config", str(workdir / "job.json")])
        assert result.exit_code == 0, result.output
        assert (workdir / "frames" / "frame_00001.png").is_file()

    def test_flag_overrides(self, runner, workdir):
        result = runner.invoke(
            main,
            [
                "render",
                "--image", str(workdir / "image.png"),
                "--depth", str(workdir / "depth.pfm"),
                "--flow", str(workdir / "flow.flo"),
                "--out", str(workdir / "cli_frames"),
                "--trajectory", "still",
                "--frames", "1",
            ],
        )
        assert result.exit_code == 0, result.output
        assert (workdir / "cli_frames" / "frame_00000.png").is_file()

    def test_config_error_exit_2(self, runner, workdir):
        config = {
            "image": "image.png",
            "depth": "depth.pfm",
            "flow": "flow.flo",
            "hints": "hints.json",
            "out": "frames",
        }
        (workdir / "bad.json").write_text(json.dumps(config))
        result = runner.invoke(main, ["render", "--config", str(workdir / "bad.json")])
        assert result.exit_code == 2
        assert "ambiguous motion source" in result.output

    def test_missing_input_exit_2(self, runner, workdir):
        result = runner.invoke(
            main,
            [
                "render",
                "--image", str(workdir / "nope.png"),
                "--depth", str(workdir / "depth.pfm"),
                "--flow", str(workdir / "flow.flo"),
                "--out", str(workdir / "frames"),
            ],
        )
        assert result.exit_code == 2

    def test_asset_error_exit_3(self, runner, workdir):
        (workdir / "broken.png").write_bytes(b"not a png at all")
        result = runner.invoke(
            main,
            [
                "render",
                "--image", str(workdir / "broken.png"),
                "--depth", str(workdir / "depth.pfm"),
                "--flow", str(workdir / "flow.flo"),
                "--out", str(workdir / "frames"),
                "--frames", "1",
            ],
        )
        assert result.exit_code == 3
        assert "asset error" in result.output


class TestMotionCommand:
    def test_writes_flo(self, runner, workdir):
        out = workdir / "hintfield.flo"
        result = runner.invoke(
            main,
            [
                "motion",
                "--image", str(workdir / "image.png"),
                "--hints", str(workdir / "hints.json"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        field = load_flow(out)
        assert (field.width, field.height) == (12, 12)
        assert field.data[6, 5, 0] == pytest.approx(1.0)
        assert (field.data[0, :, :] == 0.0).all()  # outside the mask

    def test_hint_outside_mask_exit_3(self, runner, workdir):
        bad = {
            "mask": "mask.png",
            "hints": [{"x": 0, "y": 0, "dx": 1.0, "dy": 0.0}],
            "speed": 1.0,
        }
        (workdir / "bad_hints.json").write_text(json.dumps(bad))
        result = runner.invoke(
            main,
            [
                "motion",
                "--image", str(workdir / "image.png"),
                "--hints", str(workdir / "bad_hints.json"),
                "--out", str(workdir / "x.flo"),
            ],
        )
        assert result.exit_code == 3
        assert "outside mask" in result.output
