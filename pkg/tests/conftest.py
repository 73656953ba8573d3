"""Shared fixtures plus the acceptance-criteria summary hook.

Tests marked @pytest.mark.acceptance("...") get one PASS/FAIL line per
criterion in the terminal summary.
"""

from __future__ import annotations

import numpy as np
import pytest

from cinema3d import ColorImage, DepthMap

_ACCEPTANCE_RESULTS: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): marks a test as one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker:
            _ACCEPTANCE_RESULTS[marker.args[0]] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


def smooth_texture(rng: np.random.Generator, height: int, width: int) -> ColorImage:
    """Band-limited random color texture (content every pixel, no flat spots)."""
    base = rng.uniform(0.1, 0.9, size=(height // 4 + 2, width // 4 + 2, 3))
    import cv2

    resized = cv2.resize(base, (width, height), interpolation=cv2.INTER_LINEAR)
    noise = rng.uniform(-0.05, 0.05, size=(height, width, 3))
    return ColorImage(np.clip(resized + noise, 0.0, 1.0))


def two_plane_depth(
    rng: np.random.Generator, height: int, width: int, near: float = 2.0, far: float = 8.0
) -> DepthMap:
    """A near rectangle floating in front of a far backdrop."""
    depth = np.full((height, width), far, dtype=np.float64)
    x0 = int(rng.integers(2, width // 3))
    y0 = int(rng.integers(2, height // 3))
    x1 = int(rng.integers(2 * width // 3, width - 2))
    y1 = int(rng.integers(2 * height // 3, height - 2))
    depth[y0:y1, x0:x1] = near
    return DepthMap(depth)


def gradient_depth(rng: np.random.Generator, height: int, width: int) -> DepthMap:
    """Smoothly receding ground-plane-like depth with mild waviness."""
    rows = np.linspace(2.0, 10.0, height)[:, None]
    wave = 0.3 * np.sin(np.linspace(0, 4 * np.pi, width))[None, :]
    jitter = rng.uniform(0.0, 0.05)
    return DepthMap(np.broadcast_to(rows, (height, width)) + wave + 0.5 + jitter)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
