import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from freesurf.spectral import GridSpec, RealField

settings.register_profile(
    "default",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TWO_PI_GRID = GridSpec(64, np.pi)
FIXTURE_GRID = GridSpec(1024, 20 * np.pi)


def band_limited(grid: GridSpec, rng: np.random.Generator, kmax: int, decay: float = 6.0) -> RealField:
    """Random real field with modes |k| <= kmax and gaussian-decaying weights."""
    k = np.arange(1, kmax + 1)
    w = np.exp(-(k / decay) ** 2)
    a = rng.standard_normal(kmax) * w
    b = rng.standard_normal(kmax) * w
    phase = np.pi * np.outer(grid.x + grid.half_length, k) / grid.half_length
    u = rng.standard_normal() * 0.1 + np.cos(phase) @ a + np.sin(phase) @ b
    return RealField(grid, u)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gaussian(grid: GridSpec, a=0.1, w=2.0, c=0.0) -> RealField:
    return RealField.from_function(grid, lambda x: a * np.exp(-((x - c) / w) ** 2))


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the session

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
