import numpy as np
import pytest

from relhartree import Field, Grid, solve_ground_state


@pytest.fixture(scope="session")
def gs64():
    """Ground state at lambda = -1 on 64^3, L = 32."""
    return solve_ground_state(Grid(64, 32.0), -1.0, 1e-8, 500)


@pytest.fixture(scope="session")
def gs96():
    return solve_ground_state(Grid(96, 32.0), -1.0, 1e-8, 500)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64, 16.0)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32, 16.0)


def gaussian(grid, width=1.0, center=None, mass=None):
    center = np.zeros(grid.dim) if center is None else np.asarray(center)
    r2 = sum((x - c) ** 2 for x, c in zip(grid.coords, center))
    vals = np.broadcast_to(np.exp(-0.5 * r2 / width**2), grid.shape)
    f = Field(grid, vals)
    if mass is not None:
        f = f * np.sqrt(mass / (grid.cell * np.sum(vals**2)))
    return f


def random_field(grid, rng, complex_=True):
    vals = rng.normal(size=grid.shape)
    if complex_:
        vals = vals + 1j * rng.normal(size=grid.shape)
    return Field(grid, vals)


def plane_wave(grid, index, amp=1.0):
    k = [2 * np.pi * i / grid.box_length for i in index]
    phase = sum(ki * x for ki, x in zip(k, grid.coords))
    return Field(grid, amp * np.broadcast_to(np.exp(1j * phase), grid.shape)), np.array(k)


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    lines = getattr(pytestconfig, "_acceptance_lines", None)
    if lines is None:
        lines = pytestconfig._acceptance_lines = []
    return lines


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
