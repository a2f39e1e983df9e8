import textwrap
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from app.data_models import CompactObservable, Grid, Weight
from app.main import app
from app.services import fixture_service, observable_service

CHECKPOINTS = [64, 128, 256, 512]


@pytest.fixture
def grid() -> Grid:
    """1D grid with 4 cells and one time step on Q = (0, 1) x (0, 1)"""
    return fixture_service.fixture_grid(d=1, cells=4)


@pytest.fixture
def alternating_seq(grid):
    return fixture_service.alternating(grid, 512)


@pytest.fixture
def block_seq(grid):
    return fixture_service.block(grid, 512)


@pytest.fixture
def corpus(grid):
    """The five fixtures of the equivalence-principle check, keyed by name"""
    return {
        "constant": fixture_service.constant(grid, 512),
        "alternating": fixture_service.alternating(grid, 512),
        "period-3": fixture_service.periodic(grid, 512, period=3),
        "strongly-convergent": fixture_service.strongly_convergent(grid, 512),
        "block": fixture_service.block(grid, 512),
    }


@pytest.fixture
def unit_tent() -> CompactObservable:
    return CompactObservable(center=(1.0,), radius=1.0)


@pytest.fixture
def cesaro() -> Weight:
    return Weight()


@pytest.fixture
def shipped_weights():
    return observable_service.default_weights()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def cli_app():
    return app


def write_config(directory: Path, body: str, name: str = "run.toml") -> Path:
    path = directory / name
    path.write_text(textwrap.dedent(body), encoding="utf-8")
    return path


@pytest.fixture
def alternating_config(tmp_path) -> Path:
    return write_config(tmp_path, """
        [run]
        name = "alternating"
        seed = 3

        [family]
        kind = "fixture"
        fixture = "alternating"
        length = 512
        cells = 4

        [analysis]
        checkpoints = [64, 128, 256, 512]
        tol = 1e-2

        [perturb]
        index_set = "squares"
        magnitude = 10.0
    """)


@pytest.fixture
def constant_euler_config(tmp_path) -> Path:
    return write_config(tmp_path, """
        [run]
        name = "constant"

        [family]
        kind = "euler"
        preset = "constant"
        member_cells = [16, 32]
        member_eps = [0.0]
        analysis_cells = 16
        time_steps = 4
        T = 0.05

        [analysis]
        checkpoints = [1, 2]
        m_span = [1]

        [[analysis.weights]]
        kind = "constant"
    """)
