#!/usr/bin/env python3
"""
Shared fixtures for the hydroblow tests
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from hydroblow.core.reduced_pde import Field, Grid  # noqa: E402


@pytest.fixture
def uniform_grid():
    return Grid.graded(64, 1.0)


@pytest.fixture
def constant_field(uniform_grid):
    """a = 1 on a uniform grid; pressureless it blows up at t = 1, with pressure it decays as 1/(1+t)"""
    return Field(uniform_grid, np.ones_like(uniform_grid.nodes), 0.0)


@pytest.fixture
def isolated_output(tmp_path, monkeypatch):
    """Output root redirected into a temporary directory"""
    monkeypatch.setenv("HYDROBLOW_OUT", str(tmp_path / "outputs"))
    monkeypatch.chdir(tmp_path)
    return tmp_path
