import sys
from pathlib import Path

import pytest

from confplan.gridworld import Arena, KeepOutSpec
from confplan.human_model import HumanModel

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def arena():
    return Arena()


@pytest.fixture
def small_arena():
    """5x5 grid, cell-unit sized, for exhaustive oracles."""
    return Arena(side_length=5.0, height=2.0, cell_size=1.0)


@pytest.fixture
def tiny_arena():
    """4x4 grid for exact collision-probability enumeration."""
    return Arena(side_length=4.0, height=2.0, cell_size=1.0)


@pytest.fixture
def small_model(small_arena):
    return HumanModel(arena=small_arena, goals=((4, 4),))


@pytest.fixture
def keepout(small_arena):
    return KeepOutSpec(arena=small_arena, human_box_side=1.0)
