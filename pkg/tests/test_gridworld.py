import pytest
from hypothesis import given, strategies as st

from confplan.gridworld import (ACTIONS, Arena, KeepOutSpec, feasible_actions,
                                human_step_dt, infer_action, step_human)


def test_default_arena_dimensions():
    a = Arena()
    assert a.cols == 24 and a.rows == 24
    assert a.rows * a.cell_size <= a.side_length + a.cell_size


def test_arena_validation():
    with pytest.raises(ValueError):
        Arena(cell_size=0.0)
    with pytest.raises(ValueError):
        Arena(side_length=0.05, cell_size=0.1)


def test_step_identity_and_unit_moves(small_arena):
    assert step_human(small_arena, (2, 2), "stay") == (2, 2)
    assert step_human(small_arena, (2, 2), "N") == (2, 3)
    assert step_human(small_arena, (2, 2), "SE") == (3, 1)


def test_step_boundary_error(small_arena):
    with pytest.raises(ValueError, match="infeasible action"):
        step_human(small_arena, (0, 0), "SW")


def test_feasible_action_counts(small_arena):
    assert len(feasible_actions(small_arena, (2, 2))) == 9
    corner = feasible_actions(small_arena, (0, 0))
    assert set(corner) == {"stay", "N", "NE", "E"}
    edge = feasible_actions(small_arena, (0, 2))
    assert len(edge) == 6


def test_infer_action_examples():
    assert infer_action((2, 2), (2, 3)) == "N"
    assert infer_action((2, 2), (2, 2)) == "stay"
    with pytest.raises(ValueError, match="non-adjacent"):
        infer_action((2, 2), (4, 2))


@given(st.integers(0, 4), st.integers(0, 4), st.sampled_from(ACTIONS))
def test_step_round_trip(ix, iy, action):
    arena = Arena(side_length=5.0, cell_size=1.0)
    cell = (ix, iy)
    if action not in feasible_actions(arena, cell):
        return
    nxt = step_human(arena, cell, action)
    assert arena.contains(nxt)
    assert infer_action(cell, nxt) == action


@given(st.integers(0, 23), st.integers(0, 23))
def test_feasible_never_empty_and_contains_stay(ix, iy):
    arena = Arena()
    acts = feasible_actions(arena, (ix, iy))
    assert acts
    assert "stay" in acts


def test_snap_nearest_and_tie_toward_previous():
    arena = Arena(side_length=5.0, cell_size=1.0)
    assert arena.snap(2.4, 2.6) == (2, 2)
    # Exact boundary at x=2.0 ties cells 1 and 2.
    assert arena.snap(2.0, 0.5) == (2, 0)
    assert arena.snap(2.0, 0.5, prev=(1, 0)) == (1, 0)
    # Clamped to the arena.
    assert arena.snap(-0.3, 7.2) == (0, 4)


def test_keepout_validation_and_collision(small_arena):
    with pytest.raises(ValueError):
        KeepOutSpec(arena=small_arena, human_box_side=0.0)
    ko = KeepOutSpec(arena=small_arena, human_box_side=1.0)
    assert ko.ground_collision((1.0, 1.0), (1.4, 0.6))
    assert not ko.ground_collision((1.0, 1.0), (1.6, 1.0))


def test_human_step_dt(small_arena):
    assert human_step_dt(small_arena, 2.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        human_step_dt(small_arena, 0.0)
