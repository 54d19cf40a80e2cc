import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confplan.gridworld import ACTIONS, Arena, feasible_actions
from confplan.human_model import HumanModel, boltzmann_probs

from oracles import brute_action_probs


def test_q_value_examples(small_arena):
    m = HumanModel(arena=small_arena, goals=((2, 0),))
    assert m.q_value((0, 0), "E", (2, 0)) == pytest.approx(-2.0)
    assert m.q_value((2, 0), "stay", (2, 0)) == 0.0
    assert m.q_value((0, 0), "NE", (2, 0)) == pytest.approx(-2 * math.sqrt(2))


def test_q_value_infeasible(small_arena):
    m = HumanModel(arena=small_arena, goals=((2, 0),))
    with pytest.raises(ValueError):
        m.q_value((0, 0), "SW", (2, 0))


def test_beta_zero_uniform(small_model):
    dist = small_model.action_distribution((2, 2), 0.0, (4, 4))
    assert all(p == pytest.approx(1 / 9) for p in dist.values())
    corner = small_model.action_distribution((0, 0), 0.0, (4, 4))
    assert len(corner) == 4
    assert all(p == pytest.approx(0.25, abs=1e-12) for p in corner.values())


def test_two_action_softmax_value():
    # Q gap of 1 at beta=1: the better action gets 1/(1 + e^-1).
    probs = boltzmann_probs(np.array([0.0, -1.0]), 1.0)
    assert probs[0] == pytest.approx(0.7310585786300049, abs=1e-12)


def test_high_beta_concentrates_on_unique_argmax(small_arena):
    # With the travel-plus-remaining Q, "stay" is the unique argmax whenever
    # no move lies exactly on the ray to the goal (strict triangle
    # inequality), e.g. at (0,0) facing goal (2,1).
    m = HumanModel(arena=small_arena, goals=((2, 1),))
    p = m.action_likelihood((0, 0), "stay", 50.0, (2, 1))
    assert p > 0.999
    # On-axis goals tie "stay" with the direct move; jointly they take all
    # the mass at high beta.
    m2 = HumanModel(arena=small_arena, goals=((2, 0),))
    d = m2.action_distribution((0, 0), 50.0, (2, 0))
    assert d["stay"] + d["E"] == pytest.approx(1.0, abs=1e-9)
    assert d["stay"] == pytest.approx(d["E"], rel=1e-9)


def test_distribution_matches_brute_force(small_arena):
    m = HumanModel(arena=small_arena, goals=((2, 0),))
    got = m.action_distribution((0, 0), 1.0, (2, 0))
    want = brute_action_probs(small_arena, (0, 0), 1.0, (2, 0))
    assert set(got) == set(want)
    for a in got:
        assert got[a] == pytest.approx(want[a], abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4),
       st.floats(0.0, 100.0, allow_nan=False),
       st.integers(0, 4), st.integers(0, 4))
def test_normalization_property(ix, iy, beta, gx, gy):
    arena = Arena(side_length=5.0, cell_size=1.0)
    m = HumanModel(arena=arena, goals=((gx, gy),))
    dist = m.action_distribution((ix, iy), beta, (gx, gy))
    assert math.fsum(dist.values()) == pytest.approx(1.0, abs=1e-9)
    assert set(dist) <= set(feasible_actions(arena, (ix, iy)))


def test_monotone_in_beta_for_unique_argmax(small_arena):
    m = HumanModel(arena=small_arena, goals=((2, 1),))
    betas = np.geomspace(0.05, 10, 10)
    probs = [m.action_likelihood((0, 0), "stay", b, (2, 1)) for b in betas]
    assert all(b >= a for a, b in zip(probs, probs[1:]))


def test_shift_invariance(small_arena):
    # Adding a constant to every Q at a state must not change the softmax.
    qs = np.array([-1.3, -2.0, -0.7, -5.0])
    base = boltzmann_probs(qs, 2.5)
    shifted = boltzmann_probs(qs + 123.456, 2.5)
    np.testing.assert_allclose(base, shifted, atol=1e-12)


def test_stability_at_large_beta(small_model):
    dist = small_model.action_distribution((1, 1), 1e3, (4, 4))
    vals = np.array(list(dist.values()))
    assert np.all(np.isfinite(vals))
    assert vals.sum() == pytest.approx(1.0)


def test_policy_stack_matches_scalar_path(small_model):
    betas = np.array([0.0, 0.3, 2.0, 50.0])
    stack = small_model.policy_stack(betas, (4, 4))
    assert stack.shape == (4, len(ACTIONS), 5, 5)
    np.testing.assert_allclose(stack.sum(axis=1), 1.0, atol=1e-12)
    for bi, beta in enumerate(betas):
        for cell in [(0, 0), (2, 2), (4, 0), (3, 4)]:
            dist = small_model.action_distribution(cell, float(beta), (4, 4))
            for ai, name in enumerate(ACTIONS):
                got = stack[bi, ai, cell[0], cell[1]]
                assert got == pytest.approx(dist.get(name, 0.0), abs=1e-12)


def test_from_metric_snaps_goals():
    arena = Arena()
    m = HumanModel.from_metric(arena, [(3.05, 3.05)])
    assert m.goals == ((20, 20),)


def test_model_validation(small_arena):
    with pytest.raises(ValueError):
        HumanModel(arena=small_arena, goals=())
    with pytest.raises(ValueError):
        HumanModel(arena=small_arena, goals=((9, 0),))
    with pytest.raises(ValueError):
        HumanModel(arena=small_arena, goals=((1, 1),), speed=0.0)
