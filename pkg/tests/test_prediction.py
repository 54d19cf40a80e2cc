import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confplan.confidence import ConfidenceBelief, default_beta_grid
from confplan.gridworld import Arena
from confplan.human_model import HumanModel
from confplan.prediction import (propagate, propagate_conditional,
                                 read_occupancy, write_occupancy)

from oracles import enumerate_occupancy, mix_occupancies


def grids_close(grids: np.ndarray, dict_grids, atol=1e-9):
    for tau, want in enumerate(dict_grids):
        got = grids[tau]
        dense = np.zeros_like(got)
        for (ix, iy), p in want.items():
            dense[ix, iy] = p
        np.testing.assert_allclose(got, dense, atol=atol)


def test_horizon_zero_point_mass(small_model):
    pred = propagate_conditional((2, 3), 1.0, (4, 4), 0, small_model)
    assert pred.horizon == 0
    assert pred.grids[0, 2, 3] == 1.0
    assert pred.grids.sum() == 1.0


def test_beta_zero_uniform_pushforward(small_model):
    pred = propagate_conditional((2, 2), 0.0, (4, 4), 1, small_model)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            assert pred.grids[1, 2 + dx, 2 + dy] == pytest.approx(1 / 9)


def test_conditional_matches_enumeration(small_arena):
    m = HumanModel(arena=small_arena, goals=((4, 4),))
    pred = propagate_conditional((1, 1), 1.0, (4, 4), 3, m, truncation=0.0)
    want = enumerate_occupancy(small_arena, (1, 1), 1.0, (4, 4), 3)
    grids_close(pred.grids, want)


def test_mixture_point_mass_collapses(small_model):
    b = ConfidenceBelief(betas=np.array([0.7]), table=np.array([1.0]))
    mixed = propagate((1, 2), b, small_model, 3, truncation=0.0)
    cond = propagate_conditional((1, 2), 0.7, (4, 4), 3, small_model,
                                 truncation=0.0)
    np.testing.assert_allclose(mixed.grids, cond.grids, atol=1e-12)


def test_mixture_is_elementwise_average(small_model):
    b = ConfidenceBelief(betas=np.array([0.2, 3.0]),
                         table=np.array([0.5, 0.5]))
    mixed = propagate((2, 2), b, small_model, 2, truncation=0.0)
    a = propagate_conditional((2, 2), 0.2, (4, 4), 2, small_model,
                              truncation=0.0)
    c = propagate_conditional((2, 2), 3.0, (4, 4), 2, small_model,
                              truncation=0.0)
    np.testing.assert_allclose(mixed.grids, 0.5 * a.grids + 0.5 * c.grids,
                               atol=1e-12)


def test_belief_mixture_matches_weighted_enumeration(small_arena):
    m = HumanModel(arena=small_arena, goals=((4, 4),))
    betas = default_beta_grid()
    rng = np.random.default_rng(3)
    w = rng.random(10)
    b = ConfidenceBelief(betas=betas, table=w / w.sum())
    pred = propagate((1, 1), b, m, 3, truncation=0.0)
    weighted = [(float(wi), enumerate_occupancy(small_arena, (1, 1),
                                                float(beta), (4, 4), 3))
                for wi, beta in zip(b.table, betas)]
    grids_close(pred.grids, mix_occupancies(weighted))


def test_joint_belief_mixes_goals(small_arena):
    goals = ((4, 4), (0, 4))
    m = HumanModel(arena=small_arena, goals=goals)
    betas = np.array([0.5, 2.0])
    table = np.array([[0.1, 0.2], [0.3, 0.4]])
    b = ConfidenceBelief(betas=betas, table=table)
    pred = propagate((2, 0), b, m, 2, truncation=0.0)
    weighted = []
    for i, beta in enumerate(betas):
        for j, g in enumerate(goals):
            weighted.append((float(table[i, j]),
                             enumerate_occupancy(small_arena, (2, 0),
                                                 float(beta), g, 2)))
    grids_close(pred.grids, mix_occupancies(weighted))


def test_map_mode_uses_top_hypothesis(small_arena):
    goals = ((4, 4), (0, 4))
    m = HumanModel(arena=small_arena, goals=goals)
    table = np.array([[0.1, 0.6], [0.1, 0.2]])
    b = ConfidenceBelief(betas=np.array([0.5, 2.0]), table=table)
    pred = propagate((2, 0), b, m, 2, mode="map", truncation=0.0)
    cond = propagate_conditional((2, 0), 0.5, (0, 4), 2, m, truncation=0.0)
    np.testing.assert_allclose(pred.grids, cond.grids, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4),
       st.floats(0.0, 20.0, allow_nan=False), st.integers(0, 4))
def test_mass_conservation(ix, iy, beta, horizon):
    arena = Arena(side_length=5.0, cell_size=1.0)
    m = HumanModel(arena=arena, goals=((4, 4),))
    pred = propagate_conditional((ix, iy), beta, (4, 4), horizon, m)
    sums = pred.grids.sum(axis=(1, 2))
    np.testing.assert_allclose(sums, 1.0, atol=1e-9)
    assert np.all(pred.grids >= 0)


def test_markov_split_consistency(small_arena):
    # Propagating a+b steps equals propagating a, then re-propagating each
    # support cell for b steps, mixed by its mass.
    m = HumanModel(arena=small_arena, goals=((4, 4),))
    full = propagate_conditional((1, 1), 1.3, (4, 4), 4, m, truncation=0.0)
    part = propagate_conditional((1, 1), 1.3, (4, 4), 2, m, truncation=0.0)
    recombined = np.zeros_like(full.grids[4])
    for ix in range(5):
        for iy in range(5):
            w = part.grids[2, ix, iy]
            if w == 0.0:
                continue
            tail = propagate_conditional((ix, iy), 1.3, (4, 4), 2, m,
                                         truncation=0.0)
            recombined += w * tail.grids[2]
    np.testing.assert_allclose(full.grids[4], recombined, atol=1e-9)


def test_mixture_linearity_in_belief(small_model):
    betas = np.array([0.1, 1.0, 5.0])
    rng = np.random.default_rng(11)
    wa, wb = rng.random(3), rng.random(3)
    wa, wb = wa / wa.sum(), wb / wb.sum()
    lam = 0.3
    mix = lam * wa + (1 - lam) * wb
    pa = propagate((2, 2), ConfidenceBelief(betas=betas, table=wa),
                   small_model, 3, truncation=0.0)
    pb = propagate((2, 2), ConfidenceBelief(betas=betas, table=wb),
                   small_model, 3, truncation=0.0)
    pm = propagate((2, 2), ConfidenceBelief(betas=betas, table=mix),
                   small_model, 3, truncation=0.0)
    np.testing.assert_allclose(pm.grids,
                               lam * pa.grids + (1 - lam) * pb.grids,
                               atol=1e-12)


def test_monotone_spread_at_beta_zero(small_model):
    pred = propagate_conditional((2, 2), 0.0, (4, 4), 4, small_model)
    sizes = [(pred.grids[tau] > 0).sum() for tau in range(5)]
    assert all(b >= a for a, b in zip(sizes, sizes[1:]))


def test_support_above(small_model):
    pred = propagate_conditional((2, 2), 1.0, (4, 4), 2, small_model)
    assert pred.support_above(0, 0.5) == {(2, 2)}
    assert pred.support_above(0, 0.0) == {(2, 2)}
    all_support = pred.support_above(1, 0.0)
    assert all_support == {(2 + dx, 2 + dy)
                           for dx in (-1, 0, 1) for dy in (-1, 0, 1)}
    assert pred.support_above(1, 1.0) == set()
    with pytest.raises(ValueError):
        pred.support_above(3, 0.0)


def test_truncation_drops_tiny_mass_and_renormalizes(small_arena):
    m = HumanModel(arena=small_arena, goals=((4, 4),))
    pred = propagate_conditional((0, 0), 8.0, (4, 4), 4, m, truncation=1e-9)
    sums = pred.grids.sum(axis=(1, 2))
    np.testing.assert_allclose(sums, 1.0, atol=1e-12)
    assert np.all((pred.grids == 0.0) | (pred.grids >= 1e-10))


def test_substeps_compress_chain(small_arena):
    m = HumanModel(arena=small_arena, goals=((4, 4),))
    fine = propagate_conditional((0, 0), 1.0, (4, 4), 4, m, truncation=0.0)
    coarse = propagate_conditional((0, 0), 1.0, (4, 4), 2, m, substeps=2,
                                   truncation=0.0)
    np.testing.assert_allclose(coarse.grids[1], fine.grids[2], atol=1e-12)
    np.testing.assert_allclose(coarse.grids[2], fine.grids[4], atol=1e-12)


def test_speed_scale_interpolates(small_arena):
    m = HumanModel(arena=small_arena, goals=((4, 4),))
    fine = propagate_conditional((0, 0), 1.0, (4, 4), 4, m, truncation=0.0)
    double = propagate_conditional((0, 0), 1.0, (4, 4), 2, m,
                                   speed_scale=2.0, truncation=0.0)
    np.testing.assert_allclose(double.grids[1], fine.grids[2], atol=1e-12)
    half = propagate_conditional((0, 0), 1.0, (4, 4), 2, m,
                                 speed_scale=0.5, truncation=0.0)
    np.testing.assert_allclose(
        half.grids[1], 0.5 * fine.grids[0] + 0.5 * fine.grids[1], atol=1e-12)


def test_dump_round_trip_bit_exact(tmp_path, small_model):
    b = ConfidenceBelief.uniform(default_beta_grid(), smoothing_eps=0.0)
    pred = propagate((1, 1), b, small_model, 5)
    path = tmp_path / "occupancy.csv"
    write_occupancy(pred, path)
    back = read_occupancy(path, arena=small_model.arena)
    assert back.horizon == pred.horizon
    assert back.dt == pred.dt
    assert np.array_equal(back.grids, pred.grids)


def test_prediction_dt_default(small_model):
    pred = propagate_conditional((1, 1), 1.0, (4, 4), 2, small_model)
    assert pred.dt == pytest.approx(small_model.arena.cell_size
                                    / small_model.speed)
    pred4 = propagate_conditional((1, 1), 1.0, (4, 4), 2, small_model,
                                  substeps=4)
    assert pred4.dt == pytest.approx(4 * small_model.arena.cell_size
                                     / small_model.speed)
