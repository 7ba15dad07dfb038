import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from updeq.harness.oracles import grid_update_oracle, numeric_update_oracle
from updeq.updates import (Schedule, ScheduleFn, UpdateParams, anneal_schedule,
                           constant_schedule, convergence_params, hedge_update,
                           mmd_update, parse_schedule_fn, pi_update,
                           schedule_eval)


def test_pi_update_ties_lowest_index():
    assert np.array_equal(pi_update([0.3, 0.7], [1.0, 0.0]), [1, 0])
    assert np.array_equal(pi_update([0.3, 0.7], [0.5, 0.5]), [1, 0])
    assert np.array_equal(pi_update([1 / 3] * 3, [0.0, 1.0, 1.0]), [0, 1, 0])
    with pytest.raises(ValueError):
        pi_update([], [])
    with pytest.raises(ValueError):
        pi_update([1.0], [np.nan])


def test_hedge_shift_invariance():
    pi = np.array([0.2, 0.5, 0.3])
    out = hedge_update(pi, np.array([3.3, 3.3, 3.3]), eta=2.0)
    assert np.allclose(out, pi, atol=1e-15)


def test_hedge_closed_form_example_and_grid_oracle():
    out = hedge_update([0.5, 0.5], [1.0, 0.0], eta=math.log(4))
    assert np.allclose(out, [0.8, 0.2], atol=1e-12)
    grid = grid_update_oracle([0.5, 0.5], [1.0, 0.0], math.log(4), 0.0,
                              [0.5, 0.5])
    assert np.max(np.abs(out - grid)) < 1e-4


def test_hedge_small_eta_limit():
    pi = np.array([0.4, 0.6])
    out = hedge_update(pi, [5.0, -3.0], eta=1e-9)
    assert np.max(np.abs(out - pi)) < 1e-8


def test_hedge_preserves_zeros():
    out = hedge_update([0.0, 1.0], [100.0, 0.0], eta=1.0)
    assert out[0] == 0.0
    assert out[1] == 1.0


def test_hedge_errors():
    with pytest.raises(ValueError):
        hedge_update([0.5, 0.5], [1.0, 0.0], eta=0.0)
    with pytest.raises(ValueError):
        hedge_update([0.5, 0.5], [np.inf, 0.0], eta=1.0)


def test_mmd_alpha_zero_is_hedge_bitwise():
    gen = np.random.Generator(np.random.PCG64(12))
    for _ in range(200):
        k = int(gen.integers(2, 6))
        pi = gen.dirichlet(np.ones(k))
        q = gen.normal(size=k)
        rho = gen.dirichlet(np.ones(k)) * 0.9 + 0.1 / k
        eta = float(np.exp(gen.uniform(-3, 3)))
        a = hedge_update(pi, q, eta)
        b = mmd_update(pi, q, rho, eta, 0.0)
        assert np.array_equal(a, b)


def test_mmd_fixed_point():
    pi = np.array([0.3, 0.7])
    out = mmd_update(pi, [0.0, 0.0], pi, eta=1.3, alpha=0.8)
    assert np.allclose(out, pi, atol=1e-15)


def test_mmd_closed_form_example():
    out = mmd_update([0.5, 0.5], [1.0, 0.0], [0.5, 0.5], eta=1.0, alpha=1.0)
    want = np.array([math.exp(0.5), 1.0])
    want /= want.sum()
    assert np.allclose(out, want, atol=1e-12)
    grid = grid_update_oracle([0.5, 0.5], [1.0, 0.0], 1.0, 1.0, [0.5, 0.5])
    assert np.max(np.abs(out - grid)) < 1e-4


def test_mmd_errors():
    with pytest.raises(ValueError):
        mmd_update([0.5, 0.5], [0, 0], [0.5, 0.5], eta=-1.0, alpha=0.0)
    with pytest.raises(ValueError):
        mmd_update([0.5, 0.5], [0, 0], [0.5, 0.5], eta=1.0, alpha=-0.1)
    with pytest.raises(ValueError):
        mmd_update([0.5, 0.5], [0, 0], [1.0, 0.0], eta=1.0, alpha=0.5)


def test_log_space_stability_large_eta():
    # eta=50 with returns in [-1, 1] appears in the head-to-head config
    out = mmd_update([0.25, 0.25, 0.25, 0.25], [1.0, -1.0, 0.5, 0.0],
                     [0.25] * 4, eta=50.0, alpha=0.01)
    assert np.all(np.isfinite(out))
    assert abs(out.sum() - 1.0) <= 1e-12
    out2 = hedge_update([0.5, 0.5], [1e4, -1e4], eta=50.0)
    assert np.all(np.isfinite(out2))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 31 - 1),
       st.floats(0.01, 30.0), st.floats(0.0, 5.0))
def test_updates_map_simplex_to_simplex(k, seed, eta, alpha):
    gen = np.random.Generator(np.random.PCG64(seed))
    pi = gen.dirichlet(np.ones(k))
    q = gen.normal(size=k) * 3
    rho = gen.dirichlet(np.ones(k)) * 0.8 + 0.2 / k
    for out in (hedge_update(pi, q, eta), mmd_update(pi, q, rho, eta, alpha),
                pi_update(pi, q)):
        assert abs(float(np.sum(out)) - 1.0) <= 1e-12
        assert np.all(out >= 0)


def test_continuity_probe_lipschitz():
    # hedge/mmd respond to q perturbations with L1 change <= L * |delta|,
    # L pinned at eta/(1 + alpha*eta) (empirical bound with margin);
    # pi_update is excluded: it is discontinuous by design
    gen = np.random.Generator(np.random.PCG64(77))
    for eta, alpha in ((1.0, 0.0), (0.1, 0.0), (1.0, 1.0), (50.0, 0.01)):
        L = eta / (1.0 + alpha * eta)
        worst = 0.0
        for _ in range(300):
            k = int(gen.integers(2, 6))
            pi = gen.dirichlet(np.ones(k))
            q = gen.normal(size=k)
            rho = gen.dirichlet(np.ones(k)) * 0.8 + 0.2 / k
            delta = gen.uniform(1e-5, 1e-3)
            dq = gen.choice([-1.0, 1.0], size=k) * delta
            a = mmd_update(pi, q, rho, eta, alpha)
            b = mmd_update(pi, q + dq, rho, eta, alpha)
            worst = max(worst, float(np.abs(a - b).sum()) / delta)
        assert worst <= L * 1.0 + 1e-9, (eta, alpha, worst, L)


def test_numeric_oracle_agrees_on_spot_checks():
    got = mmd_update([0.2, 0.8], [2.0, -1.0], [0.6, 0.4], eta=0.7, alpha=0.9)
    want = numeric_update_oracle([0.2, 0.8], np.array([2.0, -1.0]), 0.7, 0.9,
                                 np.array([0.6, 0.4]))
    assert np.max(np.abs(got - want)) < 1e-5


def test_schedules_paper_values():
    s = Schedule(ScheduleFn("inv_sqrt", 1.0), ScheduleFn("inv_sqrt", 1.0))
    assert schedule_eval(s, 4) == (0.5, 0.5)
    s2 = Schedule(ScheduleFn("inv_sqrt", 1.0), ScheduleFn("inv_sqrt", 5.0))
    assert schedule_eval(s2, 25)[1] == 1.0
    s3 = Schedule(ScheduleFn("inv_sqrt", 0.5), ScheduleFn("inv_sqrt", 1.0))
    assert schedule_eval(s3, 1)[0] == 0.5
    with pytest.raises(ValueError):
        schedule_eval(s, 0)
    with pytest.raises(ValueError):
        ScheduleFn("inv_sqrt", 0.0)


def test_anneal_schedule_table():
    s = anneal_schedule("liars_dice_4", "standard", "plain")
    assert schedule_eval(s, 1) == (2.0, 1.0)
    s = anneal_schedule("liars_dice_4", "with_subgame_updates", "plain")
    assert schedule_eval(s, 4) == (0.25, 0.5)
    s = anneal_schedule("leduc_poker", "standard", "plain")
    assert schedule_eval(s, 25) == (0.2, 1.0)
    s = anneal_schedule("leduc_poker", "with_bft", "minimaxent")
    assert schedule_eval(s, 1) == (1.0, 5.0)
    with pytest.raises(KeyError):
        anneal_schedule("tic_tac_toe", "standard", "plain")


def test_convergence_params_overrides():
    assert convergence_params("kuhn_poker", "standard") == (0.01, 0.1)
    eta, alpha = convergence_params("leduc_poker", "with_opponent_update")
    assert (round(eta, 12), alpha) == (0.005, 0.1)
    eta, _ = convergence_params("leduc_poker", "with_subgame_updates")
    assert round(eta, 12) == 0.002


def test_parse_schedule_fn():
    assert parse_schedule_fn("const:0.5")(9) == 0.5
    assert parse_schedule_fn("invsqrt:2")(4) == 1.0
    assert parse_schedule_fn("0.25")(7) == 0.25
    with pytest.raises(ValueError):
        parse_schedule_fn("warp:1")


def test_update_params_validation():
    with pytest.raises(ValueError):
        UpdateParams("sgd")
    with pytest.raises(ValueError):
        UpdateParams("hedge", eta=0.0)
    with pytest.raises(ValueError):
        UpdateParams("mmd", eta=1.0, alpha=-1.0)
    p = constant_schedule(1.0, 0.5)
    assert schedule_eval(p, 100) == (1.0, 0.5)
