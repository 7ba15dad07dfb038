import numpy as np
import pytest

from conftest import empty_uniform, random_joint
from updeq.beliefs import AgentRecord
from updeq.dtp import (QEstimate, SearchAgent, SearchConfig, estimate_q,
                       mcs_act, mds_act, mmds_act, search_step)
from updeq.games import new_game
from updeq.harness.match import play_game
from updeq.policy import JointPolicy, TabularPolicy, uniform_joint
from updeq.rng import RngStream
from updeq.solver import infostate_q
from updeq.updates import UpdateParams


def kuhn_record(player, card, seen=None):
    ev = [(0, card)]
    if seen is not None:
        ev.append((0, seen))
    return AgentRecord(player, ev)


def test_estimate_q_deterministic_game_single_history():
    # one deal, deterministic blueprint: the estimate is exact after one
    # history
    g = new_game("random_common_payoff", seed=5, size=2, deals=1)
    pols = [TabularPolicy(p) for p in range(2)]
    from updeq.solver import build_tree
    tree = build_tree(g)
    for iid in range(tree.n_infostates):
        row = np.zeros(int(tree.is_nact[iid]))
        row[0] = 1.0
        pols[int(tree.is_player[iid])].table[tree.is_keys[iid]] = row
    joint = JointPolicy(pols)
    root_key_state = g.root().child(0)
    rec = AgentRecord(0, list(root_key_state.events(0)))
    cfg = SearchConfig(update=UpdateParams("hedge", eta=1.0), belief="exact",
                       num_histories=1)
    est = estimate_q(g, joint, rec, cfg, RngStream(1).generator())
    exact = infostate_q(g, joint, 0)[rec.key()]
    assert np.max(np.abs(est.means - exact)) < 1e-12
    assert np.all(est.counts == 1)


def test_estimate_q_counts_equal_budget(kuhn, kuhn_uniform):
    rec = kuhn_record(1, 0, seen=1)
    cfg = SearchConfig(update=UpdateParams("hedge", eta=1.0), belief="exact",
                       num_histories=37)
    est = estimate_q(kuhn, kuhn_uniform, rec, cfg, RngStream(2).generator())
    assert np.all(est.counts == 37)
    assert est.num_histories == 37


def test_estimate_q_converges_to_exact(kuhn, kuhn_uniform):
    rec = kuhn_record(1, 2, seen=1)   # holds K facing a bet
    cfg = SearchConfig(update=UpdateParams("hedge", eta=1.0), belief="exact",
                       num_histories=20_000)
    est = estimate_q(kuhn, kuhn_uniform, rec, cfg, RngStream(3).generator())
    exact = infostate_q(kuhn, kuhn_uniform, 1)[rec.key()]
    assert np.max(np.abs(est.means - exact)) < 0.05


def test_estimator_unbiasedness(kuhn, kuhn_uniform):
    rec = kuhn_record(0, 1)           # P0 holds Q at the opening
    exact = infostate_q(kuhn, kuhn_uniform, 0)[rec.key()]
    cfg = SearchConfig(update=UpdateParams("hedge", eta=1.0), belief="exact",
                       num_histories=8)
    reps = 800
    means = np.zeros((reps, 2))
    for r in range(reps):
        est = estimate_q(kuhn, kuhn_uniform, rec, cfg,
                         RngStream(100, r).generator())
        means[r] = est.means
    se = means.std(axis=0, ddof=1) / np.sqrt(reps)
    assert np.all(np.abs(means.mean(axis=0) - exact) < 3 * se + 1e-9)


def test_estimator_variance_shrinks_with_budget(kuhn, kuhn_uniform):
    rec = kuhn_record(1, 1, seen=0)   # holds Q facing a check
    out = {}
    for budget in (100, 10_000):
        reps = 12
        means = np.zeros((reps, 2))
        cfg = SearchConfig(update=UpdateParams("hedge", eta=1.0),
                           belief="exact", num_histories=budget)
        for r in range(reps):
            est = estimate_q(kuhn, kuhn_uniform, rec, cfg,
                             RngStream(200 + budget, r).generator())
            means[r] = est.means
        out[budget] = means.var(axis=0, ddof=1)
    assert np.all(out[10_000] < out[100])


def test_mcs_act_greedy_with_exact_q(kuhn, kuhn_uniform):
    rec = kuhn_record(1, 2, seen=1)   # K facing a bet: call dominates
    cfg = SearchConfig(update=UpdateParams("policy_iteration"),
                       belief="exact", num_histories=400)
    a = mcs_act(kuhn, kuhn_uniform, rec, cfg, RngStream(4).generator())
    assert a == 1


def test_mds_act_small_eta_argmax_of_blueprint(kuhn):
    # blueprint leaning to action 0: tiny stepsize keeps the argmax there
    bp = uniform_joint(kuhn)
    rec = kuhn_record(1, 1, seen=1)
    bp[1].table[rec.key()] = np.array([0.85, 0.15])
    cfg = SearchConfig(update=UpdateParams("hedge", eta=1e-9),
                       belief="exact", num_histories=50, selection="argmax")
    a = mds_act(kuhn, bp, rec, cfg, RngStream(5).generator())
    assert a == 0


def test_search_policy_matches_one_exact_step(kuhn, kuhn_uniform):
    from updeq.last_iterate import run_mmd
    rec = kuhn_record(1, 0, seen=1)
    eta, alpha = 1.0, 0.5
    cfg = SearchConfig(update=UpdateParams("mmd", eta=eta, alpha=alpha),
                       belief="exact", num_histories=30_000)
    _, prime, _ = search_step(kuhn, kuhn_uniform, rec, "mmds", cfg,
                              RngStream(6).generator())
    exact_pi, _ = run_mmd(kuhn, kuhn_uniform, "uniform",
                          UpdateParams("mmd", eta=eta, alpha=alpha), 1,
                          feedback="plain", metric_every=0)
    ref = exact_pi[1].table[rec.key()]
    assert 0.5 * np.abs(prime - ref).sum() < 0.05


def test_fallback_uses_blueprint():
    g = new_game("phantom_ttt")
    bp = empty_uniform()
    skew = np.zeros(9)
    skew[3] = 1.0
    rec = AgentRecord(0, [(1, 0), (0, 0), (1, 0), (0, 0)])  # impossible
    bp[0].table[rec.key()] = skew
    cfg = SearchConfig(update=UpdateParams("mmd", eta=1.0, alpha=0.1),
                       belief="particles", particles=4, max_attempts=40)
    a, prime, est = search_step(g, bp, rec, "mmds", cfg,
                                RngStream(7).generator())
    assert prime is None and est is None
    assert a == 3          # the blueprint's point mass


def test_search_agents_self_play_kuhn(kuhn):
    bp = empty_uniform()
    cfg = SearchConfig(update=UpdateParams("mmd", eta=1.0, alpha=0.1),
                       belief="exact", num_histories=40)
    agents = [SearchAgent(kuhn, "mmds", bp, cfg) for _ in range(2)]
    gen = RngStream(8).generator()
    returns = play_game(kuhn, agents, gen, check_records=True)
    assert abs(returns[0] + returns[1]) == 0.0
    # records never exceed the game depth: <= 3 own events-pairs each
    assert len(agents[0].record.events) <= 6


def test_search_agent_transcript_reproducible(kuhn):
    bp = empty_uniform()
    cfg = SearchConfig(update=UpdateParams("mmd", eta=1.0, alpha=0.1),
                       belief="exact", num_histories=25)

    def run(seed):
        agents = [SearchAgent(kuhn, "mmds", bp, cfg) for _ in range(2)]
        gen = RngStream(seed).generator()
        r = play_game(kuhn, agents, gen)
        return r, agents[0].record.events, agents[1].record.events

    assert run(99) == run(99)
    assert run(99) != run(100)


def test_act_before_start_raises(kuhn):
    agent = SearchAgent(kuhn, "mds", empty_uniform(),
                        SearchConfig(update=UpdateParams("hedge", eta=1.0)))
    with pytest.raises(RuntimeError):
        agent.act(RngStream(0).generator())
    with pytest.raises(RuntimeError):
        agent.observe((0, 1))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(belief="psychic")
    with pytest.raises(ValueError):
        SearchConfig(num_histories=0)
    with pytest.raises(ValueError):
        SearchConfig(selection="best")
    with pytest.raises(ValueError):
        search_step(None, None, None, "alphabeta", SearchConfig(), None)


def test_mmds_act_on_board_runs(kuhn):
    g = new_game("abrupt_dark_hex", size=3)
    bp = empty_uniform()
    cfg = SearchConfig(update=UpdateParams("mmd", eta=50.0, alpha=0.01),
                       belief="particles", particles=10)
    rec = AgentRecord(0, [])
    a = mmds_act(g, bp, rec, cfg, RngStream(9).generator())
    assert a in range(9)
