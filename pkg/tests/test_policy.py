import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from updeq.policy import (JointPolicy, PolicyValidationError, TabularPolicy,
                          dump_joint, interior_mix, load_joint, uniform_joint,
                          uniform_policy, validate)


def test_uniform_policy_kuhn(kuhn):
    pol = uniform_policy(kuhn, 0)
    assert len(pol.table) == 6
    for dist in pol.table.values():
        assert np.allclose(dist, [0.5, 0.5])
        assert abs(dist.sum() - 1.0) <= 1e-12


def test_uniform_policy_phantom_root():
    from updeq.games import new_game
    g = new_game("phantom_ttt")
    root_key = g.root().info_state_key(0)
    pol = TabularPolicy(0)
    assert np.allclose(pol.get(root_key, 9), np.full(9, 1 / 9))


def test_get_fallback_and_stored():
    pol = TabularPolicy(0)
    pol.set(b"\x00k", np.array([0.25, 0.75]))
    assert np.array_equal(pol.get(b"\x00k", 2), [0.25, 0.75])
    assert np.allclose(pol.get(b"\x00zz", 3), [1 / 3] * 3)
    with pytest.raises(ValueError):
        pol.get(b"\x00zz", 0)


def test_set_rejects_non_simplex():
    pol = TabularPolicy(0)
    with pytest.raises(PolicyValidationError) as e:
        pol.set(b"\x00k", np.array([0.5, 0.48]))
    assert "00" in str(e.value)  # names the key
    with pytest.raises(PolicyValidationError):
        pol.set(b"\x00k", np.array([-0.1, 1.1]))


def test_validate_names_offending_key():
    pol = TabularPolicy(1)
    pol.table[bytes.fromhex("01aa")] = np.array([0.49, 0.49])
    with pytest.raises(PolicyValidationError) as e:
        validate(pol)
    assert "01aa" in str(e.value)


def test_validate_lengths_against_game(kuhn):
    pol = uniform_policy(kuhn, 0)
    key = next(iter(pol.table))
    pol.table[key] = np.array([0.2, 0.3, 0.5])
    with pytest.raises(PolicyValidationError):
        validate(pol, kuhn)


def test_interior_mix_examples():
    pol = TabularPolicy(0)
    pol.set(b"\x00a", np.array([1.0, 0.0]))
    mixed = interior_mix(pol, 0.1)
    assert np.allclose(mixed.table[b"\x00a"], [0.95, 0.05])
    same = interior_mix(pol, 0.0)
    assert np.array_equal(same.table[b"\x00a"], [1.0, 0.0])


def test_interior_mix_floor(kuhn):
    joint = uniform_joint(kuhn)
    pol = joint[0]
    for key in pol.table:
        pol.table[key] = np.array([1.0, 0.0])
    mixed = interior_mix(pol, 0.3)
    for dist in mixed.table.values():
        assert dist.min() >= 0.3 / 2 - 1e-15


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=6),
       st.floats(0.0, 1.0))
def test_interior_mix_simplex_property(raw, eps):
    dist = np.array(raw)
    dist /= dist.sum()
    pol = TabularPolicy(0)
    pol.set(b"\x00x", dist)
    mixed = interior_mix(pol, eps)
    out = mixed.table[b"\x00x"]
    assert abs(out.sum() - 1.0) <= 1e-12
    assert out.min() >= eps / len(out) - 1e-15


def test_serialization_round_trip_bit_exact(kuhn):
    gen = np.random.Generator(np.random.PCG64(3))
    pols = []
    for p in range(2):
        pol = uniform_policy(kuhn, p)
        for key in pol.table:
            row = gen.dirichlet(np.ones(2))
            pol.table[key] = row
        pols.append(pol)
    joint = JointPolicy(pols)
    text = dump_joint(joint)
    back = load_joint(text)
    for p in range(2):
        assert set(back[p].table) == set(joint[p].table)
        for key in joint[p].table:
            assert np.array_equal(back[p].table[key], joint[p].table[key])
    # a second dump is byte-identical
    assert dump_joint(back) == text


def test_save_load_file(tmp_path, kuhn):
    from updeq.policy import save_joint
    joint = uniform_joint(kuhn)
    path = tmp_path / "pol.tsv"
    save_joint(joint, path)
    back = load_joint(path)
    assert dump_joint(back) == dump_joint(joint)
