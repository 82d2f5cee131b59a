import math

import numpy as np
import pytest

from kql.envs import (
    ENVIRONMENTS,
    CartPole,
    FiniteMDP,
    MountainCar,
    chain_mdp,
    discounted_return,
    make_env,
    regret,
    returns_to_go,
    value_iteration,
)
from kql.errors import InvalidArgument, InvalidInput


def test_reset_is_deterministic_given_seed():
    for name in ENVIRONMENTS:
        a = make_env(name).reset(seed=42)
        b = make_env(name).reset(seed=42)
        np.testing.assert_array_equal(a, b)


def test_cartpole_reset_range():
    env = CartPole(seed=0)
    for _ in range(500):
        assert np.all(np.abs(env.reset()) <= 0.05)


def test_cartpole_one_step_from_rest():
    # hand-evaluated Euler step of the cart-pole equations with F = +10 N
    temp = 10.0 / 1.1
    thetaacc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1))
    xacc = temp - 0.05 * thetaacc / 1.1
    env = CartPole()
    nxt, term, raw = env.dynamics(np.zeros(4), 1)
    np.testing.assert_allclose(nxt, [0.0, 0.02 * xacc, 0.0, 0.02 * thetaacc], rtol=1e-12)
    np.testing.assert_allclose(nxt, [0.0, 0.195122, 0.0, -0.292683], atol=1e-6)
    assert not term and raw == 1.0


def test_mountaincar_goal_terminates():
    env = MountainCar()
    for action in range(3):
        _, term, raw = env.dynamics(np.array([0.6, 0.07]), action)
        assert term and raw == -1.0
    env.state = np.array([0.55, 0.05])
    res = env.step(0)
    assert res.done and res.terminated and res.reward == 1.0


def test_invalid_action():
    env = make_env("acrobot", seed=0)
    env.reset()
    with pytest.raises(InvalidArgument):
        env.step(3)
    with pytest.raises(InvalidArgument):
        make_env("nope")


def test_step_is_pure_function_of_state():
    for name in ENVIRONMENTS:
        env = make_env(name, seed=1)
        s = env.reset()
        for a in range(env.num_actions):
            first = env.dynamics(s.copy(), a)
            second = env.dynamics(s.copy(), a)
            assert first[0].tobytes() == second[0].tobytes()


@pytest.mark.parametrize("name", sorted(ENVIRONMENTS))
def test_random_rollouts_respect_contracts(name):
    rng = np.random.default_rng(0)
    env = make_env(name, seed=0)
    env.reset()
    ep_len, lengths = 0, []
    for _ in range(100_000 if name in ("cartpole", "mountaincar") else 20_000):
        res = env.step(int(rng.integers(env.num_actions)))
        assert 0.0 <= res.reward <= 1.0
        feats = env.normalize(res.state)
        assert np.all(np.abs(feats) <= 1.0)
        ep_len += 1
        assert ep_len <= env.episode_cap
        if res.done:
            lengths.append(ep_len)
            ep_len = 0
            env.reset()
    assert lengths


def test_episode_caps_attain_table_extremes():
    # a MountainCar policy that never pushes stays below the goal for the whole cap
    env = make_env("mountaincar", seed=0)
    env.reset()
    total, steps = 0.0, 0
    while True:
        res = env.step(1)
        total += res.raw_reward
        steps += 1
        if res.done:
            break
    assert steps == 200 and total == -200.0
    env = make_env("acrobot", seed=0)
    env.reset()
    total = 0.0
    while True:
        res = env.step(1)
        total += res.raw_reward
        if res.done:
            break
    assert total == -500.0


def test_pendulum_normalized_reward_range():
    env = make_env("pendulum")
    assert env.normalize_reward(-env.reward_floor, False) == 0.0
    assert env.normalize_reward(0.0, False) == 1.0
    assert env.reward_floor == pytest.approx(16.2736044)


def test_affine_reward_map_for_mountaincar_is_constant():
    env = make_env("mountaincar", seed=0, reward_map="affine")
    env.reset()
    assert env.step(2).reward == 0.0


def test_chain_advance():
    mdp = chain_mdp(5)
    mdp.reset()
    for i in range(1, 5):
        assert mdp.step(1).state == i


def test_value_iteration_examples():
    one = FiniteMDP(np.ones((1, 1, 1)), np.ones((1, 1)), gamma=0.95)
    vi = value_iteration(one, 0.95, tol=1e-10)
    assert vi.v_star[0] == pytest.approx(20.0, abs=1e-9)
    assert vi.residual <= 1e-10

    P = np.zeros((2, 1, 2))
    P[0, 0, 1] = P[1, 0, 1] = 1.0
    two = FiniteMDP(P, np.array([[0.0], [1.0]]), gamma=0.95)
    vi = value_iteration(two, 0.95, tol=1e-10)
    np.testing.assert_allclose(vi.v_star, [19.0, 20.0], atol=1e-9)


def test_value_iteration_bellman_and_greedy():
    rng = np.random.default_rng(4)
    P = rng.dirichlet(np.ones(6), size=(6, 3))
    R = rng.uniform(size=(6, 3))
    mdp = FiniteMDP(P, R, gamma=0.9)
    vi = value_iteration(mdp, tol=1e-10)
    bellman = (R + 0.9 * P @ vi.v_star).max(axis=1)
    assert np.max(np.abs(bellman - vi.v_star)) <= 1e-10
    np.testing.assert_array_equal(vi.policy_star, np.argmax(vi.q_star, axis=1))


def test_discounted_return_examples():
    assert discounted_return(np.zeros(10), 0.95)[0] == 0.0
    L = 37
    assert discounted_return(np.ones(L), 0.95)[0] == pytest.approx((1 - 0.95**L) / 0.05)
    _, bound = discounted_return(np.ones(200), 0.95)
    assert bound == pytest.approx(0.95**200 / 0.05)
    assert 6e-4 < bound < 8e-4


def test_returns_to_go_brute_force():
    rng = np.random.default_rng(0)
    r = rng.uniform(size=30)
    v = returns_to_go(r, 0.9)
    for t in range(30):
        assert v[t] == pytest.approx(sum(0.9 ** (k - t) * r[k] for k in range(t, 30)))


def test_regret_of_optimal_play_is_zero():
    mdp = chain_mdp(5, gamma=0.95)
    vi = value_iteration(mdp)
    T = 600
    states, rewards = [], []
    s = mdp.reset()
    for _ in range(T):
        res = mdp.step(int(vi.policy_star[s]))
        states.append(s)
        rewards.append(res.reward)
        s = res.state
    total, curve = regret(states, rewards, vi, 0.95, tail_tol=1e-3)
    assert abs(total) <= 1e-3 * len(curve) * (1 - 0.95) + 1e-9
    assert np.all(np.abs(curve) <= 1e-3 * T)


def test_regret_of_fixed_sequence_matches_brute_force():
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = P[0, 1, 1] = P[1, :, 1] = 1.0
    mdp = FiniteMDP(P, np.array([[0.0, 0.0], [1.0, 1.0]]), gamma=0.95)
    vi = value_iteration(mdp)
    rng = np.random.default_rng(0)
    actions = rng.integers(0, 2, size=400)
    states, rewards = [], []
    s = mdp.reset()
    for a in actions:
        res = mdp.step(int(a))
        states.append(s)
        rewards.append(res.reward)
        s = res.state
    total, curve = regret(states, rewards, vi, 0.95, tail_tol=1e-3)
    counted = [t for t in range(400) if 0.95 ** (400 - t) / 0.05 <= 1e-3]
    brute = 0.0
    for t in counted:
        v_t = sum(0.95 ** (k - t) * rewards[k] for k in range(t, 400))
        brute += 0.05 * (vi.v_star[states[t]] - v_t)
    assert total == pytest.approx(brute, rel=1e-10)
    assert total > 0
    assert total <= len(counted)


def test_regret_rejects_foreign_states():
    vi = value_iteration(chain_mdp(3))
    with pytest.raises(InvalidArgument):
        regret([0, 5], [0.0, 0.0], vi, 0.95)


def test_finite_mdp_text_roundtrip(tmp_path):
    mdp = chain_mdp(4)
    path = tmp_path / "chain.txt"
    path.write_text(mdp.to_text())
    loaded = FiniteMDP.load(path)
    np.testing.assert_array_equal(loaded.transition, mdp.transition)
    np.testing.assert_array_equal(loaded.reward, mdp.reward)
    assert loaded.gamma == mdp.gamma


def test_finite_mdp_validation():
    with pytest.raises(InvalidInput):
        FiniteMDP(np.full((1, 1, 1), 0.5), np.ones((1, 1)))
    with pytest.raises(InvalidInput):
        FiniteMDP(np.ones((1, 1, 1)), np.full((1, 1), 2.0))
    with pytest.raises(InvalidInput):
        FiniteMDP.from_text("2 1 0.9\n0 0 0.5 1 0\n")
