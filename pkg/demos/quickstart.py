"""
Training a kernelized Q-learner on CartPole
===========================================

The agent gets 1000 environment steps, then its greedy policy is frozen and
scored over 100 fresh episodes.
"""
import numpy as np

from kql import AgentConfig, KernelSpec, KQLAgent
from kql.envs import make_env

env = make_env("cartpole", seed=0)

# state block (4 numbers in [-1, 1]) plus a one-hot over the 2 actions
kernel = KernelSpec("rbf", env.state_dim, env.num_actions, eta=0.02)
agent = KQLAgent(AgentConfig(steps=1000, kernel=kernel), env.normalize)
print(f"lambda = {agent.lam:g}, beta = {agent.beta:g}")

state = env.reset()
episode_lengths, length = [], 0
for t in range(1000):
    action = agent.select_action(state)
    res = env.step(action)
    agent.observe(state, action, res.reward, res.state, res.terminated)
    length += 1
    state = res.state
    if res.done:
        episode_lengths.append(length)
        length = 0
        state = env.reset()
print("training episode lengths:", episode_lengths)

# the width of a state-action pair shrinks as nearby pairs are visited
probe = env.reset()
print("widths at a fresh start state:", agent.widths_all(probe))

# evaluation: greedy in Q_hat, no learning
policy = agent.greedy_policy()
eval_env = make_env("cartpole", seed=1)
returns = []
for _ in range(100):
    s, total = eval_env.reset(), 0.0
    while True:
        res = eval_env.step(policy(s))
        total += res.raw_reward
        s = res.state
        if res.done:
            break
    returns.append(total)
print(f"evaluation return {np.mean(returns):.2f} +- {np.std(returns):.2f}")
