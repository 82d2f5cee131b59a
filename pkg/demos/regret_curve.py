"""
Discounted regret on a small chain MDP
======================================

The chain pays only at its far end, so the agent must explore to find it.
Regret is measured against value iteration.  The bound column uses hidden
constant 1 and is only meant for a shape comparison.
"""
from kql.envs import chain_mdp, value_iteration
from kql.harness import run_regret

mdp = chain_mdp(5, gamma=0.95, seed=0)
oracle = value_iteration(mdp)
print("optimal values:", oracle.v_star.round(3), "policy:", oracle.policy_star)

for T in (250, 1000):
    log = run_regret(chain_mdp(5, gamma=0.95, seed=0), steps=T, seed=0)
    print(f"T={T:5d}  regret={log.total:7.3f}  regret/T={log.total / T:.4f}  bound={log.bound[-1]:.3g}")

# regret stops growing once the optimal policy is found
for t in (10, 50, 100, 250, 500, 1000):
    print(f"  t={t:4d} cumulative regret {log.curve[t - 1]:.3f}")
