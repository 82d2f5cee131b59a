"""
Linear vs Gaussian kernel on the four control tasks
===================================================

Five seeds per cell with the default protocol (1000 training steps, 100
evaluation episodes).  Takes several minutes; pass ``--quick`` for one seed
and 10 evaluation episodes.
"""
import sys

from kql.harness import RunConfig, run_many, summarize

quick = "--quick" in sys.argv
seeds = [0] if quick else range(5)
episodes = 10 if quick else 100

configs = [
    RunConfig(env=env, kernel=kernel, seed=seed, eval_episodes=episodes)
    for env in ("mountaincar", "pendulum", "acrobot", "cartpole")
    for kernel in ("linear", "rbf")
    for seed in seeds
]
logs = run_many(configs)
for log in logs:
    c = log.config
    print(f"{c.env:12s} {c.kernel:6s} seed {c.seed}: {log.mean:8.2f}")
print()
print(summarize(logs)[0])
