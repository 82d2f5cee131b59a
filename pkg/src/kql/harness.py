"""Experiment driver: train for a fixed step budget, evaluate, write CSVs.

Training uses exactly ``steps`` environment steps, resetting only after a
``done``; an episode still running when the budget ends is cut off.
Evaluation runs ``eval_episodes`` fresh episodes with a frozen agent.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .agent import AgentConfig, KQLAgent, default_lambda
from .dimension import (
    CheckResult,
    KernelDescriptor,
    TheoryParams,
    check_bound_domination,
    check_dual_identity,
    check_monotonicity,
    check_pseudo_vs_effective,
    check_sum_of_ucb,
    regret_bound,
    theoretical_beta,
)
from .errors import ConfigError, InvalidArgument, KQLError
from .envs import DEFAULT_ETA, ENVIRONMENTS, FiniteMDP, make_env, regret, tail_length, value_iteration
from .features import KERNEL_KINDS, KernelSpec

TRAIN_FIELDS = ("t", "episode", "action", "raw_reward", "norm_reward", "done", "q_tilde", "width")
EVAL_FIELDS = ("episode", "raw_return")
REGRET_FIELDS = ("t", "cum_regret", "theory_bound")
TABLE_ENVS = ("mountaincar", "pendulum", "acrobot", "cartpole")
STD_NOTE = "std = population standard deviation of evaluation returns pooled over seeds"


@dataclass(frozen=True)
class RunConfig:
    env: str = "cartpole"
    kernel: str = "rbf"
    eta: float | None = None
    gamma: float = 0.95
    steps: int = 1000
    lam: str | float = "auto"
    beta: str | float = "auto"
    seed: int = 0
    eval_episodes: int = 100
    eval_policy: str = "greedy"
    out: str | None = None
    reward_map: str | None = None
    check_every: int = 100

    def validate(self):
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"unknown env {self.env!r}; expected one of {sorted(ENVIRONMENTS)}")
        if self.kernel not in ("linear", "rbf"):
            raise ConfigError(f"unknown kernel {self.kernel!r}; expected 'linear' or 'rbf'")
        if self.eval_policy not in ("greedy", "ucb"):
            raise ConfigError(f"unknown eval policy {self.eval_policy!r}")
        if self.steps < 1 or self.eval_episodes < 0:
            raise ConfigError("steps must be positive and eval_episodes nonnegative")
        if not (self.lam == "auto" or _is_number(self.lam)):
            raise ConfigError(f"lambda must be 'auto' or a number, got {self.lam!r}")
        if not (self.beta in ("auto", "theory") or _is_number(self.beta)):
            raise ConfigError(f"beta must be 'auto', 'theory' or a number, got {self.beta!r}")
        return self

    @property
    def resolved_eta(self) -> float:
        if self.kernel == "linear":
            return 0.0
        return DEFAULT_ETA[self.env] if self.eta is None else float(self.eta)

    @property
    def resolved_lambda(self) -> float:
        return default_lambda(self.steps) if self.lam == "auto" else float(self.lam)


def _is_number(value) -> bool:
    try:
        float(value)
    except (TypeError, ValueError):
        return False
    return True


def kernel_descriptor(spec: KernelSpec) -> KernelDescriptor:
    """Descriptor of the closed-form bounds matching a shipped kernel.

    The normalized linear kernel is a plain linear kernel on features with one
    extra constant coordinate; the tabular kernel is linear on one-hot pairs.
    """
    if spec.kind == "linear":
        return KernelDescriptor("linear", spec.dim + 1)
    if spec.kind == "tabular":
        return KernelDescriptor("linear", max(spec.state_dim, 1) * spec.num_actions)
    return KernelDescriptor("gaussian", spec.dim, spec.eta)


def resolve_beta(beta, spec: KernelSpec, steps: int, gamma: float, lam: float, rho: float = 1.0) -> float | None:
    """``None`` for the default heuristic, the deterministic-case bound for ``"theory"``."""
    if beta == "auto":
        return None
    if beta == "theory":
        params = TheoryParams.for_kernel(kernel_descriptor(spec), steps, gamma, lam, rho=rho)
        return theoretical_beta(params)
    return float(beta)


@dataclass
class RunLog:
    config: RunConfig
    records: list[tuple] = field(default_factory=list)
    train_returns: list[float] = field(default_factory=list)
    eval_returns: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta: float = 0.0
    lam: float = 0.0
    max_width_drift: float = 0.0
    min_width: float = math.inf
    digest_before_eval: str = ""
    digest_after_eval: str = ""
    train_seconds: float = 0.0
    eval_seconds: float = 0.0

    @property
    def mean(self) -> float:
        return float(np.mean(self.eval_returns)) if len(self.eval_returns) else math.nan

    @property
    def std(self) -> float:
        return float(np.std(self.eval_returns)) if len(self.eval_returns) else math.nan

    def train_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAIN_FIELDS)
        for rec in self.records:
            w.writerow(_fmt(v) for v in rec)
        return buf.getvalue()

    def eval_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EVAL_FIELDS)
        for i, ret in enumerate(self.eval_returns):
            w.writerow((i, _fmt(ret)))
        return buf.getvalue()

    def write(self, out) -> None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "train.csv").write_text(self.train_csv())
        (out / "eval.csv").write_text(self.eval_csv())


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def make_agent(config: RunConfig, env) -> KQLAgent:
    spec = KernelSpec(config.kernel, env.state_dim, env.num_actions, config.resolved_eta)
    lam = config.resolved_lambda
    beta = resolve_beta(config.beta, spec, config.steps, config.gamma, lam)
    agent_cfg = AgentConfig(
        steps=config.steps, kernel=spec, gamma=config.gamma, lam=lam, beta=beta, check_every=config.check_every
    )
    return KQLAgent(agent_cfg, env.normalize)


def evaluate(policy, env_name: str, episodes: int, seed, reward_map=None) -> np.ndarray:
    env = make_env(env_name, seed=seed, reward_map=reward_map)
    returns = np.zeros(episodes)
    for ep in range(episodes):
        state = env.reset()
        total = 0.0
        while True:
            res = env.step(policy(state))
            total += res.raw_reward
            state = res.state
            if res.done:
                break
        returns[ep] = total
    return returns


def run_experiment(config: RunConfig) -> RunLog:
    """Train a fresh agent for ``config.steps`` steps, then evaluate it."""
    config.validate()
    env = make_env(config.env, seed=[config.seed, 0], reward_map=config.reward_map)
    agent = make_agent(config, env)
    log = RunLog(config, beta=agent.beta, lam=agent.lam)

    start = time.perf_counter()
    state = env.reset()
    episode, ep_return = 0, 0.0
    for t in range(1, config.steps + 1):
        action = agent.select_action(state)
        q_sel, w_sel = float(agent.last_scores[action]), float(agent.last_widths[action])
        res = env.step(action)
        agent.observe(state, action, res.reward, res.state, res.terminated)
        log.records.append((t, episode, action, res.raw_reward, res.reward, res.done, q_sel, w_sel))
        ep_return += res.raw_reward
        state = res.state
        if res.done:
            log.train_returns.append(ep_return)
            episode, ep_return = episode + 1, 0.0
            state = env.reset()
    log.train_seconds = time.perf_counter() - start
    log.max_width_drift = agent.max_width_drift
    log.min_width = agent.min_width_seen

    start = time.perf_counter()
    log.digest_before_eval = agent.state_digest()
    policy = agent.greedy_policy() if config.eval_policy == "greedy" else agent.ucb_policy()
    log.eval_returns = evaluate(policy, config.env, config.eval_episodes, [config.seed, 1], config.reward_map)
    log.digest_after_eval = agent.state_digest()
    log.eval_seconds = time.perf_counter() - start

    if config.out:
        try:
            log.write(config.out)
        except OSError as exc:
            raise IOError(f"cannot write results to {config.out}: {exc}") from exc
    return log


def run_many(configs: Sequence[RunConfig], workers: int = 1) -> list[RunLog]:
    """Run independent configs; results come back in config order."""
    if workers <= 1:
        return [run_experiment(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_experiment, configs))


def summarize(logs: Iterable[RunLog]) -> tuple[str, dict]:
    """Pool evaluation returns per (env, kernel) and format them as ``mean ± std``."""
    logs = list(logs)
    if not logs:
        raise InvalidArgument("summarize needs at least one run log")
    pooled: dict[tuple[str, str], list[float]] = {}
    for log in logs:
        pooled.setdefault((log.config.env, log.config.kernel), []).extend(map(float, log.eval_returns))
    cells = {key: (float(np.mean(v)), float(np.std(v))) for key, v in pooled.items()}
    kernels = [k for k in ("linear", "rbf") if any(key[1] == k for key in cells)]
    envs = [e for e in TABLE_ENVS if any(key[0] == e for key in cells)]
    label = {"linear": "Linear Kernel", "rbf": "Gaussian RBF Kernel"}
    width = 22
    lines = [f"# {STD_NOTE}", " " * width + "".join(f"{e:>22}" for e in envs)]
    for k in kernels:
        row = f"{label[k]:<{width}}"
        for e in envs:
            if (e, k) in cells:
                m, s = cells[(e, k)]
                row += f"{m:>14.2f} ± {s:<5.2f}"
            else:
                row += f"{'-':>22}"
        lines.append(row)
    return "\n".join(lines) + "\n", cells


# -- regret on finite MDPs -------------------------------------------------


@dataclass
class RegretLog:
    steps: int
    states: np.ndarray
    rewards: np.ndarray
    curve: np.ndarray
    bound: np.ndarray
    total: float

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REGRET_FIELDS)
        for t in range(self.steps):
            w.writerow((t + 1, _fmt(self.curve[t]), _fmt(self.bound[t])))
        return buf.getvalue()


def run_regret(
    mdp: FiniteMDP | str | Path,
    steps: int = 1000,
    seed: int = 0,
    kernel: str = "tabular",
    eta: float = 1.0,
    beta: str | float = "auto",
    tail_tol: float = 1e-3,
    rho: float = 1.0,
    out: str | Path | None = None,
) -> RegretLog:
    """Train on a finite MDP and measure discounted regret against the oracle.

    The agent keeps acting for a tail of extra steps so that the return-to-go
    of every counted step is accurate to ``tail_tol``.
    """
    if not isinstance(mdp, FiniteMDP):
        mdp = FiniteMDP.load(mdp, seed=[seed, 0])
    if kernel not in KERNEL_KINDS:
        raise ConfigError(f"unknown kernel {kernel!r}")
    gamma = mdp.gamma
    tail = tail_length(gamma, tail_tol)
    total_steps = steps + tail
    lam = default_lambda(steps)
    spec = KernelSpec(kernel, mdp.num_states, mdp.num_actions, eta if kernel == "rbf" else 0.0)
    agent = KQLAgent(
        AgentConfig(total_steps, spec, gamma=gamma, lam=lam, beta=resolve_beta(beta, spec, steps, gamma, lam, rho), check_every=0),
        mdp.normalize,
    )
    oracle = value_iteration(mdp, gamma)
    states = np.zeros(total_steps, dtype=int)
    rewards = np.zeros(total_steps)
    s = mdp.reset()
    for i in range(total_steps):
        a = agent.select_action(s)
        res = mdp.step(a)
        agent.observe(s, a, res.reward, res.state, False)
        states[i], rewards[i] = s, res.reward
        s = res.state
    _, curve = regret(states, rewards, oracle, gamma, tail_tol)
    curve = curve[:steps]
    descriptor = kernel_descriptor(spec)
    bound = np.array(
        [
            regret_bound(TheoryParams(T=t, gamma=gamma, lam=lam, d_lambda=float(descriptor.d), rho=rho))
            for t in range(1, steps + 1)
        ]
    )
    log = RegretLog(steps, states, rewards, curve, bound, float(curve[-1]))
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(log.csv())
    return log


# -- batch dimension checks ------------------------------------------------

CHECK_LAMBDAS = (1e-4, 1e-2, 1.0, 10.0)
CHECK_GAMMAS = (0.0, 0.5, 0.95)


def random_instance(n: int, seed: int):
    """Random points in the unit ball with a linear and a Gaussian Gram matrix."""
    rng = np.random.default_rng([n, seed])
    d = int(rng.integers(1, 4))
    X = rng.normal(size=(n, d))
    X *= (rng.uniform(size=(n, 1)) ** (1.0 / d)) / np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1e-12)
    if n > 1 and rng.uniform() < 0.3:
        X[-1] = X[0]
    eta = float(rng.uniform(0.0, 3.0))
    lin = X @ X.T
    sq = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2)
    gauss = np.exp(-eta * sq)
    lam = CHECK_LAMBDAS[seed % len(CHECK_LAMBDAS)]
    return d, eta, lam, lin, gauss


def _guarded(name: str, fn, *args) -> list[CheckResult]:
    try:
        out = fn(*args)
    except KQLError as exc:
        return [CheckResult(name, False, math.nan, math.nan, f"error={type(exc).__name__}:{exc}".replace(" ", "_"))]
    return out if isinstance(out, list) else [out]


def instance_checks(n: int, seed: int, corrupt: bool = False) -> list[CheckResult]:
    d, eta, lam, lin, gauss = random_instance(n, seed)
    if corrupt and n > 1:
        gauss = gauss.copy()
        gauss[0, 1] = gauss[1, 0] = -5.0
    tag = f"[n={n},seed={seed},lam={lam:g}]"
    results = []
    results += _guarded("deff_dual_identity", check_dual_identity, gauss, lam)
    results += _guarded("monotonicity", check_monotonicity, gauss, lam)
    results += _guarded("dpse_le_log_deff", check_pseudo_vs_effective, gauss, lam)
    for g in CHECK_GAMMAS:
        results += _guarded(f"sum_of_ucb_gamma={g:g}", check_sum_of_ucb, gauss, lam, g)
    results += _guarded("deff_bound_linear", check_bound_domination, KernelDescriptor("linear", d), lin, lam)
    if lam <= n:
        results += _guarded("deff_bound_gaussian", check_bound_domination, KernelDescriptor("gaussian", d, eta), gauss, lam)
    return [replace(r, name=r.name + tag) for r in results]


def run_checks(sizes: Iterable[int], seeds: Iterable[int], corrupt: bool = False) -> list[CheckResult]:
    """All dimension checks over the grid of instance sizes and seeds."""
    seeds = list(seeds)
    results = []
    for n in sizes:
        for seed in seeds:
            results += instance_checks(int(n), int(seed), corrupt)
    return results
