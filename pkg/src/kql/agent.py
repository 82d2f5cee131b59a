"""Kernelized Q-learning with optimistic (UCB) action selection.

Each step the agent

1. scores every action at the current state with the clipped optimistic value
   ``clip(Q_hat(s, a) + beta * ||K_(s,a)||_W, 0, 1 / (1 - gamma))``,
2. after the transition, recomputes regression targets for the whole history
   ``y_i = r_i + gamma * max_a Q_tilde(s'_i, a)`` with the pre-update model,
3. folds the new state-action pair into ``W`` (a rank-one downdate), updates
   the cached widths of every stored next state through the recurrence
   ``w'^2 = w^2 - u(z)^2 / (1 + s)``, and refits ``Q_hat`` on all targets.

``W`` and ``Q_hat`` are held in dual form by :class:`~kql.regressor.DualRegressor`.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BudgetExhausted, InvalidArgument
from .features import KernelSpec, embed_all_actions, embed_normalized
from .regressor import DualRegressor


def default_lambda(steps: int) -> float:
    return 1.0 / (10.0 * steps)


def default_beta(lam: float, gamma: float) -> float:
    return math.sqrt(lam) / (1.0 - gamma)


def optimistic_scores(q_hat, widths, beta: float, q_max: float) -> np.ndarray:
    """``clip(q_hat + beta * widths, 0, q_max)``, elementwise."""
    return np.clip(np.asarray(q_hat) + beta * np.asarray(widths), 0.0, q_max)


@dataclass(frozen=True)
class AgentConfig:
    """Hyperparameters of one training run.

    ``lam`` and ``beta`` default to ``1 / (10 T)`` and ``sqrt(lam) / (1 - gamma)``.
    ``check_every`` sets how often (in steps) recurrence-maintained widths are
    compared against a from-scratch evaluation; 0 disables the check.
    """

    steps: int
    kernel: KernelSpec
    gamma: float = 0.95
    lam: float | None = None
    beta: float | None = None
    check_every: int = 100

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidArgument(f"steps must be positive, got {self.steps}")
        if not 0.0 <= self.gamma < 1.0:
            raise InvalidArgument(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.lam is not None and not self.lam > 0:
            raise InvalidArgument(f"lambda must be positive, got {self.lam}")
        if not 0.0 <= self.resolved_beta <= self.beta_cap * (1 + 1e-12):
            raise InvalidArgument(
                f"beta must lie in [0, {self.beta_cap:.6g}], got {self.resolved_beta}"
            )

    @property
    def resolved_lambda(self) -> float:
        return default_lambda(self.steps) if self.lam is None else float(self.lam)

    @property
    def resolved_beta(self) -> float:
        if self.beta is None:
            return default_beta(self.resolved_lambda, self.gamma)
        return float(self.beta)

    @property
    def beta_cap(self) -> float:
        return 2.0 * math.sqrt(self.steps + self.resolved_lambda) / (1.0 - self.gamma)

    @property
    def q_max(self) -> float:
        return 1.0 / (1.0 - self.gamma)


class KQLAgent:
    """Kernelized Q-learning agent.

    Parameters
    ----------
    config : AgentConfig
    normalizer : callable
        Maps a raw environment state to its state block in ``[-1, 1]^l``.
    """

    def __init__(self, config: AgentConfig, normalizer: Callable[[object], np.ndarray]):
        self.config = config
        self.normalizer = normalizer
        self.num_actions = config.kernel.num_actions
        self.gamma = config.gamma
        self.lam = config.resolved_lambda
        self.beta = config.resolved_beta
        self.q_max = config.q_max

        cap = config.steps + 1
        A = self.num_actions
        self.reg = DualRegressor(config.kernel, self.lam, capacity=cap)
        self.alpha = np.zeros(0)
        self.targets = np.zeros(0)
        self.rewards = np.zeros(cap)
        self.terminal = np.zeros(cap, dtype=bool)
        # row block i holds features of (s'_i, a) for every action a
        self.next_features = np.zeros((cap * A, config.kernel.dim))
        self.next_kernel = np.zeros((cap * A, cap))
        self.gamma_hat = np.zeros((cap, A))
        self.t = 1
        self.max_width_drift = 0.0
        self.width_checks = 0
        self.min_width_seen = math.inf
        self.last_scores: np.ndarray | None = None
        self.last_widths: np.ndarray | None = None

    # -- evaluation of the current model ---------------------------------

    @property
    def n(self) -> int:
        return self.reg.n

    def features(self, state) -> np.ndarray:
        return embed_all_actions(self.normalizer(state), self.num_actions)

    def feature(self, state, action: int) -> np.ndarray:
        return embed_normalized(self.normalizer(state), action, self.num_actions)

    def q_hat_all(self, state) -> np.ndarray:
        if self.n == 0:
            return np.zeros(self.num_actions)
        return self.reg.kernel_vectors(self.features(state)) @ self.alpha

    def widths_all(self, state) -> np.ndarray:
        return self.reg.widths(self.features(state))

    def q_tilde_all(self, state) -> np.ndarray:
        feats = self.features(state)
        if self.n == 0:
            q = np.zeros(self.num_actions)
            w = self.reg.widths(feats)
        else:
            K = self.reg.kernel_vectors(feats)
            q = K @ self.alpha
            w = self.reg.widths(feats, K)
        return optimistic_scores(q, w, self.beta, self.q_max)

    def q_hat(self, state, action: int) -> float:
        return float(self.q_hat_all(state)[action])

    def q_tilde(self, state, action: int) -> float:
        return float(self.q_tilde_all(state)[action])

    def ucb_width(self, state, action: int) -> float:
        return float(self.widths_all(state)[action])

    # -- acting and learning ---------------------------------------------

    def select_action(self, state) -> int:
        """Optimistic action; ties go to the lowest index."""
        feats = self.features(state)
        if self.n == 0:
            q = np.zeros(self.num_actions)
            w = self.reg.widths(feats)
        else:
            K = self.reg.kernel_vectors(feats)
            q = K @ self.alpha
            w = self.reg.widths(feats, K)
        scores = optimistic_scores(q, w, self.beta, self.q_max)
        self.last_scores, self.last_widths = scores, w
        self.min_width_seen = min(self.min_width_seen, float(w.min()))
        return int(np.argmax(scores))

    def greedy_action(self, state) -> int:
        return int(np.argmax(self.q_hat_all(state)))

    def greedy_policy(self) -> Callable[[object], int]:
        """Policy maximizing the current ``Q_hat``; does not modify the agent."""
        return self.greedy_action

    def ucb_policy(self) -> Callable[[object], int]:
        """Policy maximizing the current clipped optimistic value, without learning."""

        def act(state):
            return int(np.argmax(self.q_tilde_all(state)))

        return act

    def observe(self, state, action: int, reward: float, next_state, terminal: bool) -> None:
        """Incorporate one transition.

        ``reward`` is the normalized reward in ``[0, 1]``.  ``terminal`` marks a
        true termination; its target is the bare reward.
        """
        if self.t > self.config.steps:
            raise BudgetExhausted(f"step budget of {self.config.steps} already used")
        if not 0.0 <= reward <= 1.0:
            raise InvalidArgument(f"normalized reward must lie in [0, 1], got {reward}")
        if not 0 <= action < self.num_actions:
            raise InvalidArgument(f"action {action} out of range")
        A = self.num_actions
        n = self.n
        reg = self.reg
        x = self.feature(state, action)
        new_next = self.features(next_state)

        # kernel values of the new next-state rows against current anchors
        k_new_next = reg.kernel_vectors(new_next)
        self.next_features[n * A : (n + 1) * A] = new_next
        self.next_kernel[n * A : (n + 1) * A, :n] = k_new_next
        self.gamma_hat[n] = reg.widths(new_next, k_new_next)
        self.rewards[n] = reward
        self.terminal[n] = bool(terminal)

        rows = (n + 1) * A
        K_next = self.next_kernel[:rows, :n]
        widths = self.gamma_hat[: n + 1]

        # targets with the pre-update Q_hat and W
        q_next = (K_next @ self.alpha).reshape(n + 1, A) if n else np.zeros((1, A))
        q_tilde_next = optimistic_scores(q_next, widths, self.beta, self.q_max)
        boot = np.where(self.terminal[: n + 1], 0.0, q_tilde_next.max(axis=1))
        targets = self.rewards[: n + 1] + self.gamma * boot

        # rank-one downdate of W along K_x
        k_x = reg.kernel_vectors(x[None, :])[0]
        kxx = float(reg.kernel.diag(x[None, :])[0])
        v = reg.solve(k_x)
        s = max((kxx - float(k_x @ v)) / self.lam, 0.0)
        k_next_x = reg.kernel.matrix(self.next_features[:rows], x[None, :])[:, 0]
        u = (k_next_x - (K_next @ v if n else 0.0)) / self.lam
        rad = widths.reshape(-1) ** 2 - u**2 / (1.0 + s)
        self.gamma_hat[: n + 1] = np.sqrt(np.maximum(rad, 0.0)).reshape(n + 1, A)

        reg.push(x, k_x)
        self.next_kernel[:rows, n] = k_next_x
        self.alpha = reg.coefficients(targets)
        self.targets = targets
        self.t += 1

        every = self.config.check_every
        if every and (self.t - 1) % every == 0:
            self.check_widths()

    def check_widths(self) -> float:
        """Compare recurrence-maintained widths against a from-scratch evaluation."""
        n, A = self.n, self.num_actions
        if n == 0:
            return 0.0
        rows = n * A
        fresh = self.reg.widths(self.next_features[:rows], self.next_kernel[:rows, :n])
        drift = float(np.max(np.abs(fresh - self.gamma_hat[:n].reshape(-1))))
        self.max_width_drift = max(self.max_width_drift, drift)
        self.width_checks += 1
        return drift

    def recompute_targets(self) -> np.ndarray:
        """Targets for the stored history under the current model, without updating."""
        n, A = self.n, self.num_actions
        if n == 0:
            return np.zeros(0)
        q = (self.next_kernel[: n * A, :n] @ self.alpha).reshape(n, A)
        q_tilde = optimistic_scores(q, self.gamma_hat[:n], self.beta, self.q_max)
        boot = np.where(self.terminal[:n], 0.0, q_tilde.max(axis=1))
        return self.rewards[:n] + self.gamma * boot

    def state_digest(self) -> str:
        """Hash of every mutable array; equal digests mean identical learning state."""
        h = hashlib.sha256()
        n, A = self.n, self.num_actions
        for arr in (
            self.reg.anchors,
            self.reg.chol,
            self.alpha,
            self.rewards[:n],
            self.terminal[:n],
            self.gamma_hat[:n],
            self.next_features[: n * A],
        ):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(str(self.t).encode())
        return h.hexdigest()
