"""Explicit finite MDPs, a value-iteration oracle and discounted regret.

Text table format::

    <states> <actions> <gamma>
    <s> <a> <r> <p(s'=0)> <p(s'=1)> ...      # one line per (s, a)

Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidArgument, InvalidInput
from .classic import StepResult


@dataclass
class FiniteMDP:
    """Tabular MDP with ``transition[s, a, s']`` and ``reward[s, a]`` in ``[0, 1]``.

    The start state is always 0 and episodes never end.
    """

    transition: np.ndarray
    reward: np.ndarray
    gamma: float = 0.95
    seed: int | None = None
    name: str = "finite"
    episode_cap: float = np.inf
    state: int | None = field(default=None, init=False)

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=float)
        self.reward = np.asarray(self.reward, dtype=float)
        S, A = self.reward.shape
        if self.transition.shape != (S, A, S):
            raise InvalidInput(f"transition shape {self.transition.shape} does not match rewards {self.reward.shape}")
        if np.any(self.transition < 0) or np.max(np.abs(self.transition.sum(axis=2) - 1.0)) > 1e-12:
            raise InvalidInput("every transition row must be a probability vector")
        if np.any(self.reward < 0) or np.any(self.reward > 1):
            raise InvalidInput("rewards must lie in [0, 1]")
        self.rng = np.random.default_rng(self.seed)

    @property
    def num_states(self) -> int:
        return self.reward.shape[0]

    @property
    def num_actions(self) -> int:
        return self.reward.shape[1]

    @property
    def state_dim(self) -> int:
        return self.num_states

    def normalize(self, state) -> np.ndarray:
        """One-hot state block."""
        out = np.zeros(self.num_states)
        out[int(state)] = 1.0
        return out

    def reset(self, seed: int | None = None) -> int:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.state = 0
        return 0

    def step(self, action: int) -> StepResult:
        if self.state is None:
            raise InvalidArgument("step called before reset")
        if not (isinstance(action, (int, np.integer)) and 0 <= action < self.num_actions):
            raise InvalidArgument(f"invalid action {action!r}")
        s = self.state
        r = float(self.reward[s, action])
        probs = self.transition[s, action]
        nonzero = np.flatnonzero(probs)
        if len(nonzero) == 1:
            nxt = int(nonzero[0])
        else:
            nxt = int(self.rng.choice(self.num_states, p=probs))
        self.state = nxt
        return StepResult(nxt, r, r, False, False)

    @classmethod
    def from_text(cls, text: str, seed: int | None = None) -> "FiniteMDP":
        lines = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                lines.append(line.split())
        if not lines:
            raise InvalidInput("empty MDP table")
        try:
            S, A, gamma = int(lines[0][0]), int(lines[0][1]), float(lines[0][2])
        except (IndexError, ValueError) as exc:
            raise InvalidInput(f"bad header {lines[0]}; expected 'states actions gamma'") from exc
        P = np.full((S, A, S), np.nan)
        R = np.full((S, A), np.nan)
        for fields in lines[1:]:
            if len(fields) != 3 + S:
                raise InvalidInput(f"expected {3 + S} fields per row, got {len(fields)}: {fields}")
            s, a = int(fields[0]), int(fields[1])
            if not (0 <= s < S and 0 <= a < A):
                raise InvalidInput(f"state/action out of range in row {fields}")
            R[s, a] = float(fields[2])
            P[s, a] = [float(v) for v in fields[3:]]
        if np.isnan(R).any():
            raise InvalidInput("missing (state, action) rows in MDP table")
        return cls(P, R, gamma=gamma, seed=seed)

    @classmethod
    def load(cls, path, seed: int | None = None) -> "FiniteMDP":
        return cls.from_text(Path(path).read_text(), seed=seed)

    def to_text(self) -> str:
        out = [f"{self.num_states} {self.num_actions} {self.gamma!r}"]
        for s in range(self.num_states):
            for a in range(self.num_actions):
                probs = " ".join(repr(float(p)) for p in self.transition[s, a])
                out.append(f"{s} {a} {float(self.reward[s, a])!r} {probs}")
        return "\n".join(out) + "\n"


def chain_mdp(num_states: int = 5, gamma: float = 0.95, distractor: float = 0.05, seed=None) -> FiniteMDP:
    """Deterministic chain: action 1 advances, action 0 returns to state 0.

    The last state pays 1 under either action and is left only by action 0.
    Action 0 in state 0 pays a small ``distractor`` reward.
    """
    S, A = num_states, 2
    P = np.zeros((S, A, S))
    R = np.zeros((S, A))
    for s in range(S):
        P[s, 0, 0] = 1.0
        P[s, 1, min(s + 1, S - 1)] = 1.0
    R[0, 0] = distractor
    R[S - 1, :] = 1.0
    return FiniteMDP(P, R, gamma=gamma, seed=seed, name=f"chain{S}")


@dataclass(frozen=True)
class OracleValues:
    v_star: np.ndarray
    q_star: np.ndarray
    policy_star: np.ndarray
    residual: float


def value_iteration(mdp: FiniteMDP, gamma: float | None = None, tol: float = 1e-10, max_iter: int = 1_000_000) -> OracleValues:
    """Optimal values by value iteration, stopped once the Bellman residual is at most ``tol``."""
    gamma = mdp.gamma if gamma is None else gamma
    if not 0 <= gamma < 1:
        raise InvalidArgument(f"gamma must lie in [0, 1), got {gamma}")
    v = np.zeros(mdp.num_states)
    for _ in range(max_iter):
        q = mdp.reward + gamma * mdp.transition @ v
        v_new = q.max(axis=1)
        residual = float(np.max(np.abs(v_new - v)))
        v = v_new
        if residual <= tol * 0.5:
            break
    q = mdp.reward + gamma * mdp.transition @ v
    residual = float(np.max(np.abs(q.max(axis=1) - v)))
    return OracleValues(v, q, np.argmax(q, axis=1), residual)


def returns_to_go(rewards, gamma: float) -> np.ndarray:
    """``V_t = sum_{k >= t} gamma^(k - t) r_k`` over the available rewards."""
    rewards = np.asarray(rewards, dtype=float)
    out = np.zeros(len(rewards))
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + gamma * acc
        out[i] = acc
    return out


def discounted_return(rewards, gamma: float) -> tuple[float, float]:
    """Truncated discounted return and the bound ``gamma^L / (1 - gamma)`` on the missing tail."""
    rewards = np.asarray(rewards, dtype=float)
    value = float(returns_to_go(rewards, gamma)[0]) if len(rewards) else 0.0
    return value, gamma ** len(rewards) / (1.0 - gamma)


def regret(states, rewards, oracle: OracleValues, gamma: float, tail_tol: float = 1e-3) -> tuple[float, np.ndarray]:
    """Discounted regret ``(1 - gamma) sum_t (V*(s_t) - V_t)`` of a trajectory.

    Only steps whose return-to-go truncation bound is at most ``tail_tol``
    contribute.  Returns the total and the cumulative curve over those steps.
    """
    states = np.asarray(states)
    rewards = np.asarray(rewards, dtype=float)
    if states.shape != rewards.shape:
        raise InvalidArgument("states and rewards must have the same length")
    if len(states) and (states.min() < 0 or states.max() >= len(oracle.v_star)):
        raise InvalidArgument("trajectory visits states unknown to the oracle")
    L = len(rewards)
    values = returns_to_go(rewards, gamma)
    remaining = L - np.arange(L)
    counted = gamma**remaining / (1.0 - gamma) <= tail_tol
    gaps = (1.0 - gamma) * (oracle.v_star[states[counted]] - values[counted])
    curve = np.cumsum(gaps)
    return (float(curve[-1]) if len(curve) else 0.0), curve


def tail_length(gamma: float, tail_tol: float) -> int:
    """Smallest ``L`` with ``gamma^L / (1 - gamma) <= tail_tol``."""
    L = 0
    while gamma**L / (1.0 - gamma) > tail_tol:
        L += 1
    return L
