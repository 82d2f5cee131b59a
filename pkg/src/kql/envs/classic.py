"""Deterministic classic-control tasks with discrete actions.

Dynamics follow the standard Gym reference implementations.  The only
randomness is the initial-state draw in :meth:`reset`.  Every environment
reports the raw reward together with a normalized reward in ``[0, 1]``:

* CartPole: 1 per step the pole stays up, 0 on the failing step.
* Pendulum: ``(r_raw + 16.2736044) / 16.2736044``.
* MountainCar / Acrobot: 0 per step and 1 on the goal-reaching step
  (``reward_map="goal"``), or ``r_raw + 1`` (``reward_map="affine"``).
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..errors import InvalidArgument
from ..features import normalize_state


class StepResult(NamedTuple):
    state: np.ndarray
    raw_reward: float
    reward: float
    done: bool
    terminated: bool


class ClassicEnv:
    """Shared episode bookkeeping; subclasses provide the physics."""

    name = ""
    num_actions = 0
    episode_cap = 0
    state_bounds: np.ndarray
    reward_maps = ("default",)

    def __init__(self, seed: int | None = None, reward_map: str | None = None):
        reward_map = reward_map or self.reward_maps[0]
        if reward_map not in self.reward_maps:
            raise InvalidArgument(f"{self.name}: unknown reward map {reward_map!r}")
        self.reward_map = reward_map
        self.rng = np.random.default_rng(seed)
        self.state: np.ndarray | None = None
        self.steps = 0

    @property
    def state_dim(self) -> int:
        return self.state_bounds.shape[0]

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.state = self._initial_state()
        self.steps = 0
        return self.state.copy()

    def step(self, action: int) -> StepResult:
        if self.state is None:
            raise InvalidArgument(f"{self.name}: step called before reset")
        if not (isinstance(action, (int, np.integer)) and 0 <= action < self.num_actions):
            raise InvalidArgument(f"{self.name}: invalid action {action!r}")
        new_state, terminated, raw = self.dynamics(self.state, int(action))
        self.state = new_state
        self.steps += 1
        done = terminated or self.steps >= self.episode_cap
        return StepResult(new_state.copy(), raw, self.normalize_reward(raw, terminated), done, terminated)

    def observe(self, state) -> np.ndarray:
        """Observation vector derived from the physical state."""
        return np.asarray(state, dtype=float)

    def normalize(self, state) -> np.ndarray:
        """State block in ``[-1, 1]^l`` used as kernel input."""
        return normalize_state(self.observe(state), self.state_bounds)

    def _initial_state(self) -> np.ndarray:
        raise NotImplementedError

    def dynamics(self, state: np.ndarray, action: int) -> tuple[np.ndarray, bool, float]:
        """Pure transition: ``(next_state, terminated, raw_reward)``."""
        raise NotImplementedError

    def normalize_reward(self, raw: float, terminated: bool) -> float:
        raise NotImplementedError


class CartPole(ClassicEnv):
    name = "cartpole"
    num_actions = 2
    episode_cap = 200
    gravity = 9.8
    masscart = 1.0
    masspole = 0.1
    total_mass = masscart + masspole
    length = 0.5
    polemass_length = masspole * length
    force_mag = 10.0
    tau = 0.02
    theta_threshold = 12 * 2 * math.pi / 360
    x_threshold = 2.4
    # velocity ranges are soft; values beyond them are clipped before normalization
    state_bounds = np.array([[-2.4, 2.4], [-3.0, 3.0], [-theta_threshold, theta_threshold], [-3.5, 3.5]])

    def _initial_state(self):
        return self.rng.uniform(-0.05, 0.05, size=4)

    def dynamics(self, state, action):
        x, x_dot, theta, theta_dot = state
        force = self.force_mag if action == 1 else -self.force_mag
        costheta, sintheta = math.cos(theta), math.sin(theta)
        temp = (force + self.polemass_length * theta_dot**2 * sintheta) / self.total_mass
        thetaacc = (self.gravity * sintheta - costheta * temp) / (
            self.length * (4.0 / 3.0 - self.masspole * costheta**2 / self.total_mass)
        )
        xacc = temp - self.polemass_length * thetaacc * costheta / self.total_mass
        x = x + self.tau * x_dot
        x_dot = x_dot + self.tau * xacc
        theta = theta + self.tau * theta_dot
        theta_dot = theta_dot + self.tau * thetaacc
        terminated = bool(
            x < -self.x_threshold
            or x > self.x_threshold
            or theta < -self.theta_threshold
            or theta > self.theta_threshold
        )
        return np.array([x, x_dot, theta, theta_dot]), terminated, 1.0

    def normalize_reward(self, raw, terminated):
        return 0.0 if terminated else 1.0


class MountainCar(ClassicEnv):
    name = "mountaincar"
    num_actions = 3
    episode_cap = 200
    min_position = -1.2
    max_position = 0.6
    max_speed = 0.07
    goal_position = 0.5
    goal_velocity = 0.0
    force = 0.001
    gravity = 0.0025
    state_bounds = np.array([[min_position, max_position], [-max_speed, max_speed]])
    reward_maps = ("goal", "affine")

    def _initial_state(self):
        return np.array([self.rng.uniform(-0.6, -0.4), 0.0])

    def dynamics(self, state, action):
        position, velocity = state
        velocity += (action - 1) * self.force + math.cos(3 * position) * (-self.gravity)
        velocity = min(max(velocity, -self.max_speed), self.max_speed)
        position += velocity
        position = min(max(position, self.min_position), self.max_position)
        if position == self.min_position and velocity < 0:
            velocity = 0.0
        terminated = bool(position >= self.goal_position and velocity >= self.goal_velocity)
        return np.array([position, velocity]), terminated, -1.0

    def normalize_reward(self, raw, terminated):
        if self.reward_map == "goal":
            return 1.0 if terminated else 0.0
        return raw + 1.0


def _wrap(x, m, M):
    diff = M - m
    while x > M:
        x = x - diff
    while x < m:
        x = x + diff
    return x


def rk4(derivs, y0, dt):
    """Single classical Runge-Kutta step of size ``dt``."""
    k1 = derivs(y0)
    k2 = derivs(y0 + dt / 2.0 * k1)
    k3 = derivs(y0 + dt / 2.0 * k2)
    k4 = derivs(y0 + dt * k3)
    return y0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


class Acrobot(ClassicEnv):
    """Two-link underactuated swing-up ("book" dynamics, RK4 with dt = 0.2)."""

    name = "acrobot"
    num_actions = 3
    episode_cap = 500
    dt = 0.2
    link_length_1 = 1.0
    link_mass_1 = 1.0
    link_mass_2 = 1.0
    link_com_pos_1 = 0.5
    link_com_pos_2 = 0.5
    link_moi = 1.0
    max_vel_1 = 4 * math.pi
    max_vel_2 = 9 * math.pi
    torques = (-1.0, 0.0, 1.0)
    state_bounds = np.array(
        [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [-max_vel_1, max_vel_1], [-max_vel_2, max_vel_2]]
    )
    reward_maps = ("goal", "affine")

    def _initial_state(self):
        return self.rng.uniform(-0.1, 0.1, size=4)

    def observe(self, state):
        t1, t2, d1, d2 = state
        return np.array([math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2), d1, d2])

    def _dsdt(self, s_aug):
        m1, m2 = self.link_mass_1, self.link_mass_2
        l1 = self.link_length_1
        lc1, lc2 = self.link_com_pos_1, self.link_com_pos_2
        I1 = I2 = self.link_moi
        g = 9.8
        a = s_aug[-1]
        theta1, theta2, dtheta1, dtheta2 = s_aug[:4]
        d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * math.cos(theta2)) + I1 + I2
        d2 = m2 * (lc2**2 + l1 * lc2 * math.cos(theta2)) + I2
        phi2 = m2 * lc2 * g * math.cos(theta1 + theta2 - math.pi / 2.0)
        phi1 = (
            -m2 * l1 * lc2 * dtheta2**2 * math.sin(theta2)
            - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * math.sin(theta2)
            + (m1 * lc1 + m2 * l1) * g * math.cos(theta1 - math.pi / 2)
            + phi2
        )
        ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1**2 * math.sin(theta2) - phi2) / (
            m2 * lc2**2 + I2 - d2**2 / d1
        )
        ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
        return np.array([dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0])

    def dynamics(self, state, action):
        s_aug = np.append(state, self.torques[action])
        ns = rk4(self._dsdt, s_aug, self.dt)[:4]
        ns[0] = _wrap(ns[0], -math.pi, math.pi)
        ns[1] = _wrap(ns[1], -math.pi, math.pi)
        ns[2] = min(max(ns[2], -self.max_vel_1), self.max_vel_1)
        ns[3] = min(max(ns[3], -self.max_vel_2), self.max_vel_2)
        terminated = bool(-math.cos(ns[0]) - math.cos(ns[1] + ns[0]) > 1.0)
        return ns, terminated, 0.0 if terminated else -1.0

    def normalize_reward(self, raw, terminated):
        if self.reward_map == "goal":
            return 1.0 if terminated else 0.0
        return raw + 1.0


class PendulumDiscrete(ClassicEnv):
    """Inverted pendulum swing-up with torques {-1, 0, 1}."""

    name = "pendulum"
    num_actions = 3
    episode_cap = 200
    max_speed = 8.0
    max_torque = 2.0
    dt = 0.05
    g = 10.0
    m = 1.0
    l = 1.0
    torques = (-1.0, 0.0, 1.0)
    reward_floor = math.pi**2 + 0.1 * 8.0**2 + 0.001 * 2.0**2
    state_bounds = np.array([[-1.0, 1.0], [-1.0, 1.0], [-max_speed, max_speed]])

    def _initial_state(self):
        return np.array([self.rng.uniform(-math.pi, math.pi), self.rng.uniform(-1.0, 1.0)])

    def observe(self, state):
        th, thdot = state
        return np.array([math.cos(th), math.sin(th), thdot])

    def dynamics(self, state, action):
        th, thdot = state
        u = min(max(self.torques[action], -self.max_torque), self.max_torque)
        angle = ((th + math.pi) % (2 * math.pi)) - math.pi
        cost = angle**2 + 0.1 * thdot**2 + 0.001 * u**2
        newthdot = thdot + (3 * self.g / (2 * self.l) * math.sin(th) + 3.0 / (self.m * self.l**2) * u) * self.dt
        newthdot = min(max(newthdot, -self.max_speed), self.max_speed)
        newth = th + newthdot * self.dt
        return np.array([newth, newthdot]), False, -cost

    def normalize_reward(self, raw, terminated):
        return min(max((raw + self.reward_floor) / self.reward_floor, 0.0), 1.0)


ENVIRONMENTS = {
    "cartpole": CartPole,
    "mountaincar": MountainCar,
    "acrobot": Acrobot,
    "pendulum": PendulumDiscrete,
}

# RBF bandwidths used for each task
DEFAULT_ETA = {"cartpole": 0.02, "mountaincar": 0.02, "acrobot": 0.02, "pendulum": 1.0}


def make_env(name: str, seed: int | None = None, reward_map: str | None = None) -> ClassicEnv:
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise InvalidArgument(f"unknown environment {name!r}; expected one of {sorted(ENVIRONMENTS)}") from None
    return cls(seed=seed, reward_map=reward_map)
