"""State-action embedding and the kernels evaluated on it.

A feature vector is ``[normalized state, one-hot action]`` where every state
entry lies in ``[-1, 1]``.  Kernels are normalized so that ``K(x, x)`` lies in
``[1/4, 1]``, i.e. ``||K_x||`` lies in ``[1/2, 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidArgument, InvalidInput

KERNEL_KINDS = ("linear", "rbf", "tabular")


def normalize_state(state, bounds) -> np.ndarray:
    """Affinely map each state entry from ``[low, high]`` into ``[-1, 1]``.

    Entries outside their bounds are clipped first.
    """
    state = np.asarray(state, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape != (state.shape[-1], 2):
        raise InvalidArgument(f"bounds must have shape ({state.shape[-1]}, 2), got {bounds.shape}")
    if not np.all(np.isfinite(state)):
        raise InvalidInput(f"non-finite state entry: {state}")
    low, high = bounds[:, 0], bounds[:, 1]
    if not (np.all(np.isfinite(bounds)) and np.all(high > low)):
        raise InvalidArgument("bounds must be finite with high > low in every dimension")
    clipped = np.clip(state, low, high)
    return np.clip(2.0 * (clipped - low) / (high - low) - 1.0, -1.0, 1.0)


def one_hot(index: int, size: int) -> np.ndarray:
    if not 0 <= index < size:
        raise InvalidArgument(f"index {index} out of range for size {size}")
    out = np.zeros(size)
    out[index] = 1.0
    return out


def embed(state, action: int, bounds, num_actions: int) -> np.ndarray:
    """Concatenate the normalized state with the one-hot action."""
    if not 0 <= int(action) < num_actions:
        raise InvalidArgument(f"action {action} out of range for {num_actions} actions")
    return np.concatenate([normalize_state(state, bounds), one_hot(int(action), num_actions)])


def embed_normalized(state_block, action: int, num_actions: int) -> np.ndarray:
    """Like :func:`embed` for a state block that is already in ``[-1, 1]``."""
    state_block = np.asarray(state_block, dtype=float)
    if not np.all(np.isfinite(state_block)):
        raise InvalidInput(f"non-finite state entry: {state_block}")
    return np.concatenate([state_block, one_hot(int(action), num_actions)])


def embed_all_actions(state_block, num_actions: int) -> np.ndarray:
    """Feature matrix with one row per action, shape ``(num_actions, l + num_actions)``."""
    state_block = np.asarray(state_block, dtype=float)
    if not np.all(np.isfinite(state_block)):
        raise InvalidInput(f"non-finite state entry: {state_block}")
    rows = np.repeat(state_block[None, :], num_actions, axis=0)
    return np.hstack([rows, np.eye(num_actions)])


@dataclass(frozen=True)
class KernelSpec:
    """One of the shipped kernels over ``[state, one-hot action]`` features.

    ``linear``   ``x.y / (2 (l + 1)) + 1/2``
    ``rbf``      ``exp(-eta ||x - y||^2)``
    ``tabular``  ``1 if x == y else 0`` (for finite MDPs with one-hot states)
    """

    kind: str
    state_dim: int
    num_actions: int
    eta: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidArgument(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.num_actions < 1 or self.state_dim < 0:
            raise InvalidArgument("state_dim must be >= 0 and num_actions >= 1")
        if self.eta < 0:
            raise InvalidArgument(f"eta must be nonnegative, got {self.eta}")

    @property
    def dim(self) -> int:
        return self.state_dim + self.num_actions

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise InvalidArgument(f"feature dimension {X.shape[1]} does not match kernel dimension {self.dim}")
        return X

    def matrix(self, X, Y) -> np.ndarray:
        """Kernel matrix ``K[i, j] = K(X[i], Y[j])``."""
        X, Y = self._check(X), self._check(Y)
        if X.shape[0] == 0 or Y.shape[0] == 0:
            return np.zeros((X.shape[0], Y.shape[0]))
        if self.kind == "linear":
            return X @ Y.T / (2.0 * (self.state_dim + 1)) + 0.5
        sq = cdist(X, Y, "sqeuclidean")
        if self.kind == "rbf":
            return np.exp(-self.eta * sq)
        return (sq == 0.0).astype(float)

    def diag(self, X) -> np.ndarray:
        """Self-kernel values ``K(x, x)`` for each row of ``X``."""
        X = self._check(X)
        if self.kind == "linear":
            return np.einsum("ij,ij->i", X, X) / (2.0 * (self.state_dim + 1)) + 0.5
        return np.ones(X.shape[0])

    def __call__(self, x, y) -> float:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.shape != y.shape or x.shape != (self.dim,):
            raise InvalidArgument(f"expected two vectors of length {self.dim}, got {x.shape} and {y.shape}")
        return float(self.matrix(x, y)[0, 0])


def kernel_eval(spec: KernelSpec, x, y) -> float:
    return spec(x, y)
