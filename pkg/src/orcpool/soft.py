"""Trainable soft-assignment head for the curvature-aware min-cut objective.

Network: ``X1 = ELU(A_hat X theta + b0)`` (width 8), ``H = ELU(X1 W1 + b1)``
(width 16), ``S = softmax(H W2 + b2)``. The objective is the min-cut trace
ratio on ``C_T`` plus the orthogonality penalty. Gradients are derived by
hand and optimized with Adam.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericError, ParameterError, StateError
from .flow import CurvatureAdjustedAdjacency
from .graph import Graph
from .pooling import Assignment, _as_dense, normalized_adjacency

log = logging.getLogger(__name__)

PARAM_NAMES = ("theta", "b0", "W1", "b1", "W2", "b2")
FEATURE_MODES = ("auto", "attributes", "identity", "constant")


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def _elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def node_features(g: Graph, mode: str = "auto") -> np.ndarray:
    """Input features for the head.

    ``auto`` uses the node attributes when present and one-hot node
    identities otherwise. A constant feature cannot separate nodes that an
    automorphism swaps, so it is only used when asked for.
    """
    if mode not in FEATURE_MODES:
        raise ParameterError(f"features must be one of {FEATURE_MODES}, got {mode!r}")
    if mode == "auto":
        mode = "attributes" if g.attributes is not None else "identity"
    if mode == "attributes":
        if g.attributes is None:
            raise StateError("features='attributes' but the graph has no attributes")
        return np.asarray(g.attributes, dtype=float)
    if mode == "identity":
        return np.eye(g.n)
    return np.ones((g.n, 1))


def init_params(in_dim: int, K: int, hidden: int = 16, embed: int = 8,
                seed: int = 0) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)

    def glorot(fan_in, fan_out):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_in, fan_out))

    return {
        "theta": glorot(in_dim, embed), "b0": np.zeros(embed),
        "W1": glorot(embed, hidden), "b1": np.zeros(hidden),
        "W2": glorot(hidden, K), "b2": np.zeros(K),
    }


class MinCutObjective:
    """Loss and analytic gradient of min-cut + orthogonality for fixed inputs."""

    def __init__(self, A_hat: np.ndarray, X: np.ndarray, C: np.ndarray):
        self.AX = A_hat @ X
        self.C_hat = normalized_adjacency(C)
        self.d_hat = self.C_hat.sum(axis=1)

    def forward(self, p: dict[str, np.ndarray]) -> np.ndarray:
        return self._forward(p)[-1]

    def _forward(self, p):
        y0 = self.AX @ p["theta"] + p["b0"]
        x1 = _elu(y0)
        y1 = x1 @ p["W1"] + p["b1"]
        h = _elu(y1)
        S = _softmax(h @ p["W2"] + p["b2"])
        return y0, x1, y1, h, S

    def terms(self, S: np.ndarray) -> tuple[float, float]:
        num = float(np.sum(S * (self.C_hat @ S)))
        den = float(np.sum(self.d_hat[:, None] * S * S))
        G = S.T @ S
        K = S.shape[1]
        M = G / np.linalg.norm(G) - np.eye(K) / np.sqrt(K)
        return -num / den, float(np.linalg.norm(M))

    def loss(self, p) -> float:
        cut, orth = self.terms(self.forward(p))
        return cut + orth

    def loss_and_grad(self, p) -> tuple[float, dict[str, np.ndarray], tuple[float, float]]:
        y0, x1, y1, h, S = self._forward(p)
        K = S.shape[1]
        CS = self.C_hat @ S
        DS = self.d_hat[:, None] * S
        num = float(np.sum(S * CS))
        den = float(np.sum(S * DS))
        if not den > 0:
            raise NumericError("min-cut denominator vanished during training")
        cut = -num / den
        dS = -2.0 * CS / den + 2.0 * num * DS / den ** 2

        G = S.T @ S
        gn = np.linalg.norm(G)
        M = G / gn - np.eye(K) / np.sqrt(K)
        orth = float(np.linalg.norm(M))
        if orth > 0:
            U = M / orth
            dG = U / gn - np.sum(U * G) * G / gn ** 3
            dS += S @ (dG + dG.T)

        dZ = S * (dS - np.sum(dS * S, axis=1, keepdims=True))
        grads = {"W2": h.T @ dZ, "b2": dZ.sum(axis=0)}
        dy1 = (dZ @ p["W2"].T) * _elu_grad(y1)
        grads["W1"] = x1.T @ dy1
        grads["b1"] = dy1.sum(axis=0)
        dy0 = (dy1 @ p["W1"].T) * _elu_grad(y0)
        grads["theta"] = self.AX.T @ dy0
        grads["b0"] = dy0.sum(axis=0)
        return cut + orth, grads, (cut, orth)


@dataclass
class TrainState:
    params: dict[str, np.ndarray]
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    loss_trace: list[float] = field(default_factory=list)
    cut_trace: list[float] = field(default_factory=list)
    orth_trace: list[float] = field(default_factory=list)


def _adam_update(state: TrainState, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    state.step += 1
    t = state.step
    for k in PARAM_NAMES:
        state.m[k] = beta1 * state.m[k] + (1 - beta1) * grads[k]
        state.v[k] = beta2 * state.v[k] + (1 - beta2) * grads[k] ** 2
        m_hat = state.m[k] / (1 - beta1 ** t)
        v_hat = state.v[k] / (1 - beta2 ** t)
        state.params[k] = state.params[k] - lr * m_hat / (np.sqrt(v_hat) + eps)


def train_soft_assignment(
    g: Graph,
    C: Optional[CurvatureAdjustedAdjacency],
    K: int,
    epochs: int = 500,
    lr: float = 1e-3,
    seed: int = 0,
    hidden: int = 16,
    embed: int = 8,
    features: str = "auto",
) -> tuple[Assignment, TrainState]:
    """Fit the soft-assignment head and return the final ``S``.

    ``C`` defaults to the input adjacency (the ``T = 0`` objective). The loss
    trace has ``epochs + 1`` entries: the initial loss, then one per update.
    """
    if K < 1 or K > g.n:
        raise ParameterError(f"K must be in [1, {g.n}], got {K}")
    if epochs < 0:
        raise ParameterError(f"epochs must be >= 0, got {epochs}")
    X = node_features(g, features)
    C_mat = g.adjacency() if C is None else _as_dense(C)
    obj = MinCutObjective(normalized_adjacency(g), X, C_mat)
    params = init_params(X.shape[1], K, hidden, embed, seed)
    state = TrainState(params, {k: np.zeros_like(v) for k, v in params.items()},
                       {k: np.zeros_like(v) for k, v in params.items()})

    def norms():
        return {k: round(float(np.linalg.norm(v)), 6) for k, v in state.params.items()}

    for epoch in range(epochs + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                loss, grads, (cut, orth) = obj.loss_and_grad(state.params)
        except NumericError as exc:
            raise NumericError(f"{exc} at epoch {epoch}; parameter norms {norms()}") from None
        if not np.isfinite(loss):
            raise NumericError(f"loss is {loss} at epoch {epoch}; parameter norms {norms()}")
        if not (-1 - 1e-9 <= cut <= 1e-9 and -1e-9 <= orth <= 2 + 1e-9):
            raise NumericError(f"loss terms out of range at epoch {epoch}: cut={cut}, orth={orth}")
        state.loss_trace.append(loss)
        state.cut_trace.append(cut)
        state.orth_trace.append(orth)
        if epoch == epochs:
            break
        _adam_update(state, grads, lr)
    log.info("trained %d epochs: loss %.6f -> %.6f", epochs, state.loss_trace[0], state.loss_trace[-1])
    return Assignment(obj.forward(state.params)), state
