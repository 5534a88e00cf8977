"""Closed-form flow dynamics on the model graph ``G_(a,b)``.

Edge types: 1 = hub-hub bridge, 2 = hub to clique member, 3 = between two
clique members. Under the flow from unit weights the type weights evolve as
``w^(t+1) = F(a, b) w^t``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError
from .flow import ricci_flow
from .graph import BRIDGE, HUB_INTERNAL, INTERNAL, generate_gab
from .metrics import modularity


def _check_ab(a: int, b: int) -> None:
    if b < 2 or a < b:
        raise ParameterError(f"need a >= b >= 2, got a={a}, b={b}")


def flow_matrix(a: int, b: int) -> np.ndarray:
    _check_ab(a, b)
    s = a + b
    return np.array([
        [(a - 1) / s, 2 * a / s, 0.0],
        [b / s, (a * b - a - b) / (a * s), 1 / s],
        [0.0, 0.0, 1 / a],
    ])


def analytic_weight_evolution(a: int, b: int, T: int) -> np.ndarray:
    """Rows ``t = 0..T`` of ``F^t [1, 1, 1]``; the last column is set to
    ``a^-t`` directly since it decouples from the other two types."""
    if T < 0:
        raise ParameterError(f"T must be >= 0, got {T}")
    F = flow_matrix(a, b)
    out = np.empty((T + 1, 3))
    w = np.ones(3)
    out[0] = w
    for t in range(1, T + 1):
        w = F @ w
        w[2] = float(a) ** -t
        out[t] = w
    return out


@dataclass(frozen=True)
class EigenReport:
    a: int
    b: int
    eigenvalues: tuple[float, float, float]
    real: bool
    lambda1_gt_1: bool
    lambda2_is_inv_a: bool
    lambda3_negative: bool

    @property
    def passed(self) -> bool:
        return self.real and self.lambda1_gt_1 and self.lambda2_is_inv_a and self.lambda3_negative

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def verify_eigenstructure(a: int, b: int, tol: float = 1e-10) -> EigenReport:
    """Check that ``F(a, b)`` has real eigenvalues ``l1 > 1``, ``l2 = 1/a``,
    ``l3 < 0``. ``l2`` is taken as the eigenvalue closest to ``1/a``."""
    vals = np.linalg.eigvals(flow_matrix(a, b))
    real = bool(np.all(np.abs(vals.imag) < 1e-12))
    vals = np.sort(vals.real)[::-1]
    i2 = int(np.argmin(np.abs(vals - 1.0 / a)))
    others = np.delete(vals, i2)
    l1, l3 = float(others.max()), float(others.min())
    l2 = float(vals[i2])
    return EigenReport(a, b, (l1, l2, l3), real, l1 > 1.0, abs(l2 - 1.0 / a) < tol, l3 < 0.0)


def analytic_modularity(a: int, b: int, w: np.ndarray) -> float:
    """Unordered modularity of the natural partition of ``G_(a,b)`` when the
    three edge types carry weights ``w``, from edge counts and degrees."""
    w1, w2, w3 = (float(x) for x in w)
    total = b * (b - 1) / 2 * w1 + a * b * w2 + a * (a - 1) / 2 * b * w3
    d_hub = (b - 1) * w1 + a * w2
    d_in = w2 + (a - 1) * w3
    inner = a * b * (w2 - d_in * d_hub / total) + a * (a - 1) / 2 * b * (w3 - d_in ** 2 / total)
    return inner / total


def gab_modularity_series(a: int, b: int, T: int, source: str = "analytic",
                          method: str = "exact") -> np.ndarray:
    """``Q(C_t)`` for ``t = 0..T`` with the natural cluster labels."""
    _check_ab(a, b)
    if T < 0:
        raise ParameterError(f"T must be >= 0, got {T}")
    if source == "analytic":
        return np.array([analytic_modularity(a, b, w) for w in analytic_weight_evolution(a, b, T)])
    if source != "empirical":
        raise ParameterError(f"source must be 'analytic' or 'empirical', got {source!r}")
    g, labels, _ = generate_gab(a, b)
    hist = ricci_flow(g, T, method=method, record_history=True).history
    return np.array([modularity(g.with_weights(w), labels, "unordered") for w in hist])


def empirical_type_weights(a: int, b: int, T: int = 1, normalization: str = "none",
                           method: str = "exact") -> tuple[np.ndarray, np.ndarray]:
    """Per-type mean weight and within-type spread for ``t = 0..T``."""
    g, _, types = generate_gab(a, b)
    hist = ricci_flow(g, T, method=method, normalization=normalization,
                      record_history=True).history
    means = np.empty((T + 1, 3))
    spread = np.empty((T + 1, 3))
    for t, w in enumerate(hist):
        for j, ty in enumerate((BRIDGE, HUB_INTERNAL, INTERNAL)):
            sel = w[types == ty]
            means[t, j] = sel.mean()
            spread[t, j] = sel.max() - sel.min()
    return means, spread


def is_nondecreasing(x: np.ndarray, slack: float = 1e-12) -> bool:
    return bool(np.all(np.diff(x) >= -slack))


def verify_gab(a: int, b: int, T: int = 10, method: str = "exact") -> dict:
    """Report for the model-graph claims with the numbers behind each verdict."""
    F = flow_matrix(a, b)
    predicted = F @ np.ones(3)
    means, spread = empirical_type_weights(a, b, T, normalization="sum", method=method)
    raw, _ = empirical_type_weights(a, b, 1, normalization="none", method=method)
    eig = verify_eigenstructure(a, b)
    q_an = gab_modularity_series(a, b, max(T, 1), "analytic")
    q_emp = gab_modularity_series(a, b, T, "empirical", method=method)
    one_step_err = float(np.abs(raw[1] - predicted).max())
    claims = {
        "one_step_matches_F": {
            "passed": one_step_err <= 1e-9,
            "predicted": predicted.tolist(), "observed": raw[1].tolist(),
            "max_abs_error": one_step_err,
        },
        "type_uniformity": {
            "passed": bool(spread.max() <= 1e-9), "max_spread": float(spread.max()),
        },
        "eigenstructure": eig.to_dict(),
        "analytic_modularity_nondecreasing": {
            "passed": is_nondecreasing(q_an[1:]), "series": q_an.tolist(),
        },
        "empirical_modularity_nondecreasing": {
            "passed": is_nondecreasing(q_emp[1:]), "series": q_emp.tolist(),
        },
    }
    return {"a": a, "b": b, "T": T, "method": method,
            "F": F.tolist(), "claims": claims,
            "passed": all(c["passed"] for c in claims.values())}
