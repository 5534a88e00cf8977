"""Optimal transport between discrete measures.

``transport_exact`` solves the transportation LP as a min-cost flow on the
bipartite support graph (successive shortest paths with reduced costs).
``sinkhorn`` is the entropic approximation, run in the log domain.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError, ValidationError

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
_ZERO = 1e-15


class TransportResult(NamedTuple):
    cost: float
    plan: np.ndarray  # (len(a), len(b)) nonnegative flows


class SinkhornResult(NamedTuple):
    cost: float
    plan: np.ndarray
    n_iter: int
    converged: bool
    marginal_error: float


def _check_marginals(a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> None:
    if cost.shape != (a.size, b.size):
        raise ValidationError(f"cost shape {cost.shape} does not match ({a.size}, {b.size})")
    if (a < 0).any() or (b < 0).any():
        raise ValidationError("masses must be nonnegative")
    if abs(a.sum() - b.sum()) > FEASIBILITY_TOL:
        raise NumericError(
            f"infeasible marginals: total masses {a.sum():.17g} and {b.sum():.17g} differ"
        )
    if not np.all(np.isfinite(cost[np.ix_(a > 0, b > 0)])):
        raise NumericError("ground distance is infinite between two support points")


def transport_exact(a, b, cost) -> TransportResult:
    """Exact earth mover's distance between masses ``a`` and ``b``.

    Parameters
    ----------
    a, b : array_like
        Nonnegative masses with equal totals (within 1e-9).
    cost : array_like, shape (len(a), len(b))
        Nonnegative ground distances.

    Returns
    -------
    TransportResult
        Optimal cost and an optimal plan whose marginals match ``a`` and ``b``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    _check_marginals(a, b, cost)
    if (cost < 0).any():
        raise ValidationError("ground distances must be nonnegative")

    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    plan = np.zeros((a.size, b.size))
    if rows.size == 0 or cols.size == 0:
        return TransportResult(0.0, plan)
    sub = _ssp(a[rows], b[cols], cost[np.ix_(rows, cols)])
    plan[np.ix_(rows, cols)] = sub
    total = math.fsum((sub * cost[np.ix_(rows, cols)]).ravel())
    return TransportResult(total, plan)


def _ssp(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Successive shortest paths on the complete bipartite residual network.

    Dense Dijkstra over plain lists: local supports are small, and numpy call
    overhead dominates at these sizes.
    """
    m, n = cost.shape
    c = cost.tolist()
    sup = supply.tolist()
    dem = demand.tolist()
    flow = [[0.0] * n for _ in range(m)]
    pot_s = [0.0] * m
    pot_t = [0.0] * n
    inf = math.inf
    # each augmentation empties a supply, a demand, or a residual arc
    max_aug = 4 * (m + 1) * (n + 1)
    for _ in range(max_aug):
        if max(sup) <= _ZERO or max(dem) <= _ZERO:
            break
        dist_s = [0.0 if x > _ZERO else inf for x in sup]
        dist_t = [inf] * n
        pred_s = [-1] * m  # sink reached from via a backward arc; -1 = root
        pred_t = [-1] * n  # source reached from via a forward arc
        done_s = [False] * m
        done_t = [False] * n
        end = -1
        while True:
            bi, bd = -1, inf
            for i in range(m):
                if not done_s[i] and dist_s[i] < bd:
                    bi, bd = i, dist_s[i]
            bj, bdt = -1, inf
            for j in range(n):
                if not done_t[j] and dist_t[j] < bdt:
                    bj, bdt = j, dist_t[j]
            if bi < 0 and bj < 0:
                break
            if bi >= 0 and bd <= bdt:
                i = bi
                done_s[i] = True
                ci, pi = c[i], pot_s[i]
                for j in range(n):
                    if not done_t[j]:
                        r = ci[j] + pi - pot_t[j]
                        nd = bd + (r if r > 0.0 else 0.0)
                        if nd < dist_t[j]:
                            dist_t[j] = nd
                            pred_t[j] = i
            else:
                j = bj
                done_t[j] = True
                if dem[j] > _ZERO:
                    end = j
                    break
                pj = pot_t[j]
                for i in range(m):
                    if not done_s[i] and flow[i][j] > _ZERO:
                        r = pj - c[i][j] - pot_s[i]
                        nd = bdt + (r if r > 0.0 else 0.0)
                        if nd < dist_s[i]:
                            dist_s[i] = nd
                            pred_s[i] = j
        if end < 0:
            raise NumericError("transport network disconnected before marginals were met")

        reach = dist_t[end]
        for i in range(m):
            pot_s[i] += dist_s[i] if done_s[i] and dist_s[i] < reach else reach
        for j in range(n):
            pot_t[j] += dist_t[j] if done_t[j] and dist_t[j] < reach else reach

        path = []
        j = end
        delta = dem[end]
        while True:
            i = pred_t[j]
            path.append((i, j))
            jb = pred_s[i]
            if jb < 0:
                delta = min(delta, sup[i])
                break
            delta = min(delta, flow[i][jb])
            j = jb
        for k, (i, j) in enumerate(path):
            flow[i][j] += delta
            if k + 1 < len(path):
                flow[i][path[k + 1][1]] -= delta
        sup[path[-1][0]] -= delta
        dem[end] -= delta
    else:
        raise NumericError(f"min-cost flow did not terminate in {max_aug} augmentations")
    return np.maximum(np.array(flow), 0.0)


def sinkhorn(
    a, b, cost, epsilon: float = 1e-3, max_iter: int = 10_000, tol: float = 1e-9
) -> SinkhornResult:
    """Entropic-regularized transport by log-domain Sinkhorn iterations.

    Stops once the row-marginal violation (L1) drops below ``tol``. Hitting
    ``max_iter`` is not an error: the last iterate is returned with
    ``converged=False`` and a warning is logged.

    The returned ``cost`` is the transport cost ``<P, C>`` of the regularized
    plan, without the entropy term.
    """
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    _check_marginals(a, b, cost)

    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    plan = np.zeros((a.size, b.size))
    if rows.size == 0 or cols.size == 0:
        return SinkhornResult(0.0, plan, 0, True, 0.0)
    aa, bb = a[rows], b[cols]
    c = cost[np.ix_(rows, cols)]
    log_a, log_b = np.log(aa), np.log(bb)
    f = np.zeros(aa.size)
    g = np.zeros(bb.size)
    err = np.inf
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        f = epsilon * (log_a - logsumexp((g[None, :] - c) / epsilon, axis=1))
        g = epsilon * (log_b - logsumexp((f[:, None] - c) / epsilon, axis=0))
        row = np.exp(logsumexp((f[:, None] + g[None, :] - c) / epsilon, axis=1))
        err = float(np.abs(row - aa).sum())
        if err < tol:
            break
    converged = err < tol
    if not converged:
        log.warning("sinkhorn did not converge in %d iterations (marginal error %.3g)",
                    max_iter, err)
    sub = np.exp((f[:, None] + g[None, :] - c) / epsilon)
    plan[np.ix_(rows, cols)] = sub
    total = math.fsum((sub * c).ravel())
    return SinkhornResult(total, plan, n_iter, converged, err)
