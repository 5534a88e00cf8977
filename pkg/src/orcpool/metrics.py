"""Weighted modularity and normalized mutual information."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, ValidationError
from .graph import Graph

MODULARITY_CONVENTIONS = ("ordered", "unordered")
NMI_VARIANTS = ("standard", "paper")


@dataclass(frozen=True)
class MetricReport:
    name: str
    value: float
    convention: str
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metric"] = d.pop("name")
        return d


def _labels(labels, n=None) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValidationError(f"labels must be 1-D, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise ParameterError(f"expected {n} labels, got {arr.size}")
    return arr


def modularity(
    W: Union[Graph, np.ndarray, sp.spmatrix],
    labels: Sequence[int],
    convention: str = "ordered",
) -> float:
    """Weighted modularity of a partition.

    ``ordered`` is the Newman-Girvan form, summing over ordered node pairs
    with normaliser ``2m``. ``unordered`` counts each pair ``u < v`` once and
    normalises by the total edge weight ``m``.
    """
    if convention not in MODULARITY_CONVENTIONS:
        raise ParameterError(f"convention must be one of {MODULARITY_CONVENTIONS}")
    if isinstance(W, Graph):
        A = W.csr
    elif sp.issparse(W):
        A = sp.csr_matrix(W)
    else:
        A = sp.csr_matrix(np.asarray(W, dtype=float))
    n = A.shape[0]
    lab = _labels(labels, n)
    _, lab = np.unique(lab, return_inverse=True)
    deg = np.asarray(A.sum(axis=1)).ravel()
    two_m = float(deg.sum())
    if two_m <= 0:
        raise ValidationError("modularity is undefined on a graph with no edge weight")
    k = int(lab.max()) + 1 if n else 0
    coo = A.tocoo()
    same = lab[coo.row] == lab[coo.col]
    # within-cluster weight over ordered pairs, and per-cluster degree totals
    internal = float(coo.data[same].sum())
    dc = np.bincount(lab, weights=deg, minlength=k)
    if convention == "ordered":
        return internal / two_m - float((dc ** 2).sum()) / two_m ** 2
    m = two_m / 2.0
    # unordered pairs u < v: drop the diagonal d_v^2 terms from the null model
    null = 0.5 * (float((dc ** 2).sum()) - float((deg ** 2).sum()))
    return (internal / 2.0 - null / m) / m


def _entropy(counts: np.ndarray, base: float) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum() / math.log(base))


def nmi(p1: Sequence[int], p2: Sequence[int], variant: str = "standard") -> float:
    """Normalized mutual information between two partitions.

    ``standard`` divides the mutual information by the arithmetic mean of the
    two entropies (natural log; two single-cluster partitions give 1).
    ``paper`` is ``1 - (H(p1|p2) + H(p2|p1)) / 2`` in bits, which is not
    confined to ``[0, 1]`` from below.
    """
    if variant not in NMI_VARIANTS:
        raise ParameterError(f"variant must be one of {NMI_VARIANTS}")
    a = _labels(p1)
    b = _labels(p2)
    if a.size != b.size:
        raise ParameterError(f"partitions differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise ParameterError("partitions are empty")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    joint = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(joint, (ia, ib), 1.0)
    if joint.shape[0] == joint.shape[1] and np.all((joint > 0).sum(axis=0) == 1) \
            and np.all((joint > 0).sum(axis=1) == 1):
        # same partition up to relabeling; skip the rounding in the entropies
        return 1.0
    base = math.e if variant == "standard" else 2.0
    h_a = _entropy(joint.sum(axis=1), base)
    h_b = _entropy(joint.sum(axis=0), base)
    h_ab = _entropy(joint.ravel(), base)
    if variant == "paper":
        return 1.0 - 0.5 * ((h_ab - h_b) + (h_ab - h_a))
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    mi = h_a + h_b - h_ab
    return float(min(max(mi / (0.5 * (h_a + h_b)), 0.0), 1.0))


def modularity_report(W, labels, convention: str = "ordered", **inputs) -> MetricReport:
    return MetricReport("modularity", modularity(W, labels, convention), convention, inputs)


def nmi_report(p1, p2, variant: str = "standard", **inputs) -> MetricReport:
    return MetricReport("nmi", nmi(p1, p2, variant), variant, inputs)
