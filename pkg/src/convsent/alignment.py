"""Dynamic time warping between MFCC sequences."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, EmptySequence
from .features import MfccMatrix


class DistanceMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    CANBERRA = "canberra"
    CORRELATION = "correlation"


@dataclass(frozen=True)
class DtwResult:
    distance: float
    path: List[Tuple[int, int]]

    @property
    def normalized_distance(self) -> float:
        return self.distance / len(self.path)


def _as_frames(seq) -> np.ndarray:
    x = seq.coeffs if isinstance(seq, MfccMatrix) else seq
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"expected a (frames, coefficients) array, got shape {x.shape}")
    if x.shape[0] == 0:
        raise EmptySequence("sequence has no frames")
    return x


def cost_matrix(a: np.ndarray, b: np.ndarray, metric: DistanceMetric) -> np.ndarray:
    """Local distance between every frame of ``a`` (n, d) and of ``b`` (m, d)."""
    metric = DistanceMetric(metric)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"frame dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    if metric is DistanceMetric.EUCLIDEAN:
        diff = a[:, None, :] - b[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=2))
    if metric is DistanceMetric.CANBERRA:
        num = np.abs(a[:, None, :] - b[None, :, :])
        den = np.abs(a)[:, None, :] + np.abs(b)[None, :, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = np.where(den > 0, num / den, 0.0)
        return terms.sum(axis=2)
    ac = a - a.mean(axis=1, keepdims=True)
    bc = b - b.mean(axis=1, keepdims=True)
    na = np.sqrt(np.sum(ac * ac, axis=1))
    nb = np.sqrt(np.sum(bc * bc, axis=1))
    denom = na[:, None] * nb[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, (ac @ bc.T) / denom, 0.0)
    return 1.0 - np.clip(r, -1.0, 1.0)


def local_distance(a, b, metric: DistanceMetric) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DimensionMismatch("vectors must have at least one component")
    return float(cost_matrix(a[None, :], b[None, :], metric)[0, 0])


def _accumulate(cost: np.ndarray) -> np.ndarray:
    """Padded accumulated-cost table; acc[i + 1, j + 1] = D(i, j)."""
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    # cells on one anti-diagonal only depend on the previous two
    for d in range(n + m - 1):
        i = np.arange(max(0, d - m + 1), min(n - 1, d) + 1)
        j = d - i
        best = np.minimum(np.minimum(acc[i, j], acc[i, j + 1]), acc[i + 1, j])
        acc[i + 1, j + 1] = cost[i, j] + best
    return acc


def _backtrack(acc: np.ndarray) -> List[Tuple[int, int]]:
    i, j = acc.shape[0] - 2, acc.shape[1] - 2
    path = [(i, j)]
    while (i, j) != (0, 0):
        # order encodes tie preference: diagonal, then (i-1, j), then (i, j-1)
        candidates = (acc[i, j], acc[i, j + 1], acc[i + 1, j])
        step = int(np.argmin(candidates))
        if step == 0:
            i, j = i - 1, j - 1
        elif step == 1:
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    return path


def _dtw(cost: np.ndarray) -> DtwResult:
    acc = _accumulate(cost)
    distance = float(acc[-1, -1])
    if not math.isfinite(distance):
        raise ValueError("no admissible warping path")
    return DtwResult(distance, _backtrack(acc))


def dtw_distance(seq_a, seq_b, metric: DistanceMetric = DistanceMetric.EUCLIDEAN) -> DtwResult:
    """Exact DTW with steps (1,0), (0,1), (1,1) and D(0,0) = d(0,0)."""
    a, b = _as_frames(seq_a), _as_frames(seq_b)
    return _dtw(cost_matrix(a, b, metric))


def band_mask(n: int, m: int, radius: float) -> np.ndarray:
    """Sakoe-Chiba style band around the corner-to-corner diagonal.

    Row ``i`` admits columns within ``radius`` of ``i * (m - 1) / (n - 1)``;
    rows are widened just enough that a continuous path always exists.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    mask = np.zeros((n, m), dtype=bool)
    if n == 1 or m == 1:
        mask[:] = True
        return mask
    slope = (m - 1) / (n - 1)
    lo = np.empty(n, dtype=int)
    hi = np.empty(n, dtype=int)
    for i in range(n):
        c = i * slope
        lo[i] = max(0, math.ceil(c - radius - 1e-12))
        hi[i] = min(m - 1, math.floor(c + radius + 1e-12))
        if lo[i] > hi[i]:
            lo[i] = hi[i] = int(round(c))
    for i in range(n - 1):
        if lo[i + 1] > hi[i] + 1:
            hi[i] = lo[i + 1] - 1
    for i in range(n):
        mask[i, lo[i]:hi[i] + 1] = True
    return mask


def windowed_dtw(seq_a, seq_b, metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
                 radius: Optional[float] = None) -> DtwResult:
    a, b = _as_frames(seq_a), _as_frames(seq_b)
    cost = cost_matrix(a, b, metric)
    if radius is None:
        return _dtw(cost)
    mask = band_mask(cost.shape[0], cost.shape[1], radius)
    return _dtw(np.where(mask, cost, np.inf))
