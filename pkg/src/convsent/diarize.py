"""Unsupervised two-speaker discrimination over voiced chunks."""

from dataclasses import dataclass
from enum import Enum
from typing import Hashable, List, Sequence, Tuple

import numpy as np

from .alignment import DistanceMetric, dtw_distance
from .audio import Chunk
from .errors import LengthMismatch, TooFewChunks
from .features import MfccConfig, MfccMatrix, compute_mfcc


TIE_RTOL = 1e-9


class Speaker(str, Enum):
    SPEAKER_1 = "Speaker1"
    SPEAKER_2 = "Speaker2"

    def other(self) -> "Speaker":
        return Speaker.SPEAKER_2 if self is Speaker.SPEAKER_1 else Speaker.SPEAKER_1


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    values: np.ndarray
    chunk_ids: List[int]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("distance matrix must be square")
        if v.shape[0] != len(self.chunk_ids):
            raise ValueError("chunk_ids length does not match the matrix")
        if v.shape[0] < 2:
            raise TooFewChunks("need at least two chunks")
        if not np.allclose(v, v.T, rtol=0, atol=1e-9) or np.any(np.diag(v) != 0) or np.any(v < 0):
            raise ValueError("distance matrix must be symmetric, non-negative, zero-diagonal")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.chunk_ids)


@dataclass(frozen=True)
class SpeakerLabeling:
    labels: List[Speaker]
    medoid_ids: Tuple[int, int]  # (Speaker1 medoid, Speaker2 medoid)
    cost: float = 0.0


@dataclass(frozen=True)
class SweepPoint:
    n_features: int
    accuracy_percent: float


def pairwise_distance_matrix(features: Sequence[MfccMatrix],
                             metric: DistanceMetric = DistanceMetric.EUCLIDEAN) -> DistanceMatrix:
    """Path-length-normalised DTW distance between every pair of chunks."""
    n = len(features)
    if n < 2:
        raise TooFewChunks(f"need at least two chunks, got {n}")
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = dtw_distance(features[i], features[j], metric).normalized_distance
    ids = [f.chunk_id if f.chunk_id is not None else k for k, f in enumerate(features)]
    return DistanceMatrix(values, ids)


def discriminate_speakers(matrix: DistanceMatrix) -> SpeakerLabeling:
    """Exact 2-medoid partition of the chunks.

    Every medoid pair ``a < b`` is tried; chunks join the nearer medoid (ties
    go to ``a``, each medoid keeps itself). The cheapest pair wins, with ties
    resolved towards the lexicographically smallest pair. The cluster holding
    the first chunk is Speaker1.
    """
    d = matrix.values
    n = d.shape[0]
    if n < 2:
        raise TooFewChunks(f"need at least two chunks, got {n}")
    costs = np.full((n, n), np.inf)
    for a in range(n - 1):
        costs[a, a + 1:] = np.minimum(d[:, a][:, None], d[:, a + 1:]).sum(axis=0)
    lowest = costs.min()
    # costs equal up to summation rounding count as ties
    tied = np.argwhere(costs <= lowest + TIE_RTOL * max(1.0, abs(lowest)))
    a, b = (int(k) for k in min(map(tuple, tied)))
    cost = float(costs[a, b])

    to_b = d[:, b] < d[:, a]
    to_b[b] = True
    to_b[a] = False
    first_is_b = bool(to_b[0])
    labels = [
        Speaker.SPEAKER_1 if bool(x) == first_is_b else Speaker.SPEAKER_2 for x in to_b
    ]
    ids = matrix.chunk_ids
    medoids = (ids[b], ids[a]) if first_is_b else (ids[a], ids[b])
    return SpeakerLabeling(labels, medoids, cost)


def evaluate_speaker_accuracy(predicted, reference: Sequence[Hashable]) -> float:
    """Percent agreement under the better of the two speaker-name permutations."""
    pred = list(predicted.labels if isinstance(predicted, SpeakerLabeling) else predicted)
    ref = list(reference)
    if len(pred) != len(ref):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(ref)} references")
    if not pred:
        raise LengthMismatch("cannot score an empty labeling")
    pred_ids = _first_seen_codes(pred)
    ref_ids = _first_seen_codes(ref)
    if max(pred_ids) > 1 or max(ref_ids) > 1:
        raise ValueError("accuracy is defined for at most two speakers")
    p = np.asarray(pred_ids)
    r = np.asarray(ref_ids)
    matches = max(int(np.sum(p == r)), int(np.sum(p != r)))
    return 100.0 * matches / len(pred)


def _first_seen_codes(labels) -> List[int]:
    codes = {}
    return [codes.setdefault(x, len(codes)) for x in labels]


def feature_count_sweep(chunks: Sequence[Chunk], reference: Sequence[Hashable],
                        metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
                        cfg: MfccConfig = MfccConfig()) -> List[SweepPoint]:
    """Speaker accuracy as a function of how many MFCCs are kept (1..n_filters)."""
    if len(chunks) != len(reference):
        raise LengthMismatch(f"{len(chunks)} chunks vs {len(reference)} references")
    full_cfg = MfccConfig(**{**cfg.__dict__, "n_mfcc": cfg.n_filters})
    # keeping the first n DCT rows is identical to recomputing with n_mfcc = n
    full = [compute_mfcc(c, full_cfg) for c in chunks]
    points = []
    for n in range(1, cfg.n_filters + 1):
        matrix = pairwise_distance_matrix([f.truncate(n) for f in full], metric)
        labeling = discriminate_speakers(matrix)
        points.append(SweepPoint(n, evaluate_speaker_accuracy(labeling, reference)))
    return points


def sweep_to_csv(points: Sequence[SweepPoint]) -> str:
    lines = ["n_features,accuracy"]
    lines += [f"{p.n_features},{p.accuracy_percent:.2f}" for p in points]
    return "\n".join(lines) + "\n"
