"""MFCC extraction: mel scale, triangular filterbank, DCT-II."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .audio import Chunk, frame_signal, ms_to_samples
from .errors import ChunkTooShort, InvalidConfig, InvalidLength, NegativeFrequency, NegativeMel


@dataclass(frozen=True)
class MfccConfig:
    n_mfcc: int = 13
    n_filters: int = 26
    fft_size: int = 512
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    fmin_hz: float = 300.0
    fmax_hz: float = 5000.0
    pre_emphasis: float = 0.97
    log_floor: float = 1e-10

    def validate(self, sample_rate_hz: int) -> None:
        if not 1 <= self.n_mfcc <= self.n_filters:
            raise InvalidConfig(f"need 1 <= n_mfcc <= n_filters, got {self.n_mfcc}/{self.n_filters}")
        if not 0 <= self.fmin_hz < self.fmax_hz <= sample_rate_hz / 2:
            raise InvalidConfig(
                f"need 0 <= fmin < fmax <= {sample_rate_hz / 2}, got {self.fmin_hz}..{self.fmax_hz}"
            )
        if self.fft_size < ms_to_samples(self.frame_ms, sample_rate_hz):
            raise InvalidConfig("fft_size is shorter than one analysis frame")
        if self.hop_ms <= 0 or self.frame_ms <= 0 or self.log_floor <= 0:
            raise InvalidConfig("frame_ms, hop_ms and log_floor must be positive")


@dataclass(frozen=True, eq=False)
class MelFilterBank:
    weights: np.ndarray  # (n_filters, fft_size // 2 + 1)
    fmin_hz: float
    fmax_hz: float
    sample_rate_hz: int
    edge_mels: np.ndarray  # n_filters + 2 points, uniform in mel
    edge_bins: np.ndarray  # edge_mels snapped to FFT bins

    @property
    def center_bins(self) -> np.ndarray:
        return self.edge_bins[1:-1]

    @property
    def center_hz(self) -> np.ndarray:
        return mel_to_hz(self.edge_mels[1:-1])

    def to_csv(self) -> str:
        n_bins = self.weights.shape[1]
        fft_size = 2 * (n_bins - 1)
        lines = ["filter,center_hz," + ",".join(
            f"{k * self.sample_rate_hz / fft_size:g}" for k in range(n_bins))]
        for i, (row, fc) in enumerate(zip(self.weights, self.center_hz)):
            lines.append(f"{i},{fc:.3f}," + ",".join(f"{w:.6f}" for w in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class MfccMatrix:
    coeffs: np.ndarray  # (n_frames, n_mfcc)
    chunk_id: Optional[int] = None

    @property
    def n_frames(self) -> int:
        return self.coeffs.shape[0]

    def truncate(self, n: int) -> "MfccMatrix":
        return MfccMatrix(self.coeffs[:, :n], self.chunk_id)


def hz_to_mel(f):
    """2595 * log10(1 + f / 700); accepts scalars or arrays."""
    f_arr = np.asarray(f, dtype=np.float64)
    if np.any(f_arr < 0):
        raise NegativeFrequency(f"frequency must be >= 0, got {f}")
    m = (2595.0 / np.log(10.0)) * np.log1p(f_arr / 700.0)
    return float(m) if m.ndim == 0 else m


def mel_to_hz(m):
    m_arr = np.asarray(m, dtype=np.float64)
    if np.any(m_arr < 0):
        raise NegativeMel(f"mel value must be >= 0, got {m}")
    f = 700.0 * np.expm1(m_arr * np.log(10.0) / 2595.0)
    return float(f) if f.ndim == 0 else f


def build_mel_filterbank(cfg: MfccConfig, sample_rate_hz: int) -> MelFilterBank:
    """Triangular filters with edges uniform in mel between fmin and fmax.

    Edges are snapped to FFT bins with ``floor((fft_size + 1) * f / sr)``; each
    triangle is 0 at its outer edges and 1 at its center bin.
    """
    cfg.validate(sample_rate_hz)
    return _filterbank(cfg.n_filters, cfg.fft_size, float(cfg.fmin_hz), float(cfg.fmax_hz),
                       int(sample_rate_hz))


@lru_cache(maxsize=32)
def _filterbank(n_filters, fft_size, fmin_hz, fmax_hz, sample_rate_hz) -> MelFilterBank:
    edge_mels = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_filters + 2)
    edge_bins = np.floor((fft_size + 1) * mel_to_hz(edge_mels) / sample_rate_hz).astype(int)
    if np.any(np.diff(edge_bins) <= 0):
        raise InvalidConfig(
            f"{n_filters} filters do not fit between {fmin_hz} and {fmax_hz} Hz "
            f"at fft_size={fft_size}; adjacent filter edges collapse onto one FFT bin"
        )
    weights = np.zeros((n_filters, fft_size // 2 + 1))
    for i in range(n_filters):
        left, center, right = edge_bins[i], edge_bins[i + 1], edge_bins[i + 2]
        k = np.arange(left, center + 1)
        weights[i, k] = (k - left) / (center - left)
        k = np.arange(center, right + 1)
        weights[i, k] = (right - k) / (right - center)
    weights.setflags(write=False)
    edge_mels.setflags(write=False)
    edge_bins.setflags(write=False)
    return MelFilterBank(weights, fmin_hz, fmax_hz, sample_rate_hz, edge_mels, edge_bins)


@lru_cache(maxsize=32)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis; row k holds the k-th cosine."""
    j = np.arange(n)
    basis = np.cos(np.pi * (2 * j[None, :] + 1) * j[:, None] / (2 * n))
    basis *= np.sqrt(2.0 / n)
    basis[0] /= np.sqrt(2.0)
    basis.setflags(write=False)
    return basis


def dct_ii(v, n_out: Optional[int] = None) -> np.ndarray:
    """First ``n_out`` orthonormal DCT-II coefficients of ``v`` (last axis)."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1] if v.ndim else 0
    if n == 0:
        raise InvalidLength("input must be non-empty")
    if n_out is None:
        n_out = n
    if not 1 <= n_out <= n:
        raise InvalidLength(f"n_out must be in [1, {n}], got {n_out}")
    return v @ dct_matrix(n)[:n_out].T


def power_spectrum(chunk: Chunk, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """Pre-emphasised, Hamming-windowed periodogram, one row per frame."""
    x, sr = chunk.samples, chunk.sample_rate_hz
    cfg.validate(sr)
    frame_len = ms_to_samples(cfg.frame_ms, sr)
    hop = ms_to_samples(cfg.hop_ms, sr)
    if len(x) < frame_len:
        raise ChunkTooShort(
            f"chunk {chunk.id} has {len(x)} samples, fewer than one {frame_len}-sample frame"
        )
    emphasised = np.append(x[:1], x[1:] - cfg.pre_emphasis * x[:-1])
    frames = frame_signal(emphasised, frame_len, hop).frames * np.hamming(frame_len)
    spectrum = np.fft.rfft(frames, n=cfg.fft_size, axis=1)
    return (spectrum.real ** 2 + spectrum.imag ** 2) / cfg.fft_size


def filterbank_energies(chunk: Chunk, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """Mel filterbank energies (n_frames, n_filters) before the log."""
    fbank = build_mel_filterbank(cfg, chunk.sample_rate_hz)
    return power_spectrum(chunk, cfg) @ fbank.weights.T


def compute_mfcc(chunk: Chunk, cfg: MfccConfig = MfccConfig()) -> MfccMatrix:
    energies = filterbank_energies(chunk, cfg)
    log_e = np.log(np.maximum(energies, cfg.log_floor))
    return MfccMatrix(dct_ii(log_e, cfg.n_mfcc), chunk.id)
