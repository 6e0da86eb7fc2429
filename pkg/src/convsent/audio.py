"""WAV I/O, framing and energy-based voice activity detection."""

import io
import wave
from dataclasses import dataclass
from typing import List, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CorruptFile, SpanOutOfRange, UnsupportedFormat

PCM_SCALE = 32768.0


@dataclass(frozen=True, eq=False)
class AudioSignal:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True, eq=False)
class FrameSequence:
    frames: np.ndarray  # (n_frames, frame_len), read-only view
    frame_len: int
    hop: int

    def __len__(self):
        return self.frames.shape[0]


@dataclass(frozen=True, order=True)
class ChunkSpan:
    start_sample: int
    end_sample: int  # exclusive

    def __post_init__(self):
        if not 0 <= self.start_sample < self.end_sample:
            raise ValueError(f"invalid span [{self.start_sample}, {self.end_sample})")

    def __len__(self):
        return self.end_sample - self.start_sample


@dataclass(frozen=True, eq=False)
class Chunk:
    id: int
    span: ChunkSpan
    samples: np.ndarray
    sample_rate_hz: int

    @property
    def start_s(self) -> float:
        return self.span.start_sample / self.sample_rate_hz

    @property
    def end_s(self) -> float:
        return self.span.end_sample / self.sample_rate_hz


@dataclass(frozen=True)
class VadConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    energy_threshold_factor: float = 3.0
    min_voiced_ms: float = 200.0
    hangover_frames: int = 5
    # absolute lower bound on the noise floor (mean-square energy); keeps
    # digital silence from making every frame "voiced"
    min_noise_energy: float = 1e-10

    def __post_init__(self):
        for name in ("frame_ms", "hop_ms", "energy_threshold_factor",
                     "min_voiced_ms", "hangover_frames", "min_noise_energy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"VadConfig.{name} must be strictly positive")
        if self.frame_ms < self.hop_ms:
            raise ValueError("VadConfig.frame_ms must be >= hop_ms")


def ms_to_samples(ms: float, sample_rate_hz: int) -> int:
    return max(1, int(round(ms * sample_rate_hz / 1000.0)))


def load_wav(path) -> AudioSignal:
    """Read a 16-bit linear PCM mono WAV file, normalised to [-1, 1)."""
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_wav(data)


def decode_wav(data: bytes) -> AudioSignal:
    if data[:4] != b"RIFF" or (len(data) >= 12 and data[8:12] != b"WAVE"):
        raise UnsupportedFormat("not a RIFF/WAVE container")
    if len(data) < 12:
        raise CorruptFile("truncated RIFF header")
    try:
        with wave.open(io.BytesIO(data), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedFormat(f"non-PCM WAV: {exc}") from exc
        raise CorruptFile(str(exc)) from exc
    except EOFError as exc:
        raise CorruptFile("truncated WAV header") from exc

    if channels != 1:
        raise UnsupportedFormat(f"expected mono, got {channels} channels")
    if width != 2:
        raise UnsupportedFormat(f"expected 16-bit samples, got {8 * width}-bit")
    if len(raw) != n_frames * 2:
        raise CorruptFile(
            f"data chunk truncated: header declares {n_frames} samples, "
            f"found {len(raw) // 2}"
        )
    pcm = np.frombuffer(raw, dtype="<i2")
    return AudioSignal(pcm.astype(np.float64) / PCM_SCALE, rate)


def encode_wav(samples, sample_rate_hz: int) -> bytes:
    """Serialise float samples in [-1, 1] to 16-bit mono PCM WAV bytes."""
    x = np.asarray(samples, dtype=np.float64)
    pcm = np.clip(np.round(x * PCM_SCALE), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(sample_rate_hz))
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()


def save_wav(path, signal: AudioSignal) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav(signal.samples, signal.sample_rate_hz))


def frame_signal(signal: Union[AudioSignal, np.ndarray], frame_len: int, hop: int) -> FrameSequence:
    """Split a signal into overlapping frames; the incomplete tail is dropped.

    Frame ``k`` covers samples ``[k * hop, k * hop + frame_len)``.
    """
    if frame_len < 1 or hop < 1:
        raise ValueError("frame_len and hop must be >= 1")
    x = signal.samples if isinstance(signal, AudioSignal) else np.asarray(signal, dtype=np.float64)
    if len(x) < frame_len:
        return FrameSequence(np.empty((0, frame_len)), frame_len, hop)
    frames = sliding_window_view(x, frame_len)[::hop]
    return FrameSequence(frames, frame_len, hop)


def frame_energies(signal: AudioSignal, cfg: VadConfig) -> np.ndarray:
    """Mean-square energy of each VAD frame."""
    frame_len = ms_to_samples(cfg.frame_ms, signal.sample_rate_hz)
    hop = ms_to_samples(cfg.hop_ms, signal.sample_rate_hz)
    frames = frame_signal(signal, frame_len, hop).frames
    return np.mean(frames ** 2, axis=1) if len(frames) else np.empty(0)


def _close_gaps(voiced: np.ndarray, max_gap: int) -> np.ndarray:
    # fill unvoiced runs of <= max_gap frames that sit between voiced frames
    out = voiced.copy()
    idx = np.flatnonzero(voiced)
    if len(idx) < 2:
        return out
    for a, b in zip(idx[:-1], idx[1:]):
        if 1 < b - a <= max_gap + 1:
            out[a + 1:b] = True
    return out


def detect_voice_activity(signal: AudioSignal, cfg: VadConfig = VadConfig()) -> List[ChunkSpan]:
    """Locate voiced regions by short-time energy against an adaptive noise floor.

    The noise floor is the 10th percentile of frame energies (bounded below by
    ``cfg.min_noise_energy``). Frames at or above ``energy_threshold_factor``
    times the floor are voiced; unvoiced gaps of at most ``hangover_frames``
    between voiced frames are bridged, and regions shorter than
    ``min_voiced_ms`` are discarded.
    """
    if len(signal) == 0:
        raise ValueError("signal is empty")
    sr = signal.sample_rate_hz
    frame_len = ms_to_samples(cfg.frame_ms, sr)
    hop = ms_to_samples(cfg.hop_ms, sr)
    energies = frame_energies(signal, cfg)
    if len(energies) == 0:
        return []

    noise_floor = max(float(np.percentile(energies, 10)), cfg.min_noise_energy)
    threshold = cfg.energy_threshold_factor * noise_floor
    voiced = _close_gaps(energies >= threshold, cfg.hangover_frames)

    spans = []
    n = len(voiced)
    k = 0
    while k < n:
        if not voiced[k]:
            k += 1
            continue
        first = k
        while k < n and voiced[k]:
            k += 1
        start = first * hop
        end = min((k - 1) * hop + frame_len, len(signal))
        if spans and start <= spans[-1][1]:
            spans[-1][1] = end
        else:
            spans.append([start, end])

    min_len = cfg.min_voiced_ms * sr / 1000.0
    return [ChunkSpan(s, e) for s, e in spans if e - s >= min_len]


def extract_chunks(signal: AudioSignal, spans: List[ChunkSpan]) -> List[Chunk]:
    ordered = sorted(spans)
    chunks = []
    for i, span in enumerate(ordered):
        if span.end_sample > len(signal):
            raise SpanOutOfRange(
                f"span [{span.start_sample}, {span.end_sample}) exceeds signal length {len(signal)}"
            )
        if i and span.start_sample < ordered[i - 1].end_sample:
            raise SpanOutOfRange(f"span {span} overlaps its predecessor")
        samples = signal.samples[span.start_sample:span.end_sample].copy()
        chunks.append(Chunk(i, span, samples, signal.sample_rate_hz))
    return chunks
