"""Deterministic synthetic audio: tones and two-"speaker" conversations.

Each synthetic speaker is a harmonic source shaped by a fixed formant
envelope, so speakers differ in spectral envelope rather than loudness.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .audio import AudioSignal, ChunkSpan

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class VoiceProfile:
    f0_hz: float
    formants_hz: Tuple[float, ...]
    bandwidths_hz: Tuple[float, ...]
    tilt_db_per_octave: float = -6.0


SPEAKER_A = VoiceProfile(115.0, (650.0, 1100.0, 2450.0), (90.0, 110.0, 160.0), -9.0)
SPEAKER_B = VoiceProfile(215.0, (380.0, 2250.0, 3100.0), (70.0, 150.0, 200.0), -4.0)


@dataclass(frozen=True)
class SyntheticConversation:
    signal: AudioSignal
    spans: List[ChunkSpan]
    speakers: List[str]
    transcripts: Dict[int, str]

    def oracle_lines(self) -> str:
        return "".join(f"{k}\t{t}\n" for k, t in sorted(self.transcripts.items()))


def tone(freq_hz: float, duration_s: float, amplitude: float = 0.5,
         sample_rate_hz: int = SAMPLE_RATE) -> np.ndarray:
    t = np.arange(int(round(duration_s * sample_rate_hz))) / sample_rate_hz
    return amplitude * np.sin(2 * np.pi * freq_hz * t)


def _envelope_gain(freqs: np.ndarray, profile: VoiceProfile) -> np.ndarray:
    gain = np.zeros_like(freqs)
    for fc, bw in zip(profile.formants_hz, profile.bandwidths_hz):
        gain += 1.0 / (1.0 + ((freqs - fc) / bw) ** 2)
    octaves = np.log2(np.maximum(freqs, 50.0) / 100.0)
    return (gain + 0.02) * 10 ** (profile.tilt_db_per_octave * octaves / 20.0)


def voiced_segment(profile: VoiceProfile, duration_s: float, rng: np.random.Generator,
                   rms: float = 0.1, sample_rate_hz: int = SAMPLE_RATE) -> np.ndarray:
    """One utterance-like burst: jittered pitch, vibrato, syllabic modulation."""
    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    f0 = profile.f0_hz * (1.0 + rng.uniform(-0.04, 0.04))
    vib_rate, vib_depth = rng.uniform(4.0, 6.0), rng.uniform(0.01, 0.03)
    inst_f0 = f0 * (1.0 + vib_depth * np.sin(2 * np.pi * vib_rate * t))
    phase = 2 * np.pi * np.cumsum(inst_f0) / sample_rate_hz

    n_harm = int((0.45 * sample_rate_hz) // f0)
    k = np.arange(1, n_harm + 1)
    amps = _envelope_gain(k * f0, profile)
    offsets = rng.uniform(0, 2 * np.pi, n_harm)
    x = np.zeros(n)
    for kk, a, off in zip(k, amps, offsets):
        x += a * np.sin(kk * phase + off)

    syl = 1.0 - 0.3 * (0.5 + 0.5 * np.cos(2 * np.pi * rng.uniform(3.0, 5.0) * t))
    ramp = min(n // 2, int(0.015 * sample_rate_hz))
    edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    win = np.ones(n)
    win[:ramp] = edge
    win[n - ramp:] = edge[::-1]
    x *= syl * win
    return x * (rms / np.sqrt(np.mean(x ** 2)))


def conversation(speakers: Sequence[str], transcripts: Optional[Sequence[str]] = None,
                 seed: int = 0, gap_s: Tuple[float, float] = (0.45, 0.7),
                 duration_s: Tuple[float, float] = (0.7, 1.1),
                 noise_rms: float = 1e-4,
                 profiles: Optional[Dict[str, VoiceProfile]] = None,
                 sample_rate_hz: int = SAMPLE_RATE) -> SyntheticConversation:
    """Concatenate voiced bursts separated by near-silence.

    ``speakers`` names the talker of each burst ("A" or "B" by default);
    per-burst loudness is random and shared across speakers.
    """
    profiles = profiles or {"A": SPEAKER_A, "B": SPEAKER_B}
    rng = np.random.default_rng(seed)
    pieces: List[np.ndarray] = []
    spans: List[ChunkSpan] = []
    cursor = 0

    def pause(length_s):
        nonlocal cursor
        n = int(round(length_s * sample_rate_hz))
        pieces.append(np.zeros(n))
        cursor += n

    pause(rng.uniform(*gap_s))
    for who in speakers:
        seg = voiced_segment(profiles[who], rng.uniform(*duration_s), rng,
                             rms=rng.uniform(0.05, 0.15), sample_rate_hz=sample_rate_hz)
        spans.append(ChunkSpan(cursor, cursor + len(seg)))
        pieces.append(seg)
        cursor += len(seg)
        pause(rng.uniform(*gap_s))

    x = np.concatenate(pieces)
    x = x + noise_rms * rng.standard_normal(len(x))
    x = np.clip(x, -1.0, 1.0)
    texts = {}
    if transcripts is not None:
        texts = {k: t for k, t in enumerate(transcripts)}
    return SyntheticConversation(AudioSignal(x, sample_rate_hz), spans, list(speakers), texts)


def demo_conversation(seed: int = 0) -> SyntheticConversation:
    """Four alternating turns with opposite-sentiment transcripts."""
    return conversation(["A", "B", "A", "B"],
                        ["i love this", "this is terrible", "i love this", "this is terrible"],
                        seed=seed)
