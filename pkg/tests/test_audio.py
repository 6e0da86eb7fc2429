import struct
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convsent import audio, synth
from convsent.audio import AudioSignal, ChunkSpan, VadConfig
from convsent.errors import CorruptFile, SpanOutOfRange, UnsupportedFormat


def _raw_wav(path, channels=1, width=2, rate=16000, frames=b"\x00\x00" * 10):
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(width)
        wf.setframerate(rate)
        wf.writeframes(frames)
    return path


def _float_wav(path, n=16):
    # IEEE-float WAV header (format code 3), which the loader must refuse
    data = np.zeros(n, dtype="<f4").tobytes()
    fmt = struct.pack("<HHIIHH", 3, 1, 16000, 64000, 4, 32)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    return path


class TestLoadWav:
    def test_one_second_of_silence(self, write_wav):
        sig = audio.load_wav(write_wav(np.zeros(16000)))
        assert sig.sample_rate_hz == 16000
        assert len(sig) == 16000
        assert not sig.samples.any()

    def test_full_scale_sample_normalisation(self, tmp_path):
        path = _raw_wav(tmp_path / "max.wav", frames=struct.pack("<hh", 32767, -32768))
        sig = audio.load_wav(path)
        assert sig.samples[0] == 32767 / 32768
        assert sig.samples[0] == pytest.approx(0.99997, abs=1e-5)
        assert sig.samples[1] == -1.0

    def test_stereo_is_unsupported(self, tmp_path):
        with pytest.raises(UnsupportedFormat):
            audio.load_wav(_raw_wav(tmp_path / "st.wav", channels=2, frames=b"\x00" * 40))

    def test_8_bit_is_unsupported(self, tmp_path):
        with pytest.raises(UnsupportedFormat):
            audio.load_wav(_raw_wav(tmp_path / "u8.wav", width=1, frames=b"\x80" * 10))

    def test_float_pcm_is_unsupported(self, tmp_path):
        with pytest.raises(UnsupportedFormat):
            audio.load_wav(_float_wav(tmp_path / "f.wav"))

    def test_not_riff(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(b"OggS" + b"\x00" * 40)
        with pytest.raises(UnsupportedFormat):
            audio.load_wav(p)

    @pytest.mark.parametrize("keep", [6, 20, 30])
    def test_truncated_header(self, write_wav, keep):
        good = write_wav(np.zeros(100)).read_bytes()
        p = write_wav([])
        p.write_bytes(good[:keep])
        with pytest.raises(CorruptFile):
            audio.load_wav(p)

    def test_truncated_data(self, write_wav):
        p = write_wav(np.zeros(1000))
        p.write_bytes(p.read_bytes()[:-500])
        with pytest.raises(CorruptFile):
            audio.load_wav(p)

    def test_roundtrip_through_encoder(self, write_wav):
        x = np.round(np.linspace(-1, 0.999, 321) * 32768) / 32768
        sig = audio.load_wav(write_wav(x, 8000))
        assert sig.sample_rate_hz == 8000
        np.testing.assert_array_equal(sig.samples, x)


class TestFraming:
    def test_one_second_25ms_10ms(self):
        assert len(audio.frame_signal(np.zeros(16000), 400, 160)) == 98

    def test_too_short(self):
        assert len(audio.frame_signal(np.zeros(399), 400, 160)) == 0

    def test_exact_one_frame(self):
        assert len(audio.frame_signal(np.zeros(400), 400, 160)) == 1

    def test_frame_k_starts_at_k_hop(self):
        x = np.arange(50, dtype=float)
        fs = audio.frame_signal(AudioSignal(x, 10), 7, 3)
        for k, frame in enumerate(fs.frames):
            np.testing.assert_array_equal(frame, x[3 * k:3 * k + 7])

    def test_rejects_zero_hop(self):
        with pytest.raises(ValueError):
            audio.frame_signal(np.zeros(10), 4, 0)

    @given(st.integers(0, 3000), st.integers(1, 500), st.integers(1, 500))
    @settings(max_examples=200, deadline=None)
    def test_count_law(self, n, frame_len, hop):
        fs = audio.frame_signal(np.zeros(n), frame_len, hop)
        expected = (n - frame_len) // hop + 1 if n >= frame_len else 0
        assert len(fs) == expected
        assert fs.frames.shape[1] == frame_len


class TestVad:
    def test_digital_silence(self):
        assert audio.detect_voice_activity(AudioSignal(np.zeros(32000), 16000)) == []

    def test_tone_in_silence_boundaries(self, tone_in_silence):
        spans = audio.detect_voice_activity(tone_in_silence)
        assert len(spans) == 1
        assert abs(spans[0].start_sample / 16000 - 0.5) <= 0.025
        assert abs(spans[0].end_sample / 16000 - 1.5) <= 0.025

    def test_two_tones_keep_their_gap(self, sr):
        t = synth.tone(440.0, 0.6, 0.5, sr)
        x = np.concatenate([np.zeros(sr // 2), t, np.zeros(sr), t, np.zeros(sr // 2)])
        spans = audio.detect_voice_activity(AudioSignal(x, sr))
        assert len(spans) == 2
        gap = (spans[1].start_sample - spans[0].end_sample) / sr
        assert gap == pytest.approx(1.0, abs=0.05)

    def test_short_gaps_are_bridged(self, sr):
        t = synth.tone(300.0, 0.4, 0.5, sr)
        x = np.concatenate([np.zeros(sr // 2), t, np.zeros(int(0.03 * sr)), t, np.zeros(sr // 2)])
        assert len(audio.detect_voice_activity(AudioSignal(x, sr))) == 1

    def test_short_bursts_dropped(self, sr):
        x = np.concatenate([np.zeros(sr), synth.tone(440.0, 0.1, 0.5, sr), np.zeros(sr)])
        assert audio.detect_voice_activity(AudioSignal(x, sr)) == []
        loose = VadConfig(min_voiced_ms=50)
        assert len(audio.detect_voice_activity(AudioSignal(x, sr), loose)) == 1

    def test_spans_sorted_disjoint_and_long_enough(self, eight_turns):
        cfg = VadConfig()
        spans = audio.detect_voice_activity(eight_turns.signal, cfg)
        assert len(spans) == 8
        for a, b in zip(spans, spans[1:]):
            assert a.end_sample <= b.start_sample
        for s in spans:
            assert len(s) >= cfg.min_voiced_ms * 16
        for got, true in zip(spans, eight_turns.spans):
            assert abs(got.start_sample - true.start_sample) <= 400
            assert abs(got.end_sample - true.end_sample) <= 400

    def test_onset_frame_reaches_threshold(self, eight_turns):
        cfg = VadConfig()
        sig = eight_turns.signal
        energies = audio.frame_energies(sig, cfg)
        floor = max(np.percentile(energies, 10), cfg.min_noise_energy)
        for span in audio.detect_voice_activity(sig, cfg):
            onset = span.start_sample // 160
            assert energies[onset] >= cfg.energy_threshold_factor * floor

    @pytest.mark.parametrize("pad_s", [0.1, 0.37, 0.8, 1.5])
    def test_padding_does_not_move_spans(self, tone_in_silence, pad_s, sr):
        base = audio.detect_voice_activity(tone_in_silence)
        pad = int(pad_s * sr)
        padded = AudioSignal(np.concatenate([np.zeros(pad), tone_in_silence.samples, np.zeros(pad)]), sr)
        spans = audio.detect_voice_activity(padded)
        assert len(spans) == len(base)
        for a, b in zip(base, spans):
            assert abs((b.start_sample - pad) - a.start_sample) <= 400
            assert abs((b.end_sample - pad) - a.end_sample) <= 400

    def test_empty_signal_rejected(self):
        with pytest.raises(ValueError):
            audio.detect_voice_activity(AudioSignal(np.zeros(0), 16000))

    @pytest.mark.parametrize("kw", [{"frame_ms": 0}, {"hop_ms": 30.0}, {"hangover_frames": 0},
                                    {"energy_threshold_factor": -1}])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            VadConfig(**kw)


class TestExtractChunks:
    def test_empty(self, tone_in_silence):
        assert audio.extract_chunks(tone_in_silence, []) == []

    def test_slice(self, tone_in_silence):
        (chunk,) = audio.extract_chunks(tone_in_silence, [ChunkSpan(8000, 24000)])
        assert chunk.id == 0
        assert len(chunk.samples) == 16000
        assert chunk.samples.tobytes() == tone_in_silence.samples[8000:24000].tobytes()
        assert (chunk.start_s, chunk.end_s) == (0.5, 1.5)

    def test_ids_follow_time(self, tone_in_silence):
        chunks = audio.extract_chunks(tone_in_silence, [ChunkSpan(9000, 9500), ChunkSpan(100, 200)])
        assert [c.id for c in chunks] == [0, 1]
        assert [c.span.start_sample for c in chunks] == [100, 9000]

    def test_out_of_range(self, tone_in_silence):
        with pytest.raises(SpanOutOfRange):
            audio.extract_chunks(tone_in_silence, [ChunkSpan(31000, 32001)])

    def test_chunk_is_a_copy(self, tone_in_silence):
        (chunk,) = audio.extract_chunks(tone_in_silence, [ChunkSpan(0, 10)])
        chunk.samples[:] = 7.0
        assert not (tone_in_silence.samples[:10] == 7.0).any()

    def test_invalid_span(self):
        with pytest.raises(ValueError):
            ChunkSpan(5, 5)
