"""End-to-end conversation analysis and the JSON dialogue report."""

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import audio, diarize, features, sentiment, transcribe
from .alignment import DistanceMetric
from .errors import ConvsentError, PipelineError, SchemaVersionMismatch

SCHEMA_VERSION = 1
FLOAT_DIGITS = 6


def _r(x: float) -> float:
    return round(float(x), FLOAT_DIGITS)


@dataclass(frozen=True)
class PipelineConfig:
    backend: transcribe.BackendConfig
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    n_mfcc: int = 13
    sentiment_method: str = "vader"
    lexicon_path: Optional[str] = None
    train_corpus_path: Optional[str] = None
    vad: audio.VadConfig = field(default_factory=audio.VadConfig)
    mfcc: features.MfccConfig = field(default_factory=features.MfccConfig)

    def mfcc_config(self) -> features.MfccConfig:
        return features.MfccConfig(**{**self.mfcc.__dict__, "n_mfcc": self.n_mfcc})


@dataclass(frozen=True)
class Utterance:
    chunk_id: int
    speaker: str
    start_s: float
    end_s: float
    text: str
    compound: float
    label: str

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "speaker": self.speaker,
            "start_s": self.start_s,
            "end_s": self.end_s,
            "text": self.text,
            "score": {"compound": self.compound, "label": self.label},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Utterance":
        return cls(d["chunk_id"], d["speaker"], d["start_s"], d["end_s"], d["text"],
                   d["score"]["compound"], d["score"]["label"])


@dataclass(frozen=True)
class SpeakerSummary:
    mean_compound: float
    majority_label: str
    utterance_count: int


@dataclass(frozen=True)
class ConversationReport:
    source_path: str
    utterances: List[Utterance]
    summary: Dict[str, SpeakerSummary]
    config: Dict[str, object]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "source_path": self.source_path,
            "config": dict(self.config),
            "utterances": [u.to_dict() for u in self.utterances],
            "summary": {k: vars(v) for k, v in self.summary.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ConversationReport":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionMismatch(
                f"report schema_version {version!r} is not supported (expected {SCHEMA_VERSION})"
            )
        return cls(
            d["source_path"],
            [Utterance.from_dict(u) for u in d["utterances"]],
            {k: SpeakerSummary(**v) for k, v in d["summary"].items()},
            dict(d["config"]),
        )


_LABEL_ORDER = (sentiment.POSITIVE, sentiment.NEGATIVE, sentiment.NEUTRAL)


def summarize(utterances: List[Utterance]) -> Dict[str, SpeakerSummary]:
    """Per-speaker mean compound, majority label and count (derived data only)."""
    by_speaker: Dict[str, List[Utterance]] = {}
    for u in utterances:
        by_speaker.setdefault(u.speaker, []).append(u)
    out = {}
    for spk in sorted(by_speaker):
        us = by_speaker[spk]
        mean = _r(sum(u.compound for u in us) / len(us))
        counts = Counter(u.label for u in us)
        top = max(counts.values())
        tied = [lab for lab in _LABEL_ORDER if counts.get(lab) == top]
        by_mean = sentiment.SentimentScore.from_compound(mean).label
        out[spk] = SpeakerSummary(mean, by_mean if by_mean in tied else tied[0], len(us))
    return out


def _sentiment_method(cfg: PipelineConfig) -> sentiment.SentimentMethod:
    lexicon = sentiment.read_lexicon(cfg.lexicon_path) if cfg.lexicon_path else None
    train = None
    if cfg.sentiment_method != "vader":
        if cfg.train_corpus_path:
            train = sentiment.read_corpus(cfg.train_corpus_path)
        else:
            docs = []
            for name in sentiment.BUNDLED_CORPORA:
                docs += sentiment.bundled_corpus(name).documents
            train = sentiment.LabeledCorpus(docs, "bundled")
    return sentiment.make_method(cfg.sentiment_method, train=train, lexicon=lexicon)


def _stage(name, fn, *args, chunk_id=None):
    try:
        return fn(*args)
    except PipelineError:
        raise
    except (ConvsentError, OSError, ValueError) as exc:
        raise PipelineError(name, exc, chunk_id) from exc


def label_chunks(chunks: List[audio.Chunk], cfg: PipelineConfig) -> List[str]:
    if not chunks:
        return []
    if len(chunks) == 1:
        return [diarize.Speaker.SPEAKER_1.value]
    mfcc_cfg = cfg.mfcc_config()
    feats = [_stage("mfcc", features.compute_mfcc, c, mfcc_cfg, chunk_id=c.id) for c in chunks]
    matrix = _stage("diarize", diarize.pairwise_distance_matrix, feats, cfg.metric)
    labeling = _stage("diarize", diarize.discriminate_speakers, matrix)
    return [lab.value for lab in labeling.labels]


def analyze_signal(signal: audio.AudioSignal, cfg: PipelineConfig,
                   source_path: str = "<memory>") -> ConversationReport:
    spans = _stage("vad", audio.detect_voice_activity, signal, cfg.vad)
    chunks = _stage("chunks", audio.extract_chunks, signal, spans)
    speakers = label_chunks(chunks, cfg)
    method = _stage("sentiment", _sentiment_method, cfg)

    utterances = []
    for chunk, speaker in zip(chunks, speakers):
        tr = _stage("transcribe", transcribe.transcribe, chunk, cfg.backend, chunk_id=chunk.id)
        score = _stage("sentiment", method.score, tr.text, chunk_id=chunk.id)
        utterances.append(Utterance(chunk.id, speaker, _r(chunk.start_s), _r(chunk.end_s),
                                    tr.text, _r(score.compound), score.label))

    config = {
        "metric": DistanceMetric(cfg.metric).value,
        "n_mfcc": cfg.n_mfcc,
        "backend": cfg.backend.name,
        "sentiment_method": cfg.sentiment_method,
    }
    return ConversationReport(source_path, utterances, summarize(utterances), config)


def run_pipeline(wav_path, cfg: PipelineConfig) -> ConversationReport:
    """VAD, chunking, MFCC/DTW diarization, transcription and sentiment for one WAV."""
    signal = _stage("load", audio.load_wav, wav_path)
    return analyze_signal(signal, cfg, str(wav_path))


def save_report(report: ConversationReport, path) -> None:
    Path(path).write_text(report.to_json(), encoding="utf-8")


def load_report(path) -> ConversationReport:
    return ConversationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
