"""Chunk transcription backends and word recognition rate scoring."""

import logging
import os
import string
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Union

import requests

from .audio import Chunk, encode_wav
from .errors import (
    BackendUnreachable,
    EmptyEvaluation,
    InvalidBackendConfig,
    MalformedResponse,
    MissingOracleEntry,
)

log = logging.getLogger(__name__)


class BackendKind(str, Enum):
    ORACLE = "oracle"
    HTTP = "http"


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind
    oracle_path: Optional[str] = None
    endpoint_url: Optional[str] = None
    api_key_env_var: Optional[str] = None
    timeout_s: float = 30.0
    max_retries: int = 3
    backoff_s: float = 0.5

    def __post_init__(self):
        kind = BackendKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is BackendKind.ORACLE:
            if not self.oracle_path or self.endpoint_url:
                raise InvalidBackendConfig("oracle backend needs oracle_path and no endpoint_url")
        else:
            if not self.endpoint_url or self.oracle_path:
                raise InvalidBackendConfig("http backend needs endpoint_url and no oracle_path")
            if self.max_retries < 0 or self.timeout_s <= 0:
                raise InvalidBackendConfig("max_retries must be >= 0 and timeout_s > 0")

    @classmethod
    def oracle(cls, path) -> "BackendConfig":
        return cls(BackendKind.ORACLE, oracle_path=str(path))

    @classmethod
    def http(cls, url: str, api_key_env_var: Optional[str] = None, **kwargs) -> "BackendConfig":
        return cls(BackendKind.HTTP, endpoint_url=url, api_key_env_var=api_key_env_var, **kwargs)

    @property
    def name(self) -> str:
        return "oracle" if self.kind is BackendKind.ORACLE else f"http:{self.endpoint_url}"


@dataclass(frozen=True)
class Transcript:
    chunk_id: int
    text: str
    backend_name: str


@dataclass(frozen=True)
class WrrReport:
    reference_word_count: int
    hits: int
    substitutions: int
    deletions: int
    insertions: int

    @property
    def wrr_percent(self) -> float:
        if self.reference_word_count == 0:
            return 0.0
        return 100.0 * self.hits / self.reference_word_count

    def as_dict(self) -> dict:
        return {
            "reference_word_count": self.reference_word_count,
            "hits": self.hits,
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "wrr_percent": self.wrr_percent,
        }


@dataclass(frozen=True)
class BackendEvaluation:
    per_chunk: Dict[int, WrrReport] = field(default_factory=dict)
    aggregate: Optional[WrrReport] = None


def read_oracle_file(path) -> Dict[int, str]:
    """Parse ``chunk_id<TAB>text`` lines."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            key, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'chunk_id<TAB>text'")
            entries[int(key)] = text
    return entries


def _transcribe_oracle(chunk: Chunk, cfg: BackendConfig) -> Transcript:
    entries = read_oracle_file(cfg.oracle_path)
    if chunk.id not in entries:
        raise MissingOracleEntry(f"no transcript for chunk {chunk.id} in {cfg.oracle_path}")
    return Transcript(chunk.id, entries[chunk.id], cfg.name)


def _transcribe_http(chunk: Chunk, cfg: BackendConfig, session=None) -> Transcript:
    headers = {"Content-Type": "audio/wav"}
    if cfg.api_key_env_var:
        key = os.environ.get(cfg.api_key_env_var)
        if key is None:
            raise InvalidBackendConfig(f"environment variable {cfg.api_key_env_var} is not set")
        headers["Authorization"] = f"Bearer {key}"
    body = encode_wav(chunk.samples, chunk.sample_rate_hz)
    post = (session or requests).post

    last_error = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            delay = cfg.backoff_s * 2 ** (attempt - 1)
            log.warning("chunk %d: retry %d/%d in %.2fs (%s)",
                        chunk.id, attempt, cfg.max_retries, delay, last_error)
            time.sleep(delay)
        try:
            resp = post(cfg.endpoint_url, data=body, headers=headers, timeout=cfg.timeout_s)
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_error = exc
            continue
        if resp.status_code == 429 or resp.status_code >= 500:
            last_error = f"HTTP {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise BackendUnreachable(
                f"{cfg.endpoint_url} rejected chunk {chunk.id}: HTTP {resp.status_code}"
            )
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"response for chunk {chunk.id} is not JSON") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("transcript"), str):
            raise MalformedResponse(f"response for chunk {chunk.id} lacks a string 'transcript'")
        return Transcript(chunk.id, payload["transcript"], cfg.name)

    raise BackendUnreachable(
        f"{cfg.endpoint_url} unreachable for chunk {chunk.id} after "
        f"{cfg.max_retries + 1} attempts: {last_error}"
    )


def transcribe(chunk: Chunk, cfg: BackendConfig, session=None) -> Transcript:
    if cfg.kind is BackendKind.ORACLE:
        return _transcribe_oracle(chunk, cfg)
    return _transcribe_http(chunk, cfg, session)


def normalize_words(text: str) -> List[str]:
    """Lowercase, whitespace-split, strip surrounding punctuation, drop empties."""
    words = (w.strip(string.punctuation).lower() for w in text.split())
    return [w for w in words if w]


# alignment moves, listed in tie preference order
_MATCH, _SUB, _DEL, _INS = range(4)


def align_words(reference: Sequence[str], hypothesis: Sequence[str]) -> WrrReport:
    """Minimum edit alignment (unit costs); among optimal alignments keep the most hits.

    Once edit cost and hit count are fixed the substitution, deletion and
    insertion counts are determined, so the report does not depend on which
    of several equally good paths the backtrace follows.
    """
    n, m = len(reference), len(hypothesis)
    # score[i][j] = (edits, -hits) for reference[:i] vs hypothesis[:j]
    score = [[(0, 0)] * (m + 1) for _ in range(n + 1)]
    move = [[None] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        score[i][0] = (i, 0)
        move[i][0] = _DEL
    for j in range(1, m + 1):
        score[0][j] = (j, 0)
        move[0][j] = _INS
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            e, h = score[i - 1][j - 1]
            if reference[i - 1] == hypothesis[j - 1]:
                options = [((e, h - 1), _MATCH)]
            else:
                options = [((e + 1, h), _SUB)]
            e, h = score[i - 1][j]
            options.append(((e + 1, h), _DEL))
            e, h = score[i][j - 1]
            options.append(((e + 1, h), _INS))
            score[i][j], move[i][j] = min(options)

    hits = subs = dels = ins = 0
    i, j = n, m
    while i or j:
        mv = move[i][j]
        if mv == _MATCH:
            hits += 1
            i, j = i - 1, j - 1
        elif mv == _SUB:
            subs += 1
            i, j = i - 1, j - 1
        elif mv == _DEL:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WrrReport(n, hits, subs, dels, ins)


def compute_wrr(reference: str, hypothesis: str) -> WrrReport:
    return align_words(normalize_words(reference), normalize_words(hypothesis))


def pool_reports(reports: Sequence[WrrReport]) -> WrrReport:
    return WrrReport(
        sum(r.reference_word_count for r in reports),
        sum(r.hits for r in reports),
        sum(r.substitutions for r in reports),
        sum(r.deletions for r in reports),
        sum(r.insertions for r in reports),
    )


def evaluate_backend(chunks: Sequence[Chunk],
                     reference_transcripts: Union[Mapping[int, str], Sequence[str]],
                     cfg: BackendConfig) -> BackendEvaluation:
    """Transcribe every chunk and pool hit/word counts across the set."""
    if not chunks:
        raise EmptyEvaluation("no chunks to evaluate")
    if not isinstance(reference_transcripts, Mapping):
        if len(reference_transcripts) != len(chunks):
            raise ValueError("one reference transcript per chunk is required")
        reference_transcripts = {c.id: t for c, t in zip(chunks, reference_transcripts)}
    per_chunk = {}
    for chunk in chunks:
        if chunk.id not in reference_transcripts:
            raise KeyError(f"no reference transcript for chunk {chunk.id}")
        hyp = transcribe(chunk, cfg)
        per_chunk[chunk.id] = compute_wrr(reference_transcripts[chunk.id], hyp.text)
    return BackendEvaluation(per_chunk, pool_reports(list(per_chunk.values())))

