"""Trace loading, validation, and synthetic workload generation.

Traces are JSON Lines files, one record per turn:

    {"session_id": "s0", "turn_index": 0, "prompt_len": 41.0,
     "semantic_score": 0.73, "slm_resp_len": 120.0, "edge_resp_len": 410.0,
     "slm_quality": 0.0, "edge_quality": 1.0}

Records are counterfactual: both the device response and the edge
response are present for every turn, so a replay can charge whichever
path the router picks. semantic_score is optional (omitted when a trace
carries no difficulty estimates). Qualities are 1/0 for correctness
benchmarks and 0-10 scores for judged multi-turn chat.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable

from .errors import TraceParseError, TraceValidationError

_RECORD_FIELDS = (
    "session_id",
    "turn_index",
    "prompt_len",
    "slm_resp_len",
    "edge_resp_len",
    "slm_quality",
    "edge_quality",
    "semantic_score",
)


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One turn of one session, with both serving outcomes recorded."""

    session_id: str
    turn_index: int
    prompt_len: float
    slm_resp_len: float
    edge_resp_len: float
    slm_quality: float
    edge_quality: float
    semantic_score: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.session_id, str) or not self.session_id:
            raise ValueError(f"session_id must be a non-empty string, got {self.session_id!r}")
        if not isinstance(self.turn_index, int) or isinstance(self.turn_index, bool):
            raise ValueError(f"turn_index must be an integer, got {self.turn_index!r}")
        if self.turn_index < 0:
            raise ValueError(f"turn_index must be >= 0, got {self.turn_index}")
        for name in ("prompt_len", "slm_resp_len", "edge_resp_len"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        for name in ("slm_quality", "edge_quality"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.semantic_score is not None:
            score = self.semantic_score
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise ValueError(f"semantic_score must be a number or null, got {score!r}")
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"semantic_score must be in [0, 1], got {score}")


@dataclass(frozen=True, slots=True)
class SessionTrace:
    """The turns of one session, ordered by turn_index starting at 0."""

    session_id: str
    records: tuple[TraceRecord, ...]

    def __post_init__(self) -> None:
        if not self.records:
            raise TraceValidationError(f"session {self.session_id} has no records")
        for record in self.records:
            if record.session_id != self.session_id:
                raise TraceValidationError(
                    f"record {record.session_id}:{record.turn_index} grouped under"
                    f" session {self.session_id}"
                )
        indices = [record.turn_index for record in self.records]
        if indices != list(range(len(indices))):
            raise TraceValidationError(
                f"non-contiguous turn_index in session {self.session_id}: {indices}"
            )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _record_from_dict(raw: dict, where: str) -> TraceRecord:
    unknown = set(raw) - set(_RECORD_FIELDS)
    if unknown:
        raise TraceParseError(f"{where}: unknown fields {sorted(unknown)}")
    missing = [
        name for name in _RECORD_FIELDS if name != "semantic_score" and name not in raw
    ]
    if missing:
        raise TraceParseError(f"{where}: missing fields {missing}")
    try:
        return TraceRecord(
            session_id=raw["session_id"],
            turn_index=raw["turn_index"],
            prompt_len=raw["prompt_len"],
            slm_resp_len=raw["slm_resp_len"],
            edge_resp_len=raw["edge_resp_len"],
            slm_quality=raw["slm_quality"],
            edge_quality=raw["edge_quality"],
            semantic_score=raw.get("semantic_score"),
        )
    except ValueError as exc:
        raise TraceValidationError(f"{where}: {exc}") from exc


def load_trace(path: str | Path) -> list[SessionTrace]:
    """Parse and validate a JSONL trace file.

    Records are grouped by session_id (sessions keep file order of first
    appearance) and ordered by turn_index within each session. An empty
    file yields an empty list.

    Raises:
        TraceParseError: a line is not a JSON object or has wrong fields.
        TraceValidationError: field values or session structure invalid.
        OSError: the file cannot be read.
    """
    path = Path(path)
    by_session: dict[str, list[TraceRecord]] = {}
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(raw, dict):
                raise TraceParseError(f"{where}: expected a JSON object, got {type(raw).__name__}")
            record = _record_from_dict(raw, where)
            by_session.setdefault(record.session_id, []).append(record)
    sessions = []
    for session_id, records in by_session.items():
        records.sort(key=lambda record: record.turn_index)
        indices = [record.turn_index for record in records]
        if indices != list(range(len(records))):
            raise TraceValidationError(
                f"non-contiguous turn_index in session {session_id}: {sorted(set(indices))}"
            )
        sessions.append(SessionTrace(session_id=session_id, records=tuple(records)))
    return sessions


def write_trace(sessions: Iterable[SessionTrace], path: str | Path) -> None:
    """Serialize sessions to JSONL, inverse of load_trace.

    The semantic_score key is omitted for records that carry no score.
    """
    path = Path(path)
    lines = []
    for session in sessions:
        for record in session.records:
            raw = {}
            for field in fields(TraceRecord):
                value = getattr(record, field.name)
                if field.name == "semantic_score" and value is None:
                    continue
                raw[field.name] = value
            lines.append(json.dumps(raw, separators=(",", ":")))
    text = "".join(line + "\n" for line in lines)
    path.write_text(text, encoding="utf-8")


@dataclass(frozen=True, slots=True)
class SynthSpec:
    """Targets for synthetic trace generation.

    Qualities are drawn by quota: exactly round(n * acc) of the n records
    get a passing quality, so the trace-wide mean hits the target up to
    rounding no matter the seed. quality_scale maps the pass/fail values
    {0, 1} onto {0, quality_scale} for judged 0-10 style benchmarks.

    score_correlation controls how informative semantic_score is. At 1.0
    the score exceeds 0.5 exactly on records where the edge answer is
    strictly better than the device answer; at 0.0 scores are uniform on
    [0, 1] independent of quality; in between, each record mixes the two
    generators with that probability.
    """

    n_records: int
    slm_acc: float
    edge_acc: float
    slm_resp_len: float
    edge_resp_len: float
    prompt_len_mean: float
    score_correlation: float
    seed: int
    quality_scale: float = 1.0
    turns_per_session: int = 1

    def __post_init__(self) -> None:
        if self.n_records <= 0:
            raise ValueError(f"n_records must be > 0, got {self.n_records}")
        for name in ("slm_acc", "edge_acc", "score_correlation"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        for name in ("slm_resp_len", "edge_resp_len", "prompt_len_mean"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not math.isfinite(self.quality_scale) or self.quality_scale <= 0:
            raise ValueError(f"quality_scale must be > 0, got {self.quality_scale}")
        if self.turns_per_session < 1:
            raise ValueError(f"turns_per_session must be >= 1, got {self.turns_per_session}")


def _quota_flags(n: int, fraction: float, rng: random.Random) -> list[bool]:
    # Exact-count sampling: the population has round(n * fraction) passes,
    # shuffled so pass/fail positions stay random.
    passes = int(round(n * fraction))
    flags = [True] * passes + [False] * (n - passes)
    rng.shuffle(flags)
    return flags


def synth_trace(spec: SynthSpec) -> list[SessionTrace]:
    """Generate a synthetic counterfactual trace meeting the requested targets.

    Deterministic for a given spec (including seed). Records are chunked
    into sessions of spec.turns_per_session consecutive turns; the last
    session may be shorter.
    """
    rng = random.Random(spec.seed)
    n = spec.n_records
    slm_pass = _quota_flags(n, spec.slm_acc, rng)
    edge_pass = _quota_flags(n, spec.edge_acc, rng)

    records = []
    for i in range(n):
        session_index, turn_index = divmod(i, spec.turns_per_session)
        slm_quality = spec.quality_scale if slm_pass[i] else 0.0
        edge_quality = spec.quality_scale if edge_pass[i] else 0.0
        if spec.prompt_len_mean > 0:
            prompt_len = rng.uniform(0.5 * spec.prompt_len_mean, 1.5 * spec.prompt_len_mean)
        else:
            prompt_len = 0.0
        if rng.random() < spec.score_correlation:
            # Ideal discriminator: above 0.5 exactly where offloading helps.
            if edge_quality > slm_quality:
                score = 1.0 - 0.5 * rng.random()
            else:
                score = 0.5 * rng.random()
        else:
            score = rng.random()
        records.append(
            TraceRecord(
                session_id=f"s{session_index:05d}",
                turn_index=turn_index,
                prompt_len=prompt_len,
                slm_resp_len=spec.slm_resp_len,
                edge_resp_len=spec.edge_resp_len,
                slm_quality=slm_quality,
                edge_quality=edge_quality,
                semantic_score=score,
            )
        )

    sessions = []
    for start in range(0, n, spec.turns_per_session):
        chunk = tuple(records[start : start + spec.turns_per_session])
        sessions.append(SessionTrace(session_id=chunk[0].session_id, records=chunk))
    return sessions


@dataclass(frozen=True, slots=True)
class Preset:
    """A named benchmark workload: synthesis targets plus the fusion weight
    that benchmark is normally evaluated with."""

    name: str
    synth: SynthSpec
    alpha: float


PRESETS: dict[str, Preset] = {
    "mmlu": Preset(
        name="mmlu",
        synth=SynthSpec(
            n_records=10000,
            slm_acc=0.6579,
            edge_acc=0.8524,
            slm_resp_len=1254.4,
            edge_resp_len=4567.9,
            prompt_len_mean=100.0,
            score_correlation=0.9,
            seed=7,
        ),
        alpha=0.03,
    ),
    "gsm8k": Preset(
        name="gsm8k",
        synth=SynthSpec(
            n_records=10000,
            slm_acc=0.7309,
            edge_acc=0.8901,
            slm_resp_len=136.3,
            edge_resp_len=460.1,
            prompt_len_mean=60.0,
            score_correlation=0.3,
            seed=7,
        ),
        alpha=0.05,
    ),
    "mtbench": Preset(
        name="mtbench",
        synth=SynthSpec(
            n_records=10000,
            slm_acc=0.929,
            edge_acc=0.978,
            slm_resp_len=226.37,
            edge_resp_len=879.16,
            prompt_len_mean=50.0,
            score_correlation=0.8,
            seed=7,
            quality_scale=10.0,
            turns_per_session=3,
        ),
        alpha=0.03,
    ),
}
