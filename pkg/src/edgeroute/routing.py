"""Per-turn routing: difficulty scores fused with the latency gap.

The router takes a semantic difficulty score in [0, 1], discounts it by
the estimated extra latency of going to the edge, and offloads only when
the discounted score still clears the threshold. Ties go to the device.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .costs import LatencyBreakdown, Model, SystemParams, TurnInput
from .errors import ConfigError
from .workload import TraceRecord


class ScoreProvider:
    """Source of the per-turn difficulty score.

    score() may use the turn's trace record or ignore it. reset() rewinds
    any internal state so the same instance can replay the same sequence;
    evaluation runs call it once at the start. Providers whose own
    processing is free (the random baseline) set zero_router_latency, and
    the evaluator then drops the router latency term from both paths.
    """

    zero_router_latency: bool = False

    def score(self, record: TraceRecord | None = None) -> float:
        raise NotImplementedError

    def reset(self) -> None:
        """Rewind internal state; stateless providers need not override."""


class TraceScoreProvider(ScoreProvider):
    """Replays the semantic_score recorded on each trace record."""

    def score(self, record: TraceRecord | None = None) -> float:
        if record is None:
            raise ConfigError("trace score provider needs a trace record")
        if record.semantic_score is None:
            raise ConfigError(
                f"record {record.session_id}:{record.turn_index} has no semantic_score"
                " (trace provider selected on a score-free trace)"
            )
        return record.semantic_score


class RandomScoreProvider(ScoreProvider):
    """Uniform scores on [0, 1), deterministic for a given seed.

    Models a router that guesses instead of reading the query, so its own
    processing time is zero regardless of the configured router rate.
    """

    zero_router_latency = True

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def score(self, record: TraceRecord | None = None) -> float:
        return self._rng.random()

    def reset(self) -> None:
        self._rng = random.Random(self.seed)


class ConstantScoreProvider(ScoreProvider):
    """A fixed score for every turn; handy for forcing decisions in tests."""

    def __init__(self, value: float):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"constant score must be in [0, 1], got {value}")
        self.value = value

    def score(self, record: TraceRecord | None = None) -> float:
        return self.value


@dataclass(frozen=True, slots=True)
class RoutingDecision:
    """One routing outcome with the quantities that produced it."""

    raw_score: float
    latency_gap: float
    fused_score: float
    choice: Model


def fuse(p: float, alpha: float, gap: float) -> float:
    """Discount a difficulty score by alpha times the edge-minus-device gap.

    The result is deliberately unclamped: strongly negative values mean
    the edge is not worth it at any reasonable threshold, values above 1
    mean the edge is faster outright.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"score must be in [0, 1], got {p}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not math.isfinite(gap):
        raise ValueError(f"latency gap must be finite, got {gap}")
    return p - alpha * gap


def decide(fused: float, theta: float) -> Model:
    """Offload exactly when the fused score strictly exceeds the threshold."""
    return Model.EDGE if fused > theta else Model.DEVICE


def route_turn(
    provider: ScoreProvider,
    params: SystemParams,
    turn: TurnInput,
    slm_cost: LatencyBreakdown,
    edge_cost: LatencyBreakdown,
    record: TraceRecord | None = None,
    theta: float | None = None,
) -> RoutingDecision:
    """Score one turn and pick a serving path from the estimated costs.

    theta overrides params.theta when given; sweep grids probe thresholds
    outside [0, 1], which the decision rule accepts.
    """
    raw = provider.score(record)
    gap = edge_cost.total - slm_cost.total
    fused = fuse(raw, params.alpha, gap)
    cutoff = params.theta if theta is None else theta
    return RoutingDecision(raw_score=raw, latency_gap=gap, fused_score=fused, choice=decide(fused, cutoff))
