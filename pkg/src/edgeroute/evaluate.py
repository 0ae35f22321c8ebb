"""Trace replay and threshold sweeps.

run() replays a trace once: each turn is scored, routed on the estimated
path costs, charged the realized latency of the chosen path, and folded
into its session's context. sweep() repeats that over a threshold grid,
resetting the score provider per point so only the threshold varies.
compare() sweeps several labeled router configurations over one grid.

Sessions are replayed serially in trace order. They are independent
units of work, but the random score provider draws one value per turn in
trace order, so a parallel schedule would change its stream; serial
execution keeps every run bit-reproducible.

A note on bounds: a run's avg_latency lies between the all-device and
all-edge averages only when switching is free. With context re-prefill,
a run that switches often can cost more than either extreme, so no such
bound is asserted anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .costs import (
    LatencyBreakdown,
    Model,
    SystemParams,
    TurnInput,
    path_latencies,
    realized_latency,
)
from .errors import ConfigError
from .routing import RoutingDecision, ScoreProvider, route_turn
from .session import SessionState, advance, resolve_turn_input
from .workload import SessionTrace, TraceRecord


@dataclass(frozen=True, slots=True)
class TurnResult:
    """One replayed turn: the decision and what it actually cost."""

    record: TraceRecord
    turn: TurnInput
    decision: RoutingDecision
    slm_cost: LatencyBreakdown
    edge_cost: LatencyBreakdown
    latency: float
    quality: float
    switched: bool


@dataclass(frozen=True, slots=True)
class RunMetrics:
    """Aggregates of one replay. Means are None for an empty trace."""

    avg_latency: float | None
    avg_quality: float | None
    llm_usage: float | None
    switch_count: int
    turn_count: int


@dataclass(frozen=True, slots=True)
class SweepPoint:
    theta: float
    metrics: RunMetrics


@dataclass(frozen=True, slots=True)
class RouterConfig:
    """A labeled router setup for compare()."""

    label: str
    provider: ScoreProvider
    context_aware: bool = True


def replay(
    trace: list[SessionTrace],
    params: SystemParams,
    provider: ScoreProvider,
    *,
    context_aware: bool = True,
    theta: float | None = None,
) -> list[TurnResult]:
    """Replay every session turn by turn; the per-turn record of run().

    The returned TurnResult.turn is always the context-aware view, which
    is what the realized latency is charged from; with context_aware
    False only the router's estimate is blinded to context.
    """
    provider.reset()
    effective = replace(params, tau_r=0.0) if provider.zero_router_latency else params
    results = []
    for session in trace:
        state = SessionState(context_aware=context_aware)
        for record in session.records:
            estimate = resolve_turn_input(
                state, record.prompt_len, record.slm_resp_len, record.edge_resp_len
            )
            if context_aware:
                physical = estimate
            else:
                physical = resolve_turn_input(
                    replace(state, context_aware=True),
                    record.prompt_len,
                    record.slm_resp_len,
                    record.edge_resp_len,
                )
            est_slm, est_edge = path_latencies(effective, estimate)
            decision = route_turn(
                provider, effective, estimate, est_slm, est_edge, record=record, theta=theta
            )
            if context_aware:
                phys_slm, phys_edge = est_slm, est_edge
            else:
                phys_slm, phys_edge = path_latencies(effective, physical)
            chose_edge = decision.choice is Model.EDGE
            results.append(
                TurnResult(
                    record=record,
                    turn=physical,
                    decision=decision,
                    slm_cost=phys_slm,
                    edge_cost=phys_edge,
                    latency=realized_latency(decision.choice, phys_slm, phys_edge),
                    quality=record.edge_quality if chose_edge else record.slm_quality,
                    switched=state.last_model is not None and state.last_model is not decision.choice,
                )
            )
            state = advance(
                state,
                record.prompt_len,
                decision,
                record.edge_resp_len if chose_edge else record.slm_resp_len,
            )
    return results


def run(
    trace: list[SessionTrace],
    params: SystemParams,
    provider: ScoreProvider,
    *,
    context_aware: bool = True,
    theta: float | None = None,
) -> RunMetrics:
    """Replay a trace and aggregate. Deterministic for fixed inputs and seed.

    theta overrides params.theta for the decision rule only, and may lie
    outside [0, 1] (sweep grids probe extreme thresholds).
    """
    results = replay(trace, params, provider, context_aware=context_aware, theta=theta)
    count = len(results)
    if count == 0:
        return RunMetrics(
            avg_latency=None, avg_quality=None, llm_usage=None, switch_count=0, turn_count=0
        )
    edge_turns = sum(1 for result in results if result.decision.choice is Model.EDGE)
    return RunMetrics(
        avg_latency=sum(result.latency for result in results) / count,
        avg_quality=sum(result.quality for result in results) / count,
        llm_usage=edge_turns / count,
        switch_count=sum(1 for result in results if result.switched),
        turn_count=count,
    )


def sweep(
    trace: list[SessionTrace],
    params: SystemParams,
    provider: ScoreProvider,
    thetas: list[float],
    *,
    context_aware: bool = True,
) -> list[SweepPoint]:
    """run() once per threshold, ascending; same trace and seed at every point."""
    if not thetas:
        raise ConfigError("sweep needs at least one theta")
    return [
        SweepPoint(theta=theta, metrics=run(trace, params, provider, context_aware=context_aware, theta=theta))
        for theta in sorted(thetas)
    ]


def compare(
    trace: list[SessionTrace],
    params: SystemParams,
    configs: list[RouterConfig],
    thetas: list[float],
) -> dict[str, list[SweepPoint]]:
    """Sweep each labeled configuration over the same grid.

    Labels key the result and must be unique.
    """
    labels = [config.label for config in configs]
    if len(set(labels)) != len(labels):
        dupes = sorted({label for label in labels if labels.count(label) > 1})
        raise ConfigError(f"duplicate compare labels: {dupes}")
    if not configs:
        raise ConfigError("compare needs at least one configuration")
    return {
        config.label: sweep(
            trace, params, config.provider, thetas, context_aware=config.context_aware
        )
        for config in configs
    }


def select_operating_point(
    points: list[SweepPoint],
    min_quality: float,
    objective: str = "latency",
) -> SweepPoint | None:
    """Cheapest sweep point whose quality meets a floor.

    objective is "latency" (minimize avg_latency) or "usage" (minimize
    llm_usage). Returns None when no point reaches min_quality. Ties keep
    the lowest-theta point.
    """
    if objective not in ("latency", "usage"):
        raise ValueError(f"objective must be 'latency' or 'usage', got {objective!r}")
    eligible = [
        point
        for point in points
        if point.metrics.avg_quality is not None and point.metrics.avg_quality >= min_quality
    ]
    if not eligible:
        return None
    if objective == "latency":
        return min(eligible, key=lambda point: point.metrics.avg_latency)
    return min(eligible, key=lambda point: point.metrics.llm_usage)
