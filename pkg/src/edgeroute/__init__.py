"""Trace-driven quality/latency routing simulator for device-edge model serving.

Replays multi-turn workloads where each turn can be answered by a small
on-device model or a large edge model, routes per turn by fusing a
difficulty score with the estimated latency gap (including KV-cache
re-prefill paid on model switches), and sweeps the decision threshold to
map the quality / latency / edge-usage tradeoff.
"""

from .costs import (
    LatencyBreakdown,
    Model,
    SystemParams,
    TurnInput,
    comm_latency_edge,
    gen_latency,
    path_latencies,
    prefill_latency,
    realized_latency,
    router_latency,
)
from .errors import ConfigError, TraceParseError, TraceValidationError
from .evaluate import (
    RouterConfig,
    RunMetrics,
    SweepPoint,
    TurnResult,
    compare,
    replay,
    run,
    select_operating_point,
    sweep,
)
from .routing import (
    ConstantScoreProvider,
    RandomScoreProvider,
    RoutingDecision,
    ScoreProvider,
    TraceScoreProvider,
    decide,
    fuse,
    route_turn,
)
from .session import SessionState, advance, resolve_turn_input
from .workload import (
    PRESETS,
    Preset,
    SessionTrace,
    SynthSpec,
    TraceRecord,
    load_trace,
    synth_trace,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConstantScoreProvider",
    "LatencyBreakdown",
    "Model",
    "PRESETS",
    "Preset",
    "RandomScoreProvider",
    "RouterConfig",
    "RoutingDecision",
    "RunMetrics",
    "ScoreProvider",
    "SessionState",
    "SessionTrace",
    "SweepPoint",
    "SynthSpec",
    "SystemParams",
    "TraceParseError",
    "TraceRecord",
    "TraceScoreProvider",
    "TraceValidationError",
    "TurnInput",
    "TurnResult",
    "advance",
    "comm_latency_edge",
    "compare",
    "decide",
    "fuse",
    "gen_latency",
    "load_trace",
    "path_latencies",
    "prefill_latency",
    "realized_latency",
    "replay",
    "resolve_turn_input",
    "route_turn",
    "router_latency",
    "run",
    "select_operating_point",
    "sweep",
    "synth_trace",
    "write_trace",
]
