"""Latency cost model for the two serving paths of a query turn.

Every turn can be answered by the small model on the device or by the
large model on the edge server. Both paths share the same structure,
prefill compute, link transfer, router overhead, and token generation,
and this module prices each component in seconds. Token counts are
real-valued on purpose: workload statistics such as mean response
lengths are fractional.

Thread safety: everything here is immutable value types and pure
functions, safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Model(str, Enum):
    """The two execution paths: small model on device, large model on edge."""

    DEVICE = "device"
    EDGE = "edge"


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True, slots=True)
class SystemParams:
    """Rates and link characteristics of one device/edge deployment.

    Attributes:
        gamma_s: device model compute time, seconds per token.
        gamma_e: edge model compute time, seconds per token.
        tau_r: router processing time, seconds per token of router input.
        bandwidth: wireless link throughput, tokens per second.
        overhead: fixed per-transmission link overhead, seconds.
        alpha: weight converting a latency gap in seconds into score units.
        theta: default decision threshold, in [0, 1]. Sweeps may probe
            thresholds outside this range; they pass the threshold to the
            decision step directly rather than through this field.

    Defaults describe a phone-class device model (25 tok/s), a GPU edge
    server (50 tok/s) and a fast local wireless link.
    """

    gamma_s: float = 0.04
    gamma_e: float = 0.02
    tau_r: float = 0.0
    bandwidth: float = 2.0e7
    overhead: float = 0.02
    alpha: float = 0.03
    theta: float = 0.5

    def __post_init__(self) -> None:
        for name in ("gamma_s", "gamma_e", "tau_r", "bandwidth", "overhead", "alpha", "theta"):
            _require_finite(name, getattr(self, name))
        if self.gamma_s <= 0:
            raise ValueError(f"gamma_s must be > 0, got {self.gamma_s}")
        if self.gamma_e <= 0:
            raise ValueError(f"gamma_e must be > 0, got {self.gamma_e}")
        if self.tau_r < 0:
            raise ValueError(f"tau_r must be >= 0, got {self.tau_r}")
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.overhead < 0:
            raise ValueError(f"overhead must be >= 0, got {self.overhead}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {self.theta}")


@dataclass(frozen=True, slots=True)
class TurnInput:
    """Everything the cost model needs to price one turn.

    reprefill_slm / reprefill_edge are the context tokens the respective
    model would have to re-ingest because its KV cache is stale (it was
    not the model that served the previous turn). At most one of them is
    nonzero for states produced by session tracking, and each is bounded
    by the accumulated context length.
    """

    prompt_len: float
    context_len: float = 0.0
    reprefill_slm: float = 0.0
    reprefill_edge: float = 0.0
    resp_len_slm: float = 0.0
    resp_len_edge: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "prompt_len",
            "context_len",
            "reprefill_slm",
            "reprefill_edge",
            "resp_len_slm",
            "resp_len_edge",
        ):
            value = getattr(self, name)
            _require_finite(name, value)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        if self.reprefill_slm > self.context_len:
            raise ValueError(
                f"reprefill_slm ({self.reprefill_slm}) exceeds context_len ({self.context_len})"
            )
        if self.reprefill_edge > self.context_len:
            raise ValueError(
                f"reprefill_edge ({self.reprefill_edge}) exceeds context_len ({self.context_len})"
            )


@dataclass(frozen=True, slots=True)
class LatencyBreakdown:
    """Per-component latency of one serving path, in seconds."""

    comp: float
    comm: float
    router: float
    gen: float
    total: float

    def __post_init__(self) -> None:
        for name in ("comp", "comm", "router", "gen", "total"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        parts = self.comp + self.comm + self.router + self.gen
        if abs(self.total - parts) > 1e-12 * max(1.0, abs(parts)):
            raise ValueError(f"total {self.total} does not equal component sum {parts}")

    @classmethod
    def from_components(cls, comp: float, comm: float, router: float, gen: float) -> "LatencyBreakdown":
        return cls(comp=comp, comm=comm, router=router, gen=gen, total=comp + comm + router + gen)


def _require_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise ValueError(f"{name} must be >= 0, got {value}")


def prefill_latency(gamma_k: float, reprefill: float, prompt_len: float) -> float:
    """Compute time to ingest the stale context plus the new prompt."""
    _require_nonnegative(gamma_k=gamma_k, reprefill=reprefill, prompt_len=prompt_len)
    return gamma_k * (reprefill + prompt_len)


def comm_latency_edge(
    upload_tokens: float, resp_len_edge: float, bandwidth: float, overhead: float
) -> float:
    """Link time for the edge path: upload, fixed overhead, response download.

    The overhead is charged whenever the edge path is taken, even for a
    turn with no tokens in either direction.
    """
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    _require_nonnegative(upload_tokens=upload_tokens, resp_len_edge=resp_len_edge, overhead=overhead)
    return upload_tokens / bandwidth + overhead + resp_len_edge / bandwidth


def router_latency(tau_r: float, context_len: float, prompt_len: float) -> float:
    """Time the scoring model spends reading the dialogue so far plus the prompt."""
    _require_nonnegative(tau_r=tau_r, context_len=context_len, prompt_len=prompt_len)
    return tau_r * (context_len + prompt_len)


def gen_latency(gamma_k: float, resp_len: float) -> float:
    """Autoregressive decode time for a response of the given length."""
    _require_nonnegative(gamma_k=gamma_k, resp_len=resp_len)
    return gamma_k * resp_len


def path_latencies(params: SystemParams, turn: TurnInput) -> tuple[LatencyBreakdown, LatencyBreakdown]:
    """Price both serving paths for one turn.

    Returns (device, edge) breakdowns. The device path never touches the
    link, so its comm component is exactly zero. The edge upload carries
    only what the edge is missing: its stale context plus the new prompt.
    """
    router = router_latency(params.tau_r, turn.context_len, turn.prompt_len)
    slm = LatencyBreakdown.from_components(
        comp=prefill_latency(params.gamma_s, turn.reprefill_slm, turn.prompt_len),
        comm=0.0,
        router=router,
        gen=gen_latency(params.gamma_s, turn.resp_len_slm),
    )
    upload = turn.reprefill_edge + turn.prompt_len
    edge = LatencyBreakdown.from_components(
        comp=prefill_latency(params.gamma_e, turn.reprefill_edge, turn.prompt_len),
        comm=comm_latency_edge(upload, turn.resp_len_edge, params.bandwidth, params.overhead),
        router=router,
        gen=gen_latency(params.gamma_e, turn.resp_len_edge),
    )
    return slm, edge


def realized_latency(choice: Model, slm: LatencyBreakdown, edge: LatencyBreakdown) -> float:
    """Latency actually paid for the turn given the routing choice."""
    if choice is Model.DEVICE:
        return slm.total
    if choice is Model.EDGE:
        return edge.total
    raise ValueError(f"choice must be a Model, got {choice!r}")
