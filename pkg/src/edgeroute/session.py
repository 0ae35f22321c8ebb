"""Multi-turn session tracking: whose KV cache is warm, and what a switch costs.

Context accumulates across turns (prompt plus the chosen response each
turn). The model that served the previous turn still holds that context
in its cache; the other model would have to re-ingest all of it before
answering. resolve_turn_input turns this state into the re-prefill
obligations the cost model prices.
"""

from __future__ import annotations

from dataclasses import dataclass

from .costs import Model, TurnInput
from .routing import RoutingDecision


@dataclass(frozen=True, slots=True)
class SessionState:
    """Accumulated context of one session and which model served last.

    context_aware selects what the router's cost estimate sees. When
    False, estimates are computed as if the turn were context-free (no
    accumulated context, no re-prefill); the realized latency of a replay
    is always charged from the true context-aware view regardless.
    """

    context_len: float = 0.0
    last_model: Model | None = None
    context_aware: bool = True

    def __post_init__(self) -> None:
        if self.context_len < 0:
            raise ValueError(f"context_len must be >= 0, got {self.context_len}")
        if self.last_model is None and self.context_len != 0:
            raise ValueError(
                f"fresh session (last_model=None) must have zero context, got {self.context_len}"
            )


def resolve_turn_input(
    state: SessionState,
    prompt_len: float,
    resp_len_slm: float,
    resp_len_edge: float,
) -> TurnInput:
    """Build the cost-model input for the next turn of this session.

    The stale side pays re-prefill of the full accumulated context: the
    device model re-ingests it when the edge served last, and vice versa.
    A fresh session owes nothing on either side. When the state is not
    context_aware the returned input is context-free (see SessionState).
    """
    if prompt_len < 0:
        raise ValueError(f"prompt_len must be >= 0, got {prompt_len}")
    if not state.context_aware:
        return TurnInput(
            prompt_len=prompt_len,
            context_len=0.0,
            reprefill_slm=0.0,
            reprefill_edge=0.0,
            resp_len_slm=resp_len_slm,
            resp_len_edge=resp_len_edge,
        )
    return TurnInput(
        prompt_len=prompt_len,
        context_len=state.context_len,
        reprefill_slm=state.context_len if state.last_model is Model.EDGE else 0.0,
        reprefill_edge=state.context_len if state.last_model is Model.DEVICE else 0.0,
        resp_len_slm=resp_len_slm,
        resp_len_edge=resp_len_edge,
    )


def advance(
    state: SessionState,
    prompt_len: float,
    decision: RoutingDecision,
    chosen_resp_len: float,
) -> SessionState:
    """Fold one served turn into the session state.

    The prompt and the chosen model's response join the context; the
    chosen model becomes the one with the warm cache.
    """
    return SessionState(
        context_len=state.context_len + prompt_len + chosen_resp_len,
        last_model=decision.choice,
        context_aware=state.context_aware,
    )
