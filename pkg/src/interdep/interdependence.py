"""Classifying actions and extracting interdependent pairs from a trace.

An action is a trigger when it adds a shared fluent some subtask consumes
as a precondition, an accept when its precondition can be produced by some
subtask, and independent otherwise. A pair links a giver's add effect to
the receiver's precondition across agents, provided the proposition
survived untouched in between.

Matching runs on a provenance map: every currently true shared proposition
points at the action that most recently added it (or at the environment
for initial-state facts). Acceptance reads the map, deletion clears it,
addition overwrites it, so freshness is structural rather than re-checked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .errors import EmptySchema, ReplayMismatch, SchemaMismatch
from .grounding import (
    SHARED_PREDICATES,
    SUBTASK_TEMPLATES,
    Proposition,
    SymbolicAction,
    extract_symbolic_action,
    ground_state,
    sort_props,
)
from .gridworld import (
    INTERACT_SUBTASKS,
    EpisodeConfig,
    initial_state,
    is_terminal,
    load_layout,
    single_action,
    step,
)

if TYPE_CHECKING:  # pragma: no cover
    from .trace_io import ReplayableTrace

TRIGGER = "Trigger"
ACCEPT = "Accept"


@dataclass(frozen=True)
class InteractionSchema:
    """Which shared predicates can link one cook's action to the other's."""

    trigger_fluents: frozenset
    accept_fluents: frozenset
    include_counter_empty: bool = True

    def to_dict(self) -> dict:
        return {
            "trigger_fluents": sorted(self.trigger_fluents),
            "accept_fluents": sorted(self.accept_fluents),
            "include_counter_empty": self.include_counter_empty,
        }


def build_interaction_schema(
    subtask_templates: Optional[dict] = None, include_counter_empty: bool = True
) -> InteractionSchema:
    """Derive the linkable-fluent sets from the subtask templates.

    A predicate is a trigger fluent when some subtask adds it and some
    subtask requires it, and an accept fluent symmetrically. Only shared
    predicates qualify; held items and the delivery tally cannot link the
    two cooks. counter-empty participates only when the flag is on.
    """
    templates = SUBTASK_TEMPLATES if subtask_templates is None else subtask_templates
    trigger: set = set()
    accept: set = set()
    for u, v in itertools.product(templates.values(), repeat=2):
        overlap = (u["add"] & v["pre"]) & SHARED_PREDICATES
        trigger |= overlap
        accept |= overlap
    if not include_counter_empty:
        trigger.discard("counter-empty")
        accept.discard("counter-empty")
    if not trigger and not accept:
        raise EmptySchema("no shared fluent is both produced and required")
    return InteractionSchema(
        trigger_fluents=frozenset(trigger),
        accept_fluents=frozenset(accept),
        include_counter_empty=include_counter_empty,
    )


@dataclass(frozen=True)
class ActionClassification:
    """Independent/Coordination verdict with trigger/accept roles."""

    action: SymbolicAction
    is_trigger: bool
    is_accept: bool

    @property
    def roles(self) -> frozenset:
        out = set()
        if self.is_trigger:
            out.add(TRIGGER)
        if self.is_accept:
            out.add(ACCEPT)
        return frozenset(out)

    @property
    def independent(self) -> bool:
        return not (self.is_trigger or self.is_accept)

    @property
    def klass(self) -> str:
        return "Independent" if self.independent else "Coordination"


def classify_action(
    action: SymbolicAction, schema: InteractionSchema
) -> ActionClassification:
    is_trigger = any(
        p.shared and p.predicate in schema.trigger_fluents for p in action.add
    )
    is_accept = any(
        p.shared and p.predicate in schema.accept_fluents for p in action.pre
    )
    return ActionClassification(action=action, is_trigger=is_trigger, is_accept=is_accept)


@dataclass(frozen=True)
class ActionRef:
    """Lightweight handle on one step of the trace."""

    agent: int
    t: int
    subtask: str

    def to_dict(self) -> dict:
        return {"agent": self.agent, "t": self.t, "subtask": self.subtask}


@dataclass(frozen=True)
class InterdependentPair:
    """A giver's add effect consumed as the receiver's precondition."""

    prop: Proposition
    giver: ActionRef
    receiver: ActionRef

    def to_dict(self) -> dict:
        return {
            "prop": self.prop.canonical(),
            "giver": self.giver.to_dict(),
            "receiver": self.receiver.to_dict(),
        }


@dataclass(frozen=True)
class SelfAcceptance:
    """An agent consuming a precondition it itself established."""

    agent: int
    trigger_t: int
    accept_t: int
    prop: Proposition

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "trigger_t": self.trigger_t,
            "accept_t": self.accept_t,
            "prop": self.prop.canonical(),
        }


@dataclass
class InterdependencyLedger:
    """Everything the analysis extracted from one episode."""

    schema: InteractionSchema
    config: EpisodeConfig
    classifications: tuple = ()
    pairs: tuple = ()
    self_accepts: tuple = ()
    unaccepted_triggers: dict = field(default_factory=dict)
    episode_time: int = 0
    soups_delivered: int = 0
    timed_out: bool = False

    def agent_classifications(self, agent: int) -> tuple:
        return tuple(c for c in self.classifications if c.action.agent == agent)

    def givers(self, agent: int) -> tuple:
        return tuple(p for p in self.pairs if p.giver.agent == agent)

    def receivers(self, agent: int) -> tuple:
        return tuple(p for p in self.pairs if p.receiver.agent == agent)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "config": self.config.to_dict(),
            "episode": {
                "time": self.episode_time,
                "soups_delivered": self.soups_delivered,
                "timed_out": self.timed_out,
            },
            "classifications": [
                {
                    "t": c.action.t,
                    "agent": c.action.agent,
                    "subtask": c.action.subtask,
                    "klass": c.klass,
                    "roles": sorted(c.roles),
                }
                for c in self.classifications
            ],
            "pairs": [p.to_dict() for p in self.pairs],
            "self_accepts": [s.to_dict() for s in self.self_accepts],
            "unaccepted_triggers": {
                str(agent): [r.to_dict() for r in refs]
                for agent, refs in sorted(self.unaccepted_triggers.items())
            },
        }


def _check_schema(schema: InteractionSchema) -> None:
    alien = (schema.trigger_fluents | schema.accept_fluents) - SHARED_PREDICATES
    if alien:
        raise SchemaMismatch(
            f"schema references predicates outside the shared vocabulary: "
            f"{sorted(alien)}"
        )


def analyze_trace(
    trace: "ReplayableTrace", schema: Optional[InteractionSchema] = None
) -> InterdependencyLedger:
    """Replay a trace and extract classifications, pairs and self-accepts.

    The trace is replayed deterministically from its embedded layout and
    config; turn order must be round-robin starting with agent 1, and steps
    must not continue past the terminal state or horizon.
    """
    if schema is None:
        schema = build_interaction_schema()
    _check_schema(schema)

    layout = load_layout(trace.layout_text)
    state = initial_state(layout, trace.config)

    provenance: dict = {}
    for p in ground_state(state):
        if p.shared:
            provenance[p] = None  # environment provenance

    classifications: list = []
    pairs: list = []
    self_accepts: list = []
    matched_givers: set = set()  # (agent, t) of actions matched as giver

    for idx, (t, agent, action) in enumerate(trace.steps):
        if t != idx:
            raise ReplayMismatch(f"step {idx}: timestep {t} breaks the 0..n sequence")
        expected = 1 + (idx % 2)
        if agent != expected:
            raise ReplayMismatch(
                f"step {idx}: agent {agent} acted, round-robin expects {expected}"
            )
        if is_terminal(state):
            raise ReplayMismatch(f"step {idx}: trace continues past the terminal state")

        sym = extract_symbolic_action(state, action, agent)
        cls = classify_action(sym, schema)
        classifications.append(cls)
        ref = ActionRef(agent=agent, t=t, subtask=sym.subtask)

        for p in sort_props(sym.pre):
            if not p.shared or p.predicate not in schema.accept_fluents:
                continue
            src = provenance.get(p)
            if src is None:
                continue
            if src.agent != agent:
                pairs.append(InterdependentPair(prop=p, giver=src, receiver=ref))
                matched_givers.add((src.agent, src.t))
            else:
                self_accepts.append(
                    SelfAcceptance(agent=agent, trigger_t=src.t, accept_t=t, prop=p)
                )
        for p in sym.delete:
            if p.shared:
                provenance.pop(p, None)
        for p in sym.add:
            if p.shared:
                provenance[p] = ref

        state, _, _ = step(state, single_action(agent, action))

    unaccepted: dict = {1: [], 2: []}
    for cls in classifications:
        a = cls.action
        if cls.is_trigger and (a.agent, a.t) not in matched_givers:
            unaccepted[a.agent].append(ActionRef(a.agent, a.t, a.subtask))

    return InterdependencyLedger(
        schema=schema,
        config=trace.config,
        classifications=tuple(classifications),
        pairs=tuple(pairs),
        self_accepts=tuple(self_accepts),
        unaccepted_triggers={k: tuple(v) for k, v in unaccepted.items()},
        episode_time=state.t,
        soups_delivered=state.soups_delivered,
        timed_out=state.soups_delivered < trace.config.target_soups,
    )


def interact_action_count(ledger: InterdependencyLedger, agent: int) -> int:
    """Number of the agent's actions that resolved to an interact subtask."""
    return sum(
        1
        for c in ledger.classifications
        if c.action.agent == agent and c.action.subtask in INTERACT_SUBTASKS
    )
