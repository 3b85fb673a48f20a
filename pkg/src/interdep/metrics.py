"""Team-level and per-agent cooperation metrics from an analysis ledger.

All rates are fractions in [0, 1]; ratios that would divide by zero are
surfaced as None (undefined) with the raw counts kept alongside, never as
a 0 or infinity stand-in. The interdependence share counts pair
participations (giver side plus receiver side) over a configurable action
denominator.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigMismatch, EmptyTrace
from .gridworld import ALL_SUBTASKS, INTERACT_SUBTASKS, EpisodeConfig
from .interdependence import InterdependencyLedger

DENOMINATOR_MODES = ("subtask-actions", "all-actions")


@dataclass(frozen=True)
class AgentReport:
    """One cook's tallies and rates for a single episode."""

    agent: int
    total_actions: int
    subtask_actions: int
    independent: int
    coordination: int
    triggers: int
    accepts: int
    trigger_accept_overlap: int
    giver_count: int
    receiver_count: int
    contribution_ratio: Optional[float]
    trigger_share_of_coordination: Optional[float]
    trigger_acceptance_rate: Optional[float]
    self_accept_count: int
    unaccepted_triggers: int
    event_distribution: dict

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "total_actions": self.total_actions,
            "subtask_actions": self.subtask_actions,
            "independent": self.independent,
            "coordination": self.coordination,
            "triggers": self.triggers,
            "accepts": self.accepts,
            "trigger_accept_overlap": self.trigger_accept_overlap,
            "giver_count": self.giver_count,
            "receiver_count": self.receiver_count,
            "contribution_ratio": self.contribution_ratio,
            "trigger_share_of_coordination": self.trigger_share_of_coordination,
            "trigger_acceptance_rate": self.trigger_acceptance_rate,
            "self_accept_count": self.self_accept_count,
            "unaccepted_triggers": self.unaccepted_triggers,
            "event_distribution": dict(sorted(self.event_distribution.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentReport":
        return cls(
            agent=d["agent"],
            total_actions=d["total_actions"],
            subtask_actions=d["subtask_actions"],
            independent=d["independent"],
            coordination=d["coordination"],
            triggers=d["triggers"],
            accepts=d["accepts"],
            trigger_accept_overlap=d["trigger_accept_overlap"],
            giver_count=d["giver_count"],
            receiver_count=d["receiver_count"],
            contribution_ratio=d["contribution_ratio"],
            trigger_share_of_coordination=d["trigger_share_of_coordination"],
            trigger_acceptance_rate=d["trigger_acceptance_rate"],
            self_accept_count=d["self_accept_count"],
            unaccepted_triggers=d["unaccepted_triggers"],
            event_distribution=dict(d["event_distribution"]),
        )


@dataclass(frozen=True)
class TeamReport:
    """Per-episode cooperation report for the two-cook team."""

    label: str
    episode_time: int
    timed_out: bool
    soups_delivered: int
    percent_interdependent: float
    denominator_mode: str
    denominator: int
    pair_count: int
    pairs_by_predicate: dict
    include_counter_empty: bool
    config: EpisodeConfig
    agents: tuple

    def agent(self, agent_id: int) -> AgentReport:
        return self.agents[agent_id - 1]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "episode_time": self.episode_time,
            "timed_out": self.timed_out,
            "soups_delivered": self.soups_delivered,
            "percent_interdependent": self.percent_interdependent,
            "denominator_mode": self.denominator_mode,
            "denominator": self.denominator,
            "pair_count": self.pair_count,
            "pairs_by_predicate": dict(sorted(self.pairs_by_predicate.items())),
            "include_counter_empty": self.include_counter_empty,
            "config": self.config.to_dict(),
            "agents": [a.to_dict() for a in self.agents],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TeamReport":
        return cls(
            label=d["label"],
            episode_time=d["episode_time"],
            timed_out=d["timed_out"],
            soups_delivered=d["soups_delivered"],
            percent_interdependent=d["percent_interdependent"],
            denominator_mode=d["denominator_mode"],
            denominator=d["denominator"],
            pair_count=d["pair_count"],
            pairs_by_predicate=dict(d["pairs_by_predicate"]),
            include_counter_empty=d["include_counter_empty"],
            config=EpisodeConfig.from_dict(d["config"]),
            agents=tuple(AgentReport.from_dict(a) for a in d["agents"]),
        )


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def _denominator(ledger: InterdependencyLedger, mode: str) -> int:
    if mode not in DENOMINATOR_MODES:
        raise ValueError(f"unknown denominator mode {mode!r}")
    if mode == "all-actions":
        return len(ledger.classifications)
    return sum(
        1
        for c in ledger.classifications
        if c.action.subtask in INTERACT_SUBTASKS
    )


def percent_interdependent(
    ledger: InterdependencyLedger, mode: str = "subtask-actions"
) -> float:
    """Pair participations over the action denominator, as a fraction.

    Each pair contributes two participations (its giver side and its
    receiver side). The default denominator counts only actions that
    resolved to an interact subtask; all-actions includes movement and
    no-ops.
    """
    den = _denominator(ledger, mode)
    if den == 0:
        raise EmptyTrace(f"denominator is zero in mode {mode!r}")
    participations = 2 * len(ledger.pairs)
    return participations / den


def contribution_ratio(
    ledger: InterdependencyLedger, agent: int
) -> tuple[Optional[float], int, int]:
    """(giver/receiver ratio or None, giver count, receiver count)."""
    g = len(ledger.givers(agent))
    r = len(ledger.receivers(agent))
    return _ratio(g, r), g, r


def trigger_stats(
    ledger: InterdependencyLedger, agent: int
) -> tuple[Optional[float], Optional[float]]:
    """(trigger share of coordination actions, trigger acceptance rate).

    The acceptance rate counts the agent's distinct trigger actions matched
    as giver in at least one pair, over all its trigger actions. Both values
    are None when their denominators are zero.
    """
    acts = ledger.agent_classifications(agent)
    coordination = sum(1 for c in acts if not c.independent)
    triggers = sum(1 for c in acts if c.is_trigger)
    matched = {(p.giver.agent, p.giver.t) for p in ledger.pairs}
    accepted = sum(
        1 for c in acts if c.is_trigger and (agent, c.action.t) in matched
    )
    return _ratio(triggers, coordination), _ratio(accepted, triggers)


def action_distribution_rings(ledger: InterdependencyLedger, agent: int) -> dict:
    """Nested tallies: total -> independent/coordination -> roles -> success.

    A trigger is successful when matched as giver in some pair, an accept
    when matched as receiver; dual-role actions count under both, and the
    overlap is reported so the layers telescope exactly.
    """
    acts = ledger.agent_classifications(agent)
    givers = {(p.giver.agent, p.giver.t) for p in ledger.pairs}
    receivers = {(p.receiver.agent, p.receiver.t) for p in ledger.pairs}

    triggers = [c for c in acts if c.is_trigger]
    accepts = [c for c in acts if c.is_accept]
    trigger_ok = sum(1 for c in triggers if (agent, c.action.t) in givers)
    accept_ok = sum(1 for c in accepts if (agent, c.action.t) in receivers)
    coordination = sum(1 for c in acts if not c.independent)

    return {
        "total": len(acts),
        "independent": sum(1 for c in acts if c.independent),
        "coordination": {
            "total": coordination,
            "trigger": {
                "total": len(triggers),
                "successful": trigger_ok,
                "unsuccessful": len(triggers) - trigger_ok,
            },
            "accept": {
                "total": len(accepts),
                "successful": accept_ok,
                "unsuccessful": len(accepts) - accept_ok,
            },
            "overlap": sum(1 for c in acts if c.is_trigger and c.is_accept),
        },
    }


def build_report(
    ledger: InterdependencyLedger,
    mode: str = "subtask-actions",
    label: str = "",
) -> TeamReport:
    """Assemble the full per-episode report from a ledger."""
    den = _denominator(ledger, mode)
    if den == 0:
        raise EmptyTrace(f"denominator is zero in mode {mode!r}")

    agents = []
    for agent in (1, 2):
        acts = ledger.agent_classifications(agent)
        ratio, g, r = contribution_ratio(ledger, agent)
        share, acceptance = trigger_stats(ledger, agent)
        dist = {name: 0 for name in ALL_SUBTASKS}
        for c in acts:
            dist[c.action.subtask] += 1
        agents.append(
            AgentReport(
                agent=agent,
                total_actions=len(acts),
                subtask_actions=sum(
                    1 for c in acts if c.action.subtask in INTERACT_SUBTASKS
                ),
                independent=sum(1 for c in acts if c.independent),
                coordination=sum(1 for c in acts if not c.independent),
                triggers=sum(1 for c in acts if c.is_trigger),
                accepts=sum(1 for c in acts if c.is_accept),
                trigger_accept_overlap=sum(
                    1 for c in acts if c.is_trigger and c.is_accept
                ),
                giver_count=g,
                receiver_count=r,
                contribution_ratio=ratio,
                trigger_share_of_coordination=share,
                trigger_acceptance_rate=acceptance,
                self_accept_count=sum(
                    1 for s in ledger.self_accepts if s.agent == agent
                ),
                unaccepted_triggers=len(ledger.unaccepted_triggers.get(agent, ())),
                event_distribution=dist,
            )
        )

    by_predicate: dict = {}
    for p in ledger.pairs:
        by_predicate[p.prop.predicate] = by_predicate.get(p.prop.predicate, 0) + 1

    return TeamReport(
        label=label,
        episode_time=ledger.episode_time,
        timed_out=ledger.timed_out,
        soups_delivered=ledger.soups_delivered,
        percent_interdependent=2 * len(ledger.pairs) / den,
        denominator_mode=mode,
        denominator=den,
        pair_count=len(ledger.pairs),
        pairs_by_predicate=by_predicate,
        include_counter_empty=ledger.schema.include_counter_empty,
        config=ledger.config,
        agents=tuple(agents),
    )


@dataclass(frozen=True)
class FieldSummary:
    """Mean/stddev of one report field, with undefined values excluded."""

    mean: Optional[float]
    stddev: Optional[float]
    n: int
    excluded: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stddev": self.stddev,
            "n": self.n,
            "excluded": self.excluded,
        }


@dataclass(frozen=True)
class AggregateSummary:
    """Field-wise mean and stddev across episodes with identical config."""

    n_reports: int
    denominator_mode: str
    include_counter_empty: bool
    config: EpisodeConfig
    fields: dict
    reports: tuple

    def field(self, name: str) -> FieldSummary:
        return self.fields[name]

    def to_dict(self) -> dict:
        return {
            "n_reports": self.n_reports,
            "denominator_mode": self.denominator_mode,
            "include_counter_empty": self.include_counter_empty,
            "config": self.config.to_dict(),
            "fields": {k: v.to_dict() for k, v in self.fields.items()},
            "reports": [r.to_dict() for r in self.reports],
        }


def _summarize(values: list) -> FieldSummary:
    present = [v for v in values if v is not None]
    excluded = len(values) - len(present)
    if not present:
        return FieldSummary(mean=None, stddev=None, n=0, excluded=excluded)
    mean = statistics.fmean(present)
    stddev = statistics.stdev(present) if len(present) > 1 else 0.0
    return FieldSummary(mean=mean, stddev=stddev, n=len(present), excluded=excluded)


AGGREGATE_AGENT_FIELDS = (
    "giver_count",
    "receiver_count",
    "contribution_ratio",
    "trigger_share_of_coordination",
    "trigger_acceptance_rate",
    "self_accept_count",
    "unaccepted_triggers",
    "triggers",
    "accepts",
    "independent",
    "coordination",
    "subtask_actions",
    "total_actions",
)


def aggregate(reports: list) -> AggregateSummary:
    """Combine per-episode reports into field-wise mean/stddev summaries.

    All reports must share config, denominator mode and schema flag.
    Undefined ratios are excluded field-wise, with the exclusion count kept
    in the summary.
    """
    if not reports:
        raise ConfigMismatch("aggregate needs at least one report")
    head = reports[0]
    for r in reports[1:]:
        if (
            r.config != head.config
            or r.denominator_mode != head.denominator_mode
            or r.include_counter_empty != head.include_counter_empty
        ):
            raise ConfigMismatch(
                f"report {r.label!r} was produced under a different configuration "
                f"than {head.label!r}"
            )

    fields: dict = {}
    fields["episode_time"] = _summarize([float(r.episode_time) for r in reports])
    fields["soups_delivered"] = _summarize([float(r.soups_delivered) for r in reports])
    fields["percent_interdependent"] = _summarize(
        [r.percent_interdependent for r in reports]
    )
    fields["pair_count"] = _summarize([float(r.pair_count) for r in reports])
    for agent in (1, 2):
        for name in AGGREGATE_AGENT_FIELDS:
            values = []
            for r in reports:
                v = getattr(r.agent(agent), name)
                values.append(float(v) if v is not None else None)
            fields[f"agent{agent}.{name}"] = _summarize(values)

    return AggregateSummary(
        n_reports=len(reports),
        denominator_mode=head.denominator_mode,
        include_counter_empty=head.include_counter_empty,
        config=head.config,
        fields=fields,
        reports=tuple(reports),
    )
