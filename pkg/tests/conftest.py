"""Shared fixtures: layouts, configs and trace builders used across tests."""

from __future__ import annotations

import pytest

from interdep import (
    EpisodeConfig,
    PrimitiveAction,
    bundled_layout_text,
    initial_state,
    load_layout,
    single_action,
    step,
)
from interdep.policies import parse_policy_spec, run_episode
from interdep.trace_io import ReplayableTrace

# Tiny kitchen where both cooks start adjacent to stations, so interactions
# can be scripted directly without pathfinding.
MINI_LAYOUT = "XXPXX\nO1 2D\nXC SX\nXXXXX\n"

PASSER = "passer:counter=(4,2)"
RECEIVER = "receiver:counter=(4,2),pot=0"


def stochastic(p: float) -> str:
    return f"stochastic:p={p!r},counter=(4,2),pot=0"


@pytest.fixture(scope="session")
def layout_text() -> str:
    return bundled_layout_text()


@pytest.fixture(scope="session")
def layout(layout_text):
    return load_layout(layout_text)


@pytest.fixture(scope="session")
def config() -> EpisodeConfig:
    return EpisodeConfig()


@pytest.fixture(scope="session")
def mini_layout():
    return load_layout(MINI_LAYOUT)


def external_trace(layout_text: str, config: EpisodeConfig, actions) -> ReplayableTrace:
    """Wrap a round-robin (agent, action) script as a replayable trace."""
    steps = tuple((i, agent, act) for i, (agent, act) in enumerate(actions))
    return ReplayableTrace(
        layout_text=layout_text,
        config=config,
        policies="external",
        seed=None,
        steps=steps,
    )


def advance(state, agent_actions):
    """Apply (agent, action) steps in order, returning (state, events)."""
    events = []
    for agent, act in agent_actions:
        state, _, ev = step(state, single_action(agent, act))
        events.extend(ev)
    return state, events


def turns(agent1_actions):
    """Agent 1 scripted, agent 2 stays, strict alternation."""
    out = []
    for a in agent1_actions:
        out.append((1, a))
        out.append((2, PrimitiveAction.STAY))
    return out


def interleave(agent1_actions, agent2_actions=None):
    """Zip two single-agent scripts into the strict turn-taking order.

    Agent 2 defaults to STAY on every turn; the shorter script is padded
    with STAY.
    """
    a1 = list(agent1_actions)
    a2 = list(agent2_actions or [])
    n = max(len(a1), len(a2))
    a1 += [PrimitiveAction.STAY] * (n - len(a1))
    a2 += [PrimitiveAction.STAY] * (n - len(a2))
    out = []
    for x, y in zip(a1, a2):
        out.append((1, x))
        out.append((2, y))
    return out


def play(layout, config, trace: ReplayableTrace):
    """Replay a trace through the simulator, returning the state sequence."""
    state = initial_state(layout, config)
    states = [state]
    for _, agent, act in trace.steps:
        state, _, _ = step(state, single_action(agent, act))
        states.append(state)
    return states


def policy_trace(layout, config, p1: str, p2: str, seed: int) -> ReplayableTrace:
    return run_episode(
        layout, config, parse_policy_spec(p1), parse_policy_spec(p2), seed
    )


@pytest.fixture(scope="session")
def passer_receiver_trace(layout, config):
    """Deterministic passing episode reused by several suites."""
    return policy_trace(layout, config, PASSER, RECEIVER, seed=1)


@pytest.fixture(scope="session")
def solo_idle_trace(layout, config):
    return policy_trace(layout, config, "solo", "idle", seed=1)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one definitive pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in rep.nodeid and rep.when == "call":
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}: {name}")
