"""Scripted agents with analytically known cooperation structure.

These stand in for trained agents when exercising the analyzer: their
traces have pair counts you can reason about by hand. SoloChef runs the
full cook-serve loop alone; Passer shuttles onions from the dispenser to a
counter; ReceiverChef pots onions from that counter and serves; Idle never
moves; RandomWalk samples uniform primitives; StochasticPasser is SoloChef
with a seeded dial that routes each dispensed onion via the counter with
probability p, turning cooperation up continuously.

All movement uses breadth-first shortest paths with a fixed N,S,E,W
tie-break and the partner's cell treated as a wall, so every policy is
reproducible action-for-action from (layout, config, seed).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import Unreachable
from .gridworld import (
    DIR_VECTOR,
    MOVE_FOR_DIRECTION,
    EpisodeConfig,
    Item,
    Layout,
    Orientation,
    PotPhase,
    PrimitiveAction,
    Tile,
    WorldState,
    adjacent_floor_cells,
    direction_toward,
    initial_state,
    is_terminal,
    single_action,
    step,
)
from .trace_io import FORMAT_VERSION, ReplayableTrace

Cell = tuple

POLICY_KINDS = ("solo", "idle", "random", "passer", "receiver", "stochastic")

_ALL_ACTIONS = (
    PrimitiveAction.STAY,
    PrimitiveAction.UP,
    PrimitiveAction.DOWN,
    PrimitiveAction.LEFT,
    PrimitiveAction.RIGHT,
    PrimitiveAction.INTERACT,
)

_ORIENTATIONS = (Orientation.N, Orientation.S, Orientation.E, Orientation.W)


@dataclass(frozen=True)
class PolicySpec:
    """Parseable description of a scripted agent."""

    kind: str
    p: Optional[float] = None
    counter: Optional[Cell] = None
    pot: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "stochastic":
            if self.p is None:
                raise ValueError("stochastic policy requires p=<probability>")
            if not 0.0 <= self.p <= 1.0:
                raise ValueError(f"p={self.p} outside [0,1]")
        elif self.p is not None:
            raise ValueError(f"policy kind {self.kind!r} takes no p parameter")


def parse_policy_spec(text: str) -> PolicySpec:
    """Parse strings like `solo`, `passer:counter=(4,2)`, `stochastic:p=0.5`."""
    kind, _, param_text = text.strip().partition(":")
    params: dict = {}
    if param_text:
        # split on commas outside parentheses
        parts, depth, cur = [], 0, []
        for ch in param_text:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == "," and depth == 0:
                parts.append("".join(cur))
                cur = []
            else:
                cur.append(ch)
        parts.append("".join(cur))
        for part in parts:
            key, sep, value = part.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not value:
                raise ValueError(f"bad policy parameter {part!r} in {text!r}")
            if key == "p":
                params["p"] = float(value)
            elif key == "counter":
                if not (value.startswith("(") and value.endswith(")")):
                    raise ValueError(f"bad counter cell {value!r} in {text!r}")
                x, _, y = value[1:-1].partition(",")
                params["counter"] = (int(x), int(y))
            elif key == "pot":
                params["pot"] = int(value)
            else:
                raise ValueError(f"unknown policy parameter {key!r} in {text!r}")
    return PolicySpec(kind=kind, **params)


def format_policy_spec(spec: PolicySpec) -> str:
    """Canonical string form; parse(format(s)) == s."""
    params = []
    if spec.p is not None:
        params.append(f"p={spec.p!r}")
    if spec.counter is not None:
        params.append(f"counter=({spec.counter[0]},{spec.counter[1]})")
    if spec.pot is not None:
        params.append(f"pot={spec.pot}")
    return spec.kind + (":" + ",".join(params) if params else "")


def bfs_path(
    layout: Layout, start: Cell, goals: frozenset, blocked: frozenset
) -> Optional[list]:
    """Shortest floor path from start to any goal cell, or None.

    Neighbor expansion follows N,S,E,W so ties resolve identically on every
    run. `blocked` cells (the partner) count as walls.
    """
    if start in goals:
        return [start]
    parent = {start: None}
    frontier = deque([start])
    while frontier:
        cur = frontier.popleft()
        for orient in _ORIENTATIONS:
            dx, dy = DIR_VECTOR[orient]
            nxt = (cur[0] + dx, cur[1] + dy)
            if nxt in parent or nxt in blocked or not layout.is_floor(nxt):
                continue
            parent[nxt] = cur
            if nxt in goals:
                path = [nxt]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            frontier.append(nxt)
    return None


def bfs_distances(layout: Layout, start: Cell, blocked: frozenset) -> dict:
    """Floor-cell distances from start, partner cells treated as walls."""
    dist = {start: 0}
    frontier = deque([start])
    while frontier:
        cur = frontier.popleft()
        for orient in _ORIENTATIONS:
            dx, dy = DIR_VECTOR[orient]
            nxt = (cur[0] + dx, cur[1] + dy)
            if nxt in dist or nxt in blocked or not layout.is_floor(nxt):
                continue
            dist[nxt] = dist[cur] + 1
            frontier.append(nxt)
    return dist


class Policy:
    """Per-episode stateful agent; next_action is called on its turns only."""

    def __init__(
        self,
        spec: PolicySpec,
        agent: int,
        layout: Layout,
        config: EpisodeConfig,
        seed: int,
    ) -> None:
        self.spec = spec
        self.agent = agent
        self.layout = layout
        self.config = config
        self.seed = seed

    def next_action(self, state: WorldState) -> PrimitiveAction:
        raise NotImplementedError

    # navigation helpers -------------------------------------------------

    def _me(self, state: WorldState):
        return state.player(self.agent)

    def _partner_cell(self, state: WorldState) -> Cell:
        return state.player(3 - self.agent).position

    def _approach_and_interact(
        self, state: WorldState, target: Cell
    ) -> PrimitiveAction:
        """Walk to a cell adjacent to target, face it, interact."""
        me = self._me(state)
        d = direction_toward(me.position, target)
        if d is not None:
            if me.orientation is d:
                return PrimitiveAction.INTERACT
            return MOVE_FOR_DIRECTION[d]  # target is never floor: turns in place
        return self._walk_adjacent(state, target)

    def _wait_facing(self, state: WorldState, target: Cell) -> PrimitiveAction:
        """Stand adjacent to target facing it; stay put once positioned."""
        me = self._me(state)
        d = direction_toward(me.position, target)
        if d is not None:
            if me.orientation is d:
                return PrimitiveAction.STAY
            return MOVE_FOR_DIRECTION[d]
        return self._walk_adjacent(state, target)

    def _blocked_step(self, state: WorldState) -> PrimitiveAction:
        """Deterministic sidestep when every route is closed off.

        Standing still while the partner occupies a sole approach cell can
        freeze both agents (each parked on the cell the other needs), so a
        fully blocked walk yields to the first open neighbor instead.
        """
        me = self._me(state)
        other = self._partner_cell(state)
        for orient in _ORIENTATIONS:
            dx, dy = DIR_VECTOR[orient]
            nxt = (me.position[0] + dx, me.position[1] + dy)
            if nxt != other and self.layout.is_floor(nxt):
                return MOVE_FOR_DIRECTION[orient]
        return PrimitiveAction.STAY

    def _walk_adjacent(self, state: WorldState, target: Cell) -> PrimitiveAction:
        me = self._me(state)
        other = self._partner_cell(state)
        goals = frozenset(adjacent_floor_cells(self.layout, target)) - {other}
        path = bfs_path(self.layout, me.position, goals, frozenset({other})) if goals else None
        if path is None or len(path) < 2:
            return self._blocked_step(state)
        return MOVE_FOR_DIRECTION[direction_toward(path[0], path[1])]

    def _walk_to(self, state: WorldState, cell: Cell) -> PrimitiveAction:
        me = self._me(state)
        other = self._partner_cell(state)
        if me.position == cell:
            return PrimitiveAction.STAY
        path = bfs_path(self.layout, me.position, frozenset({cell}), frozenset({other}))
        if path is None or len(path) < 2:
            return self._blocked_step(state)
        return MOVE_FOR_DIRECTION[direction_toward(path[0], path[1])]

    def _nearest(
        self, state: WorldState, candidates: list
    ) -> Optional[Cell]:
        """Closest target cell by current approach distance; (dist, cell) ties."""
        me = self._me(state)
        other = self._partner_cell(state)
        dist = bfs_distances(self.layout, me.position, frozenset({other}))
        best = None
        for cell in candidates:
            approaches = adjacent_floor_cells(self.layout, cell)
            ds = [dist[a] for a in approaches if a in dist]
            if me.position in approaches:
                ds.append(0)
            if not ds:
                continue
            key = (min(ds), cell)
            if best is None or key < best:
                best = key
        return best[1] if best else None

    # construction-time validation ---------------------------------------

    def _spawn(self) -> Cell:
        return self.layout.spawns[self.agent - 1][0]

    def _require_reachable(self, cell: Cell, what: str) -> None:
        dist = bfs_distances(self.layout, self._spawn(), frozenset())
        if not any(a in dist for a in adjacent_floor_cells(self.layout, cell)):
            raise Unreachable(
                f"agent {self.agent}: {what} at {cell} has no reachable "
                f"approach from spawn {self._spawn()}"
            )

    def _require_station(self, tile: Tile, what: str) -> Cell:
        cells = self.layout.cells_of(tile)
        dist = bfs_distances(self.layout, self._spawn(), frozenset())
        for cell in cells:
            if any(a in dist for a in adjacent_floor_cells(self.layout, cell)):
                return cell
        raise Unreachable(
            f"agent {self.agent}: no reachable {what} from spawn {self._spawn()}"
        )

    def _resolve_counter(self) -> Cell:
        cell = self.spec.counter
        if cell is None:
            for c in self.layout.counter_cells:
                if len(adjacent_floor_cells(self.layout, c)) >= 2:
                    cell = c
                    break
            if cell is None:
                raise Unreachable(
                    f"agent {self.agent}: no counter with two approach sides"
                )
        if self.layout.tile_at(cell) is not Tile.COUNTER:
            raise ValueError(f"target cell {cell} is not a counter tile")
        self._require_reachable(cell, "counter")
        return cell

    def _resolve_pot(self) -> Cell:
        idx = self.spec.pot if self.spec.pot is not None else 0
        pots = self.layout.pot_cells
        if not 0 <= idx < len(pots):
            raise ValueError(f"pot index {idx} out of range (layout has {len(pots)})")
        cell = pots[idx]
        self._require_reachable(cell, "pot")
        return cell


class IdlePolicy(Policy):
    def next_action(self, state: WorldState) -> PrimitiveAction:
        return PrimitiveAction.STAY


class RandomWalkPolicy(Policy):
    def __init__(self, spec, agent, layout, config, seed) -> None:
        super().__init__(spec, agent, layout, config, seed)
        self.rng = random.Random(f"{seed}/{agent}/random-walk")

    def next_action(self, state: WorldState) -> PrimitiveAction:
        return self.rng.choice(_ALL_ACTIONS)


class SoloChefPolicy(Policy):
    """Full cook-serve loop alone: onions to the pot, dish, soup, serve.

    Onions come from the nearest source (dispenser or any counter already
    holding one); a held item the pot can no longer take is parked on the
    nearest free counter. `avoid_counter` (used by subclasses) keeps a
    passing counter out of both source and parking decisions.
    """

    avoid_counter: Optional[Cell] = None

    def __init__(self, spec, agent, layout, config, seed) -> None:
        super().__init__(spec, agent, layout, config, seed)
        self.pot_cell = self._resolve_pot()
        self.pot_index = layout.pot_cells.index(self.pot_cell)
        self.onion_cell = self._require_station(Tile.ONION_DISPENSER, "onion dispenser")
        self.dish_cell = self._require_station(Tile.DISH_DISPENSER, "dish dispenser")
        self.serve_cell = self._require_station(Tile.SERVING_STATION, "serving station")
        self._last_interact_target: Optional[Cell] = None

    def _interact(self, state: WorldState, target: Cell) -> PrimitiveAction:
        action = self._approach_and_interact(state, target)
        if action is PrimitiveAction.INTERACT:
            self._last_interact_target = target
        return action

    def _onion_sources(self, state: WorldState) -> list:
        sources = list(self.layout.cells_of(Tile.ONION_DISPENSER))
        for cell, item in state.counters.items():
            if item is Item.ONION and cell != self.avoid_counter:
                sources.append(cell)
        return sources

    def _park_item(self, state: WorldState) -> PrimitiveAction:
        free = [
            c
            for c in self.layout.counter_cells
            if c not in state.counters and c != self.avoid_counter
        ]
        target = self._nearest(state, free)
        if target is None:
            return PrimitiveAction.STAY
        return self._interact(state, target)

    def next_action(self, state: WorldState) -> PrimitiveAction:
        pot = state.pots[self.pot_index]
        held = self._me(state).held
        if held is Item.SOUP:
            return self._interact(state, self.serve_cell)
        if held is Item.DISH:
            if pot.phase is PotPhase.READY:
                return self._interact(state, self.pot_cell)
            if pot.phase is PotPhase.COOKING:
                return self._wait_facing(state, self.pot_cell)
            return self._park_item(state)  # someone else collected the soup
        if held is Item.ONION:
            if pot.phase is PotPhase.FILLING:
                return self._interact(state, self.pot_cell)
            return self._park_item(state)
        if pot.phase is not PotPhase.FILLING:
            return self._interact(state, self.dish_cell)
        target = self._nearest(state, self._onion_sources(state))
        if target is None:
            return PrimitiveAction.STAY
        return self._interact(state, target)


class StochasticPasserPolicy(SoloChefPolicy):
    """SoloChef with a cooperation dial.

    Each onion taken from a dispenser is routed to the passing counter with
    probability p (sticky until the onion leaves the hands), otherwise
    potted directly; onions found on counters are always potted. p=0 never
    draws and reduces to SoloChef; p=1 always passes.
    """

    def __init__(self, spec, agent, layout, config, seed) -> None:
        super().__init__(spec, agent, layout, config, seed)
        self.counter_cell = self._resolve_counter()
        self.avoid_counter = self.counter_cell
        self.rng = random.Random(f"{seed}/{agent}/stochastic-route")
        self._route: Optional[str] = None

    def _update_route(self, state: WorldState) -> None:
        held = self._me(state).held
        if held is not Item.ONION:
            self._route = None
            return
        if self._route is not None:
            return
        source = self._last_interact_target
        from_dispenser = (
            source is not None
            and self.layout.tile_at(source) is Tile.ONION_DISPENSER
        )
        if not from_dispenser:
            self._route = "pot"
        elif self.spec.p == 0.0:
            self._route = "pot"
        elif self.spec.p == 1.0:
            self._route = "counter"
        else:
            self._route = "counter" if self.rng.random() < self.spec.p else "pot"

    def next_action(self, state: WorldState) -> PrimitiveAction:
        self._update_route(state)
        if self._me(state).held is Item.ONION and self._route == "counter":
            if self.counter_cell in state.counters:
                return self._wait_facing(state, self.counter_cell)
            return self._interact(state, self.counter_cell)
        return super().next_action(state)


class PasserPolicy(Policy):
    """Shuttle onions from the dispenser to one counter, nothing else."""

    def __init__(self, spec, agent, layout, config, seed) -> None:
        super().__init__(spec, agent, layout, config, seed)
        self.counter_cell = self._resolve_counter()
        self.onion_cell = self._require_station(Tile.ONION_DISPENSER, "onion dispenser")

    def next_action(self, state: WorldState) -> PrimitiveAction:
        held = self._me(state).held
        if held is Item.ONION:
            if self.counter_cell in state.counters:
                return self._wait_facing(state, self.counter_cell)
            return self._approach_and_interact(state, self.counter_cell)
        if held is not Item.NOTHING:
            return PrimitiveAction.STAY  # passers only ever hold onions
        return self._approach_and_interact(state, self.onion_cell)


class ReceiverChefPolicy(Policy):
    """Pot onions arriving on the passing counter, then plate and serve.

    While the pot cooks it prefetches a dish; while nothing is available it
    parks one cell off the counter (on the side nearest the pot) so the
    serving lane stays clear.
    """

    def __init__(self, spec, agent, layout, config, seed) -> None:
        super().__init__(spec, agent, layout, config, seed)
        self.counter_cell = self._resolve_counter()
        self.pot_cell = self._resolve_pot()
        self.pot_index = layout.pot_cells.index(self.pot_cell)
        self.dish_cell = self._require_station(Tile.DISH_DISPENSER, "dish dispenser")
        self.serve_cell = self._require_station(Tile.SERVING_STATION, "serving station")
        self.park_cell = self._pick_park_cell()

    def _pick_park_cell(self) -> Cell:
        pot_approaches = adjacent_floor_cells(self.layout, self.pot_cell)
        best = None
        for cell in adjacent_floor_cells(self.layout, self.counter_cell):
            dist = bfs_distances(self.layout, cell, frozenset())
            ds = [dist[a] for a in pot_approaches if a in dist]
            if not ds:
                continue
            key = (min(ds), cell)
            if best is None or key < best:
                best = key
        if best is None:
            raise Unreachable(
                f"agent {self.agent}: pot {self.pot_cell} unreachable from "
                f"counter {self.counter_cell}"
            )
        return best[1]

    def _park_item(self, state: WorldState) -> PrimitiveAction:
        free = [
            c
            for c in self.layout.counter_cells
            if c not in state.counters and c != self.counter_cell
        ]
        target = self._nearest(state, free)
        if target is None:
            return PrimitiveAction.STAY
        return self._approach_and_interact(state, target)

    def _stand_at_park(self, state: WorldState) -> PrimitiveAction:
        me = self._me(state)
        if me.position == self.park_cell:
            d = direction_toward(me.position, self.counter_cell)
            if d is not None and me.orientation is not d:
                return MOVE_FOR_DIRECTION[d]
            return PrimitiveAction.STAY
        return self._walk_to(state, self.park_cell)

    def next_action(self, state: WorldState) -> PrimitiveAction:
        pot = state.pots[self.pot_index]
        held = self._me(state).held
        if held is Item.SOUP:
            return self._approach_and_interact(state, self.serve_cell)
        if held is Item.DISH:
            if pot.phase is PotPhase.READY:
                return self._approach_and_interact(state, self.pot_cell)
            if pot.phase is PotPhase.COOKING:
                return self._wait_facing(state, self.pot_cell)
            return self._park_item(state)
        if held is Item.ONION:
            if pot.phase is PotPhase.FILLING:
                return self._approach_and_interact(state, self.pot_cell)
            # pot busy; hold the onion off its approach so the plater fits
            return self._stand_at_park(state)
        if pot.phase is not PotPhase.FILLING:
            if state.player(3 - self.agent).held is Item.DISH:
                # partner already plating this soup; keep the lane clear
                return self._stand_at_park(state)
            return self._approach_and_interact(state, self.dish_cell)
        if state.counters.get(self.counter_cell) is Item.ONION:
            return self._approach_and_interact(state, self.counter_cell)
        return self._stand_at_park(state)


_POLICY_CLASSES = {
    "solo": SoloChefPolicy,
    "idle": IdlePolicy,
    "random": RandomWalkPolicy,
    "passer": PasserPolicy,
    "receiver": ReceiverChefPolicy,
    "stochastic": StochasticPasserPolicy,
}


def make_policy(
    spec: PolicySpec, agent: int, layout: Layout, config: EpisodeConfig, seed: int
) -> Policy:
    """Instantiate and validate a policy for one agent and layout."""
    return _POLICY_CLASSES[spec.kind](spec, agent, layout, config, seed)


def run_episode(
    layout: Layout,
    config: EpisodeConfig,
    spec1: PolicySpec,
    spec2: PolicySpec,
    seed: int,
) -> ReplayableTrace:
    """Play one turn-taking episode to termination and return its trace."""
    policies = {
        1: make_policy(spec1, 1, layout, config, seed),
        2: make_policy(spec2, 2, layout, config, seed),
    }
    state = initial_state(layout, config)
    steps = []
    while not is_terminal(state):
        agent = 1 + (state.t % 2)
        action = policies[agent].next_action(state)
        steps.append((state.t, agent, action))
        state, _, _ = step(state, single_action(agent, action))
    return ReplayableTrace(
        layout_text=layout.text,
        config=config,
        policies=(format_policy_spec(spec1), format_policy_spec(spec2)),
        seed=seed,
        steps=tuple(steps),
        version=FORMAT_VERSION,
    )
