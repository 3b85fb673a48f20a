"""Deterministic turn-based two-agent kitchen gridworld.

Two cooks move around a walled kitchen, picking up onions and dishes from
dispensers, filling pots (3 onions per soup), waiting for the cook timer,
plating the soup and delivering it at a serving station. Counters hold at
most one item and double as a passing surface between the agents.

The simulator is strictly turn-based: exactly one agent acts per timestep,
round-robin starting with agent 1. All transitions are deterministic, so an
episode is fully reproducible from (layout, config, action sequence).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import MalformedGrid, MalformedJointAction, MissingStation, SpawnCountError

Cell = tuple[int, int]  # (x, y); x grows rightward, y grows downward


class Tile(enum.Enum):
    FLOOR = " "
    WALL = "X"
    COUNTER = "C"
    ONION_DISPENSER = "O"
    DISH_DISPENSER = "D"
    POT = "P"
    SERVING_STATION = "S"


class Item(enum.Enum):
    NOTHING = "nothing"
    ONION = "onion"
    DISH = "dish"
    SOUP = "soup"


class Orientation(enum.Enum):
    N = "N"
    S = "S"
    E = "E"
    W = "W"


DIR_VECTOR = {
    Orientation.N: (0, -1),
    Orientation.S: (0, 1),
    Orientation.E: (1, 0),
    Orientation.W: (-1, 0),
}


class PrimitiveAction(enum.Enum):
    STAY = "stay"
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"
    INTERACT = "interact"


MOVE_DIRECTION = {
    PrimitiveAction.UP: Orientation.N,
    PrimitiveAction.DOWN: Orientation.S,
    PrimitiveAction.LEFT: Orientation.W,
    PrimitiveAction.RIGHT: Orientation.E,
}


class PotPhase(enum.Enum):
    FILLING = "filling"
    COOKING = "cooking"
    READY = "ready"


# Outcomes of the interact action. Movement and no-ops are labeled
# separately; together these are the exhaustive per-step subtask labels.
PICKUP_ONION_DISPENSER = "pickup-onion-dispenser"
PICKUP_ONION_COUNTER = "pickup-onion-counter"
PICKUP_DISH_DISPENSER = "pickup-dish-dispenser"
PICKUP_DISH_COUNTER = "pickup-dish-counter"
PICKUP_SOUP_COUNTER = "pickup-soup-counter"
PLACE_ONION_POT = "place-onion-pot"
PLACE_ONION_COUNTER = "place-onion-counter"
PLACE_DISH_COUNTER = "place-dish-counter"
PLACE_SOUP_COUNTER = "place-soup-counter"
GET_SOUP_POT = "get-soup-pot"
SERVE_SOUP = "serve-soup"
MOVE = "move"
NOOP = "noop"

INTERACT_SUBTASKS = (
    PICKUP_ONION_DISPENSER,
    PICKUP_ONION_COUNTER,
    PICKUP_DISH_DISPENSER,
    PICKUP_DISH_COUNTER,
    PICKUP_SOUP_COUNTER,
    PLACE_ONION_POT,
    PLACE_ONION_COUNTER,
    PLACE_DISH_COUNTER,
    PLACE_SOUP_COUNTER,
    GET_SOUP_POT,
    SERVE_SOUP,
)

ALL_SUBTASKS = INTERACT_SUBTASKS + (MOVE, NOOP)

# Environment-side event, not caused by any single action.
EVENT_SOUP_READY = "soup-ready"


@dataclass(frozen=True)
class Layout:
    """Static kitchen geometry parsed from an ASCII grid."""

    width: int
    height: int
    tiles: tuple[tuple[Tile, ...], ...]  # tiles[y][x]
    spawns: tuple[tuple[Cell, Orientation], tuple[Cell, Orientation]]
    text: str

    def tile_at(self, cell: Cell) -> Tile:
        x, y = cell
        return self.tiles[y][x]

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_floor(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.tile_at(cell) is Tile.FLOOR

    def cells_of(self, tile: Tile) -> tuple[Cell, ...]:
        return tuple(
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if self.tiles[y][x] is tile
        )

    @property
    def counter_cells(self) -> tuple[Cell, ...]:
        return self.cells_of(Tile.COUNTER)

    @property
    def pot_cells(self) -> tuple[Cell, ...]:
        return self.cells_of(Tile.POT)


@dataclass(frozen=True)
class EpisodeConfig:
    """Recipe, timing and termination knobs for one episode."""

    target_soups: int = 3
    horizon: int = 1000
    cook_time: int = 20
    reward_per_soup: int = 20
    onions_per_soup: int = 3

    def to_dict(self) -> dict:
        return {
            "target_soups": self.target_soups,
            "horizon": self.horizon,
            "cook_time": self.cook_time,
            "reward_per_soup": self.reward_per_soup,
            "onions_per_soup": self.onions_per_soup,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeConfig":
        return cls(**{k: int(v) for k, v in d.items()})


@dataclass(frozen=True)
class PlayerState:
    agent_id: int  # 1 or 2
    position: Cell
    orientation: Orientation
    held: Item = Item.NOTHING

    def facing_cell(self) -> Cell:
        dx, dy = DIR_VECTOR[self.orientation]
        return (self.position[0] + dx, self.position[1] + dy)


@dataclass(frozen=True)
class PotState:
    pot_cell: Cell
    onion_count: int = 0
    cook_timer: int = 0
    phase: PotPhase = PotPhase.FILLING


@dataclass(frozen=True)
class JointAction:
    """One slot per agent; None marks the agent whose turn it is not."""

    a1: Optional[PrimitiveAction]
    a2: Optional[PrimitiveAction]

    def acting_agent(self) -> int:
        if (self.a1 is None) == (self.a2 is None):
            raise MalformedJointAction(
                "exactly one agent must act per step in turn-taking mode"
            )
        return 1 if self.a1 is not None else 2

    def action(self) -> PrimitiveAction:
        agent = self.acting_agent()
        return self.a1 if agent == 1 else self.a2  # type: ignore[return-value]


def single_action(agent: int, action: PrimitiveAction) -> JointAction:
    """Embed one agent's action into a turn-taking joint action."""
    return JointAction(a1=action, a2=None) if agent == 1 else JointAction(a1=None, a2=action)


@dataclass(frozen=True)
class EnvEvent:
    """Something observable that happened during one step."""

    t: int
    agent: Optional[int]  # None for environment-driven events
    name: str
    cell: Optional[Cell] = None


@dataclass(frozen=True)
class WorldState:
    layout: Layout = field(compare=False)
    config: EpisodeConfig
    players: tuple[PlayerState, PlayerState]
    counters: dict[Cell, Item]  # occupied counters only; absence = empty
    pots: tuple[PotState, ...]
    soups_delivered: int = 0
    onions_dispensed: int = 0
    t: int = 0

    def player(self, agent: int) -> PlayerState:
        return self.players[agent - 1]

    def pot_index_at(self, cell: Cell) -> Optional[int]:
        for i, pot in enumerate(self.pots):
            if pot.pot_cell == cell:
                return i
        return None

    def onion_ledger(self) -> int:
        """Dispensed onions minus onions accounted for anywhere in the world.

        Zero in every reachable state: onions only enter through dispensers
        and are never destroyed, only transformed (3 per soup).
        """
        held_onions = sum(1 for p in self.players if p.held is Item.ONION)
        counter_onions = sum(1 for it in self.counters.values() if it is Item.ONION)
        pot_onions = sum(pot.onion_count for pot in self.pots)
        held_soups = sum(1 for p in self.players if p.held is Item.SOUP)
        counter_soups = sum(1 for it in self.counters.values() if it is Item.SOUP)
        soup_onions = self.config.onions_per_soup * (
            held_soups + counter_soups + self.soups_delivered
        )
        return self.onions_dispensed - (
            held_onions + counter_onions + pot_onions + soup_onions
        )


_GLYPH_TO_TILE = {t.value: t for t in Tile}
_SPAWN_GLYPHS = ("1", "2")

_REQUIRED_STATIONS = (
    Tile.ONION_DISPENSER,
    Tile.DISH_DISPENSER,
    Tile.POT,
    Tile.SERVING_STATION,
)


def load_layout(text: str) -> Layout:
    """Parse an ASCII kitchen grid.

    Legend: X wall, space floor, C counter, O onion dispenser, D dish
    dispenser, P pot, S serving station, 1/2 agent spawn on floor. The grid
    must be rectangular, enclosed by non-floor tiles, contain at least one
    of each station type, and exactly one spawn glyph per agent.
    """
    lines = text.rstrip("\n").split("\n")
    if not lines or not any(line for line in lines):
        raise MalformedGrid("empty layout text")
    width = len(lines[0])
    if width == 0:
        raise MalformedGrid("empty first row")
    for i, line in enumerate(lines):
        if len(line) != width:
            raise MalformedGrid(
                f"ragged grid: row {i} has length {len(line)}, expected {width}"
            )

    rows: list[tuple[Tile, ...]] = []
    spawn_cells: dict[str, list[Cell]] = {g: [] for g in _SPAWN_GLYPHS}
    for y, line in enumerate(lines):
        row: list[Tile] = []
        for x, glyph in enumerate(line):
            if glyph in _SPAWN_GLYPHS:
                spawn_cells[glyph].append((x, y))
                row.append(Tile.FLOOR)
            elif glyph in _GLYPH_TO_TILE:
                row.append(_GLYPH_TO_TILE[glyph])
            else:
                raise MalformedGrid(f"unknown glyph {glyph!r} at ({x},{y})")
        rows.append(tuple(row))
    tiles = tuple(rows)
    height = len(tiles)

    layout_text = "\n".join(lines)
    layout = Layout(
        width=width,
        height=height,
        tiles=tiles,
        spawns=_check_spawns(spawn_cells),
        text=layout_text,
    )
    _check_stations(layout)
    _check_enclosure(layout)
    return layout


def _check_stations(layout: Layout) -> None:
    for station in _REQUIRED_STATIONS:
        if not layout.cells_of(station):
            raise MissingStation(f"layout has no {station.name} tile")


def _check_spawns(
    spawn_cells: dict[str, list[Cell]],
) -> tuple[tuple[Cell, Orientation], tuple[Cell, Orientation]]:
    total = sum(len(v) for v in spawn_cells.values())
    if total != 2 or any(len(v) != 1 for v in spawn_cells.values()):
        raise SpawnCountError(
            f"expected exactly one spawn glyph per agent, found {total} spawn cells"
        )
    # Both agents start facing north; distinctness is implied by one glyph
    # per grid cell.
    return (
        (spawn_cells["1"][0], Orientation.N),
        (spawn_cells["2"][0], Orientation.N),
    )


def _check_enclosure(layout: Layout) -> None:
    for x in range(layout.width):
        for y in (0, layout.height - 1):
            if layout.tiles[y][x] is Tile.FLOOR:
                raise MalformedGrid(f"grid not enclosed: floor on border at ({x},{y})")
    for y in range(layout.height):
        for x in (0, layout.width - 1):
            if layout.tiles[y][x] is Tile.FLOOR:
                raise MalformedGrid(f"grid not enclosed: floor on border at ({x},{y})")


def initial_state(layout: Layout, config: EpisodeConfig) -> WorldState:
    """World at t=0: agents at their spawns, empty hands, idle pots."""
    players = tuple(
        PlayerState(agent_id=i + 1, position=cell, orientation=orient)
        for i, (cell, orient) in enumerate(layout.spawns)
    )
    pots = tuple(PotState(pot_cell=cell) for cell in layout.pot_cells)
    return WorldState(
        layout=layout,
        config=config,
        players=players,  # type: ignore[arg-type]
        counters={},
        pots=pots,
    )


def is_terminal(state: WorldState, goal: Optional[EpisodeConfig] = None) -> bool:
    """True once the soup target is met or the horizon is exhausted."""
    cfg = goal if goal is not None else state.config
    return state.soups_delivered >= cfg.target_soups or state.t >= cfg.horizon


def _resolve_move(
    state: WorldState, agent: int, direction: Orientation
) -> PlayerState:
    me = state.player(agent)
    other = state.player(3 - agent)
    dx, dy = DIR_VECTOR[direction]
    target = (me.position[0] + dx, me.position[1] + dy)
    # Blocked by anything non-floor and by the partner; orientation always
    # follows the attempted direction.
    if state.layout.is_floor(target) and target != other.position:
        return replace(me, position=target, orientation=direction)
    return replace(me, orientation=direction)


def _resolve_interact(state: WorldState, agent: int):
    """Work out what interact does from (held item, faced tile, pot phase).

    Returns (subtask, new_player, counters, pots, delivered_delta,
    dispensed_delta). Incompatible combinations are silent no-ops.
    """
    me = state.player(agent)
    target = me.facing_cell()
    counters = state.counters
    pots = state.pots
    if not state.layout.in_bounds(target):
        return NOOP, me, counters, pots, 0, 0
    tile = state.layout.tile_at(target)
    held = me.held

    if tile is Tile.ONION_DISPENSER and held is Item.NOTHING:
        return (
            PICKUP_ONION_DISPENSER,
            replace(me, held=Item.ONION),
            counters,
            pots,
            0,
            1,
        )

    if tile is Tile.DISH_DISPENSER and held is Item.NOTHING:
        return PICKUP_DISH_DISPENSER, replace(me, held=Item.DISH), counters, pots, 0, 0

    if tile is Tile.COUNTER:
        on_counter = counters.get(target)
        if held is Item.NOTHING and on_counter is not None:
            new_counters = dict(counters)
            del new_counters[target]
            subtask = {
                Item.ONION: PICKUP_ONION_COUNTER,
                Item.DISH: PICKUP_DISH_COUNTER,
                Item.SOUP: PICKUP_SOUP_COUNTER,
            }[on_counter]
            return subtask, replace(me, held=on_counter), new_counters, pots, 0, 0
        if held is not Item.NOTHING and on_counter is None:
            new_counters = dict(counters)
            new_counters[target] = held
            subtask = {
                Item.ONION: PLACE_ONION_COUNTER,
                Item.DISH: PLACE_DISH_COUNTER,
                Item.SOUP: PLACE_SOUP_COUNTER,
            }[held]
            return subtask, replace(me, held=Item.NOTHING), new_counters, pots, 0, 0
        return NOOP, me, counters, pots, 0, 0

    if tile is Tile.POT:
        idx = state.pot_index_at(target)
        assert idx is not None
        pot = pots[idx]
        if held is Item.ONION and pot.phase is PotPhase.FILLING:
            count = pot.onion_count + 1
            if count == state.config.onions_per_soup:
                new_pot = replace(
                    pot,
                    onion_count=count,
                    phase=PotPhase.COOKING,
                    cook_timer=state.config.cook_time,
                )
            else:
                new_pot = replace(pot, onion_count=count)
            new_pots = pots[:idx] + (new_pot,) + pots[idx + 1 :]
            return PLACE_ONION_POT, replace(me, held=Item.NOTHING), counters, new_pots, 0, 0
        if held is Item.DISH and pot.phase is PotPhase.READY:
            new_pot = replace(pot, onion_count=0, cook_timer=0, phase=PotPhase.FILLING)
            new_pots = pots[:idx] + (new_pot,) + pots[idx + 1 :]
            return GET_SOUP_POT, replace(me, held=Item.SOUP), counters, new_pots, 0, 0
        return NOOP, me, counters, pots, 0, 0

    if tile is Tile.SERVING_STATION and held is Item.SOUP:
        return SERVE_SOUP, replace(me, held=Item.NOTHING), counters, pots, 1, 0

    return NOOP, me, counters, pots, 0, 0


def step(
    state: WorldState, joint: JointAction
) -> tuple[WorldState, int, list[EnvEvent]]:
    """Advance the world by one turn.

    The acting agent's action resolves against the current state, then pots
    that were already cooking tick down by one (flipping to ready at zero),
    then the clock advances. Blocked moves keep the position but still turn
    the agent toward the attempted direction.
    """
    agent = joint.acting_agent()
    action = joint.action()
    cooking_before = tuple(pot.phase is PotPhase.COOKING for pot in state.pots)

    events: list[EnvEvent] = []
    reward = 0
    new_players = list(state.players)
    counters = state.counters
    pots = state.pots
    delivered = state.soups_delivered
    dispensed = state.onions_dispensed

    if action in MOVE_DIRECTION:
        new_players[agent - 1] = _resolve_move(state, agent, MOVE_DIRECTION[action])
    elif action is PrimitiveAction.INTERACT:
        subtask, me, counters, pots, d_delivered, d_dispensed = _resolve_interact(
            state, agent
        )
        new_players[agent - 1] = me
        delivered += d_delivered
        dispensed += d_dispensed
        if subtask != NOOP:
            events.append(
                EnvEvent(t=state.t, agent=agent, name=subtask, cell=me.facing_cell())
            )
        if d_delivered:
            reward = state.config.reward_per_soup * d_delivered
    # STAY changes nothing.

    ticked: list[PotState] = []
    for was_cooking, pot in zip(cooking_before, pots):
        if was_cooking and pot.phase is PotPhase.COOKING:
            timer = pot.cook_timer - 1
            if timer == 0:
                pot = replace(pot, cook_timer=0, phase=PotPhase.READY)
                events.append(
                    EnvEvent(t=state.t, agent=None, name=EVENT_SOUP_READY, cell=pot.pot_cell)
                )
            else:
                pot = replace(pot, cook_timer=timer)
        ticked.append(pot)

    next_state = replace(
        state,
        players=tuple(new_players),  # type: ignore[arg-type]
        counters=counters,
        pots=tuple(ticked),
        soups_delivered=delivered,
        onions_dispensed=dispensed,
        t=state.t + 1,
    )
    return next_state, reward, events


def adjacent_floor_cells(layout: Layout, cell: Cell) -> tuple[Cell, ...]:
    """Floor cells from which an agent can face `cell` (N,S,E,W order)."""
    out = []
    for orient in (Orientation.N, Orientation.S, Orientation.E, Orientation.W):
        dx, dy = DIR_VECTOR[orient]
        nb = (cell[0] + dx, cell[1] + dy)
        if layout.is_floor(nb):
            out.append(nb)
    return tuple(out)


def direction_toward(src: Cell, dst: Cell) -> Optional[Orientation]:
    """Orientation pointing from src to an orthogonally adjacent dst."""
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    for orient, vec in DIR_VECTOR.items():
        if vec == (dx, dy):
            return orient
    return None


MOVE_FOR_DIRECTION = {v: k for k, v in MOVE_DIRECTION.items()}


def check_invariants(state: WorldState) -> None:
    """Raise AssertionError if a structural invariant is broken (test aid)."""
    p1, p2 = state.players
    assert p1.position != p2.position, "players share a cell"
    for p in state.players:
        assert state.layout.is_floor(p.position), "player off the floor"
    for cell in state.counters:
        assert state.layout.tile_at(cell) is Tile.COUNTER, "item on a non-counter"
    for pot in state.pots:
        if pot.phase is PotPhase.FILLING:
            assert pot.onion_count < state.config.onions_per_soup and pot.cook_timer == 0
        elif pot.phase is PotPhase.COOKING:
            assert pot.onion_count == state.config.onions_per_soup and pot.cook_timer > 0
        else:
            assert pot.onion_count == state.config.onions_per_soup and pot.cook_timer == 0
    assert state.onion_ledger() == 0, "onion conservation violated"
