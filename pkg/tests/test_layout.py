"""Layout parsing and validation."""

import pytest

from interdep import MalformedGrid, MissingStation, SpawnCountError, load_layout
from interdep.gridworld import Orientation, Tile

GOOD = "XXPXX\nO1 2D\nXC SX\nXXXXX\n"


def test_parses_dimensions_and_stations():
    layout = load_layout(GOOD)
    assert (layout.width, layout.height) == (5, 4)
    assert layout.pot_cells == ((2, 0),)
    assert layout.counter_cells == ((1, 2),)
    assert layout.cells_of(Tile.ONION_DISPENSER) == ((0, 1),)
    assert layout.cells_of(Tile.DISH_DISPENSER) == ((4, 1),)
    assert layout.cells_of(Tile.SERVING_STATION) == ((3, 2),)


def test_spawns_in_agent_order_facing_north():
    layout = load_layout(GOOD)
    (c1, o1), (c2, o2) = layout.spawns
    assert c1 == (1, 1) and c2 == (3, 1)
    assert o1 is Orientation.N and o2 is Orientation.N


def test_spawn_cells_are_floor():
    layout = load_layout(GOOD)
    for cell, _ in layout.spawns:
        assert layout.is_floor(cell)


def test_bundled_layout_parses(layout):
    assert (layout.width, layout.height) == (8, 5)
    assert layout.pot_cells == ((2, 0), (3, 0))
    assert layout.counter_cells == ((2, 2), (3, 2), (4, 2), (5, 2))


def test_station_cells_row_major(layout):
    cells = layout.counter_cells
    assert cells == tuple(sorted(cells, key=lambda c: (c[1], c[0])))


def test_text_round_trip():
    layout = load_layout(GOOD)
    assert load_layout(layout.text) == layout


def test_ragged_rows_rejected():
    with pytest.raises(MalformedGrid):
        load_layout("XXPXX\nO1 2D\nXCSX\nXXXXX\n")


def test_unknown_glyph_rejected():
    with pytest.raises(MalformedGrid):
        load_layout(GOOD.replace("C", "?"))


def test_floor_on_border_rejected():
    with pytest.raises(MalformedGrid):
        load_layout("XXPXX\nO1 2D\nXC SX\nXX XX\n")
    with pytest.raises(MalformedGrid):
        load_layout("XXPXX\nO1 2D\nXC S \nXXXXX\n")


def test_missing_station_rejected():
    # no pot anywhere
    with pytest.raises(MissingStation):
        load_layout("XXXXX\nO1 2D\nXC SX\nXXXXX\n")


def test_spawn_count_enforced():
    # two copies of agent 1, no agent 2
    with pytest.raises(SpawnCountError):
        load_layout("XXPXX\nO1 1D\nXC SX\nXXXXX\n")
    # no spawns at all
    with pytest.raises(SpawnCountError):
        load_layout("XXPXX\nO   D\nXC SX\nXXXXX\n")
