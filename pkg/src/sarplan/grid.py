"""Discretized exploration area.

Cells are addressed either as ``Cell(a, b)`` (column, row) or by their flat
row-major index ``b * width + a``. The flat index is what the solvers use for
bitsets and for every lexicographic tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple


class Cell(NamedTuple):
    a: int
    b: int


@dataclass(frozen=True)
class GridMap:
    width_cells: int
    height_cells: int
    cell_size: float
    base_station: Cell = Cell(0, 0)
    terrain_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.width_cells < 1 or self.height_cells < 1:
            raise ValueError("grid needs at least one cell in each direction")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if self.terrain_factor < 0:
            raise ValueError("terrain_factor must be >= 0")
        object.__setattr__(self, "base_station", Cell(*self.base_station))
        if not self.contains(self.base_station):
            raise ValueError(f"base station {tuple(self.base_station)} lies outside the grid")

    @property
    def total_cells(self) -> int:
        return self.width_cells * self.height_cells

    def contains(self, c: tuple[int, int]) -> bool:
        a, b = c
        return 0 <= a < self.width_cells and 0 <= b < self.height_cells

    def index(self, c: tuple[int, int]) -> int:
        a, b = c
        return b * self.width_cells + a

    def cell(self, index: int) -> Cell:
        b, a = divmod(index, self.width_cells)
        return Cell(a, b)

    def cells(self) -> Iterator[Cell]:
        for i in range(self.total_cells):
            yield self.cell(i)

    def _check(self, c: tuple[int, int]) -> None:
        if not self.contains(c):
            raise ValueError(f"cell {tuple(c)} lies outside the {self.width_cells}x{self.height_cells} grid")


def build_grid(
    area_width: float,
    area_height: float,
    robot_speed: float,
    epoch_duration: float,
    base_station: tuple[int, int] = (0, 0),
    terrain_factor: float = 1.0,
) -> GridMap:
    """Discretize a rectangular area so that one cell is crossed in one epoch.

    The cell edge is ``robot_speed * epoch_duration``; the cell counts are
    rounded up so the grid always covers the whole area.
    """
    for name, value in (
        ("area_width", area_width),
        ("area_height", area_height),
        ("robot_speed", robot_speed),
        ("epoch_duration", epoch_duration),
    ):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    cell_size = robot_speed * epoch_duration
    # guard against 50 / 10 landing a hair above 5
    width = max(1, math.ceil(area_width / cell_size - 1e-9))
    height = max(1, math.ceil(area_height / cell_size - 1e-9))
    return GridMap(width, height, cell_size, Cell(*base_station), terrain_factor)


def neighbors(g: GridMap, c: tuple[int, int]) -> set[Cell]:
    """Moore neighbourhood of ``c`` including ``c`` itself, clipped to the grid."""
    g._check(c)
    a, b = c
    return {
        Cell(a + da, b + db)
        for da in (-1, 0, 1)
        for db in (-1, 0, 1)
        if g.contains((a + da, b + db))
    }


def neighbor_indices(g: GridMap) -> list[tuple[int, ...]]:
    """Sorted flat-index neighbourhoods for every cell, self included."""
    return [
        tuple(sorted(g.index(n) for n in neighbors(g, g.cell(i))))
        for i in range(g.total_cells)
    ]


def chebyshev(c1: tuple[int, int], c2: tuple[int, int]) -> int:
    return max(abs(c1[0] - c2[0]), abs(c1[1] - c2[1]))


def base_distance(g: GridMap, c: tuple[int, int]) -> float:
    """Euclidean distance in meters between the centers of ``c`` and the base station."""
    g._check(c)
    bs = g.base_station
    return g.cell_size * math.hypot(c[0] - bs.a, c[1] - bs.b)
