"""Discrete arena, human grid kinematics, and collision geometry.

The human walks on a uniform grid of square cells covering a square room.
Cells are addressed x-first as ``(ix, iy)`` integer pairs; the center of
cell ``(ix, iy)`` sits at ``((ix + 0.5) * cell_size, (iy + 0.5) * cell_size)``
in meters.  All occupancy arrays in this package are indexed ``[ix, iy]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Cell = tuple[int, int]

# Canonical action order: stay first, then compass clockwise from north.
# Every consumer iterates actions in this order so that tie-breaking is
# deterministic across the whole package.
ACTIONS: tuple[str, ...] = ("stay", "N", "NE", "E", "SE", "S", "SW", "W", "NW")
ACTION_VECTORS: dict[str, Cell] = {
    "stay": (0, 0),
    "N": (0, 1),
    "NE": (1, 1),
    "E": (1, 0),
    "SE": (1, -1),
    "S": (0, -1),
    "SW": (-1, -1),
    "W": (-1, 0),
    "NW": (-1, 1),
}
ACTION_INDEX: dict[str, int] = {name: i for i, name in enumerate(ACTIONS)}
ACTION_NORMS: dict[str, float] = {
    name: math.hypot(*vec) for name, vec in ACTION_VECTORS.items()
}


@dataclass(frozen=True)
class Arena:
    """Square room with a uniform square-cell grid over its base.

    side_length and height are in meters; the grid covers the base with
    floor(side_length / cell_size) cells per axis.
    """

    side_length: float = 3.66
    height: float = 2.0
    cell_size: float = 0.1524

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.side_length < self.cell_size:
            raise ValueError("arena smaller than one cell")
        if self.height <= 0:
            raise ValueError("height must be positive")

    @property
    def cols(self) -> int:
        return int(math.floor(self.side_length / self.cell_size + 1e-9))

    @property
    def rows(self) -> int:
        return self.cols

    def contains(self, cell: Cell) -> bool:
        ix, iy = cell
        return 0 <= ix < self.cols and 0 <= iy < self.rows

    def contains_point(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.side_length and 0.0 <= y <= self.side_length

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        ix, iy = cell
        return ((ix + 0.5) * self.cell_size, (iy + 0.5) * self.cell_size)

    def snap(self, x: float, y: float, prev: Cell | None = None) -> Cell:
        """Nearest cell center to (x, y), ties broken toward ``prev``.

        A point interior to a cell is nearest to that cell's center; an
        exact-boundary point ties between neighbors and resolves toward the
        previous cell when that neighbor is adjacent across the boundary.
        """
        cells = []
        for axis, coord in enumerate((x, y)):
            n = self.cols if axis == 0 else self.rows
            i = int(math.floor(coord / self.cell_size))
            if coord == i * self.cell_size and prev is not None and prev[axis] == i - 1:
                i -= 1
            cells.append(min(max(i, 0), n - 1))
        return (cells[0], cells[1])


def feasible_actions(arena: Arena, cell: Cell) -> tuple[str, ...]:
    """Actions whose successor stays inside the arena, in canonical order.

    Never empty: stay is always feasible.
    """
    if not arena.contains(cell):
        raise ValueError(f"cell {cell} outside arena")
    ix, iy = cell
    out = []
    for name in ACTIONS:
        dx, dy = ACTION_VECTORS[name]
        if 0 <= ix + dx < arena.cols and 0 <= iy + dy < arena.rows:
            out.append(name)
    return tuple(out)


def step_human(arena: Arena, cell: Cell, action: str) -> Cell:
    """Deterministic successor cell; raises on moves that leave the arena."""
    if action not in ACTION_VECTORS:
        raise ValueError(f"unknown action {action!r}")
    dx, dy = ACTION_VECTORS[action]
    nxt = (cell[0] + dx, cell[1] + dy)
    if not arena.contains(nxt):
        raise ValueError(f"infeasible action {action} at {cell}")
    return nxt


def infer_action(prev: Cell, curr: Cell) -> str:
    """The unique action taking ``prev`` to ``curr`` in one step.

    Raises when the displacement exceeds one cell per axis; callers observing
    raw positions must snap/downsample to adjacent cells first.
    """
    dx, dy = curr[0] - prev[0], curr[1] - prev[1]
    for name, vec in ACTION_VECTORS.items():
        if vec == (dx, dy):
            return name
    raise ValueError(f"non-adjacent transition {prev} -> {curr}")


@dataclass(frozen=True)
class KeepOutSpec:
    """Joint states to avoid: robot within a square of side ``human_box_side``
    centered on the human (at any altitude), or robot outside the arena."""

    arena: Arena
    human_box_side: float = 0.3

    def __post_init__(self):
        if not 0 < self.human_box_side < self.arena.side_length:
            raise ValueError("human_box_side must be in (0, side_length)")

    def ground_collision(self, robot_xy: tuple[float, float],
                         human_xy: tuple[float, float]) -> bool:
        half = self.human_box_side / 2.0
        return (abs(robot_xy[0] - human_xy[0]) <= half
                and abs(robot_xy[1] - human_xy[1]) <= half)


def human_step_dt(arena: Arena, speed: float) -> float:
    """Seconds per one-cell human step at the given walking speed."""
    if speed <= 0:
        raise ValueError("speed must be positive")
    return arena.cell_size / speed
