"""Grid helpers shared by the cliff and wumpus generators."""

from __future__ import annotations

MOVES = ("up", "down", "left", "right")
UP, DOWN, LEFT, RIGHT = range(4)
DELTAS = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}
ARROWS = {UP: "^", DOWN: "v", LEFT: "<", RIGHT: ">"}


def step(cell: tuple[int, int], action: int, height: int, width: int) -> tuple[int, int]:
    """Cell reached by ``action``; bumping into the border leaves the cell unchanged."""
    dr, dc = DELTAS[action]
    r, c = cell[0] + dr, cell[1] + dc
    if 0 <= r < height and 0 <= c < width:
        return (r, c)
    return cell


def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])
