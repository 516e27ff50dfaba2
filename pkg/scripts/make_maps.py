"""Regenerate the shipped map files under src/mobles/maps/.

Interior sizes: open room 10x10, four rooms 11x11, nine rooms 13x13,
semi-random obstacles 12x12 (20% density).  The goal sits in the top-right
interior corner of every map.
"""
from collections import deque
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "mobles" / "maps"
SEMI_RANDOM_SEED = 20190417
DENSITY = 0.2


def blank(n):
    size = n + 2
    grid = [["." for _ in range(size)] for _ in range(size)]
    for i in range(size):
        grid[0][i] = grid[-1][i] = grid[i][0] = grid[i][-1] = "#"
    return grid


def put(grid, x, y, ch):
    # x, y are 1-based from bottom-left over the full character grid
    grid[len(grid) - y][x - 1] = ch


def render(grid):
    return "\n".join("".join(r) for r in grid) + "\n"


def rooms(n, cuts, doors):
    grid = blank(n)
    size = n + 2
    for c in cuts:
        for t in range(1, size + 1):
            put(grid, c, t, "#")
            put(grid, t, c, "#")
    for c in cuts:
        for d in doors:
            put(grid, c, d, ".")
            put(grid, d, c, ".")
    put(grid, size - 1, size - 1, "G")
    return grid


def connected(grid):
    size = len(grid)
    free = {(x, y) for x in range(1, size + 1) for y in range(1, size + 1)
            if grid[size - y][x - 1] != "#"}
    start = next(iter(free))
    seen = {start}
    todo = deque([start])
    while todo:
        x, y = todo.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if (nx, ny) in free and (nx, ny) not in seen:
                seen.add((nx, ny))
                todo.append((nx, ny))
    return seen == free


def semi_random(n, seed):
    while True:
        grid = blank(n)
        size = n + 2
        goal = (size - 1, size - 1)
        cells = [(x, y) for x in range(2, size) for y in range(2, size) if (x, y) != goal]
        rng = np.random.default_rng(seed)
        k = round(DENSITY * n * n)
        for i in rng.choice(len(cells), size=k, replace=False):
            put(grid, *cells[i], "#")
        put(grid, *goal, "G")
        if connected(grid):
            return grid, seed
        seed += 1


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    open_room = blank(10)
    put(open_room, 11, 11, "G")
    (OUT / "open_room.txt").write_text(render(open_room))
    (OUT / "four_rooms.txt").write_text(render(rooms(11, cuts=[7], doors=[4, 10])))
    (OUT / "nine_rooms.txt").write_text(render(rooms(13, cuts=[6, 10], doors=[4, 8, 12])))
    grid, seed = semi_random(12, SEMI_RANDOM_SEED)
    (OUT / "semi_random.txt").write_text(render(grid))
    print(f"semi_random seed used: {seed}")


if __name__ == "__main__":
    main()
