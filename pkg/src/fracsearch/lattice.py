"""Sierpinski carpet lattices.

Vertices are the retained cells of the stage-S carpet on a ``3**S`` grid, so a
stage-S lattice has exactly ``8**S`` vertices.  Cells are indexed densely in
row-major order (row ``j`` major, column ``i`` minor).  Every vertex carries a
4-entry neighbour table ordered ``(+x, -x, +y, -y)``; a blocked link (outer
boundary or a removed cell) stores the vertex's own index.

The default marked vertex is the cell diagonally touching the lower-left
corner of the largest removed square, ``(3**(S-1) - 1, 3**(S-1) - 1)``.  For
S <= 1 that is the corner cell ``(0, 0)``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError


class LinkDirection(enum.IntEnum):
    PLUS_X = 0
    MINUS_X = 1
    PLUS_Y = 2
    MINUS_Y = 3

    def reverse(self) -> "LinkDirection":
        return LinkDirection(self ^ 1)

    @property
    def offset(self) -> tuple[int, int]:
        return _OFFSETS[self]

    @property
    def label(self) -> str:
        return ("+x", "-x", "+y", "-y")[self]


_OFFSETS = {
    LinkDirection.PLUS_X: (1, 0),
    LinkDirection.MINUS_X: (-1, 0),
    LinkDirection.PLUS_Y: (0, 1),
    LinkDirection.MINUS_Y: (0, -1),
}

K_LINKS = 4


class CellCoord(NamedTuple):
    i: int  # column
    j: int  # row


def side_length(stage: int) -> int:
    return 3**stage


def _check_stage(stage: int) -> None:
    if stage < 0:
        raise DomainError(f"stage must be >= 0, got {stage}")


def cell_present(i: int, j: int, stage: int) -> bool:
    """True when cell ``(i, j)`` survives to the given carpet stage.

    A cell is removed iff at some base-3 digit position both coordinates
    have digit 1.
    """
    _check_stage(stage)
    n = side_length(stage)
    if not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"cell ({i}, {j}) outside the {n}x{n} grid of stage {stage}")
    for _ in range(stage):
        if i % 3 == 1 and j % 3 == 1:
            return False
        i //= 3
        j //= 3
    return True


def presence_mask(stage: int) -> np.ndarray:
    """Boolean ``(3**S, 3**S)`` mask indexed ``[j, i]``."""
    _check_stage(stage)
    n = side_length(stage)
    digits = np.arange(n)
    mask = np.ones((n, n), dtype=bool)
    for _ in range(stage):
        hit = digits % 3 == 1
        mask &= ~(hit[:, None] & hit[None, :])
        digits = digits // 3
    return mask


@dataclass(frozen=True, eq=False)
class CarpetLattice:
    stage: int
    coords: np.ndarray  # (N, 2) int64 columns (i, j)
    neighbors: np.ndarray  # (N, 4) int32, self index when blocked
    marked: int
    _index: np.ndarray = field(repr=False)  # (side, side) int64, -1 when absent

    @property
    def vertex_count(self) -> int:
        return int(self.coords.shape[0])

    @property
    def side(self) -> int:
        return side_length(self.stage)

    def coord_of(self, v: int) -> CellCoord:
        i, j = self.coords[v]
        return CellCoord(int(i), int(j))

    def index_of(self, cell: CellCoord | tuple[int, int]) -> int | None:
        i, j = cell
        if not (0 <= i < self.side and 0 <= j < self.side):
            return None
        v = int(self._index[j, i])
        return v if v >= 0 else None

    @property
    def marked_coord(self) -> CellCoord:
        return self.coord_of(self.marked)

    def degrees(self) -> np.ndarray:
        own = np.arange(self.vertex_count)[:, None]
        return np.count_nonzero(self.neighbors != own, axis=1)

    def summary(self) -> dict:
        hist = Counter(int(d) for d in self.degrees())
        return {
            "stage": self.stage,
            "side": self.side,
            "N": self.vertex_count,
            "degree_histogram": {str(d): hist[d] for d in sorted(hist)},
            "marked": list(self.marked_coord),
            "marked_index": self.marked,
        }


def hole_corner(stage: int) -> CellCoord:
    """Cell diagonally adjacent to the lower-left corner of the central hole."""
    _check_stage(stage)
    c = 3 ** (stage - 1) - 1 if stage > 0 else 0
    return CellCoord(c, c)


MARK_PRESETS = {"hole": hole_corner, "corner": lambda stage: CellCoord(0, 0)}


def resolve_marked(spec: str | tuple[int, int] | None, stage: int) -> CellCoord:
    """``None``/``"hole"``, ``"corner"``, or ``"i,j"`` -> a cell coordinate."""
    if spec is None:
        return hole_corner(stage)
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in MARK_PRESETS:
            return MARK_PRESETS[key](stage)
        try:
            i, j = (int(p) for p in key.split(","))
        except ValueError:
            raise DomainError(f"marked cell must be 'hole', 'corner' or 'i,j', got {spec!r}") from None
        return CellCoord(i, j)
    return CellCoord(*spec)


def build_lattice(stage: int, marked: CellCoord | tuple[int, int] | str | None = None) -> CarpetLattice:
    """Enumerate the stage-``stage`` carpet and its neighbour table.

    ``marked`` accepts anything :func:`resolve_marked` does; it defaults to
    the hole-corner cell.
    """
    mask = presence_mask(stage)
    n = mask.shape[0]
    flat = np.flatnonzero(mask.ravel())
    count = flat.size

    index = np.full((n, n), -1, dtype=np.int64)
    index.ravel()[flat] = np.arange(count)
    jj, ii = np.divmod(flat, n)

    own = np.arange(count, dtype=np.int64)
    neighbors = np.empty((count, K_LINKS), dtype=np.int32)
    for link in LinkDirection:
        di, dj = link.offset
        ni, nj = ii + di, jj + dj
        inside = (ni >= 0) & (ni < n) & (nj >= 0) & (nj < n)
        target = np.full(count, -1, dtype=np.int64)
        target[inside] = index[nj[inside], ni[inside]]
        neighbors[:, link] = np.where(target >= 0, target, own)

    coords = np.stack([ii, jj], axis=1)
    lattice = CarpetLattice(stage=stage, coords=coords, neighbors=neighbors, marked=0, _index=index)

    cell = resolve_marked(marked, stage)
    v = lattice.index_of(cell)
    if v is None:
        raise DomainError(f"marked cell {tuple(cell)} is not part of the stage-{stage} carpet")
    object.__setattr__(lattice, "marked", v)
    return lattice


def degree(lattice: CarpetLattice, v: int) -> int:
    row = lattice.neighbors[v]
    return int(np.count_nonzero(row != v))


def adjacency_rows(lattice: CarpetLattice):
    """Yield ``(vertex, +x, -x, +y, -y)`` rows for CSV dumps."""
    for v in range(lattice.vertex_count):
        yield (v, *(int(w) for w in lattice.neighbors[v]))
