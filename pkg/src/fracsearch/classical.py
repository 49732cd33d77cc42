"""Classical random walk return probability on a carpet lattice.

Two move rules are supported:

``stay``
    pick one of the 4 directions uniformly; a blocked direction leaves the
    walker in place (mirrors the quantum shift's self-loop rule).
``neighbor``
    pick uniformly among the actual neighbours; an isolated vertex stays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, ResourceLimitError
from .lattice import K_LINKS, CarpetLattice, CellCoord
from .series import TimeSeries

RULES = ("stay", "neighbor")
MC_CHUNK = 1 << 16


@dataclass
class ClassicalConfig:
    stage: int
    steps: int
    method: str = "exact"
    walkers: int = 100_000
    seed: int = 0
    start: tuple[int, int] = (0, 0)
    rule: str = "stay"

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if self.method not in ("exact", "mc"):
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.method == "mc" and self.walkers < 1:
            raise ConfigurationError("monte-carlo needs at least one walker")
        if self.rule not in RULES:
            raise ConfigurationError(f"unknown rule {self.rule!r}")


@dataclass(frozen=True, eq=False)
class Distribution:
    probabilities: np.ndarray
    time: int = 0


def transition_weights(lattice: CarpetLattice, rule: str = "stay") -> np.ndarray:
    """Weights ``c[v, l]`` such that ``p'[v] = sum_l c[v, l] p[neighbors[v, l]]``.

    Relies on neighbour symmetry: the mass arriving at ``v`` along link ``l``
    left ``w = neighbors[v, l]`` along the reversed link.
    """
    if rule not in RULES:
        raise ConfigurationError(f"unknown rule {rule!r}")
    nb = lattice.neighbors
    n = lattice.vertex_count
    if rule == "stay":
        return np.full((n, K_LINKS), 0.25)
    deg = lattice.degrees()
    own = np.arange(n)[:, None]
    real = nb != own
    weights = np.zeros((n, K_LINKS))
    inv = np.zeros(n)
    inv[deg > 0] = 1.0 / deg[deg > 0]
    weights[real] = inv[nb[real]]
    isolated = deg == 0
    weights[isolated, 0] = 1.0
    return weights


def step_distribution(dist: Distribution, lattice: CarpetLattice, rule: str = "stay") -> Distribution:
    p = np.asarray(dist.probabilities, dtype=np.float64)
    w = transition_weights(lattice, rule)
    out = (w * p[lattice.neighbors]).sum(axis=1)
    return Distribution(out, dist.time + 1)


def exact_memory_bytes(stage: int) -> int:
    # two float64 buffers, weights, int32 neighbour table
    n = 8**stage
    return n * (2 * 8 + K_LINKS * 8 + K_LINKS * 4)


def _start_index(lattice: CarpetLattice, start) -> int:
    v = lattice.index_of(CellCoord(*start))
    if v is None:
        raise DomainError(f"start cell {tuple(start)} is not part of the stage-{lattice.stage} carpet")
    return v


def return_series_exact(
    config: ClassicalConfig,
    lattice: CarpetLattice,
    *,
    memory_limit: int | None = None,
    chunk: int = 1024,
) -> TimeSeries:
    """P_c(start, t) for t = 0..T by propagating the full distribution."""
    if memory_limit is not None and exact_memory_bytes(lattice.stage) > memory_limit:
        raise ResourceLimitError(
            f"exact propagation at stage {lattice.stage} needs "
            f"{exact_memory_bytes(lattice.stage) / 2**30:.2f} GiB (limit {memory_limit / 2**30:.2f} GiB)"
        )
    start = _start_index(lattice, config.start)
    weights = None if config.rule == "stay" else transition_weights(lattice, config.rule)
    dist = np.zeros(lattice.vertex_count)
    dist[start] = 1.0
    scratch = np.empty_like(dist)
    returns = np.empty(config.steps + 1)
    returns[0] = 1.0
    done = 0
    while done < config.steps:
        todo = min(chunk, config.steps - done)
        _kernels.classical_chunk(dist, scratch, lattice.neighbors, weights, start, todo, returns[done + 1 : done + 1 + todo])
        if todo % 2:
            dist, scratch = scratch, dist
        done += todo
    return TimeSeries(np.arange(config.steps + 1), returns)


def _compact_neighbors(lattice: CarpetLattice, rule: str):
    """Per-vertex move table and number of usable entries for sampling."""
    nb = lattice.neighbors.astype(np.int64)
    n = lattice.vertex_count
    if rule == "stay":
        return nb, np.full(n, K_LINKS)
    own = np.arange(n)[:, None]
    real = nb != own
    # stable sort moves real neighbours to the front of each row
    order = np.argsort(~real, axis=1, kind="stable")
    table = np.take_along_axis(nb, order, axis=1)
    counts = real.sum(axis=1)
    table[counts == 0, 0] = np.flatnonzero(counts == 0)
    return table, np.maximum(counts, 1)


def return_series_mc(config: ClassicalConfig, lattice: CarpetLattice) -> TimeSeries:
    """Fraction of independent walkers sitting on the start vertex at each t.

    Walkers are processed in fixed-size chunks; chunk ``c`` draws from a
    generator seeded with ``(seed, c)``, so output is independent of how the
    chunks are scheduled.
    """
    start = _start_index(lattice, config.start)
    table, counts = _compact_neighbors(lattice, config.rule)
    hits = np.zeros(config.steps + 1, dtype=np.int64)
    for c, lo in enumerate(range(0, config.walkers, MC_CHUNK)):
        size = min(MC_CHUNK, config.walkers - lo)
        rng = np.random.default_rng([config.seed, c])
        pos = np.full(size, start, dtype=np.int64)
        hits[0] += size
        for t in range(1, config.steps + 1):
            if config.rule == "stay":
                choice = rng.integers(0, K_LINKS, size=size)
            else:
                choice = (rng.random(size) * counts[pos]).astype(np.int64)
            pos = table[pos, choice]
            hits[t] += np.count_nonzero(pos == start)
    return TimeSeries(np.arange(config.steps + 1), hits / config.walkers)


def return_series(config: ClassicalConfig, lattice: CarpetLattice, **kwargs) -> TimeSeries:
    if config.method == "exact":
        return return_series_exact(config, lattice, **kwargs)
    return return_series_mc(config, lattice)
