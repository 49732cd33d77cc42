"""Flip-flop quantum walk search on a carpet lattice.

One search step is ``W R = S G R``: the oracle negates the marked vertex's
coin block, the Grover coin reflects every other vertex's coin vector about
the uniform vector, and the flip-flop shift moves each amplitude to the
neighbour in its link direction while reversing the link.  Blocked links keep
their amplitude in place.

The per-operator functions below are plain numpy and return new states.
``evolve`` uses a fused compiled kernel instead; the test-suite checks the two
against each other and against an explicit step matrix.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NormDriftError
from .lattice import K_LINKS, CarpetLattice
from .series import TimeSeries

NORM_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True, eq=False)
class WalkState:
    amplitudes: np.ndarray  # (N, 4) complex128
    lattice: CarpetLattice

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def replace(self, amplitudes: np.ndarray) -> "WalkState":
        return WalkState(amplitudes, self.lattice)


def shift_partner(lattice: CarpetLattice) -> np.ndarray:
    """Flat ``(v, l) -> (w, reverse(l))`` map, fixed points on blocked links."""
    n = lattice.vertex_count
    v = np.repeat(np.arange(n, dtype=np.int64), K_LINKS)
    link = np.tile(np.arange(K_LINKS, dtype=np.int64), n)
    w = lattice.neighbors.reshape(-1).astype(np.int64)
    blocked = w == v
    return np.where(blocked, v * K_LINKS + link, w * K_LINKS + (link ^ 1))


def uniform_state(lattice: CarpetLattice) -> WalkState:
    n = lattice.vertex_count
    amp = np.full((n, K_LINKS), 1.0 / np.sqrt(n * K_LINKS), dtype=np.complex128)
    return WalkState(amp, lattice)


def apply_oracle(state: WalkState) -> WalkState:
    amp = state.amplitudes.copy()
    amp[state.lattice.marked] *= -1
    return state.replace(amp)


def grover_coin(coin: np.ndarray) -> np.ndarray:
    """``c -> (2/k) sum(c) - c`` along the last axis."""
    coin = np.asarray(coin)
    k = coin.shape[-1]
    return (2.0 / k) * coin.sum(axis=-1, keepdims=True) - coin


def apply_coin(state: WalkState, marked_exception: bool = True) -> WalkState:
    amp = grover_coin(state.amplitudes)
    if marked_exception:
        m = state.lattice.marked
        amp[m] = state.amplitudes[m]
    return state.replace(amp)


def apply_shift(state: WalkState, partner: np.ndarray | None = None) -> WalkState:
    if partner is None:
        partner = shift_partner(state.lattice)
    flat = state.amplitudes.reshape(-1)
    # partner is an involution, so gathering through it equals scattering
    return state.replace(flat[partner].reshape(state.amplitudes.shape))


def search_step(state: WalkState, oracle: bool = True, marked_exception: bool = True) -> WalkState:
    if oracle:
        state = apply_oracle(state)
    return apply_shift(apply_coin(state, marked_exception=marked_exception))


def step_matrix(lattice: CarpetLattice) -> np.ndarray:
    """Dense search-step operator built column by column from basis states."""
    dim = lattice.vertex_count * K_LINKS
    mat = np.empty((dim, dim), dtype=np.complex128)
    for col in range(dim):
        e = np.zeros(dim, dtype=np.complex128)
        e[col] = 1.0
        out = search_step(WalkState(e.reshape(-1, K_LINKS), lattice))
        mat[:, col] = out.amplitudes.reshape(-1)
    return mat


def probability_distribution(state: WalkState) -> np.ndarray:
    amp = state.amplitudes
    return (amp.real**2 + amp.imag**2).sum(axis=1)


def marked_probability(state: WalkState) -> float:
    return float(probability_distribution(state)[state.lattice.marked])


def search_memory_bytes(stage: int) -> int:
    """Two complex128 buffers of ``8**S * 4`` entries."""
    return 2 * (8**stage) * K_LINKS * 16


@dataclass
class SearchConfig:
    stage: int
    steps: int
    marked: tuple[int, int] = (0, 0)
    stride: int = 1
    snapshot_steps: tuple[int, ...] = ()
    precision: str = "complex128"


@dataclass
class SearchRun:
    config: SearchConfig
    series: TimeSeries
    final_state: WalkState
    wall_time: float
    final_norm_sq: float
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)


def evolve(
    lattice: CarpetLattice,
    steps: int,
    *,
    stride: int = 1,
    snapshot_steps=(),
    chunk: int = 4096,
    progress: bool = False,
) -> SearchRun:
    """Run ``steps`` search steps from the uniform state.

    The series holds P(marked, t) for ``t = 0, stride, 2*stride, ...``.
    ``snapshot_steps`` captures the per-vertex distribution at those steps.
    The norm is monitored, never renormalised; drift beyond 1e-6 aborts.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    start = time.perf_counter()
    state = uniform_state(lattice).amplitudes.reshape(-1).copy()
    scratch = np.empty_like(state)
    partner = shift_partner(lattice)
    marked = lattice.marked

    probs = np.empty(steps + 1)
    probs[0] = 1.0 / lattice.vertex_count
    wanted = sorted({int(s) for s in snapshot_steps if 0 <= int(s) <= steps})
    snapshots = {}
    if wanted and wanted[0] == 0:
        snapshots[0] = probability_distribution(WalkState(state.reshape(-1, K_LINKS), lattice))

    done = 0
    while done < steps:
        todo = min(chunk, steps - done)
        upcoming = [s for s in wanted if s > done]
        if upcoming:
            todo = min(todo, upcoming[0] - done)
        _kernels.search_chunk(state, scratch, partner, marked, todo, probs[done + 1 : done + 1 + todo])
        if todo % 2:
            state, scratch = scratch, state
        done += todo

        norm_sq = float(np.vdot(state, state).real)
        if abs(norm_sq - 1.0) > NORM_DRIFT_LIMIT:
            raise NormDriftError(
                f"norm^2 = {norm_sq!r} after {done} steps at stage {lattice.stage} "
                f"(limit 1 +/- {NORM_DRIFT_LIMIT})"
            )
        if done in wanted:
            snapshots[done] = probability_distribution(WalkState(state.reshape(-1, K_LINKS), lattice))
        if progress:
            print(f"stage {lattice.stage}: {done}/{steps} steps", file=sys.stderr, flush=True)

    t = np.arange(0, steps + 1, stride)
    config = SearchConfig(
        stage=lattice.stage,
        steps=steps,
        marked=tuple(lattice.marked_coord),
        stride=stride,
        snapshot_steps=tuple(wanted),
    )
    final_state = WalkState(state.reshape(-1, K_LINKS).copy(), lattice)
    return SearchRun(
        config=config,
        series=TimeSeries(t, probs[t]),
        final_state=final_state,
        wall_time=time.perf_counter() - start,
        final_norm_sq=final_state.norm_sq(),
        snapshots=snapshots,
    )
