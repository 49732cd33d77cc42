"""Compiled inner loops for the quantum and classical walks.

Each hot loop comes in a serial and a ``prange`` flavour; the parallel one is
used only when more than one thread is configured, since the thread-pool
dispatch per step costs more than it saves on a single core.
"""

import os

import numba
from numba import njit, prange

# the bundled TBB is often too old and warns on every import; prefer OpenMP
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def set_threads(threads: int | None = None) -> int:
    """Apply ``threads`` (or ``FRACSEARCH_THREADS``) to the numba pool."""
    if threads is None:
        env = os.environ.get("FRACSEARCH_THREADS")
        threads = int(env) if env else numba.config.NUMBA_NUM_THREADS
    threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads


def parallel_enabled() -> bool:
    return numba.get_num_threads() > 1


# -- quantum search: oracle + coin fused per vertex, scattered through the shift ----


@njit(cache=True)
def _search_serial(state, scratch, partner, marked, steps, probs):
    src, dst = state, scratch
    n = src.shape[0] // 4
    m = 4 * marked
    for k in range(steps):
        for v in range(n):
            base = 4 * v
            a0 = src[base]
            a1 = src[base + 1]
            a2 = src[base + 2]
            a3 = src[base + 3]
            if v == marked:
                b0, b1, b2, b3 = -a0, -a1, -a2, -a3
            else:
                s = 0.5 * (a0 + a1 + a2 + a3)
                b0, b1, b2, b3 = s - a0, s - a1, s - a2, s - a3
            dst[partner[base]] = b0
            dst[partner[base + 1]] = b1
            dst[partner[base + 2]] = b2
            dst[partner[base + 3]] = b3
        p = 0.0
        for l in range(4):
            z = dst[m + l]
            p += z.real * z.real + z.imag * z.imag
        probs[k] = p
        src, dst = dst, src


@njit(parallel=True, cache=True)
def _search_parallel(state, scratch, partner, marked, steps, probs):
    src, dst = state, scratch
    n = src.shape[0] // 4
    m = 4 * marked
    for k in range(steps):
        for v in prange(n):
            base = 4 * v
            a0 = src[base]
            a1 = src[base + 1]
            a2 = src[base + 2]
            a3 = src[base + 3]
            if v == marked:
                b0, b1, b2, b3 = -a0, -a1, -a2, -a3
            else:
                s = 0.5 * (a0 + a1 + a2 + a3)
                b0, b1, b2, b3 = s - a0, s - a1, s - a2, s - a3
            dst[partner[base]] = b0
            dst[partner[base + 1]] = b1
            dst[partner[base + 2]] = b2
            dst[partner[base + 3]] = b3
        p = 0.0
        for l in range(4):
            z = dst[m + l]
            p += z.real * z.real + z.imag * z.imag
        probs[k] = p
        src, dst = dst, src


def search_chunk(state, scratch, partner, marked, steps, probs):
    """Advance ``steps`` search steps; ``probs[k]`` gets P(marked) after step k+1.

    The final state lands in ``state`` for even ``steps``, else in ``scratch``.
    """
    kernel = _search_parallel if parallel_enabled() else _search_serial
    kernel(state, scratch, partner, marked, steps, probs)


# -- classical propagation: p'[v] = sum_l w[v, l] p[neighbors[v, l]] -----------------


@njit(cache=True)
def _stay_serial(dist, scratch, neighbors, start, steps, returns):
    src, dst = dist, scratch
    n = src.shape[0]
    for k in range(steps):
        for v in range(n):
            dst[v] = 0.25 * (src[neighbors[v, 0]] + src[neighbors[v, 1]] + src[neighbors[v, 2]] + src[neighbors[v, 3]])
        returns[k] = dst[start]
        src, dst = dst, src


@njit(parallel=True, cache=True)
def _stay_parallel(dist, scratch, neighbors, start, steps, returns):
    src, dst = dist, scratch
    n = src.shape[0]
    for k in range(steps):
        for v in prange(n):
            dst[v] = 0.25 * (src[neighbors[v, 0]] + src[neighbors[v, 1]] + src[neighbors[v, 2]] + src[neighbors[v, 3]])
        returns[k] = dst[start]
        src, dst = dst, src


@njit(cache=True)
def _weighted_serial(dist, scratch, neighbors, weights, start, steps, returns):
    src, dst = dist, scratch
    n = src.shape[0]
    for k in range(steps):
        for v in range(n):
            acc = 0.0
            for l in range(4):
                acc += weights[v, l] * src[neighbors[v, l]]
            dst[v] = acc
        returns[k] = dst[start]
        src, dst = dst, src


def classical_chunk(dist, scratch, neighbors, weights, start, steps, returns):
    """Propagate ``steps`` steps; ``weights=None`` selects the uniform 1/4 rule.

    The final distribution lands in ``dist`` for even ``steps``, else in ``scratch``.
    """
    if weights is None:
        kernel = _stay_parallel if parallel_enabled() else _stay_serial
        kernel(dist, scratch, neighbors, start, steps, returns)
    else:
        _weighted_serial(dist, scratch, neighbors, weights, start, steps, returns)
