from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly strided samples ``(t, value)``."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.int64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t and values must be 1-D arrays of equal length")
        if t.size == 0:
            raise ValueError("empty time series")
        if t.size > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                raise ValueError("t must be strictly increasing")
            if np.any(dt != dt[0]):
                raise ValueError("t must have a uniform stride")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def stride(self) -> int:
        return int(self.t[1] - self.t[0]) if len(self) > 1 else 1

    def window(self, tmin: float | None = None, tmax: float | None = None) -> "TimeSeries":
        keep = np.ones(len(self), dtype=bool)
        if tmin is not None:
            keep &= self.t >= tmin
        if tmax is not None:
            keep &= self.t <= tmax
        return TimeSeries(self.t[keep], self.values[keep])
