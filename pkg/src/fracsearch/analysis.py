"""Period extraction, power-law fits, dimensions and the scaling hypothesis."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InsufficientSpan, NoDominantOscillation
from .series import TimeSeries

MIN_POWER_RATIO = 0.05
HARMONIC_THRESHOLD = 0.25


# -- last-digit uncertainty notation -------------------------------------------------

_UNC = re.compile(r"^\s*([+-]?\d+(?:\.(\d*))?)\((\d+)\)\s*$")


def parse_uncertainty(text: str) -> tuple[float, float]:
    """``"0.5647(6)"`` -> ``(0.5647, 0.0006)``."""
    m = _UNC.match(text)
    if not m:
        raise ValueError(f"not in value(error) notation: {text!r}")
    decimals = len(m.group(2) or "")
    return float(m.group(1)), int(m.group(3)) * 10.0**-decimals


def format_uncertainty(value: float, error: float) -> str:
    """Round ``error`` to one significant digit and ``value`` to match."""
    if not math.isfinite(error) or error <= 0:
        return f"{value:.6g}"
    decimals = -math.floor(math.log10(error))
    digit = round(error * 10.0**decimals)
    if digit >= 10:
        decimals -= 1
        digit = round(error * 10.0**decimals)
    if decimals > 0:
        return f"{value:.{decimals}f}({digit})"
    scale = 10.0**-decimals
    return f"{round(value / scale) * scale:.0f}({digit * scale:.0f})"


# -- period of the marked-vertex oscillation ------------------------------------------


@dataclass(frozen=True)
class PeriodEstimate:
    period_Q: float
    dominant_frequency: float  # cycles per step
    spectral_power_ratio: float
    harmonic_ratio: float = 0.0

    @property
    def harmonic_flag(self) -> bool:
        return self.harmonic_ratio > HARMONIC_THRESHOLD

    def to_dict(self) -> dict:
        d = asdict(self)
        d["harmonic_flag"] = self.harmonic_flag
        return d


def estimate_period(series: TimeSeries, window: str = "none") -> PeriodEstimate:
    """Dominant period of ``series`` from its Fourier magnitude spectrum.

    The mean is removed, the largest non-DC bin located, and its frequency
    refined by a parabola through the log-magnitudes of that bin and its two
    neighbours.
    """
    n = len(series)
    if n < 64:
        raise InsufficientSpan(f"need at least 64 samples, got {n}")
    scale = float(np.max(np.abs(series.values)))
    if np.ptp(series.values) <= 1e-12 * scale:
        raise NoDominantOscillation("series is flat")
    x = series.values - series.values.mean()
    if window == "hann":
        x = x * np.hanning(n)
    elif window != "none":
        raise ValueError(f"unknown window {window!r}")

    mag = np.abs(np.fft.rfft(x))
    power = mag[1:] ** 2
    total = power.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise NoDominantOscillation("series has no oscillating component")
    k = int(np.argmax(power)) + 1
    ratio = float(mag[k] ** 2 / total)
    if ratio < MIN_POWER_RATIO:
        raise NoDominantOscillation(f"dominant bin holds only {ratio:.3f} of the non-DC power")

    offset = 0.0
    if k + 1 < mag.size:
        tiny = np.finfo(float).tiny
        lo, mid, hi = np.log(mag[k - 1 : k + 2] + tiny)
        denom = lo - 2.0 * mid + hi
        if denom < 0:
            offset = float(np.clip(0.5 * (lo - hi) / denom, -0.5, 0.5))
    freq = (k + offset) / (n * series.stride)
    if freq <= 0 or 1.0 / freq <= 2.0:
        raise NoDominantOscillation(f"dominant frequency {freq:.4g} is at or above Nyquist")

    k2 = int(round(2 * (k + offset)))
    harmonic = float(mag[k2] ** 2 / mag[k] ** 2) if k2 < mag.size else 0.0
    return PeriodEstimate(1.0 / freq, freq, ratio, harmonic)


def mean_peak_probability(series: TimeSeries, period_Q: float) -> float:
    """Mean of the per-window maxima over disjoint windows of ``round(Q)`` steps."""
    width = int(round(period_Q / series.stride))
    if width < 1:
        raise InsufficientSpan(f"period {period_Q} shorter than the sampling stride")
    windows = len(series) // width
    if windows < 2:
        raise InsufficientSpan(f"series covers {windows} whole period(s) of {period_Q:.4g}; need 2")
    blocks = series.values[: windows * width].reshape(windows, width)
    return float(blocks.max(axis=1).mean())


# -- power laws ------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLawFit:
    prefactor: float
    exponent: float
    stderr_exponent: float
    stderr_prefactor: float
    sample_count: int
    fit_range: tuple[float, float] | None = None

    @classmethod
    def literature(cls, exponent: float, stderr: float = 0.0, prefactor: float = 1.0, prefactor_err: float = 0.0):
        """A fit reported elsewhere, e.g. ``b = 0.5647(6)``."""
        return cls(prefactor, exponent, stderr, prefactor_err, 0, None)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["exponent_str"] = format_uncertainty(self.exponent, self.stderr_exponent)
        d["prefactor_str"] = format_uncertainty(self.prefactor, self.stderr_prefactor)
        return d


def power_law_fit(points, fit_range: tuple[float, float] | None = None) -> PowerLawFit:
    """Ordinary least squares of ``ln y`` on ``ln x``.

    ``points`` is an iterable of ``(x, y)`` pairs; ``fit_range`` keeps points
    with ``lo <= x <= hi``.
    """
    arr = np.asarray(list(points), dtype=np.float64).reshape(-1, 2)
    if np.any(arr <= 0):
        raise DomainError("power-law fit needs strictly positive x and y")
    if fit_range is not None:
        lo, hi = fit_range
        arr = arr[(arr[:, 0] >= lo) & (arr[:, 0] <= hi)]
    n = arr.shape[0]
    if n < 2:
        raise InsufficientSpan(f"need at least 2 points in range, got {n}")
    lx, ly = np.log(arr[:, 0]), np.log(arr[:, 1])
    xm = lx.mean()
    sxx = np.sum((lx - xm) ** 2)
    if sxx == 0:
        raise DomainError("all x values coincide")
    slope = np.sum((lx - xm) * (ly - ly.mean())) / sxx
    intercept = ly.mean() - slope * xm
    if n == 2:
        se_slope = se_icept = 0.0
    else:
        # residuals taken directly; the 1 - r^2 shortcut loses ~8 digits on exact data
        resid = ly - (intercept + slope * lx)
        s2 = np.sum(resid**2) / (n - 2)
        se_slope = math.sqrt(s2 / sxx)
        se_icept = math.sqrt(s2 * (1.0 / n + xm**2 / sxx))
    prefactor = math.exp(intercept)
    return PowerLawFit(
        prefactor=prefactor,
        exponent=float(slope),
        stderr_exponent=float(se_slope),
        stderr_prefactor=float(prefactor * se_icept),
        sample_count=n,
        fit_range=None if fit_range is None else (float(fit_range[0]), float(fit_range[1])),
    )


def fit_series(series: TimeSeries, tmin: float | None = None, tmax: float | None = None) -> PowerLawFit:
    """Power-law fit of a return-probability series over ``[tmin, tmax]``."""
    w = series.window(tmin, tmax)
    keep = (w.t > 0) & (w.values > 0)
    lo = float(w.t[keep][0]) if keep.any() else float("nan")
    hi = float(w.t[keep][-1]) if keep.any() else float("nan")
    fit = power_law_fit(zip(w.t[keep], w.values[keep]))
    return PowerLawFit(fit.prefactor, fit.exponent, fit.stderr_exponent, fit.stderr_prefactor, fit.sample_count, (lo, hi))


# -- dimensions ------------------------------------------------------------------------


def fractal_dimension(M: int, s: int) -> float:
    if M < 1 or s < 2:
        raise DomainError(f"need M >= 1 and s >= 2, got M={M}, s={s}")
    return math.log(M) / math.log(s)


def gasket_spectral_dimension(d_E: int) -> float:
    """Closed-form spectral dimension of the ``d_E``-dimensional Sierpinski gasket."""
    if d_E < 1:
        raise DomainError(f"d_E must be >= 1, got {d_E}")
    return 2.0 * math.log(d_E + 1) / math.log(d_E + 3)


def spectral_dimension_from_fit(fit: PowerLawFit) -> tuple[float, float]:
    """``P_c ~ t^(-d_s/2)`` -> ``(d_s, error)``."""
    if fit.exponent > 0:
        raise DomainError(f"return probability grows (exponent {fit.exponent:+.4g})")
    return 2.0 * abs(fit.exponent), 2.0 * fit.stderr_exponent


@dataclass(frozen=True)
class DimensionSet:
    d_E: int
    d_f: float
    d_s: float
    d_s_err: float
    s: int
    M: int

    def __post_init__(self):
        if self.s < 2 or self.M < 1:
            raise DomainError(f"need s >= 2 and M >= 1, got s={self.s}, M={self.M}")
        if self.d_f > self.d_E + 1e-12:
            raise DomainError(f"fractal dimension {self.d_f} exceeds embedding dimension {self.d_E}")
        if self.d_s_err < 0:
            raise DomainError("negative standard error")

    @classmethod
    def from_pieces(cls, d_E: int, M: int, s: int, d_s: float, d_s_err: float = 0.0) -> "DimensionSet":
        return cls(d_E, fractal_dimension(M, s), d_s, d_s_err, s, M)

    @property
    def ordered(self) -> bool:
        """``d_s <= d_f <= d_E`` as expected for finitely ramified fractals and carpets."""
        return self.d_s <= self.d_f <= self.d_E


CARPET = dict(d_E=2, M=8, s=3)
GASKET = dict(d_E=2, M=3, s=2)
TETRAHEDRON = dict(d_E=3, M=4, s=2)


# -- scaling hypothesis ----------------------------------------------------------------


def _sigma(diff: float, err: float) -> float:
    if err > 0:
        return abs(diff) / err
    return 0.0 if diff == 0 else math.inf


@dataclass(frozen=True)
class HypothesisReport:
    lhs_c: float
    lhs_err: float
    rhs: float
    rhs_err: float
    discrepancy_sigma: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lhs_str"] = format_uncertainty(self.lhs_c, self.lhs_err)
        d["rhs_str"] = format_uncertainty(self.rhs, self.rhs_err)
        return d


def check_hypothesis(b_fit: PowerLawFit, a_fit: PowerLawFit, dims: DimensionSet) -> HypothesisReport:
    """Compare ``c = b + a/2`` with ``d_s/(d_E - 1) + d_f - s``.

    ``b_fit`` is the fit of Q against N; ``a_fit`` the fit of the mean peak
    probability against N, whose exponent is ``-a``.
    """
    b, sb = b_fit.exponent, b_fit.stderr_exponent
    a, sa = -a_fit.exponent, a_fit.stderr_exponent
    lhs = b + a / 2.0
    lhs_err = math.hypot(sb, sa / 2.0)
    if dims.d_E < 2:
        raise DomainError("hypothesis needs d_E >= 2")
    rhs = dims.d_s / (dims.d_E - 1) + dims.d_f - dims.s
    rhs_err = dims.d_s_err / (dims.d_E - 1)
    return HypothesisReport(lhs, lhs_err, rhs, rhs_err, _sigma(lhs - rhs, math.hypot(lhs_err, rhs_err)))


@dataclass(frozen=True)
class InverseSpectral:
    one_over_ds: float
    error: float
    discrepancy_sigma: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["one_over_ds_str"] = format_uncertainty(self.one_over_ds, self.error)
        return d


def inverse_spectral_comparison(b_fit: PowerLawFit, d_s: float, error: float) -> InverseSpectral:
    """``1/d_s`` with propagated error, and its sigma-distance to ``b``."""
    if d_s <= 0:
        raise DomainError(f"d_s must be positive, got {d_s}")
    inv = 1.0 / d_s
    err = error / d_s**2
    diff = b_fit.exponent - inv
    return InverseSpectral(inv, err, _sigma(diff, math.hypot(err, b_fit.stderr_exponent)))
