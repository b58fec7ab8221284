"""Outdoor boundary conditions: CSV ingestion, synthetic climate, season window.

Weather is a uniform hourly (or finer) series of outdoor dry-bulb
temperature, global horizontal irradiance and wind speed.  The CSV format
is four columns::

    timestamp,dry_bulb_c,ghi_wm2,wind_ms

with ISO-8601 local timestamps and a constant step.  Gaps are errors, not
interpolation targets.

The synthetic generator produces a continental-temperate year from a
double sinusoid (annual + diurnal) plus seeded Gaussian noise, with a
daylight-window irradiance model.  It starts the year on 1 October so the
mid-October to mid-April heating season is one contiguous block; filtered
calendar-year files keep their two season segments with a single seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

SEASON_START = (10, 15)   # inclusive
SEASON_END = (4, 15)      # inclusive through 24:00

DRY_BULB_RANGE = (-50.0, 60.0)

CSV_HEADER = "timestamp,dry_bulb_c,ghi_wm2,wind_ms"


class WeatherError(ValueError):
    """Malformed, gapped or out-of-range weather input."""


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: datetime
    dry_bulb_c: float
    ghi_wm2: float
    wind_ms: float


def _validate_values(times, dry_bulb, ghi, wind, context="record"):
    lo, hi = DRY_BULB_RANGE
    bad = np.where((dry_bulb < lo) | (dry_bulb > hi))[0]
    if bad.size:
        raise WeatherError(
            f"dry_bulb {dry_bulb[bad[0]]} at {times[bad[0]]} outside [{lo}, {hi}] C"
        )
    bad = np.where(ghi < 0)[0]
    if bad.size:
        raise WeatherError(f"negative irradiance at {times[bad[0]]}")
    bad = np.where(wind < 0)[0]
    if bad.size:
        raise WeatherError(f"negative wind speed at {times[bad[0]]}")


class WeatherSeries:
    """Uniform time series of outdoor conditions.

    Data is held as numpy arrays: ``times`` (datetime64[s]), ``dry_bulb_c``,
    ``ghi_wm2`` and ``wind_ms``.  Timestamps must increase by a constant
    step; a series marked ``seasonal_view`` is a heating-season slice of a
    calendar year and may contain one seam where mid-April joins
    mid-October.
    """

    def __init__(self, times, dry_bulb_c, ghi_wm2, wind_ms, metadata=None,
                 seasonal_view=False):
        self.times = np.asarray(times, dtype="datetime64[s]")
        self.dry_bulb_c = np.asarray(dry_bulb_c, dtype=float)
        self.ghi_wm2 = np.asarray(ghi_wm2, dtype=float)
        self.wind_ms = np.asarray(wind_ms, dtype=float)
        self.metadata = dict(metadata or {})
        self.seasonal_view = bool(seasonal_view)

        n = len(self.times)
        if n < 2:
            raise WeatherError("a weather series needs at least two records")
        if not (len(self.dry_bulb_c) == len(self.ghi_wm2) == len(self.wind_ms) == n):
            raise WeatherError("weather arrays must have equal length")
        _validate_values(self.times, self.dry_bulb_c, self.ghi_wm2, self.wind_ms)

        diffs = np.diff(self.times).astype("timedelta64[s]").astype(int)
        step = int(np.min(diffs))
        if step <= 0:
            raise WeatherError("timestamps must be strictly increasing")
        irregular = np.where(diffs != step)[0]
        allowed_seams = 1 if self.seasonal_view else 0
        if irregular.size > allowed_seams:
            i = irregular[0] if not self.seasonal_view else irregular[allowed_seams]
            raise WeatherError(
                f"gap or irregular step after {self.times[i]} "
                f"(expected {step} s, found {diffs[i]} s)"
            )
        self.step_s = step

    def __len__(self):
        return len(self.times)

    def __eq__(self, other):
        if not isinstance(other, WeatherSeries):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.dry_bulb_c, other.dry_bulb_c)
            and np.array_equal(self.ghi_wm2, other.ghi_wm2)
            and np.array_equal(self.wind_ms, other.wind_ms)
        )

    def records(self):
        for i in range(len(self.times)):
            yield WeatherRecord(
                self.times[i].astype(datetime),
                float(self.dry_bulb_c[i]),
                float(self.ghi_wm2[i]),
                float(self.wind_ms[i]),
            )


@dataclass(frozen=True)
class DesignDay:
    """Constant cold, sunless 24 h used for plant sizing."""

    dry_bulb_c: float = -15.0
    duration_h: float = 24.0

    def __post_init__(self):
        lo, hi = DRY_BULB_RANGE
        if not lo <= self.dry_bulb_c <= hi:
            raise WeatherError(f"design dry bulb outside [{lo}, {hi}] C")

    @classmethod
    def for_series(cls, series: WeatherSeries, dry_bulb_c: float = -15.0) -> "DesignDay":
        mean = float(series.dry_bulb_c.mean())
        if dry_bulb_c >= mean:
            raise WeatherError(
                f"design dry bulb {dry_bulb_c} C is not below the series mean {mean:.1f} C"
            )
        return cls(dry_bulb_c=dry_bulb_c)


def load_weather_csv(path) -> WeatherSeries:
    """Read and validate a weather CSV; any gap or malformed row is an error."""
    times = []
    cols = ([], [], [])
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise WeatherError(f"unexpected header {header!r}, want {CSV_HEADER!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise WeatherError(f"line {lineno}: expected 4 fields, got {len(parts)}")
            try:
                times.append(np.datetime64(datetime.fromisoformat(parts[0]), "s"))
                for col, raw in zip(cols, parts[1:]):
                    col.append(float(raw))
            except ValueError as exc:
                raise WeatherError(f"line {lineno}: {exc}") from None
    if len(times) < 2:
        raise WeatherError("weather file holds fewer than two records")
    return WeatherSeries(np.array(times), *cols, metadata={"source": str(path)})


def write_weather_csv(series: WeatherSeries, path) -> None:
    """Write a series in the documented CSV format (round-trips exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(len(series)):
            stamp = series.times[i].astype(datetime).isoformat()
            fh.write(
                f"{stamp},{series.dry_bulb_c[i]!r},{series.ghi_wm2[i]!r},"
                f"{series.wind_ms[i]!r}\n"
            )


@dataclass(frozen=True)
class ClimateParams:
    """Synthetic climate shape; defaults approximate a continental site
    at ~44 N (annual mean 11 C with the coldest month averaging ~0 C).

    All values are assumptions, not measurements.
    """

    annual_mean_c: float = 11.0
    annual_amplitude_k: float = 11.0
    diurnal_amplitude_k: float = 5.0
    noise_sigma_k: float = 2.0
    ghi_noon_mean_wm2: float = 520.0
    ghi_noon_amplitude_wm2: float = 320.0
    start: datetime = field(default_factory=lambda: datetime(2021, 10, 1))
    hours: int = 8760
    step_s: int = 3600


def synthesize_climate(seed: int, params: ClimateParams | None = None) -> WeatherSeries:
    """Generate a deterministic synthetic year of hourly weather.

    Dry bulb is  mean - A_annual*cos(2*pi*(doy-15)/365) + A_diurnal*
    cos(2*pi*(hour-16)/24) + noise, i.e. coldest around 15 January at
    04:00.  Irradiance follows a seasonal noon peak shaped over a
    latitude-dependent daylight window and a per-day clearness draw.
    With ``noise_sigma_k == 0`` every stochastic term is disabled and the
    series is the closed-form double sinusoid.
    """
    p = params or ClimateParams()
    if p.step_s <= 0:
        raise WeatherError("step must be positive")
    rng = np.random.default_rng(seed)

    start = np.datetime64(p.start, "s")
    times = start + np.arange(p.hours, dtype="int64") * p.step_s

    doy = (times.astype("datetime64[D]") - times.astype("datetime64[Y]")).astype(int) + 1
    hour = ((times - times.astype("datetime64[D]")).astype(int)) / 3600.0

    annual_phase = 2.0 * math.pi * (doy - 15) / 365.0
    temp = (
        p.annual_mean_c
        - p.annual_amplitude_k * np.cos(annual_phase)
        + p.diurnal_amplitude_k * np.cos(2.0 * math.pi * (hour - 16.0) / 24.0)
    )

    if p.noise_sigma_k > 0:
        temp = temp + rng.normal(0.0, p.noise_sigma_k, size=temp.shape)
        day_index = ((times - start).astype(int) // 86400).astype(int)
        clearness_by_day = np.clip(
            1.0 - np.abs(rng.normal(0.0, 0.3, size=day_index.max() + 1)), 0.2, 1.0
        )
        clearness = clearness_by_day[day_index]
        wind = 2.0 + np.abs(rng.normal(0.0, 1.2, size=temp.shape))
    else:
        clearness = np.ones_like(temp)
        wind = np.full_like(temp, 2.0)

    noon = np.clip(
        p.ghi_noon_mean_wm2 - p.ghi_noon_amplitude_wm2 * np.cos(annual_phase), 0.0, None
    )
    daylength = 12.0 - 3.6 * np.cos(2.0 * math.pi * (doy - 355) / 365.0)
    sunrise = 12.0 - daylength / 2.0
    elevation = np.sin(np.pi * np.clip((hour - sunrise) / daylength, 0.0, 1.0))
    ghi = noon * np.maximum(elevation, 0.0) ** 1.2 * clearness

    temp = np.clip(temp, *DRY_BULB_RANGE)
    return WeatherSeries(
        times, temp, ghi, wind,
        metadata={"source": f"synthetic(seed={seed})", "seed": seed},
    )


def _in_season(times) -> np.ndarray:
    months = times.astype("datetime64[M]").astype(int) % 12 + 1
    days = (times.astype("datetime64[D]") - times.astype("datetime64[M]")).astype(int) + 1
    after_start = (months > SEASON_START[0]) | (
        (months == SEASON_START[0]) & (days >= SEASON_START[1])
    )
    before_end = (months < SEASON_END[0]) | (
        (months == SEASON_END[0]) & (days <= SEASON_END[1])
    )
    return after_start | before_end


def heating_season_filter(series: WeatherSeries) -> WeatherSeries:
    """Keep records between 15 October 00:00 and 15 April 24:00.

    The bounds are by month and day, so both October-start years (one
    contiguous block) and calendar years (two segments with a seam) are
    supported.  The window must be fully covered: any missing step inside
    it is an error.
    """
    mask = _in_season(series.times)
    if not mask.any():
        raise WeatherError("series has no records inside the heating season")
    kept = series.times[mask]

    diffs = np.diff(kept).astype("timedelta64[s]").astype(int)
    seams = np.where(diffs != series.step_s)[0]
    if seams.size > 1:
        raise WeatherError(
            f"heating season not fully covered: gap after {kept[seams[1]]}"
        )
    per_day = 86400 // series.step_s
    if kept.size not in (183 * per_day, 184 * per_day):   # 184: leap-year Feb 29
        raise WeatherError(
            f"heating season not fully covered: {kept.size} records kept, "
            f"expected {183 * per_day}"
        )
    return WeatherSeries(
        kept,
        series.dry_bulb_c[mask],
        series.ghi_wm2[mask],
        series.wind_ms[mask],
        metadata=series.metadata,
        seasonal_view=True,
    )
