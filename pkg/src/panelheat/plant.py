"""Heat source conversion and sizing: gas boiler plus circulation pump.

The boiler is a classic non-condensing unit with a constant efficiency on
the lower-heating-value basis (no part-load curve); fuel energy is simply
delivered heat divided by efficiency.  The circulation pump draws a fixed
electrical power whenever its loop runs.

Sizing repeats a cold, sunless design day until the daily cycle is
periodic and takes the largest instantaneous water-side heat delivery
observed, which includes the synchronized burst when every circuit opens
on a cold fabric.  That bounds anything the milder season can demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import BuildingModel
from .weather import DesignDay


class SizingError(RuntimeError):
    """The design-day simulation failed to reach a periodic state."""


@dataclass
class Boiler:
    """Non-condensing gas boiler, efficiency on the LHV basis."""

    efficiency: float = 0.90
    nominal_power_kw: float | None = None

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"boiler efficiency {self.efficiency} outside (0, 1]")


@dataclass
class Pump:
    """Wet-rotor circulator: fixed draw while running."""

    electrical_power_w: float = 90.0
    runtime_s: float = 0.0

    def __post_init__(self):
        if self.electrical_power_w <= 0:
            raise ValueError("pump power must be positive")


def gas_energy(delivered_heat_j: float, boiler: Boiler) -> float:
    """Fuel energy (J) needed to deliver the given heat."""
    if delivered_heat_j < 0:
        raise ValueError("delivered heat must be non-negative")
    return delivered_heat_j / boiler.efficiency


def pump_electricity(runtime_s: float, pump: Pump) -> float:
    """Electricity (J) drawn over the accumulated runtime."""
    if runtime_s < 0:
        raise ValueError("runtime must be non-negative")
    return pump.electrical_power_w * runtime_s


def size_boiler(model: BuildingModel, design_day: DesignDay,
                dt_s: float | None = None, max_cycles: int = 30) -> float:
    """Nominal boiler power in kW from a steady-periodic design-day run.

    The building starts uniformly at the thermostat's lower band edge and
    repeats the design day until the cycle peak and daily delivery are
    periodic (0.1 % / 0.5 %).  Nominal power is the largest delivery seen
    across all cycles, safety factor 1.0, rounded up to 0.01 kW.
    """
    from .simulate import SeasonEngine   # deferred: simulate imports this module's siblings

    sim = model.sim
    start_c = sim.initial_temperature_c - sim.deadband_k
    mean_set = sum(z.setpoint_c for z in model.zones.values()) / len(model.zones)
    start_c = min(start_c, mean_set - sim.deadband_k)
    engine = SeasonEngine(model, dt_s, initial_c=start_c)
    steps_per_day = int(round(design_day.duration_h * 3600.0 / engine.dt))
    t_out = design_day.dry_bulb_c

    overall_peak = 0.0
    prev_peak = None
    prev_delivered = None
    for _ in range(max_cycles):
        peak = 0.0
        delivered = 0.0
        for _ in range(steps_per_day):
            flows = engine.step(t_out, 0.0)
            peak = max(peak, flows["delivered_w"])
            delivered += flows["delivered_w"] * engine.dt
        overall_peak = max(overall_peak, peak)
        if prev_peak is not None:
            peak_ok = abs(peak - prev_peak) <= max(1e-3 * overall_peak, 1.0)
            energy_ok = abs(delivered - prev_delivered) <= max(
                5e-3 * abs(delivered), 1.0
            )
            if peak_ok and energy_ok:
                return math.ceil(overall_peak / 10.0) / 100.0
        prev_peak, prev_delivered = peak, delivered
    raise SizingError(
        f"design day did not reach a periodic state in {max_cycles} cycles"
    )
