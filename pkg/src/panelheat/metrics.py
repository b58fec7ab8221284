"""Seasonal performance metrics for gas-fired hydronic heating.

Converts a season's gas and electricity consumption into four comparison
figures:

* primary energy      E_sys = E_gas + R * E_el            [GJ]
* consumed exergy     Ex    = sum_i (1 - To/Tm_i) * E_i   [GJ]
* CO2 emission        S     = g_gas * E_gas + g_el * E_el [kg]
* operating cost      block-tariff electricity plus metered gas [EUR]

Factors default to the Serbian energy mix and May-2011 retail tariffs:
electricity carries a primary-energy factor R = 3.61 and is billed in
monthly blocks (green up to 350 kWh, blue up to 1600 kWh, red above),
gas is billed per m3 (lower heating value 33338 kJ/m3) with a quantity
correction factor and a fixed monthly meter fee.

Exergy uses the Carnot factor of the water loop against the outdoor
reference temperature; intervals where the mean water temperature does
not exceed the reference contribute zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GJ_PER_KWH = 0.0036


@dataclass(frozen=True)
class FactorSet:
    """Primary-energy, emission and fuel-property factors."""

    primary_energy_electricity: float = 3.61   # GJ primary per GJ delivered
    co2_gas_kg_per_gj: float = 56.1
    co2_electricity_kg_per_gj: float = 206.53
    gas_heating_value_kj_per_m3: float = 33338.0

    def __post_init__(self):
        for name in (
            "primary_energy_electricity",
            "co2_gas_kg_per_gj",
            "co2_electricity_kg_per_gj",
            "gas_heating_value_kj_per_m3",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def gas_m3_per_gj(self) -> float:
        return 1.0e6 / self.gas_heating_value_kj_per_m3


@dataclass(frozen=True)
class TariffSchedule:
    """Retail energy prices: monthly block tariff for electricity, metered gas.

    ``electricity_blocks`` lists (upper_bound_kwh, price_eur_per_kwh) with
    strictly increasing bounds; consumption above the last bound is billed
    at ``electricity_overflow_price``.
    """

    electricity_blocks: tuple = ((350.0, 0.059), (1600.0, 0.089))
    electricity_overflow_price: float = 0.177
    gas_price_eur_per_m3: float = 0.41
    gas_quantity_correction: float = 1.068
    gas_meter_fee_eur_per_month: float = 0.012

    def __post_init__(self):
        bounds = [b for b, _ in self.electricity_blocks]
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ValueError("electricity block bounds must be strictly increasing")
        prices = [p for _, p in self.electricity_blocks] + [
            self.electricity_overflow_price,
            self.gas_price_eur_per_m3,
            self.gas_meter_fee_eur_per_month,
        ]
        if any(p < 0 for p in prices):
            raise ValueError("prices must be non-negative")

    def electricity_cost_month(self, kwh: float) -> float:
        """Bill one month of consumption through the marginal blocks."""
        if kwh < 0:
            raise ValueError("monthly consumption must be non-negative")
        cost = 0.0
        lower = 0.0
        for upper, price in self.electricity_blocks:
            if kwh <= lower:
                break
            cost += (min(kwh, upper) - lower) * price
            lower = upper
        if kwh > lower:
            cost += (kwh - lower) * self.electricity_overflow_price
        return cost


@dataclass
class ExergyInputs:
    """Per-room gas energy and water-loop temperatures over evaluation intervals.

    Arrays are shaped (n_rooms, n_intervals); ``reference_k`` holds one
    outdoor reference temperature per interval.  A single season total per
    room is the n_intervals = 1 case.
    """

    gas_energy_gj: np.ndarray
    supply_k: np.ndarray
    return_k: np.ndarray
    reference_k: np.ndarray

    def __post_init__(self):
        self.gas_energy_gj = np.atleast_2d(np.asarray(self.gas_energy_gj, dtype=float))
        shape = self.gas_energy_gj.shape
        self.supply_k = np.broadcast_to(np.asarray(self.supply_k, dtype=float), shape)
        self.return_k = np.broadcast_to(np.asarray(self.return_k, dtype=float), shape)
        self.reference_k = np.broadcast_to(
            np.asarray(self.reference_k, dtype=float), (shape[1],)
        )


@dataclass
class MetricsReport:
    """Collected outputs of one system scenario."""

    gas_energy_gj: float
    electricity_gj: float
    primary_energy_gj: float
    exergy_january_gj: float
    co2_kg: float
    cost_eur: float
    monthly: dict = field(default_factory=dict)


def primary_energy(gas_gj: float, electricity_gj: float, factors: FactorSet) -> float:
    """Primary energy of one season: gas plus factored electricity, in GJ."""
    if gas_gj < 0 or electricity_gj < 0:
        raise ValueError("energy inputs must be non-negative")
    return gas_gj + factors.primary_energy_electricity * electricity_gj


def co2_emission(gas_gj: float, electricity_gj: float, factors: FactorSet) -> float:
    """CO2 emission in kg from final gas and electricity consumption."""
    if gas_gj < 0 or electricity_gj < 0:
        raise ValueError("energy inputs must be non-negative")
    return (
        factors.co2_gas_kg_per_gj * gas_gj
        + factors.co2_electricity_kg_per_gj * electricity_gj
    )


def exergy(inputs: ExergyInputs) -> float:
    """Consumed exergy in GJ.

    Each (room, interval) term weights the room's gas energy by the Carnot
    factor 1 - To / Tm with Tm the mean of supply and return water
    temperature.  Terms with Tm <= To are clamped to zero so mild-weather
    intervals cannot produce negative exergy.
    """
    if np.any(inputs.supply_k <= 0) or np.any(inputs.return_k <= 0):
        raise ValueError("absolute water temperatures must be positive")
    if np.any(inputs.reference_k <= 0):
        raise ValueError("reference temperatures must be positive")
    mean_water = 0.5 * (inputs.supply_k + inputs.return_k)
    carnot = np.clip(1.0 - inputs.reference_k[np.newaxis, :] / mean_water, 0.0, None)
    return float(np.sum(carnot * inputs.gas_energy_gj))


def operating_cost(
    gas_gj: float,
    monthly_electricity_kwh,
    season_months: int,
    tariffs: TariffSchedule,
    factors: FactorSet,
    strict_combined_fee: bool = False,
) -> float:
    """Season operating cost in EUR.

    Gas is billed per corrected m3 (quantity correction applied to the
    metered volume) plus the fixed meter fee per calendar month of the
    season.  Electricity is billed month by month through the marginal
    blocks of the tariff schedule.

    ``strict_combined_fee`` switches to the alternative formula in which
    the quantity correction and the meter fee multiply the electricity
    term instead of the gas term:

        C = f_gas * E_gas + k * m1 * f_el * E_el

    with both specific prices converted to EUR/GJ (electricity at the
    first-block rate).  Retained for comparison only.
    """
    if gas_gj < 0:
        raise ValueError("gas energy must be non-negative")
    if season_months < 0:
        raise ValueError("season month count must be non-negative")
    monthly = [float(m) for m in monthly_electricity_kwh]
    if any(m < 0 for m in monthly):
        raise ValueError("monthly consumption must be non-negative")

    if strict_combined_fee:
        gas_price_per_gj = tariffs.gas_price_eur_per_m3 * factors.gas_m3_per_gj
        el_price_per_gj = tariffs.electricity_blocks[0][1] / GJ_PER_KWH
        electricity_gj = sum(monthly) * GJ_PER_KWH
        return (
            gas_price_per_gj * gas_gj
            + tariffs.gas_quantity_correction
            * tariffs.gas_meter_fee_eur_per_month
            * el_price_per_gj
            * electricity_gj
        )

    gas_volume_m3 = gas_gj * factors.gas_m3_per_gj
    gas_cost = (
        tariffs.gas_quantity_correction * tariffs.gas_price_eur_per_m3 * gas_volume_m3
        + tariffs.gas_meter_fee_eur_per_month * season_months
    )
    electricity_cost = sum(tariffs.electricity_cost_month(m) for m in monthly)
    return gas_cost + electricity_cost


def apportion_gas(room_heat_j, gas_total_gj: float):
    """Split the season's gas energy over rooms in proportion to delivered heat.

    The final element absorbs the floating-point remainder so the parts
    sum to the total exactly.
    """
    heat = np.asarray(room_heat_j, dtype=float)
    if np.any(heat < 0):
        raise ValueError("room heat must be non-negative")
    total = float(heat.sum())
    if total <= 0:
        raise ValueError("cannot apportion gas energy: no heat was delivered")
    parts = gas_total_gj * heat / total
    parts[-1] = gas_total_gj - float(parts[:-1].sum())
    return parts
