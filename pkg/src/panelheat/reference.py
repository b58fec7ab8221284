"""Reference residential model: a 190 m2 two-storey family house.

Room-level geometry is a documented fixed partition chosen so the
aggregates match the published house data: 190 m2 living area over two
storeys, 264 m2 gross exterior wall, 19.3 m2 of glazing (7.32 % of the
walls), envelope U-value 0.57 W/(m2 K), windows 2.72 W/(m2 K).

Each storey holds ten rooms; upper rooms sit directly above their ground
partners, sharing the intermediate slab.  Wall and window areas are
distributed in proportion to room area, with a fixed per-room window
multiplier so rooms differ mildly in envelope share (corner rooms run a
little colder, matching the spread a real house shows).

Intermediate-slab build-ups differ per heating system, as the installs
would: underfloor circuits lie on an insulation layer below the screed,
ceiling circuits behind the soffit plaster under an insulation layer, and
the two-sided system is embedded mid-slab in bare concrete.
"""

from __future__ import annotations

import json
from importlib import resources

STOREY_HEIGHT_M = 2.6

# room floor areas per storey, m2 (sum 95.0)
ROOM_AREAS = [14.0, 12.5, 11.0, 10.5, 9.5, 9.0, 8.5, 7.5, 7.0, 5.5]

# per-room window weighting (larger = more glazed for its size)
WINDOW_WEIGHTS = [1.3, 1.2, 1.1, 1.0, 1.0, 1.0, 0.9, 0.9, 0.8, 0.8]

WALL_GROSS_TOTAL_M2 = 264.0
WINDOW_TOTAL_M2 = 19.33          # 7.32 % of the gross exterior wall
LIVING_AREA_M2 = 190.0

WINDOW_U = 2.72
WINDOW_SHGC = 0.7

INTERNAL_MASS_RATIO = 1.8        # partition/furnishing area per m2 of floor
INTERNAL_GAINS_W_PER_M2 = 5.8    # occupants plus appliances, whole-house mean

ORIENTATION_CYCLE = ["wall-S", "wall-E", "wall-N", "wall-W"]

MATERIALS = {
    "porous_brick":    {"conductivity_w_mk": 0.62, "density_kg_m3": 1400, "specific_heat_j_kgk": 920},
    "eps_board":       {"conductivity_w_mk": 0.040, "density_kg_m3": 20, "specific_heat_j_kgk": 1450},
    "lime_mortar":     {"conductivity_w_mk": 0.70, "density_kg_m3": 1600, "specific_heat_j_kgk": 840},
    "concrete":        {"conductivity_w_mk": 1.40, "density_kg_m3": 2200, "specific_heat_j_kgk": 880},
    "screed":          {"conductivity_w_mk": 1.20, "density_kg_m3": 2000, "specific_heat_j_kgk": 840},
    "pir_insulation":  {"conductivity_w_mk": 0.030, "density_kg_m3": 35, "specific_heat_j_kgk": 1400},
    "mineral_wool":    {"conductivity_w_mk": 0.040, "density_kg_m3": 60, "specific_heat_j_kgk": 1030},
    "interior_plaster": {"conductivity_w_mk": 0.70, "density_kg_m3": 1400, "specific_heat_j_kgk": 840},
    "partition_brick": {"conductivity_w_mk": 0.47, "density_kg_m3": 1200, "specific_heat_j_kgk": 920},
    "gypsum_board":    {"conductivity_w_mk": 0.25, "density_kg_m3": 900, "specific_heat_j_kgk": 1000},
}

CONSTRUCTIONS = {
    # brick / insulation / mortar envelope, U = 0.57 with 0.04 + 0.13 films
    "exterior_wall": {
        "layers": [
            {"material": "porous_brick", "thickness_m": 0.19},
            {"material": "eps_board", "thickness_m": 0.05},
            {"material": "lime_mortar", "thickness_m": 0.02},
        ],
        "inside_film_r": 0.13,
        "outside_film_r": 0.04,
        "panel_interface": 2,
    },
    "ground_floor": {
        "layers": [
            {"material": "concrete", "thickness_m": 0.10},
            {"material": "pir_insulation", "thickness_m": 0.025},
            {"material": "screed", "thickness_m": 0.065},
        ],
        "inside_film_r": 0.17,
        "outside_film_r": 0.0,
        "panel_interface": 2,
    },
    "slab_plain": {
        "layers": [
            {"material": "interior_plaster", "thickness_m": 0.015},
            {"material": "concrete", "thickness_m": 0.14},
            {"material": "screed", "thickness_m": 0.05},
        ],
        "inside_film_r": 0.17,
        "outside_film_r": 0.10,
    },
    "slab_floor_pipes": {
        "layers": [
            {"material": "interior_plaster", "thickness_m": 0.015},
            {"material": "concrete", "thickness_m": 0.12},
            {"material": "pir_insulation", "thickness_m": 0.03},
            {"material": "screed", "thickness_m": 0.05},
        ],
        "inside_film_r": 0.17,
        "outside_film_r": 0.10,
        "panel_interface": 3,
    },
    "slab_ceiling_pipes": {
        "layers": [
            {"material": "interior_plaster", "thickness_m": 0.015},
            {"material": "pir_insulation", "thickness_m": 0.025},
            {"material": "concrete", "thickness_m": 0.12},
            {"material": "screed", "thickness_m": 0.05},
        ],
        "inside_film_r": 0.17,
        "outside_film_r": 0.10,
        "panel_interface": 1,
    },
    "slab_core_pipes": {
        "layers": [
            {"material": "interior_plaster", "thickness_m": 0.015},
            {"material": "concrete", "thickness_m": 0.07},
            {"material": "concrete", "thickness_m": 0.07},
            {"material": "screed", "thickness_m": 0.05},
        ],
        "inside_film_r": 0.17,
        "outside_film_r": 0.10,
        "panel_interface": 2,
    },
    "top_ceiling": {
        "layers": [
            {"material": "mineral_wool", "thickness_m": 0.12},
            {"material": "concrete", "thickness_m": 0.12},
            {"material": "interior_plaster", "thickness_m": 0.015},
        ],
        "inside_film_r": 0.10,
        "outside_film_r": 0.04,
        "panel_interface": 2,
    },
    "internal_partition": {
        "layers": [
            {"material": "partition_brick", "thickness_m": 0.08},
            {"material": "gypsum_board", "thickness_m": 0.0125},
        ],
        "inside_film_r": 0.13,
        "outside_film_r": 0.13,
    },
}

SLAB_BY_SYSTEM = {
    "default": "slab_plain",
    "floor": "slab_floor_pipes",
    "ceiling": "slab_ceiling_pipes",
    "floor-ceiling": "slab_core_pipes",
}

PLANT = {
    "supply_water_c": 37.0,
    "boiler_efficiency": 0.90,
    "pump_reference_w": 90.0,
    "flow_mcp_w_per_mk": 1.9,
    "design_day_c": -15.0,
    "ground_c": 10.0,
    "pipe_ua_w_per_mk": {
        "floor": 3.5,
        "wall": 4.5,
        "ceiling": 4.0,
        "floor-ceiling": 3.4,
    },
}

SIMULATION = {
    "dt_s": 600.0,
    "node_size_m": 0.01,
    "deadband_k": 0.5,
    "shgc": WINDOW_SHGC,
    "solar_orientation_factor": 1.3,
}


def _r6(x: float) -> float:
    return round(x, 6)


def reference_config(panel_system: str = "floor") -> dict:
    """Build the reference-house configuration document."""
    weight_sum = sum(a * w for a, w in zip(ROOM_AREAS, WINDOW_WEIGHTS))

    zones = {}
    surfaces = {}
    for storey, prefix in ((1, "g"), (2, "u")):
        for k, (area, w) in enumerate(zip(ROOM_AREAS, WINDOW_WEIGHTS), start=1):
            zid = f"{prefix}{k:02d}"
            zones[zid] = {
                "name": f"{'Ground' if storey == 1 else 'Upper'} room {k}",
                "storey": storey,
                "floor_area_m2": area,
                "air_volume_m3": _r6(area * STOREY_HEIGHT_M),
                "setpoint_c": 20.0,
                "infiltration_ach": 0.5,
                "internal_gains_w": _r6(INTERNAL_GAINS_W_PER_M2 * area),
            }
            wall_gross = WALL_GROSS_TOTAL_M2 / 2.0 * area / sum(ROOM_AREAS)
            window = WINDOW_TOTAL_M2 / 2.0 * (area * w) / weight_sum
            facing = ORIENTATION_CYCLE[(k - 1) % 4]
            surfaces[f"wall_{zid}"] = {
                "zone": zid,
                "area_m2": _r6(wall_gross - window),
                "orientation": facing,
                "boundary": "outdoor",
                "construction": "exterior_wall",
                "emissivity": 0.9,
            }
            surfaces[f"window_{zid}"] = {
                "zone": zid,
                "area_m2": _r6(window),
                "orientation": facing,
                "boundary": "outdoor",
                "u_value": WINDOW_U,
                "shgc": WINDOW_SHGC,
                "emissivity": 0.84,
            }
            surfaces[f"mass_{zid}"] = {
                "zone": zid,
                "area_m2": _r6(INTERNAL_MASS_RATIO * area),
                "orientation": "internal",
                "boundary": "adiabatic",
                "construction": "internal_partition",
                "emissivity": 0.9,
            }
            if storey == 1:
                surfaces[f"floor_{zid}"] = {
                    "zone": zid,
                    "area_m2": area,
                    "orientation": "floor",
                    "boundary": "ground",
                    "construction": "ground_floor",
                    "emissivity": 0.9,
                }
            else:
                surfaces[f"slab_{k:02d}"] = {
                    "zone": zid,
                    "area_m2": area,
                    "orientation": "floor",
                    "boundary": f"zone:g{k:02d}",
                    "construction": dict(SLAB_BY_SYSTEM),
                    "emissivity": 0.9,
                }
                surfaces[f"ceiling_{zid}"] = {
                    "zone": zid,
                    "area_m2": area,
                    "orientation": "ceiling",
                    "boundary": "outdoor",
                    "construction": "top_ceiling",
                    "emissivity": 0.9,
                }

    return {
        "schema_version": 1,
        "location": {
            "name": "Kragujevac",
            "latitude_deg": 44.0,
            "longitude_deg": 20.9167,
            "elevation_m": 209.0,
        },
        "reference_aggregates": True,
        "materials": MATERIALS,
        "constructions": CONSTRUCTIONS,
        "zones": zones,
        "surfaces": surfaces,
        "panel_system": panel_system,
        "plant": PLANT,
        "tariffs": {},
        "factors": {},
        "simulation": SIMULATION,
    }


def reference_config_path():
    """Path of the packaged reference configuration JSON."""
    return resources.files("panelheat.data").joinpath("reference_house.json")


def write_reference_config(path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(reference_config(), fh, indent=2, sort_keys=True)
        fh.write("\n")
