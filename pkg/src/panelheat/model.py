"""Building description: materials, constructions, zones, surfaces, panels.

A building is loaded from a JSON configuration (schema shipped as
``data/config_schema.json``, version 1) into an immutable object graph.
Loading resolves every cross reference, places the hydronic panels of the
selected system on their host surfaces and distributes the system's total
pipe length over them, then checks every invariant; any breach aborts the
load with the full diagnostic list.

Sign/ordering conventions used throughout the package:

* construction layers are listed outside -> inside;
* a surface owned by zone A with boundary ``zone:B`` is a slab whose
  inner face serves A (as floor) and whose outer face serves B (as
  ceiling);
* ``panel_interface`` = i means the pipe plane lies between layers i-1
  and i of the construction (so 1 <= i < len(layers)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import jsonschema

from .metrics import FactorSet, TariffSchedule


class ConfigError(ValueError):
    """Raised on schema violations, dangling references or invariant breaches.

    ``diagnostics`` holds one human-readable entry per problem.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


class PanelSystem(Enum):
    FLOOR = "floor"
    WALL = "wall"
    CEILING = "ceiling"
    FLOOR_CEILING = "floor-ceiling"


@dataclass(frozen=True)
class PanelSystemSpec:
    """Installed totals of one panel system variant."""

    kind: PanelSystem
    total_panel_area_m2: float
    total_pipe_length_m: float


# Installed panel area and pipe length of the four system variants in the
# reference house.
PANEL_SYSTEM_SPECS = {
    PanelSystem.FLOOR: PanelSystemSpec(PanelSystem.FLOOR, 190.0, 1267.0),
    PanelSystem.WALL: PanelSystemSpec(PanelSystem.WALL, 210.0, 1007.0),
    PanelSystem.CEILING: PanelSystemSpec(PanelSystem.CEILING, 190.0, 1068.0),
    PanelSystem.FLOOR_CEILING: PanelSystemSpec(PanelSystem.FLOOR_CEILING, 95.0, 634.0),
}


@dataclass(frozen=True)
class MaterialLayer:
    name: str
    thickness_m: float
    conductivity_w_mk: float
    density_kg_m3: float
    specific_heat_j_kgk: float

    @property
    def resistance_m2k_w(self) -> float:
        return self.thickness_m / self.conductivity_w_mk

    @property
    def capacity_j_m2k(self) -> float:
        return self.thickness_m * self.density_kg_m3 * self.specific_heat_j_kgk


@dataclass(frozen=True)
class Construction:
    """Layered build-up, listed outside -> inside, plus surface film resistances."""

    name: str
    layers: tuple
    inside_film_r: float = 0.13
    outside_film_r: float = 0.04
    panel_interface: int | None = None


@dataclass
class Surface:
    id: str
    zone_id: str
    area_m2: float
    orientation: str          # floor | ceiling | wall-N/E/S/W | internal
    boundary: str             # outdoor | ground | adiabatic | zone:<id>
    construction_id: str | None = None
    u_value: float | None = None      # massless surface (window) when set
    emissivity: float = 0.9
    shgc: float = 0.0
    # set during panel placement
    panel_interface: int | None = None
    panel_area_m2: float = 0.0
    pipe_length_m: float = 0.0

    @property
    def is_window(self) -> bool:
        return self.u_value is not None

    @property
    def is_panel(self) -> bool:
        return self.panel_interface is not None

    @property
    def adjacent_zone(self) -> str | None:
        if self.boundary.startswith("zone:"):
            return self.boundary[5:]
        return None


@dataclass
class Zone:
    id: str
    name: str
    floor_area_m2: float
    air_volume_m3: float
    setpoint_c: float = 20.0
    infiltration_ach: float = 0.5
    internal_gains_w: float = 0.0
    storey: int = 1
    surface_ids: list = field(default_factory=list)


@dataclass(frozen=True)
class PlantParams:
    """Heat source and hydronic loop parameters.

    Loop flow scales with installed pipe: each metre of circuit carries
    ``flow_mcp_w_per_mk`` of capacity rate (m_dot * cp), which puts the
    house-mean design water temperature drop near 7 K across the four
    systems.  The circulator is rated at ``pump_reference_w`` for the
    longest install (the floor system's 1267 m) and scales with circuit
    length for the others.
    """

    supply_water_c: float = 37.0
    boiler_efficiency: float = 0.90
    pump_reference_w: float = 90.0
    flow_mcp_w_per_mk: float = 1.9
    design_day_c: float = -15.0
    ground_c: float = 10.0
    pipe_ua_w_per_mk: dict = field(
        default_factory=lambda: dict(DEFAULT_PIPE_UA_W_PER_MK)
    )

    def pipe_ua(self, system: PanelSystem) -> float:
        return self.pipe_ua_w_per_mk[system.value]


# Water-to-slab coupling per metre of embedded pipe.  Wet screed and
# concrete-core installs couple better than plaster-bedded wall and
# ceiling circuits.  Calibrated assumption, overridable in the config.
DEFAULT_PIPE_UA_W_PER_MK = {
    "floor": 3.5,
    "wall": 4.5,
    "ceiling": 4.0,
    "floor-ceiling": 3.4,
}


@dataclass(frozen=True)
class SimParams:
    """Numerical and exchange-coefficient settings for the season run."""

    dt_s: float = 600.0
    node_size_m: float = 0.01
    deadband_k: float = 0.5
    shgc: float = 0.7
    solar_orientation_factor: float = 1.3
    # convection coefficients by orientation and heat-flow direction, W/(m2 K)
    h_floor_heated: float = 4.0
    h_floor_cool: float = 1.0
    h_ceiling_heated: float = 1.0
    h_ceiling_cool: float = 4.0
    h_wall: float = 3.1
    h_window: float = 3.6
    h_outdoor: float = 25.0
    initial_temperature_c: float = 20.0
    air_density_kg_m3: float = 1.2
    air_cp_j_kgk: float = 1005.0


@dataclass(frozen=True)
class Location:
    name: str = "Kragujevac"
    latitude_deg: float = 44.0
    longitude_deg: float = 20.9167
    elevation_m: float = 209.0


@dataclass
class BuildingModel:
    """Fully linked, validated building ready to simulate.

    Immutable by convention after ``load_building`` returns; safe to share
    across concurrent scenario runs.
    """

    zones: dict
    surfaces: dict
    constructions: dict
    materials: dict
    panel_system: PanelSystem
    panel_spec: PanelSystemSpec
    plant: PlantParams
    tariffs: TariffSchedule
    factors: FactorSet
    sim: SimParams
    location: Location = field(default_factory=Location)
    reference_aggregates: bool = False

    def zone_surfaces(self, zone_id: str):
        """All surfaces with a face in the zone (own plus adjacent slabs)."""
        own = [self.surfaces[s] for s in self.zones[zone_id].surface_ids]
        adjacent = [
            s for s in self.surfaces.values() if s.adjacent_zone == zone_id
        ]
        return own + adjacent


def compute_u_value(construction: Construction) -> float:
    """Overall heat transfer coefficient in W/(m2 K), film to film."""
    resistance = construction.outside_film_r + construction.inside_film_r
    resistance += sum(layer.resistance_m2k_w for layer in construction.layers)
    return 1.0 / resistance


def load_schema() -> dict:
    with resources.files("panelheat.data").joinpath("config_schema.json").open() as fh:
        return json.load(fh)


def _schema_diagnostics(config: dict) -> list:
    validator = jsonschema.Draft202012Validator(load_schema())
    out = []
    for err in sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path)):
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"schema: {path}: {err.message}")
    return out


def _build_constructions(config, diagnostics):
    materials = {}
    for name, spec in config.get("materials", {}).items():
        materials[name] = spec
    constructions = {}
    for name, spec in config.get("constructions", {}).items():
        layers = []
        for i, layer in enumerate(spec["layers"]):
            mat = layer["material"]
            if mat not in materials:
                diagnostics.append(
                    f"construction '{name}' layer {i} references unknown material '{mat}'"
                )
                continue
            m = materials[mat]
            layers.append(
                MaterialLayer(
                    name=mat,
                    thickness_m=layer["thickness_m"],
                    conductivity_w_mk=m["conductivity_w_mk"],
                    density_kg_m3=m["density_kg_m3"],
                    specific_heat_j_kgk=m["specific_heat_j_kgk"],
                )
            )
        constructions[name] = Construction(
            name=name,
            layers=tuple(layers),
            inside_film_r=spec.get("inside_film_r", 0.13),
            outside_film_r=spec.get("outside_film_r", 0.04),
            panel_interface=spec.get("panel_interface"),
        )
    return materials, constructions


def _resolve_construction_ref(ref, system: PanelSystem):
    if ref is None or isinstance(ref, str):
        return ref
    return ref.get(system.value, ref.get("default"))


def _largest_remainder_close(parts, total):
    """Rescale so the parts sum to ``total`` exactly (last element absorbs)."""
    if not parts:
        return parts
    parts = list(parts)
    parts[-1] = total - math.fsum(parts[:-1])
    return parts


def _place_panels(model: BuildingModel, diagnostics):
    """Attach the selected system's panels to their host surfaces.

    Floor panels cover every floor surface (ground floors and slab tops),
    wall panels the opaque exterior walls, ceiling panels every surface a
    zone sees as ceiling (top ceilings and slab bottoms), and the
    floor-ceiling system the intermediate slabs only, feeding both zones
    from mid-slab.  Pipe length is distributed over the hosts in
    proportion to panel area and corrected to sum exactly.
    """
    system = model.panel_system
    hosts = []
    for s in model.surfaces.values():
        if s.is_window or s.orientation == "internal":
            continue
        if system is PanelSystem.FLOOR and s.orientation == "floor":
            hosts.append((s, s.area_m2))
        elif system is PanelSystem.WALL and s.orientation.startswith("wall-") \
                and s.boundary == "outdoor":
            hosts.append((s, s.area_m2))
        elif system is PanelSystem.CEILING and (
            s.orientation == "ceiling"
            or (s.orientation == "floor" and s.adjacent_zone is not None)
        ):
            hosts.append((s, s.area_m2))
        elif system is PanelSystem.FLOOR_CEILING and s.orientation == "floor" \
                and s.adjacent_zone is not None:
            hosts.append((s, s.area_m2))

    if not hosts:
        diagnostics.append(f"no host surfaces found for panel system '{system.value}'")
        return

    spec = model.panel_spec
    host_area = math.fsum(a for _, a in hosts)
    scale = spec.total_panel_area_m2 / host_area
    areas = _largest_remainder_close(
        [a * scale for _, a in hosts], spec.total_panel_area_m2
    )
    lengths = _largest_remainder_close(
        [a / spec.total_panel_area_m2 * spec.total_pipe_length_m for a in areas],
        spec.total_pipe_length_m,
    )
    for (surface, _), area, length in zip(hosts, areas, lengths):
        construction = model.constructions[surface.construction_id]
        if construction.panel_interface is None:
            diagnostics.append(
                f"surface '{surface.id}': construction '{construction.name}' "
                f"declares no panel_interface but hosts panels"
            )
            continue
        surface.panel_interface = construction.panel_interface
        surface.panel_area_m2 = area
        surface.pipe_length_m = length


def load_building(config, system: PanelSystem | None = None) -> BuildingModel:
    """Build and validate a :class:`BuildingModel` from a config document.

    ``config`` is a dict or a path to a JSON file.  ``system`` overrides
    the document's ``panel_system``.  Raises :class:`ConfigError` with the
    complete diagnostic list on any problem.
    """
    if not isinstance(config, dict):
        with open(config, "r", encoding="utf-8") as fh:
            config = json.load(fh)

    diagnostics = _schema_diagnostics(config)
    if diagnostics:
        raise ConfigError(diagnostics)

    if system is None:
        system = PanelSystem(config["panel_system"])
    panel_spec = PANEL_SYSTEM_SPECS[system]

    materials, constructions = _build_constructions(config, diagnostics)

    zones = {}
    for zone_id, spec in config.get("zones", {}).items():
        zones[zone_id] = Zone(
            id=zone_id,
            name=spec.get("name", zone_id),
            storey=spec.get("storey", 1),
            floor_area_m2=spec["floor_area_m2"],
            air_volume_m3=spec["air_volume_m3"],
            setpoint_c=spec.get("setpoint_c", 20.0),
            infiltration_ach=spec.get("infiltration_ach", 0.5),
            internal_gains_w=spec.get("internal_gains_w", 0.0),
        )

    surfaces = {}
    for sid, spec in config.get("surfaces", {}).items():
        construction_id = _resolve_construction_ref(spec.get("construction"), system)
        zone_id = spec["zone"]
        if zone_id not in zones:
            diagnostics.append(f"surface '{sid}' references unknown zone '{zone_id}'")
            continue
        if construction_id is not None and construction_id not in constructions:
            diagnostics.append(
                f"surface '{sid}' references unknown construction '{construction_id}'"
            )
            continue
        if construction_id is None and "u_value" not in spec:
            diagnostics.append(
                f"surface '{sid}' needs either a construction or a u_value"
            )
            continue
        surfaces[sid] = Surface(
            id=sid,
            zone_id=zone_id,
            area_m2=spec["area_m2"],
            orientation=spec["orientation"],
            boundary=spec.get("boundary", "outdoor"),
            construction_id=construction_id,
            u_value=spec.get("u_value"),
            emissivity=spec.get("emissivity", 0.84 if "u_value" in spec else 0.9),
            shgc=spec.get("shgc", 0.0),
        )

    for s in surfaces.values():
        adj = s.adjacent_zone
        if adj is not None and adj not in zones:
            diagnostics.append(
                f"surface '{s.id}' boundary references unknown zone '{adj}'"
            )
        elif s.boundary not in ("outdoor", "ground", "adiabatic") and adj is None:
            diagnostics.append(
                f"surface '{s.id}' has unknown boundary '{s.boundary}'"
            )
        zones[s.zone_id].surface_ids.append(s.id)

    plant_cfg = dict(config.get("plant", {}))
    ua = plant_cfg.pop("pipe_ua_w_per_mk", None)
    if isinstance(ua, (int, float)):
        ua = {k: float(ua) for k in DEFAULT_PIPE_UA_W_PER_MK}
    elif isinstance(ua, dict):
        ua = {**DEFAULT_PIPE_UA_W_PER_MK, **ua}
    else:
        ua = dict(DEFAULT_PIPE_UA_W_PER_MK)
    plant = PlantParams(pipe_ua_w_per_mk=ua, **plant_cfg)

    tariff_cfg = dict(config.get("tariffs", {}))
    if "electricity_blocks" in tariff_cfg:
        tariff_cfg["electricity_blocks"] = tuple(
            (float(b), float(p)) for b, p in tariff_cfg["electricity_blocks"]
        )
    tariffs = TariffSchedule(**tariff_cfg)
    factors = FactorSet(**config.get("factors", {}))
    sim = SimParams(**config.get("simulation", {}))
    location = Location(**config.get("location", {}))

    model = BuildingModel(
        zones=zones,
        surfaces=surfaces,
        constructions=constructions,
        materials=materials,
        panel_system=system,
        panel_spec=panel_spec,
        plant=plant,
        tariffs=tariffs,
        factors=factors,
        sim=sim,
        location=location,
        reference_aggregates=config.get("reference_aggregates", False),
    )

    if not diagnostics:
        _place_panels(model, diagnostics)
    diagnostics.extend(validate(model))
    if diagnostics:
        raise ConfigError(diagnostics)
    return model


# Published aggregates of the reference house; checked when the config
# sets ``reference_aggregates``.  The window total is the value consistent
# with the published glass-to-wall ratio of 7.32 %.
REFERENCE_AGGREGATES = {
    "exterior_wall_gross_m2": 264.0,
    "window_m2": 19.33,
    "glass_to_wall_pct": 7.32,
    "living_area_m2": 190.0,
    "heated_zones": 20,
}


def validate(model: BuildingModel) -> list:
    """Check every invariant; returns one diagnostic per breach (empty if valid)."""
    out = []

    for c in model.constructions.values():
        if not c.layers:
            out.append(f"construction '{c.name}' has no layers")
        for layer in c.layers:
            for attr in ("thickness_m", "conductivity_w_mk", "density_kg_m3",
                         "specific_heat_j_kgk"):
                if getattr(layer, attr) <= 0:
                    out.append(
                        f"construction '{c.name}' layer '{layer.name}': "
                        f"{attr} must be positive"
                    )
        if c.inside_film_r < 0 or c.outside_film_r < 0:
            out.append(f"construction '{c.name}': film resistances must be >= 0")
        if c.panel_interface is not None and not (
            1 <= c.panel_interface < max(len(c.layers), 1)
        ):
            out.append(
                f"construction '{c.name}': panel_interface {c.panel_interface} "
                f"not a valid layer interface"
            )

    for z in model.zones.values():
        if z.air_volume_m3 <= 0:
            out.append(f"zone '{z.id}': air volume must be positive")
        if z.floor_area_m2 <= 0:
            out.append(f"zone '{z.id}': floor area must be positive")
        if not 0.0 <= z.infiltration_ach <= 5.0:
            out.append(f"zone '{z.id}': infiltration {z.infiltration_ach} outside [0, 5] 1/h")

    for s in model.surfaces.values():
        if s.area_m2 <= 0:
            out.append(f"surface '{s.id}': area must be positive")
        if not 0.0 < s.emissivity <= 1.0:
            out.append(f"surface '{s.id}': emissivity {s.emissivity} outside (0, 1]")
        if s.is_window and s.u_value <= 0:
            out.append(f"surface '{s.id}': u_value must be positive")

    plant = model.plant
    if not 0.0 < plant.boiler_efficiency <= 1.0:
        out.append(f"boiler efficiency {plant.boiler_efficiency} outside (0, 1]")
    if plant.pump_reference_w <= 0:
        out.append("pump reference power must be positive")
    if any(v <= 0 for v in plant.pipe_ua_w_per_mk.values()):
        out.append("pipe UA per metre must be positive")

    # panel totals must reproduce the installed system exactly
    panel_area = math.fsum(s.panel_area_m2 for s in model.surfaces.values())
    pipe_length = math.fsum(s.pipe_length_m for s in model.surfaces.values())
    spec = model.panel_spec
    if abs(panel_area - spec.total_panel_area_m2) > 1e-6:
        out.append(
            f"panel area {panel_area:.6f} m2 does not match the "
            f"{spec.kind.value} system total {spec.total_panel_area_m2} m2"
        )
    if abs(pipe_length - spec.total_pipe_length_m) > 1e-6:
        out.append(
            f"pipe length {pipe_length:.6f} m does not match the "
            f"{spec.kind.value} system total {spec.total_pipe_length_m} m"
        )

    if model.reference_aggregates:
        agg = REFERENCE_AGGREGATES
        window = math.fsum(
            s.area_m2 for s in model.surfaces.values() if s.is_window
        )
        wall_opaque = math.fsum(
            s.area_m2 for s in model.surfaces.values()
            if s.orientation.startswith("wall-") and s.boundary == "outdoor"
            and not s.is_window
        )
        wall_gross = wall_opaque + window
        living = math.fsum(z.floor_area_m2 for z in model.zones.values())
        checks = [
            ("exterior wall gross area", wall_gross, agg["exterior_wall_gross_m2"], 0.5),
            ("window area", window, agg["window_m2"], 0.25),
            ("glass-to-wall ratio %", 100.0 * window / wall_gross if wall_gross else 0.0,
             agg["glass_to_wall_pct"], 0.1),
            ("living area", living, agg["living_area_m2"], 0.5),
        ]
        for label, actual, want, tol in checks:
            if abs(actual - want) > tol:
                out.append(
                    f"aggregate mismatch: {label} {actual:.2f} != {want} (tol {tol})"
                )
        if len(model.zones) != agg["heated_zones"]:
            out.append(
                f"aggregate mismatch: {len(model.zones)} heated zones != "
                f"{agg['heated_zones']}"
            )
        storeys = {z.storey for z in model.zones.values()}
        if len(storeys) != 2:
            out.append(f"aggregate mismatch: zones span {len(storeys)} storeys != 2")

    return out
