"""Transient multi-zone thermal simulation of hydronic panel heating.

Numerical scheme
----------------
Every massive surface is a 1-D finite-volume grid through its
construction.  All grids are advanced together by one backward-Euler step
per timestep: their tridiagonal systems are stacked into a single banded
matrix (blocks are uncoupled) and solved exactly, which is
unconditionally stable for any dt.  Faces are massless and folded into
the adjacent cell's equation (Robin elimination), so a face with film
coefficient h and half-cell conductance K contributes h_eff = h*K/(h+K)
against the zone air and passes the fraction K/(h+K) of any imposed face
flux (longwave, solar) into the cell.

Couplings between surfaces are explicit in time, each against the
previous step's state:

* longwave exchange inside each zone is linearised against the
  area-emissivity-weighted mean radiant temperature with
  h_r = 4*eps*sigma*Tbar^3; the per-zone net fluxes sum to zero by
  construction (any float residue is redistributed area-weighted);
* zone air is a single capacity integrated implicitly against the fresh
  face temperatures, infiltration and gains;
* each hydronic branch injects q = m_cp * eff * (T_in - T_node) at its
  pipe-plane node, with eff = 1 - exp(-UA/m_cp), evaluated at the node
  temperature of the previous step.

Windows are massless resistances solved algebraically each step; the
remainder of their U-value after removing the nominal 0.13 m2K/W inner
film connects the pane to outdoors.

Control is one hysteresis thermostat per system acting on the
volume-weighted mean air temperature: all branches of the loop open and
close together, like a single-circulator manifold installation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .model import BuildingModel, Construction, PanelSystem, PANEL_SYSTEM_SPECS
from .weather import WeatherSeries, heating_season_filter

SIGMA = 5.670374419e-8   # W/(m2 K4)
T0_K = 273.15


class NumericsError(RuntimeError):
    """Bad numerical configuration (singular system, non-positive dt...)."""


# ---------------------------------------------------------------------------
# Spatial discretisation
# ---------------------------------------------------------------------------

@dataclass
class NodeGrid:
    """Finite-volume grid of one construction, outside -> inside.

    ``capacity`` is J/(m2 K) per cell; ``conductance`` the W/(m2 K)
    between neighbouring cells (half-cell resistances in series).
    ``outer_half``/``inner_half`` connect the boundary faces to the first
    and last cell.  ``panel_node`` is the index of the zero-capacity node
    inserted at the pipe-plane interface, if any.
    """

    capacity: np.ndarray
    conductance: np.ndarray
    outer_half: float
    inner_half: float
    panel_node: int | None = None
    n_interior: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.capacity)


def discretize(construction: Construction, target_node_size_m: float,
               panel_interface: int | None = None) -> NodeGrid:
    """Split each layer into cells no thicker than the target size.

    A zero-capacity panel node is inserted at the requested layer
    interface; it stores nothing and simply joins the two half-cells so a
    source applied there splits by conductance, like a thin pipe plane.
    """
    if target_node_size_m <= 0:
        raise NumericsError("target node size must be positive")

    cell_dx = []          # thickness per cell
    cell_k = []           # conductivity per cell
    capacity = []
    boundaries = [0]      # cell index where each layer starts
    for layer in construction.layers:
        n = max(1, math.ceil(layer.thickness_m / target_node_size_m))
        dx = layer.thickness_m / n
        cell_dx.extend([dx] * n)
        cell_k.extend([layer.conductivity_w_mk] * n)
        capacity.extend([dx * layer.density_kg_m3 * layer.specific_heat_j_kgk] * n)
        boundaries.append(len(cell_dx))

    n_interior = len(cell_dx)
    half = [k / (dx / 2.0) for dx, k in zip(cell_dx, cell_k)]
    conductance = [
        1.0 / (1.0 / half[i] + 1.0 / half[i + 1]) for i in range(n_interior - 1)
    ]

    capacity = list(map(float, capacity))
    panel_node = None
    if panel_interface is not None:
        if not 1 <= panel_interface < len(construction.layers):
            raise NumericsError(
                f"panel interface {panel_interface} outside the construction"
            )
        cell = boundaries[panel_interface]      # first cell of the inner side
        # replace the inter-cell link with half-links to a massless node
        capacity.insert(cell, 0.0)
        conductance[cell - 1: cell] = [half[cell - 1], half[cell]]
        panel_node = cell

    return NodeGrid(
        capacity=np.array(capacity, dtype=float),
        conductance=np.array(conductance, dtype=float),
        outer_half=half[0],
        inner_half=half[-1],
        panel_node=panel_node,
        n_interior=n_interior,
    )


# ---------------------------------------------------------------------------
# Elemental operations (also used standalone in tests)
# ---------------------------------------------------------------------------

@dataclass
class BoundaryCondition:
    """One face of a grid: Robin film, fixed temperature, or adiabatic.

    ``q_flux`` is an imposed face flux (W/m2, positive into the face) on
    top of the film exchange.
    """

    kind: str = "robin"        # robin | dirichlet | adiabatic
    h: float = 8.0
    t_env: float = 20.0
    q_flux: float = 0.0

    def effective(self, half: float):
        """(h_eff, source) folded onto the boundary cell."""
        if self.kind == "adiabatic":
            return 0.0, 0.0
        if self.kind == "dirichlet":
            return half, half * self.t_env
        h_eff = self.h * half / (self.h + half)
        beta = half / (self.h + half)
        return h_eff, h_eff * self.t_env + beta * self.q_flux


def _assemble(grid: NodeGrid, temps, dt, outer: BoundaryCondition,
              inner: BoundaryCondition, source_w_m2: float = 0.0):
    n = grid.n_nodes
    cap_dt = grid.capacity / dt
    diag = cap_dt.copy()
    lower = np.zeros(n)
    upper = np.zeros(n)
    diag[:-1] += grid.conductance
    diag[1:] += grid.conductance
    upper[1:] = -grid.conductance
    lower[:-1] = -grid.conductance

    rhs = cap_dt * np.asarray(temps, dtype=float)
    h_out, src_out = outer.effective(grid.outer_half)
    h_in, src_in = inner.effective(grid.inner_half)
    diag[0] += h_out
    rhs[0] += src_out
    diag[-1] += h_in
    rhs[-1] += src_in
    if grid.panel_node is not None:
        rhs[grid.panel_node] += source_w_m2
    return lower, diag, upper, rhs


def conduction_step(grid: NodeGrid, temps, dt: float,
                    outer: BoundaryCondition, inner: BoundaryCondition,
                    source_w_m2: float = 0.0) -> np.ndarray:
    """One implicit step of the 1-D conduction equation on a grid.

    Backward Euler, tridiagonal solve; stable for any dt.  ``source_w_m2``
    is injected at the panel node (requires one).
    """
    if dt <= 0:
        raise NumericsError("dt must be positive")
    if source_w_m2 and grid.panel_node is None:
        raise NumericsError("grid has no panel node to source into")
    lower, diag, upper, rhs = _assemble(grid, temps, dt, outer, inner, source_w_m2)
    if np.any(diag <= 0.0):
        raise NumericsError("singular conduction system (zero conductance row)")
    ab = np.zeros((3, grid.n_nodes))
    ab[0, 1:] = upper[1:]
    ab[1] = diag
    ab[2, :-1] = lower[:-1]
    return solve_banded((1, 1), ab, rhs)


@dataclass
class WaterLoop:
    """One hydronic branch: supply temperature, flow and slab coupling."""

    t_in_c: float = 37.0
    mass_flow_kg_s: float = 0.1
    cp_j_kgk: float = 4186.0
    ua_w_k: float = 300.0
    on: bool = False

    @property
    def mcp(self) -> float:
        return self.mass_flow_kg_s * self.cp_j_kgk

    @property
    def effectiveness(self) -> float:
        return 1.0 - math.exp(-self.ua_w_k / self.mcp)


def panel_exchange(loop: WaterLoop, slab_node_c: float):
    """Heat delivered by the water to the pipe plane, and the return temp.

    Effectiveness model against the slab node: q = mcp * eff *
    (T_in - T_slab).  A slab hotter than the water yields q = 0, return
    at supply (the loop reports no extraction and control shuts it).
    """
    if loop.ua_w_k <= 0:
        raise NumericsError("loop UA must be positive")
    if loop.mass_flow_kg_s <= 0:
        raise NumericsError("loop flow must be positive while on")
    q = loop.mcp * loop.effectiveness * (loop.t_in_c - slab_node_c)
    if q <= 0.0:
        return 0.0, loop.t_in_c
    return q, loop.t_in_c - q / loop.mcp


def radiant_exchange(faces) -> np.ndarray:
    """Net longwave flux (W, positive into the face) for one enclosure.

    ``faces`` is a sequence of (area_m2, emissivity, face_temp_c).
    Exchange is linearised against the area-emissivity-weighted mean
    radiant temperature with h_r = 4*eps*sigma*Tbar^3, Tbar being the
    area-weighted mean absolute face temperature; the fluxes then sum to
    zero over the enclosure by construction and any floating-point
    residue is redistributed area-weighted.
    """
    if len(faces) < 2:
        raise NumericsError("radiant exchange needs at least two faces")
    area = np.array([f[0] for f in faces], dtype=float)
    eps = np.array([f[1] for f in faces], dtype=float)
    t_k = np.array([f[2] for f in faces], dtype=float) + T0_K

    t_bar = float((area * t_k).sum() / area.sum())
    t_mrt = float((area * eps * t_k).sum() / (area * eps).sum())
    h_r = 4.0 * eps * SIGMA * t_bar ** 3
    q = area * h_r * (t_mrt - t_k)
    q -= area / area.sum() * q.sum()
    return q


def zone_air_step(capacity_j_k: float, t_air_c: float, face_terms,
                  infiltration_w_k: float, t_out_c: float,
                  gains_w: float, dt: float) -> float:
    """Implicit update of a zone air node.

    ``face_terms`` is a sequence of (hA_w_k, t_face_c) convective
    couplings taken at their fresh face temperatures.
    """
    if dt <= 0:
        raise NumericsError("dt must be positive")
    ha = sum(h for h, _ in face_terms)
    num = capacity_j_k / dt * t_air_c + sum(h * t for h, t in face_terms)
    num += infiltration_w_k * t_out_c + gains_w
    den = capacity_j_k / dt + ha + infiltration_w_k
    return num / den


def thermostat(t_air_c: float, was_on: bool, setpoint_c: float = 20.0,
               deadband_k: float = 0.5) -> bool:
    """Hysteresis on/off: on below the band, off above it, hold inside."""
    if t_air_c < setpoint_c - deadband_k:
        return True
    if t_air_c > setpoint_c + deadband_k:
        return False
    return was_on


# ---------------------------------------------------------------------------
# Whole-building engine
# ---------------------------------------------------------------------------

FACE_FLOOR, FACE_CEILING, FACE_WALL = 0, 1, 2


@dataclass
class SeasonResult:
    """Aggregates and diagnostics of one season (or sizing) run."""

    system: str
    dt_s: float
    delivered_heat_j: float = 0.0
    gas_energy_j: float = 0.0
    electricity_j: float = 0.0
    pump_runtime_s: float = 0.0
    pump_power_w: float = 0.0
    peak_load_w: float = 0.0
    boiler_efficiency: float = 0.9
    room_heat_j: dict = field(default_factory=dict)
    monthly_gas_j: dict = field(default_factory=dict)
    monthly_electricity_kwh: dict = field(default_factory=dict)
    monthly_exergy_gj: dict = field(default_factory=dict)
    exergy_season_gj: float = 0.0
    january_zone_air_c: dict = field(default_factory=dict)
    january_wall_inner_c: dict = field(default_factory=dict)
    january_surface_inner_c: dict = field(default_factory=dict)
    zone_air_mean_c: dict = field(default_factory=dict)
    balance: dict = field(default_factory=dict)

    @property
    def season_months(self) -> int:
        return len(self.monthly_gas_j)

    def monthly_kwh_list(self):
        return [kwh for _, kwh in sorted(self.monthly_electricity_kwh.items())]


class SeasonEngine:
    """Vectorised fixed-step integrator for one building + panel system."""

    def __init__(self, model: BuildingModel, dt_s: float | None = None,
                 initial_c: float | None = None):
        self.model = model
        self.dt = float(dt_s if dt_s is not None else model.sim.dt_s)
        if self.dt <= 0:
            raise NumericsError("dt must be positive")
        sim = model.sim
        self.sim = sim
        self.t_init = float(
            initial_c if initial_c is not None else sim.initial_temperature_c
        )
        self._build()

    # -- construction of the static arrays ---------------------------------

    def _build(self):
        model = self.model
        sim = self.sim
        self.zone_ids = sorted(model.zones)
        zidx = {z: i for i, z in enumerate(self.zone_ids)}
        nz = len(self.zone_ids)

        self.surf_ids = sorted(
            s for s, surf in model.surfaces.items() if not surf.is_window
        )
        self.window_ids = sorted(
            s for s, surf in model.surfaces.items() if surf.is_window
        )

        grids = []
        offsets = []
        total = 0
        self.grid_by_surface = {}
        for sid in self.surf_ids:
            surf = model.surfaces[sid]
            con = model.constructions[surf.construction_id]
            grid = discretize(con, sim.node_size_m, surf.panel_interface)
            self.grid_by_surface[sid] = grid
            grids.append(grid)
            offsets.append(total)
            total += grid.n_nodes
        self.grids = grids
        self.n_nodes = total

        cap = np.concatenate([g.capacity for g in grids])
        self.cap_dt = cap / self.dt
        self.node_area = np.concatenate([
            np.full(g.n_nodes, model.surfaces[sid].area_m2)
            for g, sid in zip(grids, self.surf_ids)
        ])
        self.node_cap_total = cap * self.node_area

        # static banded structure: internal conduction links
        diag = self.cap_dt.copy()
        lower = np.zeros(total)
        upper = np.zeros(total)
        for g, off in zip(grids, offsets):
            n = g.n_nodes
            diag[off: off + n - 1] += g.conductance
            diag[off + 1: off + n] += g.conductance
            upper[off + 1: off + n] = -g.conductance
            lower[off: off + n - 1] = -g.conductance
        self.diag_base = diag
        self.ab = np.zeros((3, total))
        self.ab[0] = np.concatenate([[0.0], upper[1:]])
        self.ab[2] = np.concatenate([lower[:-1], [0.0]])

        # zone faces: (node, zone, area, eps, half-conductance, kind)
        zf_node, zf_zone, zf_area, zf_eps, zf_half, zf_kind, zf_surf = \
            [], [], [], [], [], [], []
        zf_inner = []
        # boundary faces folded as constants
        self.rhs_const = np.zeros(total)
        self.out_node, self.out_heff, self.out_area = [], [], []
        ground_rows, ground_heff, ground_area = [], [], []

        def face_kind(orientation, seen_as):
            if seen_as == "floor":
                return FACE_FLOOR
            if seen_as == "ceiling":
                return FACE_CEILING
            return FACE_WALL

        for gi, sid in enumerate(self.surf_ids):
            surf = model.surfaces[sid]
            grid = grids[gi]
            off = offsets[gi]
            inner_node = off + grid.n_nodes - 1
            outer_node = off

            # inner face always serves its own zone
            zf_node.append(inner_node)
            zf_zone.append(zidx[surf.zone_id])
            zf_area.append(surf.area_m2)
            zf_eps.append(surf.emissivity)
            zf_half.append(grid.inner_half)
            seen = surf.orientation if surf.orientation in ("floor", "ceiling") \
                else "wall"
            zf_kind.append(face_kind(surf.orientation, seen))
            zf_surf.append(gi)
            zf_inner.append(True)

            if surf.adjacent_zone is not None:
                # slab: outer face is the lower zone's ceiling
                zf_node.append(outer_node)
                zf_zone.append(zidx[surf.adjacent_zone])
                zf_area.append(surf.area_m2)
                zf_eps.append(surf.emissivity)
                zf_half.append(grid.outer_half)
                zf_kind.append(FACE_CEILING)
                zf_surf.append(gi)
                zf_inner.append(False)
            elif surf.boundary == "outdoor":
                h = sim.h_outdoor
                heff = h * grid.outer_half / (h + grid.outer_half)
                self.diag_base[outer_node] += heff
                self.out_node.append(outer_node)
                self.out_heff.append(heff)
                self.out_area.append(surf.area_m2)
            elif surf.boundary == "ground":
                heff = grid.outer_half
                self.diag_base[outer_node] += heff
                self.rhs_const[outer_node] += heff * model.plant.ground_c
                ground_rows.append(outer_node)
                ground_heff.append(heff)
                ground_area.append(surf.area_m2)
            # adiabatic: nothing

        self.zf_node = np.array(zf_node, dtype=int)
        self.zf_zone = np.array(zf_zone, dtype=int)
        self.zf_area = np.array(zf_area, dtype=float)
        self.zf_eps = np.array(zf_eps, dtype=float)
        self.zf_half = np.array(zf_half, dtype=float)
        self.zf_kind = np.array(zf_kind, dtype=int)
        self.zf_surf = np.array(zf_surf, dtype=int)
        self.zf_inner = np.array(zf_inner, dtype=bool)
        self.out_node = np.array(self.out_node, dtype=int)
        self.out_heff = np.array(self.out_heff, dtype=float)
        self.out_area = np.array(self.out_area, dtype=float)
        self.ground_node = np.array(ground_rows, dtype=int)
        self.ground_heff = np.array(ground_heff, dtype=float)
        self.ground_area = np.array(ground_area, dtype=float)

        # windows
        self.w_zone = np.array(
            [zidx[model.surfaces[w].zone_id] for w in self.window_ids], dtype=int
        )
        self.w_area = np.array(
            [model.surfaces[w].area_m2 for w in self.window_ids], dtype=float
        )
        self.w_eps = np.array(
            [model.surfaces[w].emissivity for w in self.window_ids], dtype=float
        )
        u = np.array([model.surfaces[w].u_value for w in self.window_ids], dtype=float)
        inner_r = np.clip(1.0 / u - 0.13, 1e-6, None)   # strip nominal inner film
        self.w_urest = 1.0 / inner_r
        self.zone_aperture = np.zeros(nz)
        for w in self.window_ids:
            surf = model.surfaces[w]
            self.zone_aperture[zidx[surf.zone_id]] += surf.area_m2 * surf.shgc
        self.zone_aperture *= sim.solar_orientation_factor

        # solar receiver: the floor face of each zone
        self.zone_floor_face = np.full(nz, -1, dtype=int)
        for i in range(len(self.zf_node)):
            gi = self.zf_surf[i]
            surf = model.surfaces[self.surf_ids[gi]]
            if surf.orientation == "floor" and self.zf_kind[i] == FACE_FLOOR:
                self.zone_floor_face[self.zf_zone[i]] = i

        # zones
        self.z_cap = np.array([
            model.zones[z].air_volume_m3 * sim.air_density_kg_m3 * sim.air_cp_j_kgk
            for z in self.zone_ids
        ])
        self.z_inf = np.array([
            model.zones[z].infiltration_ach / 3600.0 * model.zones[z].air_volume_m3
            * sim.air_density_kg_m3 * sim.air_cp_j_kgk
            for z in self.zone_ids
        ])
        self.z_gains = np.array(
            [model.zones[z].internal_gains_w for z in self.zone_ids]
        )
        self.z_vol = np.array(
            [model.zones[z].air_volume_m3 for z in self.zone_ids]
        )
        self.setpoint = float(np.average(
            [model.zones[z].setpoint_c for z in self.zone_ids],
            weights=self.z_vol,
        ))

        # hydronic branches
        plant = model.plant
        spec = model.panel_spec
        ua_per_m = plant.pipe_ua(model.panel_system)
        mcp_per_m = plant.flow_mcp_w_per_mk
        p_node, p_ua, p_mcp, p_area = [], [], [], []
        p_surf = []
        shares = []     # (zone index, fraction) per branch
        for gi, sid in enumerate(self.surf_ids):
            surf = model.surfaces[sid]
            if not surf.is_panel:
                continue
            grid = grids[gi]
            p_node.append(offsets[gi] + grid.panel_node)
            p_ua.append(ua_per_m * surf.pipe_length_m)
            p_mcp.append(mcp_per_m * surf.pipe_length_m)
            p_area.append(surf.area_m2)
            p_surf.append(gi)
            shares.append(self._room_shares(surf, grid, zidx))
        if not p_node:
            raise NumericsError("model has no panel surfaces")
        self.p_node = np.array(p_node, dtype=int)
        self.p_ua = np.array(p_ua, dtype=float)
        self.p_mcp = np.array(p_mcp, dtype=float)
        self.p_area = np.array(p_area, dtype=float)
        self.p_surf = np.array(p_surf, dtype=int)
        self.p_eff = 1.0 - np.exp(-self.p_ua / self.p_mcp)
        self.p_shares = shares
        self.t_supply = plant.supply_water_c
        ref_len = PANEL_SYSTEM_SPECS[PanelSystem.FLOOR].total_pipe_length_m
        self.pump_power_w = plant.pump_reference_w * spec.total_pipe_length_m / ref_len

        self.n_zones = nz
        self.n_zf = len(self.zf_node)
        self.reset()

    def _room_shares(self, surf, grid, zidx):
        """Split a branch's heat between the zones its faces serve.

        Shares follow the steady conductances from the pipe plane to each
        zone-facing side (outdoor/ground sides get no share).
        """
        res_in = 1.0 / grid.inner_half + sum(
            1.0 / c for c in grid.conductance[grid.panel_node:]
        ) if grid.panel_node is not None else 0.0
        res_out = 1.0 / grid.outer_half + sum(
            1.0 / c for c in grid.conductance[: grid.panel_node]
        )
        g_in = 1.0 / (res_in + 0.1)     # nominal inner film
        g_out = 1.0 / (res_out + 0.1)
        own = zidx[surf.zone_id]
        adj = surf.adjacent_zone
        if adj is None:
            return [(own, 1.0)]
        g_tot = g_in + g_out
        return [(own, g_in / g_tot), (zidx[adj], g_out / g_tot)]

    # -- state --------------------------------------------------------------

    def reset(self):
        self.T = np.full(self.n_nodes, self.t_init)
        self.t_air = np.full(self.n_zones, self.t_init)
        self.zf_T = np.full(self.n_zf, self.t_init)
        self.w_T = np.full(len(self.window_ids), self.t_init)
        sim = self.sim
        self.zf_h = np.where(
            self.zf_kind == FACE_FLOOR, sim.h_floor_cool,
            np.where(self.zf_kind == FACE_CEILING, sim.h_ceiling_cool, sim.h_wall),
        ).astype(float)
        self.loop_on = False
        self.q_branch = np.zeros(len(self.p_node))
        self.t_ret = np.full(len(self.p_node), self.t_supply)

    def snapshot_energy(self) -> float:
        """Total stored energy relative to 0 degC, J (fabric + air)."""
        return float(
            (self.node_cap_total * self.T).sum() + (self.z_cap * self.t_air).sum()
        )

    # -- one step ------------------------------------------------------------

    def step(self, t_out: float, ghi: float):
        """Advance dt; returns a dict of instantaneous flows for bookkeeping."""
        sim = self.sim
        dt = self.dt

        # longwave exchange per zone (faces + windows), zero-sum
        t_face_k = np.concatenate([self.zf_T, self.w_T]) + T0_K
        area = np.concatenate([self.zf_area, self.w_area])
        eps = np.concatenate([self.zf_eps, self.w_eps])
        zone = np.concatenate([self.zf_zone, self.w_zone])
        sum_a = np.bincount(zone, weights=area, minlength=self.n_zones)
        t_bar = np.bincount(zone, weights=area * t_face_k, minlength=self.n_zones) / sum_a
        sum_ae = np.bincount(zone, weights=area * eps, minlength=self.n_zones)
        t_mrt = np.bincount(zone, weights=area * eps * t_face_k,
                            minlength=self.n_zones) / sum_ae
        h_r = 4.0 * eps * SIGMA * t_bar[zone] ** 3
        q_rad = h_r * (t_mrt[zone] - t_face_k)
        resid = np.bincount(zone, weights=area * q_rad, minlength=self.n_zones) / sum_a
        q_rad = q_rad - resid[zone]
        q_rad_zf = q_rad[: self.n_zf]
        q_rad_w = q_rad[self.n_zf:]

        # solar deposited on zone floors
        transmitted = self.zone_aperture * ghi
        q_sol_zf = np.zeros(self.n_zf)
        ok = self.zone_floor_face >= 0
        q_sol_zf[self.zone_floor_face[ok]] = (
            transmitted[ok] / self.zf_area[self.zone_floor_face[ok]]
        )

        # control: one loop command from the volume-weighted mean air
        t_ctrl = float((self.z_vol * self.t_air).sum() / self.z_vol.sum())
        self.loop_on = thermostat(t_ctrl, self.loop_on, self.setpoint,
                                  sim.deadband_k)

        # hydronic injection at the pipe planes (previous node temps)
        if self.loop_on:
            q_b = self.p_mcp * self.p_eff * (self.t_supply - self.T[self.p_node])
            np.clip(q_b, 0.0, None, out=q_b)
            self.t_ret = np.where(
                q_b > 0.0, self.t_supply - q_b / self.p_mcp, self.t_supply
            )
        else:
            q_b = np.zeros(len(self.p_node))
            self.t_ret = np.full(len(self.p_node), self.t_supply)
        self.q_branch = q_b

        # windows: massless balance against old air, fresh radiant
        h_w = sim.h_window
        self.w_T = (
            h_w * self.t_air[self.w_zone] + q_rad_w + self.w_urest * t_out
        ) / (h_w + self.w_urest)

        # assemble and solve all conduction grids at once
        diag = self.diag_base.copy()
        rhs = self.cap_dt * self.T + self.rhs_const
        h_eff = self.zf_h * self.zf_half / (self.zf_h + self.zf_half)
        beta = self.zf_half / (self.zf_h + self.zf_half)
        np.add.at(diag, self.zf_node, h_eff)
        np.add.at(
            rhs, self.zf_node,
            h_eff * self.t_air[self.zf_zone] + beta * (q_rad_zf + q_sol_zf),
        )
        if self.out_node.size:
            np.add.at(rhs, self.out_node, self.out_heff * t_out)
        np.add.at(rhs, self.p_node, q_b / self.p_area)
        self.ab[1] = diag
        T_new = solve_banded((1, 1), self.ab, rhs)

        # fresh face temperatures (same algebra the matrix used)
        t_air_old = self.t_air.copy()
        self.zf_T = (
            self.zf_h * t_air_old[self.zf_zone] + q_rad_zf + q_sol_zf
            + self.zf_half * T_new[self.zf_node]
        ) / (self.zf_h + self.zf_half)

        # zone air: implicit against fresh faces, infiltration and gains
        conv = np.bincount(self.zf_zone, weights=self.zf_h * self.zf_area * self.zf_T,
                           minlength=self.n_zones)
        conv += np.bincount(self.w_zone, weights=h_w * self.w_area * self.w_T,
                            minlength=self.n_zones)
        ha = np.bincount(self.zf_zone, weights=self.zf_h * self.zf_area,
                         minlength=self.n_zones)
        ha += np.bincount(self.w_zone, weights=h_w * self.w_area,
                          minlength=self.n_zones)
        self.t_air = (
            self.z_cap / dt * self.t_air + conv + self.z_inf * t_out + self.z_gains
        ) / (self.z_cap / dt + ha + self.z_inf)

        # convection regime for the next step
        warm = self.zf_T > self.t_air[self.zf_zone]
        floor = self.zf_kind == FACE_FLOOR
        ceil = self.zf_kind == FACE_CEILING
        self.zf_h = np.where(
            floor, np.where(warm, sim.h_floor_heated, sim.h_floor_cool),
            np.where(
                ceil, np.where(warm, sim.h_ceiling_heated, sim.h_ceiling_cool),
                sim.h_wall,
            ),
        )
        self.T = T_new

        q_total = float(q_b.sum())
        out_loss = float(
            (self.out_heff * (T_new[self.out_node] - t_out) * self.out_area).sum()
        ) if self.out_node.size else 0.0
        ground_loss = float(
            (self.ground_heff * (T_new[self.ground_node] - self.model.plant.ground_c)
             * self.ground_area).sum()
        ) if self.ground_node.size else 0.0
        window_loss = float(
            (self.w_urest * (self.w_T - t_out) * self.w_area).sum()
        )
        infiltration_loss = float((self.z_inf * (self.t_air - t_out)).sum())

        return {
            "q_branch_w": q_b,
            "t_ret_c": self.t_ret,
            "delivered_w": q_total,
            "loop_on": self.loop_on,
            "solar_w": float(transmitted.sum()),
            "gains_w": float(self.z_gains.sum()),
            "envelope_loss_w": out_loss + ground_loss + window_loss,
            "infiltration_loss_w": infiltration_loss,
        }


def _month_of(stamp: np.datetime64) -> int:
    return int(stamp.astype("datetime64[M]").astype(int) % 12 + 1)


def run_heating_season(model: BuildingModel, weather: WeatherSeries,
                       dt_s: float | None = None) -> SeasonResult:
    """Simulate one heating season and collect the seasonal aggregates.

    The weather series must cover 15 October - 15 April; dt must divide
    the weather step.  Weather values are held constant within each
    record interval so refining dt never changes the forcing.
    """
    season = weather if weather.seasonal_view else heating_season_filter(weather)
    engine = SeasonEngine(model, dt_s)
    dt = engine.dt
    if season.step_s % int(round(dt)) != 0:
        raise NumericsError(
            f"dt {dt} s must divide the weather step {season.step_s} s"
        )
    sub = int(round(season.step_s / dt))

    # iterate in simulation order: start at 15 October (wrapped files)
    order = np.arange(len(season))
    diffs = np.diff(season.times).astype("timedelta64[s]").astype(int)
    seam = np.where(diffs != season.step_s)[0]
    if seam.size == 1:
        order = np.concatenate([order[seam[0] + 1:], order[: seam[0] + 1]])

    plant = model.plant
    eta = plant.boiler_efficiency
    result = SeasonResult(
        system=model.panel_system.value,
        dt_s=dt,
        pump_power_w=engine.pump_power_w,
        boiler_efficiency=eta,
    )
    zone_ids = engine.zone_ids
    n_rooms = len(zone_ids)
    room_heat = np.zeros(n_rooms)
    monthly_gas = {}
    monthly_ex = {}
    monthly_runtime = {}
    jan_air = np.zeros(n_rooms)
    jan_air_n = 0
    air_sum = np.zeros(n_rooms)
    air_n = 0
    jan_face = np.zeros(engine.n_zf)
    jan_face_n = 0

    solar_j = gains_j = envelope_j = infiltration_j = 0.0
    e0 = engine.snapshot_energy()

    for idx in order:
        t_out = float(season.dry_bulb_c[idx])
        ghi = float(season.ghi_wm2[idx])
        month = _month_of(season.times[idx])
        in_january = month == 1
        for _ in range(sub):
            flows = engine.step(t_out, ghi)
            q_tot = flows["delivered_w"]
            result.delivered_heat_j += q_tot * dt
            result.peak_load_w = max(result.peak_load_w, q_tot)
            solar_j += flows["solar_w"] * dt
            gains_j += flows["gains_w"] * dt
            envelope_j += flows["envelope_loss_w"] * dt
            infiltration_j += flows["infiltration_loss_w"] * dt

            gas_j = q_tot * dt / eta
            monthly_gas[month] = monthly_gas.get(month, 0.0) + gas_j
            if flows["loop_on"]:
                result.pump_runtime_s += dt
                monthly_runtime[month] = monthly_runtime.get(month, 0.0) + dt

            q_b = flows["q_branch_w"]
            if q_tot > 0.0:
                # per-room attribution and exergy of the step's gas energy
                t_mean_k = 0.5 * (engine.t_supply + flows["t_ret_c"]) + T0_K
                carnot = np.clip(1.0 - (t_out + T0_K) / t_mean_k, 0.0, None)
                ex_gj = 0.0
                for b, (q, cf) in enumerate(zip(q_b, carnot)):
                    if q <= 0.0:
                        continue
                    branch_gas_gj = q * dt / eta / 1e9
                    ex_gj += cf * branch_gas_gj
                    for zi, share in engine.p_shares[b]:
                        room_heat[zi] += q * dt * share
                monthly_ex[month] = monthly_ex.get(month, 0.0) + ex_gj

            air_sum += engine.t_air
            air_n += 1
            if in_january:
                jan_air += engine.t_air
                jan_air_n += 1
                jan_face += engine.zf_T
                jan_face_n += 1

    storage_j = engine.snapshot_energy() - e0
    result.gas_energy_j = result.delivered_heat_j / eta
    result.electricity_j = engine.pump_power_w * result.pump_runtime_s
    result.room_heat_j = {
        zone_ids[i]: float(room_heat[i]) for i in range(n_rooms)
    }
    result.monthly_gas_j = {m: float(v) for m, v in sorted(monthly_gas.items())}
    result.monthly_electricity_kwh = {
        m: engine.pump_power_w * monthly_runtime.get(m, 0.0) / 3.6e6
        for m in sorted(monthly_gas)
    }
    result.monthly_exergy_gj = {m: float(v) for m, v in sorted(monthly_ex.items())}
    result.exergy_season_gj = float(sum(monthly_ex.values()))

    if jan_air_n:
        result.january_zone_air_c = {
            zone_ids[i]: float(jan_air[i] / jan_air_n) for i in range(n_rooms)
        }
        mean_face = jan_face / jan_face_n
        for i in range(engine.n_zf):
            sid = engine.surf_ids[engine.zf_surf[i]]
            surf = model.surfaces[sid]
            key = sid if engine.zf_inner[i] else f"{sid}:lower"
            result.january_surface_inner_c[key] = float(mean_face[i])
            if surf.orientation.startswith("wall-") and surf.boundary == "outdoor":
                result.january_wall_inner_c[sid] = float(mean_face[i])
    if air_n:
        result.zone_air_mean_c = {
            zone_ids[i]: float(air_sum[i] / air_n) for i in range(n_rooms)
        }

    delivered = result.delivered_heat_j
    losses = envelope_j + infiltration_j
    residual = delivered + solar_j + gains_j - losses - storage_j
    result.balance = {
        "delivered_j": delivered,
        "solar_j": solar_j,
        "gains_j": gains_j,
        "losses_j": losses,
        "storage_j": storage_j,
        "residual_j": residual,
        "residual_frac": residual / delivered if delivered else 0.0,
    }
    return result
