"""Carrier import supply chains as data, and their LP formulation.

A pathway is a small directed graph: renewable generators feed an export-side
electricity bus; converters turn electricity (plus water, CO2 or N2 where the
chemistry needs them) into a transportable carrier; a ship or pipeline link
moves it; import-side units convert back to gaseous hydrogen serving a steady
offtake.  The system is islanded: there is no grid connection on either side,
so every MWh consumed anywhere must come from the PV and wind generators.

to_lp turns a graph into a sparse LP: one capacity variable per component,
plus per-step dispatch/activity/flow variables and storage states with cyclic
closure.  Costs sit only on capacity variables (annualized), so the optimum
minimizes total annualized system cost for the fixed hydrogen delivery.

Modeling simplifications, chosen for LP linearity and documented here rather
than hidden: transport is a continuous flow with a distance-scaled loss (no
discrete voyages); stores have no separate power rating (energy capacity is
the binding size); mass flows (water, CO2, N2) are produced just in time with
no intermediate storage.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .costing import TechnologyCatalog, TechnologyParams, annualized_cost
from .errors import ConfigurationError, ParameterError, StateError
from .lp import LPSolution, SparseLP

__all__ = [
    "CARRIERS",
    "TRANSPORTS",
    "TimeSeries",
    "PathwayConfig",
    "Generator",
    "Converter",
    "Store",
    "TransportLink",
    "SupplyChainGraph",
    "load_weather",
    "default_weather_path",
    "default_pathways_path",
    "pathway_names",
    "build_pathway",
    "to_lp",
    "lcoh",
    "lcoe",
    "energy_consumption",
    "cost_breakdown",
    "capacities",
]

CARRIERS = ("hydrogen", "ammonia", "methane", "methanol")
TRANSPORTS = ("shipping", "pipeline")
HOURS_PER_YEAR = 8760

# The capacity variables every standard pathway exposes to exploration.
MGA_TAGS = ("pv", "wind", "electrolyzer", "battery", "h2_storage")


@dataclass(frozen=True)
class TimeSeries:
    """One year of hourly capacity factors."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != HOURS_PER_YEAR:
            raise ParameterError(
                f"time series must have {HOURS_PER_YEAR} hourly values, got {vals.size}"
            )
        if np.any(vals < 0.0) or np.any(vals > 1.0) or not np.all(np.isfinite(vals)):
            raise ParameterError("capacity factors must lie in [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def resample(self, resolution: int) -> np.ndarray:
        """Block means over steps of `resolution` hours."""
        if resolution < 1 or HOURS_PER_YEAR % resolution != 0:
            raise ParameterError(
                f"resolution must divide {HOURS_PER_YEAR}, got {resolution}"
            )
        return self.values.reshape(-1, resolution).mean(axis=1)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class PathwayConfig:
    carrier: str
    transport: str
    annual_demand: float = 20e6  # MWh H2 per year at the import bus
    distance_km: float = 2517.0
    temporal_resolution: int = 3
    slack_epsilon: float = 0.1

    def __post_init__(self) -> None:
        if self.carrier not in CARRIERS:
            raise ConfigurationError(
                f"unknown carrier {self.carrier!r}; valid: {list(CARRIERS)}"
            )
        if self.transport not in TRANSPORTS:
            raise ConfigurationError(
                f"unknown transport {self.transport!r}; valid: {list(TRANSPORTS)}"
            )
        if self.annual_demand <= 0.0:
            raise ConfigurationError("annual_demand must be > 0")
        if self.distance_km <= 0.0:
            raise ConfigurationError("distance_km must be > 0")
        if (
            self.temporal_resolution < 1
            or HOURS_PER_YEAR % self.temporal_resolution != 0
        ):
            raise ConfigurationError(
                f"temporal_resolution must divide {HOURS_PER_YEAR}"
            )
        if self.slack_epsilon < 0.0:
            raise ConfigurationError("slack_epsilon must be >= 0")

    @property
    def pathway(self) -> str:
        return f"{self.carrier}_{self.transport}"


@dataclass(frozen=True)
class Generator:
    name: str
    tech: TechnologyParams
    bus: str
    profile: TimeSeries


@dataclass(frozen=True)
class Converter:
    """Activity is measured in units of the output bus (MW or t/h).

    inputs maps input bus -> input consumed per unit of activity, i.e. the
    reciprocal of the catalog's output-per-input efficiency.
    """

    name: str
    tech: TechnologyParams
    output_bus: str
    inputs: dict[str, float]
    stage: str = "supply"


@dataclass(frozen=True)
class Store:
    name: str
    tech: TechnologyParams
    bus: str
    stage: str = "supply"

    @property
    def charge_eff(self) -> float:
        return self.tech.efficiency.get("charge", 1.0)

    @property
    def discharge_eff(self) -> float:
        return self.tech.efficiency.get("discharge", 1.0)


@dataclass(frozen=True)
class TransportLink:
    """Capacity-limited continuous flow from the export to the import side.

    loss is the total en-route loss fraction for the configured distance;
    elec_per_unit is export-side electricity drawn per unit of flow
    (pipeline compression or pumping), zero for self-fuelled ships.
    """

    name: str
    tech: TechnologyParams
    from_bus: str
    to_bus: str
    distance_km: float
    loss: float
    elec_bus: str | None = None
    elec_per_unit: float = 0.0


@dataclass(frozen=True)
class SupplyChainGraph:
    carrier: str
    transport: str
    buses: tuple[str, ...]
    generators: tuple[Generator, ...]
    converters: tuple[Converter, ...]
    stores: tuple[Store, ...]
    transport_link: TransportLink | None
    load_bus: str
    load_mw: float
    mga: dict[str, str] = field(default_factory=dict)  # tag -> component name

    def components(self) -> list[tuple[str, TechnologyParams]]:
        """(name, tech) for every capacity-carrying component, in LP order."""
        out: list[tuple[str, TechnologyParams]] = []
        out.extend((g.name, g.tech) for g in self.generators)
        out.extend((c.name, c.tech) for c in self.converters)
        out.extend((s.name, s.tech) for s in self.stores)
        if self.transport_link is not None:
            out.append((self.transport_link.name, self.transport_link.tech))
        return out

    def stage_of(self, name: str) -> str:
        for c in self.converters:
            if c.name == name:
                return c.stage
        for s in self.stores:
            if s.name == name:
                return s.stage
        return "supply"


def default_weather_path() -> Path:
    return Path(__file__).parent / "data" / "weather.default.csv"


def load_weather(path: str | Path | None = None) -> dict[str, TimeSeries]:
    """Read hourly capacity factors from a CSV with pv_cf/wind_cf columns."""
    path = Path(path) if path is not None else default_weather_path()
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {
                "pv_cf",
                "wind_cf",
            } <= set(reader.fieldnames):
                raise ConfigurationError(
                    f"weather file {path} must have a header with pv_cf and wind_cf"
                )
            cols: dict[str, list[float]] = {n: [] for n in reader.fieldnames}
            for row in reader:
                for n in cols:
                    cols[n].append(float(row[n]))
    except FileNotFoundError:
        raise ConfigurationError(f"weather file not found: {path}") from None
    except ValueError as exc:
        raise ConfigurationError(f"weather file {path}: non-numeric value ({exc})")
    out = {}
    for name, values in cols.items():
        try:
            out[name] = TimeSeries(np.asarray(values))
        except ParameterError as exc:
            raise ConfigurationError(f"weather file {path}, column {name}: {exc}")
    return out


def default_pathways_path() -> Path:
    return Path(__file__).parent / "data" / "pathways.yaml"


def _load_pathway_defs(path: str | Path | None) -> dict:
    p = Path(path) if path is not None else default_pathways_path()
    try:
        raw = yaml.safe_load(p.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"pathway definition file not found: {p}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"pathway file {p} is not valid YAML: {exc}")
    if not isinstance(raw, dict) or "pathways" not in raw:
        raise ConfigurationError(f"pathway file {p} must map 'pathways'")
    return raw["pathways"]


def pathway_names(path: str | Path | None = None) -> list[str]:
    return sorted(_load_pathway_defs(path))


def build_pathway(
    config: PathwayConfig,
    catalog: TechnologyCatalog,
    weather: dict[str, TimeSeries],
    definitions_path: str | Path | None = None,
) -> SupplyChainGraph:
    """Instantiate the configured pathway from the data-driven definitions.

    Raises ConfigurationError naming the missing piece if the catalog lacks a
    component, the weather set lacks a profile, or the definition is not one
    of the eight carrier/transport pairs.
    """
    defs = _load_pathway_defs(definitions_path)
    key = config.pathway
    if key not in defs:
        raise ConfigurationError(
            f"pathway {key!r} not defined; have: {sorted(defs)}"
        )
    spec = defs[key]
    if spec.get("carrier") != config.carrier or spec.get("transport") != config.transport:
        raise ConfigurationError(
            f"pathway {key!r} definition does not match carrier/transport"
        )

    buses: set[str] = set()
    generators: list[Generator] = []
    converters: list[Converter] = []
    stores: list[Store] = []
    link: TransportLink | None = None
    mga: dict[str, str] = {}

    for comp in spec.get("components", []):
        ctype = comp.get("type")
        name = comp.get("name")
        if not name or not ctype:
            raise ConfigurationError(f"pathway {key!r}: component needs type and name")
        tech_name = comp.get("tech", name)
        if tech_name not in catalog:
            raise ConfigurationError(
                f"pathway {key!r}: component {name!r} needs catalog entry "
                f"{tech_name!r}, which is missing"
            )
        tech = catalog[tech_name]
        stage = comp.get("stage", "supply")

        if ctype == "generator":
            if tech.kind != "generator":
                raise ConfigurationError(f"{name!r}: tech {tech_name!r} is not a generator")
            profile_name = comp.get("profile")
            if profile_name not in weather:
                raise ConfigurationError(
                    f"pathway {key!r}: generator {name!r} needs weather column "
                    f"{profile_name!r}, which is missing"
                )
            bus = comp.get("bus", "electricity@export")
            generators.append(Generator(name, tech, bus, weather[profile_name]))
            buses.add(bus)
        elif ctype == "converter":
            if tech.kind != "converter":
                raise ConfigurationError(f"{name!r}: tech {tech_name!r} is not a converter")
            if not tech.output or not tech.efficiency:
                raise ConfigurationError(
                    f"{name!r}: converter tech {tech_name!r} needs output and efficiency"
                )
            loc = comp.get("at", "export")
            output_bus = f"{tech.output}@{loc}"
            inputs = {
                f"{commodity}@{loc}": 1.0 / eff
                for commodity, eff in tech.efficiency.items()
            }
            converters.append(Converter(name, tech, output_bus, inputs, stage))
            buses.add(output_bus)
            buses.update(inputs)
        elif ctype == "store":
            if tech.kind != "store":
                raise ConfigurationError(f"{name!r}: tech {tech_name!r} is not a store")
            bus = comp.get("bus")
            if not bus:
                raise ConfigurationError(f"store {name!r} needs a bus")
            stores.append(Store(name, tech, bus, stage))
            buses.add(bus)
        elif ctype == "transport":
            if tech.kind != "transport":
                raise ConfigurationError(f"{name!r}: tech {tech_name!r} is not transport")
            if link is not None:
                raise ConfigurationError(f"pathway {key!r}: more than one transport link")
            commodity = comp.get("commodity")
            if not commodity:
                raise ConfigurationError(f"transport {name!r} needs a commodity")
            loss = tech.loss_rate * config.distance_km / 1000.0
            if loss >= 1.0:
                raise ConfigurationError(
                    f"transport {name!r}: loss {loss:.2f} >= 1 over {config.distance_km} km"
                )
            elec_eff = tech.efficiency.get("electricity")
            elec_per_unit = (
                (config.distance_km / 1000.0) / elec_eff if elec_eff else 0.0
            )
            link = TransportLink(
                name=name,
                tech=tech,
                from_bus=f"{commodity}@export",
                to_bus=f"{commodity}@import",
                distance_km=config.distance_km,
                loss=loss,
                elec_bus="electricity@export" if elec_per_unit else None,
                elec_per_unit=elec_per_unit,
            )
            buses.update((link.from_bus, link.to_bus))
        else:
            raise ConfigurationError(f"pathway {key!r}: unknown component type {ctype!r}")

        tag = comp.get("mga")
        if tag:
            if tag in mga:
                raise ConfigurationError(f"MGA tag {tag!r} assigned twice")
            mga[tag] = name

    load_bus = "hydrogen@import"
    buses.add(load_bus)
    load_mw = config.annual_demand / HOURS_PER_YEAR

    missing_tags = set(MGA_TAGS) - set(mga)
    if missing_tags:
        raise ConfigurationError(
            f"pathway {key!r}: missing MGA tags {sorted(missing_tags)}"
        )

    graph = SupplyChainGraph(
        carrier=config.carrier,
        transport=config.transport,
        buses=tuple(sorted(buses)),
        generators=tuple(generators),
        converters=tuple(converters),
        stores=tuple(stores),
        transport_link=link,
        load_bus=load_bus,
        load_mw=load_mw,
        mga=mga,
    )
    _validate_connected(graph)
    return graph


def _validate_connected(graph: SupplyChainGraph) -> None:
    """Commodity must be able to flow from some generator to the load."""
    reach = {g.bus for g in graph.generators}
    changed = True
    while changed:
        changed = False
        for c in graph.converters:
            if c.output_bus not in reach and set(c.inputs) <= reach:
                reach.add(c.output_bus)
                changed = True
        link = graph.transport_link
        if link is not None and link.from_bus in reach and link.to_bus not in reach:
            reach.add(link.to_bus)
            changed = True
    if graph.load_bus not in reach:
        raise ConfigurationError(
            f"pathway graph cannot deliver to {graph.load_bus}: "
            f"reachable buses {sorted(reach)}"
        )


# ----------------------------------------------------------------------
# LP emission

# Capacity units are MW / MWh / t-per-h; catalog costs are per kilo-unit.
_KILO = 1000.0


class _Layout:
    """Column/row bookkeeping for one graph at one resolution."""

    def __init__(self, graph: SupplyChainGraph, T: int):
        self.T = T
        comps = graph.components()
        self.cap = {name: i for i, (name, _t) in enumerate(comps)}
        col = len(comps)
        self.gen = {}
        for g in graph.generators:
            self.gen[g.name] = col
            col += T
        self.act = {}
        for c in graph.converters:
            self.act[c.name] = col
            col += T
        self.chg = {}
        self.dis = {}
        self.lvl = {}
        for s in graph.stores:
            self.chg[s.name] = col
            self.dis[s.name] = col + T
            self.lvl[s.name] = col + 2 * T
            col += 3 * T
        self.flw = None
        if graph.transport_link is not None:
            self.flw = col
            col += T
        self.n_vars = col


def _layout_for_solution(graph: SupplyChainGraph, n_vars: int) -> _Layout:
    comps = len(graph.components())
    blocks = (
        len(graph.generators)
        + len(graph.converters)
        + 3 * len(graph.stores)
        + (1 if graph.transport_link is not None else 0)
    )
    if blocks == 0 or (n_vars - comps) % blocks != 0:
        raise ParameterError("solution does not match this graph's LP layout")
    return _Layout(graph, (n_vars - comps) // blocks)


def to_lp(graph: SupplyChainGraph, resolution: int) -> SparseLP:
    """Emit the capacity + dispatch LP for one pathway graph.

    One balance equality per (bus, step); dispatch limited by capacity times
    the resampled capacity factor for generators and by plain capacity for
    converters and the transport link; storage follows cyclic state dynamics;
    flagged converters must run at or above min_part_load times capacity.
    The load bus receives a constant offtake each step.
    """
    if resolution < 1 or HOURS_PER_YEAR % resolution != 0:
        raise ParameterError(f"resolution must divide {HOURS_PER_YEAR}")
    T = HOURS_PER_YEAR // resolution
    delta = float(resolution)
    lay = _Layout(graph, T)
    bus_index = {b: i for i, b in enumerate(graph.buses)}
    n_balance = len(graph.buses) * T

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    extra_senses: list[np.ndarray] = []
    extra_rhs: list[np.ndarray] = []
    row_cursor = n_balance
    ts = np.arange(T, dtype=np.int64)

    def put(r: np.ndarray, c: np.ndarray, v: np.ndarray) -> None:
        rows.append(np.ascontiguousarray(r, dtype=np.int64))
        cols.append(np.ascontiguousarray(c, dtype=np.int64))
        vals.append(np.ascontiguousarray(v, dtype=np.float64))

    def balance_rows(bus: str) -> np.ndarray:
        return bus_index[bus] * T + ts

    def new_block(sense: int, rhs_val: float = 0.0) -> np.ndarray:
        nonlocal row_cursor
        block = row_cursor + ts
        row_cursor += T
        extra_senses.append(np.full(T, sense, dtype=np.int8))
        extra_rhs.append(np.full(T, rhs_val, dtype=np.float64))
        return block

    ones = np.ones(T)

    for g in graph.generators:
        d0 = lay.gen[g.name]
        put(balance_rows(g.bus), d0 + ts, ones)
        cf = g.profile.resample(resolution)
        block = new_block(-1)
        put(block, d0 + ts, ones)
        put(block, np.full(T, lay.cap[g.name]), -cf)

    for c in graph.converters:
        a0 = lay.act[c.name]
        put(balance_rows(c.output_bus), a0 + ts, ones)
        for in_bus, coef in c.inputs.items():
            put(balance_rows(in_bus), a0 + ts, np.full(T, -coef))
        block = new_block(-1)
        put(block, a0 + ts, ones)
        put(block, np.full(T, lay.cap[c.name]), -ones)
        if c.tech.min_part_load > 0.0:
            block = new_block(1)
            put(block, a0 + ts, ones)
            put(block, np.full(T, lay.cap[c.name]), np.full(T, -c.tech.min_part_load))

    for s in graph.stores:
        c0, d0, l0 = lay.chg[s.name], lay.dis[s.name], lay.lvl[s.name]
        put(balance_rows(s.bus), c0 + ts, -ones)
        put(balance_rows(s.bus), d0 + ts, ones)
        block = new_block(-1)
        put(block, l0 + ts, ones)
        put(block, np.full(T, lay.cap[s.name]), -ones)
        # level_t = decay*level_{t-1} + delta*(eta_c*charge_t - discharge_t/eta_d)
        decay = (1.0 - s.tech.loss_rate) ** delta
        block = new_block(0)
        put(block, l0 + ts, ones)
        put(block, l0 + (ts - 1) % T, np.full(T, -decay))
        put(block, c0 + ts, np.full(T, -delta * s.charge_eff))
        put(block, d0 + ts, np.full(T, delta / s.discharge_eff))

    link = graph.transport_link
    if link is not None:
        f0 = lay.flw
        put(balance_rows(link.from_bus), f0 + ts, -ones)
        put(balance_rows(link.to_bus), f0 + ts, np.full(T, 1.0 - link.loss))
        if link.elec_bus is not None:
            put(balance_rows(link.elec_bus), f0 + ts, np.full(T, -link.elec_per_unit))
        block = new_block(-1)
        put(block, f0 + ts, ones)
        put(block, np.full(T, lay.cap[link.name]), -ones)

    senses = np.concatenate(
        [np.zeros(n_balance, dtype=np.int8)] + extra_senses
        if extra_senses
        else [np.zeros(n_balance, dtype=np.int8)]
    )
    rhs = np.zeros(row_cursor, dtype=np.float64)
    rhs[bus_index[graph.load_bus] * T + ts] = graph.load_mw
    if extra_rhs:
        rhs[n_balance:] = np.concatenate(extra_rhs)

    objective = np.zeros(lay.n_vars, dtype=np.float64)
    labels: list[str] = []
    for name, tech in graph.components():
        coeff = annualized_cost(tech) * _KILO
        if tech.kind == "transport":
            coeff = annualized_cost(tech) * _KILO * (
                (link.distance_km / 1000.0) if link is not None else 1.0
            )
        objective[lay.cap[name]] = coeff
        labels.append(f"cap::{name}")
    for g in graph.generators:
        labels.extend(f"gen::{g.name}::{t}" for t in range(T))
    for c in graph.converters:
        labels.extend(f"act::{c.name}::{t}" for t in range(T))
    for s in graph.stores:
        labels.extend(f"chg::{s.name}::{t}" for t in range(T))
        labels.extend(f"dis::{s.name}::{t}" for t in range(T))
        labels.extend(f"lvl::{s.name}::{t}" for t in range(T))
    if link is not None:
        labels.extend(f"flw::{link.name}::{t}" for t in range(T))

    mga_cols = {tag: lay.cap[name] for tag, name in graph.mga.items()}

    return SparseLP(
        objective=objective,
        rows=np.concatenate(rows),
        cols=np.concatenate(cols),
        vals=np.concatenate(vals),
        senses=senses,
        rhs=rhs,
        lower=np.zeros(lay.n_vars),
        upper=np.full(lay.n_vars, np.inf),
        column_labels=tuple(labels),
        mga=mga_cols,
    )


# ----------------------------------------------------------------------
# Metrics


def _require_optimal(solution: LPSolution) -> None:
    if solution.status != "optimal" or solution.x is None:
        raise StateError(f"metrics need an optimal solution, got {solution.status}")


def lcoh(solution: LPSolution, config: PathwayConfig) -> float:
    """Total annualized cost per MWh of hydrogen delivered at the import bus."""
    _require_optimal(solution)
    return float(solution.objective_value) / config.annual_demand


def capacities(solution: LPSolution, graph: SupplyChainGraph) -> dict[str, float]:
    """Built capacity per component (MW, MWh, or t/h)."""
    _require_optimal(solution)
    lay = _layout_for_solution(graph, len(solution.x))
    return {name: float(solution.x[i]) for name, i in lay.cap.items()}


def energy_consumption(solution: LPSolution, graph: SupplyChainGraph) -> float:
    """Generated renewable electricity per unit of delivered hydrogen.

    Always at least 1/eta_electrolysis since all hydrogen passes through
    electrolysis and the system is islanded.
    """
    _require_optimal(solution)
    lay = _layout_for_solution(graph, len(solution.x))
    delta = HOURS_PER_YEAR / lay.T
    generated = 0.0
    for g in graph.generators:
        d0 = lay.gen[g.name]
        generated += float(solution.x[d0 : d0 + lay.T].sum()) * delta
    delivered = graph.load_mw * HOURS_PER_YEAR
    if delivered <= 0.0:
        raise ParameterError("delivered hydrogen energy is zero")
    return generated / delivered


def cost_breakdown(
    solution: LPSolution, graph: SupplyChainGraph
) -> dict[str, float]:
    """Per-component annualized cost per MWh of delivered hydrogen.

    Entries sum to the LCOH because the objective is linear in capacities.
    """
    _require_optimal(solution)
    lay = _layout_for_solution(graph, len(solution.x))
    demand = graph.load_mw * HOURS_PER_YEAR
    out: dict[str, float] = {}
    link = graph.transport_link
    for name, tech in graph.components():
        coeff = annualized_cost(tech) * _KILO
        if tech.kind == "transport" and link is not None:
            coeff *= link.distance_km / 1000.0
        out[name] = coeff * float(solution.x[lay.cap[name]]) / demand
    return out


def lcoe(solution: LPSolution, graph: SupplyChainGraph) -> float:
    """Levelized cost of delivered carrier energy before reconversion.

    Reconversion-stage components (import-side buffers and the units turning
    the carrier back into hydrogen) are excluded from the numerator; the
    denominator is the carrier energy arriving at the import side.  For the
    gaseous-hydrogen pipeline pathway there is no reconversion stage and this
    equals the LCOH.
    """
    _require_optimal(solution)
    lay = _layout_for_solution(graph, len(solution.x))
    delta = HOURS_PER_YEAR / lay.T
    breakdown = cost_breakdown(solution, graph)
    demand = graph.load_mw * HOURS_PER_YEAR
    total = sum(breakdown.values()) * demand
    reconv = sum(
        share * demand
        for name, share in breakdown.items()
        if graph.stage_of(name) == "reconversion"
    )
    link = graph.transport_link
    if link is not None:
        arriving = (
            float(solution.x[lay.flw : lay.flw + lay.T].sum())
            * delta
            * (1.0 - link.loss)
        )
    else:
        arriving = demand
    if arriving <= 0.0:
        raise ParameterError("no carrier energy arrives at the import side")
    return (total - reconv) / arriving
