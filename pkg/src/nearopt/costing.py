"""Annualized cost arithmetic and the technology catalog.

Capital costs are converted to equivalent annual payments with the standard
annuity (capital recovery) factor, then fixed O&M is added on top.  All
downstream objective coefficients are built from these annual figures, so a
supply chain optimum is a minimum of total annualized system cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError, ParameterError

__all__ = [
    "annuity",
    "annualized_cost",
    "TechnologyParams",
    "TechnologyCatalog",
    "load_catalog",
    "default_catalog_path",
]


def annuity(rate: float, years: int) -> float:
    """Capital recovery factor: the fraction of an investment paid each year
    when financing over ``years`` at interest ``rate``.

        A = ((1 + r)^n * r) / ((1 + r)^n - 1)

    Satisfies A * (1 - (1 + r)^-n) == r and decreases toward 1/n as r -> 0.
    """
    if isinstance(years, bool) or not isinstance(years, int):
        raise ParameterError(f"years must be an integer, got {years!r}")
    if years < 1:
        raise ParameterError(f"years must be >= 1, got {years}")
    if not (0.0 < rate < 1.0):
        raise ParameterError(f"rate must be in (0, 1), got {rate}")
    q = (1.0 + rate) ** years
    return q * rate / (q - 1.0)


def annualized_cost(params: "TechnologyParams") -> float:
    """Annual cost of one unit of capacity: annuitized capex plus fixed O&M.

    Units follow the catalog entry (EUR per kW, kWh, or kg/h, per year).
    """
    return params.capex * annuity(params.interest_rate, params.lifetime_years) + params.fixed_om


# Component kinds a catalog entry may declare.
_KINDS = ("generator", "converter", "store", "transport")


@dataclass(frozen=True)
class TechnologyParams:
    """One catalog entry.

    capex and fixed_om are per kilo-unit of capacity (EUR/kW, EUR/kWh, or
    EUR/(kg/h) depending on the capacity unit); model capacities are in
    mega-units, so objective coefficients scale these by 1000.

    efficiency maps an input commodity to the output produced per unit of
    that input (mixed units allowed, e.g. MWh methane per tonne CO2).  For
    stores the keys "charge" and "discharge" give one-way efficiencies.
    loss_rate is a standing loss per hour for stores, or a loss fraction per
    1000 km for transport.  min_part_load is the floor on converter activity
    as a fraction of built capacity.
    """

    name: str
    kind: str
    capex: float
    fixed_om: float
    lifetime_years: int
    interest_rate: float
    capacity_unit: str = "MW"
    efficiency: dict[str, float] = field(default_factory=dict)
    min_part_load: float = 0.0
    loss_rate: float = 0.0
    output: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigurationError(
                f"technology {self.name!r}: unknown kind {self.kind!r}"
            )
        if self.capex < 0.0 or not math.isfinite(self.capex):
            raise ConfigurationError(
                f"technology {self.name!r}: capex must be finite and >= 0"
            )
        if self.fixed_om < 0.0 or not math.isfinite(self.fixed_om):
            raise ConfigurationError(
                f"technology {self.name!r}: fixed_om must be finite and >= 0"
            )
        if not (0.0 <= self.min_part_load <= 1.0):
            raise ConfigurationError(
                f"technology {self.name!r}: min_part_load must be in [0, 1]"
            )
        if self.loss_rate < 0.0:
            raise ConfigurationError(
                f"technology {self.name!r}: loss_rate must be >= 0"
            )
        for key, value in self.efficiency.items():
            if value <= 0.0 or not math.isfinite(value):
                raise ConfigurationError(
                    f"technology {self.name!r}: efficiency[{key!r}] must be "
                    f"finite and > 0, got {value}"
                )

    @property
    def annual_cost(self) -> float:
        """Annualized cost per kilo-unit of capacity."""
        return annualized_cost(self)


@dataclass(frozen=True)
class TechnologyCatalog:
    """Immutable name -> TechnologyParams mapping with provenance metadata."""

    technologies: dict[str, TechnologyParams]
    version: str = "unversioned"
    source: str = ""

    def __getitem__(self, name: str) -> TechnologyParams:
        try:
            return self.technologies[name]
        except KeyError:
            known = ", ".join(sorted(self.technologies))
            raise ConfigurationError(
                f"technology {name!r} not in catalog (have: {known})"
            ) from None

    def __contains__(self, name: str) -> bool:
        return name in self.technologies

    def names(self) -> list[str]:
        return sorted(self.technologies)


def default_catalog_path() -> Path:
    return Path(__file__).parent / "data" / "catalog.default.yaml"


def load_catalog(path: str | Path | None = None) -> TechnologyCatalog:
    """Read a YAML technology catalog.

    The file holds a mapping under ``technologies`` keyed by technology name;
    each entry is a mapping of TechnologyParams fields (``name`` is implied by
    the key).  Raises ConfigurationError on missing files, bad YAML, unknown
    fields, or invalid values.
    """
    path = Path(path) if path is not None else default_catalog_path()
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"catalog file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"catalog file {path} is not valid YAML: {exc}")
    if not isinstance(raw, dict) or "technologies" not in raw:
        raise ConfigurationError(
            f"catalog file {path} must be a mapping with a 'technologies' key"
        )
    allowed = {
        "kind",
        "capex",
        "fixed_om",
        "lifetime_years",
        "interest_rate",
        "capacity_unit",
        "efficiency",
        "min_part_load",
        "loss_rate",
        "output",
    }
    techs: dict[str, TechnologyParams] = {}
    for name, entry in raw["technologies"].items():
        if not isinstance(entry, dict):
            raise ConfigurationError(f"catalog entry {name!r} must be a mapping")
        unknown = set(entry) - allowed
        if unknown:
            raise ConfigurationError(
                f"catalog entry {name!r} has unknown fields: {sorted(unknown)}"
            )
        missing = {"kind", "capex", "fixed_om", "lifetime_years", "interest_rate"} - set(entry)
        if missing:
            raise ConfigurationError(
                f"catalog entry {name!r} is missing fields: {sorted(missing)}"
            )
        try:
            techs[name] = TechnologyParams(name=name, **entry)
        except (TypeError, ParameterError) as exc:
            raise ConfigurationError(f"catalog entry {name!r}: {exc}")
    return TechnologyCatalog(
        technologies=techs,
        version=str(raw.get("catalog_version", "unversioned")),
        source=str(raw.get("source", "")),
    )
