"""Per-pathway run pipeline: optimize, map, sample, cluster, tree, report.

Each stage reads the previous stage's files from the run directory, writes
its own, and records content hashes in the run manifest.  A stage refuses to
run when an input no longer matches its recorded hash, so a half-regenerated
directory cannot silently mix artifacts from different configurations.

All JSON artifacts are written in canonical form (sorted keys, full-precision
floats); reruns with the same config and seed reproduce them byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .cart import fit_cart, reassign, tree_to_dot, tree_to_jsonable
from .chain import (
    PathwayConfig,
    build_pathway,
    capacities,
    cost_breakdown,
    default_pathways_path,
    default_weather_path,
    energy_consumption,
    lcoe,
    lcoh,
    load_weather,
    pathway_names,
    to_lp,
)
from .clustering import (
    auto_gamma,
    dataset_from_samples,
    kmeans,
    kprototypes,
    model_to_jsonable,
)
from .costing import default_catalog_path, load_catalog
from .errors import ConfigurationError, StaleArtifactError, StateError
from .hull import hull_from_jsonable
from .lp import solve
from .maa import MAAConfig, result_to_jsonable, run_maa
from .sampling import (
    SampleSet,
    read_samples,
    sample,
    verify_near_optimal,
    write_samples,
)
from .util import (
    canonical_json,
    sha256_bytes,
    sha256_file,
    worker_count,
    write_canonical_json,
)

__all__ = [
    "RunConfig",
    "RunManifest",
    "STAGES",
    "MGA_UNITS",
    "run_stage",
    "run_pipeline",
]

STAGES = ("optimize", "maa", "sample", "cluster", "tree", "report")

MGA_UNITS = {
    "pv": "MW",
    "wind": "MW",
    "electrolyzer": "MW",
    "battery": "MWh",
    "h2_storage": "MWh",
}

_HIST_BINS = 50

_CONFIG_KEYS = {
    "pathways",
    "epsilon",
    "resolution",
    "seed",
    "n_samples",
    "clusters",
    "tree_depth",
    "min_leaf",
    "gamma",
    "output_dir",
    "catalog",
    "weather",
    "annual_demand",
    "distance_km",
    "verify_fraction",
    "maa",
}

_MAA_KEYS = {"max_iterations", "volume_rel_tol", "max_directions"}


@dataclass(frozen=True)
class RunConfig:
    """One reproducibility artifact: everything a full run depends on."""

    pathways: tuple[str, ...]
    output_dir: Path
    epsilon: float = 0.1
    resolution: int = 24
    seed: int = 0
    n_samples: int = 10_000
    clusters: int = 4
    tree_depth: int = 3
    min_leaf: int | None = None
    gamma: float | None = None
    catalog_path: Path = field(default_factory=default_catalog_path)
    weather_path: Path = field(default_factory=default_weather_path)
    annual_demand: float = 20e6
    distance_km: float = 2517.0
    verify_fraction: float = 0.01
    maa_max_iterations: int = 20
    maa_volume_rel_tol: float = 1e-2
    maa_max_directions: int = 64

    def __post_init__(self) -> None:
        known = set(pathway_names())
        if not self.pathways:
            raise ConfigurationError("config must name at least one pathway")
        for p in self.pathways:
            if p not in known:
                raise ConfigurationError(
                    f"unknown pathway {p!r}; valid: {sorted(known)}"
                )
        if len(set(self.pathways)) != len(self.pathways):
            raise ConfigurationError("pathways must be unique")
        if self.epsilon <= 0.0:
            raise ConfigurationError("epsilon must be > 0")
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in an unsigned 64-bit int")
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be >= 1")
        if self.clusters < 1:
            raise ConfigurationError("clusters must be >= 1")
        if self.tree_depth < 1:
            raise ConfigurationError("tree_depth must be >= 1")
        if self.min_leaf is not None and self.min_leaf < 1:
            raise ConfigurationError("min_leaf must be >= 1")
        if not (0.0 <= self.verify_fraction <= 1.0):
            raise ConfigurationError("verify_fraction must be in [0, 1]")
        if not self.catalog_path.exists():
            raise ConfigurationError(f"catalog file not found: {self.catalog_path}")
        if not self.weather_path.exists():
            raise ConfigurationError(f"weather file not found: {self.weather_path}")

    @classmethod
    def from_file(cls, path: str | Path, seed: int | None = None) -> "RunConfig":
        """Load a YAML run config; `seed` overrides the file's value."""
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"config is not valid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError("config must be a YAML mapping")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigurationError(
                f"unknown config keys {sorted(unknown)}; valid: {sorted(_CONFIG_KEYS)}"
            )
        pathways = raw.get("pathways", "all")
        if pathways == "all":
            pathways = pathway_names()
        if isinstance(pathways, str):
            pathways = [pathways]
        if not isinstance(pathways, list) or not all(
            isinstance(p, str) for p in pathways
        ):
            raise ConfigurationError('"pathways" must be a name list or "all"')
        maa_raw = raw.get("maa") or {}
        if not isinstance(maa_raw, dict):
            raise ConfigurationError('"maa" must be a mapping')
        bad = set(maa_raw) - _MAA_KEYS
        if bad:
            raise ConfigurationError(
                f"unknown maa keys {sorted(bad)}; valid: {sorted(_MAA_KEYS)}"
            )
        base = path.parent

        def _path(key: str, default: Path) -> Path:
            v = raw.get(key)
            if v is None:
                return default
            p = Path(v)
            return p if p.is_absolute() else base / p

        if "output_dir" not in raw:
            raise ConfigurationError('config must set "output_dir"')
        try:
            return cls(
                pathways=tuple(pathways),
                output_dir=_path("output_dir", base),
                epsilon=float(raw.get("epsilon", 0.1)),
                resolution=int(raw.get("resolution", 24)),
                seed=int(raw["seed"]) if seed is None and "seed" in raw else int(
                    seed if seed is not None else 0
                ),
                n_samples=int(raw.get("n_samples", 10_000)),
                clusters=int(raw.get("clusters", 4)),
                tree_depth=int(raw.get("tree_depth", 3)),
                min_leaf=None if raw.get("min_leaf") is None else int(raw["min_leaf"]),
                gamma=None if raw.get("gamma") is None else float(raw["gamma"]),
                catalog_path=_path("catalog", default_catalog_path()),
                weather_path=_path("weather", default_weather_path()),
                annual_demand=float(raw.get("annual_demand", 20e6)),
                distance_km=float(raw.get("distance_km", 2517.0)),
                verify_fraction=float(raw.get("verify_fraction", 0.01)),
                maa_max_iterations=int(maa_raw.get("max_iterations", 20)),
                maa_volume_rel_tol=float(maa_raw.get("volume_rel_tol", 1e-2)),
                maa_max_directions=int(maa_raw.get("max_directions", 64)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad config value: {exc}") from exc

    def content_hash(self) -> str:
        payload = {
            "pathways": list(self.pathways),
            "epsilon": self.epsilon,
            "resolution": self.resolution,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "clusters": self.clusters,
            "tree_depth": self.tree_depth,
            "min_leaf": self.min_leaf,
            "gamma": self.gamma,
            "annual_demand": self.annual_demand,
            "distance_km": self.distance_km,
            "verify_fraction": self.verify_fraction,
            "maa": [
                self.maa_max_iterations,
                self.maa_volume_rel_tol,
                self.maa_max_directions,
            ],
        }
        return sha256_bytes(canonical_json(payload).encode("utf-8"))

    def pathway_config(self, pathway: str) -> PathwayConfig:
        carrier, transport = pathway.rsplit("_", 1)
        return PathwayConfig(
            carrier=carrier,
            transport=transport,
            annual_demand=self.annual_demand,
            distance_km=self.distance_km,
            temporal_resolution=self.resolution,
            slack_epsilon=self.epsilon,
        )


class RunManifest:
    """Content-hash ledger for one run directory.

    `artifacts` maps a relative path to the sha256 of its bytes as last
    written by a completed stage; `stages` records what each stage produced
    and how long it took.
    """

    SCHEMA = "nearopt-manifest/1"

    def __init__(self, directory: Path, config: RunConfig, pathway: str):
        self.directory = Path(directory)
        self.config = config
        self.pathway = pathway
        self.data: dict = {
            "schema": self.SCHEMA,
            "tool_version": __version__,
            "pathway": pathway,
            "seed": config.seed,
            "config_hash": config.content_hash(),
            "catalog_hash": sha256_file(config.catalog_path),
            "weather_hash": sha256_file(config.weather_path),
            "artifacts": {},
            "stages": {},
        }

    @property
    def path(self) -> Path:
        return self.directory / "manifest.json"

    @classmethod
    def load_or_create(
        cls,
        directory: Path,
        config: RunConfig,
        pathway: str,
        take_over: bool = False,
    ) -> "RunManifest":
        m = cls(directory, config, pathway)
        if m.path.exists():
            try:
                on_disk = json.loads(m.path.read_text())
            except json.JSONDecodeError as exc:
                raise StaleArtifactError(
                    f"{m.path} is corrupt ({exc}); delete the run directory "
                    "and rerun from `optimize`"
                ) from exc
            fresh = m.data
            # seed first: it also feeds config_hash, and the specific
            # message beats the generic one.
            for key in ("seed", "catalog_hash", "weather_hash", "config_hash"):
                if on_disk.get(key) != fresh[key]:
                    if take_over:
                        # fresh identity, no recorded artifacts: everything
                        # downstream reads as missing until regenerated
                        return m
                    raise StaleArtifactError(
                        f"{key} changed since this run directory was produced; "
                        "rerun from `optimize` (or use a fresh output_dir)"
                    )
            m.data = on_disk
        return m

    def require_fresh(self, inputs: dict[str, str]) -> None:
        """Fail unless every input exists and matches its recorded hash.

        inputs maps each artifact relpath to the stage that produces it,
        so the refusal can say which command to rerun.
        """
        for rel, producer in inputs.items():
            recorded = self.data["artifacts"].get(rel)
            target = self.directory / rel
            if recorded is None or not target.exists():
                raise StaleArtifactError(
                    f"missing upstream artifact {rel}; run `nearopt {producer}` first"
                )
            if sha256_file(target) != recorded:
                raise StaleArtifactError(
                    f"{rel} does not match the manifest (edited or rebuilt "
                    f"out of band); rerun `nearopt {producer}` to regenerate it"
                )

    def record(self, stage: str, outputs: list[str], duration_s: float) -> None:
        for rel in outputs:
            self.data["artifacts"][rel] = sha256_file(self.directory / rel)
        self.data["stages"][stage] = {
            "outputs": sorted(outputs),
            "duration_s": round(duration_s, 3),
        }
        write_canonical_json(self.data, self.path)


def _build_lp(cfg: RunConfig, pathway: str):
    pc = cfg.pathway_config(pathway)
    catalog = load_catalog(cfg.catalog_path)
    weather = load_weather(cfg.weather_path)
    graph = build_pathway(pc, catalog, weather)
    return pc, graph, to_lp(graph, cfg.resolution)


def _metrics_csv(
    graph, caps: dict[str, float], breakdown: dict[str, float]
) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "capacity", "cost_eur_per_mwh_h2"])
    # same row order as the canonical-JSON capacities mapping
    for name in sorted(n for n, _tech in graph.components()):
        w.writerow([name, repr(caps[name]), repr(breakdown[name])])
    return buf.getvalue()


def stage_optimize(cfg: RunConfig, pathway: str, manifest: RunManifest) -> dict:
    pc, graph, lp = _build_lp(cfg, pathway)
    solution = solve(lp)
    if solution.status != "optimal":
        raise StateError(
            f"optimize stage failed for {pathway}: LP status {solution.status!r}"
        )
    caps = capacities(solution, graph)
    breakdown = cost_breakdown(solution, graph)
    metrics = {
        "schema": "nearopt-metrics/1",
        "pathway": pathway,
        "carrier": pc.carrier,
        "transport": pc.transport,
        "resolution": cfg.resolution,
        "annual_demand": pc.annual_demand,
        "distance_km": pc.distance_km,
        "objective": solution.objective_value,
        "lcoh": lcoh(solution, pc),
        "lcoe": lcoe(solution, graph),
        "energy_consumption": energy_consumption(solution, graph),
        "capacities": caps,
        "cost_breakdown": breakdown,
        "mga": {tag: caps[name] for tag, name in sorted(graph.mga.items())},
    }
    write_canonical_json(metrics, manifest.directory / "metrics.json")
    (manifest.directory / "metrics.csv").write_text(
        _metrics_csv(graph, caps, breakdown)
    )
    return metrics


def stage_maa(cfg: RunConfig, pathway: str, manifest: RunManifest) -> dict:
    manifest.require_fresh({"metrics.json": "optimize"})
    _pc, _graph, lp = _build_lp(cfg, pathway)
    maa_cfg = MAAConfig(
        epsilon=cfg.epsilon,
        mga_variables=tuple(sorted(MGA_UNITS)),
        volume_rel_tol=cfg.maa_volume_rel_tol,
        max_iterations=cfg.maa_max_iterations,
        max_directions_per_iter=cfg.maa_max_directions,
    )
    result = run_maa(lp, maa_cfg)
    out = result_to_jsonable(result, maa_cfg)
    write_canonical_json(out, manifest.directory / "hull.json")
    return out


def stage_sample(cfg: RunConfig, pathway: str, manifest: RunManifest) -> SampleSet:
    manifest.require_fresh({"hull.json": "maa", "metrics.json": "optimize"})
    hull_doc = json.loads((manifest.directory / "hull.json").read_text())
    metrics = json.loads((manifest.directory / "metrics.json").read_text())
    hull = hull_from_jsonable(hull_doc["hull"])
    variables = tuple(hull_doc["variables"])
    units = tuple(MGA_UNITS.get(v, "MW") for v in variables)

    raw = sample(hull, cfg.n_samples, cfg.seed)
    if hull_doc["space"] == "affine":
        origin = np.asarray(hull_doc["affine"]["origin"])
        basis = np.asarray(hull_doc["affine"]["basis"])
        matrix = origin + raw.matrix @ basis
        samples = SampleSet(
            matrix=matrix,
            variables=variables,
            seed=raw.seed,
            hull_id=raw.hull_id,
            units=units,
        )
    else:
        samples = replace(raw, variables=variables, units=units)

    verification = {
        "schema": "nearopt-verify/1",
        "fraction": cfg.verify_fraction,
        "epsilon": cfg.epsilon,
        "f_star": hull_doc["f_star"],
        "n_checked": 0,
        "n_verified": 0,
        "n_indeterminate": 0,
        "violations": [],
    }
    if cfg.verify_fraction > 0.0:
        _pc, _graph, lp = _build_lp(cfg, pathway)
        report = verify_near_optimal(
            samples,
            lp,
            f_star=metrics["objective"],
            epsilon=cfg.epsilon,
            fraction=cfg.verify_fraction,
            seed=cfg.seed,
        )
        cost = np.full(samples.n, np.nan)
        for row, value in report.costs.items():
            cost[row] = value
        samples = replace(samples, cost=cost)
        verification.update(
            n_checked=report.n_checked,
            n_verified=report.n_verified,
            n_indeterminate=report.n_indeterminate,
            violations=[
                {"row": int(r), "cost": c, "rel_excess": e}
                for r, c, e in report.violations
            ],
        )
    write_samples(samples, manifest.directory / "design.samples")
    write_canonical_json(verification, manifest.directory / "verify.json")
    return samples


def _labels_and_model(cfg: RunConfig, samples: SampleSet):
    """Cluster a sample set: k-prototypes when a carrier tag is present."""
    mixed = samples.carrier_tag is not None and len(set(samples.carrier_tag)) > 1
    data = dataset_from_samples(samples, include_carrier=mixed)
    if mixed:
        gamma = cfg.gamma if cfg.gamma is not None else 0.02
        model = kprototypes(data, cfg.clusters, gamma=gamma, seed=cfg.seed)
    else:
        model = kmeans(data, cfg.clusters, seed=cfg.seed)
    return data, model


def stage_cluster(cfg: RunConfig, pathway: str, manifest: RunManifest) -> dict:
    manifest.require_fresh({"design.samples": "sample"})
    samples = read_samples(manifest.directory / "design.samples")
    data, model = _labels_and_model(cfg, samples)
    out = model_to_jsonable(model, data)
    write_canonical_json(out, manifest.directory / "clusters.json")
    # The labels ride along in the samples file so the tree stage (and the
    # service) can reuse them without re-clustering.
    extras = dict(samples.extras)
    extras["cluster"] = model.labels.astype(np.float64)
    write_samples(
        replace(samples, extras=extras), manifest.directory / "design.samples"
    )
    return out


def stage_tree(cfg: RunConfig, pathway: str, manifest: RunManifest) -> dict:
    manifest.require_fresh(
        {"design.samples": "cluster", "clusters.json": "cluster"}
    )
    samples = read_samples(manifest.directory / "design.samples")
    if "cluster" not in samples.extras:
        raise StaleArtifactError(
            "design.samples has no cluster labels; rerun `nearopt cluster`"
        )
    multi = samples.carrier_tag is not None and len(set(samples.carrier_tag)) > 1
    if multi:
        labels = samples.carrier_tag.astype(np.int32)
        class_names = samples.carrier_levels
    else:
        labels = samples.extras["cluster"].astype(np.int32)
        class_names = tuple(
            f"cluster_{i}" for i in range(int(labels.max()) + 1)
        )
    data = dataset_from_samples(samples, include_carrier=False)
    tree = fit_cart(
        data,
        labels,
        max_depth=cfg.tree_depth,
        min_leaf=cfg.min_leaf,
        class_names=class_names,
    )
    out = tree_to_jsonable(tree)
    disagreement = int(np.sum(reassign(data, tree) != labels))
    out["reassign_disagreement"] = disagreement
    write_canonical_json(out, manifest.directory / "tree.json")
    (manifest.directory / "tree.dot").write_text(tree_to_dot(tree))
    return out


def _axis_ranges(hull_doc: dict) -> tuple[np.ndarray, np.ndarray]:
    """Per-variable extents of the mapped region, in physical units."""
    pts = np.asarray(hull_doc["hull"]["vertices"], dtype=np.float64)
    if hull_doc["space"] == "affine":
        origin = np.asarray(hull_doc["affine"]["origin"])
        basis = np.asarray(hull_doc["affine"]["basis"])
        pts = origin + pts @ basis
    return pts.min(axis=0), pts.max(axis=0)


def stage_report(cfg: RunConfig, pathway: str, manifest: RunManifest) -> dict:
    manifest.require_fresh(
        {
            "metrics.json": "optimize",
            "hull.json": "maa",
            "design.samples": "cluster",
            "clusters.json": "cluster",
            "tree.json": "tree",
        }
    )
    d = manifest.directory
    metrics = json.loads((d / "metrics.json").read_text())
    hull_doc = json.loads((d / "hull.json").read_text())
    clusters = json.loads((d / "clusters.json").read_text())
    tree = json.loads((d / "tree.json").read_text())
    verification = json.loads((d / "verify.json").read_text())
    samples = read_samples(d / "design.samples")

    variables = list(samples.variables)
    lo, hi = _axis_ranges(hull_doc)
    histograms = _histograms(samples, lo, hi)
    optimum = {v: hull_doc["optimum"][i] for i, v in enumerate(hull_doc["variables"])}

    report = {
        "schema": "nearopt-report/1",
        "pathway": pathway,
        "carrier": metrics["carrier"],
        "transport": metrics["transport"],
        "epsilon": cfg.epsilon,
        "resolution": cfg.resolution,
        "seed": cfg.seed,
        "n_samples": samples.n,
        "variables": variables,
        "units": list(samples.units),
        "ranges": {
            v: [float(lo[i]), float(hi[i])] for i, v in enumerate(variables)
        },
        "optimum": optimum,
        "lcoh": metrics["lcoh"],
        "lcoe": metrics["lcoe"],
        "energy_consumption": metrics["energy_consumption"],
        "pinned": hull_doc["pinned"],
        "histograms": histograms,
        "carrier_levels": list(samples.carrier_levels),
        "carrier_counts": _carrier_counts(samples),
        "clusters": {
            "k": clusters["k"],
            "inertia": clusters["inertia"],
            "sizes": clusters["cluster_sizes"],
        },
        "tree": {
            "max_depth": tree["max_depth"],
            "training_accuracy": tree["training_accuracy"],
            "reassign_disagreement": tree["reassign_disagreement"],
        },
        "verification": {
            k: verification[k]
            for k in ("fraction", "n_checked", "n_verified", "n_indeterminate")
        },
        "n_violations": len(verification["violations"]),
        "artifacts": {
            "metrics": "metrics.json",
            "hull": "hull.json",
            "samples": "design.samples",
            "clusters": "clusters.json",
            "tree": "tree.json",
        },
    }
    write_canonical_json(report, d / "report.json")
    return report


def _histograms(samples: SampleSet, lo: np.ndarray, hi: np.ndarray) -> dict:
    out = {}
    for i, v in enumerate(samples.variables):
        span = hi[i] - lo[i]
        if span <= 0.0:
            edges = np.linspace(lo[i] - 0.5, hi[i] + 0.5, _HIST_BINS + 1)
        else:
            edges = np.linspace(lo[i], hi[i], _HIST_BINS + 1)
        # Samples are convex combinations of hull vertices, so any excursion
        # past the vertex extents is roundoff; clip instead of dropping rows.
        col = np.clip(samples.matrix[:, i], edges[0], edges[-1])
        counts, _ = np.histogram(col, bins=edges)
        out[v] = {
            "edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
        }
    return out


def _carrier_counts(samples: SampleSet) -> dict[str, int]:
    if samples.carrier_tag is None:
        return {}
    counts = np.bincount(samples.carrier_tag, minlength=len(samples.carrier_levels))
    return {
        level: int(counts[i]) for i, level in enumerate(samples.carrier_levels)
    }


_STAGE_FUNCS = {
    "optimize": stage_optimize,
    "maa": stage_maa,
    "sample": stage_sample,
    "cluster": stage_cluster,
    "tree": stage_tree,
    "report": stage_report,
}


def run_stage(cfg: RunConfig, pathway: str, stage: str) -> None:
    """Run one stage for one pathway, updating the run manifest."""
    if stage not in _STAGE_FUNCS:
        raise ConfigurationError(f"unknown stage {stage!r}; valid: {list(STAGES)}")
    directory = cfg.output_dir / pathway
    directory.mkdir(parents=True, exist_ok=True)
    # the DAG root may re-stamp a directory whose identity changed;
    # everything else must refuse so stale artifacts cannot be extended
    manifest = RunManifest.load_or_create(
        directory, cfg, pathway, take_over=stage == "optimize"
    )
    started = time.perf_counter()
    _STAGE_FUNCS[stage](cfg, pathway, manifest)
    outputs = {
        "optimize": ["metrics.json", "metrics.csv"],
        "maa": ["hull.json"],
        "sample": ["design.samples", "design.samples.json", "verify.json"],
        "cluster": ["clusters.json", "design.samples", "design.samples.json"],
        "tree": ["tree.json", "tree.dot"],
        "report": ["report.json"],
    }[stage]
    manifest.record(stage, outputs, time.perf_counter() - started)


def _combined_dir(cfg: RunConfig) -> Path:
    return cfg.output_dir / "combined"


def _build_combined(cfg: RunConfig) -> None:
    """Pool every pathway's samples into one carrier-tagged bundle.

    The pooled set drives the cross-carrier views: a k-prototypes model over
    capacities plus carrier, and a tree classifying designs by carrier.
    """
    per_path = []
    for p in cfg.pathways:
        samples = read_samples(cfg.output_dir / p / "design.samples")
        metrics = json.loads((cfg.output_dir / p / "metrics.json").read_text())
        per_path.append((p, metrics["carrier"], samples))
    variables = per_path[0][2].variables
    for p, _c, s in per_path[1:]:
        if s.variables != variables:
            raise StateError(
                f"cannot pool samples: {p} has variables {s.variables}, "
                f"expected {variables}"
            )
    levels: list[str] = []
    for _p, carrier, _s in per_path:
        if carrier not in levels:
            levels.append(carrier)
    matrix = np.vstack([s.matrix for _p, _c, s in per_path])
    tags = np.concatenate(
        [
            np.full(s.n, levels.index(carrier), dtype=np.int16)
            for _p, carrier, s in per_path
        ]
    )
    cost = None
    if all(s.cost is not None for _p, _c, s in per_path):
        cost = np.concatenate([s.cost for _p, _c, s in per_path])
    combined = SampleSet(
        matrix=matrix,
        variables=variables,
        seed=cfg.seed,
        hull_id=sha256_bytes(
            "\n".join(s.hull_id for _p, _c, s in per_path).encode("utf-8")
        ),
        units=per_path[0][2].units,
        carrier_tag=tags,
        carrier_levels=tuple(levels),
        cost=cost,
    )

    directory = _combined_dir(cfg)
    directory.mkdir(parents=True, exist_ok=True)
    # rebuilt wholesale from per-pathway artifacts, so a changed identity
    # just re-stamps this directory
    manifest = RunManifest.load_or_create(directory, cfg, "combined", take_over=True)

    started = time.perf_counter()
    data, model = _labels_and_model(cfg, combined)
    extras = {"cluster": model.labels.astype(np.float64)}
    combined = replace(combined, extras=extras)
    write_samples(combined, directory / "design.samples")
    write_canonical_json(model_to_jsonable(model, data), directory / "clusters.json")

    labels = combined.carrier_tag.astype(np.int32)
    tree_data = dataset_from_samples(combined, include_carrier=False)
    tree = fit_cart(
        tree_data,
        labels,
        max_depth=cfg.tree_depth,
        min_leaf=cfg.min_leaf,
        class_names=tuple(levels),
    )
    out = tree_to_jsonable(tree)
    out["reassign_disagreement"] = int(np.sum(reassign(tree_data, tree) != labels))
    write_canonical_json(out, directory / "tree.json")
    (directory / "tree.dot").write_text(tree_to_dot(tree))

    lo = matrix.min(axis=0)
    hi = matrix.max(axis=0)
    report = {
        "schema": "nearopt-report/1",
        "pathway": "combined",
        "carrier": None,
        "transport": None,
        "epsilon": cfg.epsilon,
        "resolution": cfg.resolution,
        "seed": cfg.seed,
        "n_samples": combined.n,
        "variables": list(variables),
        "units": list(combined.units),
        "ranges": {
            v: [float(lo[i]), float(hi[i])] for i, v in enumerate(variables)
        },
        "optimum": None,
        "lcoh": None,
        "lcoe": None,
        "energy_consumption": None,
        "pinned": {},
        "histograms": _histograms(combined, lo, hi),
        "carrier_levels": list(levels),
        "carrier_counts": _carrier_counts(combined),
        "clusters": {
            "k": model.k,
            "inertia": model.inertia,
            "sizes": [int(c) for c in np.bincount(model.labels, minlength=model.k)],
        },
        "tree": {
            "max_depth": tree.max_depth,
            "training_accuracy": tree.training_accuracy,
            "reassign_disagreement": out["reassign_disagreement"],
        },
        "verification": None,
        "n_violations": None,
        "artifacts": {
            "samples": "design.samples",
            "clusters": "clusters.json",
            "tree": "tree.json",
        },
        "members": list(cfg.pathways),
    }
    write_canonical_json(report, directory / "report.json")
    manifest.record(
        "report",
        [
            "design.samples",
            "design.samples.json",
            "clusters.json",
            "tree.json",
            "tree.dot",
            "report.json",
        ],
        time.perf_counter() - started,
    )


def run_pipeline(
    cfg: RunConfig,
    stages: tuple[str, ...] = STAGES,
    pathways: tuple[str, ...] | None = None,
) -> None:
    """Run the given stages for each pathway; pathways run in parallel.

    When the config lists several pathways and the report stage is included,
    a pooled cross-carrier bundle is built after the per-pathway reports.
    """
    names = cfg.pathways if pathways is None else pathways
    for p in names:
        if p not in cfg.pathways:
            raise ConfigurationError(
                f"pathway {p!r} is not in this config; listed: {list(cfg.pathways)}"
            )
    for stage in stages:
        if stage not in _STAGE_FUNCS:
            raise ConfigurationError(
                f"unknown stage {stage!r}; valid: {list(STAGES)}"
            )

    def one(pathway: str) -> None:
        for stage in stages:
            run_stage(cfg, pathway, stage)

    workers = worker_count(limit=min(4, len(names)))
    if len(names) == 1 or workers == 1:
        for p in names:
            one(p)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, names))

    if "report" in stages and len(cfg.pathways) > 1 and set(names) == set(
        cfg.pathways
    ):
        _build_combined(cfg)
