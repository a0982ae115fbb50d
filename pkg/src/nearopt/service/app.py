"""FastAPI what-if service over finished run directories.

The service loads every report bundle under one root at boot and treats the
sample matrices as immutable: filtering, statistics, and tree fits are pure
reads, so concurrent identical requests return identical bodies.  Fresh
bounded MAA runs are the one slow operation and go through a FIFO job queue
with file-persisted status instead of blocking a request.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from ..cart import fit_cart, reassign, tree_to_jsonable
from ..chain import build_pathway, load_weather, pathway_names, to_lp
from ..clustering import Dataset, dataset_from_samples, kmeans
from ..costing import load_catalog
from ..errors import ConfigurationError, NearoptError, ParameterError
from ..maa import MAAConfig, result_to_jsonable, run_maa
from ..pipeline import MGA_UNITS, RunConfig
from ..sampling import SampleSet, read_samples
from ..util import write_canonical_json
from .schemas import (
    Bound,
    CostStats,
    FilterRequest,
    FilterResponse,
    Histogram,
    JobRequest,
    JobStatus,
    PathwayInfo,
    TreeParams,
    TreeResponse,
)

__all__ = ["create_app", "load_bundles"]

# At most this many tree fits run at once; requests beyond it queue on the
# semaphore rather than oversubscribing the CPU.
_TREE_WORKERS = 2


@dataclass(frozen=True)
class Bundle:
    """One loaded run: report plus the sample matrix it describes.

    The full-set tree dataset and per-feature sorted row orders are built
    once at load so repeated tree fits skip the n-log-n sort; filtered
    requests derive subset orders from them by masking, which preserves
    sortedness.
    """

    id: str
    directory: Path
    report: dict
    samples: SampleSet
    tree_data: Dataset
    orders: tuple[np.ndarray, ...]


def load_bundles(root: Path) -> dict[str, Bundle]:
    root = Path(root)
    bundles: dict[str, Bundle] = {}
    if root.exists():
        for sub in sorted(p for p in root.iterdir() if p.is_dir()):
            report_path = sub / "report.json"
            samples_path = sub / "design.samples"
            if not (report_path.exists() and samples_path.exists()):
                continue
            report = json.loads(report_path.read_text())
            samples = read_samples(samples_path)
            tree_data = dataset_from_samples(samples, include_carrier=False)
            # Sort the exact values the tree fit will scan (the dataset's
            # denormalized view), so cached orders match a fresh sort.
            phys = tree_data.denormalize(tree_data.continuous)
            orders = tuple(
                np.argsort(phys[:, j]) for j in range(phys.shape[1])
            )
            bundles[sub.name] = Bundle(
                id=sub.name,
                directory=sub,
                report=report,
                samples=samples,
                tree_data=tree_data,
                orders=orders,
            )
    if not bundles:
        raise ConfigurationError(
            f"no report bundles under {root}; run `nearopt report` first"
        )
    return bundles


def _survivor_mask(bundle: Bundle, request: FilterRequest) -> np.ndarray:
    samples = bundle.samples
    mask = np.ones(samples.n, dtype=bool)
    known = list(samples.variables)
    for name, bound in request.bounds.items():
        if name not in samples.variables:
            raise HTTPException(
                status_code=400,
                detail=f"unknown variable {name!r}; known variables: {known}",
            )
        col = samples.matrix[:, samples.variables.index(name)]
        if bound.min is not None:
            mask &= col >= bound.min
        if bound.max is not None:
            mask &= col <= bound.max
    if request.carriers is not None:
        levels = list(samples.carrier_levels)
        if not levels:
            raise HTTPException(
                status_code=400,
                detail=f"run {bundle.id!r} has no carrier tags to filter on",
            )
        codes = []
        for c in request.carriers:
            if c not in levels:
                raise HTTPException(
                    status_code=400,
                    detail=f"unknown carrier {c!r}; known carriers: {levels}",
                )
            codes.append(levels.index(c))
        mask &= np.isin(samples.carrier_tag, codes)
    return mask


def _histograms_for(bundle: Bundle, mask: np.ndarray) -> dict[str, Histogram]:
    """Survivor histograms over the run's published bin edges.

    Reusing the report's edges keeps filtered overlays aligned with the
    unfiltered backdrop bin for bin.
    """
    out: dict[str, Histogram] = {}
    sub = bundle.samples.matrix[mask]
    for i, name in enumerate(bundle.samples.variables):
        edges = np.asarray(bundle.report["histograms"][name]["edges"])
        col = np.clip(sub[:, i], edges[0], edges[-1]) if len(sub) else sub[:, i]
        counts, _ = np.histogram(col, bins=edges)
        out[name] = Histogram(
            edges=[float(e) for e in edges], counts=[int(c) for c in counts]
        )
    return out


def _carrier_counts_for(bundle: Bundle, mask: np.ndarray) -> dict[str, int]:
    samples = bundle.samples
    if samples.carrier_tag is None:
        return {}
    counts = np.bincount(
        samples.carrier_tag[mask], minlength=len(samples.carrier_levels)
    )
    return {
        level: int(counts[i]) for i, level in enumerate(samples.carrier_levels)
    }


def _cost_stats(bundle: Bundle, mask: np.ndarray) -> CostStats | None:
    cost = bundle.samples.cost
    if cost is None:
        return None
    sel = mask & np.isfinite(cost)
    n = int(sel.sum())
    if n == 0:
        return None
    vals = cost[sel]
    return CostStats(
        n_costed=n,
        min=float(vals.min()),
        max=float(vals.max()),
        mean=float(vals.mean()),
    )


def _subset_samples(bundle: Bundle, mask: np.ndarray) -> SampleSet:
    s = bundle.samples
    if mask.all():
        return s
    return SampleSet(
        matrix=s.matrix[mask],
        variables=s.variables,
        seed=s.seed,
        hull_id=s.hull_id,
        units=s.units,
        carrier_tag=None if s.carrier_tag is None else s.carrier_tag[mask],
        carrier_levels=s.carrier_levels,
    )


def _tree_inputs(bundle: Bundle, mask: np.ndarray) -> tuple[Dataset, list[np.ndarray]]:
    """Row subset of the cached tree dataset plus matching sorted orders.

    Slicing the loaded dataset keeps its normalization bounds, so the
    per-feature orders cached at load, restricted to surviving rows and
    renumbered, still sort exactly the values the fit will scan.
    """
    full = bundle.tree_data
    if mask.all():
        return full, list(bundle.orders)
    data = replace(full, continuous=full.continuous[mask])
    remap = np.cumsum(mask) - 1
    orders = [remap[o[mask[o]]] for o in bundle.orders]
    return data, orders


class _JobRunner:
    """FIFO queue of bounded MAA runs with file-persisted status."""

    def __init__(self, root: Path, catalog_path: Path | None, weather_path: Path | None):
        self.jobs_dir = Path(root) / "jobs"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.catalog_path = catalog_path
        self.weather_path = weather_path
        self.lock = threading.Lock()
        self.queue: "queue.Queue[str]" = queue.Queue()
        self.counter = 0
        for path in sorted(self.jobs_dir.glob("job-*.json")):
            doc = json.loads(path.read_text())
            self.counter = max(self.counter, int(doc["position"]))
            # Jobs from a previous process cannot resume; say so rather than
            # showing them queued forever.
            if doc["status"] in ("queued", "running"):
                doc["status"] = "interrupted"
                write_canonical_json(doc, path)
        self.worker = threading.Thread(target=self._run_loop, daemon=True)
        self.worker.start()

    def path_of(self, job_id: str) -> Path:
        return self.jobs_dir / f"{job_id}.json"

    def submit(self, request: JobRequest, defaults: dict) -> dict:
        with self.lock:
            self.counter += 1
            job_id = f"job-{self.counter:04d}"
            doc = {
                "id": job_id,
                "status": "queued",
                "pathway": request.pathway,
                "epsilon": request.epsilon or defaults["epsilon"],
                "resolution": defaults["resolution"],
                "annual_demand": defaults["annual_demand"],
                "distance_km": defaults["distance_km"],
                "bounds": {
                    k: {"min": b.min, "max": b.max}
                    for k, b in sorted(request.bounds.items())
                },
                "position": self.counter,
                "error": None,
                "hull": None,
            }
            write_canonical_json(doc, self.path_of(job_id))
        self.queue.put(job_id)
        return doc

    def load(self, job_id: str) -> dict | None:
        path = self.path_of(job_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def _run_loop(self) -> None:
        while True:
            job_id = self.queue.get()
            doc = self.load(job_id)
            if doc is None or doc["status"] != "queued":
                continue
            doc["status"] = "running"
            write_canonical_json(doc, self.path_of(job_id))
            try:
                doc["hull"] = self._execute(doc)
                doc["status"] = "done"
            except (NearoptError, ValueError) as exc:
                doc["status"] = "failed"
                doc["error"] = str(exc)
            write_canonical_json(doc, self.path_of(job_id))

    def _execute(self, doc: dict) -> dict:
        carrier, transport = doc["pathway"].rsplit("_", 1)
        cfg = RunConfig(
            pathways=(doc["pathway"],),
            output_dir=self.jobs_dir,
            epsilon=doc["epsilon"],
            resolution=doc["resolution"],
            annual_demand=doc["annual_demand"],
            distance_km=doc["distance_km"],
            **(
                {"catalog_path": self.catalog_path}
                if self.catalog_path is not None
                else {}
            ),
            **(
                {"weather_path": self.weather_path}
                if self.weather_path is not None
                else {}
            ),
        )
        catalog = load_catalog(cfg.catalog_path)
        weather = load_weather(cfg.weather_path)
        graph = build_pathway(cfg.pathway_config(doc["pathway"]), catalog, weather)
        lp = to_lp(graph, cfg.resolution)
        lower = lp.lower.copy()
        upper = lp.upper.copy()
        for tag, bound in doc["bounds"].items():
            col = lp.mga[tag]
            if bound["min"] is not None:
                lower[col] = max(lower[col], bound["min"])
            if bound["max"] is not None:
                upper[col] = min(upper[col], bound["max"])
        lp = replace(lp, lower=lower, upper=upper)
        maa_cfg = MAAConfig(epsilon=doc["epsilon"], mga_variables=tuple(sorted(MGA_UNITS)))
        result = run_maa(lp, maa_cfg)
        return result_to_jsonable(result, maa_cfg)


def create_app(
    bundle_root: str | Path,
    catalog_path: Path | None = None,
    weather_path: Path | None = None,
) -> FastAPI:
    """Build the service over every report bundle under bundle_root."""
    root = Path(bundle_root)
    bundles = load_bundles(root)
    jobs = _JobRunner(root, catalog_path, weather_path)
    tree_gate = threading.Semaphore(_TREE_WORKERS)

    app = FastAPI(
        title="nearopt what-if service",
        description=(
            "Filter precomputed near-optimal design samples, inspect the "
            "surviving space, and re-fit decision trees on it."
        ),
        version="1",
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def bundle_of(run: str) -> Bundle:
        bundle = bundles.get(run)
        if bundle is None:
            raise HTTPException(
                status_code=404,
                detail=f"unknown run {run!r}; loaded: {sorted(bundles)}",
            )
        return bundle

    @app.get("/pathways", response_model=list[PathwayInfo])
    def get_pathways() -> list[PathwayInfo]:
        out = []
        for bundle in bundles.values():
            r = bundle.report
            out.append(
                PathwayInfo(
                    id=bundle.id,
                    pathway=r["pathway"],
                    carrier=r["carrier"],
                    epsilon=r["epsilon"],
                    n_samples=r["n_samples"],
                    variables=r["variables"],
                    units=r["units"],
                    ranges={k: tuple(v) for k, v in r["ranges"].items()},
                    optimum=r["optimum"],
                    lcoh=r["lcoh"],
                    carrier_levels=r["carrier_levels"],
                )
            )
        return out

    @app.post("/filter", response_model=FilterResponse)
    def post_filter(request: FilterRequest) -> FilterResponse:
        bundle = bundle_of(request.run)
        mask = _survivor_mask(bundle, request)
        n = bundle.samples.n
        surviving = int(mask.sum())
        return FilterResponse(
            run=bundle.id,
            n_total=n,
            n_surviving=surviving,
            surviving_fraction=surviving / n,
            histograms=_histograms_for(bundle, mask),
            carrier_counts=_carrier_counts_for(bundle, mask),
            cost=_cost_stats(bundle, mask),
        )

    @app.post("/tree", response_model=TreeResponse, response_model_by_alias=True)
    def post_tree(request: FilterRequest) -> dict:
        bundle = bundle_of(request.run)
        mask = _survivor_mask(bundle, request)
        n_sub = int(mask.sum())
        if n_sub == 0:
            raise HTTPException(
                status_code=422, detail="no samples survive the filter"
            )
        params = request.tree or TreeParams()
        min_leaf = params.min_leaf or max(1, round(0.01 * n_sub))
        if n_sub < 2 * min_leaf:
            raise HTTPException(
                status_code=422,
                detail=f"{n_sub} surviving rows cannot host two leaves of "
                f"{min_leaf} (min_leaf)",
            )
        try:
            if params.kmeans_k is not None:
                subset = _subset_samples(bundle, mask)
                cluster_data = dataset_from_samples(subset, include_carrier=False)
                model = kmeans(cluster_data, params.kmeans_k, seed=params.seed)
                labels = model.labels.astype(np.int32)
                class_names = tuple(
                    f"cluster_{i}" for i in range(params.kmeans_k)
                )
            else:
                tags = bundle.samples.carrier_tag
                if tags is None:
                    raise HTTPException(
                        status_code=422,
                        detail="run has no carrier tags; pass tree.kmeans_k "
                        "to label by clustering",
                    )
                labels = tags[mask].astype(np.int32)
                if len(np.unique(labels)) < 2:
                    raise HTTPException(
                        status_code=422,
                        detail="filtered subset has a single carrier; "
                        "a tree needs at least two classes",
                    )
                class_names = bundle.samples.carrier_levels[: int(labels.max()) + 1]
            data, orders = _tree_inputs(bundle, mask)
            with tree_gate:
                tree = fit_cart(
                    data,
                    labels,
                    max_depth=params.max_depth,
                    min_leaf=params.min_leaf,
                    class_names=class_names,
                    presorted=orders,
                )
        except ParameterError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        out = tree_to_jsonable(tree)
        out["reassign_disagreement"] = int(np.sum(reassign(data, tree) != labels))
        return out

    @app.post("/maa-jobs", response_model=JobStatus, status_code=202)
    def post_job(request: JobRequest) -> JobStatus:
        if request.pathway not in pathway_names():
            raise HTTPException(
                status_code=400,
                detail=f"unknown pathway {request.pathway!r}; "
                f"valid: {pathway_names()}",
            )
        for name in request.bounds:
            if name not in MGA_UNITS:
                raise HTTPException(
                    status_code=400,
                    detail=f"unknown variable {name!r}; "
                    f"known variables: {sorted(MGA_UNITS)}",
                )
        defaults = {
            "epsilon": 0.1,
            "resolution": 24,
            "annual_demand": 20e6,
            "distance_km": 2517.0,
        }
        bundle = bundles.get(request.pathway)
        if bundle is not None:
            metrics_path = bundle.directory / "metrics.json"
            if metrics_path.exists():
                metrics = json.loads(metrics_path.read_text())
                defaults = {
                    "epsilon": bundle.report["epsilon"],
                    "resolution": metrics["resolution"],
                    "annual_demand": metrics["annual_demand"],
                    "distance_km": metrics["distance_km"],
                }
        doc = jobs.submit(request, defaults)
        return JobStatus(**{k: doc[k] for k in JobStatus.model_fields})

    @app.get("/jobs/{job_id}", response_model=JobStatus)
    def get_job(job_id: str) -> JobStatus:
        doc = jobs.load(job_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"no such job {job_id!r}")
        return JobStatus(**{k: doc[k] for k in JobStatus.model_fields})

    @app.get("/spec")
    def get_spec() -> dict:
        return app.openapi()

    return app
