/**
 * Wire types for the what-if service.
 *
 * These mirror the JSON bodies the HTTP API produces and consumes. The UI
 * never manufactures values of these shapes on its own; every instance
 * comes straight from a parsed response.
 */

/** One run directory the service exposes, as listed by GET /pathways. */
export interface PathwayInfo {
  id: string;
  pathway: string;
  /** null for the pooled multi-carrier bundle */
  carrier: string | null;
  epsilon: number;
  n_samples: number;
  variables: string[];
  /** display units aligned index-by-index with `variables` */
  units: string[];
  /** variable -> [min, max] over all sampled designs */
  ranges: Record<string, [number, number]>;
  /** cost-optimal capacities; null for the pooled bundle */
  optimum: Record<string, number> | null;
  lcoh: number | null;
  carrier_levels: string[];
}

export interface Bound {
  min?: number;
  max?: number;
}

export interface TreeParams {
  max_depth?: number;
  min_leaf?: number;
  kmeans_k?: number;
  seed?: number;
}

export interface FilterRequest {
  run: string;
  carriers?: string[];
  bounds?: Record<string, Bound>;
  tree?: TreeParams;
}

export interface Histogram {
  edges: number[];
  counts: number[];
}

export interface CostStats {
  n_costed: number;
  min: number;
  max: number;
  mean: number;
}

export interface FilterResponse {
  run: string;
  n_total: number;
  n_surviving: number;
  surviving_fraction: number;
  histograms: Record<string, Histogram>;
  carrier_counts: Record<string, number>;
  cost: CostStats | null;
}

export interface TreeNodeOut {
  id: number;
  /** splitting variable name; null on leaves */
  feature: string | null;
  feature_index: number | null;
  threshold: number | null;
  left: number | null;
  right: number | null;
  /** per-class sample counts at this node */
  histogram: number[];
  n: number;
  class: number;
  class_name: string;
}

export interface TreeResponse {
  schema: string;
  feature_names: string[];
  n_classes: number;
  class_names: string[];
  max_depth: number;
  min_leaf: number;
  training_accuracy: number;
  reassign_disagreement: number;
  nodes: TreeNodeOut[];
}

/** Error body FastAPI emits for 4xx responses. */
export interface ErrorBody {
  detail: unknown;
}
