"""HTTP what-if service over precomputed near-optimal sample bundles."""
