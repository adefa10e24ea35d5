//! Criterion benchmarks for the graph and image pipeline; see `benches/`.
