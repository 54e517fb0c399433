//! Criterion benchmarks for multiform-core; see `benches/`.
