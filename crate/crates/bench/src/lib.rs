//! Criterion benchmarks for bernfrac-core; see `benches/`.
