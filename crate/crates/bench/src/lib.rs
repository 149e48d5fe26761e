//! Criterion benchmarks for the walk counter and model training; see `benches/`.
