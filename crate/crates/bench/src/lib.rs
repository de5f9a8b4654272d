//! Criterion benchmarks for the transport solvers; see `benches/`.
