//! Criterion benchmarks for the simulator pipeline; see `benches/`.
