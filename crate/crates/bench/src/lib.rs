//! Criterion benchmarks for the simulation kernels; see `benches/kernels.rs`.
