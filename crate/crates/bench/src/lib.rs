//! Benchmarks for the dampwave solvers live in `benches/`.
