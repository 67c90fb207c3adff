//! Benchmarks for the landau-hf kernels live in `benches/`.
