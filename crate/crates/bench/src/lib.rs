//! Criterion benchmarks for the geometry engine; see `benches/geometry.rs`.
