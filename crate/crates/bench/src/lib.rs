//! Benchmarks for the pullback iteration live in `benches/`.
