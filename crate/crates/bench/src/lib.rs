//! Criterion benchmarks for the elliptic solve, the right-hand side and the
//! circle model; see `benches/solver.rs`.
