//! Criterion benchmarks for reeb-core live in `benches/`.
