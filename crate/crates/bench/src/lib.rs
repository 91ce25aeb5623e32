//! Criterion benchmarks for the vqforge hot paths. Run with
//! `cargo bench -p vqforge-bench`; the code lives in `benches/`.
