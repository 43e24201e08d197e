//! Criterion benchmarks for `crn-core`; see `benches/core.rs`.
//!
//! Run with `cargo bench -p crn-bench`.
