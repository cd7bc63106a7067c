//! Criterion benchmarks for the hamforge oracles; see `benches/oracle.rs`.
