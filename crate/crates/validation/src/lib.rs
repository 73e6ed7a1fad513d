//! Acceptance checks against the reference values; the checks live in
//! `tests/acceptance.rs` and run under `cargo test`.
