//! Acceptance suite for `sparse-ula`; the checks live in `tests/acceptance.rs`.
