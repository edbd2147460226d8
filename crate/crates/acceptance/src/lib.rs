//! Acceptance criteria for `lrscov-core`; see `tests/acceptance.rs`.
