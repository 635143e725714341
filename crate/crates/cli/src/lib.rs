//! Library surface of the CLI crate: the field serialization formats, kept
//! importable so integration tests can exercise read/write paths directly.

pub mod formats;
