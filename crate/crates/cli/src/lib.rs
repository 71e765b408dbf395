//! Library surface of the command-line tool: scenario schema, bundled
//! presets, output writers and the command implementations. The binary in
//! `main.rs` is a thin argument-parsing shell over these.

pub mod commands;
pub mod output;
pub mod presets;
pub mod scenario;
