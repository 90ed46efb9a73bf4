//! Netlist language, validated circuits, and state propagation.
//!
//! A netlist is line oriented; `#` starts a comment:
//!
//! ```text
//! source <wire>
//! bs <id> in=<w>[,<w>] out=<w>,<w> (r=<float> | ratio=<int>:<int>)
//! phase <id> wire=<w> phi=<float_rad>
//! eom <id> wire=<w> omega_ghz=<float> depth=<float> [order=<int>]
//! block <id> wire=<w>
//! detect <wire>
//! ```
//!
//! Every wire has one writer (the source or a beam splitter) and at most
//! one reader (a beam splitter or a detector). Phase shifters, modulators
//! and blocks sit on a wire and act in the order they are written.

mod circuit;
mod diagnostics;
mod parse;

pub use circuit::{propagate, validate_circuit, Circuit, EomInfo, Propagation};
pub use diagnostics::{DiagCode, Diagnostic, Span};
pub use parse::parse_netlist;
