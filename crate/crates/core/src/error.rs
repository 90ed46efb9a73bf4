use thiserror::Error;

/// Errors raised by the simulation engine.
///
/// Netlist problems are not reported here; those come back as a list of
/// [`crate::netlist::Diagnostic`] values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown modulator `{0}`: no frequency registered")]
    UnknownEom(String),

    #[error("wiring error: {0}")]
    Wiring(String),

    #[error("wire `{0}` is not a detect wire")]
    NotDetectWire(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling violates Nyquist: max shift {max_shift_ghz} GHz needs more than {nyquist_ghz} GHz")]
    Nyquist { max_shift_ghz: f64, nyquist_ghz: f64 },

    #[error("spectral grids do not overlap")]
    DisjointGrids,
}

pub type Result<T> = std::result::Result<T, Error>;
