//! Single photons in linear-optical networks with electro-optic phase
//! modulators.
//!
//! Each modulator writes its drive frequency into the photon's spectrum as
//! sidebands. The engine propagates the joint path/sideband state through a
//! network, renders the detected spectrum seen through a scanning etalon,
//! and reads back which modulators the photon "visited". The [`tsvf`]
//! module predicts the same thing from forward and backward evolving
//! states and weak values, and [`oracle`] cross-checks the sideband engine
//! against a brute-force time-domain simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod netlist;
pub mod oracle;
pub mod sideband;
pub mod spectrum;
pub mod state;
pub mod tsvf;

pub use elements::{
    apply_beam_splitter, apply_block, apply_eom, apply_phase, etalon_transmission, BeamSplitterSpec, BlockSpec,
    Element, EomSpec, EtalonSpec, PhaseShifterSpec, SidebandConvention,
};
pub use error::{Error, Result};
pub use experiments::{
    build_reference, detect_peaks, infer_weak_value, run_spectrum_scan, visibility, PeakConfig, PeakReport,
    ReferenceConfig, ReferenceParams, ScanConfig, SpectralScan,
};
pub use oracle::{compare, time_domain_propagate, TimeDomainConfig};
pub use netlist::{parse_netlist, propagate, validate_circuit, Circuit, DiagCode, Diagnostic, Propagation};
pub use sideband::{total_shift, SidebandVector};
pub use spectrum::{render_spectrum, DetuningGrid, EnvelopeShape, SpectralDensity, SpectralEnvelope};
pub use state::PhotonState;
pub use tsvf::{tsvf_trajectory, two_state, weak_value, weak_value_scaling, ProjectorSpec, TwoStateVector, WeakValueReport};
