//! Reference circuits, simulated etalon scans and their read-out.

pub mod peaks;
pub mod reference;
pub mod scan;
pub mod scenario;
pub mod visibility;

pub use reference::{build_reference, ReferenceConfig, ReferenceParams, DETECT_WIRE};
pub use scan::{
    expected_probabilities, line_probabilities, line_probability, line_profile, run_spectrum_scan, sample_counts, ScanConfig, ScanPoint,
    SpectralScan, DEFAULT_PHOTONS_PER_POINT,
};
pub use peaks::{
    detect_peaks, fit_lines, infer_weak_value, median_baseline, BaselineMode, LineFit, PeakConfig, PeakEntry,
    PeakReport, PeakStatus, Readout, WeakValueEstimate,
};
pub use visibility::{full_turn, phase_sweep, visibility, PhaseSweep, Visibility, VisibilityMode};
pub use scenario::{Scenario, SchemaIssue};
