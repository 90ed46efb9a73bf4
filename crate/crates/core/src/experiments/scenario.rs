//! Declarative description of one simulated measurement.
//!
//! ```toml
//! config = "a"              # a | b | c | fig3, or give `netlist` instead
//! detect = "out"
//!
//! [params]                  # reference circuits only
//! depth = 0.025
//! epsilon = 0.0
//! outer_phase = 0.0
//!
//! [envelope]
//! shape = "gaussian"        # or "lorentzian"
//! fwhm_mhz = 315.0
//!
//! [etalon]
//! linewidth_mhz = 100.0
//! fsr_ghz = 8.0
//!
//! [scan]
//! start_ghz = -4.0
//! stop_ghz = 4.0
//! step_ghz = 0.025
//! photons_per_point = 1e10
//! seed = 1
//!
//! [peaks]
//! k_sigma = 5.0
//! baseline = "fit"          # or "median"
//!
//! [sweep]                   # used by phase sweeps
//! phase = "pzt"
//! points = 64
//! setting_ghz = 2.1
//! ```

use serde::{Deserialize, Serialize};

use crate::elements::EtalonSpec;
use crate::netlist::{parse_netlist, Circuit};
use crate::spectrum::{DetuningGrid, SpectralEnvelope};

use super::peaks::PeakConfig;
use super::reference::{build_reference, ReferenceConfig, ReferenceParams, DETECT_WIRE, OMEGA_TWIN};
use super::scan::{ScanConfig, DEFAULT_PHOTONS_PER_POINT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub step_ghz: f64,
    pub photons_per_point: f64,
    pub seed: u64,
    pub dark_probability: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            start_ghz: -4.0,
            stop_ghz: 4.0,
            step_ghz: 0.025,
            photons_per_point: DEFAULT_PHOTONS_PER_POINT,
            seed: 0,
            dark_probability: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Phase shifter to step.
    pub phase: String,
    pub points: usize,
    /// Etalon position during the sweep, GHz.
    pub setting_ghz: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { phase: "pzt".into(), points: 64, setting_ghz: OMEGA_TWIN }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub config: Option<ReferenceConfig>,
    /// Netlist file, relative to the scenario file.
    pub netlist: Option<String>,
    pub detect: String,
    pub params: ReferenceParams,
    pub envelope: SpectralEnvelope,
    pub etalon: EtalonSpec,
    pub scan: ScanSection,
    pub peaks: PeakConfig,
    pub sweep: SweepSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            config: None,
            netlist: None,
            detect: DETECT_WIRE.into(),
            params: ReferenceParams::default(),
            envelope: SpectralEnvelope::default(),
            etalon: EtalonSpec::default(),
            scan: ScanSection::default(),
            peaks: PeakConfig::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// A schema problem at a dotted key path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl Scenario {
    /// Value-range checks that the type system cannot express.
    pub fn validate(&self) -> Vec<SchemaIssue> {
        let mut out = Vec::new();
        let mut issue = |path: &str, message: String| out.push(SchemaIssue { path: path.into(), message });
        match (&self.config, &self.netlist) {
            (None, None) => issue("config", "either `config` or `netlist` is required".into()),
            (Some(_), Some(_)) => issue("netlist", "give `config` or `netlist`, not both".into()),
            _ => {}
        }
        if let Err(e) = self.params.validate() {
            issue("params", e.to_string());
        }
        if let Err(e) = self.envelope.validate() {
            issue("envelope.fwhm_mhz", e.to_string());
        }
        if let Err(e) = self.etalon.validate() {
            issue("etalon", e.to_string());
        }
        let s = &self.scan;
        if !(s.step_ghz > 0.0) {
            issue("scan.step_ghz", format!("must be positive, got {}", s.step_ghz));
        }
        if !(s.stop_ghz >= s.start_ghz) {
            issue("scan.stop_ghz", format!("must not be below scan.start_ghz ({})", s.start_ghz));
        }
        if !(s.photons_per_point >= 0.0 && s.photons_per_point.is_finite()) {
            issue("scan.photons_per_point", format!("must be non-negative, got {}", s.photons_per_point));
        }
        if !(0.0..=1.0).contains(&s.dark_probability) {
            issue("scan.dark_probability", format!("must lie in [0, 1], got {}", s.dark_probability));
        }
        if !(self.peaks.k_sigma > 0.0) {
            issue("peaks.k_sigma", format!("must be positive, got {}", self.peaks.k_sigma));
        }
        if self.sweep.points < 8 {
            issue("sweep.points", format!("need at least 8, got {}", self.sweep.points));
        }
        out
    }

    pub fn scan_config(&self) -> ScanConfig {
        let s = &self.scan;
        ScanConfig {
            grid: DetuningGrid { start_ghz: s.start_ghz, stop_ghz: s.stop_ghz, step_ghz: s.step_ghz },
            photons_per_point: s.photons_per_point,
            seed: s.seed,
            dark_probability: s.dark_probability,
        }
    }

    /// The circuit named by the scenario. `netlist_text` is the content
    /// of the `netlist` file when one is given.
    pub fn circuit(&self, netlist_text: Option<&str>) -> std::result::Result<Circuit, Vec<String>> {
        match (self.config, netlist_text) {
            (Some(cfg), _) => build_reference(cfg, &self.params).map_err(|e| vec![e.to_string()]),
            (None, Some(text)) => parse_netlist(text).map_err(|d| d.iter().map(|x| x.to_string()).collect()),
            (None, None) => Err(vec!["no circuit given".into()]),
        }
    }
}
