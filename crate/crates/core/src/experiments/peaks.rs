//! Reading a scan back: which modulators left a sideband, and how strong.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::EomInfo;

use super::scan::{line_profile, SpectralScan};

pub const DEFAULT_K_SIGMA: f64 = 5.0;
pub const DEFAULT_EXCLUSION_LINEWIDTHS: f64 = 3.0;

/// Where the background under a sideband comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMode {
    /// Fitted contribution of every other line at the sideband frequency.
    #[default]
    Fit,
    /// Median of the counts outside the carrier and sideband windows.
    Median,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakConfig {
    pub k_sigma: f64,
    /// Half width of the windows left out of the median, in etalon linewidths.
    pub exclusion_linewidths: f64,
    pub baseline: BaselineMode,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            k_sigma: DEFAULT_K_SIGMA,
            exclusion_linewidths: DEFAULT_EXCLUSION_LINEWIDTHS,
            baseline: BaselineMode::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakStatus {
    Present,
    Absent,
    NotAssessable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakEntry {
    pub eom: String,
    pub omega_ghz: f64,
    pub counts: Option<u64>,
    pub baseline: f64,
    pub excess: f64,
    pub significance: f64,
    pub status: PeakStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub k_sigma: f64,
    pub baseline: BaselineMode,
    pub entries: Vec<PeakEntry>,
}

impl PeakReport {
    pub fn present(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|e| e.status == PeakStatus::Present)
            .map(|e| e.eom.clone())
            .collect()
    }

    pub fn entry(&self, eom: &str) -> Option<&PeakEntry> {
        self.entries.iter().find(|e| e.eom == eom)
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Median of the counts away from the carrier and every +-Omega.
pub fn median_baseline(scan: &SpectralScan, eoms: &BTreeMap<String, EomInfo>, exclusion_linewidths: f64) -> f64 {
    let half = exclusion_linewidths * scan.etalon.linewidth_mhz * 1e-3;
    let mut centers = vec![0.0];
    for e in eoms.values() {
        centers.push(e.omega_ghz);
        centers.push(-e.omega_ghz);
    }
    let kept = scan
        .points
        .iter()
        .filter(|p| centers.iter().all(|c| (p.detuning_ghz - c).abs() > half))
        .map(|p| p.counts as f64)
        .collect();
    median(kept).unwrap_or(0.0)
}

/// Solve a small dense system; `None` when it is singular.
pub(crate) fn solve(a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    m.lu().solve(&DVector::from_vec(b)).map(|x| x.iter().copied().collect())
}

/// Amplitudes of instrument lines at known positions fitted to a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    /// Line centers, GHz.
    pub centers: Vec<f64>,
    /// Fitted line weights; a line of weight A peaks at A * profile(0).
    pub weights: Vec<f64>,
    /// One-sigma errors of the weights.
    pub errors: Vec<f64>,
    /// Line-shape value at zero offset.
    pub peak_profile: f64,
    /// Fitted contribution of every line at every scan point.
    contributions: Vec<Vec<f64>>,
}

impl LineFit {
    pub fn index_of(&self, center: f64) -> Option<usize> {
        self.centers.iter().position(|c| (c - center).abs() < 1e-9)
    }

    /// Model value at scan point `i` without line `skip`.
    pub fn others_at(&self, i: usize, skip: usize) -> f64 {
        self.contributions
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != skip)
            .map(|(_, c)| c[i])
            .sum()
    }
}

/// Weighted least-squares fit of the etalon line shape at the carrier and
/// at +-Omega of every registered modulator inside the scan.
///
/// `values` are counts (or expected counts) on the scan grid; weights are
/// their Poisson variances. Dark counts enter as a flat term.
pub fn fit_lines(scan: &SpectralScan, values: &[f64], eoms: &BTreeMap<String, EomInfo>) -> Result<LineFit> {
    let mut centers: Vec<f64> = vec![0.0];
    for e in eoms.values() {
        for c in [e.omega_ghz, -e.omega_ghz] {
            if scan.grid.covers(c) && !centers.iter().any(|x| (x - c).abs() < 1e-9) {
                centers.push(c);
            }
        }
    }
    let xs: Vec<f64> = scan.points.iter().map(|p| p.detuning_ghz).collect();
    let mut basis = Vec::with_capacity(centers.len());
    for c in &centers {
        let offsets: Vec<f64> = xs.iter().map(|x| x - c).collect();
        basis.push(line_profile(&scan.envelope, &scan.etalon, &offsets)?);
    }
    let peak_profile = line_profile(&scan.envelope, &scan.etalon, &[0.0])?[0];
    let dark = scan.photons_per_point * scan.dark_probability;
    let w: Vec<f64> = values.iter().map(|v| 1.0 / v.max(1.0)).collect();
    let y: Vec<f64> = values.iter().map(|v| v - dark).collect();
    let n = centers.len();
    let mut normal = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..xs.len() {
        for a in 0..n {
            rhs[a] += w[i] * basis[a][i] * y[i];
            for b in 0..n {
                normal[a][b] += w[i] * basis[a][i] * basis[b][i];
            }
        }
    }
    let singular = || Error::InvalidParameter("line fit is singular".into());
    let weights = solve(normal.clone(), rhs).ok_or_else(singular)?;
    let mut errors = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve(normal.clone(), e).ok_or_else(singular)?;
        errors.push(col[j].max(0.0).sqrt());
    }
    let contributions = basis
        .iter()
        .zip(&weights)
        .map(|(b, a)| b.iter().map(|q| a * q).collect())
        .collect();
    Ok(LineFit { centers, weights, errors, peak_profile, contributions })
}

/// Flag every registered modulator whose +Omega sideband stands out.
///
/// A peak is present iff counts - baseline >= k_sigma * sqrt(baseline + counts).
pub fn detect_peaks(scan: &SpectralScan, eoms: &BTreeMap<String, EomInfo>, cfg: &PeakConfig) -> Result<PeakReport> {
    let counts: Vec<f64> = scan.points.iter().map(|p| p.counts as f64).collect();
    let dark = scan.photons_per_point * scan.dark_probability;
    let fit = match cfg.baseline {
        BaselineMode::Fit => Some(fit_lines(scan, &counts, eoms)?),
        BaselineMode::Median => None,
    };
    let floor = median_baseline(scan, eoms, cfg.exclusion_linewidths);
    let entries = eoms
        .iter()
        .map(|(id, info)| {
            let idx = scan.index_of(info.omega_ghz);
            let baseline = match (&fit, idx) {
                (Some(f), Some(i)) => f.index_of(info.omega_ghz).map(|j| dark + f.others_at(i, j).max(0.0)),
                (None, Some(_)) => Some(floor),
                _ => None,
            };
            let counts = idx.map(|i| scan.points[i].counts);
            let (Some(k), Some(b)) = (counts, baseline) else {
                return PeakEntry {
                    eom: id.clone(),
                    omega_ghz: info.omega_ghz,
                    counts,
                    baseline: f64::NAN,
                    excess: f64::NAN,
                    significance: f64::NAN,
                    status: PeakStatus::NotAssessable,
                };
            };
            let excess = k as f64 - b;
            let sigma = (b + k as f64).sqrt();
            let significance = if sigma > 0.0 { excess / sigma } else { 0.0 };
            let status = if significance >= cfg.k_sigma { PeakStatus::Present } else { PeakStatus::Absent };
            PeakEntry { eom: id.clone(), omega_ghz: info.omega_ghz, counts, baseline: b, excess, significance, status }
        })
        .collect();
    Ok(PeakReport { k_sigma: cfg.k_sigma, baseline: cfg.baseline, entries })
}

/// Which numbers a read-out uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    /// Sampled photon counts.
    #[default]
    Counts,
    /// Noise-free expected counts.
    Expected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValueEstimate {
    pub eom: String,
    /// |W|, absent when the carrier is empty or a line is off the grid.
    pub value: Option<f64>,
    /// One-sigma shot-noise error; zero for expected read-out.
    pub error: f64,
    pub reason: Option<String>,
}

/// |W| = (2/m) sqrt(A(Omega) / A(0)) from fitted line weights.
///
/// Carrier and sideband share envelope and etalon, so the line-shape
/// overlap factor cancels in the ratio of fitted weights.
pub fn infer_weak_value(
    scan: &SpectralScan,
    eoms: &BTreeMap<String, EomInfo>,
    eom: &str,
    depth: f64,
    readout: Readout,
) -> WeakValueEstimate {
    let fail = |why: String| WeakValueEstimate { eom: eom.to_string(), value: None, error: f64::NAN, reason: Some(why) };
    if depth <= 0.0 {
        return fail("modulation depth must be positive".into());
    }
    let Some(info) = eoms.get(eom) else {
        return fail(format!("unknown modulator `{eom}`"));
    };
    let values: Vec<f64> = match readout {
        Readout::Counts => scan.points.iter().map(|p| p.counts as f64).collect(),
        Readout::Expected => scan
            .points
            .iter()
            .map(|p| scan.photons_per_point * (p.expected + scan.dark_probability))
            .collect(),
    };
    let fit = match fit_lines(scan, &values, eoms) {
        Ok(f) => f,
        Err(e) => return fail(e.to_string()),
    };
    let Some(x) = fit.index_of(info.omega_ghz) else {
        return fail("scan does not cover the sideband".into());
    };
    let (a0, ax) = (fit.weights[0], fit.weights[x].max(0.0));
    if !(a0 > 0.0) || values.iter().all(|v| *v <= 0.0) {
        return fail("no carrier counts".into());
    }
    let w = 2.0 / depth * (ax / a0).sqrt();
    let error = match readout {
        Readout::Expected => 0.0,
        Readout::Counts if ax > 0.0 => 0.5 * w * ((fit.errors[x] / ax).powi(2) + (fit.errors[0] / a0).powi(2)).sqrt(),
        Readout::Counts => f64::NAN,
    };
    WeakValueEstimate { eom: eom.to_string(), value: Some(w), error, reason: None }
}
