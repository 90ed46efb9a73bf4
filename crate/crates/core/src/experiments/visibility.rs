//! Fringe visibility of a sideband as a phase is swept.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elements::{Element, EtalonSpec};
use crate::error::{Error, Result};
use crate::netlist::{propagate, Circuit};
use crate::sideband::total_shift;
use crate::spectrum::{DetuningGrid, SpectralEnvelope};
use crate::state::PhotonState;

use super::peaks::solve;
use super::scan::{expected_probabilities, sample_counts};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub phases: Vec<f64>,
    /// Detection probability at the etalon setting for each phase.
    pub expected: Vec<f64>,
    pub counts: Vec<u64>,
    /// Modulators whose first-order sideband passes the etalon.
    pub paths: Vec<String>,
}

/// `n` phases spread evenly over one turn.
pub fn full_turn(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Step the phase shifter `phase_id` through `phases` and record what
/// passes the etalon in front of `detect`.
#[allow(clippy::too_many_arguments)]
pub fn phase_sweep(
    c: &Circuit,
    phase_id: &str,
    phases: &[f64],
    detect: &str,
    etalon: &EtalonSpec,
    env: &SpectralEnvelope,
    photons: f64,
    seed: u64,
) -> Result<PhaseSweep> {
    if phases.len() < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 phases, got {}", phases.len())));
    }
    let lo = phases.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo) * phases.len() as f64 / (phases.len() - 1) as f64;
    if span < 2.0 * PI - 1e-9 {
        return Err(Error::InvalidParameter(format!("phases span {span:.3} rad, less than a full turn")));
    }
    let wire = c
        .elements()
        .iter()
        .find_map(|e| match e {
            Element::Phase(p) if p.id == phase_id => Some(p.wire.clone()),
            _ => None,
        })
        .ok_or_else(|| Error::InvalidParameter(format!("no phase shifter `{phase_id}`")))?;
    if !c.detects().iter().any(|d| d == detect) {
        return Err(Error::NotDetectWire(detect.to_string()));
    }
    let freqs = c.eom_freqs();
    let point = DetuningGrid::new(0.0, 0.0, 1.0)?;
    let mut expected = Vec::with_capacity(phases.len());
    let mut paths = Vec::new();
    for (k, &phi) in phases.iter().enumerate() {
        let ck = c.with_phase(phase_id, &wire, phi)?;
        let prop = propagate(&ck, &PhotonState::on_wire(ck.source()))?;
        let empty = PhotonState::empty();
        let s = prop.at(detect).unwrap_or(&empty);
        expected.push(expected_probabilities(s, detect, &freqs, env, etalon, &point)?[0]);
        if k == 0 {
            let half = etalon.linewidth_mhz * 1e-3;
            for (_, v, _) in s.iter().filter(|(_, v, a)| v.total_order() == 1 && a.norm_sqr() > 1e-30) {
                if (total_shift(v, &freqs)? - etalon.setting_ghz).abs() < half {
                    paths.extend(v.entries().map(|(id, _)| id.to_string()));
                }
            }
            paths.sort();
            paths.dedup();
        }
    }
    let counts = sample_counts(&expected, photons, 0.0, seed, 0);
    Ok(PhaseSweep { phases: phases.to_vec(), expected, counts, paths })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityMode {
    /// (max - min) / (max + min) of the expected probabilities.
    #[default]
    Expected,
    /// Amplitude over offset of a sinusoid fitted to the counts.
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Visibility {
    Fringe { value: f64 },
    /// Only one modulator feeds the sideband, so nothing can interfere.
    SinglePath,
    /// Nothing was detected.
    Undefined,
}

impl Visibility {
    pub fn value(self) -> Option<f64> {
        match self {
            Visibility::Fringe { value } => Some(value),
            _ => None,
        }
    }
}

/// Least-squares c0 + c1 cos(phi) + c2 sin(phi).
fn fit_sinusoid(phases: &[f64], y: &[f64]) -> Option<[f64; 3]> {
    let mut a = vec![vec![0.0; 3]; 3];
    let mut b = vec![0.0; 3];
    for (&phi, &v) in phases.iter().zip(y) {
        let f = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            b[i] += f[i] * v;
            for j in 0..3 {
                a[i][j] += f[i] * f[j];
            }
        }
    }
    solve(a, b).map(|x| [x[0], x[1], x[2]])
}

pub fn visibility(sweep: &PhaseSweep, mode: VisibilityMode) -> Visibility {
    if sweep.expected.iter().all(|p| *p <= 0.0) {
        return Visibility::Undefined;
    }
    if sweep.paths.len() < 2 {
        return Visibility::SinglePath;
    }
    match mode {
        VisibilityMode::Expected => {
            let max = sweep.expected.iter().copied().fold(0.0, f64::max);
            let min = sweep.expected.iter().copied().fold(f64::INFINITY, f64::min);
            Visibility::Fringe { value: (max - min) / (max + min) }
        }
        VisibilityMode::Fitted => {
            let y: Vec<f64> = sweep.counts.iter().map(|&k| k as f64).collect();
            match fit_sinusoid(&sweep.phases, &y) {
                Some([c0, c1, c2]) if c0 > 0.0 => Visibility::Fringe { value: c1.hypot(c2) / c0 },
                _ => Visibility::Undefined,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::reference::{build_reference, ReferenceConfig, ReferenceParams, DETECT_WIRE, OMEGA_TWIN};

    fn sweep(p: ReferenceParams, n: usize) -> PhaseSweep {
        let c = build_reference(ReferenceConfig::Fig3, &p).unwrap();
        let et = EtalonSpec::default().at(OMEGA_TWIN);
        phase_sweep(&c, "pzt", &full_turn(n), DETECT_WIRE, &et, &SpectralEnvelope::default(), 1e10, 3).unwrap()
    }

    #[test]
    fn balanced_twin_fringe() {
        let s = sweep(ReferenceParams::default(), 64);
        assert_eq!(s.paths, vec!["M1".to_string(), "M2".to_string()]);
        let v = visibility(&s, VisibilityMode::Expected).value().unwrap();
        assert!(v > 0.999, "{v}");
        let f = visibility(&s, VisibilityMode::Fitted).value().unwrap();
        assert!((f - 1.0).abs() < 1e-3, "{f}");
    }

    #[test]
    fn imbalanced_splitter() {
        let r: f64 = 0.45;
        let s = sweep(ReferenceParams { twin_reflectivity: r, ..Default::default() }, 64);
        let v = visibility(&s, VisibilityMode::Expected).value().unwrap();
        assert!((v - 2.0 * (r * (1.0 - r)).sqrt()).abs() < 1e-4, "{v}");
    }

    #[test]
    fn lone_modulator_is_single_path() {
        let p = ReferenceParams::default();
        let c = build_reference(ReferenceConfig::Fig3, &p)
            .unwrap()
            .map_eoms(|e| if e.id == "M2" { e.depth = 0.0 });
        let et = EtalonSpec::default().at(OMEGA_TWIN);
        let s = phase_sweep(&c, "pzt", &full_turn(16), DETECT_WIRE, &et, &SpectralEnvelope::default(), 1e6, 0).unwrap();
        assert_eq!(visibility(&s, VisibilityMode::Expected), Visibility::SinglePath);
    }

    #[test]
    fn sweep_preconditions() {
        let c = build_reference(ReferenceConfig::Fig3, &ReferenceParams::default()).unwrap();
        let (et, env) = (EtalonSpec::default(), SpectralEnvelope::default());
        assert!(phase_sweep(&c, "pzt", &full_turn(4), DETECT_WIRE, &et, &env, 1.0, 0).is_err());
        let half: Vec<f64> = (0..16).map(|k| k as f64 * 0.1).collect();
        assert!(phase_sweep(&c, "pzt", &half, DETECT_WIRE, &et, &env, 1.0, 0).is_err());
        assert!(phase_sweep(&c, "nope", &full_turn(16), DETECT_WIRE, &et, &env, 1.0, 0).is_err());
    }

    #[test]
    fn dark_sweep_is_undefined() {
        let s = PhaseSweep { phases: full_turn(8), expected: vec![0.0; 8], counts: vec![0; 8], paths: vec![] };
        assert_eq!(visibility(&s, VisibilityMode::Fitted), Visibility::Undefined);
    }
}
