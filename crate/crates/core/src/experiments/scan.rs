//! Etalon scans with Poisson photon counting.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elements::EtalonSpec;
use crate::error::{Error, Result};
use crate::netlist::{propagate, Circuit};
use crate::spectrum::{shifted_components, DetuningGrid, EnvelopeShape, SpectralEnvelope};
use crate::state::PhotonState;

/// Enough for the weakest first-order peak of config a to stand well
/// clear of the etalon leakage of the carrier.
pub const DEFAULT_PHOTONS_PER_POINT: f64 = 1e10;

/// Lorentzian replicas summed explicitly before the analytic tail.
const LORENTZIAN_REPLICAS: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub grid: DetuningGrid,
    pub photons_per_point: f64,
    pub seed: u64,
    /// Dark-count probability per photon.
    pub dark_probability: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            grid: DetuningGrid { start_ghz: -4.0, stop_ghz: 4.0, step_ghz: 0.025 },
            photons_per_point: DEFAULT_PHOTONS_PER_POINT,
            seed: 0,
            dark_probability: 0.0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        DetuningGrid::new(self.grid.start_ghz, self.grid.stop_ghz, self.grid.step_ghz)?;
        if !(self.photons_per_point >= 0.0 && self.photons_per_point.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "photons per point must be non-negative, got {}",
                self.photons_per_point
            )));
        }
        if !(0.0..=1.0).contains(&self.dark_probability) {
            return Err(Error::InvalidParameter(format!(
                "dark probability {} outside [0, 1]",
                self.dark_probability
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub detuning_ghz: f64,
    /// Detection probability per photon, dark counts excluded.
    pub expected: f64,
    pub counts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralScan {
    pub detect: String,
    pub grid: DetuningGrid,
    pub etalon: EtalonSpec,
    pub envelope: SpectralEnvelope,
    pub photons_per_point: f64,
    pub dark_probability: f64,
    pub points: Vec<ScanPoint>,
}

impl SpectralScan {
    pub fn index_of(&self, detuning: f64) -> Option<usize> {
        self.grid.nearest(detuning)
    }

    pub fn counts_at(&self, detuning: f64) -> Option<u64> {
        self.index_of(detuning).map(|i| self.points[i].counts)
    }

    pub fn expected_at(&self, detuning: f64) -> Option<f64> {
        self.index_of(detuning).map(|i| self.points[i].expected)
    }

    /// Mean counts at a point, dark counts included.
    pub fn mean_counts_at(&self, detuning: f64) -> Option<f64> {
        self.expected_at(detuning)
            .map(|p| self.photons_per_point * (p + self.dark_probability))
    }

    pub fn total_counts(&self) -> u64 {
        self.points.iter().map(|p| p.counts).sum()
    }
}

/// Components with coinciding shifts merged into one amplitude.
fn merged_components(s: &PhotonState, wire: &str, freqs: &BTreeMap<String, f64>) -> Result<Vec<(f64, Complex64)>> {
    let mut by_shift: BTreeMap<i64, (f64, Complex64)> = BTreeMap::new();
    for (shift, a) in shifted_components(s, wire, freqs)? {
        let key = (shift * 1e9).round() as i64;
        by_shift.entry(key).or_insert((shift, Complex64::new(0.0, 0.0))).1 += a;
    }
    Ok(by_shift.into_values().filter(|(_, a)| a.norm_sqr() > 0.0).collect())
}

/// Probability carried by each spectral line, keyed by net shift (GHz).
/// Components with the same shift add as amplitudes.
pub fn line_probabilities(s: &PhotonState, wire: &str, eom_freqs: &BTreeMap<String, f64>) -> Result<Vec<(f64, f64)>> {
    Ok(merged_components(s, wire, eom_freqs)?.into_iter().map(|(sh, a)| (sh, a.norm_sqr())).collect())
}

/// Probability of the line at `shift`, zero if there is none.
pub fn line_probability(lines: &[(f64, f64)], shift: f64) -> f64 {
    lines.iter().filter(|l| (l.0 - shift).abs() < 1e-9).map(|l| l.1).sum()
}

/// Detection probability behind the etalon at every grid point,
/// p(nu) = integral of S(w) T(w - nu) dw.
///
/// T repeats every free spectral range, so the integral runs over one
/// period of the periodized spectrum, where the trapezoid rule converges
/// fast. Lorentzian tails past the explicit replicas are added in closed
/// form.
pub fn expected_probabilities(
    s: &PhotonState,
    wire: &str,
    eom_freqs: &BTreeMap<String, f64>,
    env: &SpectralEnvelope,
    etalon: &EtalonSpec,
    grid: &DetuningGrid,
) -> Result<Vec<f64>> {
    env.validate()?;
    etalon.validate()?;
    let comps = merged_components(s, wire, eom_freqs)?;
    Ok(probabilities_at(&comps, env, etalon, &grid.points()))
}

/// Etalon response to an unmodulated photon at the given settings.
pub fn line_profile(env: &SpectralEnvelope, etalon: &EtalonSpec, settings: &[f64]) -> Result<Vec<f64>> {
    env.validate()?;
    etalon.validate()?;
    Ok(probabilities_at(&[(0.0, Complex64::new(1.0, 0.0))], env, etalon, settings))
}

fn probabilities_at(comps: &[(f64, Complex64)], env: &SpectralEnvelope, etalon: &EtalonSpec, settings: &[f64]) -> Vec<f64> {
    if comps.is_empty() {
        return vec![0.0; settings.len()];
    }
    let period = etalon.fsr_ghz;
    let g = env.fwhm_ghz();
    let h0 = g.min(etalon.linewidth_mhz * 1e-3) / 20.0;
    let m = (period / h0).ceil() as usize;
    let h = period / m as f64;

    let reach = comps.iter().map(|c| c.0.abs()).fold(0.0, f64::max) + env.center_ghz.abs() + 15.0 * g;
    let explicit = (reach / period).ceil() as i64 + 1;
    let k_max = match env.shape {
        EnvelopeShape::Gaussian => explicit,
        EnvelopeShape::Lorentzian => explicit.max(LORENTZIAN_REPLICAS),
    };
    let total: Complex64 = comps.iter().map(|c| c.1).sum();

    let periodized: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let y = i as f64 * h;
            let mut acc = 0.0;
            for k in -k_max..=k_max {
                let w = y + k as f64 * period;
                acc += comps.iter().map(|&(sh, a)| a * env.amplitude(w - sh)).sum::<Complex64>().norm_sqr();
            }
            if env.shape == EnvelopeShape::Lorentzian {
                // far away the coherent sum is one Lorentzian of weight |sum a|^2
                let far = |x: f64| (0.5 - (2.0 * x / g).atan() / PI) / period;
                let lo = (k_max as f64 + 0.5) * period;
                acc += total.norm_sqr() * (far(lo + y - env.center_ghz) + far(lo - y + env.center_ghz));
            }
            acc
        })
        .collect();

    let half = 0.5e-3 * etalon.linewidth_mhz;
    settings
        .par_iter()
        .map(|&nu| {
            let setting = nu + etalon.setting_ghz;
            periodized
                .iter()
                .enumerate()
                .map(|(i, &sp)| {
                    let x = i as f64 * h - setting;
                    let x = x - period * (x / period).round();
                    sp * half * half / (x * x + half * half)
                })
                .sum::<f64>()
                * h
        })
        .collect()
}

/// Poisson counts with one RNG stream per point, so the result does not
/// depend on evaluation order.
pub fn sample_counts(expected: &[f64], photons: f64, dark: f64, seed: u64, stream_base: u64) -> Vec<u64> {
    expected
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let lambda = photons * (p.max(0.0) + dark);
            if lambda <= 0.0 {
                return 0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + i as u64);
            match Poisson::new(lambda) {
                Ok(d) => d.sample(&mut rng) as u64,
                Err(_) => lambda.round() as u64,
            }
        })
        .collect()
}

/// Scan the etalon across `cfg.grid` in front of `detect`.
///
/// `etalon.setting_ghz` is an offset added to every grid point.
pub fn run_spectrum_scan(
    c: &Circuit,
    detect: &str,
    etalon: &EtalonSpec,
    env: &SpectralEnvelope,
    cfg: &ScanConfig,
) -> Result<SpectralScan> {
    cfg.validate()?;
    if !c.detects().iter().any(|d| d == detect) {
        return Err(Error::NotDetectWire(detect.to_string()));
    }
    let prop = propagate(c, &PhotonState::on_wire(c.source()))?;
    let empty = PhotonState::empty();
    let state = prop.at(detect).unwrap_or(&empty);
    let expected = expected_probabilities(state, detect, &c.eom_freqs(), env, etalon, &cfg.grid)?;
    let counts = sample_counts(&expected, cfg.photons_per_point, cfg.dark_probability, cfg.seed, 0);
    let points = cfg
        .grid
        .points()
        .into_iter()
        .zip(expected)
        .zip(counts)
        .map(|((detuning_ghz, expected), counts)| ScanPoint { detuning_ghz, expected, counts })
        .collect();
    Ok(SpectralScan {
        detect: detect.to_string(),
        grid: cfg.grid,
        etalon: *etalon,
        envelope: *env,
        photons_per_point: cfg.photons_per_point,
        dark_probability: cfg.dark_probability,
        points,
    })
}
