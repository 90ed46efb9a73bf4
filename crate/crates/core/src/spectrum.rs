//! Spectral envelopes and rendering of a state into a spectral density.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sideband::total_shift;
use crate::state::PhotonState;

/// Bandwidth of the filtered single photons, MHz.
pub const DEFAULT_PHOTON_FWHM_MHZ: f64 = 315.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeShape {
    /// Single longitudinal mode with exponential decay in time.
    Lorentzian,
    Gaussian,
}

/// Amplitude spectrum of the photon around the carrier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralEnvelope {
    pub shape: EnvelopeShape,
    /// Full width at half maximum of |E|^2, MHz.
    pub fwhm_mhz: f64,
    /// Offset of the center from the carrier, GHz.
    pub center_ghz: f64,
}

/// Gaussian by default: the coherent Lorentzian tail of the carrier reaches
/// several percent of its peak amplitude gigahertz away and beats against
/// weak sidebands.
impl Default for SpectralEnvelope {
    fn default() -> Self {
        Self {
            shape: EnvelopeShape::Gaussian,
            fwhm_mhz: DEFAULT_PHOTON_FWHM_MHZ,
            center_ghz: 0.0,
        }
    }
}

impl SpectralEnvelope {
    pub fn lorentzian(fwhm_mhz: f64) -> Self {
        Self { shape: EnvelopeShape::Lorentzian, fwhm_mhz, center_ghz: 0.0 }
    }

    pub fn gaussian(fwhm_mhz: f64) -> Self {
        Self { shape: EnvelopeShape::Gaussian, fwhm_mhz, center_ghz: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_mhz > 0.0 && self.fwhm_mhz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "envelope fwhm must be positive, got {} MHz",
                self.fwhm_mhz
            )));
        }
        Ok(())
    }

    pub fn fwhm_ghz(&self) -> f64 {
        self.fwhm_mhz * 1e-3
    }

    /// Complex amplitude at detuning `delta` (GHz), normalized so that
    /// the integral of |E|^2 over GHz is one.
    ///
    /// The Lorentzian amplitude is the transform of a one-sided exponential
    /// decay, E(f) = sqrt(2 pi G) / (pi G + 2 pi i f).
    pub fn amplitude(&self, delta: f64) -> Complex64 {
        let g = self.fwhm_ghz();
        let f = delta - self.center_ghz;
        match self.shape {
            EnvelopeShape::Lorentzian => {
                Complex64::new((2.0 * PI * g).sqrt(), 0.0) / Complex64::new(PI * g, 2.0 * PI * f)
            }
            EnvelopeShape::Gaussian => {
                let sigma = gaussian_sigma(g);
                let a = ((2.0 * PI).sqrt() * sigma).powf(-0.5);
                Complex64::new(a * (-f * f / (4.0 * sigma * sigma)).exp(), 0.0)
            }
        }
    }

    pub fn density(&self, delta: f64) -> f64 {
        self.amplitude(delta).norm_sqr()
    }
}

/// Standard deviation of the power spectrum for a given FWHM.
pub(crate) fn gaussian_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Uniform detuning grid, inclusive of both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub step_ghz: f64,
}

impl DetuningGrid {
    pub fn new(start_ghz: f64, stop_ghz: f64, step_ghz: f64) -> Result<Self> {
        if !(step_ghz > 0.0) || !(stop_ghz >= start_ghz) || !start_ghz.is_finite() || !stop_ghz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad grid [{start_ghz}, {stop_ghz}] step {step_ghz}"
            )));
        }
        Ok(Self { start_ghz, stop_ghz, step_ghz })
    }

    /// Grid centered on zero.
    pub fn symmetric(half_span_ghz: f64, step_ghz: f64) -> Result<Self> {
        Self::new(-half_span_ghz, half_span_ghz, step_ghz)
    }

    pub fn len(&self) -> usize {
        ((self.stop_ghz - self.start_ghz) / self.step_ghz + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start_ghz + i as f64 * self.step_ghz
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point nearest `x`, if `x` lies within half a step of the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let pos = (x - self.start_ghz) / self.step_ghz;
        let i = pos.round();
        if i < 0.0 || i as usize >= self.len() || (pos - i).abs() > 0.5 + 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    pub fn covers(&self, x: f64) -> bool {
        x >= self.start_ghz - 1e-9 && x <= self.stop_ghz + 1e-9
    }
}

/// Sampled spectral density, per GHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralDensity {
    pub fn zeros(grid: Vec<f64>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Density at the grid point nearest `x`.
    pub fn at(&self, x: f64) -> Option<f64> {
        self.grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map(|(i, _)| self.values[i])
    }
}

/// Net shift and amplitude of every mode on `wire`.
pub(crate) fn shifted_components(
    s: &PhotonState,
    wire: &str,
    eom_freqs: &BTreeMap<String, f64>,
) -> Result<Vec<(f64, Complex64)>> {
    let Some(modes) = s.wire_modes(wire) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(modes.len());
    for (v, a) in modes {
        out.push((total_shift(v, eom_freqs)?, *a));
    }
    Ok(out)
}

/// Coherent sum of shifted envelopes at one detuning.
pub(crate) fn coherent_density(
    components: &[(f64, Complex64)],
    env: &SpectralEnvelope,
    delta: f64,
) -> f64 {
    components
        .iter()
        .map(|&(shift, a)| a * env.amplitude(delta - shift))
        .sum::<Complex64>()
        .norm_sqr()
}

/// Spectral density of the photon on `wire`.
///
/// Sideband components whose shifts coincide add as amplitudes, so they can
/// cancel. An unpopulated wire renders as all zeros.
pub fn render_spectrum(
    s: &PhotonState,
    wire: &str,
    env: &SpectralEnvelope,
    grid: &DetuningGrid,
    eom_freqs: &BTreeMap<String, f64>,
) -> Result<SpectralDensity> {
    env.validate()?;
    if grid.step_ghz > env.fwhm_ghz() / 10.0 {
        log::warn!(
            "grid step {} GHz is coarser than a tenth of the envelope width ({} GHz)",
            grid.step_ghz,
            env.fwhm_ghz()
        );
    }
    let components = shifted_components(s, wire, eom_freqs)?;
    let points = grid.points();
    let values = points
        .iter()
        .map(|&d| coherent_density(&components, env, d))
        .collect();
    Ok(SpectralDensity { grid: points, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sideband::SidebandVector;

    fn freqs() -> BTreeMap<String, f64> {
        [("A".to_string(), 2.8), ("A2".to_string(), 2.8)].into_iter().collect()
    }

    #[test]
    fn envelopes_are_normalized() {
        for env in [SpectralEnvelope::lorentzian(315.0), SpectralEnvelope::gaussian(315.0)] {
            // Lorentzian tails need a wide window
            let g = DetuningGrid::symmetric(2000.0, 0.002).unwrap();
            let d = SpectralDensity {
                grid: g.points(),
                values: g.points().iter().map(|&x| env.density(x)).collect(),
            };
            assert!((d.integral() - 1.0).abs() < 1e-4, "{:?}: {}", env.shape, d.integral());
        }
    }

    #[test]
    fn half_maximum_at_half_width() {
        for env in [SpectralEnvelope::lorentzian(315.0), SpectralEnvelope::gaussian(315.0)] {
            let ratio = env.density(0.1575) / env.density(0.0);
            assert!((ratio - 0.5).abs() < 1e-12, "{:?}", env.shape);
        }
    }

    #[test]
    fn single_mode_renders_envelope() {
        let env = SpectralEnvelope::default();
        let s = PhotonState::on_wire("out");
        let g = DetuningGrid::symmetric(1.0, 0.01).unwrap();
        let d = render_spectrum(&s, "out", &env, &g, &freqs()).unwrap();
        for (x, y) in d.grid.iter().zip(&d.values) {
            assert!((y - env.density(*x)).abs() < 1e-14);
        }
    }

    #[test]
    fn first_order_sideband_ratio() {
        // peak densities of isolated components; rendered together the
        // carrier's Lorentzian tail adds coherently at the sideband
        let env = SpectralEnvelope::default();
        let isolated = PhotonState::on_wire("out");
        let mut side = PhotonState::empty();
        side.set("out", SidebandVector::from_pairs([("A", 1)]), Complex64::new(0.0125, 0.0));
        let r2 = render_spectrum(&side, "out", &env, &DetuningGrid::new(2.8, 2.8, 0.01).unwrap(), &freqs())
            .unwrap()
            .values[0]
            / render_spectrum(&isolated, "out", &env, &DetuningGrid::new(0.0, 0.0, 0.01).unwrap(), &freqs())
                .unwrap()
                .values[0];
        assert!((r2 - 1.5625e-4).abs() < 1e-15);
    }

    #[test]
    fn equal_shift_opposite_amplitudes_cancel() {
        let env = SpectralEnvelope::default();
        let mut s = PhotonState::empty();
        s.set("out", SidebandVector::from_pairs([("A", 1)]), Complex64::new(0.3, 0.1));
        s.set("out", SidebandVector::from_pairs([("A2", 1)]), Complex64::new(-0.3, -0.1));
        let g = DetuningGrid::symmetric(5.0, 0.01).unwrap();
        let d = render_spectrum(&s, "out", &env, &g, &freqs()).unwrap();
        assert!(d.max() < 1e-28);
    }

    #[test]
    fn empty_wire_renders_zero() {
        let g = DetuningGrid::symmetric(1.0, 0.1).unwrap();
        let d = render_spectrum(&PhotonState::on_wire("a"), "b", &SpectralEnvelope::default(), &g, &freqs())
            .unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_nearest() {
        let g = DetuningGrid::new(-4.0, 4.0, 0.025).unwrap();
        assert_eq!(g.len(), 321);
        assert_eq!(g.nearest(2.8), Some(272));
        assert_eq!(g.nearest(4.5), None);
    }
}
