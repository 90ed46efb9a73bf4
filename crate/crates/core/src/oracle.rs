//! Brute-force time-domain simulation used to check the sideband engine.
//!
//! Every wire carries a sampled complex envelope. Modulators multiply by
//! the exact phase exp(-i m sin(2 pi Omega t)) with no harmonic expansion,
//! splitters and phase shifters act pointwise in time, and the detected
//! envelopes are Fourier transformed at the end.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::elements::{Element, SidebandConvention};
use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::spectrum::{gaussian_sigma, EnvelopeShape, SpectralDensity, SpectralEnvelope};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainConfig {
    pub window_ns: f64,
    /// Number of time samples, a power of two.
    pub samples: usize,
    pub envelope: SpectralEnvelope,
    /// Only |f| <= view_ghz is returned.
    pub view_ghz: f64,
}

impl TimeDomainConfig {
    /// 40 ns window. The one-sided Lorentzian decay has a jump at t = 0
    /// whose transform falls off slowly, so it gets far denser sampling.
    pub fn for_envelope(envelope: SpectralEnvelope) -> Self {
        let samples = match envelope.shape {
            EnvelopeShape::Gaussian => 1 << 14,
            EnvelopeShape::Lorentzian => 1 << 21,
        };
        Self { window_ns: 40.0, samples, envelope, view_ghz: 12.0 }
    }

    pub fn coherence_time_ns(&self) -> f64 {
        1.0 / (PI * self.envelope.fwhm_ghz())
    }

    pub fn step_ns(&self) -> f64 {
        self.window_ns / self.samples as f64
    }

    pub fn nyquist_ghz(&self) -> f64 {
        0.5 / self.step_ns()
    }

    /// Frequency resolution of the transform, GHz.
    pub fn resolution_ghz(&self) -> f64 {
        1.0 / self.window_ns
    }

    pub fn validate(&self, c: &Circuit) -> Result<()> {
        self.envelope.validate()?;
        if !self.samples.is_power_of_two() || self.samples < 2 {
            return Err(Error::InvalidParameter(format!("{} samples is not a power of two", self.samples)));
        }
        if self.window_ns < 20.0 * self.coherence_time_ns() {
            return Err(Error::InvalidParameter(format!(
                "window {} ns is shorter than 20 coherence times ({} ns)",
                self.window_ns,
                20.0 * self.coherence_time_ns()
            )));
        }
        let max_shift = max_shift_ghz(c) + self.envelope.center_ghz.abs() + 5.0 * self.envelope.fwhm_ghz();
        if self.nyquist_ghz() <= max_shift {
            return Err(Error::Nyquist { max_shift_ghz: max_shift, nyquist_ghz: self.nyquist_ghz() });
        }
        Ok(())
    }
}

/// Largest net shift the truncated sideband engine can produce.
pub fn max_shift_ghz(c: &Circuit) -> f64 {
    c.elements()
        .iter()
        .filter_map(|e| match e {
            Element::Eom(m) if m.depth != 0.0 => Some(m.order as f64 * m.omega_ghz),
            _ => None,
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainOutput {
    /// Detected spectral density per detect wire on the transform grid.
    pub spectra: BTreeMap<String, SpectralDensity>,
    /// Integral of |e(t)|^2 per detect wire.
    pub time_norms: BTreeMap<String, f64>,
    /// Sum of the density over the whole transform grid times its step.
    pub spectral_norms: BTreeMap<String, f64>,
}

fn source_envelope(cfg: &TimeDomainConfig, times: &[f64]) -> Vec<Complex64> {
    let env = &cfg.envelope;
    let g = env.fwhm_ghz();
    let carrier = |t: f64| Complex64::from_polar(1.0, 2.0 * PI * env.center_ghz * t);
    times
        .iter()
        .map(|&t| {
            let a = match env.shape {
                EnvelopeShape::Gaussian => {
                    let s = gaussian_sigma(g);
                    let norm = ((2.0 * PI).sqrt() * s).powf(-0.5) * (4.0 * PI * s * s).sqrt();
                    norm * (-4.0 * PI * PI * s * s * t * t).exp()
                }
                EnvelopeShape::Lorentzian if t < 0.0 => 0.0,
                // the jump is sampled at its midpoint
                EnvelopeShape::Lorentzian if t == 0.0 => 0.5 * (2.0 * PI * g).sqrt(),
                EnvelopeShape::Lorentzian => (2.0 * PI * g).sqrt() * (-PI * g * t).exp(),
            };
            carrier(t) * a
        })
        .collect()
}

/// Propagate the photon through `c` sample by sample and transform each
/// detected envelope.
pub fn time_domain_propagate(c: &Circuit, cfg: &TimeDomainConfig) -> Result<TimeDomainOutput> {
    cfg.validate(c)?;
    let n = cfg.samples;
    let dt = cfg.step_ns();
    // a decaying envelope starts at t = 0; a symmetric one is centered
    let t0 = match cfg.envelope.shape {
        EnvelopeShape::Lorentzian => 0.0,
        EnvelopeShape::Gaussian => -0.5 * cfg.window_ns,
    };
    let times: Vec<f64> = (0..n).map(|j| t0 + j as f64 * dt).collect();
    let zeros = || vec![Complex64::new(0.0, 0.0); n];
    let mut wires: BTreeMap<String, Vec<Complex64>> = BTreeMap::new();
    wires.insert(c.source().to_string(), source_envelope(cfg, &times));

    for e in c.elements() {
        match e {
            Element::Bs(b) => {
                let in1 = b.inputs.first().and_then(|w| wires.remove(w)).unwrap_or_else(zeros);
                let in2 = b.inputs.get(1).and_then(|w| wires.remove(w)).unwrap_or_else(zeros);
                let r = Complex64::new(b.reflectivity.sqrt(), 0.0);
                let t = Complex64::new(0.0, (1.0 - b.reflectivity).sqrt());
                let o1 = in1.iter().zip(&in2).map(|(x, y)| r * x + t * y).collect();
                let o2 = in1.iter().zip(&in2).map(|(x, y)| t * x + r * y).collect();
                wires.insert(b.outputs[0].clone(), o1);
                wires.insert(b.outputs[1].clone(), o2);
            }
            Element::Phase(p) => {
                if let Some(v) = wires.get_mut(&p.wire) {
                    let rot = Complex64::from_polar(1.0, p.phi);
                    v.iter_mut().for_each(|x| *x *= rot);
                }
            }
            Element::Block(b) => {
                wires.remove(&b.wire);
            }
            Element::Eom(m) => {
                if let Some(v) = wires.get_mut(&m.wire) {
                    let sign = match m.convention {
                        SidebandConvention::Standard => -1.0,
                        SidebandConvention::Flipped => 1.0,
                    };
                    for (x, &t) in v.iter_mut().zip(&times) {
                        *x *= Complex64::from_polar(1.0, sign * m.depth * (2.0 * PI * m.omega_ghz * t).sin());
                    }
                }
            }
        }
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let df = cfg.resolution_ghz();
    let half = n / 2;
    let mut out = TimeDomainOutput {
        spectra: BTreeMap::new(),
        time_norms: BTreeMap::new(),
        spectral_norms: BTreeMap::new(),
    };
    for d in c.detects() {
        let mut buf = wires.remove(d).unwrap_or_else(zeros);
        let time_norm = buf.iter().map(|x| x.norm_sqr()).sum::<f64>() * dt;
        fft.process(&mut buf);
        // bins n/2..n hold negative frequencies
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut total = 0.0;
        for k in 0..n {
            let idx = (k + half) % n;
            let f = (k as f64 - half as f64) * df;
            let dens = (buf[idx] * dt).norm_sqr();
            total += dens;
            if f.abs() <= cfg.view_ghz + 1e-9 {
                grid.push(f);
                values.push(dens);
            }
        }
        out.spectra.insert(d.clone(), SpectralDensity { grid, values });
        out.time_norms.insert(d.clone(), time_norm);
        out.spectral_norms.insert(d.clone(), total * df);
    }
    Ok(out)
}

fn interpolate(d: &SpectralDensity, x: f64) -> Option<f64> {
    let g = &d.grid;
    let tol = 1e-9 * (1.0 + x.abs());
    if g.is_empty() || x < g[0] - tol || x > g[g.len() - 1] + tol {
        return None;
    }
    let i = g.partition_point(|&p| p < x - tol);
    if i < g.len() && (g[i] - x).abs() <= tol {
        return Some(d.values[i]);
    }
    let (x0, x1) = (g[i - 1], g[i]);
    let w = (x - x0) / (x1 - x0);
    Some(d.values[i - 1] * (1.0 - w) + d.values[i] * w)
}

fn mean_step(d: &SpectralDensity) -> f64 {
    match d.grid.len() {
        0 | 1 => f64::INFINITY,
        n => (d.grid[n - 1] - d.grid[0]) / (n - 1) as f64,
    }
}

/// Largest |a - b| / max(a, b) over points where max(a, b) > floor.
///
/// Both densities are read on the coarser of the two grids; the finer one
/// is interpolated linearly where points do not coincide.
pub fn compare(a: &SpectralDensity, b: &SpectralDensity, floor: f64) -> Result<f64> {
    let (coarse, fine, swapped) = if mean_step(a) >= mean_step(b) { (a, b, false) } else { (b, a, true) };
    let mut any = false;
    let mut worst: f64 = 0.0;
    for (&x, &vc) in coarse.grid.iter().zip(&coarse.values) {
        let Some(vf) = interpolate(fine, x) else { continue };
        any = true;
        let (va, vb) = if swapped { (vf, vc) } else { (vc, vf) };
        let m = va.max(vb);
        if m > floor {
            worst = worst.max((va - vb).abs() / m);
        }
    }
    if !any {
        return Err(Error::DisjointGrids);
    }
    Ok(worst)
}
