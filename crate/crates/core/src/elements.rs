//! Optical elements and their action on a [`PhotonState`].

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::sideband::SidebandVector;
use crate::state::PhotonState;

/// Modulation depth of the modulators in the nested interferometer.
pub const DEFAULT_DEPTH: f64 = 0.025;
pub const DEFAULT_EOM_ORDER: u32 = 3;
/// Analyzer etalon linewidth (MHz) and free spectral range (GHz).
pub const DEFAULT_ETALON_LINEWIDTH_MHZ: f64 = 100.0;
pub const DEFAULT_ETALON_FSR_GHZ: f64 = 8.0;

/// Lossless 2x2 coupler with the symmetric phase convention:
/// `out1 = sqrt(r) in1 + i sqrt(1-r) in2`, `out2 = i sqrt(1-r) in1 + sqrt(r) in2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    pub id: String,
    /// One or two input wires; a missing second input is vacuum.
    pub inputs: Vec<String>,
    pub outputs: [String; 2],
    /// Power reflectivity into `outputs[0]`.
    pub reflectivity: f64,
}

impl BeamSplitterSpec {
    pub fn new(id: &str, inputs: &[&str], outputs: [&str; 2], reflectivity: f64) -> Self {
        Self {
            id: id.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.map(String::from),
            reflectivity,
        }
    }

    /// Carrier-level transfer matrix, rows = outputs, columns = inputs.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let r = Complex64::new(self.reflectivity.sqrt(), 0.0);
        let t = Complex64::new(0.0, (1.0 - self.reflectivity).sqrt());
        [[r, t], [t, r]]
    }
}

/// Which sign of harmonic carries which Bessel sign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandConvention {
    /// Harmonic +n (shift +n Omega) carries (-1)^n J_n(m), i.e. the
    /// modulator imposes exp(-i m sin(Omega t)).
    #[default]
    Standard,
    /// Harmonic +n carries J_n(m).
    Flipped,
}

/// Electro-optic phase modulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EomSpec {
    pub id: String,
    pub wire: String,
    pub omega_ghz: f64,
    /// Dimensionless modulation depth, the product of optical frequency and
    /// modulation strength.
    pub depth: f64,
    /// Highest harmonic kept.
    pub order: u32,
    #[serde(default)]
    pub convention: SidebandConvention,
}

impl EomSpec {
    pub fn new(id: &str, wire: &str, omega_ghz: f64, depth: f64) -> Self {
        Self {
            id: id.into(),
            wire: wire.into(),
            omega_ghz,
            depth,
            order: DEFAULT_EOM_ORDER,
            convention: SidebandConvention::Standard,
        }
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_ghz > 0.0 && self.omega_ghz.is_finite()) {
            return Err(Error::InvalidParameter(format!("{}: omega must be > 0", self.id)));
        }
        if !(0.0..1.0).contains(&self.depth) {
            return Err(Error::InvalidParameter(format!("{}: depth must lie in [0, 1)", self.id)));
        }
        if self.order < 1 {
            return Err(Error::InvalidParameter(format!("{}: order must be >= 1", self.id)));
        }
        Ok(())
    }

    /// Untruncated Bessel coefficient of harmonic `n`.
    pub fn exact_coefficient(&self, n: i32) -> f64 {
        let j = bessel_j(n, self.depth);
        match self.convention {
            SidebandConvention::Standard if n % 2 != 0 => -j,
            _ => j,
        }
    }

    /// Harmonic coefficients for |n| <= order, rescaled to unit total power
    /// so the truncated map stays unitary.
    pub fn coefficients(&self) -> Vec<(i32, f64)> {
        let n = self.order as i32;
        let raw: Vec<(i32, f64)> = (-n..=n).map(|k| (k, self.exact_coefficient(k))).collect();
        let norm = raw.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        raw.into_iter().map(|(k, c)| (k, c / norm)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseShifterSpec {
    pub id: String,
    pub wire: String,
    pub phi: f64,
}

impl PhaseShifterSpec {
    pub fn new(id: &str, wire: &str, phi: f64) -> Self {
        Self { id: id.into(), wire: wire.into(), phi }
    }
}

/// Opaque stop on a wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub id: String,
    pub wire: String,
}

impl BlockSpec {
    pub fn new(id: &str, wire: &str) -> Self {
        Self { id: id.into(), wire: wire.into() }
    }
}

/// Tunable Fabry-Perot filter in front of the detector, modeled as one
/// Lorentzian line per free spectral range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtalonSpec {
    pub linewidth_mhz: f64,
    pub fsr_ghz: f64,
    /// Detuning of the transmission peak, GHz.
    pub setting_ghz: f64,
}

impl Default for EtalonSpec {
    fn default() -> Self {
        Self {
            linewidth_mhz: DEFAULT_ETALON_LINEWIDTH_MHZ,
            fsr_ghz: DEFAULT_ETALON_FSR_GHZ,
            setting_ghz: 0.0,
        }
    }
}

impl EtalonSpec {
    pub fn at(self, setting_ghz: f64) -> Self {
        Self { setting_ghz, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth_mhz > 0.0) || !(self.fsr_ghz > 0.0) || self.linewidth_mhz >= self.fsr_ghz * 1000.0 {
            return Err(Error::InvalidParameter(format!(
                "etalon linewidth {} MHz must be positive and well below the FSR {} GHz",
                self.linewidth_mhz, self.fsr_ghz
            )));
        }
        Ok(())
    }

    /// Offset from the peak folded into one free spectral range.
    pub(crate) fn folded_offset(&self, delta: f64) -> f64 {
        let x = delta - self.setting_ghz;
        x - self.fsr_ghz * (x / self.fsr_ghz).round()
    }

    /// Transmission without the out-of-range warning.
    pub(crate) fn transmission_quiet(&self, delta: f64) -> f64 {
        let half = 0.5e-3 * self.linewidth_mhz;
        let x = self.folded_offset(delta);
        half * half / (x * x + half * half)
    }
}

/// Any element of a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Element {
    Bs(BeamSplitterSpec),
    Phase(PhaseShifterSpec),
    Eom(EomSpec),
    Block(BlockSpec),
}

impl Element {
    pub fn id(&self) -> &str {
        match self {
            Element::Bs(b) => &b.id,
            Element::Phase(p) => &p.id,
            Element::Eom(e) => &e.id,
            Element::Block(b) => &b.id,
        }
    }

    /// The wire an in-place element acts on; `None` for beam splitters.
    pub fn inline_wire(&self) -> Option<&str> {
        match self {
            Element::Bs(_) => None,
            Element::Phase(p) => Some(&p.wire),
            Element::Eom(e) => Some(&e.wire),
            Element::Block(b) => Some(&b.wire),
        }
    }

    pub fn apply(&self, s: PhotonState) -> Result<PhotonState> {
        match self {
            Element::Bs(b) => apply_beam_splitter(s, b),
            Element::Phase(p) => Ok(apply_phase(s, p)),
            Element::Eom(e) => Ok(apply_eom(s, e)),
            Element::Block(b) => Ok(apply_block(s, b)),
        }
    }
}

impl fmt::Display for Element {
    /// Netlist syntax for the element.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Bs(b) => write!(
                f,
                "bs {} in={} out={},{} r={}",
                b.id,
                b.inputs.join(","),
                b.outputs[0],
                b.outputs[1],
                b.reflectivity
            ),
            Element::Phase(p) => write!(f, "phase {} wire={} phi={}", p.id, p.wire, p.phi),
            Element::Eom(e) => write!(
                f,
                "eom {} wire={} omega_ghz={} depth={} order={}",
                e.id, e.wire, e.omega_ghz, e.depth, e.order
            ),
            Element::Block(b) => write!(f, "block {} wire={}", b.id, b.wire),
        }
    }
}

pub fn apply_beam_splitter(mut s: PhotonState, spec: &BeamSplitterSpec) -> Result<PhotonState> {
    let in1 = spec.inputs.first().map(|w| s.take_wire(w)).unwrap_or_default();
    let in2 = spec.inputs.get(1).map(|w| s.take_wire(w)).unwrap_or_default();
    for out in &spec.outputs {
        if s.is_populated(out) {
            return Err(Error::Wiring(format!(
                "{}: output wire `{out}` is already populated",
                spec.id
            )));
        }
    }
    let m = spec.matrix();
    let mut vectors: Vec<&SidebandVector> = in1.keys().chain(in2.keys()).collect();
    vectors.sort();
    vectors.dedup();
    for v in vectors {
        let a = in1.get(v).copied().unwrap_or_default();
        let b = in2.get(v).copied().unwrap_or_default();
        s.set(&spec.outputs[0], v.clone(), m[0][0] * a + m[0][1] * b);
        s.set(&spec.outputs[1], v.clone(), m[1][0] * a + m[1][1] * b);
    }
    Ok(s)
}

/// Expands every mode on the modulator's wire into its harmonic ladder.
pub fn apply_eom(mut s: PhotonState, spec: &EomSpec) -> PhotonState {
    if spec.depth == 0.0 {
        return s;
    }
    let modes = s.take_wire(&spec.wire);
    let coeffs = spec.coefficients();
    let mut out: BTreeMap<SidebandVector, Complex64> = BTreeMap::new();
    for (v, a) in &modes {
        for &(n, c) in &coeffs {
            *out.entry(v.shifted(&spec.id, n)).or_default() += a * c;
        }
    }
    s.put_wire(&spec.wire, out);
    s
}

pub fn apply_phase(mut s: PhotonState, spec: &PhaseShifterSpec) -> PhotonState {
    let rot = Complex64::from_polar(1.0, spec.phi);
    let modes = s.take_wire(&spec.wire);
    s.put_wire(&spec.wire, modes.into_iter().map(|(v, a)| (v, a * rot)).collect());
    s
}

pub fn apply_block(mut s: PhotonState, spec: &BlockSpec) -> PhotonState {
    s.take_wire(&spec.wire);
    s
}

/// Etalon power transmission at detuning `delta`.
///
/// Detunings more than half a free spectral range from the setting are
/// folded onto the nearest transmission order.
pub fn etalon_transmission(delta: f64, spec: &EtalonSpec) -> f64 {
    if (delta - spec.setting_ghz).abs() >= 0.5 * spec.fsr_ghz {
        log::warn!(
            "detuning {delta} GHz is outside half an FSR of the etalon setting {} GHz; using the nearest order",
            spec.setting_ghz
        );
    }
    spec.transmission_quiet(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn two_input(a: Complex64, b: Complex64) -> PhotonState {
        let mut s = PhotonState::empty();
        s.set("i1", SidebandVector::carrier(), a);
        s.set("i2", SidebandVector::carrier(), b);
        s
    }

    fn out(s: &PhotonState, w: &str) -> Complex64 {
        s.amplitude(w, &SidebandVector::carrier())
    }

    #[test]
    fn balanced_splitter() {
        let bs = BeamSplitterSpec::new("bs", &["i1", "i2"], ["o1", "o2"], 0.5);
        let s = apply_beam_splitter(two_input(c(1.0, 0.0), c(0.0, 0.0)), &bs).unwrap();
        assert!(close(out(&s, "o1"), c(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(out(&s, "o2"), c(0.0, FRAC_1_SQRT_2), 1e-15));
        assert!(!s.is_populated("i1"));
    }

    #[test]
    fn one_to_two_splitter() {
        let bs = BeamSplitterSpec::new("bs", &["i1"], ["o1", "o2"], 1.0 / 3.0);
        let s = apply_beam_splitter(PhotonState::on_wire("i1"), &bs).unwrap();
        assert!(close(out(&s, "o1"), c(1.0 / 3f64.sqrt(), 0.0), 1e-15));
        assert!(close(out(&s, "o2"), c(0.0, (2.0f64 / 3.0).sqrt()), 1e-15));
    }

    #[test]
    fn recombination_is_complete() {
        let bs = BeamSplitterSpec::new("bs", &["i1", "i2"], ["o1", "o2"], 0.5);
        let s = apply_beam_splitter(two_input(c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)), &bs).unwrap();
        assert!(out(&s, "o1").norm() < 1e-15);
        assert!(close(out(&s, "o2"), c(0.0, 1.0), 1e-15));
    }

    #[test]
    fn populated_output_is_a_wiring_error() {
        let bs = BeamSplitterSpec::new("bs", &["i1"], ["o1", "i2"], 0.5);
        let err = apply_beam_splitter(two_input(c(1.0, 0.0), c(0.1, 0.0)), &bs);
        assert!(matches!(err, Err(Error::Wiring(_))));
    }

    #[test]
    fn zero_depth_is_identity() {
        let s = PhotonState::on_wire("w");
        assert_eq!(apply_eom(s.clone(), &EomSpec::new("X", "w", 2.8, 0.0)), s);
    }

    #[test]
    fn first_order_ladder() {
        let e = EomSpec::new("X", "w", 2.8, 0.025).with_order(1);
        let s = apply_eom(PhotonState::on_wire("w"), &e);
        let amp = |n| s.amplitude("w", &SidebandVector::from_pairs([("X", n)])).re;
        assert_eq!(s.mode_count(), 3);
        assert!((amp(0) - 0.999_84).abs() < 1e-5);
        assert!((amp(1) + 0.0125).abs() < 1e-5);
        assert!((amp(-1) - 0.0125).abs() < 1e-5);
        // first-order consistency with {1, -/+ m/2}
        assert!((amp(0) - 1.0).abs() < 2.5e-3 && (amp(1) + 0.0125).abs() < 2.5e-3);
    }

    #[test]
    fn second_harmonic_is_order_depth_squared() {
        let e = EomSpec::new("X", "w", 2.8, 0.025).with_order(2);
        let s = apply_eom(PhotonState::on_wire("w"), &e);
        for n in [2, -2] {
            let a = s.amplitude("w", &SidebandVector::from_pairs([("X", n)])).norm();
            assert!((a - 7.812e-5).abs() < 1e-7, "{a}");
        }
    }

    #[test]
    fn flipped_convention_swaps_signs() {
        let mut e = EomSpec::new("X", "w", 2.8, 0.025);
        let std_c = e.exact_coefficient(1);
        e.convention = SidebandConvention::Flipped;
        assert_eq!(e.exact_coefficient(1), -std_c);
        assert_eq!(e.exact_coefficient(2), bessel_j(2, 0.025));
    }

    #[test]
    fn phase_and_block() {
        let s = apply_phase(PhotonState::on_wire("w"), &PhaseShifterSpec::new("p", "w", 0.0));
        assert_eq!(s, PhotonState::on_wire("w"));
        let s = apply_phase(PhotonState::on_wire("w"), &PhaseShifterSpec::new("p", "w", PI / 2.0));
        assert!(close(out(&s, "w"), c(0.0, 1.0), 1e-15));

        let b = BlockSpec::new("blk", "x");
        assert_eq!(apply_block(PhotonState::on_wire("w"), &b), PhotonState::on_wire("w"));
        let mut third = PhotonState::empty();
        third.set("x", SidebandVector::carrier(), c(1.0 / 3f64.sqrt(), 0.0));
        third.set("y", SidebandVector::carrier(), c((2.0f64 / 3.0).sqrt(), 0.0));
        let after = apply_block(third, &b);
        assert!((after.norm_squared() - 2.0 / 3.0).abs() < 1e-15);
        let both = apply_block(apply_block(two_input(c(0.6, 0.0), c(0.8, 0.0)), &BlockSpec::new("b1", "i1")), &BlockSpec::new("b2", "i2"));
        assert_eq!(both.norm_squared(), 0.0);
    }

    #[test]
    fn phase_pi_moves_dark_port() {
        let bs1 = BeamSplitterSpec::new("b1", &["s"], ["u", "l"], 0.5);
        let bs2 = BeamSplitterSpec::new("b2", &["u", "l"], ["o1", "o2"], 0.5);
        let run = |phi| {
            let s = apply_beam_splitter(PhotonState::on_wire("s"), &bs1).unwrap();
            let s = apply_phase(s, &PhaseShifterSpec::new("p", "l", phi));
            apply_beam_splitter(s, &bs2).unwrap()
        };
        let s0 = run(0.0);
        let s1 = run(PI);
        assert!(s0.wire_norm_squared("o1") < 1e-30 && (s0.wire_norm_squared("o2") - 1.0).abs() < 1e-15);
        assert!(s1.wire_norm_squared("o2") < 1e-30 && (s1.wire_norm_squared("o1") - 1.0).abs() < 1e-15);
    }

    #[test]
    fn etalon_values() {
        let e = EtalonSpec::default().at(0.3);
        assert_eq!(etalon_transmission(0.3, &e), 1.0);
        assert!((etalon_transmission(0.35, &e) - 0.5).abs() < 1e-12);
        let v = etalon_transmission(1.3, &e);
        assert!((v - 2.494e-3).abs() < 1e-6, "{v}");
        // next order sits one FSR away
        assert!((etalon_transmission(8.3, &e) - 1.0).abs() < 1e-12);
    }
}
