//! Sparse joint path/frequency state of a single photon.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::sideband::SidebandVector;

pub const DEFAULT_PRUNE: f64 = 1e-15;
/// Carrier frequency of the heralded photons, GHz. Only used as a label.
pub const DEFAULT_CARRIER_GHZ: f64 = 340_696.55;

/// Amplitudes keyed by wire and sideband vector.
///
/// Distinct sideband vectors are orthogonal modes even when their net
/// frequency shifts coincide; they only interfere once rendered into a
/// spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonState {
    modes: BTreeMap<String, BTreeMap<SidebandVector, Complex64>>,
    prune_threshold: f64,
    carrier_ghz: f64,
}

impl Default for PhotonState {
    fn default() -> Self {
        Self::empty()
    }
}

impl PhotonState {
    pub fn empty() -> Self {
        Self {
            modes: BTreeMap::new(),
            prune_threshold: DEFAULT_PRUNE,
            carrier_ghz: DEFAULT_CARRIER_GHZ,
        }
    }

    /// One photon at the carrier on `wire`.
    pub fn on_wire(wire: &str) -> Self {
        let mut s = Self::empty();
        s.set(wire, SidebandVector::carrier(), Complex64::new(1.0, 0.0));
        s
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self.prune();
        self
    }

    pub fn with_carrier_ghz(mut self, carrier: f64) -> Self {
        self.carrier_ghz = carrier;
        self
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    pub fn carrier_ghz(&self) -> f64 {
        self.carrier_ghz
    }

    /// Replaces the amplitude of one mode. Amplitudes below the prune
    /// threshold remove the mode.
    pub fn set(&mut self, wire: &str, v: SidebandVector, a: Complex64) {
        if a.norm() < self.prune_threshold {
            if let Some(m) = self.modes.get_mut(wire) {
                m.remove(&v);
                if m.is_empty() {
                    self.modes.remove(wire);
                }
            }
            return;
        }
        self.modes.entry(wire.to_string()).or_default().insert(v, a);
    }

    /// Adds to the amplitude of one mode.
    pub fn accumulate(&mut self, wire: &str, v: SidebandVector, a: Complex64) {
        let cur = self.amplitude(wire, &v);
        self.set(wire, v, cur + a);
    }

    pub fn amplitude(&self, wire: &str, v: &SidebandVector) -> Complex64 {
        self.modes
            .get(wire)
            .and_then(|m| m.get(v))
            .copied()
            .unwrap_or_default()
    }

    pub fn wire_modes(&self, wire: &str) -> Option<&BTreeMap<SidebandVector, Complex64>> {
        self.modes.get(wire)
    }

    pub fn is_populated(&self, wire: &str) -> bool {
        self.modes.contains_key(wire)
    }

    pub fn wires(&self) -> impl Iterator<Item = &str> {
        self.modes.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SidebandVector, Complex64)> {
        self.modes
            .iter()
            .flat_map(|(w, m)| m.iter().map(move |(v, a)| (w.as_str(), v, *a)))
    }

    pub fn mode_count(&self) -> usize {
        self.modes.values().map(BTreeMap::len).sum()
    }

    /// Removes and returns everything on `wire`.
    pub fn take_wire(&mut self, wire: &str) -> BTreeMap<SidebandVector, Complex64> {
        self.modes.remove(wire).unwrap_or_default()
    }

    /// Installs a full set of modes on `wire`, replacing what was there.
    pub fn put_wire(&mut self, wire: &str, modes: BTreeMap<SidebandVector, Complex64>) {
        self.modes.remove(wire);
        for (v, a) in modes {
            self.set(wire, v, a);
        }
    }

    /// Copy of the state restricted to one wire.
    pub fn restricted_to(&self, wire: &str) -> Self {
        let mut s = Self {
            modes: BTreeMap::new(),
            prune_threshold: self.prune_threshold,
            carrier_ghz: self.carrier_ghz,
        };
        if let Some(m) = self.modes.get(wire) {
            s.modes.insert(wire.to_string(), m.clone());
        }
        s
    }

    pub fn norm_squared(&self) -> f64 {
        self.iter().map(|(_, _, a)| a.norm_sqr()).sum()
    }

    pub fn wire_norm_squared(&self, wire: &str) -> f64 {
        self.modes
            .get(wire)
            .map(|m| m.values().map(|a| a.norm_sqr()).sum())
            .unwrap_or(0.0)
    }

    /// Drops modes whose magnitude is below the prune threshold.
    pub fn prune(&mut self) {
        let t = self.prune_threshold;
        for m in self.modes.values_mut() {
            m.retain(|_, a| a.norm() >= t);
        }
        self.modes.retain(|_, m| !m.is_empty());
    }

    /// Applies `f` to every modulator id in every sideband vector.
    pub fn relabel_eoms(&self, f: impl Fn(&str) -> String) -> Self {
        let mut out = Self {
            modes: BTreeMap::new(),
            prune_threshold: self.prune_threshold,
            carrier_ghz: self.carrier_ghz,
        };
        for (w, v, a) in self.iter() {
            out.accumulate(w, v.relabel(&f), a);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_norm() {
        assert_eq!(PhotonState::on_wire("a").norm_squared(), 1.0);
    }

    #[test]
    fn two_equal_modes_norm() {
        let mut s = PhotonState::empty();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        s.set("a", SidebandVector::carrier(), Complex64::new(h, 0.0));
        s.set("b", SidebandVector::carrier(), Complex64::new(0.0, h));
        assert!((s.norm_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modes_with_same_shift_stay_orthogonal() {
        let mut s = PhotonState::empty();
        s.set("a", SidebandVector::from_pairs([("X", 1)]), Complex64::new(0.5, 0.0));
        s.set("a", SidebandVector::from_pairs([("Y", 1)]), Complex64::new(-0.5, 0.0));
        assert!((s.norm_squared() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tiny_amplitudes_are_not_stored() {
        let mut s = PhotonState::on_wire("a");
        s.set("a", SidebandVector::from_pairs([("X", 1)]), Complex64::new(1e-16, 0.0));
        assert_eq!(s.mode_count(), 1);
        s.accumulate("a", SidebandVector::carrier(), Complex64::new(-1.0, 0.0));
        assert_eq!(s.mode_count(), 0);
        assert!(!s.is_populated("a"));
    }
}
