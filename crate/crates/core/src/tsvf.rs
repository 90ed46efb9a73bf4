//! Forward and backward evolving states, weak values of path projectors,
//! and trajectories defined by where both states have support.
//!
//! The analysis is done at the carrier: modulators act as the identity on
//! the path degree of freedom. Cuts are the time slices between
//! consecutive elements; cut `k` sits after the first `k` elements.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::Element;
use crate::error::{Error, Result};
use crate::netlist::Circuit;

/// Path amplitudes of both states on the wires alive at one cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutState {
    /// Id of the element just applied; `None` for the initial cut.
    pub after: Option<String>,
    pub forward: BTreeMap<String, Complex64>,
    pub backward: BTreeMap<String, Complex64>,
}

impl CutState {
    /// <phi|psi> evaluated on this cut.
    pub fn overlap(&self) -> Complex64 {
        self.forward
            .iter()
            .map(|(w, psi)| self.backward.get(w).copied().unwrap_or_default().conj() * psi)
            .sum()
    }

    fn norms(&self) -> (f64, f64) {
        let n = |m: &BTreeMap<String, Complex64>| m.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (n(&self.forward), n(&self.backward))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStateVector {
    pub postselect: String,
    pub cuts: Vec<CutState>,
    /// <phi|psi> at the post-selection port.
    pub overlap: Complex64,
    /// Cut at which each wire first appears.
    pub own_cut: BTreeMap<String, usize>,
}

fn forward_step(e: &Element, state: &mut BTreeMap<String, Complex64>) {
    match e {
        Element::Bs(b) => {
            let m = b.matrix();
            let a = b.inputs.first().and_then(|w| state.remove(w)).unwrap_or_default();
            let c = b.inputs.get(1).and_then(|w| state.remove(w)).unwrap_or_default();
            state.insert(b.outputs[0].clone(), m[0][0] * a + m[0][1] * c);
            state.insert(b.outputs[1].clone(), m[1][0] * a + m[1][1] * c);
        }
        Element::Phase(p) => {
            if let Some(a) = state.get_mut(&p.wire) {
                *a *= Complex64::from_polar(1.0, p.phi);
            }
        }
        Element::Eom(_) => {}
        Element::Block(b) => {
            if let Some(a) = state.get_mut(&b.wire) {
                *a = Complex64::default();
            }
        }
    }
}

/// Adjoint of [`forward_step`].
fn backward_step(e: &Element, state: &mut BTreeMap<String, Complex64>) {
    match e {
        Element::Bs(b) => {
            let m = b.matrix();
            let o1 = state.remove(&b.outputs[0]).unwrap_or_default();
            let o2 = state.remove(&b.outputs[1]).unwrap_or_default();
            for (j, w) in b.inputs.iter().enumerate() {
                state.insert(w.clone(), m[0][j].conj() * o1 + m[1][j].conj() * o2);
            }
        }
        Element::Phase(p) => {
            if let Some(a) = state.get_mut(&p.wire) {
                *a *= Complex64::from_polar(1.0, -p.phi);
            }
        }
        Element::Eom(_) => {}
        Element::Block(b) => {
            if let Some(a) = state.get_mut(&b.wire) {
                *a = Complex64::default();
            }
        }
    }
}

/// Forward state from a unit photon at the source, backward state from a
/// unit amplitude at `postselect`, at every cut.
pub fn two_state(c: &Circuit, postselect: &str) -> Result<TwoStateVector> {
    if !c.detects().iter().any(|d| d == postselect) {
        return Err(Error::NotDetectWire(postselect.to_string()));
    }
    let mut psi = BTreeMap::from([(c.source().to_string(), Complex64::new(1.0, 0.0))]);
    let mut forwards = vec![psi.clone()];
    let mut own_cut = BTreeMap::from([(c.source().to_string(), 0)]);
    for (k, e) in c.elements().iter().enumerate() {
        forward_step(e, &mut psi);
        for w in psi.keys() {
            own_cut.entry(w.clone()).or_insert(k + 1);
        }
        forwards.push(psi.clone());
    }

    let mut phi: BTreeMap<String, Complex64> = psi
        .keys()
        .map(|w| (w.clone(), Complex64::new(if w == postselect { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    let mut backwards = vec![phi.clone()];
    for e in c.elements().iter().rev() {
        backward_step(e, &mut phi);
        backwards.push(phi.clone());
    }
    backwards.reverse();

    let cuts = forwards
        .into_iter()
        .zip(backwards)
        .enumerate()
        .map(|(k, (forward, backward))| CutState {
            after: k.checked_sub(1).map(|i| c.elements()[i].id().to_string()),
            forward,
            backward,
        })
        .collect::<Vec<_>>();
    let overlap = psi.get(postselect).copied().unwrap_or_default();
    Ok(TwoStateVector { postselect: postselect.to_string(), cuts, overlap, own_cut })
}

/// A projector on the path space of one cut: either diagonal on a set of
/// wires, or rank one onto a normalized superposition of wires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub label: String,
    pub support: Vec<(String, Option<Complex64>)>,
}

impl ProjectorSpec {
    pub fn wire(w: &str) -> Self {
        Self { label: w.to_string(), support: vec![(w.to_string(), None)] }
    }

    pub fn wires(label: &str, ws: &[&str]) -> Self {
        Self { label: label.to_string(), support: ws.iter().map(|w| (w.to_string(), None)).collect() }
    }

    /// |u><u| with u proportional to the given coefficients.
    pub fn rank_one(label: &str, coeffs: &[(&str, Complex64)]) -> Result<Self> {
        let norm = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("rank-one projector onto the zero vector".into()));
        }
        Ok(Self {
            label: label.to_string(),
            support: coeffs.iter().map(|(w, c)| (w.to_string(), Some(c / norm))).collect(),
        })
    }

    fn is_rank_one(&self) -> bool {
        self.support.iter().all(|(_, c)| c.is_some())
    }

    /// <bra| P |ket> on one cut.
    pub fn sandwich(&self, bra: &BTreeMap<String, Complex64>, ket: &BTreeMap<String, Complex64>) -> Complex64 {
        let get = |m: &BTreeMap<String, Complex64>, w: &str| m.get(w).copied().unwrap_or_default();
        if self.is_rank_one() {
            let left: Complex64 = self.support.iter().map(|(w, u)| get(bra, w).conj() * u.unwrap_or_default()).sum();
            let right: Complex64 = self.support.iter().map(|(w, u)| u.unwrap_or_default().conj() * get(ket, w)).sum();
            left * right
        } else {
            self.support.iter().map(|(w, _)| get(bra, w).conj() * get(ket, w)).sum()
        }
    }

    /// Matrix of the projector over `basis`.
    pub fn matrix(&self, basis: &[&str]) -> Vec<Vec<Complex64>> {
        let unit = |w: &str| -> BTreeMap<String, Complex64> { BTreeMap::from([(w.to_string(), Complex64::new(1.0, 0.0))]) };
        basis
            .iter()
            .map(|r| basis.iter().map(|c| self.sandwich(&unit(r), &unit(c))).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValueReport {
    pub projector: ProjectorSpec,
    /// `None` when the states are orthogonal.
    pub value: Option<Complex64>,
    pub divergent: bool,
    pub numerator: Complex64,
    pub overlap: Complex64,
    pub cut: usize,
    pub epsilon: Option<f64>,
}

/// Overlaps below this fraction of |psi||phi| count as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

impl TwoStateVector {
    /// First cut on which every wire in `wires` is alive.
    pub fn cut_containing<'a>(&self, mut wires: impl Iterator<Item = &'a str>) -> Option<usize> {
        let ws: Vec<&str> = wires.by_ref().collect();
        let start = ws.iter().filter_map(|w| self.own_cut.get(*w)).max().copied()?;
        (start..self.cuts.len()).find(|&k| ws.iter().all(|w| self.cuts[k].forward.contains_key(*w)))
    }

    pub fn forward_at(&self, wire: &str) -> Complex64 {
        self.own_cut
            .get(wire)
            .and_then(|&k| self.cuts[k].forward.get(wire))
            .copied()
            .unwrap_or_default()
    }

    pub fn backward_at(&self, wire: &str) -> Complex64 {
        self.own_cut
            .get(wire)
            .and_then(|&k| self.cuts[k].backward.get(wire))
            .copied()
            .unwrap_or_default()
    }
}

/// <phi|P|psi> / <phi|psi> on the first cut that carries the projector's support.
pub fn weak_value(tsv: &TwoStateVector, p: &ProjectorSpec) -> Result<WeakValueReport> {
    let k = tsv
        .cut_containing(p.support.iter().map(|(w, _)| w.as_str()))
        .ok_or_else(|| Error::InvalidParameter(format!("no cut carries all of `{}`", p.label)))?;
    let cut = &tsv.cuts[k];
    let numerator = p.sandwich(&cut.backward, &cut.forward);
    let overlap = cut.overlap();
    let (nf, nb) = cut.norms();
    let divergent = overlap.norm() <= ORTHOGONALITY_TOL * nf * nb;
    Ok(WeakValueReport {
        projector: p.clone(),
        value: (!divergent).then(|| numerator / overlap),
        divergent,
        numerator,
        overlap,
        cut: k,
        epsilon: None,
    })
}

/// Wires on which both states exceed `eta` in magnitude.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub wires: BTreeSet<String>,
}

impl Trajectory {
    /// Ids of the modulators sitting on trajectory wires.
    pub fn eom_set(&self, c: &Circuit) -> BTreeSet<String> {
        self.wires.iter().filter_map(|w| c.eom_on_wire(w)).map(String::from).collect()
    }
}

pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-6;

pub fn tsvf_trajectory(tsv: &TwoStateVector, eta: f64) -> Trajectory {
    let wires = tsv
        .own_cut
        .keys()
        .filter(|w| tsv.forward_at(w).norm() > eta && tsv.backward_at(w).norm() > eta)
        .cloned()
        .collect();
    Trajectory { wires }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub label: String,
    /// Least-squares slope of ln|W| against ln(epsilon).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub points: Vec<(f64, f64)>,
    pub excluded: Vec<f64>,
    /// Every weak value on the grid was zero.
    pub identically_zero: bool,
}

/// `n` points from `a` to `b`, evenly spaced in log.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Magnitudes below this are treated as exact zeros in a scaling fit.
const ZERO_WEAK_VALUE: f64 = 1e-14;

/// Power-law exponent of |W| over a family of circuits indexed by epsilon.
pub fn weak_value_scaling(
    family: impl Fn(f64) -> Result<Circuit>,
    postselect: &str,
    p: &ProjectorSpec,
    eps_grid: &[f64],
) -> Result<ScalingReport> {
    if eps_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("epsilon grid must be positive".into()));
    }
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    let mut zeros = 0;
    for &eps in eps_grid {
        let tsv = two_state(&family(eps)?, postselect)?;
        let r = weak_value(&tsv, p)?;
        match r.value {
            Some(v) if v.norm() > ZERO_WEAK_VALUE => points.push((eps, v.norm())),
            Some(_) => {
                zeros += 1;
                excluded.push(eps);
            }
            None => {
                log::warn!("{}: divergent weak value at epsilon = {eps}, excluded", p.label);
                excluded.push(eps);
            }
        }
    }
    let identically_zero = zeros == eps_grid.len();
    if !excluded.is_empty() && !identically_zero {
        log::warn!("{}: {} grid points excluded from the fit", p.label, excluded.len());
    }
    let (slope, intercept) = if points.len() >= 2 {
        let (s, i) = fit_line(points.iter().map(|&(e, w)| (e.ln(), w.ln())));
        (Some(s), Some(i))
    } else {
        (None, None)
    };
    Ok(ScalingReport { label: p.label.clone(), slope, intercept, points, excluded, identically_zero })
}

fn fit_line(xy: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xy.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{BeamSplitterSpec, PhaseShifterSpec};

    fn mzi(phi: f64) -> Circuit {
        Circuit::new(
            "s",
            vec![
                Element::Bs(BeamSplitterSpec::new("b1", &["s"], ["u", "l"], 0.5)),
                Element::Phase(PhaseShifterSpec::new("p", "l", phi)),
                Element::Bs(BeamSplitterSpec::new("b2", &["u", "l"], ["o1", "o2"], 0.5)),
            ],
            &["o1", "o2"],
        )
        .unwrap()
    }

    #[test]
    fn identity_circuit() {
        let t = two_state(&Circuit::identity("w"), "w").unwrap();
        assert_eq!(t.overlap, Complex64::new(1.0, 0.0));
        let r = weak_value(&t, &ProjectorSpec::wire("w")).unwrap();
        assert_eq!(r.value, Some(Complex64::new(1.0, 0.0)));
        assert_eq!(tsvf_trajectory(&t, 1e-6).wires, BTreeSet::from(["w".to_string()]));
    }

    #[test]
    fn postselect_must_be_detected() {
        assert_eq!(two_state(&mzi(0.0), "u"), Err(Error::NotDetectWire("u".into())));
    }

    #[test]
    fn overlap_is_cut_independent() {
        let t = two_state(&mzi(0.7), "o1").unwrap();
        for cut in &t.cuts {
            assert!((cut.overlap() - t.overlap).norm() < 1e-15);
        }
    }

    #[test]
    fn dark_port_is_divergent() {
        let t = two_state(&mzi(0.0), "o1").unwrap();
        let r = weak_value(&t, &ProjectorSpec::wire("u")).unwrap();
        assert!(r.divergent && r.value.is_none());
    }

    #[test]
    fn sum_rule_on_each_cut() {
        let t = two_state(&mzi(0.3), "o1").unwrap();
        let r = weak_value(&t, &ProjectorSpec::wire("u")).unwrap().value.unwrap()
            + weak_value(&t, &ProjectorSpec::wire("l")).unwrap().value.unwrap();
        assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_one_projector_is_idempotent() {
        let p = ProjectorSpec::rank_one("E", &[("u", Complex64::new(1.0, 0.0)), ("l", Complex64::from_polar(1.0, 0.3))]).unwrap();
        let m = p.matrix(&["u", "l"]);
        for i in 0..2 {
            for j in 0..2 {
                let sq: Complex64 = (0..2).map(|k| m[i][k] * m[k][j]).sum();
                assert!((sq - m[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn log_spacing() {
        let g = log_spaced(1e-4, 1e-1, 16);
        assert_eq!(g.len(), 16);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[15] - 1e-1).abs() < 1e-15);
        assert!((g[1] / g[0] - g[15] / g[14]).abs() < 1e-12);
    }
}
