use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::diagnostics::{DiagCode, Diagnostic, Span};
use crate::elements::{Element, EomSpec};
use crate::error::{Error, Result};
use crate::state::PhotonState;

/// Frequency and depth of a registered modulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EomInfo {
    pub omega_ghz: f64,
    pub depth: f64,
}

/// A validated optical network.
///
/// Elements are stored in a topological order; applying them in sequence
/// is a valid evaluation of the network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    source: String,
    elements: Vec<Element>,
    detects: Vec<String>,
    wires: BTreeSet<String>,
    eoms: BTreeMap<String, EomInfo>,
}

/// Parsed but not yet validated pieces, with source positions.
pub(crate) struct Draft {
    pub sources: Vec<(String, Span)>,
    pub elements: Vec<(Element, Span)>,
    pub detects: Vec<(String, Span)>,
}

impl Draft {
    fn from_values(source: &str, elements: Vec<Element>, detects: &[&str]) -> Self {
        Self {
            sources: vec![(source.to_string(), Span::default())],
            elements: elements.into_iter().map(|e| (e, Span::default())).collect(),
            detects: detects.iter().map(|d| (d.to_string(), Span::default())).collect(),
        }
    }

    /// Checks all structural rules and returns a topological order of the
    /// elements when they hold.
    pub fn check(&self) -> (Vec<Diagnostic>, Option<Vec<usize>>) {
        let mut diags = Vec::new();
        match self.sources.len() {
            0 => diags.push(Diagnostic::new(DiagCode::MissingSource, Span::new(1, 1), "no `source` line")),
            1 => {}
            _ => {
                for (w, sp) in &self.sources[1..] {
                    diags.push(Diagnostic::new(DiagCode::MultipleSource, *sp, format!("second source `{w}`")));
                }
            }
        }
        if self.detects.is_empty() {
            diags.push(Diagnostic::new(DiagCode::NoDetect, Span::new(1, 1), "no `detect` line"));
        }

        let mut ids: HashMap<&str, Span> = HashMap::new();
        for (e, sp) in &self.elements {
            if let Some(prev) = ids.insert(e.id(), *sp) {
                diags.push(Diagnostic::new(
                    DiagCode::DuplicateId,
                    *sp,
                    format!("id `{}` already used on line {}", e.id(), prev.line),
                ));
            }
            check_params(e, *sp, &mut diags);
        }

        // writer/reader tables: None marks the source or a detector
        let mut writer: HashMap<&str, Option<usize>> = HashMap::new();
        let mut reader: HashMap<&str, Option<usize>> = HashMap::new();
        if let Some((w, _)) = self.sources.first() {
            writer.insert(w.as_str(), None);
        }
        for (i, (e, sp)) in self.elements.iter().enumerate() {
            if let Element::Bs(b) = e {
                for o in &b.outputs {
                    if writer.insert(o.as_str(), Some(i)).is_some() {
                        diags.push(Diagnostic::new(
                            DiagCode::DuplicateDriver,
                            *sp,
                            format!("wire `{o}` already has a writer"),
                        ));
                    }
                }
                for w in &b.inputs {
                    if reader.insert(w.as_str(), Some(i)).is_some() {
                        diags.push(Diagnostic::new(
                            DiagCode::DuplicateReader,
                            *sp,
                            format!("wire `{w}` already has a reader"),
                        ));
                    }
                }
            }
        }
        for (d, sp) in &self.detects {
            match reader.get(d.as_str()) {
                Some(Some(_)) => diags.push(Diagnostic::new(
                    DiagCode::DetectNotSink,
                    *sp,
                    format!("detect wire `{d}` feeds another element"),
                )),
                Some(None) => diags.push(Diagnostic::new(
                    DiagCode::DuplicateReader,
                    *sp,
                    format!("wire `{d}` detected twice"),
                )),
                None => {
                    reader.insert(d.as_str(), None);
                }
            }
        }
        for (e, sp) in &self.elements {
            let read: Vec<&str> = match e {
                Element::Bs(b) => b.inputs.iter().map(String::as_str).collect(),
                other => other.inline_wire().into_iter().collect(),
            };
            for w in read {
                if !writer.contains_key(w) {
                    diags.push(Diagnostic::new(
                        DiagCode::UndrivenWire,
                        *sp,
                        format!("wire `{w}` is never written"),
                    ));
                }
            }
        }

        // dependency edges
        let n = self.elements.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut last_on_wire: HashMap<&str, usize> = HashMap::new();
        for (i, (e, _)) in self.elements.iter().enumerate() {
            if let Some(w) = e.inline_wire() {
                let prev = last_on_wire.insert(w, i).or_else(|| writer.get(w).copied().flatten());
                if let Some(p) = prev {
                    succ[p].push(i);
                }
            }
        }
        for (w, r) in &reader {
            let Some(r) = r else { continue };
            let prev = last_on_wire.get(w).copied().or_else(|| writer.get(w).copied().flatten());
            if let Some(p) = prev {
                succ[p].push(*r);
            }
        }
        let order = kahn(&succ, |ready| ready.pop().map(|Reverse(i)| i));
        let order = if order.len() < n {
            let placed: BTreeSet<usize> = order.iter().copied().collect();
            let stuck: Vec<&str> = (0..n)
                .filter(|i| !placed.contains(i))
                .map(|i| self.elements[i].0.id())
                .collect();
            let sp = (0..n).find(|i| !placed.contains(i)).map(|i| self.elements[i].1).unwrap_or_default();
            diags.push(Diagnostic::new(
                DiagCode::Cycle,
                sp,
                format!("elements form a cycle: {}", stuck.join(", ")),
            ));
            None
        } else {
            Some(order)
        };

        // reachability from the source through beam splitters
        if let Some((src, _)) = self.sources.first() {
            let mut reach: BTreeSet<&str> = BTreeSet::from([src.as_str()]);
            loop {
                let before = reach.len();
                for (e, _) in &self.elements {
                    if let Element::Bs(b) = e {
                        if b.inputs.iter().any(|w| reach.contains(w.as_str())) {
                            reach.extend(b.outputs.iter().map(String::as_str));
                        }
                    }
                }
                if reach.len() == before {
                    break;
                }
            }
            for (d, sp) in &self.detects {
                if !reach.contains(d.as_str()) {
                    diags.push(Diagnostic::new(
                        DiagCode::UnreachableDetect,
                        *sp,
                        format!("detect wire `{d}` cannot be reached from source `{src}`"),
                    ));
                }
            }
        }

        diags.sort_by_key(|d| d.span);
        let ok = diags.is_empty();
        (diags, if ok { order } else { None })
    }

    pub fn into_circuit(self) -> std::result::Result<Circuit, Vec<Diagnostic>> {
        let (diags, order) = self.check();
        let Some(order) = order else { return Err(diags) };
        let mut slots: Vec<Option<Element>> = self.elements.into_iter().map(|(e, _)| Some(e)).collect();
        let elements = order.iter().map(|&i| slots[i].take().expect("each index once")).collect();
        Ok(Circuit::assemble(
            self.sources.into_iter().next().map(|s| s.0).unwrap_or_default(),
            elements,
            self.detects.into_iter().map(|d| d.0).collect(),
        ))
    }
}

fn check_params(e: &Element, sp: Span, diags: &mut Vec<Diagnostic>) {
    match e {
        Element::Bs(b) => {
            if !(0.0..=1.0).contains(&b.reflectivity) {
                diags.push(Diagnostic::new(
                    DiagCode::ReflectivityRange,
                    sp,
                    format!("{}: reflectivity {} outside [0, 1]", b.id, b.reflectivity),
                ));
            }
            if b.inputs.is_empty() || b.inputs.len() > 2 {
                diags.push(Diagnostic::new(DiagCode::Arity, sp, format!("{}: needs 1 or 2 inputs", b.id)));
            }
        }
        Element::Eom(m) => {
            if let Err(err) = m.validate() {
                diags.push(Diagnostic::new(DiagCode::ParamRange, sp, err.to_string()));
            }
        }
        Element::Phase(p) => {
            if !p.phi.is_finite() {
                diags.push(Diagnostic::new(DiagCode::ParamRange, sp, format!("{}: phase must be finite", p.id)));
            }
        }
        Element::Block(_) => {}
    }
}

/// Kahn's algorithm; `pick` chooses among the ready nodes.
fn kahn(succ: &[Vec<usize>], mut pick: impl FnMut(&mut BinaryHeap<Reverse<usize>>) -> Option<usize>) -> Vec<usize> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &j in s {
            indeg[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = pick(&mut ready) {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    order
}

impl Circuit {
    fn assemble(source: String, elements: Vec<Element>, detects: Vec<String>) -> Self {
        let mut wires = BTreeSet::from([source.clone()]);
        let mut eoms = BTreeMap::new();
        for e in &elements {
            match e {
                Element::Bs(b) => {
                    wires.extend(b.inputs.iter().cloned());
                    wires.extend(b.outputs.iter().cloned());
                }
                Element::Eom(EomSpec { id, wire, omega_ghz, depth, .. }) => {
                    wires.insert(wire.clone());
                    eoms.insert(id.clone(), EomInfo { omega_ghz: *omega_ghz, depth: *depth });
                }
                other => {
                    wires.extend(other.inline_wire().map(String::from));
                }
            }
        }
        wires.extend(detects.iter().cloned());
        Self { source, elements, detects, wires, eoms }
    }

    /// Validates the parts and orders the elements topologically.
    pub fn new(source: &str, elements: Vec<Element>, detects: &[&str]) -> std::result::Result<Self, Vec<Diagnostic>> {
        Draft::from_values(source, elements, detects).into_circuit()
    }

    /// Builds a circuit without any checks, keeping the given element order.
    /// Use [`validate_circuit`] to inspect it.
    pub fn new_unchecked(source: &str, elements: Vec<Element>, detects: &[&str]) -> Self {
        Self::assemble(source.to_string(), elements, detects.iter().map(|d| d.to_string()).collect())
    }

    /// A bare wire from source to detector.
    pub fn identity(wire: &str) -> Self {
        Self::assemble(wire.to_string(), Vec::new(), vec![wire.to_string()])
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn detects(&self) -> &[String] {
        &self.detects
    }

    pub fn wires(&self) -> &BTreeSet<String> {
        &self.wires
    }

    pub fn eoms(&self) -> &BTreeMap<String, EomInfo> {
        &self.eoms
    }

    pub fn eom_freqs(&self) -> BTreeMap<String, f64> {
        self.eoms.iter().map(|(k, v)| (k.clone(), v.omega_ghz)).collect()
    }

    /// Id of the modulator sitting on `wire`, if any.
    pub fn eom_on_wire(&self, wire: &str) -> Option<&str> {
        self.elements.iter().find_map(|e| match e {
            Element::Eom(m) if m.wire == wire => Some(m.id.as_str()),
            _ => None,
        })
    }

    pub fn has_blocks(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Block(_)))
    }

    fn rebuild(&self, elements: Vec<Element>) -> std::result::Result<Self, Vec<Diagnostic>> {
        let detects: Vec<&str> = self.detects.iter().map(String::as_str).collect();
        Self::new(&self.source, elements, &detects)
    }

    /// Same circuit with elements applied in `order` (indices into
    /// [`Circuit::elements`]), if that order respects every dependency.
    pub fn reordered(&self, order: &[usize]) -> Option<Self> {
        let n = self.elements.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return None;
        }
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let valid = self.dependency_edges().iter().all(|&(a, b)| pos[a] < pos[b]);
        valid.then(|| {
            let permuted = order.iter().map(|&i| self.elements[i].clone()).collect();
            Self::assemble(self.source.clone(), permuted, self.detects.clone())
        })
    }

    /// Dependency edges (earlier, later) between indices of the stored elements.
    fn dependency_edges(&self) -> Vec<(usize, usize)> {
        let mut writer: HashMap<&str, usize> = HashMap::new();
        let mut reader: HashMap<&str, usize> = HashMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if let Element::Bs(b) = e {
                for o in &b.outputs {
                    writer.insert(o, i);
                }
                for w in &b.inputs {
                    reader.insert(w, i);
                }
            }
        }
        let mut inline: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if let Some(w) = e.inline_wire() {
                inline.entry(w).or_default().push(i);
            }
        }
        let mut edges = Vec::new();
        for (w, &r) in &reader {
            if let Some(&wr) = writer.get(w) {
                edges.push((wr, r));
            }
        }
        for (w, chain) in &inline {
            edges.extend(chain.windows(2).map(|p| (p[0], p[1])));
            if let (Some(&wr), Some(&first)) = (writer.get(w), chain.first()) {
                edges.push((wr, first));
            }
            if let (Some(&r), Some(&last)) = (reader.get(w), chain.last()) {
                edges.push((last, r));
            }
        }
        edges
    }

    /// A random valid evaluation order, drawn with `choose(n)` returning an
    /// index below `n`.
    pub fn random_order(&self, mut choose: impl FnMut(usize) -> usize) -> Vec<usize> {
        let edges = self.dependency_edges();
        let mut succ = vec![Vec::new(); self.elements.len()];
        for (a, b) in edges {
            succ[a].push(b);
        }
        kahn(&succ, |ready| {
            if ready.is_empty() {
                return None;
            }
            let mut items: Vec<Reverse<usize>> = std::mem::take(ready).into_vec();
            items.sort();
            let k = choose(items.len());
            let Reverse(pick) = items.remove(k);
            ready.extend(items);
            Some(pick)
        })
    }

    /// Sets the phase of the phase shifter `id`, inserting it on `wire` if
    /// the circuit has no element with that id.
    pub fn with_phase(&self, id: &str, wire: &str, phi: f64) -> Result<Self> {
        let mut elements = self.elements.clone();
        if let Some(e) = elements.iter_mut().find(|e| e.id() == id) {
            match e {
                Element::Phase(p) => p.phi = phi,
                _ => return Err(Error::InvalidParameter(format!("`{id}` is not a phase shifter"))),
            }
        } else {
            if !self.wires.contains(wire) {
                return Err(Error::Wiring(format!("no wire `{wire}`")));
            }
            let at = self
                .elements
                .iter()
                .position(|e| match e {
                    Element::Bs(b) => b.outputs.iter().any(|o| o == wire),
                    _ => false,
                })
                .map(|i| i + 1)
                .unwrap_or(0);
            elements.insert(at, Element::Phase(crate::elements::PhaseShifterSpec::new(id, wire, phi)));
        }
        self.rebuild(elements).map_err(|d| Error::Wiring(format!("{d:?}")))
    }

    /// Applies `f` to every modulator.
    pub fn map_eoms(&self, f: impl Fn(&mut EomSpec)) -> Self {
        let elements = self
            .elements
            .iter()
            .cloned()
            .map(|mut e| {
                if let Element::Eom(m) = &mut e {
                    f(m);
                }
                e
            })
            .collect();
        Self::assemble(self.source.clone(), elements, self.detects.clone())
    }

    /// Same circuit with every modulator switched off.
    pub fn without_modulation(&self) -> Self {
        self.map_eoms(|m| m.depth = 0.0)
    }
}

impl fmt::Display for Circuit {
    /// Netlist text that parses back to an identical circuit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source {}", self.source)?;
        for e in &self.elements {
            writeln!(f, "{e}")?;
        }
        for d in &self.detects {
            writeln!(f, "detect {d}")?;
        }
        Ok(())
    }
}

/// Re-checks every structural rule on an existing circuit. Empty iff valid.
pub fn validate_circuit(c: &Circuit) -> Vec<Diagnostic> {
    let draft = Draft::from_values(
        &c.source,
        c.elements.clone(),
        &c.detects.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    let (mut diags, order) = draft.check();
    if order.is_some() {
        // stored order must itself be a valid evaluation order
        if c.reordered(&(0..c.elements.len()).collect::<Vec<_>>()).is_none() {
            diags.push(Diagnostic::new(DiagCode::Cycle, Span::default(), "stored element order is not topological"));
        }
    }
    diags
}

/// Output of [`propagate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    /// State restricted to each detect wire.
    pub detected: BTreeMap<String, PhotonState>,
    /// Norm removed by blocks.
    pub absorbed_norm: f64,
    /// Norm left on wires that are neither read nor detected.
    pub undetected_norm: f64,
}

impl Propagation {
    pub fn at(&self, wire: &str) -> Option<&PhotonState> {
        self.detected.get(wire)
    }

    pub fn detected_norm(&self) -> f64 {
        self.detected.values().map(PhotonState::norm_squared).sum()
    }
}

/// Applies every element in order to `input`, which must live on the source wire.
pub fn propagate(c: &Circuit, input: &PhotonState) -> Result<Propagation> {
    if input.wires().any(|w| w != c.source) {
        return Err(Error::InvalidParameter(format!(
            "input state must live on the source wire `{}`",
            c.source
        )));
    }
    let mut s = input.clone();
    let mut absorbed = 0.0;
    for e in &c.elements {
        if let Element::Block(b) = e {
            absorbed += s.wire_norm_squared(&b.wire);
        }
        s = e.apply(s)?;
    }
    let detected: BTreeMap<String, PhotonState> =
        c.detects.iter().map(|d| (d.clone(), s.restricted_to(d))).collect();
    let undetected_norm = s
        .wires()
        .filter(|w| !c.detects.iter().any(|d| d == w))
        .map(|w| s.wire_norm_squared(w))
        .sum();
    Ok(Propagation { detected, absorbed_norm: absorbed, undetected_norm })
}
