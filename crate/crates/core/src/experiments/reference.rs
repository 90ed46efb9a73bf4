//! Built-in circuits: the nested interferometer in its three settings and
//! the twin-modulator interferometer.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elements::{BeamSplitterSpec, BlockSpec, Element, EomSpec, PhaseShifterSpec, DEFAULT_DEPTH, DEFAULT_EOM_ORDER};
use crate::error::{Error, Result};
use crate::netlist::Circuit;

pub const OMEGA_A: f64 = 2.8;
pub const OMEGA_B: f64 = 1.6;
pub const OMEGA_C: f64 = 2.1;
pub const OMEGA_E: f64 = 1.0;
pub const OMEGA_F: f64 = 3.4;
/// Drive frequency of both modulators in the twin interferometer.
pub const OMEGA_TWIN: f64 = 2.1;

/// Wire the detector sits on in every built-in circuit.
pub const DETECT_WIRE: &str = "out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceConfig {
    /// Inner interferometer constructive towards F.
    A,
    /// Inner interferometer dark towards F.
    B,
    /// As B with the outer arm blocked.
    C,
    /// Mach-Zehnder with equal-frequency modulators in both arms.
    Fig3,
}

impl ReferenceConfig {
    pub const ALL: [ReferenceConfig; 4] = [Self::A, Self::B, Self::C, Self::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
            Self::Fig3 => "fig3",
        }
    }
}

impl fmt::Display for ReferenceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReferenceConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "fig3" => Ok(Self::Fig3),
            other => Err(Error::InvalidParameter(format!("unknown reference config '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceParams {
    /// Modulation depth of every EOM, rad.
    pub depth: f64,
    /// Extra phase on arm B, rad.
    pub epsilon: f64,
    /// Phase on the outer arm C, rad.
    pub outer_phase: f64,
    /// Phase on the lower arm of the twin interferometer, rad.
    pub pzt_phase: f64,
    /// Reflectivity of the first splitter of the twin interferometer.
    pub twin_reflectivity: f64,
    /// Sideband truncation order of every EOM.
    pub order: u32,
}

impl Default for ReferenceParams {
    fn default() -> Self {
        Self {
            depth: DEFAULT_DEPTH,
            epsilon: 0.0,
            outer_phase: 0.0,
            pzt_phase: 0.0,
            twin_reflectivity: 0.5,
            order: DEFAULT_EOM_ORDER,
        }
    }
}

impl ReferenceParams {
    pub fn with_depth(self, depth: f64) -> Self {
        Self { depth, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.depth, self.epsilon, self.outer_phase, self.pzt_phase]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.depth < 0.0 {
            return Err(Error::InvalidParameter(format!("bad reference parameters {self:?}")));
        }
        if !(0.0..=1.0).contains(&self.twin_reflectivity) {
            return Err(Error::InvalidParameter(format!(
                "twin reflectivity {} outside [0, 1]",
                self.twin_reflectivity
            )));
        }
        Ok(())
    }
}

fn eom(id: &str, omega: f64, p: &ReferenceParams) -> Element {
    Element::Eom(EomSpec::new(id, id, omega, p.depth).with_order(p.order))
}

fn bs(id: &str, inputs: &[&str], outputs: [&str; 2], r: f64) -> Element {
    Element::Bs(BeamSplitterSpec::new(id, inputs, outputs, r))
}

fn phase(id: &str, wire: &str, phi: f64) -> Element {
    Element::Phase(PhaseShifterSpec::new(id, wire, phi))
}

/// Instantiate a built-in circuit.
///
/// The nested interferometer uses the modulator ids as wire names. Its
/// detector is bs4's second output; the other ports are detected too so
/// that no amplitude is lost.
pub fn build_reference(config: ReferenceConfig, p: &ReferenceParams) -> Result<Circuit> {
    p.validate()?;
    let (elements, detects): (Vec<Element>, Vec<&str>) = match config {
        ReferenceConfig::Fig3 => (
            vec![
                bs("s1", &["in"], ["upper", "lower"], p.twin_reflectivity),
                Element::Eom(EomSpec::new("M1", "upper", OMEGA_TWIN, p.depth).with_order(p.order)),
                Element::Eom(EomSpec::new("M2", "lower", OMEGA_TWIN, p.depth).with_order(p.order)),
                phase("pzt", "lower", p.pzt_phase),
                bs("s2", &["upper", "lower"], ["dark", DETECT_WIRE], 0.5),
            ],
            vec![DETECT_WIRE, "dark"],
        ),
        _ => {
            let inner = match config {
                ReferenceConfig::A => PI + p.epsilon,
                _ => p.epsilon,
            };
            let mut v = vec![
                bs("bs1", &["in"], ["C", "E"], 1.0 / 3.0),
                eom("E", OMEGA_E, p),
                bs("bs2", &["E"], ["A", "B"], 0.5),
                eom("A", OMEGA_A, p),
                eom("B", OMEGA_B, p),
                phase("eps", "B", inner),
                bs("bs3", &["A", "B"], ["F", "D"], 0.5),
                eom("F", OMEGA_F, p),
                eom("C", OMEGA_C, p),
                phase("outer", "C", p.outer_phase),
            ];
            if config == ReferenceConfig::C {
                v.push(Element::Block(BlockSpec::new("stop", "C")));
            }
            v.push(bs("bs4", &["C", "F"], ["X", DETECT_WIRE], 2.0 / 3.0));
            (v, vec![DETECT_WIRE, "X", "D"])
        }
    };
    Circuit::new("in", elements, &detects).map_err(|d| {
        Error::Wiring(d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
    })
}
