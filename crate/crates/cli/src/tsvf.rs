use std::f64::consts::PI;
use std::path::PathBuf;

use clap::Args;
use num_complex::Complex64;
use pathmark_core::tsvf::{log_spaced, ScalingReport, DEFAULT_SUPPORT_THRESHOLD};
use pathmark_core::{tsvf_trajectory, two_state, weak_value, weak_value_scaling, Circuit, Element, ProjectorSpec};
use serde::Serialize;

use crate::check::read_netlist;
use crate::error::CliError;
use crate::scan::pretty;
use crate::Output;

#[derive(Args, Debug)]
pub struct TsvfArgs {
    pub netlist: PathBuf,
    /// Wire the photon is post-selected on.
    #[arg(long, default_value = "out")]
    pub postselect: String,
    /// Fit |W| against epsilon over `start:stop:n`, log spaced.
    #[arg(long)]
    pub epsilon_sweep: Option<String>,
    /// Phase shifter that carries epsilon.
    #[arg(long, default_value = "eps")]
    pub epsilon_phase: String,
    /// Phase at epsilon = 0. Defaults to the netlist phase rounded to the
    /// nearest multiple of pi.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon_origin: Option<f64>,
    /// Wire to insert the epsilon phase on when the netlist has none.
    #[arg(long)]
    pub epsilon_wire: Option<String>,
    /// Support threshold for the trajectory.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_THRESHOLD)]
    pub eta: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Cx {
    re: f64,
    im: f64,
    abs: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx { re: z.re, im: z.im, abs: z.norm() }
    }
}

#[derive(Serialize)]
struct WireWeakValue {
    wire: String,
    eom: Option<String>,
    value: Option<Cx>,
    divergent: bool,
    cut: usize,
}

#[derive(Serialize)]
struct Trajectory {
    wires: Vec<String>,
    eoms: Vec<String>,
}

#[derive(Serialize)]
struct Report {
    postselect: String,
    overlap: Cx,
    divergent: bool,
    weak_values: Vec<WireWeakValue>,
    trajectory: Trajectory,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling: Option<Vec<ScalingReport>>,
}

fn parse_sweep(s: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Validation(vec![format!("error: --epsilon-sweep expects start:stop:n, got `{s}`")]);
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b, n) = (
        a.parse::<f64>().map_err(|_| bad())?,
        b.parse::<f64>().map_err(|_| bad())?,
        n.parse::<usize>().map_err(|_| bad())?,
    );
    if !(a > 0.0 && b > 0.0) || n < 2 {
        return Err(CliError::Validation(vec![
            "error: --epsilon-sweep needs positive bounds and at least 2 points".into(),
        ]));
    }
    Ok((a, b, n))
}

/// Circuit family with phase `a.epsilon_phase` set to origin plus epsilon.
fn epsilon_family(c: &Circuit, a: &TsvfArgs) -> Result<impl Fn(f64) -> pathmark_core::Result<Circuit>, CliError> {
    let existing = c.elements().iter().find_map(|e| match e {
        Element::Phase(p) if p.id == a.epsilon_phase => Some((p.wire.clone(), p.phi)),
        _ => None,
    });
    let (wire, phi) = match (existing, &a.epsilon_wire) {
        (Some(found), _) => found,
        (None, Some(w)) => (w.clone(), 0.0),
        (None, None) => {
            return Err(CliError::Validation(vec![format!(
                "error: no phase shifter `{}`; give --epsilon-wire to insert one",
                a.epsilon_phase
            )]))
        }
    };
    let base = a.epsilon_origin.unwrap_or_else(|| (phi / PI).round() * PI);
    log::info!("epsilon measured from phase {base} on `{}`", a.epsilon_phase);
    let id = a.epsilon_phase.clone();
    let c = c.clone();
    Ok(move |eps: f64| c.with_phase(&id, &wire, base + eps))
}

pub fn run(a: &TsvfArgs) -> Result<Output, CliError> {
    let c = read_netlist(&a.netlist)?;
    let tsv = two_state(&c, &a.postselect)?;
    let mut weak_values = Vec::new();
    for w in c.wires() {
        let r = weak_value(&tsv, &ProjectorSpec::wire(w))?;
        weak_values.push(WireWeakValue {
            wire: w.clone(),
            eom: c.eom_on_wire(w).map(String::from),
            value: r.value.map(Cx::from),
            divergent: r.divergent,
            cut: r.cut,
        });
    }
    let divergent = weak_values.iter().any(|w| w.divergent);
    if divergent {
        log::warn!("pre- and post-selected states are orthogonal; weak values diverge");
    }
    let traj = tsvf_trajectory(&tsv, a.eta);
    let scaling = match &a.epsilon_sweep {
        Some(spec) => {
            let (lo, hi, n) = parse_sweep(spec)?;
            let grid = log_spaced(lo, hi, n);
            let family = epsilon_family(&c, a)?;
            let eom_wires: Vec<(&String, &str)> = c
                .elements()
                .iter()
                .filter_map(|e| match e {
                    Element::Eom(m) => Some((&m.id, m.wire.as_str())),
                    _ => None,
                })
                .collect();
            let mut out = Vec::new();
            for (id, wire) in eom_wires {
                let mut p = ProjectorSpec::wire(wire);
                p.label = id.clone();
                out.push(weak_value_scaling(&family, &a.postselect, &p, &grid)?);
            }
            Some(out)
        }
        None => None,
    };
    let report = Report {
        postselect: a.postselect.clone(),
        overlap: tsv.overlap.into(),
        divergent,
        weak_values,
        trajectory: Trajectory { eoms: traj.eom_set(&c).into_iter().collect(), wires: traj.wires.into_iter().collect() },
        scaling,
    };
    let v = serde_json::to_value(&report).expect("report serializes");
    let parameters = serde_json::json!({
        "postselect": a.postselect,
        "epsilon_sweep": a.epsilon_sweep,
        "epsilon_phase": a.epsilon_phase,
        "epsilon_wire": a.epsilon_wire,
        "epsilon_origin": a.epsilon_origin,
        "eta": a.eta,
    });
    Ok(Output { bytes: pretty(&v), inputs: vec![a.netlist.clone()], parameters, seed: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_parses() {
        assert_eq!(parse_sweep("0.001:0.1:9").unwrap(), (0.001, 0.1, 9));
        assert!(parse_sweep("0:0.1:9").is_err());
        assert!(parse_sweep("0.1:0.2").is_err());
        assert!(parse_sweep("a:b:c").is_err());
    }
}
